#pragma once
// IDX image/label loader (the MNIST file layout): big-endian headers, magic
// 0x00000803 for images and 0x00000801 for labels. Pixels are scaled to
// [0,1] and flattened.

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "fedgame/core.hpp"
#include "fedgame/datagen.hpp"

namespace fedgame::harness {

namespace detail {

inline std::uint32_t read_be32(std::istream& is, const std::string& path) {
  unsigned char b[4];
  if (!is.read(reinterpret_cast<char*>(b), 4))
    throw FormatError("IDX: truncated header in " + path);
  return (static_cast<std::uint32_t>(b[0]) << 24) | (static_cast<std::uint32_t>(b[1]) << 16) |
         (static_cast<std::uint32_t>(b[2]) << 8) | static_cast<std::uint32_t>(b[3]);
}

inline std::string hex32(std::uint32_t v) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "0x%08x", v);
  return buf;
}

}  // namespace detail

inline constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;

// Parses an images/labels pair into a LabeledDataset with n x (rows*cols)
// features in [0,1]. `classes` bounds the admissible label values.
inline datagen::LabeledDataset load_idx_dataset(const std::string& images_path,
                                                const std::string& labels_path, int classes) {
  std::ifstream imgs(images_path, std::ios::binary);
  if (!imgs) throw ConfigError("IDX: cannot open " + images_path);
  std::uint32_t magic = detail::read_be32(imgs, images_path);
  if (magic != kIdxImagesMagic)
    throw FormatError("IDX: bad images magic in " + images_path + ": observed " +
                      detail::hex32(magic) + ", expected " + detail::hex32(kIdxImagesMagic));
  std::uint32_t n = detail::read_be32(imgs, images_path);
  std::uint32_t rows = detail::read_be32(imgs, images_path);
  std::uint32_t cols = detail::read_be32(imgs, images_path);

  std::ifstream labs(labels_path, std::ios::binary);
  if (!labs) throw ConfigError("IDX: cannot open " + labels_path);
  std::uint32_t lmagic = detail::read_be32(labs, labels_path);
  if (lmagic != kIdxLabelsMagic)
    throw FormatError("IDX: bad labels magic in " + labels_path + ": observed " +
                      detail::hex32(lmagic) + ", expected " + detail::hex32(kIdxLabelsMagic));
  std::uint32_t ln = detail::read_be32(labs, labels_path);
  if (ln != n)
    throw FormatError("IDX: image/label count mismatch: " + std::to_string(n) + " images vs " +
                      std::to_string(ln) + " labels");

  const std::size_t d = static_cast<std::size_t>(rows) * cols;
  datagen::LabeledDataset ds;
  ds.n = static_cast<int>(n);
  ds.d = static_cast<int>(d);
  ds.classes = classes;
  ds.features.resize(static_cast<std::size_t>(n) * d);
  std::vector<unsigned char> buf(d);
  for (std::uint32_t i = 0; i < n; ++i) {
    if (!imgs.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(d))) {
      std::size_t expected = 16 + static_cast<std::size_t>(n) * d;
      imgs.clear();
      imgs.seekg(0, std::ios::end);
      throw FormatError("IDX: truncated image data in " + images_path + ": expected " +
                        std::to_string(expected) + " bytes, got " +
                        std::to_string(static_cast<long long>(imgs.tellg())));
    }
    double* row = ds.features.data() + static_cast<std::size_t>(i) * d;
    for (std::size_t j = 0; j < d; ++j) row[j] = buf[j] / 255.0;
  }

  ds.labels.resize(n);
  std::vector<unsigned char> lbuf(n);
  if (!labs.read(reinterpret_cast<char*>(lbuf.data()), static_cast<std::streamsize>(n))) {
    std::size_t expected = 8 + static_cast<std::size_t>(n);
    labs.clear();
    labs.seekg(0, std::ios::end);
    throw FormatError("IDX: truncated label data in " + labels_path + ": expected " +
                      std::to_string(expected) + " bytes, got " +
                      std::to_string(static_cast<long long>(labs.tellg())));
  }
  for (std::uint32_t i = 0; i < n; ++i) {
    if (lbuf[i] >= classes)
      throw FormatError("IDX: label " + std::to_string(static_cast<int>(lbuf[i])) +
                        " out of range [0," + std::to_string(classes) + ") at index " +
                        std::to_string(i));
    ds.labels[i] = static_cast<int>(lbuf[i]);
  }
  ds.empirical = datagen::empirical_distribution(ds.labels, classes);
  return ds;
}

}  // namespace fedgame::harness
