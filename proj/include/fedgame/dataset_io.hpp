#pragma once
// Dataset container: a little-endian binary format ("FGDS") plus a CSV dump
// for inspection.
//
// Layout: magic "FGDS", u32 version, u64 n, u32 d, u32 I, then n*d float32
// features (row-major), then n uint16 labels.

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "fedgame/core.hpp"
#include "fedgame/datagen.hpp"

namespace fedgame::datagen {

namespace detail {

template <typename T>
void put_le(std::string& out, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i)
    out.push_back(static_cast<char>((static_cast<std::uint64_t>(v) >> (8 * i)) & 0xff));
}

template <typename T>
T get_le(const std::string& in, std::size_t& off) {
  if (off + sizeof(T) > in.size())
    throw FormatError("FGDS: truncated file (needed " + std::to_string(off + sizeof(T)) +
                      " bytes, have " + std::to_string(in.size()) + ")");
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i)
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[off + i])) << (8 * i);
  off += sizeof(T);
  return static_cast<T>(v);
}

}  // namespace detail

inline constexpr std::uint32_t kFgdsVersion = 1;

inline std::string encode_fgds(const LabeledDataset& ds) {
  std::string out;
  out.reserve(20 + static_cast<std::size_t>(ds.n) * (ds.d * 4 + 2));
  out += "FGDS";
  detail::put_le<std::uint32_t>(out, kFgdsVersion);
  detail::put_le<std::uint64_t>(out, static_cast<std::uint64_t>(ds.n));
  detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(ds.d));
  detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(ds.classes));
  for (double f : ds.features) {
    float x = static_cast<float>(f);
    std::uint32_t bits;
    std::memcpy(&bits, &x, 4);
    detail::put_le<std::uint32_t>(out, bits);
  }
  for (int y : ds.labels) detail::put_le<std::uint16_t>(out, static_cast<std::uint16_t>(y));
  return out;
}

inline LabeledDataset decode_fgds(const std::string& in) {
  if (in.size() < 4 || in.compare(0, 4, "FGDS") != 0)
    throw FormatError("FGDS: bad magic");
  std::size_t off = 4;
  std::uint32_t version = detail::get_le<std::uint32_t>(in, off);
  if (version != kFgdsVersion)
    throw FormatError("FGDS: unsupported version " + std::to_string(version));
  std::uint64_t n = detail::get_le<std::uint64_t>(in, off);
  std::uint32_t d = detail::get_le<std::uint32_t>(in, off);
  std::uint32_t classes = detail::get_le<std::uint32_t>(in, off);
  LabeledDataset ds;
  ds.n = static_cast<int>(n);
  ds.d = static_cast<int>(d);
  ds.classes = static_cast<int>(classes);
  ds.features.resize(n * d);
  for (std::size_t i = 0; i < n * d; ++i) {
    std::uint32_t bits = detail::get_le<std::uint32_t>(in, off);
    float x;
    std::memcpy(&x, &bits, 4);
    ds.features[i] = static_cast<double>(x);
  }
  ds.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::uint16_t y = detail::get_le<std::uint16_t>(in, off);
    if (y >= classes)
      throw FormatError("FGDS: label " + std::to_string(y) + " out of range at index " +
                        std::to_string(i));
    ds.labels[i] = static_cast<int>(y);
  }
  ds.empirical = empirical_distribution(ds.labels, ds.classes);
  return ds;
}

inline void write_fgds(const std::string& path, const LabeledDataset& ds) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open for writing: " + path);
  std::string bytes = encode_fgds(ds);
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

inline LabeledDataset read_fgds(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open for reading: " + path);
  std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return decode_fgds(bytes);
}

inline void write_dataset_csv(std::ostream& os, const LabeledDataset& ds) {
  os << "label";
  for (int j = 0; j < ds.d; ++j) os << ",f" << j;
  os << "\n";
  char buf[64];
  for (int i = 0; i < ds.n; ++i) {
    os << ds.labels[static_cast<std::size_t>(i)];
    const double* row = ds.row(i);
    for (int j = 0; j < ds.d; ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", row[j]);
      os << ',' << buf;
    }
    os << "\n";
  }
}

}  // namespace fedgame::datagen
