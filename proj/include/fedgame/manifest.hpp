#pragma once
// Run manifest: config snapshot, seeds, dataset fingerprints, output file
// inventory with sizes and content hashes, and wall-clock timings. A manifest
// is sufficient to reproduce a run (the config loader accepts it directly).

#include <chrono>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fedgame/config.hpp"
#include "fedgame/core.hpp"

namespace fedgame::harness {

inline constexpr const char* kArtifactVersion = "0.1.0";

inline std::string hash_hex(std::uint64_t h) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline std::string file_fingerprint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("fingerprint: cannot open " + path);
  std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return hash_hex(fnv1a64_bytes(bytes.data(), bytes.size()));
}

class RunManifest {
 public:
  RunManifest(const RunConfig& config, std::string out_dir)
      : config_(config), out_dir_(std::move(out_dir)),
        start_(std::chrono::steady_clock::now()) {
    std::filesystem::create_directories(out_dir_);
  }

  const std::string& out_dir() const { return out_dir_; }

  std::string path(const std::string& name) const {
    return (std::filesystem::path(out_dir_) / name).string();
  }

  // Registers a file already written below out_dir.
  void record_file(const std::string& name) {
    const std::string p = path(name);
    Entry e;
    e.name = name;
    e.bytes = static_cast<std::uint64_t>(std::filesystem::file_size(p));
    e.fnv1a64 = file_fingerprint(p);
    files_.push_back(std::move(e));
  }

  void write_text(const std::string& name, const std::string& content) {
    std::ofstream f(path(name), std::ios::binary);
    if (!f) throw ConfigError("cannot open for writing: " + path(name));
    f << content;
    f.close();
    record_file(name);
  }

  void record_dataset(const std::string& label, std::uint64_t hash) {
    datasets_.emplace_back(label, hash_hex(hash));
  }

  void record_timing(const std::string& label, double seconds) {
    timings_.emplace_back(label, seconds);
  }

  void finalize() {
    double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    record_timing("total", total);
    json j;
    j["fedgame_manifest"] = 1;
    j["artifact_version"] = kArtifactVersion;
    j["trace_format"] = "fedgame-trace v1";
    j["fgds_version"] = 1;
    j["seed"] = config_.seed;
    j["config"] = run_config_to_json(config_);
    json ds = json::array();
    for (const auto& [label, hash] : datasets_) ds.push_back({{"label", label}, {"fnv1a64", hash}});
    j["datasets"] = ds;
    json fs = json::array();
    for (const auto& e : files_)
      fs.push_back({{"path", e.name}, {"bytes", e.bytes}, {"fnv1a64", e.fnv1a64}});
    j["files"] = fs;
    json ts = json::object();
    for (const auto& [label, secs] : timings_) ts[label] = secs;
    j["timings_s"] = ts;
    std::ofstream f(path("manifest.json"), std::ios::binary);
    if (!f) throw ConfigError("cannot write manifest.json in " + out_dir_);
    f << j.dump(2) << "\n";
  }

  // Every listed output exists with the recorded size and hash.
  static bool verify(const std::string& manifest_path, std::string* problem = nullptr) {
    std::ifstream f(manifest_path);
    if (!f) {
      if (problem) *problem = "manifest not found: " + manifest_path;
      return false;
    }
    json j = json::parse(f);
    auto dir = std::filesystem::path(manifest_path).parent_path();
    for (const auto& e : j.at("files")) {
      auto p = dir / e.at("path").get<std::string>();
      if (!std::filesystem::exists(p)) {
        if (problem) *problem = "missing output: " + p.string();
        return false;
      }
      if (std::filesystem::file_size(p) != e.at("bytes").get<std::uint64_t>()) {
        if (problem) *problem = "size mismatch: " + p.string();
        return false;
      }
      if (file_fingerprint(p.string()) != e.at("fnv1a64").get<std::string>()) {
        if (problem) *problem = "hash mismatch: " + p.string();
        return false;
      }
    }
    return true;
  }

 private:
  struct Entry {
    std::string name;
    std::uint64_t bytes = 0;
    std::string fnv1a64;
  };

  RunConfig config_;
  std::string out_dir_;
  std::chrono::steady_clock::time_point start_;
  std::vector<Entry> files_;
  std::vector<std::pair<std::string, std::string>> datasets_{};
  std::vector<std::pair<std::string, double>> timings_{};
};

}  // namespace fedgame::harness
