#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "protosarc/embedding_store.hpp"

namespace fixtures {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("protosarc-test-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

inline protosarc::EmbeddingRecord record(std::string id, int y, protosarc::Vec e_ct, protosarc::Vec e_st, int z_ep) {
  protosarc::EmbeddingRecord r;
  r.id = std::move(id);
  r.text = "text of " + r.id;
  r.y = y;
  r.e_ct = std::move(e_ct);
  r.e_st_ep = e_st;
  r.e_st_ip = e_st;
  r.e_st_full = e_st;
  r.z_ep = z_ep;
  r.z_ip = y == 0 ? z_ep : 1 - z_ep;
  r.z_full = z_ep;
  return r;
}

inline protosarc::Dataset dataset(std::size_t d_s, std::size_t d_m) {
  protosarc::Dataset ds;
  ds.manifest.d_s = d_s;
  ds.manifest.d_m = d_m;
  ds.manifest.dataset = "fixture";
  ds.manifest.split = "train";
  ds.manifest.semantic_encoder = "none";
  ds.manifest.sentiment_encoder = "none";
  return ds;
}

inline const char* kManifest4 =
    R"({"d_s": 4, "d_m": 4, "dataset": "toy", "split": "train", "semantic_encoder": "a", "sentiment_encoder": "b", "encoding": "plain"})";

inline std::string record_line(const std::string& id, int y, int z_ep, int z_ip, const std::string& e_ct = "[1,2,3,4]") {
  return R"({"id": ")" + id + R"(", "text": "t", "ancestor": null, "y": )" + std::to_string(y) + R"(, "e_ct": )" + e_ct +
         R"(, "e_st_ep": [0,0,0,1], "e_st_ip": [0,0,1,0], "e_st_full": [0,1,0,0], "z_ep": )" + std::to_string(z_ep) +
         R"(, "z_ip": )" + std::to_string(z_ip) + R"(, "z_full": 0})";
}

}  // namespace fixtures
