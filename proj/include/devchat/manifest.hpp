#pragma once

// Run manifest written next to every CLI artifact.

#include <chrono>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace devchat {

struct RunManifest {
  std::string command;
  std::vector<std::string> arguments;
  std::string config_hash;
  std::map<std::string, std::uint64_t> seeds;
  struct FileDigest {
    std::string path;
    std::string sha256;
  };
  std::vector<FileDigest> inputs;
  std::vector<FileDigest> outputs;
  std::vector<std::pair<std::string, std::uint64_t>> row_counts;  // stage order
  struct RowDelta {
    std::string stage;
    std::int64_t delta;
    std::string reason;
  };
  std::vector<RowDelta> row_deltas;
  nlohmann::json dropped_features = nlohmann::json::object();
  nlohmann::json notes = nlohmann::json::object();
  std::vector<std::pair<std::string, double>> timings;  // seconds

  void add_input(const std::string& path);
  void add_output(const std::string& path);
  void count(const std::string& stage, std::uint64_t rows) { row_counts.emplace_back(stage, rows); }
  void delta(const std::string& stage, std::int64_t change, const std::string& reason) {
    row_deltas.push_back({stage, change, reason});
  }

  nlohmann::json to_json() const;
  // Writes `<artifact>.manifest.json`.
  void write_for(const std::string& artifact_path) const;
};

// Measures one named phase into a manifest.
class PhaseTimer {
 public:
  PhaseTimer(RunManifest& manifest, std::string phase)
      : manifest_(manifest), phase_(std::move(phase)), start_(std::chrono::steady_clock::now()) {}
  ~PhaseTimer() {
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start_;
    manifest_.timings.emplace_back(phase_, elapsed.count());
  }
  PhaseTimer(const PhaseTimer&) = delete;
  PhaseTimer& operator=(const PhaseTimer&) = delete;

 private:
  RunManifest& manifest_;
  std::string phase_;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace devchat
