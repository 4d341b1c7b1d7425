#include "devchat/manifest.hpp"

#include <fstream>

#include "devchat/digest.hpp"
#include "devchat/error.hpp"
#include "devchat/kernels.hpp"

namespace devchat {

void RunManifest::add_input(const std::string& path) { inputs.push_back({path, sha256_file(path)}); }
void RunManifest::add_output(const std::string& path) { outputs.push_back({path, sha256_file(path)}); }

nlohmann::json RunManifest::to_json() const {
  using nlohmann::json;
  auto files = [](const std::vector<FileDigest>& list) {
    json out = json::array();
    for (const auto& f : list) out.push_back({{"path", f.path}, {"sha256", f.sha256}});
    return out;
  };
  json counts = json::array();
  for (const auto& [stage, rows] : row_counts) counts.push_back({{"stage", stage}, {"rows", rows}});
  json deltas = json::array();
  for (const auto& d : row_deltas) deltas.push_back({{"stage", d.stage}, {"delta", d.delta}, {"reason", d.reason}});
  json times = json::array();
  for (const auto& [phase, seconds] : timings) times.push_back({{"phase", phase}, {"seconds", seconds}});
  return {
      {"command", command},
      {"arguments", arguments},
      {"config_hash", config_hash},
      {"seeds", seeds},
      {"inputs", files(inputs)},
      {"outputs", files(outputs)},
      {"row_counts", std::move(counts)},
      {"row_deltas", std::move(deltas)},
      {"dropped_features", dropped_features},
      {"notes", notes},
      {"kernel_isa", kernels::isa_name(kernels::active_isa())},
      {"timings", std::move(times)},
  };
}

void RunManifest::write_for(const std::string& artifact_path) const {
  const std::string path = artifact_path + ".manifest.json";
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write '" + path + "'");
  out << to_json().dump(2) << '\n';
}

}  // namespace devchat
