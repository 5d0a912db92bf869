#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "eventflow/clustering.hpp"
#include "eventflow/date.hpp"
#include "eventflow/jumpflow.hpp"
#include "eventflow/studies.hpp"

namespace eventflow::cli {

namespace fs = std::filesystem;

inline constexpr const char* kEnvPrefix = "EVENTFLOW_";

struct RunConfig {
  fs::path input_dir;
  fs::path events;
  fs::path out = "out";
  fs::path templ;
  fs::path flows;
  std::uint64_t seed = 42;
  jumpflow::JumpConfig jump;
  std::optional<std::int64_t> flow_window;  // command default when unset
  std::vector<std::string> exclude_sources;
  std::size_t k_min = 2;
  std::size_t k_max = 8;
  std::vector<clustering::Linkage> linkages{clustering::Linkage::average};
  clustering::ClusterSpace space = clustering::ClusterSpace::dtw;
  std::size_t workers = 0;
  std::int64_t stride = 1;
  std::optional<std::size_t> band = 2;
  std::size_t n_dates = 200;
  double depth = 3.0;
  std::size_t top_n = 0;
  std::vector<Date> dates;
  studies::ConsensusMode consensus = studies::ConsensusMode::dba;
  double gamma = 1.0;

  // Flow half-width for a command: explicit value, else 30 for baseline and 28 otherwise.
  std::int64_t flow_half_width(const std::string& command) const;
  jumpflow::FlowParams flow_params(const std::string& command) const;
  studies::ConsensusOptions consensus_options() const;

  // Numeric preconditions and the existence of referenced paths.
  void validate(const std::string& command) const;
};

// Every configurable key, in the spelling used by config files.
const std::vector<std::string>& config_keys();

// Converts a textual override (env var or flag) into the JSON type of `key`.
// Lists are comma separated; `k_range` expands to k_min / k_max.
void apply_override(nlohmann::json& doc, const std::string& key, const std::string& value);

// Reads a config file; a run manifest is accepted and its "config" object used.
nlohmann::json load_config_file(const fs::path& path);

// File values, then EVENTFLOW_<KEY> environment variables, then flags.
nlohmann::json resolve(const std::optional<fs::path>& config_file,
                       const std::map<std::string, std::string>& flags);

RunConfig from_json(const nlohmann::json& doc);
nlohmann::json to_json(const RunConfig& cfg, const std::string& command);

}  // namespace eventflow::cli
