#pragma once

#include <exception>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "cli/run_config.hpp"

namespace eventflow::cli {

inline const std::vector<std::string> kCommands{"entropy", "flows",    "cluster", "baseline",
                                                "query",   "simulate", "plot"};

struct RunResult {
  std::vector<fs::path> inputs;   // files whose digests go into the manifest
  std::vector<fs::path> outputs;  // relative to the output directory
  std::vector<std::string> warnings;
};

RunResult run_command(const std::string& command, const RunConfig& cfg);

// manifest-<command>.json: config echo, seed, input digests, output digests, version.
void write_manifest(const std::string& command, const RunConfig& cfg, const RunResult& result);

// 2 config, 3 data, 4 numeric, 1 anything else.
int exit_code_for(const std::exception& e);
nlohmann::json error_record(const std::string& command, const std::exception& e);

// Full command line handling; returns the process exit status.
int run_cli(int argc, const char* const* argv);

const char* tool_version();

}  // namespace eventflow::cli
