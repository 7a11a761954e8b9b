#pragma once

#include <exception>
#include <string>
#include <vector>

#include "catsync/config.hpp"

namespace catsync {

inline constexpr const char* kVersion = "1.0.0";

struct OutputFile {
  std::string path;    // relative to the output directory
  std::string sha256;
};

/// Written as manifest.json next to the data files of every command.
struct ResultManifest {
  std::string command;
  std::string config_hash;
  std::vector<OutputFile> files;
  double wall_clock_s = 0.0;
  std::string diagnostics_json = "{}";
  std::vector<std::string> notes;

  /// Hash over the listed data files; equal across identical reruns.
  std::string data_hash() const;
  std::string to_json() const;
};

ResultManifest cmd_simulate(const RunConfig& c);
ResultManifest cmd_spectrum(const RunConfig& c);
ResultManifest cmd_series(const RunConfig& c);
ResultManifest cmd_trees(const RunConfig& c);

/// Dispatch by subcommand name; throws ConfigError for unknown names.
ResultManifest run_command(const std::string& name, const RunConfig& c);

/// 0 ok, 2 config, 3 hypothesis, 4 numerical (also used for anything else).
int exit_code_for(const std::exception& e);

}  // namespace catsync
