#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace drm::cli {

/// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitDiverged = 3;

struct CommandOutput {
  int exit_code = kExitOk;
  /// Also written to <out>/summary.json.
  nlohmann::json summary;
  std::vector<std::filesystem::path> files;
};

struct RunOptions {
  /// Replaces the config's "out" entry.
  std::optional<std::filesystem::path> out;
  bool plot = false;
};

std::vector<std::string> command_names();

/// Validates `config` against the command's schema, runs it and writes its
/// data files. Throws ConfigError for schema violations.
CommandOutput run_command(std::string_view name, const nlohmann::json& config, const RunOptions& opts = {});

nlohmann::json load_config(const std::filesystem::path& path);

}  // namespace drm::cli
