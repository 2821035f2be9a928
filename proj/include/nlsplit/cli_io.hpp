#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "nlsplit/experiments.hpp"

namespace nlsplit {

inline constexpr const char* kVersion = "0.1.0";

/// Default box for a horizon: L = 64 up to T = 5, doubled per doubling of
/// T beyond that, N = 64 L capped at 16384 (d = 1). In d = 2, L = 32 and
/// N = 512.
Gridd default_grid(int dimension, double t_final);

/// Flat `key = value` text, one key per line, `#` starts a comment. Lists
/// are written `[a, b, c]`. Omitted keys take their defaults; unknown or
/// repeated keys are a ParseError. Constraint violations throw
/// ConstraintError naming the key.
StudyConfig parse_config_text(const std::string& text);
StudyConfig parse_config(const std::filesystem::path& path);

/// Every key with its resolved value; parse_config_text(serialize_config(c)) == c.
std::string serialize_config(const StudyConfig& cfg);

/// Shortest decimal that reads back to the same double.
std::string format_double(double v);

/// CSV writers. Each writes a header row and overwrites `path`; IoError on
/// failure.
void write_convergence_csv(const std::vector<ConvergenceRow>& rows, const std::filesystem::path& path);
void write_uniformity_csv(const std::vector<UniformityRow>& rows, const std::filesystem::path& path);
void write_trajectory_csv(const std::vector<TrajectoryRow>& rows, const std::filesystem::path& path);
void write_scattering_csv(const std::vector<ScatteringRow>& rows, const std::filesystem::path& path);
void write_invariants_csv(const std::vector<InvariantResult>& rows, const std::filesystem::path& path);

struct RunManifest {
  StudyConfig config;
  std::string version = kVersion;
  std::string timestamp;  ///< UTC, ISO 8601
  std::filesystem::path output_dir;
  std::vector<std::string> files;  ///< names relative to output_dir
  std::string study;
  std::vector<std::pair<std::string, double>> summary;

  std::string to_json() const;
};

/// Writes manifest.json into manifest.output_dir.
void write_manifest(const RunManifest& manifest);

/// Exit codes of the command-line tool.
enum ExitCode : int { exit_ok = 0, exit_config = 1, exit_numerical = 2, exit_invariant = 3 };

int cli_main(int argc, char** argv);

}  // namespace nlsplit
