#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "pshlab/poly.hpp"
#include "pshlab/quadrature.hpp"
#include "pshlab/weights.hpp"

namespace pshlab {

inline constexpr const char* kToolVersion = "0.1.0";

enum class Command { QuadCheck, Theorem, Truncation, Sweep, Blocki, Remark, Ideal };
std::string to_string(Command c);
Command command_from_string(const std::string& name);

struct RemarkCase {
  double epsilon = 0.5;
  int j = 3;
  bool operator==(const RemarkCase&) const = default;
};

/// One experiment. Optional members are absent from the serialized form
/// when unset, so parse(serialize(c)) == c.
struct ExperimentConfig {
  Command command = Command::Theorem;
  DomainKind domain_kind = DomainKind::Disc;
  std::vector<double> radii{1.0};
  QuadratureParams quad;
  ShellParams shells;
  std::optional<WeightExpr> phi;
  std::optional<WeightExpr> psi;
  std::optional<HoloPoly> f;
  /// When unset, epsilon = epsilon_factor * ||psi - phi||_1.
  std::optional<double> epsilon;
  double epsilon_factor = 1.1;
  int degree = 12;
  double smoothing = 0.0;
  /// Smoothing as a fraction of epsilon; overrides `smoothing` when set.
  std::optional<double> smoothing_fraction;
  double smooth_slack = 1e-6;
  double indicator_slack = 0.02;
  std::vector<double> j_list;
  std::vector<double> eta_list;
  std::optional<WeightExpr> direction;
  /// theorem: number of seeded random bounded-weight cases; 0 runs phi/psi.
  int suite_count = 0;
  std::vector<RemarkCase> remark_cases;
  double c = 0.5;
  std::vector<HoloPoly> generators_a;
  std::vector<HoloPoly> generators_b;
  std::optional<WeightExpr> weight_a;
  std::optional<WeightExpr> weight_b;
  int max_moment = 10;
  double moment_tolerance = 1e-10;
  std::string output_dir = "out";
  unsigned seed = 1;

  Domain domain() const { return Domain(domain_kind, radii); }

  /// Checks the fields the command needs. Throws InputError naming the field.
  void validate() const;

  bool operator==(const ExperimentConfig& other) const;
};

/// Strict parse: unknown keys and type mismatches raise InputError with the
/// JSON location of the offending field.
ExperimentConfig parse_config(const nlohmann::json& j);
nlohmann::json serialize_config(const ExperimentConfig& c);

ExperimentConfig load_config(const std::filesystem::path& path);

/// Applies "a.b.c=value" to the raw config document. The value is parsed as
/// JSON when possible, otherwise taken as a string.
void apply_override(nlohmann::json& doc, const std::string& assignment);

/// FNV-1a 64 of the canonical serialization (sorted keys, no whitespace).
std::uint64_t config_hash(const ExperimentConfig& c);
std::string hex(std::uint64_t v);

struct RunManifest {
  std::string config_hash;
  std::string tool_version = kToolVersion;
  std::string command;
  std::optional<std::string> start_time;
  std::optional<std::string> end_time;
  std::size_t nodes = 0;
  std::vector<std::string> files;

  nlohmann::json to_json() const;
};

struct RunOptions {
  std::filesystem::path out_dir;
  bool canonical = false;
};

/// Report document and CSV tables of one command, before anything is
/// written. `passed` is the verdict that drives the exit status.
struct CommandOutput {
  nlohmann::json report;
  std::vector<std::pair<std::string, std::string>> csv_files;  ///< name, contents
  bool passed = true;
  std::size_t nodes = 0;
};

CommandOutput execute(const ExperimentConfig& config);

/// Runs the command and writes report.json, the CSV tables and manifest.json
/// into the output directory. Returns 0 when every verdict passes, 2 on a
/// verdict failure, 1 on input, resource or numerical errors (divergence is
/// written to report.json as a structured error entry).
int run(const ExperimentConfig& config, const RunOptions& options);

/// Exit status for a finished command output.
inline int exit_status(const CommandOutput& out) { return out.passed ? 0 : 2; }

/// Flattens a sweep report into "epsilon,delta" (descending epsilon) and a
/// truncation report into "j,coeff_cauchy". Throws InputError for other
/// report types.
std::string emit_plotdata(const nlohmann::json& report);

}  // namespace pshlab
