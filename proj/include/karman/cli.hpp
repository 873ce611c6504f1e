#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace karman {

enum class ExperimentKind {
  speeds,
  solve_d,
  pointvortex,
  plasma,
  assemble,
  residual_scaling,
  reduction_root,
  evolve
};

std::string kind_name(ExperimentKind kind);
std::optional<ExperimentKind> parse_kind(const std::string &name);

struct Diagnostic {
  std::string field;
  std::string message;
};

/// A validated spec; params holds every field with defaults filled in.
struct ExperimentSpec {
  ExperimentKind kind = ExperimentKind::speeds;
  int format_version = 1;
  std::string output_dir;
  nlohmann::ordered_json params;
};

struct ValidationResult {
  std::optional<ExperimentSpec> spec;
  std::vector<Diagnostic> diagnostics;
  bool ok() const { return spec.has_value(); }
};

inline constexpr int kSpecFormatVersion = 1;

/// Parses and checks a JSON spec. When `expected` is given the spec's kind
/// must match it (or may be omitted).
ValidationResult validate_spec(const std::string &text,
                               std::optional<ExperimentKind> expected = std::nullopt);

/// Checks the refinement condition on a declared family (eps_k, sigma_k):
/// sigma/eps bounded and eps^tau/sigma decreasing to zero, tau = min(gamma2, 2).
std::vector<Diagnostic> check_refinement_family(const std::vector<double> &eps,
                                                const std::vector<double> &sigma,
                                                double gamma2);

struct RunOptions {
  std::string out_dir;           // overrides the spec's output_dir when set
  std::optional<int> threads;    // falls back to KARMAN_THREADS
  bool verbose = false;
  std::ostream *log = nullptr;   // progress lines when verbose
};

struct RunResult {
  int status = 0;
  std::string message;
  std::vector<std::string> artifacts; // data files, manifest excluded
};

/// Runs the pipeline, writing the data artifacts and manifest.json. Library
/// errors are mapped to their exit statuses, not rethrown.
RunResult run_experiment(const ExperimentSpec &spec, const RunOptions &options);

/// Entry point of the karman executable.
int cli_main(int argc, char **argv);

} // namespace karman
