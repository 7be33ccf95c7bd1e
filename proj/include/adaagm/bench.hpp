#pragma once

#include "adaagm/diagnostics.hpp"
#include "adaagm/objective.hpp"
#include "adaagm/schedule.hpp"
#include "adaagm/solver.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace adaagm::bench {

/// xoshiro256** seeded through splitmix64. Normal deviates use Box-Muller on
/// 53-bit uniforms, so streams are identical on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);
  std::uint64_t next_u64();
  double uniform();  // [0, 1)
  double normal();

 private:
  std::uint64_t s_[4];
  std::optional<double> spare_;
};

std::uint64_t splitmix64(std::uint64_t& state);
/// Seed of a (problem, solver, seed) cell.
std::uint64_t cell_seed(std::size_t problem_index, std::size_t solver_index, std::int64_t seed);

/// Error in a config file, with 1-based position (0 when not tied to a line).
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& message, std::size_t line = 0, std::size_t column = 0);
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

struct Entry {
  std::string value;
  std::size_t line = 0;
  std::size_t column = 0;      // of the value
  std::size_t key_column = 0;
};

struct Section {
  std::string type;  // "experiment", "problem", "solver"
  std::string name;
  std::size_t line = 0;
  std::map<std::string, Entry> entries;
};

/// Parses `[type name]` sections with `key = value` lines; `#` starts a comment.
std::vector<Section> parse_sections(const std::string& text);

struct ProblemSpec {
  std::string name;
  std::string kind;  // quadratic | log_sum_exp | logistic
  std::map<std::string, std::string> fields;
};

enum class Algorithm { adaagm, gd, nesterov };

struct SolverSpec {
  std::string name;
  Algorithm algorithm = Algorithm::adaagm;
  std::string profile = "default";  // profile name, "custom" or "default"
  AlgoParams params;                // resolved for adaagm
  std::optional<double> step;       // gd / nesterov; unset means 1/L
  std::size_t max_iters = 10'000;
  double grad_tol = 0.0;
  double gap_tol = 0.0;
};

struct ExperimentConfig {
  std::vector<ProblemSpec> problems;
  std::vector<SolverSpec> solvers;
  std::vector<std::int64_t> seeds{0};
  std::filesystem::path output_dir = "out";
  std::size_t thinning = 1;
  double x0_scale = 1.0;
  std::filesystem::path base_dir;  // relative CSV paths resolve against this
};

/// Parses config text. Throws ConfigError on syntax errors, unknown keys,
/// invalid parameters and missing files.
ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

struct ValidationReport {
  bool ok = false;
  std::vector<std::string> errors;
  std::vector<std::string> lines;  // "ok" listing with resolved q per profile
};

ValidationReport validate_config(const std::filesystem::path& path);

/// Builds the problem (including any reference solve it requests).
SmoothProblem build_problem(const ProblemSpec& spec, const std::filesystem::path& base_dir);

struct CellSummary {
  std::string problem;
  std::string solver;
  std::int64_t seed = 0;
  std::string status;  // ok | diverged | error
  std::size_t iterations = 0;
  double final_gap = kNaN;
  double final_grad_norm = kNaN;
  std::optional<double> q;
  std::size_t certificates_passed = 0;
  std::size_t certificates_total = 0;
  std::string trace_file;
  std::vector<RateCertificate> certificates;
  std::string message;
};

struct ExperimentSummary {
  std::vector<CellSummary> cells;
  bool any_diverged() const;
};

struct RunSettings {
  std::size_t threads = 1;
  std::optional<std::filesystem::path> output_dir;  // overrides the config
  std::optional<std::size_t> thinning;
};

/// Runs every (problem, solver, seed) cell, writes one trace CSV per cell plus
/// summary.csv, certificates.txt and violations.csv. Output is identical for
/// any thread count.
ExperimentSummary run_experiment(const ExperimentConfig& config, const RunSettings& settings = {});

/// Random start: standard normal entries times `scale`.
Vector random_start(std::size_t dimension, std::uint64_t seed, double scale);

}  // namespace adaagm::bench
