#pragma once

#include "adaagm/objective.hpp"
#include "adaagm/schedule.hpp"

#include <cstddef>
#include <iosfwd>
#include <limits>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace adaagm {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct SolverState {
  Vector x;       // x_k
  Vector y;       // y_k
  Vector grad_x;  // grad f(x_k)
  double f_x = 0.0;
  std::size_t k = 0;
};

/// One row of a convergence trace. Unknown quantities are NaN.
struct TraceRecord {
  std::size_t k = 0;
  double gap = kNaN;  // f(x_k) - f*
  double grad_norm = kNaN;
  double s = kNaN;      // s_k
  double t = kNaN;      // t_k (theta_k for Nesterov, 1 for gradient descent)
  double L_est = kNaN;  // L_k; undefined at k = 0
  double energy = kNaN; // E_k
};

struct Trace {
  std::string algorithm;
  std::vector<TraceRecord> records;
  Vector x0;
  Vector x_final;
  Vector y_final;
  // Per-record iterates, filled only when RunOptions::record_iterates is set.
  std::vector<Vector> xs;
  std::vector<Vector> ys;
  std::vector<std::string> warnings;
  // s0 and params actually used (AdaAGM only).
  std::optional<AlgoParams> params;

  std::size_t iterations() const { return records.empty() ? 0 : records.back().k; }
};

struct StopCriteria {
  std::size_t max_iters = 100'000;
  double grad_tol = 0.0;  // 0 disables
  double gap_tol = 0.0;   // 0 disables; needs f*

  void validate() const;
};

/// max_iters = 1e5 and grad_tol = 1e-10 (1 + |grad f(x0)|).
StopCriteria default_stop(const SmoothProblem& problem, const Vector& x0);

struct RunOptions {
  std::size_t thinning = 1;  // keep every `thinning`-th record plus the last
  bool record_iterates = false;
  // Hold s_k = s0 for every k (disables the adaptive rule and the
  // parameter checks that only it needs).
  bool fixed_step = false;
};

/// Non-finite value or gradient. Carries the offending iteration and the
/// trace accumulated up to it.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(std::size_t iteration, std::shared_ptr<const Trace> partial);
  std::size_t iteration() const noexcept { return iteration_; }
  const std::shared_ptr<const Trace>& partial_trace() const noexcept { return partial_; }

 private:
  std::size_t iteration_;
  std::shared_ptr<const Trace> partial_;
};

/// Thrown when run_adaagm is handed parameters that fail validation.
class InvalidParamsError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Evaluates f and grad f at x0 and returns the k = 0 state with y0 = x0.
SolverState initial_state(const SmoothProblem& problem, const Vector& x0);

/// Resolves s0: the explicit value if set, else q / L when L is known, else a
/// probe along the normalized negative gradient (s0 = q / L_hat).
double resolve_initial_step(const SmoothProblem& problem, const AlgoParams& params, const Vector& x0);

/// One AdaAGM iteration: y, x, then the local estimate L_{k+1} and the next step.
/// Throws DivergenceError (without a partial trace) on non-finite evaluations.
std::pair<SolverState, ScheduleState> adaagm_step(const SolverState& state,
                                                  const ScheduleState& sched,
                                                  const AlgoParams& params,
                                                  const SmoothProblem& problem,
                                                  bool fixed_step = false);

Trace run_adaagm(const SmoothProblem& problem, const AlgoParams& params, const StopCriteria& stop,
                 const Vector& x0, const RunOptions& options = {});

/// Fixed-step gradient descent x_{k+1} = x_k - s grad f(x_k).
Trace run_gd(const SmoothProblem& problem, double step, const StopCriteria& stop, const Vector& x0,
             const RunOptions& options = {});

/// Nesterov's method with theta_0 = 1 and theta from the inertial recursion at m = 1.
Trace run_nesterov(const SmoothProblem& problem, double step, const StopCriteria& stop,
                   const Vector& x0, const RunOptions& options = {});

/// CSV with header `k,gap,grad_norm,s,t,L_est,energy`; 17 significant digits,
/// empty fields for unknown values.
void write_trace_csv(std::ostream& out, const Trace& trace);
void write_trace_csv(const std::string& path, const Trace& trace);
std::vector<TraceRecord> read_trace_csv(std::istream& in);
std::vector<TraceRecord> read_trace_csv(const std::string& path);

}  // namespace adaagm
