#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace adaagm {

/// Parameters of the adaptive step-size rule and inertial sequence.
struct AlgoParams {
  double m = 0.99;     // inertial growth, in (0, 1]
  double t0 = 3.0;     // initial inertial weight, >= 1
  double gamma = 1.0;  // gradient weight in the extrapolation, in (0, 2)
  double beta = 1.0 / 3.0;
  double omega = 0.0;  // in [0, 1)
  double delta = 0.0;  // in [0, 1)
  std::optional<double> s0;  // unset: derived from L or probed

  /// Left side of the step-growth condition 2/((1+beta)gamma) (1 - 1/t0) >= 1.
  double growth_condition() const;
};

/// Named parameter sets: "cor-4.3", "cor-4.4", "sc-1", "sc-2".
/// Throws std::invalid_argument for any other name.
AlgoParams profile(std::string_view name);
std::vector<std::string> profile_names();

/// Default profile for convex (mu = 0) or strongly convex problems.
AlgoParams default_profile(bool strongly_convex);

/// Raised when the local smoothness denominator is negative beyond rounding,
/// which cannot happen for a convex objective.
class NonConvexityError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// t_{k+1} = (m + sqrt(m^2 + 4 t_k^2)) / 2.
double next_t(double t_curr, double m) noexcept;

/// Local smoothness estimate from two consecutive points:
///
///   L = 1/2 |g_next - g_prev|^2 / (<g_next, x_next - x_prev> - (f_next - f_prev))
///
/// Returns 0 when the gradients coincide (|dg| <= 1e-14 (1 + |g_next|)).
/// A denominator below -1e-12 (|f_next| + |f_prev| + 1) throws
/// NonConvexityError. Between that and the cancellation-noise level of its
/// terms (or 1e-300) the ratio carries no information and `fallback` is
/// returned; callers pass the known global L or the largest estimate so far.
double local_smoothness(std::span<const double> g_next, std::span<const double> g_prev,
                        double f_next, double f_prev, std::span<const double> x_next,
                        std::span<const double> x_prev, double fallback = 0.0);

/// Floor constant q such that s_k >= q / L along every run.
/// Throws std::invalid_argument when t0 <= 1.
double floor_q(const AlgoParams& params);

struct ScheduleState {
  double t_curr = 1.0;  // t_k
  double t_next = 1.0;  // t_{k+1}
  double s_curr = 0.0;  // s_k
  double L_next = 0.0;  // most recent local estimate
  double L_max = 0.0;   // largest estimate seen so far
  // Coefficients of the last step-size update.
  double coeff_A = 1.0;
  double coeff_B = 1.0;
  double coeff_C = 0.0;
};

ScheduleState initial_schedule(const AlgoParams& params, double s0);

/// Uses state.L_next (already estimated for the new iterate pair) to compute
/// s_{k+1} = min{A s_k, B s_k, C / L_{k+1}} and shifts t forward by one.
/// C / 0 counts as +inf.
ScheduleState advance_step(const ScheduleState& state, const AlgoParams& params);

enum class ClauseStatus { pass, warn, fail };

struct ParamClause {
  std::string name;
  ClauseStatus status;
  std::string message;
};

struct ValidityReport {
  std::vector<ParamClause> clauses;
  std::optional<double> q;
  std::optional<double> s0_floor;  // q / L, when L is supplied

  bool valid() const;
  bool has_warnings() const;
  std::string summary() const;
};

/// Checks every standing assumption on the parameters. `L` enables the
/// s0 >= q / L clause.
ValidityReport validate_params(const AlgoParams& params, std::optional<double> L = std::nullopt);

}  // namespace adaagm
