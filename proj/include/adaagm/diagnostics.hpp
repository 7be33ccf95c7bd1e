#pragma once

#include "adaagm/objective.hpp"
#include "adaagm/schedule.hpp"
#include "adaagm/solver.hpp"

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace adaagm {

/// Inputs of the Lyapunov energy at step k.
struct EnergyInputs {
  Vector x_next;  // x_{k+1}
  Vector y_next;  // y_{k+1}
  Vector x;       // x_k
  Vector y;       // y_k
  Vector grad_x;  // grad f(x_k)
  double f_x = 0.0;
  double t = 1.0;       // t_k
  double t_next = 1.0;  // t_{k+1}
  double s = 0.0;       // s_k
  Vector x_star;
  double f_star = 0.0;
  AlgoParams params;
};

/// phi_k = t_{k+1}(x_{k+1} - y_{k+1}) + (y_{k+1} - x*).
Vector phi(const EnergyInputs& in);

/// The same vector from step-k data only:
/// (t_k - 1)(x_k - y_k) + gamma t_k (y_{k+1} - x_k) + (x_k - x*).
Vector phi_from_current(const EnergyInputs& in);

/// E_k = 1/2 |phi_k|^2 + beta/2 gamma^2 t_k^2 s_k^2 |grad f(x_k)|^2
///       + gamma t_k^2 s_k (f(x_k) - f*).
double energy(const EnergyInputs& in);

/// Energy evaluated from the step-k state alone. y_{k+1} = x_k - s_k grad f(x_k)
/// makes phi_k computable before x_{k+1} exists.
double energy_at(const SolverState& state, double t, double s, const Vector& x_star,
                 double f_star, const AlgoParams& params);
/// Same, with the gap taken from SmoothProblem::gap.
double energy_at(const SolverState& state, double t, double s, const SmoothProblem& problem,
                 const AlgoParams& params);

class MissingConstantError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct InitialBound {
  double D;          // (1/q)[...] from the O(1/k^2) rate
  double D_remark;   // tightened min-form bound; equal to D when it does not apply
  double bracket;    // E_0 upper bound divided by gamma
  double E0;         // exact E_0 for x0 = y0
  double effective() const { return D_remark < D ? D_remark : D; }
};

/// Constant D of the O(1/k^2) rate for the start x0 = y0, plus the
/// tightened bound obtained from |g|^2 <= 2L(f - f*) and |g| <= L|x - x*|.
/// The tightened form is used only when the |grad f(x0)|^2 coefficient is
/// nonnegative, which is what the two substitutions need.
InitialBound initial_bound(const Vector& x0, const SmoothProblem& problem, const AlgoParams& params,
                           std::optional<double> s0 = std::nullopt);
double initial_D(const Vector& x0, const SmoothProblem& problem, const AlgoParams& params,
                 std::optional<double> s0 = std::nullopt);

/// Linear-rate constant for omega = delta = 1/2:
/// rho = min{ mu gamma q / (4L), mu q / (2L/(beta gamma) + (8/(beta gamma^2) + 2) mu q) }.
double rho(const AlgoParams& params, double mu, double L);
/// Same expression with q replaced by an explicit step floor times L.
double rho_for_floor(const AlgoParams& params, double mu, double L, double q_eff);

enum class CertificateKind { sublinear, linear, step_floor, step_cap, energy_monotone, grad_summable };

std::string_view to_string(CertificateKind kind);
CertificateKind certificate_kind_from_string(std::string_view name);

struct Violation {
  std::size_t k;
  double lhs;
  double rhs;
};

struct RateCertificate {
  CertificateKind kind{};
  std::optional<double> constant_D;
  std::optional<double> constant_q;
  std::optional<double> constant_rho;
  double tolerance = 1e-9;
  std::vector<Violation> violations;
  double max_violation_rel = 0.0;  // max (lhs - rhs) / (1 + |rhs|), may be negative
  std::size_t checked = 0;

  bool passed() const { return violations.empty(); }
};

struct CertifyOptions {
  // Relative tolerance; unset picks 1e-9, or 1e-6 for reference minimizers.
  std::optional<double> rel_tol;
};

/// Walks the trace and checks one inequality at every record.
///
/// sublinear       f(x_k) - f* <= D L / t_k^2
/// linear          f(x_k) - f* <= D L / t_k^2 (1 - rho)^k
/// step_floor      s_k >= min(s0, q / L)
/// step_cap        s_k <= s0 e^{2(1-m)/m} k^{2(1-m)/m}, k >= 1
/// energy_monotone E_{k'} <= (1 - rho)^{k'-k} E_k (rho = 0 unless mu > 0 and omega = delta = 1/2)
/// grad_summable   sum_{j<=k} beta delta gamma^2 t_j^2 s_j^2 |grad f(x_j)|^2 / 2 <= E_0
///
/// When s0 < q / L the floor min(s0, q/L) replaces q / L in D and rho. With no
/// x0 in the trace, D falls back to E_0 / (gamma q) read from the energy column.
RateCertificate certify(const Trace& trace, const SmoothProblem& problem, const AlgoParams& params,
                        CertificateKind kind, const CertifyOptions& options = {});

/// Kinds that `certify` can evaluate for this problem and parameter set.
std::vector<CertificateKind> applicable_certificates(const SmoothProblem& problem,
                                                     const AlgoParams& params);

/// (S_K - S_{K/2}) / S_K for S_k = sum_{j<=k} j^2 |grad f(x_j)|^2.
/// Needs consecutive records.
double summability_tail_ratio(const Trace& trace);

/// Least-squares slope of log E_k over the records with E_k > floor_rel * E_0,
/// returned as the per-iteration factor exp(slope).
double fitted_energy_contraction(const Trace& trace, double floor_rel = 1e-12);

/// max over the last `fraction` of recorded iterates of |x_k - x_K| / (1 + |x_K|).
/// A finite-dimensional stand-in for weak convergence of the iterates; needs
/// RunOptions::record_iterates.
double tail_cauchy(const Trace& trace, double fraction = 0.1);

/// Upper bound on |x_k| and |y_k| implied by |z_k - x*|^2 <= 2 E_0.
double iterate_bound(const Vector& x0, const Vector& x_star, double E0, double gamma);

/// "kind D=.. q=.. rho=.. PASS|FAIL worst=.." on one line.
std::string summary_line(const RateCertificate& cert);
void write_violations_csv(std::ostream& out, const std::string& cell,
                          const std::vector<RateCertificate>& certs);

}  // namespace adaagm
