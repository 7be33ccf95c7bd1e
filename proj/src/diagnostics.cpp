#include "adaagm/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

namespace adaagm {

Vector phi(const EnergyInputs& in) {
  return in.t_next * (in.x_next - in.y_next) + (in.y_next - in.x_star);
}

Vector phi_from_current(const EnergyInputs& in) {
  return (in.t - 1.0) * (in.x - in.y) + in.params.gamma * in.t * (in.y_next - in.x) +
         (in.x - in.x_star);
}

namespace {

double energy_terms(const Vector& phi_k, double grad_sq, double gap, double t, double s,
                    const AlgoParams& p) {
  const double gts = p.gamma * t * s;
  return 0.5 * phi_k.squaredNorm() + 0.5 * p.beta * gts * gts * grad_sq +
         p.gamma * t * t * s * gap;
}

}  // namespace

double energy(const EnergyInputs& in) {
  return energy_terms(phi(in), in.grad_x.squaredNorm(), in.f_x - in.f_star, in.t, in.s, in.params);
}

namespace {

Vector phi_at(const SolverState& st, double t, double s, const Vector& x_star, const AlgoParams& params) {
  return (t - 1.0) * (st.x - st.y) - (params.gamma * t * s) * st.grad_x + (st.x - x_star);
}

}  // namespace

double energy_at(const SolverState& st, double t, double s, const Vector& x_star, double f_star,
                 const AlgoParams& params) {
  return energy_terms(phi_at(st, t, s, x_star, params), st.grad_x.squaredNorm(), st.f_x - f_star, t, s,
                      params);
}

double energy_at(const SolverState& st, double t, double s, const SmoothProblem& problem,
                 const AlgoParams& params) {
  if (!problem.has_minimizer()) throw MissingConstantError(problem.name() + ": missing constant x_star");
  return energy_terms(phi_at(st, t, s, *problem.x_star(), params), st.grad_x.squaredNorm(),
                      problem.gap(st.x, st.f_x), t, s, params);
}

namespace {

struct Ground {
  Vector x_star;
  double f_star;
  double L;
};

Ground require_ground(const SmoothProblem& problem, bool need_L = true) {
  if (!problem.x_star()) throw MissingConstantError(problem.name() + ": missing constant x_star");
  if (!problem.f_star()) throw MissingConstantError(problem.name() + ": missing constant f_star");
  if (need_L && !problem.L_known()) throw MissingConstantError(problem.name() + ": missing constant L_known");
  return {*problem.x_star(), *problem.f_star(), problem.L_known() ? *problem.L_known() : 0.0};
}

}  // namespace

InitialBound initial_bound(const Vector& x0, const SmoothProblem& problem, const AlgoParams& params,
                           std::optional<double> s0_opt) {
  const Ground g = require_ground(problem);
  const double q = floor_q(params);
  const double s0 = s0_opt ? *s0_opt : resolve_initial_step(problem, params, x0);
  const double t0 = params.t0;
  const double gamma = params.gamma;
  const double beta = params.beta;
  const double L = g.L;

  Vector grad0;
  const double f0 = problem.evaluate(x0, grad0);
  const double d2 = (x0 - g.x_star).squaredNorm();
  const double g2 = grad0.squaredNorm();
  const double gap = problem.gap(x0, f0);

  const double grad_coeff = s0 * t0 * ((1.0 + beta) * gamma * s0 * t0 * L - 1.0) / (2.0 * L);
  InitialBound out{};
  out.bracket = d2 / (2.0 * gamma) + grad_coeff * g2 + s0 * t0 * (t0 - 1.0) * gap;
  out.D = out.bracket / q;
  out.D_remark = out.D;
  if (grad_coeff >= 0.0) {
    const double via_gap = d2 / (2.0 * gamma) +
                           s0 * t0 * (t0 * ((1.0 + beta) * gamma * s0 * L + 1.0) - 2.0) * gap;
    const double via_dist =
        (1.0 + gamma * s0 * t0 * L * ((1.0 + beta) * gamma * s0 * t0 * L - 1.0)) * d2 / (2.0 * gamma) +
        s0 * t0 * (t0 - 1.0) * gap;
    out.D_remark = std::min(via_gap, via_dist) / q;
  }

  SolverState st;
  st.x = x0;
  st.y = x0;
  st.grad_x = grad0;
  st.f_x = f0;
  out.E0 = energy_at(st, t0, s0, problem, params);
  return out;
}

double initial_D(const Vector& x0, const SmoothProblem& problem, const AlgoParams& params,
                 std::optional<double> s0) {
  return initial_bound(x0, problem, params, s0).D;
}

double rho_for_floor(const AlgoParams& p, double mu, double L, double q_eff) {
  if (!(mu > 0.0)) throw std::invalid_argument("rho: mu must be positive");
  if (!(L > 0.0)) throw std::invalid_argument("rho: L must be positive");
  if (mu > L) throw std::invalid_argument("rho: mu must not exceed L");
  const double first = mu * p.gamma * q_eff / (4.0 * L);
  const double second =
      mu * q_eff / (2.0 * L / (p.beta * p.gamma) + (8.0 / (p.beta * p.gamma * p.gamma) + 2.0) * mu * q_eff);
  return std::min(first, second);
}

double rho(const AlgoParams& p, double mu, double L) {
  if (p.omega != 0.5 || p.delta != 0.5)
    throw std::invalid_argument("rho: the linear rate needs omega = delta = 1/2");
  return rho_for_floor(p, mu, L, floor_q(p));
}

std::string_view to_string(CertificateKind kind) {
  switch (kind) {
    case CertificateKind::sublinear: return "sublinear";
    case CertificateKind::linear: return "linear";
    case CertificateKind::step_floor: return "step_floor";
    case CertificateKind::step_cap: return "step_cap";
    case CertificateKind::energy_monotone: return "energy_monotone";
    case CertificateKind::grad_summable: return "grad_summable";
  }
  return "unknown";
}

CertificateKind certificate_kind_from_string(std::string_view name) {
  for (auto k : {CertificateKind::sublinear, CertificateKind::linear, CertificateKind::step_floor,
                 CertificateKind::step_cap, CertificateKind::energy_monotone,
                 CertificateKind::grad_summable}) {
    if (to_string(k) == name) return k;
  }
  throw std::invalid_argument("unknown certificate kind '" + std::string(name) + "'");
}

namespace {

bool strongly_convex_setting(const SmoothProblem& problem, const AlgoParams& p) {
  return problem.mu_known() && *problem.mu_known() > 0.0 && p.omega == 0.5 && p.delta == 0.5;
}

double initial_step_of(const Trace& trace) {
  if (trace.params && trace.params->s0) return *trace.params->s0;
  return trace.records.front().s;
}

// lhs <= rhs with slack tol * scale.
void check(RateCertificate& c, std::size_t k, double lhs, double rhs, double scale) {
  ++c.checked;
  const double excess = (lhs - rhs) / scale;
  if (c.checked == 1 || excess > c.max_violation_rel) c.max_violation_rel = excess;
  if (!(excess <= c.tolerance)) c.violations.push_back({k, lhs, rhs});
}

void require_energy(const Trace& trace) {
  for (const auto& r : trace.records)
    if (std::isnan(r.energy)) throw MissingConstantError("trace has no energy column (x_star unknown at run time)");
}

// Step floor min(s0, q/L) and the D constant rescaled to that floor.
struct RateConstants {
  double q;
  double s_floor;
  double D;
};

RateConstants rate_constants(const Trace& trace, const SmoothProblem& problem, const AlgoParams& params) {
  const Ground g = require_ground(problem);
  const double q = floor_q(params);
  const double s0 = initial_step_of(trace);
  const double s_floor = std::min(s0, q / g.L);
  double bracket;
  if (trace.x0.size() > 0) {
    const InitialBound b = initial_bound(trace.x0, problem, params, s0);
    bracket = b.effective() * q;
  } else {
    // Without x0, E_0 itself bounds the energy: f - f* <= E_0 / (gamma t^2 s_floor).
    require_energy(trace);
    if (trace.records.front().k != 0) throw std::invalid_argument("trace does not start at k = 0");
    bracket = trace.records.front().energy / params.gamma;
  }
  return {q, s_floor, bracket / (g.L * s_floor)};
}

}  // namespace

RateCertificate certify(const Trace& trace, const SmoothProblem& problem, const AlgoParams& params,
                        CertificateKind kind, const CertifyOptions& options) {
  if (trace.records.empty()) throw std::invalid_argument("certify: empty trace");
  RateCertificate c;
  c.kind = kind;
  c.tolerance = options.rel_tol ? *options.rel_tol
                                : (problem.constants().reference_minimizer ? 1e-6 : 1e-9);
  const auto& recs = trace.records;

  switch (kind) {
    case CertificateKind::sublinear:
    case CertificateKind::linear: {
      const RateConstants rc = rate_constants(trace, problem, params);
      const double L = *problem.L_known();
      double rate = 0.0;
      if (kind == CertificateKind::linear) {
        if (!problem.mu_known() || !(*problem.mu_known() > 0.0))
          throw MissingConstantError(problem.name() + ": linear certificate needs mu_known > 0");
        if (params.omega != 0.5 || params.delta != 0.5)
          throw std::invalid_argument("linear certificate needs omega = delta = 1/2");
        rate = rho_for_floor(params, *problem.mu_known(), L, rc.s_floor * L);
        c.constant_rho = rate;
      }
      c.constant_D = rc.D;
      c.constant_q = rc.q;
      for (const auto& r : recs) {
        double rhs = rc.D * L / (r.t * r.t);
        if (rate > 0.0) rhs *= std::pow(1.0 - rate, static_cast<double>(r.k));
        check(c, r.k, r.gap, rhs, 1.0 + std::abs(rhs));
      }
      break;
    }
    case CertificateKind::step_floor: {
      if (!problem.L_known()) throw MissingConstantError(problem.name() + ": missing constant L_known");
      const double q = floor_q(params);
      const double floor = std::min(initial_step_of(trace), q / *problem.L_known());
      c.constant_q = q;
      for (const auto& r : recs) check(c, r.k, floor, r.s, std::abs(r.s));
      break;
    }
    case CertificateKind::step_cap: {
      const double s0 = initial_step_of(trace);
      const double power = 2.0 * (1.0 - params.m) / params.m;
      const double lead = s0 * std::exp(power);
      for (const auto& r : recs) {
        if (r.k == 0) continue;
        const double cap = lead * std::pow(static_cast<double>(r.k), power);
        check(c, r.k, r.s, cap, std::abs(cap));
      }
      break;
    }
    case CertificateKind::energy_monotone: {
      require_energy(trace);
      double rate = 0.0;
      if (strongly_convex_setting(problem, params) && problem.L_known()) {
        const double L = *problem.L_known();
        const double s_floor = std::min(initial_step_of(trace), floor_q(params) / L);
        rate = rho_for_floor(params, *problem.mu_known(), L, s_floor * L);
        c.constant_rho = rate;
      }
      for (std::size_t i = 1; i < recs.size(); ++i) {
        const double steps = static_cast<double>(recs[i].k - recs[i - 1].k);
        const double rhs = std::pow(1.0 - rate, steps) * recs[i - 1].energy;
        check(c, recs[i].k, recs[i].energy, rhs, 1.0 + std::abs(rhs));
      }
      break;
    }
    case CertificateKind::grad_summable: {
      require_energy(trace);
      const double weight = 0.5 * params.beta * params.delta * params.gamma * params.gamma;
      const double E0 = recs.front().energy;
      double sum = 0.0;
      for (std::size_t i = 0; i < recs.size(); ++i) {
        if (recs[i].k != i) throw std::invalid_argument("grad_summable needs an unthinned trace from k = 0");
        const double ts = recs[i].t * recs[i].s * recs[i].grad_norm;
        sum += weight * ts * ts;
        check(c, recs[i].k, sum, E0, 1.0 + std::abs(E0));
      }
      break;
    }
  }
  return c;
}

std::vector<CertificateKind> applicable_certificates(const SmoothProblem& problem, const AlgoParams& params) {
  std::vector<CertificateKind> out{CertificateKind::step_cap};
  const bool has_L = problem.L_known().has_value();
  if (has_L && params.t0 > 1.0) out.push_back(CertificateKind::step_floor);
  if (problem.has_minimizer()) {
    if (has_L) out.push_back(CertificateKind::sublinear);
    if (has_L && strongly_convex_setting(problem, params)) out.push_back(CertificateKind::linear);
    out.push_back(CertificateKind::energy_monotone);
    if (params.delta > 0.0) out.push_back(CertificateKind::grad_summable);
  }
  return out;
}

double summability_tail_ratio(const Trace& trace) {
  const auto& recs = trace.records;
  if (recs.empty()) return 0.0;
  const std::size_t K = recs.back().k;
  double total = 0.0;
  double half = 0.0;
  for (std::size_t i = 0; i < recs.size(); ++i) {
    if (recs[i].k != i) throw std::invalid_argument("summability needs an unthinned trace from k = 0");
    const double k = static_cast<double>(recs[i].k);
    total += k * k * recs[i].grad_norm * recs[i].grad_norm;
    if (recs[i].k <= K / 2) half = total;
  }
  return total > 0.0 ? (total - half) / total : 0.0;
}

double fitted_energy_contraction(const Trace& trace, double floor_rel) {
  require_energy(trace);
  const double E0 = trace.records.front().energy;
  std::vector<double> ks;
  std::vector<double> logs;
  for (const auto& r : trace.records) {
    if (!(r.energy > floor_rel * E0) || !(r.energy > 0.0)) break;
    ks.push_back(static_cast<double>(r.k));
    logs.push_back(std::log(r.energy));
  }
  if (ks.size() < 2) throw std::invalid_argument("fitted_energy_contraction: fewer than two usable records");
  const double n = static_cast<double>(ks.size());
  double mk = 0.0, ml = 0.0;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    mk += ks[i];
    ml += logs[i];
  }
  mk /= n;
  ml /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    sxy += (ks[i] - mk) * (logs[i] - ml);
    sxx += (ks[i] - mk) * (ks[i] - mk);
  }
  return std::exp(sxy / sxx);
}

double tail_cauchy(const Trace& trace, double fraction) {
  if (trace.xs.empty()) throw std::invalid_argument("tail_cauchy: trace has no recorded iterates");
  const std::size_t n = trace.xs.size();
  const auto first = static_cast<std::size_t>(std::floor((1.0 - fraction) * static_cast<double>(n)));
  const Vector& last = trace.xs.back();
  double worst = 0.0;
  for (std::size_t i = std::min(first, n - 1); i < n; ++i) worst = std::max(worst, (trace.xs[i] - last).norm());
  return worst / (1.0 + last.norm());
}

double iterate_bound(const Vector& x0, const Vector& x_star, double E0, double gamma) {
  const double M = std::max(x0.norm(), x_star.norm() + std::sqrt(2.0 * std::max(E0, 0.0)));
  return std::max(x0.norm(), (1.0 + 2.0 / gamma) * M);
}

std::string summary_line(const RateCertificate& c) {
  std::ostringstream out;
  out.precision(10);
  out << to_string(c.kind);
  if (c.constant_D) out << " D=" << *c.constant_D;
  if (c.constant_q) out << " q=" << *c.constant_q;
  if (c.constant_rho) out << " rho=" << *c.constant_rho;
  out << ' ' << (c.passed() ? "PASS" : "FAIL") << " worst=" << c.max_violation_rel
      << " checked=" << c.checked << " violations=" << c.violations.size();
  return out.str();
}

void write_violations_csv(std::ostream& out, const std::string& cell,
                          const std::vector<RateCertificate>& certs) {
  char buf[96];
  for (const auto& c : certs) {
    for (const auto& v : c.violations) {
      std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g", v.k, v.lhs, v.rhs);
      out << cell << ',' << to_string(c.kind) << ',' << buf << '\n';
    }
  }
}

}  // namespace adaagm
