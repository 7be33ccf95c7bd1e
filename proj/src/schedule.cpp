#include "adaagm/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace adaagm {

namespace {

// growth_condition() >= 1 holds with equality for the shipped profiles;
// allow for the rounding of 1/3.
constexpr double kConditionSlack = 1e-12;

}  // namespace

double AlgoParams::growth_condition() const {
  return 2.0 / ((1.0 + beta) * gamma) * (1.0 - 1.0 / t0);
}

AlgoParams profile(std::string_view name) {
  AlgoParams p;
  p.m = 0.99;
  if (name == "cor-4.3" || name == "sc-1") {
    p.gamma = 0.5;
    p.beta = 1.0;
    p.t0 = 2.0;
  } else if (name == "cor-4.4" || name == "sc-2") {
    p.gamma = 1.0;
    p.beta = 1.0 / 3.0;
    p.t0 = 3.0;
  } else {
    throw std::invalid_argument("unknown parameter profile '" + std::string(name) + "'");
  }
  if (name.substr(0, 3) == "sc-") {
    p.omega = 0.5;
    p.delta = 0.5;
  }
  return p;
}

std::vector<std::string> profile_names() { return {"cor-4.3", "cor-4.4", "sc-1", "sc-2"}; }

AlgoParams default_profile(bool strongly_convex) {
  return profile(strongly_convex ? "sc-2" : "cor-4.4");
}

double next_t(double t_curr, double m) noexcept {
  return 0.5 * (m + std::sqrt(m * m + 4.0 * t_curr * t_curr));
}

double local_smoothness(std::span<const double> g_next, std::span<const double> g_prev,
                        double f_next, double f_prev, std::span<const double> x_next,
                        std::span<const double> x_prev, double fallback) {
  const std::size_t n = g_next.size();
  if (g_prev.size() != n || x_next.size() != n || x_prev.size() != n)
    throw std::invalid_argument("local_smoothness: dimension mismatch");

  double dg2 = 0.0;
  double g2 = 0.0;
  double inner = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dg = g_next[i] - g_prev[i];
    dg2 += dg * dg;
    g2 += g_next[i] * g_next[i];
    inner += g_next[i] * (x_next[i] - x_prev[i]);
  }
  if (std::sqrt(dg2) <= 1e-14 * (1.0 + std::sqrt(g2))) return 0.0;

  const double denom = inner - (f_next - f_prev);
  const double f_scale = std::abs(f_next) + std::abs(f_prev) + 1.0;
  if (denom < -1e-12 * f_scale) {
    std::ostringstream msg;
    msg << "local_smoothness: negative curvature denominator " << denom
        << " (objective not convex or inconsistent value/gradient)";
    throw NonConvexityError(msg.str());
  }
  // Below this the denominator is cancellation noise from the value difference.
  const double noise = std::max(
      1e-300, 1e3 * std::numeric_limits<double>::epsilon() *
                  (std::abs(inner) + std::abs(f_next) + std::abs(f_prev)));
  if (denom <= noise) return fallback;
  const double L = 0.5 * dg2 / denom;
  return std::isfinite(L) ? L : fallback;
}

double floor_q(const AlgoParams& p) {
  if (!(p.t0 > 1.0)) throw std::invalid_argument("floor_q: requires t0 > 1");
  return (1.0 - p.omega) /
         ((1.0 + p.beta) * p.gamma * p.t0 / (p.t0 - 1.0) + 1.0 / (p.beta * p.gamma * (1.0 - p.delta)));
}

ScheduleState initial_schedule(const AlgoParams& params, double s0) {
  ScheduleState s;
  s.t_curr = params.t0;
  s.t_next = next_t(params.t0, params.m);
  s.s_curr = s0;
  return s;
}

ScheduleState advance_step(const ScheduleState& state, const AlgoParams& p) {
  ScheduleState out = state;
  const double tn = state.t_next;
  out.coeff_A = (tn - p.m) / (tn - 1.0);
  out.coeff_B = 2.0 / ((1.0 + p.beta) * p.gamma) * (1.0 - 1.0 / tn);
  out.coeff_C = (1.0 - p.omega) /
                (2.0 / out.coeff_B + 1.0 / (p.beta * (1.0 - p.delta) * p.gamma * out.coeff_A));

  double s = std::min(out.coeff_A, out.coeff_B) * state.s_curr;
  if (state.L_next > 0.0) s = std::min(s, out.coeff_C / state.L_next);
  out.s_curr = s;
  out.t_curr = tn;
  out.t_next = next_t(tn, p.m);
  return out;
}

bool ValidityReport::valid() const {
  return std::none_of(clauses.begin(), clauses.end(),
                      [](const ParamClause& c) { return c.status == ClauseStatus::fail; });
}

bool ValidityReport::has_warnings() const {
  return std::any_of(clauses.begin(), clauses.end(),
                     [](const ParamClause& c) { return c.status == ClauseStatus::warn; });
}

std::string ValidityReport::summary() const {
  std::ostringstream out;
  out << (valid() ? (has_warnings() ? "valid-with-warning" : "valid") : "invalid");
  if (q) out << " q=" << *q;
  for (const auto& c : clauses) {
    if (c.status == ClauseStatus::pass) continue;
    out << "; " << (c.status == ClauseStatus::fail ? "error: " : "warning: ") << c.message;
  }
  return out.str();
}

ValidityReport validate_params(const AlgoParams& p, std::optional<double> L) {
  ValidityReport r;
  auto add = [&r](std::string name, bool ok, std::string message) {
    r.clauses.push_back({std::move(name), ok ? ClauseStatus::pass : ClauseStatus::fail,
                         ok ? std::string() : std::move(message)});
  };
  auto fmt = [](double v) {
    std::ostringstream s;
    s.precision(6);
    s << v;
    return s.str();
  };

  if (p.m == 1.0) {
    r.clauses.push_back({"m", ClauseStatus::warn, "m = 1 disables step growth (A_k = 1)"});
  } else {
    add("m", p.m > 0.0 && p.m < 1.0, "m = " + fmt(p.m) + " outside (0, 1]");
  }
  add("t0", p.t0 >= 1.0, "t0 = " + fmt(p.t0) + " < 1");
  add("gamma", p.gamma > 0.0 && p.gamma < 2.0, "gamma = " + fmt(p.gamma) + " outside (0, 2)");
  add("beta", p.beta > 0.0, "beta = " + fmt(p.beta) + " must be positive");
  add("omega", p.omega >= 0.0 && p.omega < 1.0, "omega = " + fmt(p.omega) + " outside [0, 1)");
  add("delta", p.delta >= 0.0 && p.delta < 1.0, "delta = " + fmt(p.delta) + " outside [0, 1)");
  if (p.s0) add("s0", *p.s0 > 0.0, "s0 = " + fmt(*p.s0) + " must be positive");

  const bool basics = r.valid();
  if (basics) {
    const double cond = p.growth_condition();
    add("growth", cond >= 1.0 - kConditionSlack,
        "step-growth condition 2/((1+beta)*gamma)*(1-1/t0) >= 1 fails: got " + fmt(cond));
  }
  if (basics && p.t0 > 1.0) {
    r.q = floor_q(p);
    if (L && *L > 0.0) {
      r.s0_floor = *r.q / *L;
      if (p.s0 && *p.s0 < *r.s0_floor) {
        r.clauses.push_back({"s0_floor", ClauseStatus::warn,
                             "s0 = " + fmt(*p.s0) + " below q/L = " + fmt(*r.s0_floor) +
                                 "; the step floor becomes min(s0, q/L)"});
      }
    }
  }
  return r;
}

}  // namespace adaagm
