#include "adaagm/solver.hpp"

#include "adaagm/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace adaagm {

namespace {

std::span<const double> view(const Vector& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

void check_start(const SmoothProblem& problem, const Vector& x0) {
  if (static_cast<std::size_t>(x0.size()) != problem.dimension())
    throw std::invalid_argument("x0 has dimension " + std::to_string(x0.size()) + ", problem has " +
                                std::to_string(problem.dimension()));
  if (!x0.allFinite()) throw std::invalid_argument("x0 must be finite");
}

bool finite_eval(double f, const Vector& g) { return std::isfinite(f) && g.allFinite(); }

// Collects records under the thinning policy and decides when to stop.
class Recorder {
 public:
  Recorder(Trace& trace, const SmoothProblem& problem, const StopCriteria& stop,
           const RunOptions& options)
      : trace_(trace), problem_(problem), stop_(stop), options_(options) {}

  TraceRecord base(const SolverState& st) const {
    TraceRecord r;
    r.k = st.k;
    r.grad_norm = st.grad_x.norm();
    if (problem_.f_star()) r.gap = problem_.gap(st.x, st.f_x);
    return r;
  }

  // Returns true when the run should stop after this record.
  bool push(const TraceRecord& r, const SolverState& st) {
    last_ = r;
    last_x_ = st.x;
    last_y_ = st.y;
    const bool done = stop_now(r);
    if (done || r.k % options_.thinning == 0) {
      trace_.records.push_back(r);
      if (options_.record_iterates) {
        trace_.xs.push_back(st.x);
        trace_.ys.push_back(st.y);
      }
    }
    return done;
  }

  void finish() {
    if (trace_.records.empty() || trace_.records.back().k != last_.k) {
      trace_.records.push_back(last_);
      if (options_.record_iterates) {
        trace_.xs.push_back(last_x_);
        trace_.ys.push_back(last_y_);
      }
    }
    trace_.x_final = last_x_;
    trace_.y_final = last_y_;
  }

 private:
  bool stop_now(const TraceRecord& r) const {
    if (r.k >= stop_.max_iters) return true;
    if (stop_.grad_tol > 0.0 && r.grad_norm <= stop_.grad_tol) return true;
    if (stop_.gap_tol > 0.0 && std::isfinite(r.gap) && r.gap <= stop_.gap_tol) return true;
    return false;
  }

  Trace& trace_;
  const SmoothProblem& problem_;
  const StopCriteria& stop_;
  const RunOptions& options_;
  TraceRecord last_;
  Vector last_x_;
  Vector last_y_;
};

[[noreturn]] void rethrow_with_trace(const DivergenceError& e, Recorder& rec, Trace& trace) {
  rec.finish();
  throw DivergenceError(e.iteration(), std::make_shared<const Trace>(std::move(trace)));
}

void check_options(const RunOptions& options) {
  if (options.thinning == 0) throw std::invalid_argument("thinning must be positive");
}

}  // namespace

DivergenceError::DivergenceError(std::size_t iteration, std::shared_ptr<const Trace> partial)
    : std::runtime_error("non-finite value or gradient at iteration " + std::to_string(iteration)),
      iteration_(iteration),
      partial_(std::move(partial)) {}

void StopCriteria::validate() const {
  if (max_iters == 0) throw std::invalid_argument("max_iters must be positive");
  if (!(grad_tol >= 0.0) || !(gap_tol >= 0.0))
    throw std::invalid_argument("tolerances must be nonnegative");
}

StopCriteria default_stop(const SmoothProblem& problem, const Vector& x0) {
  StopCriteria s;
  s.max_iters = 100'000;
  s.grad_tol = 1e-10 * (1.0 + problem.gradient(x0).norm());
  return s;
}

SolverState initial_state(const SmoothProblem& problem, const Vector& x0) {
  check_start(problem, x0);
  SolverState st;
  st.x = x0;
  st.y = x0;
  st.f_x = problem.evaluate(x0, st.grad_x);
  if (!finite_eval(st.f_x, st.grad_x)) throw DivergenceError(0, nullptr);
  return st;
}

double resolve_initial_step(const SmoothProblem& problem, const AlgoParams& params, const Vector& x0) {
  if (params.s0) return *params.s0;
  const double q = floor_q(params);
  if (problem.L_known()) return q / *problem.L_known();

  Vector g0;
  const double f0 = problem.evaluate(x0, g0);
  const double gnorm = g0.norm();
  if (!(gnorm > 0.0)) return q;
  const double eps = 1e-4 * (1.0 + x0.norm());
  const Vector x1 = x0 - (eps / gnorm) * g0;
  Vector g1;
  const double f1 = problem.evaluate(x1, g1);
  const double L_hat = local_smoothness(view(g1), view(g0), f1, f0, view(x1), view(x0));
  return L_hat > 0.0 ? q / L_hat : q;
}

std::pair<SolverState, ScheduleState> adaagm_step(const SolverState& state,
                                                  const ScheduleState& sched,
                                                  const AlgoParams& params,
                                                  const SmoothProblem& problem, bool fixed_step) {
  const double t = sched.t_curr;
  const double tn = sched.t_next;

  SolverState next;
  next.k = state.k + 1;
  next.y = state.x - sched.s_curr * state.grad_x;
  const double c_momentum = (t - 1.0) / tn;
  const double c_gradient = (params.gamma - 1.0) * t / tn;
  next.x = next.y + c_momentum * (next.y - state.y) + c_gradient * (next.y - state.x);
  next.f_x = problem.evaluate(next.x, next.grad_x);
  if (!finite_eval(next.f_x, next.grad_x)) throw DivergenceError(next.k, nullptr);

  const double fallback = problem.L_known() ? *problem.L_known() : sched.L_max;
  const double L = local_smoothness(view(next.grad_x), view(state.grad_x), next.f_x, state.f_x,
                                    view(next.x), view(state.x), fallback);
  ScheduleState s = sched;
  s.L_next = L;
  s.L_max = std::max(sched.L_max, L);
  if (fixed_step) {
    s.t_curr = tn;
    s.t_next = next_t(tn, params.m);
  } else {
    s = advance_step(s, params);
  }
  return {std::move(next), s};
}

Trace run_adaagm(const SmoothProblem& problem, const AlgoParams& params, const StopCriteria& stop,
                 const Vector& x0, const RunOptions& options) {
  stop.validate();
  check_options(options);
  check_start(problem, x0);
  if (options.fixed_step) {
    if (!params.s0 || !(*params.s0 > 0.0))
      throw InvalidParamsError("fixed-step run needs an explicit positive s0");
    if (!(params.m > 0.0 && params.m <= 1.0) || !(params.t0 >= 1.0) || !(params.gamma > 0.0))
      throw InvalidParamsError("fixed-step run needs m in (0,1], t0 >= 1, gamma > 0");
  } else {
    const ValidityReport report = validate_params(params, problem.L_known());
    if (!report.valid()) throw InvalidParamsError("invalid AdaAGM parameters: " + report.summary());
  }

  Trace trace;
  trace.algorithm = "adaagm";
  trace.x0 = x0;
  AlgoParams used = params;
  used.s0 = resolve_initial_step(problem, params, x0);
  trace.params = used;
  if (problem.L_known() && !options.fixed_step && *used.s0 < floor_q(used) / *problem.L_known()) {
    trace.warnings.push_back("s0 below q/L; step floor is min(s0, q/L)");
  }

  const bool with_energy = problem.has_minimizer();
  Recorder rec(trace, problem, stop, options);
  SolverState st = initial_state(problem, x0);
  ScheduleState sched = initial_schedule(used, *used.s0);

  auto record = [&](const SolverState& s, const ScheduleState& sc, double L) {
    TraceRecord r = rec.base(s);
    r.s = sc.s_curr;
    r.t = sc.t_curr;
    r.L_est = L;
    if (with_energy) r.energy = energy_at(s, sc.t_curr, sc.s_curr, problem, used);
    return rec.push(r, s);
  };

  bool done = record(st, sched, kNaN);
  while (!done) {
    try {
      std::tie(st, sched) = adaagm_step(st, sched, used, problem, options.fixed_step);
    } catch (const DivergenceError& e) {
      rethrow_with_trace(e, rec, trace);
    }
    done = record(st, sched, sched.L_next);
  }
  rec.finish();
  return trace;
}

Trace run_gd(const SmoothProblem& problem, double step, const StopCriteria& stop, const Vector& x0,
             const RunOptions& options) {
  stop.validate();
  check_options(options);
  if (!(step > 0.0)) throw std::invalid_argument("gradient descent step must be positive");
  Trace trace;
  trace.algorithm = "gd";
  trace.x0 = x0;
  if (problem.L_known() && step >= 2.0 / *problem.L_known())
    trace.warnings.push_back("step >= 2/L: gradient descent may diverge");

  Recorder rec(trace, problem, stop, options);
  SolverState st = initial_state(problem, x0);
  auto record = [&](const SolverState& s) {
    TraceRecord r = rec.base(s);
    r.s = step;
    r.t = 1.0;
    return rec.push(r, s);
  };
  bool done = record(st);
  while (!done) {
    SolverState next;
    next.k = st.k + 1;
    next.x = st.x - step * st.grad_x;
    next.y = next.x;
    next.f_x = problem.evaluate(next.x, next.grad_x);
    if (!finite_eval(next.f_x, next.grad_x)) rethrow_with_trace(DivergenceError(next.k, nullptr), rec, trace);
    st = std::move(next);
    done = record(st);
  }
  rec.finish();
  return trace;
}

Trace run_nesterov(const SmoothProblem& problem, double step, const StopCriteria& stop,
                   const Vector& x0, const RunOptions& options) {
  stop.validate();
  check_options(options);
  if (!(step > 0.0)) throw std::invalid_argument("Nesterov step must be positive");
  Trace trace;
  trace.algorithm = "nesterov";
  trace.x0 = x0;
  if (problem.L_known() && step > 1.0 / *problem.L_known())
    trace.warnings.push_back("step > 1/L: the O(1/k^2) guarantee does not apply");

  Recorder rec(trace, problem, stop, options);
  SolverState st = initial_state(problem, x0);
  double theta = 1.0;
  auto record = [&](const SolverState& s) {
    TraceRecord r = rec.base(s);
    r.s = step;
    r.t = theta;
    return rec.push(r, s);
  };
  bool done = record(st);
  while (!done) {
    const double theta_next = next_t(theta, 1.0);
    SolverState next;
    next.k = st.k + 1;
    next.y = st.x - step * st.grad_x;
    next.x = next.y + ((theta - 1.0) / theta_next) * (next.y - st.y);
    next.f_x = problem.evaluate(next.x, next.grad_x);
    if (!finite_eval(next.f_x, next.grad_x)) rethrow_with_trace(DivergenceError(next.k, nullptr), rec, trace);
    st = std::move(next);
    theta = theta_next;
    done = record(st);
  }
  rec.finish();
  return trace;
}

namespace {

void put(std::ostream& out, double v) {
  if (std::isnan(v)) return;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out << buf;
}

constexpr const char* kTraceHeader = "k,gap,grad_norm,s,t,L_est,energy";

}  // namespace

void write_trace_csv(std::ostream& out, const Trace& trace) {
  out << kTraceHeader << '\n';
  for (const auto& r : trace.records) {
    out << r.k << ',';
    put(out, r.gap);
    out << ',';
    put(out, r.grad_norm);
    out << ',';
    put(out, r.s);
    out << ',';
    put(out, r.t);
    out << ',';
    put(out, r.L_est);
    out << ',';
    put(out, r.energy);
    out << '\n';
  }
}

void write_trace_csv(const std::string& path, const Trace& trace) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  write_trace_csv(out, trace);
  if (!out) throw std::runtime_error("write failed for " + path);
}

std::vector<TraceRecord> read_trace_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("trace CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kTraceHeader) throw std::runtime_error("unexpected trace header: " + line);

  std::vector<TraceRecord> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    if (cells.size() != 7)
      throw std::runtime_error("trace line " + std::to_string(lineno) + ": expected 7 fields");
    auto num = [&](const std::string& c) { return c.empty() ? kNaN : std::stod(c); };
    TraceRecord r;
    try {
      r.k = static_cast<std::size_t>(std::stoull(cells[0]));
      r.gap = num(cells[1]);
      r.grad_norm = num(cells[2]);
      r.s = num(cells[3]);
      r.t = num(cells[4]);
      r.L_est = num(cells[5]);
      r.energy = num(cells[6]);
    } catch (const std::logic_error&) {
      throw std::runtime_error("trace line " + std::to_string(lineno) + ": malformed number");
    }
    out.push_back(r);
  }
  return out;
}

std::vector<TraceRecord> read_trace_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_trace_csv(in);
}

}  // namespace adaagm
