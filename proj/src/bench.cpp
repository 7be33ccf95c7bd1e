#include "adaagm/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <numbers>
#include <set>
#include <sstream>
#include <thread>

namespace adaagm::bench {

// ---------------------------------------------------------------- rng

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Rng::Rng(std::uint64_t seed) {
  std::uint64_t st = seed;
  for (auto& w : s_) w = splitmix64(st);
}

std::uint64_t Rng::next_u64() {
  auto rotl = [](std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); };
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Rng::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double Rng::normal() {
  if (spare_) {
    const double v = *spare_;
    spare_.reset();
    return v;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(a);
  return r * std::cos(a);
}

std::uint64_t cell_seed(std::size_t problem_index, std::size_t solver_index, std::int64_t seed) {
  std::uint64_t st = 0x243f6a8885a308d3ULL;
  std::uint64_t h = splitmix64(st);
  for (std::uint64_t part : {static_cast<std::uint64_t>(problem_index),
                             static_cast<std::uint64_t>(solver_index), static_cast<std::uint64_t>(seed)}) {
    st = h ^ part;
    h = splitmix64(st);
  }
  return h;
}

Vector random_start(std::size_t dimension, std::uint64_t seed, double scale) {
  Rng rng(seed);
  Vector x(static_cast<Eigen::Index>(dimension));
  for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = scale * rng.normal();
  return x;
}

// ---------------------------------------------------------------- parsing

ConfigError::ConfigError(const std::string& message, std::size_t line, std::size_t column)
    : std::runtime_error(line ? std::to_string(line) + ":" + std::to_string(column) + ": " + message : message),
      line_(line),
      column_(column) {}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::vector<Section> parse_sections(const std::string& text) {
  std::vector<Section> out;
  std::istringstream in(text);
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = raw;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const std::size_t col = first + 1;

    if (line[first] == '[') {
      const auto close = line.find(']', first);
      if (close == std::string::npos) throw ConfigError("expected ']'", lineno, line.size() + 1);
      if (!trim(line.substr(close + 1)).empty())
        throw ConfigError("unexpected text after section header", lineno, close + 2);
      std::istringstream hdr(line.substr(first + 1, close - first - 1));
      Section s;
      s.line = lineno;
      hdr >> s.type >> s.name;
      std::string extra;
      if (hdr >> extra) throw ConfigError("section header takes a type and one name", lineno, col);
      if (s.type.empty()) throw ConfigError("empty section header", lineno, col);
      out.push_back(std::move(s));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("expected 'key = value'", lineno, col);
    if (out.empty()) throw ConfigError("key outside of any section", lineno, col);
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError("missing key before '='", lineno, col);
    auto& entries = out.back().entries;
    if (entries.count(key)) throw ConfigError("duplicate key '" + key + "'", lineno, col);
    const auto vstart = line.find_first_not_of(" \t", eq + 1);
    entries[key] = Entry{trim(line.substr(eq + 1)), lineno, vstart == std::string::npos ? eq + 2 : vstart + 1, col};
  }
  return out;
}

namespace {

double parse_number(const Entry& e, const std::string& key) {
  std::string v = e.value;
  // "1/L"-style values are handled by callers; plain fractions like 1/3 are allowed.
  try {
    std::size_t used = 0;
    if (const auto slash = v.find('/'); slash != std::string::npos) {
      const double num = std::stod(v.substr(0, slash), &used);
      const std::string rest = trim(v.substr(slash + 1));
      std::size_t used2 = 0;
      const double den = std::stod(rest, &used2);
      if (used2 != rest.size()) throw std::invalid_argument(v);
      return num / den;
    }
    const double x = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("'" + key + "' expects a number, got '" + e.value + "'", e.line, e.column);
  }
}

std::vector<double> parse_list(const Entry& e, const std::string& key) {
  std::vector<double> out;
  std::stringstream ss(e.value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    Entry sub = e;
    sub.value = trim(item);
    out.push_back(parse_number(sub, key));
  }
  if (out.empty()) throw ConfigError("'" + key + "' expects a list of numbers", e.line, e.column);
  return out;
}

std::size_t parse_count(const Entry& e, const std::string& key) {
  const double v = parse_number(e, key);
  if (!(v >= 1.0) || v != std::floor(v) || v > 1e12)
    throw ConfigError("'" + key + "' expects a positive integer", e.line, e.column);
  return static_cast<std::size_t>(v);
}

const std::set<std::string> kProblemKeys[] = {
    // quadratic
    {"kind", "matrix", "diag", "random_dim", "random_rank", "random_seed", "offset", "offset_csv"},
    // log_sum_exp
    {"kind", "rows", "random_rows", "random_dim", "random_seed", "shifts", "temperature", "minimizer"},
    // logistic
    {"kind", "features", "labels", "labels_csv", "random_rows", "random_dim", "random_seed", "ridge"},
};

const std::set<std::string> kSolverKeys = {"algorithm", "profile", "m",        "t0",       "gamma",
                                           "beta",      "omega",   "delta",    "s0",       "step",
                                           "max_iters", "grad_tol", "gap_tol"};
const std::set<std::string> kExperimentKeys = {"output_dir", "seeds", "thinning", "x0_scale"};
const std::set<std::string> kPathKeys = {"matrix", "offset_csv", "rows", "features", "labels_csv"};

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

struct Parsed {
  ExperimentConfig config;
  std::vector<std::string> errors;
  std::vector<std::string> notes;
};

Parsed parse_all(const std::string& text, const std::filesystem::path& base_dir) {
  Parsed out;
  out.config.base_dir = base_dir;
  std::vector<Section> sections;
  try {
    sections = parse_sections(text);
  } catch (const ConfigError& e) {
    out.errors.push_back(e.what());
    return out;
  }
  auto err = [&out](const std::string& msg, std::size_t line = 0, std::size_t col = 0) {
    out.errors.push_back(ConfigError(msg, line, col).what());
  };

  std::set<std::string> names;
  for (const auto& sec : sections) {
    if (sec.type != "experiment" && sec.name.empty()) {
      err("section [" + sec.type + "] needs a name", sec.line, 1);
      continue;
    }
    if ((sec.type == "problem" || sec.type == "solver") &&
        !names.insert(sec.type + "/" + sec.name).second) {
      err("duplicate " + sec.type + " '" + sec.name + "'", sec.line, 1);
      continue;
    }
    try {
      if (sec.type == "experiment") {
        for (const auto& [key, e] : sec.entries) {
          if (!kExperimentKeys.count(key)) {
            err("unknown key '" + key + "' in [experiment]", e.line, e.key_column);
            continue;
          }
          if (key == "output_dir") out.config.output_dir = resolve(base_dir, e.value);
          if (key == "thinning") out.config.thinning = parse_count(e, key);
          if (key == "x0_scale") out.config.x0_scale = parse_number(e, key);
          if (key == "seeds") {
            out.config.seeds.clear();
            for (double v : parse_list(e, key)) {
              if (v != std::floor(v)) throw ConfigError("seeds must be integers", e.line, e.column);
              out.config.seeds.push_back(static_cast<std::int64_t>(v));
            }
          }
        }
      } else if (sec.type == "problem") {
        ProblemSpec p;
        p.name = sec.name;
        const auto kind = sec.entries.find("kind");
        if (kind == sec.entries.end()) {
          err("problem '" + sec.name + "' has no kind", sec.line, 1);
          continue;
        }
        p.kind = kind->second.value;
        int idx = p.kind == "quadratic" ? 0 : p.kind == "log_sum_exp" ? 1 : p.kind == "logistic" ? 2 : -1;
        if (idx < 0) {
          err("unknown problem kind '" + p.kind + "'", kind->second.line, kind->second.column);
          continue;
        }
        for (const auto& [key, e] : sec.entries) {
          if (!kProblemKeys[idx].count(key)) {
            err("unknown key '" + key + "' for " + p.kind + " problem", e.line, e.key_column);
            continue;
          }
          if (kPathKeys.count(key) && !std::filesystem::exists(resolve(base_dir, e.value))) {
            err("missing file '" + e.value + "'", e.line, e.column);
            continue;
          }
          p.fields[key] = e.value;
        }
        out.config.problems.push_back(std::move(p));
      } else if (sec.type == "solver") {
        SolverSpec s;
        s.name = sec.name;
        for (const auto& [key, e] : sec.entries)
          if (!kSolverKeys.count(key)) err("unknown key '" + key + "' in solver '" + sec.name + "'", e.line, e.key_column);
        auto get = [&](const char* key) -> const Entry* {
          const auto it = sec.entries.find(key);
          return it == sec.entries.end() ? nullptr : &it->second;
        };
        if (const Entry* a = get("algorithm")) {
          if (a->value == "adaagm") s.algorithm = Algorithm::adaagm;
          else if (a->value == "gd") s.algorithm = Algorithm::gd;
          else if (a->value == "nesterov") s.algorithm = Algorithm::nesterov;
          else throw ConfigError("unknown algorithm '" + a->value + "'", a->line, a->column);
        }
        if (const Entry* e = get("max_iters")) s.max_iters = parse_count(*e, "max_iters");
        if (const Entry* e = get("grad_tol")) s.grad_tol = parse_number(*e, "grad_tol");
        if (const Entry* e = get("gap_tol")) s.gap_tol = parse_number(*e, "gap_tol");
        if (const Entry* e = get("step")) {
          if (e->value != "1/L") s.step = parse_number(*e, "step");
        }
        if (const Entry* e = get("profile")) s.profile = e->value;
        if (s.algorithm == Algorithm::adaagm) {
          const Entry* pe = get("profile");
          if (s.profile != "custom" && s.profile != "default") {
            try {
              s.params = profile(s.profile);
            } catch (const std::invalid_argument& ex) {
              throw ConfigError(ex.what(), pe->line, pe->column);
            }
          }
          const bool any_override = get("m") || get("t0") || get("gamma") || get("beta") ||
                                    get("omega") || get("delta") || get("s0");
          if (s.profile == "default" && any_override) {
            throw ConfigError("explicit parameters need a named profile or 'custom'", sec.line, 1);
          }
          if (s.profile == "custom") {
            for (const char* key : {"m", "t0", "gamma", "beta", "omega", "delta"})
              if (!get(key)) err(std::string("custom profile needs '") + key + "'", sec.line, 1);
          }
          if (const Entry* e = get("m")) s.params.m = parse_number(*e, "m");
          if (const Entry* e = get("t0")) s.params.t0 = parse_number(*e, "t0");
          if (const Entry* e = get("gamma")) s.params.gamma = parse_number(*e, "gamma");
          if (const Entry* e = get("beta")) s.params.beta = parse_number(*e, "beta");
          if (const Entry* e = get("omega")) s.params.omega = parse_number(*e, "omega");
          if (const Entry* e = get("delta")) s.params.delta = parse_number(*e, "delta");
          if (const Entry* e = get("s0")) s.params.s0 = parse_number(*e, "s0");
          if (s.profile != "default") {
            const ValidityReport rep = validate_params(s.params);
            if (!rep.valid()) {
              err("solver '" + s.name + "': " + rep.summary(), sec.line, 1);
            } else {
              std::ostringstream note;
              note << "solver " << s.name << ": profile " << s.profile;
              if (rep.q) note << " q=" << *rep.q;
              if (rep.has_warnings()) note << " (" << rep.summary() << ")";
              out.notes.push_back(note.str());
            }
          } else {
            out.notes.push_back("solver " + s.name + ": profile default (resolved per problem)");
          }
        } else {
          if (s.step && !(*s.step > 0.0)) err("solver '" + s.name + "': step must be positive", sec.line, 1);
          out.notes.push_back("solver " + s.name + ": baseline");
        }
        out.config.solvers.push_back(std::move(s));
      } else {
        err("unknown section type '" + sec.type + "'", sec.line, 1);
      }
    } catch (const ConfigError& e) {
      out.errors.push_back(e.what());
    }
  }
  if (out.config.problems.empty()) out.errors.insert(out.errors.begin(), "no problems defined");
  else if (out.config.solvers.empty()) out.errors.insert(out.errors.begin(), "no solvers defined");
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
  Parsed p = parse_all(text, base_dir);
  if (!p.errors.empty()) {
    std::string msg = p.errors.front();
    for (std::size_t i = 1; i < p.errors.size(); ++i) msg += "\n" + p.errors[i];
    throw ConfigError(msg);
  }
  return std::move(p.config);
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  return parse_config(read_file(path), path.parent_path());
}

ValidationReport validate_config(const std::filesystem::path& path) {
  ValidationReport r;
  Parsed p;
  try {
    p = parse_all(read_file(path), path.parent_path());
  } catch (const ConfigError& e) {
    r.errors.push_back(e.what());
    return r;
  }
  r.errors = std::move(p.errors);
  r.ok = r.errors.empty();
  if (r.ok) {
    r.lines.push_back("ok");
    for (auto& n : p.notes) r.lines.push_back(std::move(n));
  }
  return r;
}

// ---------------------------------------------------------------- problems

namespace {

struct Fields {
  const ProblemSpec& spec;
  const std::filesystem::path& base;

  bool has(const std::string& k) const { return spec.fields.count(k) > 0; }
  const std::string& raw(const std::string& k) const { return spec.fields.at(k); }
  double num(const std::string& k, double fallback) const {
    return has(k) ? parse_number(Entry{raw(k)}, k) : fallback;
  }
  std::size_t count(const std::string& k) const {
    if (!has(k)) throw ConfigError("problem '" + spec.name + "' needs '" + k + "'");
    return parse_count(Entry{raw(k)}, k);
  }
  Vector list(const std::string& k) const {
    const auto v = parse_list(Entry{raw(k)}, k);
    return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
  }
  Matrix csv(const std::string& k) const { return load_csv_matrix(resolve(base, raw(k)).string()); }
  std::uint64_t seed() const { return static_cast<std::uint64_t>(num("random_seed", 0.0)); }
};

Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = rng.normal();
  return m;
}

Matrix rows_or_random(const Fields& f, const std::string& csv_key, Rng& rng) {
  if (f.has(csv_key)) return f.csv(csv_key);
  return random_matrix(f.count("random_rows"), f.count("random_dim"), rng);
}

}  // namespace

SmoothProblem build_problem(const ProblemSpec& spec, const std::filesystem::path& base_dir) {
  const Fields f{spec, base_dir};
  Rng rng(f.seed());
  if (spec.kind == "quadratic") {
    Matrix A;
    if (f.has("matrix")) {
      A = f.csv("matrix");
    } else if (f.has("diag")) {
      A = f.list("diag").asDiagonal();
    } else {
      const std::size_t n = f.count("random_dim");
      const std::size_t r = f.has("random_rank") ? f.count("random_rank") : n;
      const Matrix M = random_matrix(n, r, rng);
      A = M * M.transpose() / static_cast<double>(r);
      A = 0.5 * (A + A.transpose());
    }
    Vector b = Vector::Zero(A.rows());
    if (f.has("offset_csv")) {
      const Matrix m = f.csv("offset_csv");
      b = Eigen::Map<const Vector>(m.data(), m.size());
    } else if (f.has("offset") && f.raw("offset") == "random") {
      Vector z(A.rows());
      for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = rng.normal();
      b = A * z;
    } else if (f.has("offset")) {
      b = f.list("offset");
    }
    return make_quadratic(A, b).renamed(spec.name);
  }
  if (spec.kind == "log_sum_exp") {
    Matrix A = rows_or_random(f, "rows", rng);
    const std::string mode = f.has("minimizer") ? f.raw("minimizer") : "none";
    Vector b = f.has("shifts") ? f.list("shifts") : Vector::Zero(A.rows());
    const double t = f.num("temperature", 1.0);
    if (mode == "centered") {
      // Centered rows with equal shifts put the minimizer at the origin.
      A.rowwise() -= A.colwise().mean();
      b.setZero();
      return make_log_sum_exp(A, b, t).with_minimizer(Vector::Zero(A.cols()), false, 1e-10).renamed(spec.name);
    }
    SmoothProblem p = make_log_sum_exp(A, b, t);
    if (mode == "solve") p = solve_reference(p);
    else if (mode != "none") throw ConfigError("minimizer must be none, centered or solve");
    return p.renamed(spec.name);
  }
  if (spec.kind == "logistic") {
    const Matrix X = rows_or_random(f, "features", rng);
    Vector y;
    if (f.has("labels")) {
      y = f.list("labels");
    } else if (f.has("labels_csv")) {
      const Matrix m = f.csv("labels_csv");
      y = Eigen::Map<const Vector>(m.data(), m.size());
    } else {
      // Noisy linear teacher, so the classes overlap.
      Vector w(X.cols());
      for (Eigen::Index i = 0; i < w.size(); ++i) w(i) = rng.normal();
      y.resize(X.rows());
      for (Eigen::Index i = 0; i < y.size(); ++i) y(i) = X.row(i).dot(w) + rng.normal() >= 0.0 ? 1.0 : -1.0;
    }
    return make_logistic(X, y, f.num("ridge", 0.0)).renamed(spec.name);
  }
  throw ConfigError("unknown problem kind '" + spec.kind + "'");
}

// ---------------------------------------------------------------- experiment

bool ExperimentSummary::any_diverged() const {
  return std::any_of(cells.begin(), cells.end(), [](const CellSummary& c) { return c.status == "diverged"; });
}

namespace {

std::string fmt17(double v) {
  if (std::isnan(v)) return {};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void run_cell(const ExperimentConfig& cfg, const SmoothProblem& problem, const SolverSpec& solver,
              std::size_t pi, std::size_t si, std::int64_t seed, std::size_t thinning,
              const std::filesystem::path& out_dir, CellSummary& cell) {
  cell.trace_file = problem.name() + "_" + solver.name + "_" + std::to_string(seed) + ".csv";
  const Vector x0 = random_start(problem.dimension(), cell_seed(pi, si, seed), cfg.x0_scale);
  StopCriteria stop;
  stop.max_iters = solver.max_iters;
  stop.grad_tol = solver.grad_tol;
  stop.gap_tol = solver.gap_tol;
  RunOptions opts;
  opts.thinning = thinning;

  std::optional<AlgoParams> params;
  auto finish = [&](const Trace& trace) {
    write_trace_csv((out_dir / cell.trace_file).string(), trace);
    if (!trace.records.empty()) {
      cell.iterations = trace.records.back().k;
      cell.final_gap = trace.records.back().gap;
      cell.final_grad_norm = trace.records.back().grad_norm;
    }
  };

  try {
    Trace trace;
    if (solver.algorithm == Algorithm::adaagm) {
      params = solver.profile == "default"
                   ? default_profile(problem.mu_known() && *problem.mu_known() > 0.0)
                   : solver.params;
      if (params->t0 > 1.0) cell.q = floor_q(*params);
      trace = run_adaagm(problem, *params, stop, x0, opts);
    } else {
      double step;
      if (solver.step) {
        step = *solver.step;
      } else if (problem.L_known()) {
        step = 1.0 / *problem.L_known();
      } else {
        throw std::invalid_argument("step = 1/L needs a problem with known L");
      }
      trace = solver.algorithm == Algorithm::gd ? run_gd(problem, step, stop, x0, opts)
                                                : run_nesterov(problem, step, stop, x0, opts);
    }
    finish(trace);
    cell.status = "ok";
    if (params) {
      for (CertificateKind kind : applicable_certificates(problem, *trace.params)) {
        if (kind == CertificateKind::grad_summable && thinning != 1) continue;
        cell.certificates.push_back(certify(trace, problem, *trace.params, kind));
      }
    }
    for (const auto& c : cell.certificates) cell.certificates_passed += c.passed() ? 1 : 0;
    cell.certificates_total = cell.certificates.size();
  } catch (const DivergenceError& e) {
    cell.status = "diverged";
    cell.message = e.what();
    if (e.partial_trace()) finish(*e.partial_trace());
  } catch (const std::exception& e) {
    cell.status = "error";
    cell.message = e.what();
  }
}

}  // namespace

ExperimentSummary run_experiment(const ExperimentConfig& cfg, const RunSettings& settings) {
  if (cfg.problems.empty()) throw ConfigError("no problems defined");
  if (cfg.solvers.empty()) throw ConfigError("no solvers defined");
  const std::filesystem::path out_dir = settings.output_dir ? *settings.output_dir : cfg.output_dir;
  const std::size_t thinning = settings.thinning ? *settings.thinning : cfg.thinning;
  if (thinning == 0) throw ConfigError("thinning must be positive");

  {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    const auto probe = out_dir / ".write_probe";
    std::ofstream test(probe);
    if (ec || !test) throw std::runtime_error("output directory " + out_dir.string() + " is not writable");
    test.close();
    std::filesystem::remove(probe, ec);
  }

  std::vector<std::optional<SmoothProblem>> problems(cfg.problems.size());
  std::vector<std::string> build_errors(cfg.problems.size());
  for (std::size_t i = 0; i < cfg.problems.size(); ++i) {
    try {
      problems[i] = build_problem(cfg.problems[i], cfg.base_dir);
    } catch (const std::exception& e) {
      build_errors[i] = e.what();
    }
  }

  struct Job {
    std::size_t pi, si;
    std::int64_t seed;
  };
  std::vector<Job> jobs;
  for (std::size_t pi = 0; pi < cfg.problems.size(); ++pi)
    for (std::size_t si = 0; si < cfg.solvers.size(); ++si)
      for (std::int64_t seed : cfg.seeds) jobs.push_back({pi, si, seed});

  ExperimentSummary summary;
  summary.cells.resize(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t j = next++; j < jobs.size(); j = next++) {
      const Job& job = jobs[j];
      CellSummary& cell = summary.cells[j];
      cell.problem = cfg.problems[job.pi].name;
      cell.solver = cfg.solvers[job.si].name;
      cell.seed = job.seed;
      if (!problems[job.pi]) {
        cell.status = "error";
        cell.message = build_errors[job.pi];
        continue;
      }
      run_cell(cfg, *problems[job.pi], cfg.solvers[job.si], job.pi, job.si, job.seed, thinning, out_dir, cell);
    }
  };
  const std::size_t nthreads = std::max<std::size_t>(1, std::min(settings.threads, jobs.size()));
  std::vector<std::thread> pool;
  for (std::size_t i = 1; i < nthreads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  std::ofstream csv(out_dir / "summary.csv", std::ios::binary);
  csv << "problem,solver,seed,status,iterations,final_gap,final_grad_norm,q,certificates_passed,"
         "certificates_total,trace_file\n";
  std::ofstream certs(out_dir / "certificates.txt", std::ios::binary);
  std::ofstream viol(out_dir / "violations.csv", std::ios::binary);
  viol << "cell,kind,k,lhs,rhs\n";
  for (const auto& c : summary.cells) {
    csv << c.problem << ',' << c.solver << ',' << c.seed << ',' << c.status << ',' << c.iterations << ','
        << fmt17(c.final_gap) << ',' << fmt17(c.final_grad_norm) << ',' << (c.q ? fmt17(*c.q) : "") << ','
        << c.certificates_passed << ',' << c.certificates_total << ',' << c.trace_file << '\n';
    const std::string cell = c.problem + "_" + c.solver + "_" + std::to_string(c.seed);
    if (!c.message.empty()) certs << cell << ": " << c.status << ": " << c.message << '\n';
    for (const auto& cert : c.certificates) certs << cell << ": " << summary_line(cert) << '\n';
    write_violations_csv(viol, cell, c.certificates);
  }
  if (!csv || !certs || !viol) throw std::runtime_error("failed writing summary files in " + out_dir.string());
  return summary;
}

}  // namespace adaagm::bench
