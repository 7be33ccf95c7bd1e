#include "adaagm/objective.hpp"

#include "adaagm/schedule.hpp"
#include "adaagm/solver.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <utility>

namespace adaagm {

SmoothProblem::SmoothProblem(std::string name, std::size_t dimension, ValueAndGradient eval,
                             ProblemConstants constants)
    : name_(std::move(name)),
      dimension_(dimension),
      eval_(std::make_shared<const ValueAndGradient>(std::move(eval))),
      constants_(std::move(constants)) {
  if (dimension_ == 0) throw ProblemError("problem dimension must be positive");
  if (constants_.L && !(*constants_.L > 0.0)) throw ProblemError("L must be positive");
  if (constants_.mu && !(*constants_.mu >= 0.0)) throw ProblemError("mu must be nonnegative");
  if (constants_.x_star && static_cast<std::size_t>(constants_.x_star->size()) != dimension_)
    throw ProblemError("x_star has the wrong dimension");
}

double SmoothProblem::evaluate(const Vector& x, Vector& grad) const {
  if (static_cast<std::size_t>(x.size()) != dimension_)
    throw ProblemError("point has dimension " + std::to_string(x.size()) + ", expected " +
                       std::to_string(dimension_));
  grad.resize(static_cast<Eigen::Index>(dimension_));
  return (*eval_)(x, grad);
}

double SmoothProblem::value(const Vector& x) const {
  Vector g;
  return evaluate(x, g);
}

Vector SmoothProblem::gradient(const Vector& x) const {
  Vector g;
  evaluate(x, g);
  return g;
}

SmoothProblem SmoothProblem::with_minimizer(const Vector& x_star, bool reference,
                                            double grad_tol) const {
  Vector g;
  const double f = evaluate(x_star, g);
  if (!(g.norm() <= grad_tol))
    throw ProblemError(name_ + ": gradient norm " + std::to_string(g.norm()) +
                       " at the claimed minimizer");
  SmoothProblem out = *this;
  out.constants_.x_star = x_star;
  out.constants_.f_star = f;
  out.constants_.reference_minimizer = reference;
  return out;
}

double SmoothProblem::gap(const Vector& x, double f_x) const {
  if (!constants_.f_star) throw ProblemError(name_ + ": f_star unknown");
  if (excess_ && constants_.x_star) return (*excess_)(x, *constants_.x_star);
  return f_x - *constants_.f_star;
}

SmoothProblem SmoothProblem::with_excess(ExcessFunction excess) const {
  SmoothProblem out = *this;
  out.excess_ = std::make_shared<const ExcessFunction>(std::move(excess));
  return out;
}

SmoothProblem SmoothProblem::renamed(std::string name) const {
  SmoothProblem out = *this;
  out.name_ = std::move(name);
  return out;
}

SmoothProblem make_quadratic(const Matrix& matrix, const Vector& offset) {
  const Eigen::Index n = matrix.rows();
  if (n == 0 || matrix.cols() != n) throw ProblemError("quadratic: matrix must be square and nonempty");
  if (offset.size() != n) throw ProblemError("quadratic: offset length does not match matrix");
  if (!matrix.allFinite() || !offset.allFinite()) throw ProblemError("quadratic: non-finite data");

  const double scale = std::max(1.0, matrix.cwiseAbs().maxCoeff());
  if ((matrix - matrix.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw ProblemError("quadratic: matrix is not symmetric");

  Eigen::SelfAdjointEigenSolver<Matrix> eig(matrix);
  const Vector& lambda = eig.eigenvalues();  // ascending
  const double lmax = lambda(n - 1);
  const double tol = 1e-12 * std::max(1.0, std::abs(lmax));
  if (lambda(0) < -tol) throw ProblemError("quadratic: matrix is indefinite");

  // Minimum-norm minimizer through the eigenbasis.
  const Matrix& V = eig.eigenvectors();
  const Vector coords = V.transpose() * offset;
  Vector x_star = Vector::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (lambda(i) > tol) x_star += (coords(i) / lambda(i)) * V.col(i);
  }
  if ((matrix * x_star - offset).norm() > 1e-9 * (1.0 + offset.norm()))
    throw ProblemError("quadratic: offset is not in the range of the matrix (no minimizer)");

  ProblemConstants c;
  if (lmax > tol) c.L = lmax;
  c.mu = lambda(0) > tol ? lambda(0) : 0.0;
  c.x_star = x_star;

  auto A = std::make_shared<const Matrix>(matrix);
  auto b = std::make_shared<const Vector>(offset);
  ValueAndGradient eval = [A, b](const Vector& x, Vector& grad) {
    grad.noalias() = (*A) * x;
    const double f = 0.5 * x.dot(grad) - b->dot(x);
    grad -= *b;
    return f;
  };
  c.f_star = -0.5 * offset.dot(x_star);
  // f(x) - f(x*) = 1/2 d'Ad + r'd with d = x - x*, r = Ax* - b.
  ExcessFunction excess = [A, b](const Vector& x, const Vector& xs) {
    const Vector d = x - xs;
    const Vector r = (*A) * xs - *b;
    return 0.5 * d.dot((*A) * d) + r.dot(d);
  };
  return SmoothProblem("quadratic", static_cast<std::size_t>(n), std::move(eval), std::move(c))
      .with_excess(std::move(excess));
}

namespace {

double largest_singular_value(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

}  // namespace

SmoothProblem make_log_sum_exp(const Matrix& rows, const Vector& shifts, double temperature) {
  if (rows.rows() == 0 || rows.cols() == 0) throw ProblemError("log_sum_exp: rows must be nonempty");
  if (shifts.size() != rows.rows()) throw ProblemError("log_sum_exp: one shift per row required");
  if (!(temperature > 0.0)) throw ProblemError("log_sum_exp: temperature must be positive");

  ProblemConstants c;
  const double sigma = largest_singular_value(rows);
  if (sigma > 0.0) c.L = sigma * sigma / temperature;

  auto A = std::make_shared<const Matrix>(rows);
  auto b = std::make_shared<const Vector>(shifts);
  ValueAndGradient eval = [A, b, temperature](const Vector& x, Vector& grad) {
    Vector z = ((*A) * x + *b) / temperature;
    const double zmax = z.maxCoeff();
    Vector w = (z.array() - zmax).exp().matrix();
    const double total = w.sum();
    w /= total;
    grad.noalias() = A->transpose() * w;
    return temperature * (zmax + std::log(total));
  };
  // f(x) - f(x*) = t log sum_i p_i exp(u_i), p = softmax at x*, u = A(x - x*)/t.
  ExcessFunction excess = [A, b, temperature](const Vector& x, const Vector& xs) {
    const Vector z = ((*A) * xs + *b) / temperature;
    Vector p = (z.array() - z.maxCoeff()).exp().matrix();
    p /= p.sum();
    const Vector u = (*A) * (x - xs) / temperature;
    const double umax = u.maxCoeff();
    if (umax <= 1.0) return temperature * std::log1p(p.dot(u.array().expm1().matrix()));
    return temperature * (umax + std::log(p.dot((u.array() - umax).exp().matrix())));
  };
  return SmoothProblem("log_sum_exp", static_cast<std::size_t>(rows.cols()), std::move(eval),
                       std::move(c))
      .with_excess(std::move(excess));
}

SmoothProblem make_logistic(const Matrix& features, const Vector& labels, double ridge) {
  if (features.rows() == 0 || features.cols() == 0)
    throw ProblemError("logistic: features must be nonempty");
  if (labels.size() != features.rows())
    throw ProblemError("logistic: one label per feature row required");
  for (Eigen::Index i = 0; i < labels.size(); ++i) {
    if (labels(i) != 1.0 && labels(i) != -1.0)
      throw ProblemError("logistic: label " + std::to_string(i) + " is not +1 or -1");
  }
  if (!(ridge >= 0.0)) throw ProblemError("logistic: ridge must be nonnegative");

  ProblemConstants c;
  const double sigma = largest_singular_value(features);
  const double L = 0.25 * sigma * sigma + ridge;
  if (L > 0.0) c.L = L;
  c.mu = ridge;

  // Rows pre-multiplied by their labels: margin_i = y_i a_i'x.
  auto YA = std::make_shared<const Matrix>(labels.asDiagonal() * features);
  ValueAndGradient eval = [YA, ridge](const Vector& x, Vector& grad) {
    const Vector margin = (*YA) * x;
    double f = 0.0;
    Vector weight(margin.size());
    for (Eigen::Index i = 0; i < margin.size(); ++i) {
      const double u = -margin(i);
      // softplus(u) = log(1 + e^u), and d/du = sigmoid(u)
      f += std::max(u, 0.0) + std::log1p(std::exp(-std::abs(u)));
      weight(i) = u >= 0.0 ? 1.0 / (1.0 + std::exp(-u)) : std::exp(u) / (1.0 + std::exp(u));
    }
    grad.noalias() = -(YA->transpose() * weight);
    grad += ridge * x;
    return f + 0.5 * ridge * x.squaredNorm();
  };
  SmoothProblem problem("logistic", static_cast<std::size_t>(features.cols()), std::move(eval),
                        std::move(c));
  if (ridge > 0.0) return solve_reference(problem);
  return problem;
}

SmoothProblem solve_reference(const SmoothProblem& problem, double grad_tol, std::size_t max_iters) {
  const bool strongly = problem.mu_known() && *problem.mu_known() > 0.0;
  AlgoParams params = default_profile(strongly);
  StopCriteria stop;
  stop.max_iters = max_iters;
  stop.grad_tol = grad_tol;
  const Vector x0 = Vector::Zero(static_cast<Eigen::Index>(problem.dimension()));
  Trace trace = run_adaagm(problem, params, stop, x0);
  const Vector g = problem.gradient(trace.x_final);
  if (!(g.norm() <= grad_tol))
    throw ProblemError(problem.name() + ": reference solve stalled at gradient norm " +
                       std::to_string(g.norm()));
  return problem.with_minimizer(trace.x_final, true, grad_tol);
}

double check_grad_fd(const SmoothProblem& problem, const Vector& point, double step) {
  const Vector g = problem.gradient(point);
  double worst = 0.0;
  Vector probe = point;
  for (Eigen::Index i = 0; i < point.size(); ++i) {
    probe(i) = point(i) + step;
    const double fp = problem.value(probe);
    probe(i) = point(i) - step;
    const double fm = problem.value(probe);
    probe(i) = point(i);
    const double fd = (fp - fm) / (2.0 * step);
    const double scale = std::max({1.0, std::abs(g(i)), std::abs(fd)});
    worst = std::max(worst, std::abs(g(i) - fd) / scale);
  }
  return worst;
}

Matrix load_csv_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ProblemError("cannot open matrix file " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
        if (cell.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw ProblemError(path + ":" + std::to_string(lineno) + ": not a number: '" + cell + "'");
      }
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw ProblemError(path + ":" + std::to_string(lineno) + ": ragged row");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ProblemError(path + ": empty matrix");
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return m;
}

}  // namespace adaagm
