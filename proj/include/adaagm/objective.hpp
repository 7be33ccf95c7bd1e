#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace adaagm {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Raised when a test problem cannot be built from the supplied data.
class ProblemError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Evaluates f(x) and writes grad f(x) into `grad` (already sized).
using ValueAndGradient = std::function<double(const Vector& x, Vector& grad)>;

/// f(x) - f(x_star) computed without subtracting two function values.
using ExcessFunction = std::function<double(const Vector& x, const Vector& x_star)>;

/// Known constants of a problem. Every field is optional; certificates that
/// need a missing constant refuse to run.
struct ProblemConstants {
  std::optional<double> L;       // global smoothness constant
  std::optional<double> mu;      // strong-convexity modulus
  std::optional<Vector> x_star;  // a minimizer
  std::optional<double> f_star;  // f(x_star)
  // x_star/f_star came from a numerical reference solve, not a closed form.
  bool reference_minimizer = false;
};

/// A smooth convex objective with value/gradient oracle and whatever ground
/// truth is known about it.
///
/// Instances are immutable and cheap to copy (the evaluator is shared).
/// Evaluation holds no mutable state, so one problem may be evaluated from
/// several threads at once.
class SmoothProblem {
 public:
  SmoothProblem(std::string name, std::size_t dimension, ValueAndGradient eval,
                ProblemConstants constants = {});

  const std::string& name() const noexcept { return name_; }
  std::size_t dimension() const noexcept { return dimension_; }

  double value(const Vector& x) const;
  Vector gradient(const Vector& x) const;
  double evaluate(const Vector& x, Vector& grad) const;

  const ProblemConstants& constants() const noexcept { return constants_; }
  const std::optional<double>& L_known() const noexcept { return constants_.L; }
  const std::optional<double>& mu_known() const noexcept { return constants_.mu; }
  const std::optional<Vector>& x_star() const noexcept { return constants_.x_star; }
  const std::optional<double>& f_star() const noexcept { return constants_.f_star; }
  bool has_minimizer() const noexcept { return constants_.x_star && constants_.f_star; }

  /// f(x) - f* given f_x = f(x). Near the minimizer the plain difference is
  /// dominated by rounding in f_x; problems with a closed-form excess use it
  /// instead. Requires f_star.
  double gap(const Vector& x, double f_x) const;

  /// Copy of this problem with x_star set and f_star = value(x_star).
  /// Throws ProblemError when the gradient at `x_star` exceeds `grad_tol`.
  SmoothProblem with_minimizer(const Vector& x_star, bool reference,
                               double grad_tol = 1e-6) const;
  SmoothProblem renamed(std::string name) const;
  SmoothProblem with_excess(ExcessFunction excess) const;

 private:
  std::string name_;
  std::size_t dimension_;
  std::shared_ptr<const ValueAndGradient> eval_;
  ProblemConstants constants_;
  std::shared_ptr<const ExcessFunction> excess_;
};

/// f(x) = 1/2 x'Ax - b'x for symmetric positive-semidefinite A.
///
/// L is the largest eigenvalue and mu the smallest (clipped to zero for a
/// singular A). The minimizer is the minimum-norm solution A^+ b, which
/// requires b to lie in the range of A.
SmoothProblem make_quadratic(const Matrix& matrix, const Vector& offset);

/// f(x) = t log sum_i exp((a_i'x + b_i)/t), smooth with L <= sigma_max(A)^2/t.
/// No minimizer is attached (the function may be unbounded below).
SmoothProblem make_log_sum_exp(const Matrix& rows, const Vector& shifts, double temperature);

/// f(x) = sum_i log(1 + exp(-y_i a_i'x)) + ridge/2 |x|^2.
///
/// L = sigma_max(A)^2/4 + ridge and mu = ridge. For ridge > 0 the minimizer
/// is attached from a reference AdaAGM solve to gradient norm 1e-12.
SmoothProblem make_logistic(const Matrix& features, const Vector& labels, double ridge);

/// Runs AdaAGM from the origin until |grad f| <= grad_tol and returns the
/// problem with the result attached as a reference minimizer.
SmoothProblem solve_reference(const SmoothProblem& problem, double grad_tol = 1e-12,
                              std::size_t max_iters = 2'000'000);

/// Max over coordinates of |g_i - fd_i| / max(1, |g_i|, |fd_i|) where fd is the
/// central difference quotient with spacing `step`.
double check_grad_fd(const SmoothProblem& problem, const Vector& point, double step = 1e-5);

/// Reads a dense matrix from CSV: comma separated, one row per line, no header.
Matrix load_csv_matrix(const std::string& path);

}  // namespace adaagm
