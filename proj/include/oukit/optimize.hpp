#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <vector>

#include "oukit/errors.hpp"

namespace oukit {

/// Differentiable objective: evaluate returns f(x) and fills grad (resized to
/// dimension). Implementations may throw; optimizers treat that as a failed
/// evaluation at that point.
class Objective {
 public:
  using EvalFn = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd& grad)>;

  Objective(Eigen::Index dimension, EvalFn evaluate)
      : dimension_(dimension), evaluate_(std::move(evaluate)) {}

  double operator()(const Eigen::VectorXd& x, Eigen::VectorXd& grad) const {
    grad.resize(dimension_);
    return evaluate_(x, grad);
  }

  Eigen::Index dimension() const noexcept { return dimension_; }

 private:
  Eigen::Index dimension_;
  EvalFn evaluate_;
};

struct LineSearchResult {
  double alpha = 0.0;
  double f = 0.0;
  Eigen::VectorXd x;     // x0 + alpha p
  Eigen::VectorXd grad;  // gradient there
  int evaluations = 0;
};

/// Strong-Wolfe line search (sufficient decrease c1, curvature c2), bracketing
/// with cubic-interpolation zoom. The unit step is tried first; when it already
/// satisfies Wolfe, one interpolated refinement is attempted, which lands on
/// the exact line minimizer whenever the objective is quadratic along p.
LineSearchResult line_search(const Objective& objective, const Eigen::VectorXd& x, double f0,
                             const Eigen::VectorXd& g0, const Eigen::VectorXd& p,
                             double c1 = 1e-4, double c2 = 0.9, int max_iters = 50);

/// One line of an iteration trace (CSV columns: iter, f, ||g||, alpha).
struct TraceRow {
  int iteration = 0;
  double f = 0.0;
  double grad_norm = 0.0;
  double alpha = 0.0;
};

/// Snapshot of one accepted BFGS step, for traces and invariant checks.
struct BfgsIterate {
  int iteration;
  double f;
  double grad_norm;
  double alpha;
  double sy;       // y's = curvature along the step
  bool h_updated;  // false when the curvature guard skipped the update
  const Eigen::MatrixXd& inverse_hessian;
};

struct BfgsOptions {
  double grad_tolerance = 1e-6;
  int max_iters = 200;
  std::function<void(const BfgsIterate&)> on_iterate;  // optional observer
};

struct BfgsResult {
  Eigen::VectorXd x;
  double f = 0.0;
  Eigen::VectorXd grad;
  bool converged = false;
  int iterations = 0;
};

/// BFGS with the inverse-Hessian update
///   H <- (I - rho s y')(H)(I - rho y s') + rho s s',  rho = 1 / y's,
/// skipped when y's <= 1e-10 ||y|| ||s||. Returns when ||g|| < grad_tolerance
/// or the iteration budget is exhausted; a failed line search returns the best
/// point found with converged = false.
BfgsResult bfgs_minimize(const Objective& objective, const Eigen::VectorXd& x0,
                         const Eigen::MatrixXd& h0, const BfgsOptions& options = {});

/// Same, starting from the identity inverse-Hessian.
BfgsResult bfgs_minimize(const Objective& objective, const Eigen::VectorXd& x0,
                         const BfgsOptions& options = {});

struct HopConfig {
  int n_hops = 50;
  double step_scale = 0.5;   // uniform perturbation half-width per coordinate
  double temperature = 1.0;  // Metropolis temperature
  std::uint64_t seed = 0;
  BfgsOptions bfgs;

  void validate() const;
};

struct HopResult {
  Eigen::VectorXd x;
  double f = 0.0;
  Eigen::VectorXd grad;
  int hops_accepted = 0;
  int hops_skipped = 0;  // objective failures, hop abandoned
  int total_bfgs_iterations = 0;
  std::vector<double> best_trace;  // best-ever value after each descent
};

/// Basin hopping: BFGS descent from x0, then n_hops rounds of {perturb the
/// accepted point, descend, Metropolis-accept on the descended value}. The
/// best-ever point is returned, so the result is never worse than the plain
/// descent from x0.
HopResult basin_hop(const Objective& objective, const Eigen::VectorXd& x0,
                    const HopConfig& config);

}  // namespace oukit
