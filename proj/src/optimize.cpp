#include "oukit/optimize.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "oukit/rng.hpp"

namespace oukit {

namespace {

struct Probe {
  double alpha = 0.0;
  double f = 0.0;
  double dphi = 0.0;  // directional derivative g'p
  Eigen::VectorXd x;
  Eigen::VectorXd grad;
};

// Minimizer of the cubic interpolant through (a, fa, da) and (b, fb, db);
// NaN when the interpolant has no interior minimizer.
double cubic_minimizer(double a, double fa, double da, double b, double fb, double db) {
  const double d1 = da + db - 3.0 * (fa - fb) / (a - b);
  const double disc = d1 * d1 - da * db;
  if (!(disc >= 0.0)) return std::numeric_limits<double>::quiet_NaN();
  const double d2 = std::copysign(std::sqrt(disc), b - a);
  const double denom = db - da + 2.0 * d2;
  if (denom == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return b - (b - a) * (db + d2 - d1) / denom;
}

class PhiEvaluator {
 public:
  PhiEvaluator(const Objective& objective, const Eigen::VectorXd& x0, const Eigen::VectorXd& p)
      : objective_(objective), x0_(x0), p_(p) {}

  Probe operator()(double alpha) {
    Probe probe;
    probe.alpha = alpha;
    probe.x = x0_ + alpha * p_;
    probe.f = objective_(probe.x, probe.grad);
    probe.dphi = probe.grad.dot(p_);
    if (!std::isfinite(probe.f)) probe.f = std::numeric_limits<double>::infinity();
    ++evaluations;
    return probe;
  }

  int evaluations = 0;

 private:
  const Objective& objective_;
  const Eigen::VectorXd& x0_;
  const Eigen::VectorXd& p_;
};

LineSearchResult to_result(Probe&& probe, int evaluations) {
  LineSearchResult out;
  out.alpha = probe.alpha;
  out.f = probe.f;
  out.x = std::move(probe.x);
  out.grad = std::move(probe.grad);
  out.evaluations = evaluations;
  return out;
}

}  // namespace

LineSearchResult line_search(const Objective& objective, const Eigen::VectorXd& x, double f0,
                             const Eigen::VectorXd& g0, const Eigen::VectorXd& p, double c1,
                             double c2, int max_iters) {
  const double dphi0 = g0.dot(p);
  if (!(dphi0 < 0.0)) {
    throw NotDescent("directional derivative " + std::to_string(dphi0) + " is not negative");
  }

  PhiEvaluator phi(objective, x, p);
  const auto armijo = [&](const Probe& probe) {
    return probe.f <= f0 + c1 * probe.alpha * dphi0;
  };
  const auto curvature = [&](const Probe& probe) {
    return std::abs(probe.dphi) <= -c2 * dphi0;
  };

  // Zoom phase: lo always satisfies Armijo with the lowest value seen; the
  // bracket [lo, hi] contains a strong-Wolfe point.
  const auto zoom = [&](Probe lo, Probe hi) -> LineSearchResult {
    for (int j = 0; j < max_iters; ++j) {
      const double width = hi.alpha - lo.alpha;
      if (std::abs(width) < 1e-16 * std::max(1.0, std::abs(lo.alpha))) break;
      double alpha_j =
          cubic_minimizer(lo.alpha, lo.f, lo.dphi, hi.alpha, hi.f, hi.dphi);
      const double inner_lo = std::min(lo.alpha, hi.alpha) + 1e-6 * std::abs(width);
      const double inner_hi = std::max(lo.alpha, hi.alpha) - 1e-6 * std::abs(width);
      if (!(alpha_j >= inner_lo && alpha_j <= inner_hi)) {
        alpha_j = lo.alpha + 0.5 * width;  // bisect
      }
      Probe cand = phi(alpha_j);
      if (!armijo(cand) || cand.f >= lo.f) {
        hi = std::move(cand);
      } else {
        if (curvature(cand)) return to_result(std::move(cand), phi.evaluations);
        if (cand.dphi * (hi.alpha - lo.alpha) >= 0.0) hi = lo;
        lo = std::move(cand);
      }
    }
    throw LineSearchFailed("zoom exhausted without a strong-Wolfe point");
  };

  Probe prev;
  prev.alpha = 0.0;
  prev.f = f0;
  prev.dphi = dphi0;
  prev.x = x;
  prev.grad = g0;

  double alpha = 1.0;
  for (int i = 0; i < max_iters; ++i) {
    Probe cur = phi(alpha);
    if (!armijo(cur) || (i > 0 && cur.f >= prev.f)) {
      return zoom(std::move(prev), std::move(cur));
    }
    if (curvature(cur)) {
      // Wolfe already holds; try one interpolated refinement. On a quadratic
      // this is the exact line minimizer, which BFGS's quadratic-termination
      // property relies on.
      const double refined =
          cubic_minimizer(prev.alpha, prev.f, prev.dphi, cur.alpha, cur.f, cur.dphi);
      // For a Wolfe-satisfying step on a quadratic the exact minimizer lies in
      // [0.526 a, 10 a]; anything outside is extrapolation, not refinement.
      if (std::isfinite(refined) && refined > 0.1 * cur.alpha && refined < 10.0 * cur.alpha &&
          std::abs(refined - cur.alpha) > 1e-10 * std::max(1.0, cur.alpha)) {
        Probe ref = phi(refined);
        if (ref.f < cur.f && armijo(ref) && curvature(ref)) {
          return to_result(std::move(ref), phi.evaluations);
        }
      }
      return to_result(std::move(cur), phi.evaluations);
    }
    if (cur.dphi >= 0.0) {
      return zoom(std::move(cur), std::move(prev));
    }
    prev = std::move(cur);
    alpha *= 2.0;
  }
  throw LineSearchFailed("bracketing exhausted after " + std::to_string(max_iters) +
                         " expansions");
}

BfgsResult bfgs_minimize(const Objective& objective, const Eigen::VectorXd& x0,
                         const Eigen::MatrixXd& h0, const BfgsOptions& options) {
  const Eigen::Index dim = objective.dimension();
  if (x0.size() != dim || h0.rows() != dim || h0.cols() != dim) {
    throw DimensionMismatch("bfgs_minimize: x0/H0 sizes do not match the objective");
  }

  BfgsResult result;
  result.x = x0;
  result.f = objective(result.x, result.grad);
  Eigen::MatrixXd inv_hessian = h0;
  Eigen::VectorXd direction(dim);

  for (;;) {
    const double grad_norm = result.grad.norm();
    if (grad_norm < options.grad_tolerance) {
      result.converged = true;
      break;
    }
    if (result.iterations >= options.max_iters) break;

    direction.noalias() = -(inv_hessian * result.grad);
    double descent = result.grad.dot(direction);
    if (!(descent < 0.0) || !direction.allFinite()) {
      inv_hessian.setIdentity();
      direction = -result.grad;
      descent = result.grad.dot(direction);
      if (!(descent < 0.0)) break;
    }

    LineSearchResult ls;
    try {
      ls = line_search(objective, result.x, result.f, result.grad, direction);
    } catch (const LineSearchFailed&) {
      break;
    }

    const Eigen::VectorXd s = ls.x - result.x;
    const Eigen::VectorXd y = ls.grad - result.grad;
    const double sy = y.dot(s);
    const bool update = sy > 1e-10 * y.norm() * s.norm();
    if (update) {
      const double rho = 1.0 / sy;
      const Eigen::VectorXd hy = inv_hessian * y;
      const double y_hy = y.dot(hy);
      inv_hessian.noalias() -= rho * (s * hy.transpose() + hy * s.transpose());
      inv_hessian.noalias() += (rho * rho * y_hy + rho) * (s * s.transpose());
      inv_hessian = 0.5 * (inv_hessian + inv_hessian.transpose()).eval();
    }

    result.x = std::move(ls.x);
    result.f = ls.f;
    result.grad = std::move(ls.grad);
    ++result.iterations;

    if (options.on_iterate) {
      options.on_iterate(BfgsIterate{result.iterations, result.f, result.grad.norm(), ls.alpha,
                                     sy, update, inv_hessian});
    }
  }
  return result;
}

BfgsResult bfgs_minimize(const Objective& objective, const Eigen::VectorXd& x0,
                         const BfgsOptions& options) {
  return bfgs_minimize(objective, x0,
                       Eigen::MatrixXd::Identity(objective.dimension(), objective.dimension()),
                       options);
}

void HopConfig::validate() const {
  if (n_hops < 0) throw EmptyInput("n_hops must be >= 0");
  if (!(step_scale > 0.0)) throw EmptyInput("step_scale must be > 0");
  if (!(temperature > 0.0)) throw EmptyInput("temperature must be > 0");
}

HopResult basin_hop(const Objective& objective, const Eigen::VectorXd& x0,
                    const HopConfig& config) {
  config.validate();

  const BfgsResult first = bfgs_minimize(objective, x0, config.bfgs);
  HopResult result;
  result.x = first.x;
  result.f = first.f;
  result.grad = first.grad;
  result.total_bfgs_iterations = first.iterations;
  result.best_trace.push_back(first.f);

  Eigen::VectorXd accepted_x = first.x;
  double accepted_f = first.f;

  SplitMix64 rng(config.seed);
  Eigen::VectorXd trial(x0.size());
  for (int hop = 0; hop < config.n_hops; ++hop) {
    for (Eigen::Index d = 0; d < trial.size(); ++d) {
      trial[d] = accepted_x[d] + config.step_scale * rng.next_uniform(-1.0, 1.0);
    }

    BfgsResult descended;
    bool ok = true;
    try {
      descended = bfgs_minimize(objective, trial, config.bfgs);
    } catch (const std::exception&) {
      ok = false;
    }
    if (!ok || !std::isfinite(descended.f)) {
      ++result.hops_skipped;
      result.best_trace.push_back(result.f);
      continue;
    }
    result.total_bfgs_iterations += descended.iterations;

    const double delta = descended.f - accepted_f;
    if (delta <= 0.0 || rng.next_uniform() < std::exp(-delta / config.temperature)) {
      accepted_x = descended.x;
      accepted_f = descended.f;
      ++result.hops_accepted;
    }
    if (descended.f < result.f) {
      result.x = descended.x;
      result.f = descended.f;
      result.grad = descended.grad;
    }
    result.best_trace.push_back(result.f);
  }
  return result;
}

}  // namespace oukit
