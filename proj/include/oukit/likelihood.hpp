#pragma once

#include <Eigen/Core>

#include "oukit/ou.hpp"

namespace oukit {

/// Holds the lagged views of one trajectory plus a residual buffer so repeated
/// likelihood/gradient evaluations during optimization allocate nothing.
class LikelihoodWorkspace {
 public:
  explicit LikelihoodWorkspace(const Trajectory& trajectory);

  /// Sum over transitions of the Gaussian transition log-density.
  double log_likelihood(const OUParams& params) const;

  /// Analytic (d/d theta, d/d sigma_sq) of log_likelihood.
  Eigen::Vector2d gradient(const OUParams& params) const;

  double dt() const noexcept { return dt_; }
  Eigen::Index n_transitions() const noexcept { return head_.size(); }

 private:
  Eigen::VectorXd head_;  // X_{t_0} .. X_{t_{n-1}}
  Eigen::VectorXd tail_;  // X_{t_1} .. X_{t_n}
  mutable Eigen::VectorXd residual_;
  double dt_ = 0.0;
};

double log_likelihood(const OUParams& params, const Trajectory& trajectory);

Eigen::Vector2d log_likelihood_gradient(const OUParams& params, const Trajectory& trajectory);

}  // namespace oukit
