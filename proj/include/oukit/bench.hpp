#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "oukit/mle.hpp"
#include "oukit/train.hpp"

namespace oukit {

struct Regime {
  std::string name;
  OUParams params;
  double stationary_variance = 0.0;
};

/// The four benchmark regimes: (theta, sigma_sq) of (2, 1), (0.2, 1),
/// (0.5, 4) and (0.5, 0.25).
std::array<Regime, 4> make_regimes();

/// Population-std summary of an estimate cloud against a known truth, so
/// rmse^2 = bias^2 + std^2 holds exactly. Median uses the midpoint convention
/// for even counts.
struct StatSummary {
  double mean = 0.0;
  double median = 0.0;
  double std_dev = 0.0;
  double rmse = 0.0;
};

StatSummary summarize(std::vector<double> values, double truth);

struct AggregateRow {
  StatSummary theta;
  StatSummary sigma_sq;
  Eigen::Index n = 0;
};

/// Per-parameter statistics of (theta_hat, sigma_sq_hat) estimates.
AggregateRow aggregate(const std::vector<Eigen::Vector2d>& estimates, const OUParams& truth);

struct PathEstimate {
  std::string regime;
  int path_idx = 0;
  std::string estimator;  // "mle" or "rnn"
  double theta_hat = 0.0;
  double sigma_sq_hat = 0.0;
  double wall_time_s = 0.0;
  bool converged = false;
};

struct EstimatorReport {
  AggregateRow stats;
  int n_succeeded = 0;
  int n_failed = 0;
  double wall_time_total_s = 0.0;
};

struct RegimeReport {
  Regime regime;
  int n_paths = 0;
  std::optional<EstimatorReport> mle;
  std::optional<EstimatorReport> rnn;
};

struct BenchmarkConfig {
  std::vector<Regime> regimes;
  int n_paths = 500;
  GridSpec grid{0.01, 500};
  double k = 30.0;
  std::uint64_t master_seed = 0;
  bool run_mle = true;
  MleConfig mle;
  const LstmModel* model = nullptr;  // RNN column included when non-null
  int threads = 1;

  void validate() const;
};

struct BenchmarkReport {
  std::vector<RegimeReport> regimes;
  std::vector<PathEstimate> estimates;  // per path per estimator, failures as NaN
};

/// Both estimators see the identical trajectory set per regime (same derived
/// seeds); per-path estimator failures are excluded from the statistics and
/// counted in n_failed.
BenchmarkReport run_benchmark(const BenchmarkConfig& config);

}  // namespace oukit
