#include "oukit/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "oukit/parallel.hpp"
#include "oukit/rng.hpp"

namespace oukit {

std::array<Regime, 4> make_regimes() {
  const auto with_stat = [](std::string name, OUParams params) {
    return Regime{std::move(name), params, params.stationary_variance()};
  };
  return {with_stat("strong_mean_reversion", {2.0, 1.0}),
          with_stat("weak_mean_reversion", {0.2, 1.0}),
          with_stat("high_volatility", {0.5, 4.0}),
          with_stat("low_volatility", {0.5, 0.25})};
}

StatSummary summarize(std::vector<double> values, double truth) {
  if (values.empty()) throw EmptyInput("summarize needs at least one value");
  const double n = static_cast<double>(values.size());

  StatSummary out;
  out.mean = 0.0;
  for (double v : values) out.mean += v;
  out.mean /= n;

  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  out.median = values.size() % 2 == 1 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);

  double var = 0.0, mse = 0.0;
  for (double v : values) {
    var += (v - out.mean) * (v - out.mean);
    mse += (v - truth) * (v - truth);
  }
  out.std_dev = std::sqrt(var / n);
  out.rmse = std::sqrt(mse / n);
  return out;
}

AggregateRow aggregate(const std::vector<Eigen::Vector2d>& estimates, const OUParams& truth) {
  if (estimates.empty()) throw EmptyInput("aggregate needs at least one estimate");
  std::vector<double> theta, sigma_sq;
  theta.reserve(estimates.size());
  sigma_sq.reserve(estimates.size());
  for (const auto& est : estimates) {
    theta.push_back(est[0]);
    sigma_sq.push_back(est[1]);
  }
  AggregateRow row;
  row.theta = summarize(std::move(theta), truth.theta);
  row.sigma_sq = summarize(std::move(sigma_sq), truth.sigma_sq);
  row.n = static_cast<Eigen::Index>(estimates.size());
  return row;
}

void BenchmarkConfig::validate() const {
  if (regimes.empty()) throw EmptyInput("benchmark needs at least one regime");
  if (n_paths < 1) throw EmptyInput("n_paths must be >= 1");
  grid.validate();
  if (!(k >= 0.0)) throw EmptyInput("k must be >= 0");
  mle.validate();
  if (!run_mle && model == nullptr) throw EmptyInput("benchmark has no estimator to run");
  for (const auto& regime : regimes) regime.params.validate();
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

EstimatorReport finalize(const std::vector<PathEstimate>& rows, const OUParams& truth) {
  EstimatorReport report;
  std::vector<Eigen::Vector2d> good;
  for (const auto& row : rows) {
    report.wall_time_total_s += row.wall_time_s;
    if (std::isfinite(row.theta_hat) && std::isfinite(row.sigma_sq_hat)) {
      good.push_back(Eigen::Vector2d{row.theta_hat, row.sigma_sq_hat});
      ++report.n_succeeded;
    } else {
      ++report.n_failed;
    }
  }
  if (!good.empty()) report.stats = aggregate(good, truth);
  return report;
}

}  // namespace

BenchmarkReport run_benchmark(const BenchmarkConfig& config) {
  config.validate();
  BenchmarkReport report;

  for (const auto& regime : config.regimes) {
    SimConfig sim;
    sim.k = config.k;
    sim.seed = config.master_seed;
    sim.init_mode = InitMode::uniform_k_sigma;
    const auto dataset =
        simulate_batch({regime.params}, config.grid, sim, config.n_paths, config.threads);

    RegimeReport row;
    row.regime = regime;
    row.n_paths = config.n_paths;

    if (config.run_mle) {
      std::vector<PathEstimate> rows(dataset.size());
      parallel_for(dataset.size(), config.threads, [&](std::size_t i) {
        PathEstimate& out = rows[i];
        out.regime = regime.name;
        out.path_idx = static_cast<int>(i);
        out.estimator = "mle";
        MleConfig mle = config.mle;
        mle.hop_seed = derive_seed(config.master_seed, params_key(regime.params), i);
        try {
          const EstimationResult fit = fit_mle(dataset[i].trajectory, mle);
          out.theta_hat = fit.params_hat.theta;
          out.sigma_sq_hat = fit.params_hat.sigma_sq;
          out.converged = fit.converged;
          out.wall_time_s = fit.wall_time_s;
        } catch (const std::exception&) {
          out.theta_hat = kNaN;
          out.sigma_sq_hat = kNaN;
          out.converged = false;
          out.wall_time_s = 0.0;
        }
      });
      row.mle = finalize(rows, regime.params);
      report.estimates.insert(report.estimates.end(), rows.begin(), rows.end());
    }

    if (config.model != nullptr) {
      std::vector<Trajectory> paths;
      paths.reserve(dataset.size());
      for (const auto& item : dataset) paths.push_back(item.trajectory);

      const auto t0 = std::chrono::steady_clock::now();
      const std::vector<Eigen::Vector2d> estimates = infer(*config.model, paths);
      const double wall =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      const double per_path = wall / static_cast<double>(estimates.size());

      std::vector<PathEstimate> rows(estimates.size());
      for (std::size_t i = 0; i < estimates.size(); ++i) {
        PathEstimate& out = rows[i];
        out.regime = regime.name;
        out.path_idx = static_cast<int>(i);
        out.estimator = "rnn";
        const bool ok = std::isfinite(estimates[i][0]) && std::isfinite(estimates[i][1]);
        out.theta_hat = ok ? estimates[i][0] : kNaN;
        out.sigma_sq_hat = ok ? estimates[i][1] : kNaN;
        out.converged = ok;
        out.wall_time_s = per_path;
      }
      row.rnn = finalize(rows, regime.params);
      report.estimates.insert(report.estimates.end(), rows.begin(), rows.end());
    }

    report.regimes.push_back(std::move(row));
  }
  return report;
}

}  // namespace oukit
