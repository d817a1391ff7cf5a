#include <doctest.h>

#include <cmath>

#include "oukit/bench.hpp"
#include "oukit/rng.hpp"
#include "oukit/train.hpp"

using namespace oukit;

namespace {

std::vector<LabeledTrajectory> tiny_dataset(int count, int n_steps, std::uint64_t seed) {
  const std::vector<OUParams> combos = {{2.0, 1.0}, {0.5, 0.25}};
  SimConfig sim;
  sim.seed = seed;
  sim.k = 5.0;
  const int per = std::max(1, count / static_cast<int>(combos.size()));
  return simulate_batch(combos, GridSpec{0.01, n_steps}, sim, per);
}

}  // namespace

TEST_CASE("huber loss branches, continuity, and derivative") {
  CHECK(huber_loss(0.0, 1.0) == 0.0);
  CHECK(huber_loss(0.5, 1.0) == 0.125);
  CHECK(huber_loss(2.0, 1.0) == 1.5);
  CHECK(huber_loss(-2.0, 1.0) == 1.5);

  const double at_knee = 0.5 * 1.0;  // both branches at |r| = delta
  CHECK(huber_loss(std::nextafter(1.0, 0.0), 1.0) == doctest::Approx(at_knee).epsilon(1e-12));
  CHECK(huber_loss(std::nextafter(1.0, 2.0), 1.0) == doctest::Approx(at_knee).epsilon(1e-12));

  CHECK(huber_derivative(0.4, 1.0) == 0.4);
  CHECK(huber_derivative(3.0, 1.0) == 1.0);
  CHECK(huber_derivative(-3.0, 1.0) == -1.0);
}

TEST_CASE("composite loss composes weighted huber terms") {
  const LossConfig config;  // delta 1, weights (1, 0.5)
  // Residuals (2, 2): 1.5 + 0.5 * 1.5.
  CHECK(composite_loss({3.0, 4.0}, {1.0, 2.0}, config) == 2.25);
  CHECK(composite_loss({1.0, 2.0}, {1.0, 2.0}, config) == 0.0);

  LossConfig theta_only;
  theta_only.w_sigma_sq = 0.0;
  CHECK(composite_loss({1.5, 99.0}, {1.0, 2.0}, theta_only) ==
        composite_loss({1.5, -99.0}, {1.0, 2.0}, theta_only));

  LossConfig invalid;
  invalid.w_theta = 0.0;
  invalid.w_sigma_sq = 0.0;
  CHECK_THROWS_AS(invalid.validate(), EmptyInput);
}

TEST_CASE("adam leaves parameters alone under zero gradients") {
  Eigen::ArrayXd param = Eigen::ArrayXd::LinSpaced(5, -1.0, 1.0);
  const Eigen::ArrayXd before = param;
  Eigen::ArrayXd grad = Eigen::ArrayXd::Zero(5);
  Eigen::ArrayXd m = Eigen::ArrayXd::Zero(5), v = Eigen::ArrayXd::Zero(5);
  const TrainConfig config;
  for (long t = 1; t <= 25; ++t) adam_update(param, grad, m, v, t, config);
  CHECK((param == before).all());
}

TEST_CASE("adam step size approaches the learning rate under constant gradients") {
  Eigen::ArrayXd param = Eigen::ArrayXd::Zero(1);
  Eigen::ArrayXd grad = Eigen::ArrayXd::Constant(1, 0.37);
  Eigen::ArrayXd m = Eigen::ArrayXd::Zero(1), v = Eigen::ArrayXd::Zero(1);
  const TrainConfig config;
  double prev = param[0];
  double step_size = 0.0;
  for (long t = 1; t <= 200; ++t) {
    adam_update(param, grad, m, v, t, config);
    step_size = std::abs(param[0] - prev);
    prev = param[0];
  }
  // Bias-corrected m/sqrt(v) -> 1 for a constant gradient.
  CHECK(step_size == doctest::Approx(config.learning_rate).epsilon(1e-3));
}

TEST_CASE("training is bit-deterministic under a fixed seed") {
  const auto data = tiny_dataset(24, 30, 555);
  TrainConfig config;
  config.epochs = 3;
  config.batch_size = 8;
  config.hidden_size = 4;
  config.seed = 99;
  const TrainResult a = train(data, config, {});
  const TrainResult b = train(data, config, {});
  CHECK(a.model.w_out == b.model.w_out);
  CHECK(a.model.layers[0].w_hh == b.model.layers[0].w_hh);
  CHECK(a.model.layers[1].w_ih == b.model.layers[1].w_ih);
  REQUIRE(a.curve.size() == b.curve.size());
  for (std::size_t i = 0; i < a.curve.size(); ++i) {
    CHECK(a.curve[i].train_loss == b.curve[i].train_loss);
    CHECK(a.curve[i].val_loss == b.curve[i].val_loss);
  }
}

TEST_CASE("zero learning rate freezes the loss curve") {
  const auto data = tiny_dataset(20, 25, 77);
  TrainConfig config;
  config.epochs = 4;
  config.batch_size = 8;
  config.hidden_size = 4;
  config.learning_rate = 0.0;
  const TrainResult result = train(data, config, {});
  REQUIRE(result.curve.size() == 4);
  for (const auto& epoch : result.curve) {
    // Train loss is summed in shuffle order, so epochs agree to rounding only.
    CHECK(epoch.train_loss ==
          doctest::Approx(result.curve.front().train_loss).epsilon(1e-12));
    CHECK(epoch.val_loss == result.curve.front().val_loss);
  }
}

TEST_CASE("the 80/20 split reproduces the full-scale counts") {
  // 20000 short trajectories: split arithmetic at the production scale
  // without the training cost (epochs = 0 performs split + normalizer only).
  const std::vector<OUParams> combos = {{2.0, 1.0}, {0.2, 1.0}, {0.5, 4.0}, {0.5, 0.25}};
  SimConfig sim;
  sim.seed = 1234;
  const auto data = simulate_batch(combos, GridSpec{0.01, 4}, sim, 5000);
  REQUIRE(data.size() == 20000);

  TrainConfig config;
  config.epochs = 0;
  config.hidden_size = 2;
  const TrainResult result = train(data, config, {});
  CHECK(result.n_train == 16000);
  CHECK(result.n_val == 4000);
  CHECK(result.curve.empty());
}

TEST_CASE("training reduces the loss on a small corpus") {
  const auto data = tiny_dataset(200, 60, 4242);
  TrainConfig config;
  config.epochs = 12;
  config.batch_size = 32;
  config.hidden_size = 8;
  config.learning_rate = 0.005;
  config.seed = 3;
  const TrainResult result = train(data, config, {});
  REQUIRE(result.curve.size() == 12);
  CHECK(result.curve.back().train_loss < 0.7 * result.curve.front().train_loss);
  CHECK(std::isfinite(result.curve.back().val_loss));
}

TEST_CASE("normalizer comes from the training split statistics") {
  const auto data = tiny_dataset(40, 20, 9);
  TrainConfig config;
  config.epochs = 0;
  config.hidden_size = 2;
  const TrainResult result = train(data, config, {});
  CHECK(std::isfinite(result.model.normalizer.shift));
  CHECK(result.model.normalizer.scale > 0.0);
}

TEST_CASE("infer is pure and batch-size independent") {
  const auto data = tiny_dataset(12, 40, 31);
  TrainConfig config;
  config.epochs = 2;
  config.batch_size = 4;
  config.hidden_size = 4;
  const TrainResult trained = train(data, config, {});

  std::vector<Trajectory> paths;
  for (const auto& item : data) paths.push_back(item.trajectory);

  const auto batched = infer(trained.model, paths);
  const auto again = infer(trained.model, paths);
  REQUIRE(batched.size() == paths.size());
  for (std::size_t i = 0; i < paths.size(); ++i) {
    CHECK(batched[i] == again[i]);
    const auto single = infer(trained.model, {paths[i]});
    CHECK(std::abs(single[0][0] - batched[i][0]) < 1e-12);
    CHECK(std::abs(single[0][1] - batched[i][1]) < 1e-12);
  }
}

TEST_CASE("empty and ragged datasets are rejected") {
  CHECK_THROWS_AS(train({}, {}, {}), EmptyDataset);

  auto data = tiny_dataset(6, 20, 1);
  auto ragged = tiny_dataset(6, 21, 1);
  data.push_back(ragged.front());
  CHECK_THROWS_AS(train(data, {}, {}), DimensionMismatch);

  std::vector<Trajectory> mixed = {data.front().trajectory, ragged.front().trajectory};
  const LstmModel model = LstmModel::init(4, 2, 1);
  CHECK_THROWS_AS(infer(model, mixed), DimensionMismatch);
}
