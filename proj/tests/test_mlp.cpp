#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "aosr/dataset.hpp"
#include "aosr/error.hpp"
#include "aosr/mlp.hpp"
#include "helpers.hpp"

using namespace aosr;

namespace {

Eigen::MatrixXd random_inputs(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = 2.0 * rng.normal();
  return m;
}

double total_loss(const MlpModel& model, const Eigen::MatrixXd& x, const std::vector<int>& y,
                  const Eigen::VectorXd& w) {
  const Eigen::MatrixXd p = forward(model, x);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) sum += weighted_cross_entropy(p.row(i).transpose(), y[i], w(i));
  return sum;
}

TrainingSet separable_blobs(std::uint64_t seed) {
  Rng rng(seed);
  const Eigen::MatrixXd a = gen_gaussian_blob(100, Eigen::Vector2d(-3, 0), 0.7, rng).values();
  const Eigen::MatrixXd b = gen_gaussian_blob(100, Eigen::Vector2d(3, 0), 0.7, rng).values();
  TrainingSet data;
  data.features.resize(200, 2);
  data.features << a, b;
  data.targets.assign(200, 0);
  for (int i = 100; i < 200; ++i) data.targets[i] = 1;
  data.weights = Eigen::VectorXd::Constant(200, 1.0 / 200);
  return data;
}

}  // namespace

TEST_SUITE("mlp") {
  TEST_CASE("init") {
    Rng a(7), b(7);
    const MlpModel m1 = mlp_init({2, 64, 64, 3}, a), m2 = mlp_init({2, 64, 64, 3}, b);
    CHECK(m1.layers == m2.layers);
    for (const auto& layer : m1.layers) CHECK(layer.bias.isZero(0.0));
    const Eigen::MatrixXd& w = m1.layers[1].weights;
    const double mean = w.mean();
    const double var = (w.array() - mean).square().sum() / static_cast<double>(w.size() - 1);
    CHECK(var >= 1.0 / 64);
    CHECK(var <= 5.0 / 64);
    CHECK_THROWS_AS(mlp_init({2, 0, 3}, a), Error);
    CHECK_THROWS_AS(mlp_init({2}, a), Error);
  }

  TEST_CASE("forward normalization and symmetry") {
    Rng rng(1);
    MlpModel model = mlp_init({4, 16, 5}, rng);
    const Eigen::MatrixXd x = random_inputs(1000, 4, rng);
    const Eigen::MatrixXd p = forward(model, x);
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
      CHECK(std::abs(p.row(i).sum() - 1.0) <= 1e-9);
      CHECK(p.row(i).minCoeff() > 0.0);
      CHECK(p.row(i).maxCoeff() < 1.0);
    }

    MlpModel shifted = model;
    shifted.layers.back().bias.array() += 3.7;
    CHECK((forward(shifted, x) - p).cwiseAbs().maxCoeff() <= 1e-9);

    MlpModel zero = model;
    for (auto& layer : zero.layers) {
      layer.weights.setZero();
      layer.bias.setZero();
    }
    CHECK((forward(zero, x).array() - 0.2).abs().maxCoeff() <= 1e-15);
    CHECK(predict(zero, Eigen::VectorXd(x.row(0).transpose())) == 0);
    CHECK_THROWS_AS(forward(model, Eigen::MatrixXd(Eigen::MatrixXd::Zero(2, 3))), Error);
  }

  TEST_CASE("encoding") {
    Rng rng(2);
    MlpModel model = mlp_init({2, 64, 3}, rng);
    CHECK(encode(model, Eigen::VectorXd(Eigen::Vector2d(0.3, 0.1))).size() == 64);
    CHECK(encode(model, Eigen::VectorXd(Eigen::Vector2d::Zero())).isZero(0.0));
    const Eigen::MatrixXd x = random_inputs(20, 2, rng);
    const Eigen::MatrixXd before = encode(model, x);
    model.layers.back().weights.setRandom();
    model.layers.back().bias.setRandom();
    CHECK(encode(model, x) == before);
    CHECK_THROWS_AS(encode(mlp_init({2, 3}, rng), x), Error);
  }

  TEST_CASE("weighted cross entropy") {
    CHECK(weighted_cross_entropy(Eigen::Vector2d(1.0, 0.0), 0, 1.0) == 0.0);
    CHECK(weighted_cross_entropy(Eigen::Vector2d(std::exp(-1.0), 1 - std::exp(-1.0)), 0, 1.0) ==
          doctest::Approx(1.0).epsilon(1e-14));
    CHECK(weighted_cross_entropy(Eigen::Vector2d(0.0, 1.0), 0, 0.0) == 0.0);
    CHECK(weighted_cross_entropy(Eigen::Vector2d(0.0, 1.0), 0, 1.0) == doctest::Approx(-std::log(1e-12)));
    CHECK_THROWS_AS(weighted_cross_entropy(Eigen::Vector2d(0.5, 0.5), 2, 1.0), Error);
  }

  TEST_CASE("tie break") {
    CHECK(argmax_lowest(Eigen::RowVector3d(0.2, 0.4, 0.4)) == 1);
    CHECK(argmax_lowest(Eigen::RowVector3d::Constant(1.0 / 3)) == 0);
  }

  TEST_CASE("analytic gradient matches finite differences") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      Rng rng(seed);
      const MlpModel model = mlp_init({3, 5, 4}, rng);
      const Eigen::MatrixXd x = random_inputs(6, 3, rng);
      std::vector<int> y(6);
      Eigen::VectorXd w(6);
      for (int i = 0; i < 6; ++i) {
        y[i] = static_cast<int>(rng.below(4));
        w(i) = rng.uniform(0.1, 2.0);
      }
      const LossGradient lg = loss_and_gradient(model, x, y, w);
      CHECK(lg.loss == doctest::Approx(total_loss(model, x, y, w)).epsilon(1e-12));

      const double h = 1e-5;
      auto check_param = [&](double analytic, auto&& mutate) {
        MlpModel up = model, down = model;
        mutate(up, h);
        mutate(down, -h);
        const double numeric = (total_loss(up, x, y, w) - total_loss(down, x, y, w)) / (2 * h);
        const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-3});
        CHECK(std::abs(analytic - numeric) / scale <= 1e-4);
      };
      for (std::size_t l = 0; l < model.layers.size(); ++l) {
        for (Eigen::Index i = 0; i < model.layers[l].weights.rows(); ++i) {
          for (Eigen::Index j = 0; j < model.layers[l].weights.cols(); ++j) {
            check_param(lg.grads[l].weights(i, j), [&](MlpModel& m, double d) { m.layers[l].weights(i, j) += d; });
          }
          check_param(lg.grads[l].bias(i), [&](MlpModel& m, double d) { m.layers[l].bias(i) += d; });
        }
      }
    }
  }

  TEST_CASE("training") {
    const TrainingSet data = separable_blobs(3);
    Rng rng(4);
    const MlpModel init = mlp_init({2, 16, 2}, rng);
    TrainConfig config;
    config.seed = 5;
    const TrainResult result = train(init, data, config);
    CHECK(result.loss_trace.size() == 200);
    CHECK(result.loss_trace.back() <= result.initial_loss);
    const auto predicted = predict(result.model, data.features);
    int correct = 0;
    for (int i = 0; i < 200; ++i) correct += predicted[i] == data.targets[i];
    CHECK(correct / 200.0 >= 0.99);

    const TrainResult again = train(init, data, config);
    CHECK(again.model.layers == result.model.layers);
    CHECK(again.loss_trace == result.loss_trace);

    TrainConfig frozen = config;
    frozen.learning_rate = 0.0;
    frozen.epochs = 3;
    frozen.optimizer = Optimizer::sgd;
    CHECK(train(init, data, frozen).model.layers == init.layers);
    frozen.learning_rate = -1.0;
    CHECK_THROWS_AS(frozen.validate(), Error);
  }

  TEST_CASE("training reports divergence") {
    TrainingSet data = separable_blobs(1);
    data.features(0, 0) = std::numeric_limits<double>::infinity();
    Rng rng(1);
    TrainConfig config;
    config.epochs = 2;
    try {
      train(mlp_init({2, 4, 2}, rng), data, config);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK((e.kind() == ErrorKind::divergence || e.kind() == ErrorKind::invalid_argument));
    }
  }

  TEST_CASE("serialization") {
    Rng rng(11);
    const MlpModel model = mlp_init({3, 8, 8, 4}, rng);
    const auto dir = testing::scratch_dir("mlp");
    save_model(model, dir / "m.json");
    const MlpModel loaded = load_model(dir / "m.json");
    CHECK(loaded.layers == model.layers);
    const Eigen::MatrixXd x = random_inputs(100, 3, rng);
    CHECK(forward(loaded, x) == forward(model, x));

    std::string text = model_to_json(model);
    const auto pos = text.find("\"version\":1");
    REQUIRE(pos != std::string::npos);
    text.replace(pos, 11, "\"version\":7");
    try {
      model_from_json(text);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::parse);
    }
    try {
      model_from_json("{\"dims\": [2, 3]");
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::parse);
    }
  }
}
