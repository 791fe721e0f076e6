#include <doctest.h>

#include <cmath>
#include <numeric>

#include "aosr/error.hpp"
#include "aosr/reweight.hpp"
#include "aosr/risk.hpp"
#include "aosr/rng.hpp"
#include "helpers.hpp"

using namespace aosr;

namespace {

Dataset small_s() {
  Eigen::MatrixXd x(4, 2);
  x << 0, 0, 1, 0, 0, 1, 1, 1;
  return Dataset(x, {0, 1, 1, 0}, 2);
}

/// Probabilities depend on the first coordinate so that permutations matter.
Hypothesis varying_hypothesis() {
  return [](const Eigen::MatrixXd& x) {
    Eigen::MatrixXd z(x.rows(), 3);
    z.col(0) = x.col(0);
    z.col(1) = -x.col(1);
    z.col(2) = x.col(0).array() * x.col(1).array();
    Eigen::MatrixXd p = z.array().exp();
    for (Eigen::Index i = 0; i < p.rows(); ++i) p.row(i) /= p.row(i).sum();
    return p;
  };
}

Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
  return m;
}

}  // namespace

TEST_SUITE("risk") {
  TEST_CASE("source risks") {
    const Dataset s = small_s();
    CHECK(empirical_risk_s(testing::uniform_hypothesis(3), s) == doctest::Approx(std::log(3.0)));
    CHECK(empirical_risk_s(testing::uniform_hypothesis(5), s) == doctest::Approx(std::log(5.0)));
    const Hypothesis truth = [](const Eigen::MatrixXd& x) {
      Eigen::MatrixXd p = Eigen::MatrixXd::Zero(x.rows(), 3);
      for (Eigen::Index i = 0; i < x.rows(); ++i) p(i, x(i, 0) == x(i, 1) ? 0 : 1) = 1.0;
      return p;
    };
    CHECK(empirical_risk_s(truth, s) == 0.0);

    CHECK(empirical_risk_s_unknown(testing::constant_hypothesis(Eigen::RowVector3d(0, 0, 1)), s) == 0.0);
    CHECK(empirical_risk_s_unknown(testing::uniform_hypothesis(3), s) == doctest::Approx(std::log(3.0)));
    const Dataset relabeled(s.features(), {1, 1, 1, 1}, 2);
    CHECK(empirical_risk_s_unknown(varying_hypothesis(), relabeled) ==
          empirical_risk_s_unknown(varying_hypothesis(), s));
    CHECK_THROWS_AS(empirical_risk_s_unknown(testing::uniform_hypothesis(2), s), Error);
  }

  TEST_CASE("auxiliary unknown risk") {
    const Eigen::MatrixXd t = Eigen::MatrixXd::Zero(1, 2);
    CHECK(empirical_risk_t_unknown(testing::uniform_hypothesis(3), t, Eigen::VectorXd::Zero(1), 0.1, 0.05) ==
          doctest::Approx(0.05 * std::log(3.0)).epsilon(1e-12));
    CHECK(empirical_risk_t_unknown(testing::uniform_hypothesis(3), t, Eigen::VectorXd::Zero(1), 0.1, 0.10) ==
          doctest::Approx(0.10 * std::log(3.0)).epsilon(1e-12));
    CHECK(empirical_risk_t_unknown(testing::constant_hypothesis(Eigen::RowVector3d(0, 0, 1)), t,
                                   Eigen::VectorXd::Constant(1, 0.5), 0.1, 0.05) == 0.0);
    CHECK_THROWS_AS(empirical_risk_t_unknown(testing::uniform_hypothesis(3), t, Eigen::VectorXd::Zero(2), 0.1, 0.05),
                    Error);
  }

  TEST_CASE("discrepancy clamp and composition") {
    const Dataset s = small_s();
    const Eigen::MatrixXd t = Eigen::MatrixXd::Zero(1, 2);
    const Hypothesis u = testing::uniform_hypothesis(3);
    // weight 1 gives factor 1, so the T term equals the S term exactly
    CHECK(delta(u, s, t, Eigen::VectorXd::Constant(1, 1.0), 0.1, 0.05) <= 1e-15);
    CHECK(delta(u, s, t, Eigen::VectorXd::Constant(1, 0.5), 0.1, 0.05) == 0.0);
    CHECK(auxiliary_risk(u, s, t, Eigen::VectorXd::Constant(1, 0.5), 0.1, 0.05) == empirical_risk_s(u, s));

    // T unknown term 0.7 * ln 3 against S unknown term 0.2 * ln 3
    const Hypothesis h = [](const Eigen::MatrixXd& x) {
      Eigen::MatrixXd p(x.rows(), 3);
      for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const double pu = x(i, 0) > 5 ? std::exp(-0.7) : std::exp(-0.2);
        p.row(i) << (1 - pu) / 2, (1 - pu) / 2, pu;
      }
      return p;
    };
    Eigen::MatrixXd far(1, 2);
    far << 10, 10;
    CHECK(delta(h, s, far, Eigen::VectorXd::Constant(1, 1.0), 0.1, 0.05) == doctest::Approx(0.5).epsilon(1e-12));
  }

  TEST_CASE("auxiliary risk dominates the source risk") {
    Rng rng(3);
    const Dataset s = small_s();
    for (int k = 0; k < 100; ++k) {
      const Eigen::MatrixXd t = random_matrix(6, 2, rng);
      Eigen::VectorXd w(6);
      for (int i = 0; i < 6; ++i) w(i) = rng.uniform(0.0, 0.5);
      const double aux = auxiliary_risk(varying_hypothesis(), s, t, w, 0.1, 0.05);
      CHECK(aux >= empirical_risk_s(varying_hypothesis(), s));
      CHECK(delta(varying_hypothesis(), s, t, w, 0.1, 0.05) >= 0.0);
    }
  }

  TEST_CASE("proxy unknown risk") {
    const Eigen::MatrixXd t = Eigen::MatrixXd::Zero(1, 2);
    CHECK(proxy_unknown_risk(testing::uniform_hypothesis(3), t, Eigen::VectorXd::Constant(1, 0.02), 0.1, 0.05) ==
          doctest::Approx(0.07 * std::log(3.0)).epsilon(1e-12));
    Rng rng(5);
    const Eigen::MatrixXd many = random_matrix(20, 2, rng);
    CHECK(proxy_unknown_risk(varying_hypothesis(), many, Eigen::VectorXd::Constant(20, 0.2), 0.1, 0.05) == 0.0);
    const double low = proxy_unknown_risk(testing::constant_hypothesis(Eigen::RowVector3d(0.25, 0.25, 0.5)), t,
                                          Eigen::VectorXd::Constant(1, 0.02), 0.1, 0.05);
    const double high = proxy_unknown_risk(testing::constant_hypothesis(Eigen::RowVector3d(0.05, 0.05, 0.9)), t,
                                           Eigen::VectorXd::Constant(1, 0.02), 0.1, 0.05);
    CHECK(high < low);
  }

  TEST_CASE("proxy auxiliary risk and training objective") {
    const Dataset s = small_s();
    Rng rng(6);
    const Eigen::MatrixXd t = random_matrix(12, 2, rng);
    Eigen::VectorXd w(12);
    for (int i = 0; i < 12; ++i) w(i) = rng.uniform(0.0, 0.3);
    const Hypothesis h = varying_hypothesis();

    CHECK(training_objective(h, s, t, w, 0.1, 0.05, 0.0) == empirical_risk_s(h, s));
    const IadParams iad(0.05, 0.5);
    CHECK(iad.proxy_coefficient() == doctest::Approx(0.05).epsilon(1e-12));
    WeightParams params;
    params.tau = 0.1;
    params.beta = 0.05;
    params.u_zero_mass = 0.5;
    const double proxy = proxy_auxiliary_risk(h, s, t, w, iad, params);
    const double objective = training_objective(h, s, t, w, 0.1, 0.05, iad.proxy_coefficient());
    CHECK(std::abs(proxy - objective) <= 1e-12);
    CHECK_THROWS_AS(proxy_auxiliary_risk(h, s, t, w, IadParams(0.05, 0.0), params), Error);
  }

  TEST_CASE("risks are permutation invariant") {
    Rng rng(7);
    const Eigen::MatrixXd x = random_matrix(30, 2, rng);
    std::vector<int> labels(30);
    for (int i = 0; i < 30; ++i) labels[i] = static_cast<int>(rng.below(2));
    const Dataset s(x, labels, 2);
    const Eigen::MatrixXd t = random_matrix(40, 2, rng);
    Eigen::VectorXd w(40);
    for (int i = 0; i < 40; ++i) w(i) = rng.uniform(0.0, 0.4);

    std::vector<Eigen::Index> ps(30), pt(40);
    std::iota(ps.begin(), ps.end(), 0);
    std::iota(pt.begin(), pt.end(), 0);
    for (Eigen::Index i = 29; i > 0; --i) std::swap(ps[i], ps[rng.below(i + 1)]);
    for (Eigen::Index i = 39; i > 0; --i) std::swap(pt[i], pt[rng.below(i + 1)]);
    Eigen::MatrixXd x2(30, 2), t2(40, 2);
    std::vector<int> labels2(30);
    Eigen::VectorXd w2(40);
    for (int i = 0; i < 30; ++i) {
      x2.row(i) = x.row(ps[i]);
      labels2[i] = labels[ps[i]];
    }
    for (int i = 0; i < 40; ++i) {
      t2.row(i) = t.row(pt[i]);
      w2(i) = w(pt[i]);
    }
    const Dataset s2(x2, labels2, 2);
    const Hypothesis h = varying_hypothesis();
    WeightParams params;
    params.u_zero_mass = 0.3;
    const RiskReport a = risk_report(h, s, t, w, params, 2.5), b = risk_report(h, s2, t2, w2, params, 2.5);
    CHECK(a.r_s == doctest::Approx(b.r_s).epsilon(1e-12));
    CHECK(a.r_t_unknown == doctest::Approx(b.r_t_unknown).epsilon(1e-12));
    CHECK(a.delta == doctest::Approx(b.delta).epsilon(1e-12));
    CHECK(a.proxy_unknown == doctest::Approx(b.proxy_unknown).epsilon(1e-12));
    CHECK(a.objective == doctest::Approx(b.objective).epsilon(1e-12));
  }

  TEST_CASE("report identities") {
    Rng rng(9);
    const Dataset s = small_s();
    for (int k = 0; k < 50; ++k) {
      const Eigen::MatrixXd t = random_matrix(8, 2, rng);
      Eigen::VectorXd w(8);
      for (int i = 0; i < 8; ++i) w(i) = rng.uniform(0.0, 0.5);
      WeightParams params;
      params.u_zero_mass = rng.uniform(0.05, 1.0);
      const RiskReport r = risk_report(varying_hypothesis(), s, t, w, params, rng.uniform(0.0, 10.0));
      CHECK(r.delta == std::max(r.r_t_unknown - r.r_s_unknown, 0.0));
      CHECK(r.auxiliary_risk == r.r_s + r.delta);
    }
  }

  TEST_CASE("weights outside (0, 2 tau] see the tau-free transform") {
    Rng rng(10);
    const Dataset s = small_s();
    const Eigen::MatrixXd t = random_matrix(10, 2, rng);
    Eigen::VectorXd w(10);
    for (int i = 0; i < 10; ++i) w(i) = i % 2 == 0 ? 0.0 : rng.uniform(0.3, 2.0);
    const double tau = 0.1, beta = 0.05;
    const Eigen::MatrixXd p = varying_hypothesis()(t);
    const Eigen::VectorXd losses = unknown_losses(p);
    double oracle = 0.0;
    for (int i = 0; i < 10; ++i) oracle += l0_transform(w(i), beta) * losses(i);
    oracle /= 10.0;
    CHECK(empirical_risk_t_unknown(varying_hypothesis(), t, w, tau, beta) == doctest::Approx(oracle).epsilon(1e-14));
  }
}
