#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "aosr/error.hpp"
#include "aosr/reweight.hpp"
#include "aosr/rng.hpp"

using namespace aosr;

TEST_SUITE("reweight") {
  TEST_CASE("transform examples") {
    CHECK(l0_transform(0.0, 0.05) == doctest::Approx(0.05));
    CHECK(l0_transform(0.3, 0.05) == 0.3);
    CHECK(l0_transform(-0.1, 0.05) == doctest::Approx(-0.05));

    CHECK(l_transform(0.05, 0.1, 0.05) == doctest::Approx(0.10));
    CHECK(l_transform(0.15, 0.1, 0.05) == doctest::Approx(0.175));
    CHECK(l_transform(0.30, 0.1, 0.05) == 0.30);

    CHECK(l_minus_transform(0.02, 0.1, 0.05) == doctest::Approx(0.07));
    CHECK(l_minus_transform(0.25, 0.1, 0.05) == 0.0);
    CHECK(l_minus_transform(0.15, 0.1, 0.05) == doctest::Approx(0.075));
    CHECK(l_minus_transform(-0.5, 0.1, 0.05) == 0.0);
  }

  TEST_CASE("transforms agree at branch points") {
    const double tau = 0.1, beta = 0.05;
    CHECK(l_transform(tau, tau, beta) == doctest::Approx(tau + beta).epsilon(1e-14));
    CHECK(l_transform(2 * tau, tau, beta) == doctest::Approx(2 * tau).epsilon(1e-14));
    CHECK(l_minus_transform(tau, tau, beta) == doctest::Approx(tau + beta).epsilon(1e-14));
    CHECK(l_minus_transform(2 * tau, tau, beta) == doctest::Approx(0.0));
    for (double eps : {1e-3, 1e-6, 1e-9}) {
      for (double knot : {tau, 2 * tau}) {
        CHECK(std::abs(l_transform(knot - eps, tau, beta) - l_transform(knot + eps, tau, beta)) <= 3 * eps);
        CHECK(std::abs(l_minus_transform(knot - eps, tau, beta) - l_minus_transform(knot + eps, tau, beta)) <=
              4 * eps);
      }
    }
  }

  TEST_CASE("transform properties on a grid") {
    Rng rng(4);
    for (int k = 0; k < 200; ++k) {
      const double tau = rng.uniform(0.01, 0.5), beta = rng.uniform(0.01, 0.5);
      double previous = l_minus_transform(tau, tau, beta);
      for (int i = 0; i <= 400; ++i) {
        const double x = -1.0 + 3.0 * i / 400.0;
        const double l = l_transform(x, tau, beta);
        if (x <= 2 * tau) CHECK(l >= x);
        if (x >= 2 * tau) {
          CHECK(l == x);
          CHECK(l_minus_transform(x, tau, beta) == 0.0);
        }
        if (x >= tau) {
          const double lm = l_minus_transform(x, tau, beta);
          CHECK(lm <= previous + 1e-15);
          previous = lm;
        }
      }
    }
  }

  TEST_CASE("transform tends to the tau-free form") {
    for (double x : {-0.3, -0.01, 0.02, 0.4}) {
      CHECK(l_transform(x, 1e-9, 0.05) == doctest::Approx(l0_transform(x, 0.05)).epsilon(1e-7));
    }
  }

  TEST_CASE("normalizers") {
    CHECK(gamma(0.3, 0.0) == 1.0);
    CHECK(gamma(0.05, 0.5) == doctest::Approx(0.975610).epsilon(1e-6));
    CHECK(gamma_prime(0.5) == 2.0);
    try {
      gamma_prime(0.0);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::undefined_normalizer);
    }

    const IadParams iad(0.05, 0.5);
    CHECK(iad.alpha() == doctest::Approx(0.05 * 0.5 * iad.gamma()).epsilon(1e-14));
    CHECK(iad.gamma_prime() * 0.5 == 1.0);
    CHECK(iad.alpha() + iad.gamma() == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(iad.alpha() / (iad.gamma() * 0.5) == doctest::Approx(0.05).epsilon(1e-12));
    CHECK(iad.proxy_coefficient() == doctest::Approx(0.05).epsilon(1e-12));
  }

  TEST_CASE("U(r=0) estimate") {
    CHECK(estimate_u_zero_mass(Eigen::Vector3d(0.5, 0.6, 0.9), 0.1) == 0.0);
    CHECK(estimate_u_zero_mass(Eigen::Vector3d(0.0, 0.05, 0.1), 0.1) == 1.0);
    CHECK(estimate_u_zero_mass(Eigen::Vector3d(0.05, 0.5, 0.9), 0.1) == doctest::Approx(1.0 / 3.0));
  }

  TEST_CASE("threshold selection") {
    Eigen::VectorXd w(5);
    w << 0.9, 0.7, 0.5, 0.3, 0.1;
    CHECK(select_tau(w, 0.2) == 0.1);
    CHECK(select_tau(w, 0.5) == 0.5);  // third smallest of five
    CHECK(select_tau(Eigen::VectorXd::Zero(4), 0.3) == 1e-6);
    CHECK_THROWS_AS(select_tau(w, 1.0), Error);
  }

  TEST_CASE("threshold selects ceil(t m) distinct weights") {
    Rng rng(8);
    for (int k = 0; k < 200; ++k) {
      const Eigen::Index m = 1 + static_cast<Eigen::Index>(rng.below(300));
      Eigen::VectorXd w(m);
      for (Eigen::Index i = 0; i < m; ++i) w(i) = rng.uniform();
      const double t = rng.uniform(0.01, 0.99);
      const double tau = select_tau(w, t);
      const long count = (w.array() <= tau).count();
      CHECK(count == static_cast<long>(std::ceil(t * static_cast<double>(m))));
    }
  }

  TEST_CASE("mu schedule") {
    CHECK(mu_schedule(1000, 0.05, 10) == doctest::Approx(5.0).epsilon(1e-4));
    CHECK(mu_schedule(1000, 0.05, 0) == doctest::Approx(5e5));
    CHECK(mu_schedule(1000000, 0.5, 0) == 1e6);
    CHECK_THROWS_AS(mu_schedule(1000, 0.0, 3), Error);
  }

  TEST_CASE("weight params validation") {
    WeightParams p;
    CHECK_NOTHROW(p.validate());
    p.t = 1.0;
    CHECK_THROWS_AS(p.validate(), Error);
  }
}
