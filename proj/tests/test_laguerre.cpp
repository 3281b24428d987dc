#include <doctest.h>

#include <cmath>
#include <numbers>

#include "dqe/errors.hpp"
#include "dqe/laguerre.hpp"
#include "dqe/rng.hpp"

using namespace dqe;
using std::numbers::pi;

TEST_SUITE("laguerre") {

TEST_CASE("polynomial values") {
  for (double x : {-2.0, 0.0, 0.5, 3.0, 17.0}) {
    CHECK(laguerre_polynomial(0, x) == 1.0);
    CHECK(laguerre_polynomial(1, x) == doctest::Approx(1.0 - x).epsilon(1e-15));
  }
  CHECK(laguerre_polynomial(2, 1.0) == doctest::Approx(-0.5).epsilon(1e-15));
  // L2(x) = (x^2 - 4x + 2)/2 against the closed form
  for (double x : {0.3, 2.0, 5.5})
    CHECK(laguerre_polynomial(2, x) ==
          doctest::Approx((x * x - 4.0 * x + 2.0) / 2.0).epsilon(1e-14));
  CHECK_THROWS_AS(laguerre_polynomial(65, 1.0), ResourceError);
  CHECK_THROWS_AS(laguerre_polynomial(-1, 1.0), std::invalid_argument);
}

TEST_CASE("orthonormality under the module quadrature") {
  const FeaturizerConfig cfg;  // t2 = 100, order 10, factor 32, 64 pts/cycle
  const FeaturizerPlan plan(cfg, 2.0 * pi / 0.2);
  // (2/t2) * int L_m L_n e^{-2 tau/t2} dtau = delta_mn; the m-th row comes from
  // feeding the plan the field F(t - tau) = L_m(2 tau / t2) at t = 0.
  for (int m = 0; m < cfg.order; ++m) {
    const auto field = [&](double s) { return laguerre_polynomial(m, -2.0 * s / cfg.t2); };
    const Eigen::VectorXd row = (2.0 / cfg.t2) * plan.history(field, 0.0);
    for (int n = 0; n < cfg.order; ++n) {
      const double expected = (m == n) ? 1.0 : 0.0;
      CHECK(std::abs(row[n] - expected) < 1e-6);
    }
  }
}

TEST_CASE("constant field loads only the zeroth coefficient") {
  const FeaturizerConfig cfg;
  const double c = 3.7;
  const Eigen::VectorXd h = history_vector([c](double) { return c; }, 5.0, cfg);
  CHECK(std::abs(h[0] - c * cfg.t2 / 2.0) < 1e-6 * c * cfg.t2);
  for (int n = 1; n < cfg.order; ++n) CHECK(std::abs(h[n]) < 1e-6 * c * cfg.t2);
}

TEST_CASE("zero field gives zero coefficients") {
  const FeaturizerConfig cfg;
  const Eigen::VectorXd h = history_vector([](double) { return 0.0; }, 0.0, cfg);
  CHECK(h.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("Laguerre-shaped history picks out its own order") {
  const FeaturizerConfig cfg;
  const double t = 1.5;
  for (int m : {0, 3, 9}) {
    const auto field = [&](double s) { return laguerre_polynomial(m, 2.0 * (t - s) / cfg.t2); };
    const Eigen::VectorXd h = history_vector(field, t, cfg);
    for (int n = 0; n < cfg.order; ++n) {
      const double expected = (n == m) ? cfg.t2 / 2.0 : 0.0;
      CHECK(std::abs(h[n] - expected) < 1e-6 * cfg.t2 / 2.0);
    }
  }
}

TEST_CASE("linearity") {
  const FeaturizerConfig cfg;
  PulseParams p1;
  p1.amplitude = 3.0;
  PulseParams p2;
  p2.amplitude = 7.0;
  p2.omega = 0.27;
  p2.sigma = p2.carrier_period();
  const double a = 1.7, b = -0.4;
  const double t = 10.0;
  const auto f1 = [&](double s) { return field_at(p1, s); };
  const auto f2 = [&](double s) { return field_at(p2, s); };
  const auto mix = [&](double s) { return a * f1(s) + b * f2(s); };
  const Eigen::VectorXd lhs = history_vector(mix, t, cfg);
  const Eigen::VectorXd rhs = a * history_vector(f1, t, cfg) + b * history_vector(f2, t, cfg);
  CHECK((lhs - rhs).norm() <= 1e-9 * std::max(1.0, rhs.norm()));
}

TEST_CASE("coefficients decay after the field switches off") {
  FeaturizerConfig cfg;
  cfg.t2 = 40.0;
  PulseParams p;
  p.amplitude = 5.0;
  p.omega = 0.2;
  p.plateau = 0.0;
  p.sigma = p.carrier_period();
  const double t_off = p.end_time();
  const auto field = [&](double s) { return field_at(p, s); };

  double prev_norm = 0.0;
  for (int k = 0; k < 3; ++k) {
    const double t = t_off + (k + 1) * cfg.t2;
    const Eigen::VectorXd h = history_vector(field, t, cfg, p.carrier_period(), p.start_time());
    // independent oracle: requadrature of the defining integral over the
    // field support with a much finer trapezoid rule
    Eigen::VectorXd oracle = Eigen::VectorXd::Zero(cfg.order);
    const double lo = t - p.end_time(), hi = t - p.start_time();
    const int steps = 40000;
    const double dtau = (hi - lo) / steps;
    for (int i = 0; i <= steps; ++i) {
      const double tau = lo + i * dtau;
      const double w = (i == 0 || i == steps) ? 0.5 : 1.0;
      const double x = 2.0 * tau / cfg.t2;
      const double f = field(t - tau);
      for (int n = 0; n < cfg.order; ++n)
        oracle[n] += w * dtau * laguerre_polynomial(n, x) * std::exp(-x) * f;
    }
    CHECK((h - oracle).cwiseAbs().maxCoeff() < 1e-6 * p.amplitude * cfg.t2);
    const double norm = h.cwiseAbs().maxCoeff();
    if (k > 0) CHECK(norm < prev_norm);  // envelope decays once the field is gone
    prev_norm = norm;
  }
}

TEST_CASE("batch rows equal standalone calls bit for bit") {
  FeaturizerConfig cfg;
  cfg.t2 = 30.0;
  PulseParams p;
  p.amplitude = 2.0;
  p.omega = 0.25;
  p.plateau = 12.0;
  p.sigma = p.carrier_period();
  Eigen::VectorXd times(4);
  times << p.start_time() - 10.0, -3.0, 4.0, p.end_time() + 2.0;
  const Eigen::MatrixXd batch = batch_history(p, times, cfg);
  REQUIRE(batch.rows() == 4);
  REQUIRE(batch.cols() == cfg.order);
  for (Eigen::Index i = 0; i < times.size(); ++i) {
    const Eigen::VectorXd solo =
        history_vector([&](double s) { return field_at(p, s); }, times[i], cfg,
                       p.carrier_period(), p.start_time());
    CHECK((batch.row(i).transpose().array() == solo.array()).all());
  }
  // row before the pulse onset is exactly zero
  CHECK(batch.row(0).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("non-finite field samples are a data error") {
  const FeaturizerConfig cfg;
  CHECK_THROWS_AS(
      history_vector([](double) { return std::numeric_limits<double>::quiet_NaN(); }, 0.0, cfg),
      FormatError);
}

}  // TEST_SUITE
