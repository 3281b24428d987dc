#include <doctest.h>

#include <cmath>
#include <numbers>

#include "dqe/pulse.hpp"
#include "dqe/rng.hpp"

using namespace dqe;
using std::numbers::pi;

namespace {

// Recursive adaptive Simpson, independent of the library's quadrature.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double fa,
                        double fm, double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return adaptive_simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, 40);
}

}  // namespace

TEST_SUITE("pulse") {

TEST_CASE("flat-top envelope is exactly one on the plateau") {
  PulseParams p;
  p.amplitude = 2.0;
  p.omega = 0.25;
  p.phase = 0.3;
  p.plateau = 10.0;
  p.sigma = p.carrier_period();
  for (double t : {0.0, 1.7, 5.0, 9.99, 10.0}) {
    CHECK(field_at(p, t) == doctest::Approx(p.amplitude * p.omega * std::cos(p.omega * t + p.phase))
                                .epsilon(1e-15));
  }
  // strictly below peak outside the plateau (sampled at carrier crests)
  const double peak = p.amplitude * p.omega;
  for (double t : {-3.0, 13.0, -20.0, 25.0}) {
    CHECK(std::abs(field_at(p, t)) < peak);
    const double off = std::max({-t, 0.0, t - p.plateau});
    CHECK(std::abs(field_at(p, t)) <=
          peak * std::exp(-off * off / (2.0 * p.sigma * p.sigma)) + 1e-15);
  }
}

TEST_CASE("chirped pulse value at t = 0 is (A omega) cos(phi)") {
  PulseParams p = chirped_test_pulse();
  CHECK(field_at(p, 0.0) == doctest::Approx(3.2).epsilon(1e-14));
  p.phase = 1.1;
  CHECK(field_at(p, 0.0) == doctest::Approx(3.2 * std::cos(1.1)).epsilon(1e-14));
  // chirp rate exactly omega^2 / (10 pi); instantaneous frequency at t = 0 is omega
  CHECK(chirped_test_pulse().chirp == doctest::Approx(0.2 * 0.2 / (10.0 * pi)).epsilon(1e-15));
  // chirped form has no plateau and matches an independent evaluation
  for (double t : {-7.0, 3.3, 11.0}) {
    const double env = std::exp(-t * t / (2.0 * p.sigma * p.sigma));
    const double expected = 3.2 * env * std::cos(p.omega * t + p.chirp * t * t + p.phase);
    CHECK(field_at(p, t) == doctest::Approx(expected).epsilon(1e-14));
  }
}

TEST_CASE("gaussian tail bound at the support edge, zero beyond") {
  PulseParams p;
  p.plateau = 17.0;
  const double edge = p.plateau + 5.0 * p.sigma;
  CHECK(std::abs(field_at(p, edge)) <= p.amplitude * p.omega * std::exp(-12.5) + 1e-300);
  CHECK(field_at(p, edge + 1e-6) == 0.0);
  CHECK(field_at(p, p.start_time() - 1e-6) == 0.0);
}

TEST_CASE("field_at is a pure function") {
  PulseParams p;
  p.phase = 0.77;
  CHECK(field_at(p, 1.234) == field_at(p, 1.234));
}

TEST_CASE("vector potential: zero amplitude gives identically zero") {
  PulseParams p;
  p.amplitude = 0.0;
  Eigen::VectorXd times = Eigen::VectorXd::LinSpaced(101, p.start_time(), p.end_time());
  const SampledWaveform w = vector_potential_grid(p, times);
  CHECK(w.vector_potential.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("vector potential derivative reproduces the field") {
  PulseParams p;
  p.amplitude = 4.0;
  p.omega = 0.2;
  p.plateau = 20.0;
  p.sigma = p.carrier_period();
  const double dt = 0.02;
  const Eigen::Index n = static_cast<Eigen::Index>((p.end_time() - p.start_time()) / dt) + 1;
  Eigen::VectorXd times(n);
  for (Eigen::Index i = 0; i < n; ++i) times[i] = p.start_time() + i * dt;
  const SampledWaveform w = vector_potential_grid(p, times);
  const double peak = p.amplitude * p.omega;
  for (Eigen::Index i = 1; i + 1 < n; i += 7) {
    const double deriv = (w.vector_potential[i + 1] - w.vector_potential[i - 1]) / (2.0 * dt);
    CHECK(std::abs(deriv - w.field[i]) < 1e-6 * peak);
  }
}

TEST_CASE("vector potential matches an adaptive-quadrature oracle at t = 0") {
  PulseParams p;  // defaults: amplitude 16, omega 0.2, no plateau, sigma one cycle
  const double dt = p.carrier_period() / 256.0;
  const Eigen::Index n = 1281;  // covers [-5 sigma, 0]
  Eigen::VectorXd times(n);
  for (Eigen::Index i = 0; i < n; ++i) times[i] = p.start_time() + i * dt;
  CHECK(times[n - 1] == doctest::Approx(0.0).epsilon(1e-12));
  const SampledWaveform w = vector_potential_grid(p, times);
  const double oracle = integrate([&](double t) { return field_at(p, t); }, p.start_time(),
                                  times[n - 1], 1e-13);
  CHECK(std::abs(w.vector_potential[n - 1] - oracle) < 1e-8);
}

TEST_CASE("vector potential grid rejects bad grids") {
  PulseParams p;
  Eigen::VectorXd nonuniform(3);
  nonuniform << p.start_time(), p.start_time() + 1.0, p.start_time() + 2.5;
  CHECK_THROWS_AS(vector_potential_grid(p, nonuniform), std::invalid_argument);
  Eigen::VectorXd late = Eigen::VectorXd::LinSpaced(10, 0.0, 9.0);
  CHECK_THROWS_AS(vector_potential_grid(p, late), std::invalid_argument);
}

TEST_CASE("sample_pulse: determinism and ranges") {
  const PulseRanges ranges;
  Rng a(12345), b(12345);
  const PulseParams pa = sample_pulse(a, ranges);
  const PulseParams pb = sample_pulse(b, ranges);
  CHECK(pa.amplitude == pb.amplitude);
  CHECK(pa.omega == pb.omega);
  CHECK(pa.phase == pb.phase);
  CHECK(pa.plateau == pb.plateau);

  Rng rng(777);
  double amp_sum = 0.0;
  double amp_min = 1e300, amp_max = -1e300;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    const PulseParams p = sample_pulse(rng, ranges);
    amp_sum += p.amplitude;
    amp_min = std::min(amp_min, p.amplitude);
    amp_max = std::max(amp_max, p.amplitude);
    CHECK(p.amplitude >= 1.0);
    CHECK(p.amplitude <= 16.0);
    CHECK(p.omega >= 0.1);
    CHECK(p.omega <= 0.3);
    CHECK(p.phase >= 0.0);
    CHECK(p.phase < 2.0 * pi);
    CHECK(p.plateau <= 6.0 * pi / p.omega);  // mu <= 3 periods
    CHECK(p.plateau >= 0.0);
    CHECK(p.chirp == 0.0);
    CHECK(p.sigma == doctest::Approx(p.carrier_period()).epsilon(1e-15));
  }
  const double mean = amp_sum / n;
  CHECK(mean > 8.2);
  CHECK(mean < 8.8);
  CHECK(amp_min < 1.2);
  CHECK(amp_max > 15.8);
}

}  // TEST_SUITE
