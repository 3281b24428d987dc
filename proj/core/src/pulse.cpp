#include "dqe/pulse.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dqe/rng.hpp"

namespace dqe {

double field_at(const PulseParams& p, double t) {
  if (t < p.start_time() || t > p.end_time()) return 0.0;
  const double peak = p.amplitude * p.omega;
  if (p.chirp != 0.0) {
    const double env = std::exp(-t * t / (2.0 * p.sigma * p.sigma));
    return peak * env * std::cos(p.omega * t + p.chirp * t * t + p.phase);
  }
  // Distance from t to the plateau [0, plateau]; zero on the plateau itself,
  // so the envelope is exactly 1 there.
  const double off = std::max({-t, 0.0, t - p.plateau});
  const double env = std::exp(-off * off / (2.0 * p.sigma * p.sigma));
  return peak * env * std::cos(p.omega * t + p.phase);
}

SampledWaveform vector_potential_grid(const PulseParams& p, const Eigen::VectorXd& times) {
  const Eigen::Index n = times.size();
  if (n < 2) throw std::invalid_argument("vector_potential_grid: need at least 2 grid points");

  const double dt = times[1] - times[0];
  if (dt <= 0.0) throw std::invalid_argument("vector_potential_grid: grid must be increasing");
  for (Eigen::Index i = 1; i < n; ++i) {
    if (std::abs((times[i] - times[i - 1]) - dt) > 1e-9 * std::max(1.0, std::abs(dt)))
      throw std::invalid_argument("vector_potential_grid: grid must be uniform");
  }
  if (times[0] > p.start_time() + 1e-9)
    throw std::invalid_argument("vector_potential_grid: grid must start at or before the pulse support");

  SampledWaveform out;
  out.times = times;
  out.field.resize(n);
  out.vector_potential.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) out.field[i] = field_at(p, times[i]);

  // A(times[0]) = 0: the field is identically zero before its support.
  constexpr int kRefine = 8;  // even, so each interval is one Simpson block
  const double h = dt / kRefine;
  double acc = 0.0;
  out.vector_potential[0] = 0.0;
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    double piece = field_at(p, times[i]) + field_at(p, times[i + 1]);
    for (int q = 1; q < kRefine; ++q) {
      const double w = (q % 2 == 1) ? 4.0 : 2.0;
      piece += w * field_at(p, times[i] + q * h);
    }
    acc += piece * h / 3.0;
    out.vector_potential[i + 1] = acc;
  }
  return out;
}

PulseParams sample_pulse(Rng& rng, const PulseRanges& r) {
  if (r.amplitude_lo > r.amplitude_hi || r.omega_lo > r.omega_hi ||
      r.phase_lo > r.phase_hi || r.plateau_cycles_hi < 0.0 || r.omega_lo <= 0.0)
    throw std::invalid_argument("sample_pulse: invalid ranges");

  PulseParams p;
  p.amplitude = rng.uniform(r.amplitude_lo, r.amplitude_hi);
  p.omega = rng.uniform(r.omega_lo, r.omega_hi);
  p.phase = rng.uniform(r.phase_lo, r.phase_hi);
  p.plateau = rng.uniform(0.0, r.plateau_cycles_hi * p.carrier_period());
  p.sigma = r.sigma_cycles * p.carrier_period();
  p.chirp = 0.0;
  return p;
}

PulseParams chirped_test_pulse() {
  PulseParams p;
  p.amplitude = 16.0;
  p.omega = 0.2;
  p.phase = 0.0;
  p.plateau = 0.0;
  p.sigma = p.carrier_period();
  p.chirp = p.omega * p.omega / (10.0 * std::numbers::pi);
  return p;
}

}  // namespace dqe
