#pragma once

#include <Eigen/Dense>
#include <numbers>

namespace dqe {

class Rng;

// One driving waveform: a carrier at angular frequency omega under a flat-top
// envelope with Gaussian ramps of width sigma on both sides of the plateau
// [0, plateau]. When chirp != 0 the pulse is instead a chirped Gaussian with
// no plateau. The waveform is defined as exactly zero outside
// [start_time(), end_time()]; at the 5-sigma cut the envelope is already
// below e^-12.5, and the hard support makes the vector potential and the
// history integrals independent of an arbitrary far-past cutoff.
struct PulseParams {
  double amplitude = 16.0;  ///< peak vector potential; peak field = amplitude*omega
  double omega = 0.2;       ///< carrier angular frequency
  double phase = 0.0;       ///< carrier phase, radians
  double plateau = 0.0;     ///< flat-top duration, >= 0 (ignored when chirped)
  double sigma = 10.0 * std::numbers::pi;  ///< Gaussian ramp width (default one cycle of omega=0.2)
  double chirp = 0.0;       ///< quadratic-phase rate; 0 for unchirped pulses

  double carrier_period() const { return 2.0 * std::numbers::pi / omega; }
  double start_time() const { return -5.0 * sigma; }
  double end_time() const { return (chirp == 0.0 ? plateau : 0.0) + 5.0 * sigma; }
};

/// Field value F(t). Pure function of (p, t).
double field_at(const PulseParams& p, double t);

struct SampledWaveform {
  Eigen::VectorXd times;
  Eigen::VectorXd field;
  Eigen::VectorXd vector_potential;
};

/// Cumulative integral A(t) of the field on a uniform grid, by composite
/// Simpson on an 8x refinement of each grid interval. The grid must be
/// uniform and must start at or before the pulse support, where A = 0.
SampledWaveform vector_potential_grid(const PulseParams& p, const Eigen::VectorXd& times);

// Sampling ranges for dataset pulses. The plateau is drawn after omega as
// U[0, plateau_cycles_hi * 2 pi / omega].
struct PulseRanges {
  double amplitude_lo = 1.0;
  double amplitude_hi = 16.0;
  double omega_lo = 0.1;
  double omega_hi = 0.3;
  double phase_lo = 0.0;
  double phase_hi = 2.0 * std::numbers::pi;
  double plateau_cycles_hi = 3.0;
  double sigma_cycles = 1.0;  ///< ramp width in carrier cycles
};

/// Draw one unchirped pulse; deterministic function of the Rng state.
/// Draw order: amplitude, omega, phase, plateau.
PulseParams sample_pulse(Rng& rng, const PulseRanges& ranges);

/// The out-of-distribution chirped probe pulse: amplitude 16, omega 0.2,
/// chirp omega^2/(10 pi), one-cycle sigma, zero phase.
PulseParams chirped_test_pulse();

}  // namespace dqe
