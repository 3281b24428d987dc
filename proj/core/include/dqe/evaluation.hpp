#pragma once

#include <Eigen/Dense>
#include <string>

#include "dqe/dataset.hpp"
#include "dqe/net.hpp"

namespace dqe {

struct HarmonicSpectrum {
  double omega = 0.0;          ///< fundamental frequency
  Eigen::VectorXd amplitudes;  ///< |j(h omega)| for h = 0..max_harmonic
};

/// Hann-windowed DFT of a uniformly sampled signal, evaluated by direct
/// summation at the exact frequencies h*omega (no bin interpolation) and
/// normalized by the window gain, so a unit cosine at harmonic h >= 1 reports
/// amplitude 1. The window must cover at least two fundamental periods.
HarmonicSpectrum spectrum(const Eigen::VectorXd& signal, double dt, double omega,
                          int max_harmonic = 20);

/// Root-mean-square error of pred against truth, normalized by the range of
/// truth. Rejects constant truth (the range normalization is undefined).
double nrmse(const Eigen::VectorXd& pred, const Eigen::VectorXd& truth);

struct ChirpedTestResult {
  PulseParams pulse;
  Trajectory exact;
  Eigen::VectorXd predicted;
  double nrmse_value = 0.0;
  HarmonicSpectrum exact_spectrum;
  HarmonicSpectrum predicted_spectrum;
};

/// Out-of-distribution probe: the chirped pulse is evolved exactly,
/// featurized, and emulated; time-domain NRMSE and both harmonic spectra come
/// back for reporting.
ChirpedTestResult chirped_generalization_test(const EmulatorNet& net, const DatasetConfig& config,
                                              int evolve_threads = 1);

struct BenchmarkReport {
  double exact_seconds = 0.0;       ///< exact evolution of one 10-cycle pulse
  double predict_seconds = 0.0;     ///< whole-trajectory emulator pass
  double featurize_seconds = 0.0;   ///< history-vector computation
  double speedup_predict = 0.0;     ///< exact / predict
  double speedup_with_features = 0.0;  ///< exact / (predict + featurize)
  int trials = 0;
  Eigen::Index trajectory_points = 0;
  std::string environment;
};

/// The benchmark waveform: amplitude 16, omega 0.2, one-cycle ramps and no
/// plateau, so support spans exactly 10 laser cycles.
PulseParams benchmark_pulse();

/// Median-of-trials wall times for the exact and emulated paths on the
/// 10-cycle pulse, both pinned to a single thread. Sub-resolution timings are
/// re-run with an automatically increased repetition count.
BenchmarkReport run_benchmark(const DatasetConfig& config, const EmulatorNet& net, int n_trials);

std::string format_benchmark_report(const BenchmarkReport& report);

/// CSV emitters for external plotting. Columns, in this order:
/// (t, F, j_exact, j_pred) and (h, |j|_exact, |j|_pred), one header line each.
void write_trajectory_csv(const std::string& path, const Trajectory& exact,
                          const Eigen::VectorXd& predicted);
void write_spectrum_csv(const std::string& path, const HarmonicSpectrum& exact,
                        const HarmonicSpectrum& predicted);

}  // namespace dqe
