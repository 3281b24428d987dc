#include "dqe/evaluation.hpp"

#include <chrono>
#include <cmath>
#include <complex>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "dqe/errors.hpp"

namespace dqe {

HarmonicSpectrum spectrum(const Eigen::VectorXd& signal, double dt, double omega,
                          int max_harmonic) {
  const Eigen::Index k = signal.size();
  if (k < 2 || dt <= 0.0 || omega <= 0.0 || max_harmonic < 0)
    throw std::invalid_argument("spectrum: invalid arguments");
  const double period = 2.0 * std::numbers::pi / omega;
  if (static_cast<double>(k - 1) * dt < 2.0 * period)
    throw std::invalid_argument("spectrum: window covers less than two fundamental periods");

  Eigen::VectorXd window(k);
  for (Eigen::Index i = 0; i < k; ++i)
    window[i] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                      static_cast<double>(k - 1)));
  const double gain = window.sum();

  HarmonicSpectrum spec;
  spec.omega = omega;
  spec.amplitudes.resize(max_harmonic + 1);
  for (int h = 0; h <= max_harmonic; ++h) {
    std::complex<double> acc(0.0, 0.0);
    const double w = h * omega;
    for (Eigen::Index i = 0; i < k; ++i) {
      const double phase = w * dt * static_cast<double>(i);
      acc += window[i] * signal[i] * std::complex<double>(std::cos(phase), -std::sin(phase));
    }
    const double single_sided = (h == 0) ? 1.0 : 2.0;
    spec.amplitudes[h] = single_sided * std::abs(acc) / gain;
  }
  return spec;
}

double nrmse(const Eigen::VectorXd& pred, const Eigen::VectorXd& truth) {
  if (pred.size() != truth.size() || truth.size() == 0)
    throw std::invalid_argument("nrmse: size mismatch");
  const double range = truth.maxCoeff() - truth.minCoeff();
  if (range <= 0.0)
    throw std::invalid_argument("nrmse: truth is constant; range normalization undefined");
  const double rms = std::sqrt((pred - truth).squaredNorm() / static_cast<double>(truth.size()));
  return rms / range;
}

ChirpedTestResult chirped_generalization_test(const EmulatorNet& net, const DatasetConfig& config,
                                              int evolve_threads) {
  ChirpedTestResult result;
  result.pulse = chirped_test_pulse();
  const EvolutionConfig evo = config.evolution_for(result.pulse);
  const ComplexMatrix rho0 = ground_state(config.lattice);
  EvolveOptions opts;
  opts.threads = evolve_threads;
  result.exact = evolve(rho0, config.lattice, result.pulse, evo, nullptr, opts);

  const Eigen::MatrixXd features =
      batch_history(result.pulse, result.exact.times, config.featurizer());
  result.predicted = predict(net, features);
  result.nrmse_value = nrmse(result.predicted, result.exact.current);
  result.exact_spectrum = spectrum(result.exact.current, evo.dt_output, result.pulse.omega);
  result.predicted_spectrum = spectrum(result.predicted, evo.dt_output, result.pulse.omega);
  return result;
}

PulseParams benchmark_pulse() {
  PulseParams p;
  p.amplitude = 16.0;
  p.omega = 0.2;
  p.phase = 0.0;
  p.plateau = 0.0;            // 5-sigma ramps on both sides span the 10 cycles
  p.sigma = p.carrier_period();
  p.chirp = 0.0;
  return p;
}

namespace {

using Clock = std::chrono::steady_clock;

double time_once(const std::function<void()>& fn) {
  const auto t0 = Clock::now();
  fn();
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Median of n_trials, repeating the callable enough times per trial to stay
// well above the timer resolution.
double median_seconds(const std::function<void()>& fn, int n_trials) {
  int reps = 1;
  double probe = time_once(fn);
  while (probe * reps < 1e-4 && reps < 1000000) reps *= 10;
  std::vector<double> samples;
  samples.reserve(n_trials);
  for (int t = 0; t < n_trials; ++t) {
    const auto t0 = Clock::now();
    for (int r = 0; r < reps; ++r) fn();
    samples.push_back(std::chrono::duration<double>(Clock::now() - t0).count() /
                      static_cast<double>(reps));
  }
  std::sort(samples.begin(), samples.end());
  return samples[samples.size() / 2];
}

std::string cpu_model() {
  std::ifstream in("/proc/cpuinfo");
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("model name", 0) == 0) {
      const auto colon = line.find(':');
      if (colon != std::string::npos) return line.substr(colon + 2);
    }
  }
  return "unknown CPU";
}

}  // namespace

BenchmarkReport run_benchmark(const DatasetConfig& config, const EmulatorNet& net, int n_trials) {
  if (n_trials < 3) throw std::invalid_argument("run_benchmark: need at least 3 trials");

  const PulseParams pulse = benchmark_pulse();
  const EvolutionConfig evo = config.evolution_for(pulse);
  const ComplexMatrix rho0 = ground_state(config.lattice);

  // One reference run supplies the grids for the emulated path.
  Trajectory reference = evolve(rho0, config.lattice, pulse, evo);
  const FeaturizerConfig fcfg = config.featurizer();
  Eigen::MatrixXd features = batch_history(pulse, reference.times, fcfg);

  BenchmarkReport report;
  report.trials = n_trials;
  report.trajectory_points = reference.times.size();

  report.exact_seconds = median_seconds(
      [&] { evolve(rho0, config.lattice, pulse, evo); }, n_trials);
  report.featurize_seconds = median_seconds(
      [&] { batch_history(pulse, reference.times, fcfg); }, n_trials);
  Eigen::VectorXd sink;
  report.predict_seconds = median_seconds([&] { sink = predict(net, features); }, n_trials);

  report.speedup_predict = report.exact_seconds / report.predict_seconds;
  report.speedup_with_features =
      report.exact_seconds / (report.predict_seconds + report.featurize_seconds);

  std::ostringstream env;
  env << cpu_model() << "; " << std::thread::hardware_concurrency()
      << " hardware threads; exact and emulated paths pinned to 1 thread";
  report.environment = env.str();
  return report;
}

std::string format_benchmark_report(const BenchmarkReport& r) {
  std::ostringstream os;
  os << "benchmark: 10-cycle pulse, " << r.trajectory_points << " output points, median of "
     << r.trials << " trials\n";
  os << "  exact evolution      " << r.exact_seconds << " s/trajectory\n";
  os << "  emulator prediction  " << r.predict_seconds << " s/trajectory\n";
  os << "  featurization        " << r.featurize_seconds << " s/trajectory\n";
  os << "  speedup (predict)              " << r.speedup_predict << "x\n";
  os << "  speedup (predict + features)   " << r.speedup_with_features << "x\n";
  os << "  environment: " << r.environment << "\n";
  return os.str();
}

void write_trajectory_csv(const std::string& path, const Trajectory& exact,
                          const Eigen::VectorXd& predicted) {
  if (predicted.size() != exact.times.size())
    throw std::invalid_argument("write_trajectory_csv: size mismatch");
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw FormatError("cannot open '" + path + "' for writing");
  out << "t,F,j_exact,j_pred\n";
  out.precision(12);
  for (Eigen::Index i = 0; i < exact.times.size(); ++i)
    out << exact.times[i] << ',' << exact.field[i] << ',' << exact.current[i] << ','
        << predicted[i] << '\n';
  if (!out) throw FormatError("failed writing '" + path + "'");
}

void write_spectrum_csv(const std::string& path, const HarmonicSpectrum& exact,
                        const HarmonicSpectrum& predicted) {
  if (exact.amplitudes.size() != predicted.amplitudes.size())
    throw std::invalid_argument("write_spectrum_csv: harmonic count mismatch");
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw FormatError("cannot open '" + path + "' for writing");
  out << "h,j_abs_exact,j_abs_pred\n";
  out.precision(12);
  for (Eigen::Index h = 0; h < exact.amplitudes.size(); ++h)
    out << h << ',' << exact.amplitudes[h] << ',' << predicted.amplitudes[h] << '\n';
  if (!out) throw FormatError("failed writing '" + path + "'");
}

}  // namespace dqe
