#include "dqe/dataset.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <sstream>

#include "dqe/container.hpp"
#include "dqe/errors.hpp"
#include "dqe/rng.hpp"

namespace dqe {

FeaturizerConfig DatasetConfig::featurizer() const {
  FeaturizerConfig cfg;
  cfg.t2 = t2;
  cfg.order = feature_order;
  cfg.tau_max_factor = tau_max_factor;
  cfg.points_per_cycle = feature_points_per_cycle;
  return cfg;
}

EvolutionConfig DatasetConfig::evolution_for(const PulseParams& pulse) const {
  return EvolutionConfig::for_pulse(pulse, gamma(), dt_integrate, output_points_per_cycle);
}

namespace {

std::string describe(const PulseParams& p) {
  std::ostringstream os;
  os << "pulse{amplitude=" << p.amplitude << " omega=" << p.omega << " phase=" << p.phase
     << " plateau=" << p.plateau << " sigma=" << p.sigma << " chirp=" << p.chirp << "}";
  return os.str();
}

TrajectoryRecord make_record(const DatasetConfig& cfg, const ComplexMatrix& rho0,
                             std::uint64_t master_seed, int index) {
  TrajectoryRecord rec;
  rec.pulse_seed = Rng::derive_seed(master_seed, static_cast<std::uint64_t>(index));
  Rng rng(rec.pulse_seed);
  rec.pulse = sample_pulse(rng, cfg.pulse_ranges);
  try {
    rec.trajectory = evolve(rho0, cfg.lattice, rec.pulse, cfg.evolution_for(rec.pulse));
  } catch (const NumericError& e) {
    throw NumericError("record " + std::to_string(index) + ": " + e.what() + " " +
                       describe(rec.pulse));
  }

  // Operator-norm bound: the current is a sum of n_sites single-site Pauli
  // terms scaled by g.
  const double bound = cfg.lattice.n_sites * std::abs(cfg.lattice.g) + 1e-9;
  for (Eigen::Index i = 0; i < rec.trajectory.current.size(); ++i) {
    const double j = rec.trajectory.current[i];
    if (!std::isfinite(j) || std::abs(j) > bound)
      throw NumericError("record " + std::to_string(index) + ": current " + std::to_string(j) +
                         " violates the operator bound " + std::to_string(bound) + " " +
                         describe(rec.pulse));
  }

  rec.features = batch_history(rec.pulse, rec.trajectory.times, cfg.featurizer());
  return rec;
}

}  // namespace

DatasetContainer generate(const DatasetConfig& config, int num_pulses, std::uint64_t seed,
                          int workers) {
  if (num_pulses < 0) throw std::invalid_argument("generate: num_pulses must be >= 0");
  config.lattice.validate();
  config.featurizer().validate();

  DatasetContainer ds;
  ds.config = config;
  ds.seed = seed;
  ds.records.resize(num_pulses);
  if (num_pulses == 0) return ds;

  const ComplexMatrix rho0 = ground_state(config.lattice);
  std::vector<std::string> errors(num_pulses);
  std::atomic<bool> failed{false};

#ifdef _OPENMP
#pragma omp parallel for num_threads(std::max(1, workers)) schedule(dynamic) if (workers > 1)
#endif
  for (int i = 0; i < num_pulses; ++i) {
    if (failed.load(std::memory_order_relaxed)) continue;
    try {
      ds.records[i] = make_record(config, rho0, seed, i);
    } catch (const std::exception& e) {
      errors[i] = e.what();
      failed.store(true, std::memory_order_relaxed);
    }
  }
  // Report deterministically: the lowest failing record wins.
  for (int i = 0; i < num_pulses; ++i)
    if (!errors[i].empty()) throw NumericError("generate: " + errors[i]);
  return ds;
}

std::pair<std::vector<int>, std::vector<int>> split_by_pulse(const DatasetContainer& ds,
                                                             double test_fraction,
                                                             std::uint64_t seed) {
  const int n = static_cast<int>(ds.records.size());
  if (n < 2) throw std::invalid_argument("split_by_pulse: need at least 2 pulses");
  if (test_fraction <= 0.0 || test_fraction >= 1.0)
    throw std::invalid_argument("split_by_pulse: test_fraction must be in (0, 1)");

  int n_test = static_cast<int>(std::lround(test_fraction * n));
  n_test = std::clamp(n_test, 1, n - 1);

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  deterministic_shuffle(order, rng);

  std::vector<int> test(order.begin(), order.begin() + n_test);
  std::vector<int> train(order.begin() + n_test, order.end());
  std::sort(test.begin(), test.end());
  std::sort(train.begin(), train.end());
  return {train, test};
}

NormalizationStats fit_stats(const DatasetContainer& ds, const std::vector<int>& train_indices) {
  if (train_indices.empty()) throw std::invalid_argument("fit_stats: no training records");
  const Eigen::Index order = ds.config.feature_order;

  std::int64_t count = 0;
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(order);
  double target_mean = 0.0;
  for (int idx : train_indices) {
    const auto& rec = ds.records.at(idx);
    mean += rec.features.colwise().sum().transpose();
    target_mean += rec.trajectory.current.sum();
    count += rec.features.rows();
  }
  if (count == 0) throw std::invalid_argument("fit_stats: training records are empty");
  mean /= static_cast<double>(count);
  target_mean /= static_cast<double>(count);

  Eigen::VectorXd sq = Eigen::VectorXd::Zero(order);
  double target_sq = 0.0;
  for (int idx : train_indices) {
    const auto& rec = ds.records.at(idx);
    sq += (rec.features.rowwise() - mean.transpose()).array().square().colwise().sum().matrix();
    target_sq += (rec.trajectory.current.array() - target_mean).square().sum();
  }

  NormalizationStats stats;
  stats.feature_mean = mean;
  stats.feature_std = (sq / static_cast<double>(count)).array().sqrt().matrix();
  stats.target_mean = target_mean;
  stats.target_std = std::sqrt(target_sq / static_cast<double>(count));

  for (Eigen::Index k = 0; k < order; ++k)
    if (!(stats.feature_std[k] > 0.0))
      throw FormatError("fit_stats: feature column " + std::to_string(k) +
                        " has zero variance on the training split");
  if (!(stats.target_std > 0.0))
    throw FormatError("fit_stats: target has zero variance on the training split");
  return stats;
}

void collect_samples(const DatasetContainer& ds, const std::vector<int>& indices,
                     Eigen::MatrixXd* features, Eigen::VectorXd* targets) {
  Eigen::Index total = 0;
  for (int idx : indices) total += ds.records.at(idx).features.rows();
  features->resize(total, ds.config.feature_order);
  targets->resize(total);
  Eigen::Index row = 0;
  for (int idx : indices) {
    const auto& rec = ds.records.at(idx);
    features->middleRows(row, rec.features.rows()) = rec.features;
    targets->segment(row, rec.trajectory.current.size()) = rec.trajectory.current;
    row += rec.features.rows();
  }
}

namespace {

std::string rec_key(int i, const char* suffix) {
  return "rec" + std::to_string(i) + "." + suffix;
}

}  // namespace

void save_dataset(const DatasetContainer& ds, const std::string& path) {
  ContainerWriter w("DQE1", 1);
  w.set_meta("kind", "dataset");
  w.set_meta_u64("seed", ds.seed);
  w.set_meta("num_records", static_cast<std::int64_t>(ds.records.size()));
  const DatasetConfig& c = ds.config;
  w.set_meta("lattice.n_sites", static_cast<std::int64_t>(c.lattice.n_sites));
  w.set_meta("lattice.J", c.lattice.J);
  w.set_meta("lattice.g", c.lattice.g);
  w.set_meta("lattice.max_sites", static_cast<std::int64_t>(c.lattice.max_sites));
  w.set_meta("ranges.amplitude_lo", c.pulse_ranges.amplitude_lo);
  w.set_meta("ranges.amplitude_hi", c.pulse_ranges.amplitude_hi);
  w.set_meta("ranges.omega_lo", c.pulse_ranges.omega_lo);
  w.set_meta("ranges.omega_hi", c.pulse_ranges.omega_hi);
  w.set_meta("ranges.phase_lo", c.pulse_ranges.phase_lo);
  w.set_meta("ranges.phase_hi", c.pulse_ranges.phase_hi);
  w.set_meta("ranges.plateau_cycles_hi", c.pulse_ranges.plateau_cycles_hi);
  w.set_meta("ranges.sigma_cycles", c.pulse_ranges.sigma_cycles);
  w.set_meta("t2", c.t2);
  w.set_meta("dt_integrate", c.dt_integrate);
  w.set_meta("output_points_per_cycle", static_cast<std::int64_t>(c.output_points_per_cycle));
  w.set_meta("feature_order", static_cast<std::int64_t>(c.feature_order));
  w.set_meta("tau_max_factor", c.tau_max_factor);
  w.set_meta("feature_points_per_cycle",
             static_cast<std::int64_t>(c.feature_points_per_cycle));

  for (int i = 0; i < static_cast<int>(ds.records.size()); ++i) {
    const auto& rec = ds.records[i];
    w.set_meta_u64(rec_key(i, "seed"), rec.pulse_seed);
    w.set_meta(rec_key(i, "amplitude"), rec.pulse.amplitude);
    w.set_meta(rec_key(i, "omega"), rec.pulse.omega);
    w.set_meta(rec_key(i, "phase"), rec.pulse.phase);
    w.set_meta(rec_key(i, "plateau"), rec.pulse.plateau);
    w.set_meta(rec_key(i, "sigma"), rec.pulse.sigma);
    w.set_meta(rec_key(i, "chirp"), rec.pulse.chirp);
  }
  for (int i = 0; i < static_cast<int>(ds.records.size()); ++i) {
    const auto& rec = ds.records[i];
    w.add_vector(rec_key(i, "times"), rec.trajectory.times);
    w.add_vector(rec_key(i, "field"), rec.trajectory.field);
    w.add_vector(rec_key(i, "vector_potential"), rec.trajectory.vector_potential);
    w.add_vector(rec_key(i, "current"), rec.trajectory.current);
    w.add_matrix(rec_key(i, "features"), rec.features);
  }
  w.write(path);
}

DatasetContainer load_dataset(const std::string& path) {
  ContainerReader r(path, "DQE1", 1);
  DatasetContainer ds;
  ds.seed = r.meta_u64("seed");
  const int n = static_cast<int>(r.meta_int("num_records"));
  if (n < 0) throw FormatError("'" + path + "': negative record count");

  DatasetConfig& c = ds.config;
  c.lattice.n_sites = static_cast<int>(r.meta_int("lattice.n_sites"));
  c.lattice.J = r.meta_double("lattice.J");
  c.lattice.g = r.meta_double("lattice.g");
  c.lattice.max_sites = static_cast<int>(r.meta_int("lattice.max_sites"));
  c.pulse_ranges.amplitude_lo = r.meta_double("ranges.amplitude_lo");
  c.pulse_ranges.amplitude_hi = r.meta_double("ranges.amplitude_hi");
  c.pulse_ranges.omega_lo = r.meta_double("ranges.omega_lo");
  c.pulse_ranges.omega_hi = r.meta_double("ranges.omega_hi");
  c.pulse_ranges.phase_lo = r.meta_double("ranges.phase_lo");
  c.pulse_ranges.phase_hi = r.meta_double("ranges.phase_hi");
  c.pulse_ranges.plateau_cycles_hi = r.meta_double("ranges.plateau_cycles_hi");
  c.pulse_ranges.sigma_cycles = r.meta_double("ranges.sigma_cycles");
  c.t2 = r.meta_double("t2");
  c.dt_integrate = r.meta_double("dt_integrate");
  c.output_points_per_cycle = static_cast<int>(r.meta_int("output_points_per_cycle"));
  c.feature_order = static_cast<int>(r.meta_int("feature_order"));
  c.tau_max_factor = r.meta_double("tau_max_factor");
  c.feature_points_per_cycle = static_cast<int>(r.meta_int("feature_points_per_cycle"));

  ds.records.resize(n);
  for (int i = 0; i < n; ++i) {
    auto& rec = ds.records[i];
    rec.pulse_seed = r.meta_u64(rec_key(i, "seed"));
    rec.pulse.amplitude = r.meta_double(rec_key(i, "amplitude"));
    rec.pulse.omega = r.meta_double(rec_key(i, "omega"));
    rec.pulse.phase = r.meta_double(rec_key(i, "phase"));
    rec.pulse.plateau = r.meta_double(rec_key(i, "plateau"));
    rec.pulse.sigma = r.meta_double(rec_key(i, "sigma"));
    rec.pulse.chirp = r.meta_double(rec_key(i, "chirp"));
    rec.trajectory.times = r.vector(rec_key(i, "times"));
    rec.trajectory.field = r.vector(rec_key(i, "field"));
    rec.trajectory.vector_potential = r.vector(rec_key(i, "vector_potential"));
    rec.trajectory.current = r.vector(rec_key(i, "current"));
    rec.features = r.matrix(rec_key(i, "features"));

    const Eigen::Index t = rec.trajectory.times.size();
    if (rec.trajectory.field.size() != t || rec.trajectory.vector_potential.size() != t ||
        rec.trajectory.current.size() != t || rec.features.rows() != t ||
        rec.features.cols() != c.feature_order)
      throw FormatError("'" + path + "': record " + std::to_string(i) +
                        " has inconsistent array shapes");
  }
  return ds;
}

}  // namespace dqe
