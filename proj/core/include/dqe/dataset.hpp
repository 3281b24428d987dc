#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "dqe/ising.hpp"
#include "dqe/laguerre.hpp"
#include "dqe/lindblad.hpp"
#include "dqe/normalization.hpp"
#include "dqe/pulse.hpp"

namespace dqe {

// Everything needed to regenerate a dataset exactly: lattice, pulse sampling
// ranges, dissipation, integration grids, and the featurizer.
struct DatasetConfig {
  LatticeConfig lattice;
  PulseRanges pulse_ranges;
  double t2 = 100.0;             ///< coherence time; gamma = 1/t2
  double dt_integrate = 0.005;   ///< target inner RK4 step
  int output_points_per_cycle = 256;
  int feature_order = 10;
  double tau_max_factor = 32.0;
  int feature_points_per_cycle = 64;

  double gamma() const { return 1.0 / t2; }
  FeaturizerConfig featurizer() const;
  EvolutionConfig evolution_for(const PulseParams& pulse) const;
};

// One pulse: parameters, exact trajectory, and the feature matrix with one
// history vector per output time.
struct TrajectoryRecord {
  PulseParams pulse;
  std::uint64_t pulse_seed = 0;
  Trajectory trajectory;
  Eigen::MatrixXd features;  ///< [times x feature_order]
};

struct DatasetContainer {
  DatasetConfig config;
  std::uint64_t seed = 0;
  std::vector<TrajectoryRecord> records;
};

/// Generate records by sample_pulse -> evolve -> batch_history. Each record
/// derives its own seed from (seed, index), so generation is embarrassingly
/// parallel across pulses and byte-identical for any worker count. An evolve
/// invariant breach aborts the run, reporting the offending pulse.
DatasetContainer generate(const DatasetConfig& config, int num_pulses, std::uint64_t seed,
                          int workers = 1);

/// Disjoint, exhaustive train/test split by pulse (never by time point);
/// both index lists come back sorted.
std::pair<std::vector<int>, std::vector<int>> split_by_pulse(const DatasetContainer& ds,
                                                             double test_fraction,
                                                             std::uint64_t seed);

/// Feature/target means and standard deviations over all time points of the
/// given (training) records. Degenerate columns are rejected.
NormalizationStats fit_stats(const DatasetContainer& ds, const std::vector<int>& train_indices);

/// Stack the selected records into flat training arrays
/// [samples x feature_order] and [samples].
void collect_samples(const DatasetContainer& ds, const std::vector<int>& indices,
                     Eigen::MatrixXd* features, Eigen::VectorXd* targets);

void save_dataset(const DatasetContainer& ds, const std::string& path);
DatasetContainer load_dataset(const std::string& path);

}  // namespace dqe
