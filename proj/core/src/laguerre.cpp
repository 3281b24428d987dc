#include "dqe/laguerre.hpp"

#include <cmath>
#include <stdexcept>

#include "dqe/errors.hpp"

namespace dqe {

void FeaturizerConfig::validate() const {
  if (t2 <= 0.0) throw std::invalid_argument("FeaturizerConfig: t2 must be positive");
  if (order < 1 || order > 64) throw std::invalid_argument("FeaturizerConfig: order must be in [1, 64]");
  if (tau_max_factor <= 0.0) throw std::invalid_argument("FeaturizerConfig: tau_max_factor must be positive");
  if (points_per_cycle < 1) throw std::invalid_argument("FeaturizerConfig: points_per_cycle must be positive");
}

double laguerre_polynomial(int n, double x) {
  if (n < 0) throw std::invalid_argument("laguerre_polynomial: order must be non-negative");
  if (n > 64) throw ResourceError("laguerre_polynomial: orders above 64 are unsupported");
  if (n == 0) return 1.0;
  double prev = 1.0;
  double cur = 1.0 - x;
  for (int k = 1; k < n; ++k) {
    const double next = ((2.0 * k + 1.0 - x) * cur - k * prev) / (k + 1.0);
    prev = cur;
    cur = next;
  }
  return cur;
}

FeaturizerPlan::FeaturizerPlan(const FeaturizerConfig& cfg, double carrier_period) {
  cfg.validate();
  if (carrier_period <= 0.0)
    throw std::invalid_argument("FeaturizerPlan: carrier period must be positive");

  const double h_max = std::min(cfg.t2 / (8.0 * cfg.order),
                                carrier_period / cfg.points_per_cycle);
  Eigen::Index intervals = static_cast<Eigen::Index>(std::ceil(cfg.tau_max() / h_max));
  if (intervals % 2 != 0) ++intervals;  // composite Simpson needs an even count
  const double h = cfg.tau_max() / static_cast<double>(intervals);

  nodes_.resize(intervals + 1);
  weighted_basis_.resize(intervals + 1, cfg.order);
  Eigen::VectorXd lag(cfg.order);
  for (Eigen::Index q = 0; q <= intervals; ++q) {
    const double tau = static_cast<double>(q) * h;
    nodes_[q] = tau;
    double w = (q == 0 || q == intervals) ? 1.0 : (q % 2 == 1 ? 4.0 : 2.0);
    w *= h / 3.0;
    const double x = 2.0 * tau / cfg.t2;
    // In-place recurrence over the orders at this node.
    lag[0] = 1.0;
    if (cfg.order > 1) lag[1] = 1.0 - x;
    for (int k = 1; k + 1 < cfg.order; ++k)
      lag[k + 1] = ((2.0 * k + 1.0 - x) * lag[k] - k * lag[k - 1]) / (k + 1.0);
    weighted_basis_.row(q) = (w * std::exp(-x)) * lag.transpose();
  }
}

Eigen::VectorXd FeaturizerPlan::history(const std::function<double(double)>& field, double t,
                                        double support_start) const {
  const Eigen::Index m = nodes_.size();
  Eigen::Index active = m;
  if (std::isfinite(support_start)) {
    const double tau_cut = t - support_start;
    if (tau_cut < 0.0) return Eigen::VectorXd::Zero(order());
    // nodes_ is ascending; keep nodes with tau <= tau_cut
    active = std::upper_bound(nodes_.begin(), nodes_.end(), tau_cut) - nodes_.begin();
  }
  Eigen::VectorXd samples(active);
  for (Eigen::Index q = 0; q < active; ++q) {
    const double f = field(t - nodes_[q]);
    if (!std::isfinite(f)) throw FormatError("history: non-finite field sample");
    samples[q] = f;
  }
  return weighted_basis_.topRows(active).transpose() * samples;
}

Eigen::VectorXd history_vector(const std::function<double(double)>& field, double t,
                               const FeaturizerConfig& cfg, double carrier_period,
                               double support_start) {
  return FeaturizerPlan(cfg, carrier_period).history(field, t, support_start);
}

Eigen::MatrixXd batch_history(const PulseParams& pulse, const Eigen::VectorXd& times,
                              const FeaturizerConfig& cfg) {
  const FeaturizerPlan plan(cfg, pulse.carrier_period());
  const auto field = [&pulse](double s) { return field_at(pulse, s); };
  Eigen::MatrixXd rows(times.size(), cfg.order);
  for (Eigen::Index i = 0; i < times.size(); ++i)
    rows.row(i) = plan.history(field, times[i], pulse.start_time()).transpose();
  return rows;
}

}  // namespace dqe
