#pragma once

#include <Eigen/Dense>
#include <functional>
#include <limits>
#include <numbers>

#include "dqe/pulse.hpp"

namespace dqe {

// Configuration of the history featurizer: expansion coefficients of the
// exponentially decayed field history over Laguerre polynomials.
struct FeaturizerConfig {
  double t2 = 100.0;             ///< coherence time; decay weight is e^{-2 tau/t2}
  int order = 10;                ///< number of coefficients, orders 0..order-1
  double tau_max_factor = 32.0;  ///< history cutoff in units of t2
  int points_per_cycle = 64;     ///< quadrature resolution against the carrier

  double tau_max() const { return tau_max_factor * t2; }
  void validate() const;
};

/// Standard Laguerre polynomial L_n(x) via the three-term recurrence
/// (n+1) L_{n+1} = (2n+1-x) L_n - n L_{n-1}. Orders above 64 are refused;
/// the recurrence is stable but the values overflow the use cases here.
double laguerre_polynomial(int n, double x);

// Precomputed composite-Simpson rule on [0, tau_max] fused with the Laguerre
// window L_n(2 tau/t2) e^{-2 tau/t2}. One plan serves every time point of a
// trajectory; a row of coefficients then costs one field evaluation per node
// plus one small mat-vec. The step honours
//   h <= min(t2 / (8 order), carrier_period / points_per_cycle).
class FeaturizerPlan {
 public:
  FeaturizerPlan(const FeaturizerConfig& cfg, double carrier_period);

  /// Coefficients of the field history at time t:
  ///   c[n] = int_0^{tau_max} L_n(2 tau/t2) e^{-2 tau/t2} F(t - tau) dtau.
  /// The field is treated as identically zero before `support_start`; nodes
  /// past that point are skipped, which leaves the sum bit-identical to the
  /// full rule because the skipped terms are exact zeros.
  Eigen::VectorXd history(const std::function<double(double)>& field, double t,
                          double support_start = -std::numeric_limits<double>::infinity()) const;

  const Eigen::VectorXd& nodes() const { return nodes_; }
  /// Simpson weight times Laguerre window, [nodes x order].
  const Eigen::MatrixXd& weighted_basis() const { return weighted_basis_; }
  int order() const { return static_cast<int>(weighted_basis_.cols()); }

 private:
  Eigen::VectorXd nodes_;
  Eigen::MatrixXd weighted_basis_;
};

/// One-off history vector; equivalent to building a plan and evaluating it.
/// `carrier_period` defaults to the dataset's reference carrier 2 pi / 0.2.
Eigen::VectorXd history_vector(
    const std::function<double(double)>& field, double t, const FeaturizerConfig& cfg,
    double carrier_period = 2.0 * std::numbers::pi / 0.2,
    double support_start = -std::numeric_limits<double>::infinity());

/// Feature matrix [times.size() x cfg.order]: row i is the history vector at
/// times[i], evaluated against the analytic pulse form. Rows are independent
/// and bit-identical to standalone history_vector calls with the pulse's
/// carrier period and support start.
Eigen::MatrixXd batch_history(const PulseParams& pulse, const Eigen::VectorXd& times,
                              const FeaturizerConfig& cfg);

}  // namespace dqe
