#pragma once

#include <Eigen/Dense>
#include <functional>

#include "dqe/ising.hpp"
#include "dqe/pulse.hpp"

namespace dqe {

// Integration grid and dissipation strength for one trajectory. dt_output
// must be an integer multiple of dt_integrate; for_pulse() constructs a
// compliant pair from a target inner step.
struct EvolutionConfig {
  double gamma = 0.01;        ///< dissipation rate, 1/T2
  double dt_integrate = 0.005;
  double dt_output = 0.005;
  double t_start = 0.0;
  double t_end = 1.0;

  /// Grid for a pulse: dt_output resolves the carrier with
  /// output_points_per_cycle samples per period, the window spans the pulse
  /// support, and dt_integrate = dt_output / ceil(dt_output / dt_target).
  static EvolutionConfig for_pulse(const PulseParams& pulse, double gamma,
                                   double dt_target = 0.005,
                                   int output_points_per_cycle = 256);

  int substeps() const;             ///< dt_output / dt_integrate
  Eigen::Index output_count() const;  ///< intervals; recorded points = count + 1
  void validate() const;
};

// Recorded observables of one evolution on the uniform output grid.
struct Trajectory {
  Eigen::VectorXd times;
  Eigen::VectorXd current;
  Eigen::VectorXd field;
  Eigen::VectorXd vector_potential;
};

/// Lindblad right-hand side
///   drho/dt = -i[H, rho] + gamma (L rho L^+ - 1/2 {L^+ L, rho}).
/// Reference implementation; the propagator uses an algebraically equal
/// rearrangement in the field-free eigenbasis.
ComplexMatrix lindblad_rhs(const ComplexMatrix& rho, const ComplexMatrix& hamiltonian,
                           const ComplexMatrix& jump, double gamma);

/// Re tr(rho O). The imaginary part must vanish to 1e-10, otherwise an
/// upstream loss of Hermiticity is reported.
double expectation(const ComplexMatrix& rho, const ComplexMatrix& observable);

struct EvolveOptions {
  int threads = 1;              ///< intra-trajectory threads for the dense products
  double trace_tolerance = 1e-6;
  /// Called with (t, rho in the lab basis) at every output point.
  std::function<void(double, const ComplexMatrix&)> observer;
};

/// Propagate rho0 under H(A(t)) with the field-free jump operator using
/// classical fixed-step RK4, recording the current expectation
/// Re tr(rho j(A(t))) at every output time. Equal inputs give bit-identical
/// trajectories for a fixed thread count; concurrent calls are safe.
Trajectory evolve(const ComplexMatrix& rho0, const LatticeConfig& lattice,
                  const PulseParams& pulse, const EvolutionConfig& evo,
                  ComplexMatrix* rho_final = nullptr, const EvolveOptions& opts = {});

/// Kronecker product (column-stacking convention: vec(A X B) = (B^T kron A) vec X).
ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);

/// e^M by scaling-and-squaring with a Taylor core.
ComplexMatrix matrix_exponential(const ComplexMatrix& m);

/// Exact propagator of the static-field Lindblad equation as a d^2 x d^2
/// matrix acting on vec(rho): expm(t Liouvillian). Test oracle; refuses
/// dimensions above 16.
ComplexMatrix superoperator_expm(const ComplexMatrix& hamiltonian, const ComplexMatrix& jump,
                                 double gamma, double t);

}  // namespace dqe
