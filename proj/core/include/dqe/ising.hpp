#pragma once

#include <Eigen/Dense>
#include <complex>
#include <utility>
#include <vector>

namespace dqe {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;

// Periodic transverse-field Ising chain. Site i maps to bit i of the basis
// index, so the Hilbert dimension is 2^n_sites. Construction refuses chains
// beyond max_sites (dense operators grow as 4^n).
struct LatticeConfig {
  int n_sites = 8;
  double J = -2.4;  ///< sigma_z sigma_z bond coupling
  double g = 1.0;   ///< transverse field strength
  int max_sites = 12;

  Eigen::Index dimension() const { return Eigen::Index{1} << n_sites; }

  /// Nearest-neighbour bonds without double counting: {(i, i+1 mod n)} for
  /// n >= 3, the single bond (0, 1) for n = 2, none for n = 1.
  std::vector<std::pair<int, int>> bonds() const;

  void validate() const;
};

/// Sums of single-site Pauli operators embedded in the full chain.
ComplexMatrix total_sigma_x(int n_sites);
ComplexMatrix total_sigma_y(int n_sites);
/// Diagonal of sum_i sigma_z^i in the computational basis.
Eigen::VectorXd total_sigma_z_diagonal(int n_sites);
/// Diagonal of the bond term sum_<ij> sigma_z^i sigma_z^j (no J factor).
Eigen::VectorXd bond_diagonal(const LatticeConfig& cfg);

/// Chain Hamiltonian at vector potential A:
///   H = J sum_<ij> sz_i sz_j + g [cos A * sum_i sx_i - sin A * sum_i sy_i].
/// The result is exactly Hermitian (symmetrized after assembly).
ComplexMatrix build_hamiltonian(const LatticeConfig& cfg, double vector_potential);

/// Current operator j = dH/dA = -g [sin A * sum_i sx_i + cos A * sum_i sy_i].
ComplexMatrix build_current_operator(const LatticeConfig& cfg, double vector_potential);

// Eigen-decomposition of a Hermitian operator with eigenvalues ascending and
// degenerate levels grouped for projector construction.
struct EnergyBasis {
  Eigen::VectorXd energies;  ///< ascending
  ComplexMatrix states;      ///< orthonormal eigenvectors, one per column
  /// (first index, count) of each degenerate group, grouped with tolerance
  /// 1e-9 * max|energy|.
  std::vector<std::pair<Eigen::Index, Eigen::Index>> groups;

  /// Group index of each eigenvector column.
  std::vector<Eigen::Index> group_of() const;
};

EnergyBasis eigendecompose(const ComplexMatrix& hermitian);

/// Energy-lowering jump operator in the field-free (A = 0) eigenbasis:
/// the part of sum_i sigma_z^i connecting each eigenspace to all strictly
/// lower-energy eigenspaces, expressed in the lab basis.
ComplexMatrix build_jump_operator(const LatticeConfig& cfg);

/// Pure ground state |psi0><psi0| of the field-free Hamiltonian.
ComplexMatrix ground_state(const LatticeConfig& cfg);

}  // namespace dqe
