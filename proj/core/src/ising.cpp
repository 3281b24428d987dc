#include "dqe/ising.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

#include "dqe/errors.hpp"

namespace dqe {

void LatticeConfig::validate() const {
  if (n_sites < 1) throw std::invalid_argument("LatticeConfig: n_sites must be >= 1");
  if (n_sites > max_sites)
    throw ResourceError("LatticeConfig: n_sites exceeds the dense-operator cap of " +
                        std::to_string(max_sites));
}

std::vector<std::pair<int, int>> LatticeConfig::bonds() const {
  std::vector<std::pair<int, int>> out;
  if (n_sites == 2) {
    out.emplace_back(0, 1);
  } else if (n_sites >= 3) {
    out.reserve(n_sites);
    for (int i = 0; i < n_sites; ++i) out.emplace_back(i, (i + 1) % n_sites);
  }
  return out;
}

ComplexMatrix total_sigma_x(int n_sites) {
  const Eigen::Index d = Eigen::Index{1} << n_sites;
  ComplexMatrix m = ComplexMatrix::Zero(d, d);
  for (Eigen::Index s = 0; s < d; ++s)
    for (int i = 0; i < n_sites; ++i) m(s ^ (Eigen::Index{1} << i), s) += 1.0;
  return m;
}

ComplexMatrix total_sigma_y(int n_sites) {
  const Eigen::Index d = Eigen::Index{1} << n_sites;
  ComplexMatrix m = ComplexMatrix::Zero(d, d);
  for (Eigen::Index s = 0; s < d; ++s)
    for (int i = 0; i < n_sites; ++i) {
      // <s^b|sigma_y^i|s> = +i when bit i of s is 0, -i when it is 1.
      const bool bit = (s >> i) & 1;
      m(s ^ (Eigen::Index{1} << i), s) += Complex(0.0, bit ? -1.0 : 1.0);
    }
  return m;
}

Eigen::VectorXd total_sigma_z_diagonal(int n_sites) {
  const Eigen::Index d = Eigen::Index{1} << n_sites;
  Eigen::VectorXd diag(d);
  for (Eigen::Index s = 0; s < d; ++s)
    diag[s] = static_cast<double>(n_sites) -
              2.0 * static_cast<double>(std::popcount(static_cast<std::uint64_t>(s)));
  return diag;
}

Eigen::VectorXd bond_diagonal(const LatticeConfig& cfg) {
  const Eigen::Index d = cfg.dimension();
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(d);
  for (const auto& [i, j] : cfg.bonds())
    for (Eigen::Index s = 0; s < d; ++s) {
      const double zi = ((s >> i) & 1) ? -1.0 : 1.0;
      const double zj = ((s >> j) & 1) ? -1.0 : 1.0;
      diag[s] += zi * zj;
    }
  return diag;
}

namespace {

ComplexMatrix symmetrized(ComplexMatrix m) {
  m = 0.5 * (m + m.adjoint().eval());
  return m;
}

}  // namespace

ComplexMatrix build_hamiltonian(const LatticeConfig& cfg, double vector_potential) {
  cfg.validate();
  ComplexMatrix h = std::cos(vector_potential) * total_sigma_x(cfg.n_sites) -
                    std::sin(vector_potential) * total_sigma_y(cfg.n_sites);
  h *= cfg.g;
  h.diagonal() += (cfg.J * bond_diagonal(cfg)).cast<Complex>();
  return symmetrized(std::move(h));
}

ComplexMatrix build_current_operator(const LatticeConfig& cfg, double vector_potential) {
  cfg.validate();
  ComplexMatrix j = std::sin(vector_potential) * total_sigma_x(cfg.n_sites) +
                    std::cos(vector_potential) * total_sigma_y(cfg.n_sites);
  j *= -cfg.g;
  return symmetrized(std::move(j));
}

std::vector<Eigen::Index> EnergyBasis::group_of() const {
  std::vector<Eigen::Index> idx(energies.size());
  for (Eigen::Index gi = 0; gi < static_cast<Eigen::Index>(groups.size()); ++gi)
    for (Eigen::Index k = 0; k < groups[gi].second; ++k) idx[groups[gi].first + k] = gi;
  return idx;
}

EnergyBasis eigendecompose(const ComplexMatrix& hermitian) {
  if (hermitian.rows() != hermitian.cols())
    throw std::invalid_argument("eigendecompose: matrix must be square");
  if ((hermitian - hermitian.adjoint()).cwiseAbs().maxCoeff() >
      1e-10 * std::max(1.0, hermitian.cwiseAbs().maxCoeff()))
    throw std::invalid_argument("eigendecompose: matrix is not Hermitian");

  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(hermitian);
  if (solver.info() != Eigen::Success)
    throw NumericError("eigendecompose: eigensolver failed to converge");

  EnergyBasis basis;
  basis.energies = solver.eigenvalues();
  basis.states = solver.eigenvectors();

  const double scale = std::max(std::abs(basis.energies[0]),
                                std::abs(basis.energies[basis.energies.size() - 1]));
  const double tol = 1e-9 * std::max(scale, 1e-300);
  Eigen::Index start = 0;
  for (Eigen::Index i = 1; i <= basis.energies.size(); ++i) {
    if (i == basis.energies.size() || basis.energies[i] - basis.energies[i - 1] > tol) {
      basis.groups.emplace_back(start, i - start);
      start = i;
    }
  }
  return basis;
}

ComplexMatrix build_jump_operator(const LatticeConfig& cfg) {
  cfg.validate();
  const EnergyBasis basis = eigendecompose(build_hamiltonian(cfg, 0.0));
  const Eigen::VectorXd mz = total_sigma_z_diagonal(cfg.n_sites);

  // sum_i sigma_z^i in the energy basis, then keep only the entries that
  // lower energy: row group strictly below column group.
  ComplexMatrix in_basis = basis.states.adjoint() * (mz.asDiagonal() * basis.states);
  const auto group = basis.group_of();
  for (Eigen::Index r = 0; r < in_basis.rows(); ++r)
    for (Eigen::Index c = 0; c < in_basis.cols(); ++c)
      if (group[r] >= group[c]) in_basis(r, c) = 0.0;

  return basis.states * in_basis * basis.states.adjoint();
}

ComplexMatrix ground_state(const LatticeConfig& cfg) {
  cfg.validate();
  const EnergyBasis basis = eigendecompose(build_hamiltonian(cfg, 0.0));
  const auto v = basis.states.col(0);
  return v * v.adjoint();
}

}  // namespace dqe
