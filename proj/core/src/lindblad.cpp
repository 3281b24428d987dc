#include "dqe/lindblad.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "dqe/errors.hpp"

namespace dqe {

EvolutionConfig EvolutionConfig::for_pulse(const PulseParams& pulse, double gamma,
                                           double dt_target, int output_points_per_cycle) {
  if (dt_target <= 0.0) throw std::invalid_argument("for_pulse: dt_target must be positive");
  if (output_points_per_cycle < 1)
    throw std::invalid_argument("for_pulse: output_points_per_cycle must be positive");
  EvolutionConfig evo;
  evo.gamma = gamma;
  evo.dt_output = pulse.carrier_period() / output_points_per_cycle;
  const int n = std::max(1, static_cast<int>(std::ceil(evo.dt_output / dt_target - 1e-12)));
  evo.dt_integrate = evo.dt_output / n;
  evo.t_start = pulse.start_time();
  evo.t_end = pulse.end_time();
  evo.validate();
  return evo;
}

int EvolutionConfig::substeps() const {
  return static_cast<int>(std::lround(dt_output / dt_integrate));
}

Eigen::Index EvolutionConfig::output_count() const {
  return static_cast<Eigen::Index>(std::ceil((t_end - t_start) / dt_output - 1e-9));
}

void EvolutionConfig::validate() const {
  if (gamma < 0.0) throw std::invalid_argument("EvolutionConfig: gamma must be >= 0");
  if (dt_integrate <= 0.0 || dt_output <= 0.0)
    throw std::invalid_argument("EvolutionConfig: steps must be positive");
  if (t_start >= t_end) throw std::invalid_argument("EvolutionConfig: t_start must precede t_end");
  const double n = dt_output / dt_integrate;
  if (std::abs(n - std::lround(n)) * dt_integrate > 1e-12)
    throw std::invalid_argument("EvolutionConfig: dt_output must be an integer multiple of dt_integrate");
}

ComplexMatrix lindblad_rhs(const ComplexMatrix& rho, const ComplexMatrix& hamiltonian,
                           const ComplexMatrix& jump, double gamma) {
  const Eigen::Index d = rho.rows();
  if (rho.cols() != d || hamiltonian.rows() != d || hamiltonian.cols() != d ||
      jump.rows() != d || jump.cols() != d)
    throw std::invalid_argument("lindblad_rhs: operand dimensions do not match");

  ComplexMatrix out = Complex(0.0, -1.0) * (hamiltonian * rho - rho * hamiltonian);
  if (gamma != 0.0) {
    const ComplexMatrix lr = jump * rho;
    const ComplexMatrix kk = jump.adjoint() * jump;
    out.noalias() += gamma * (lr * jump.adjoint());
    out.noalias() -= (0.5 * gamma) * (kk * rho);
    out.noalias() -= (0.5 * gamma) * (rho * kk);
  }
  return out;
}

double expectation(const ComplexMatrix& rho, const ComplexMatrix& observable) {
  if (rho.rows() != observable.rows() || rho.cols() != observable.cols() ||
      rho.rows() != rho.cols())
    throw std::invalid_argument("expectation: dimensions do not match");
  const Complex tr = (rho.array() * observable.transpose().array()).sum();
  if (std::abs(tr.imag()) >= 1e-10)
    throw NumericError("expectation: trace has imaginary part " + std::to_string(tr.imag()) +
                       "; Hermiticity lost upstream");
  return tr.real();
}

namespace {

double re_trace_product(const ComplexMatrix& a, const ComplexMatrix& b) {
  return (a.array() * b.transpose().array()).sum().real();
}

// C = A * B by column blocks. With threads > 1 the blocks run in parallel;
// each block is an ordinary sequential Eigen product, so the result for a
// fixed thread count is reproducible.
void product_into(const ComplexMatrix& a, const ComplexMatrix& b, ComplexMatrix& c,
                  int threads) {
  const Eigen::Index cols = b.cols();
  if (threads <= 1 || cols < 2 * threads) {
    c.noalias() = a * b;
    return;
  }
#ifdef _OPENMP
  const Eigen::Index nblocks = threads;
  const Eigen::Index width = (cols + nblocks - 1) / nblocks;
#pragma omp parallel for num_threads(threads) schedule(static)
  for (Eigen::Index blk = 0; blk < nblocks; ++blk) {
    const Eigen::Index j0 = blk * width;
    if (j0 >= cols) continue;
    const Eigen::Index w = std::min(width, cols - j0);
    c.middleCols(j0, w).noalias() = a * b.middleCols(j0, w);
  }
#else
  c.noalias() = a * b;
#endif
}

// Operators of the driven chain expressed in the field-free eigenbasis, where
// the static part of the Hamiltonian is diagonal and the jump operator is
// energy-ordered.
struct EnergyFrame {
  Eigen::VectorXd energies;
  ComplexMatrix basis;  // lab <- energy
  ComplexMatrix sx, sy;
  ComplexMatrix jump, jump_adj, jump_sq;  // A, A^+, A^+ A
  double g = 1.0;

  static EnergyFrame build(const LatticeConfig& lattice) {
    EnergyFrame f;
    const EnergyBasis eb = eigendecompose(build_hamiltonian(lattice, 0.0));
    f.energies = eb.energies;
    f.basis = eb.states;
    f.g = lattice.g;
    const ComplexMatrix sx_lab = total_sigma_x(lattice.n_sites);
    const ComplexMatrix sy_lab = total_sigma_y(lattice.n_sites);
    f.sx = eb.states.adjoint() * sx_lab * eb.states;
    f.sy = eb.states.adjoint() * sy_lab * eb.states;

    ComplexMatrix mz = eb.states.adjoint() *
                       (total_sigma_z_diagonal(lattice.n_sites).asDiagonal() * eb.states);
    const auto group = eb.group_of();
    for (Eigen::Index r = 0; r < mz.rows(); ++r)
      for (Eigen::Index c = 0; c < mz.cols(); ++c)
        if (group[r] >= group[c]) mz(r, c) = 0.0;
    f.jump = std::move(mz);
    f.jump_adj = f.jump.adjoint();
    f.jump_sq = f.jump_adj * f.jump;
    return f;
  }
};

// Scratch buffers for one RK4 stage evaluation.
struct StageBuffers {
  ComplexMatrix gen;   // -i H(a) - (gamma/2) A^+ A
  ComplexMatrix w, b, d;
  explicit StageBuffers(Eigen::Index dim)
      : gen(dim, dim), w(dim, dim), b(dim, dim), d(dim, dim) {}
};

// out = G rho + (G rho)^+ + gamma A rho A^+ with G = -i H(a) - (gamma/2) A^+ A.
// Algebraically equal to lindblad_rhs for Hermitian rho, at one general
// product plus two jump products per call.
void rhs_energy_frame(const EnergyFrame& f, const ComplexMatrix& rho, double a_value,
                      double gamma, int threads, StageBuffers& s, ComplexMatrix& out) {
  const double cosa = f.g * std::cos(a_value);
  const double sina = f.g * std::sin(a_value);
  // H(a) = diag(E) + (g cos a - g) Sx - g sin a Sy in this frame.
  s.gen = Complex(0.0, -1.0) * ((cosa - f.g) * f.sx - sina * f.sy);
  if (gamma != 0.0) s.gen.noalias() -= (0.5 * gamma) * f.jump_sq;
  s.gen.diagonal() -= (Complex(0.0, 1.0) * f.energies.cast<Complex>().array()).matrix();

  product_into(s.gen, rho, s.w, threads);
  if (gamma != 0.0) {
    product_into(f.jump, rho, s.b, threads);
    product_into(s.b, f.jump_adj, s.d, threads);
    out = s.w + s.w.adjoint() + gamma * s.d;
  } else {
    out = s.w + s.w.adjoint();
  }
}

}  // namespace

Trajectory evolve(const ComplexMatrix& rho0, const LatticeConfig& lattice,
                  const PulseParams& pulse, const EvolutionConfig& evo,
                  ComplexMatrix* rho_final, const EvolveOptions& opts) {
  lattice.validate();
  evo.validate();
  const Eigen::Index d = lattice.dimension();
  if (rho0.rows() != d || rho0.cols() != d)
    throw std::invalid_argument("evolve: rho0 dimension does not match the lattice");
  if ((rho0 - rho0.adjoint()).cwiseAbs().maxCoeff() > 1e-10)
    throw std::invalid_argument("evolve: rho0 is not Hermitian");
  if (std::abs(rho0.trace().real() - 1.0) > 1e-10 || std::abs(rho0.trace().imag()) > 1e-10)
    throw std::invalid_argument("evolve: rho0 does not have unit trace");

  const Eigen::Index n_out = evo.output_count();
  const int n_sub = evo.substeps();
  const double h = evo.dt_integrate;

  // Field and vector potential on the half-substep grid, extended backwards
  // so the grid covers the pulse support from its start (A = 0 there).
  const double fine_step = 0.5 * h;
  Eigen::Index prefix = 0;
  if (evo.t_start > pulse.start_time())
    prefix = static_cast<Eigen::Index>(std::ceil((evo.t_start - pulse.start_time()) / fine_step));
  const Eigen::Index n_fine = prefix + 2 * n_sub * n_out + 1;
  Eigen::VectorXd fine_times(n_fine);
  for (Eigen::Index q = 0; q < n_fine; ++q)
    fine_times[q] = evo.t_start + static_cast<double>(q - prefix) * fine_step;
  const SampledWaveform wave = vector_potential_grid(pulse, fine_times);
  const auto a_at = [&](Eigen::Index fine_idx) { return wave.vector_potential[prefix + fine_idx]; };

  const EnergyFrame frame = EnergyFrame::build(lattice);
  ComplexMatrix rho = frame.basis.adjoint() * rho0 * frame.basis;

  Trajectory traj;
  traj.times.resize(n_out + 1);
  traj.current.resize(n_out + 1);
  traj.field.resize(n_out + 1);
  traj.vector_potential.resize(n_out + 1);

  StageBuffers bufs(d);
  ComplexMatrix k1(d, d), k2(d, d), k3(d, d), k4(d, d), stage(d, d);
  const int threads = std::max(1, opts.threads);

  for (Eigen::Index k = 0; k <= n_out; ++k) {
    const Eigen::Index base = 2 * static_cast<Eigen::Index>(n_sub) * k;
    const double t_k = evo.t_start + static_cast<double>(k) * evo.dt_output;
    const double a_k = a_at(base);

    traj.times[k] = t_k;
    traj.field[k] = wave.field[prefix + base];
    traj.vector_potential[k] = a_k;
    // current operator in the energy frame: -g (sin a Sx + cos a Sy)
    traj.current[k] = -std::sin(a_k) * frame.g * re_trace_product(rho, frame.sx) -
                      std::cos(a_k) * frame.g * re_trace_product(rho, frame.sy);
    if (opts.observer) opts.observer(t_k, frame.basis * rho * frame.basis.adjoint());
    if (k == n_out) break;

    for (int i = 0; i < n_sub; ++i) {
      const Eigen::Index q0 = base + 2 * i;
      rhs_energy_frame(frame, rho, a_at(q0), evo.gamma, threads, bufs, k1);
      stage = rho + (0.5 * h) * k1;
      rhs_energy_frame(frame, stage, a_at(q0 + 1), evo.gamma, threads, bufs, k2);
      stage = rho + (0.5 * h) * k2;
      rhs_energy_frame(frame, stage, a_at(q0 + 1), evo.gamma, threads, bufs, k3);
      stage = rho + h * k3;
      rhs_energy_frame(frame, stage, a_at(q0 + 2), evo.gamma, threads, bufs, k4);
      rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }

    rho = (0.5 * (rho + rho.adjoint())).eval();
    const double trace_err = std::abs(rho.trace().real() - 1.0);
    if (trace_err > opts.trace_tolerance)
      throw NumericError("evolve: trace drifted by " + std::to_string(trace_err) + " at t = " +
                         std::to_string(evo.t_start + (k + 1) * evo.dt_output) +
                         "; dt_integrate is too large");
  }

  if (rho_final) *rho_final = frame.basis * rho * frame.basis.adjoint();
  return traj;
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

ComplexMatrix matrix_exponential(const ComplexMatrix& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("matrix_exponential: matrix must be square");
  const double norm = m.cwiseAbs().rowwise().sum().maxCoeff();  // infinity norm
  int squarings = 0;
  if (norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
  const ComplexMatrix scaled = m / std::pow(2.0, squarings);

  const Eigen::Index d = m.rows();
  ComplexMatrix term = ComplexMatrix::Identity(d, d);
  ComplexMatrix acc = ComplexMatrix::Identity(d, d);
  for (int k = 1; k <= 40; ++k) {
    term = (term * scaled / static_cast<double>(k)).eval();
    acc += term;
    if (term.cwiseAbs().maxCoeff() <= 1e-18 * acc.cwiseAbs().maxCoeff()) break;
  }
  for (int s = 0; s < squarings; ++s) acc = (acc * acc).eval();
  return acc;
}

ComplexMatrix superoperator_expm(const ComplexMatrix& hamiltonian, const ComplexMatrix& jump,
                                 double gamma, double t) {
  const Eigen::Index d = hamiltonian.rows();
  if (d > 16) throw ResourceError("superoperator_expm: oracle is limited to dimension 16");
  if (hamiltonian.cols() != d || jump.rows() != d || jump.cols() != d)
    throw std::invalid_argument("superoperator_expm: operand dimensions do not match");

  const ComplexMatrix id = ComplexMatrix::Identity(d, d);
  const ComplexMatrix ksq = jump.adjoint() * jump;
  // Column-stacking: vec(A X B) = (B^T kron A) vec X.
  ComplexMatrix liouville =
      Complex(0.0, -1.0) * (kron(id, hamiltonian) - kron(hamiltonian.transpose(), id));
  liouville.noalias() += gamma * kron(jump.conjugate(), jump);
  liouville.noalias() -= (0.5 * gamma) * kron(id, ksq);
  liouville.noalias() -= (0.5 * gamma) * kron(ksq.transpose(), id);
  return matrix_exponential(t * liouville);
}

}  // namespace dqe
