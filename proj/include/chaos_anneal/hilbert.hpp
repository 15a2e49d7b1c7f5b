#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "chaos_anneal/model.hpp"
#include "chaos_anneal/rng.hpp"

namespace chaos_anneal::hilbert {

using complex = std::complex<double>;
using SparseOp = Eigen::SparseMatrix<complex, Eigen::RowMajor>;
using Vector = Eigen::VectorXcd;
using Dense = Eigen::MatrixXcd;

/// Default cap on dim_a * dim_b; the full-scale 20 x 600 space fits.
inline constexpr std::size_t kDefaultBudget = 200000;
/// Cap for the dense Lindblad oracle.
inline constexpr std::size_t kOracleBudget = 64;

/// Truncation levels. Basis index of |n_a, n_b> is n_a * dim_b + n_b (n_a outer).
struct FockDims {
  std::size_t dim_a = 0;
  std::size_t dim_b = 0;

  std::size_t total() const noexcept { return dim_a * dim_b; }
  std::size_t index(std::size_t na, std::size_t nb) const noexcept { return na * dim_b + nb; }
  void validate(std::size_t budget = kDefaultBudget) const;
  friend bool operator==(const FockDims&, const FockDims&) = default;
};

enum class Mode { cavity, mechanics };
enum class OperatorRole { annihilation_a, annihilation_b, hamiltonian, effective_hamiltonian };

struct OperatorMatrix {
  OperatorRole role;
  SparseOp matrix;
};

/// Single-mode lowering operator on `dim` levels.
SparseOp lowering_operator(std::size_t dim);

/// Lowering operator of one mode embedded in the two-mode space.
OperatorMatrix annihilation_matrix(Mode which, const FockDims& dims);

/// H = -Delta a^dag a + b^dag b - g a^dag a (b^dag + b) + i E (a^dag - a) - chi (a^dag a)^2.
OperatorMatrix build_hamiltonian(const model::DimensionlessParams& d, const FockDims& dims,
                                 std::size_t budget = kDefaultBudget);

/// H - i kappa a^dag a - i gamma b^dag b.
OperatorMatrix effective_hamiltonian(const OperatorMatrix& h, const model::DimensionlessParams& d,
                                     const FockDims& dims);

/// Normalised state vector on the truncated two-mode space.
class PureState {
 public:
  PureState(const FockDims& dims, Vector amplitudes);

  static PureState vacuum(const FockDims& dims);
  static PureState fock(const FockDims& dims, std::size_t na, std::size_t nb);
  /// Truncated coherent state |alpha> (x) |beta>, renormalised after truncation.
  static PureState coherent(const FockDims& dims, complex alpha, complex beta);

  const FockDims& dims() const noexcept { return dims_; }
  const Vector& amplitudes() const noexcept { return amplitudes_; }
  complex operator()(std::size_t na, std::size_t nb) const { return amplitudes_[dims_.index(na, nb)]; }
  double norm() const { return amplitudes_.norm(); }

  /// Population of the top cavity (resp. mechanical) level.
  double top_population(Mode which) const;
  /// Tr_b |psi><psi| as a dim_a x dim_a matrix.
  Dense cavity_reduced() const;

 private:
  FockDims dims_;
  Vector amplitudes_;
};

/// Hermitian unit-trace matrix, either on the full space or on the cavity subspace.
struct DensityMatrix {
  Dense entries;

  double trace() const { return entries.trace().real(); }
  double hermiticity_error() const;
  double min_eigenvalue() const;
};

complex expectation_value(const PureState& psi, const SparseOp& op);
complex expectation_value(const DensityMatrix& rho, const SparseOp& op);
complex expectation_value(const DensityMatrix& rho, const Dense& op);

/// rho = N^-1 sum |psi_j><psi_j|
DensityMatrix accumulate_density_matrix(std::span<const PureState> states);

DensityMatrix partial_trace_cavity(const DensityMatrix& rho, const FockDims& dims);

/// Operators needed by the jump unravelling, built once and shared read-only.
class JumpModel {
 public:
  JumpModel(const model::DimensionlessParams& d, const FockDims& dims,
            std::size_t budget = kDefaultBudget);

  const FockDims& dims() const noexcept { return dims_; }
  const model::DimensionlessParams& params() const noexcept { return d_; }
  const SparseOp& a() const noexcept { return a_; }
  const SparseOp& b() const noexcept { return b_; }
  const SparseOp& number_a() const noexcept { return na_; }
  const SparseOp& number_b() const noexcept { return nb_; }
  const SparseOp& hamiltonian() const noexcept { return h_; }
  const SparseOp& effective_hamiltonian() const noexcept { return heff_; }

  /// (<a^dag a>, <b^dag b>) of a normalised vector; both number operators are diagonal.
  std::pair<double, double> occupations(const Vector& psi) const;

  /// exp(-i H_eff dt) psi by a sub-stepped Taylor series on sparse products.
  Vector propagate_no_jump(const Vector& psi, double dt) const;

 private:
  model::DimensionlessParams d_;
  FockDims dims_;
  SparseOp a_, b_, na_, nb_, h_, heff_;
  Eigen::ArrayXd level_a_, level_b_;  // diagonal of a^dag a and b^dag b
  SparseOp shifted_;  // heff_ - shift_ * I
  complex shift_{0.0, 0.0};
  double shifted_norm_ = 0.0;
};

enum class JumpOutcome { none, cavity, mechanics };

struct JumpStep {
  PureState state;
  JumpOutcome outcome;
  double p_cavity;     // P1 = 2 kappa dt <a^dag a>
  double p_mechanics;  // P2 = 2 gamma dt <b^dag b>
};

/// Largest combined jump probability accepted by jump_step.
inline constexpr double kMaxJumpProbability = 0.1;
/// Target used by the adaptive step control.
inline constexpr double kTargetJumpProbability = 0.01;

/// One first-order quantum-jump step driven by a single uniform variate in (0, 1].
JumpStep jump_step(const PureState& psi, const JumpModel& model, double dt, double uniform);
JumpStep jump_step(const PureState& psi, const JumpModel& model, double dt,
                   const rng::CounterStream& stream, std::uint64_t step, std::uint32_t slot);

struct TrajectoryOptions {
  double t_end = 0.0;
  double dt = 1e-2;
  std::size_t stride = 1;
  std::vector<double> snapshot_times;
  double max_jump_probability = kTargetJumpProbability;

  void validate() const;
  std::size_t steps() const;
  std::size_t samples() const { return steps() / stride + 1; }
};

struct QuantumTrajectory {
  std::vector<double> times;
  std::vector<double> n_a;    // <psi| a^dag a |psi>
  std::vector<double> n_b;
  std::vector<double> top_a;  // top-level populations
  std::vector<double> top_b;
  std::vector<PureState> snapshots;
  std::size_t cavity_jumps = 0;
  std::size_t mechanical_jumps = 0;
};

/// Repeated jump steps; each base step is split so P1 + P2 stays below
/// max_jump_probability. Deterministic per (seed, traj_index).
QuantumTrajectory evolve_trajectory(const PureState& psi0, const JumpModel& model,
                                    const TrajectoryOptions& opts, std::size_t traj_index,
                                    std::uint64_t seed);

struct JumpEnsembleConfig {
  std::size_t n_traj = 1;
  TrajectoryOptions trajectory;
  std::uint64_t seed = 0;
  std::size_t keep_trajectories = 0;
  bool full_density = false;  // also assemble the full-space density matrix (small dims)
  int workers = 0;
};

struct JumpEnsembleResult {
  std::vector<double> times;
  std::vector<double> mean_n_a;     // Tr(a^dag a rho)
  std::vector<double> stderr_n_a;   // Monte Carlo standard error of mean_n_a
  std::vector<double> mean_n_b;
  std::vector<double> mean_top_a;
  std::vector<double> mean_top_b;
  std::vector<double> snapshot_times;
  std::vector<DensityMatrix> cavity_density;  // one per snapshot
  std::vector<DensityMatrix> full_density;    // filled when requested
  std::vector<QuantumTrajectory> sample_trajectories;
  std::size_t total_jumps = 0;

  double max_top_a() const;
  double max_top_b() const;
  /// True when either top-level population exceeds 1e-4 at any sample.
  bool truncation_warning() const;
};

inline constexpr double kTruncationWarning = 1e-4;

/// OpenMP ensemble of jump trajectories reduced in trajectory-index order.
JumpEnsembleResult simulate_jump_ensemble(const PureState& psi0, const JumpModel& model,
                                          const JumpEnsembleConfig& cfg);

namespace reference {
JumpEnsembleResult simulate_jump_ensemble(const PureState& psi0, const JumpModel& model,
                                          const JumpEnsembleConfig& cfg);
}  // namespace reference

/// Right-hand side of the zero-temperature master equation.
Dense lindblad_rhs(const Dense& rho, const Dense& h, const Dense& a, const Dense& b,
                   const model::DimensionlessParams& d);

struct MasterTrajectory {
  std::vector<double> times;
  std::vector<DensityMatrix> states;
};

/// Dense RK4 integration of the master equation; refuses spaces above `budget`.
MasterTrajectory integrate_master_oracle(const DensityMatrix& rho0, const model::DimensionlessParams& d,
                                         const FockDims& dims, double t_end, double dt,
                                         std::size_t stride, std::size_t budget = kOracleBudget);

}  // namespace chaos_anneal::hilbert
