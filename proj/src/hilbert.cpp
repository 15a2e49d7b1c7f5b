#include "chaos_anneal/hilbert.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "chaos_anneal/errors.hpp"

namespace chaos_anneal::hilbert {
namespace {

using Triplet = Eigen::Triplet<complex>;
constexpr complex kI{0.0, 1.0};

SparseOp from_triplets(std::size_t n, const std::vector<Triplet>& t) {
  SparseOp m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  return m;
}

// Max of the 1- and infinity-norms; bounds the spectral norm from above.
double norm_bound(const SparseOp& m) {
  std::vector<double> col(static_cast<std::size_t>(m.cols()), 0.0);
  double row_max = 0.0;
  for (Eigen::Index r = 0; r < m.outerSize(); ++r) {
    double row = 0.0;
    for (SparseOp::InnerIterator it(m, r); it; ++it) {
      row += std::abs(it.value());
      col[static_cast<std::size_t>(it.col())] += std::abs(it.value());
    }
    row_max = std::max(row_max, row);
  }
  const double col_max = col.empty() ? 0.0 : *std::max_element(col.begin(), col.end());
  return std::max(row_max, col_max);
}

// Like DimensionlessParams::validate but admits the closed limit kappa = gamma = 0.
void check_params(const model::DimensionlessParams& d) {
  auto ok = [](double v) { return std::isfinite(v) && v >= 0.0; };
  if (!std::isfinite(d.delta) || !ok(d.kappa) || !ok(d.gamma) || !ok(d.g) || !ok(d.chi) || !ok(d.drive)) {
    throw InvalidParameter("quantum model needs finite delta and non-negative kappa, gamma, g, chi, E");
  }
}

}  // namespace

void FockDims::validate(std::size_t budget) const {
  if (dim_a < 1 || dim_b < 1) throw InvalidParameter("Fock dimensions must be positive");
  if (dim_a > budget / dim_b) {
    throw BudgetError("dim_a * dim_b = " + std::to_string(dim_a) + " * " + std::to_string(dim_b) +
                      " exceeds the budget of " + std::to_string(budget));
  }
}

SparseOp lowering_operator(std::size_t dim) {
  if (dim < 1) throw InvalidParameter("lowering operator needs dim >= 1");
  std::vector<Triplet> t;
  for (std::size_t n = 1; n < dim; ++n) {
    t.emplace_back(static_cast<int>(n - 1), static_cast<int>(n), std::sqrt(static_cast<double>(n)));
  }
  return from_triplets(dim, t);
}

OperatorMatrix annihilation_matrix(Mode which, const FockDims& dims) {
  dims.validate(std::numeric_limits<std::size_t>::max());
  std::vector<Triplet> t;
  for (std::size_t na = 0; na < dims.dim_a; ++na) {
    for (std::size_t nb = 0; nb < dims.dim_b; ++nb) {
      if (which == Mode::cavity && na > 0) {
        t.emplace_back(static_cast<int>(dims.index(na - 1, nb)), static_cast<int>(dims.index(na, nb)),
                       std::sqrt(static_cast<double>(na)));
      } else if (which == Mode::mechanics && nb > 0) {
        t.emplace_back(static_cast<int>(dims.index(na, nb - 1)), static_cast<int>(dims.index(na, nb)),
                       std::sqrt(static_cast<double>(nb)));
      }
    }
  }
  return {which == Mode::cavity ? OperatorRole::annihilation_a : OperatorRole::annihilation_b,
          from_triplets(dims.total(), t)};
}

OperatorMatrix build_hamiltonian(const model::DimensionlessParams& d, const FockDims& dims,
                                 std::size_t budget) {
  dims.validate(budget);
  check_params(d);
  std::vector<Triplet> t;
  for (std::size_t na = 0; na < dims.dim_a; ++na) {
    const double n = static_cast<double>(na);
    for (std::size_t nb = 0; nb < dims.dim_b; ++nb) {
      const int i = static_cast<int>(dims.index(na, nb));
      t.emplace_back(i, i, -d.delta * n + static_cast<double>(nb) - d.chi * n * n);
      // -g n_a (b + b^dag)
      if (nb + 1 < dims.dim_b && na > 0) {
        const int j = static_cast<int>(dims.index(na, nb + 1));
        const double v = -d.g * n * std::sqrt(static_cast<double>(nb + 1));
        t.emplace_back(i, j, v);
        t.emplace_back(j, i, v);
      }
      // i E (a^dag - a)
      if (na + 1 < dims.dim_a && d.drive != 0.0) {
        const int j = static_cast<int>(dims.index(na + 1, nb));
        const double s = d.drive * std::sqrt(n + 1.0);
        t.emplace_back(j, i, kI * s);
        t.emplace_back(i, j, -kI * s);
      }
    }
  }
  return {OperatorRole::hamiltonian, from_triplets(dims.total(), t)};
}

OperatorMatrix effective_hamiltonian(const OperatorMatrix& h, const model::DimensionlessParams& d,
                                     const FockDims& dims) {
  if (h.role != OperatorRole::hamiltonian) throw MisuseError("effective_hamiltonian needs a Hamiltonian");
  if (static_cast<std::size_t>(h.matrix.rows()) != dims.total()) {
    throw InvalidParameter("Hamiltonian does not match the Fock dimensions");
  }
  std::vector<Triplet> t;
  for (std::size_t na = 0; na < dims.dim_a; ++na) {
    for (std::size_t nb = 0; nb < dims.dim_b; ++nb) {
      const int i = static_cast<int>(dims.index(na, nb));
      t.emplace_back(i, i, -kI * (d.kappa * static_cast<double>(na) + d.gamma * static_cast<double>(nb)));
    }
  }
  SparseOp damping = from_triplets(dims.total(), t);
  SparseOp heff = h.matrix + damping;
  heff.makeCompressed();
  return {OperatorRole::effective_hamiltonian, std::move(heff)};
}

PureState::PureState(const FockDims& dims, Vector amplitudes)
    : dims_(dims), amplitudes_(std::move(amplitudes)) {
  if (static_cast<std::size_t>(amplitudes_.size()) != dims.total()) {
    throw InvalidParameter("state vector length does not match dim_a * dim_b");
  }
  const double n = amplitudes_.norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw InvalidParameter("state vector has zero or non-finite norm");
  amplitudes_ /= n;
}

PureState PureState::vacuum(const FockDims& dims) { return fock(dims, 0, 0); }

PureState PureState::fock(const FockDims& dims, std::size_t na, std::size_t nb) {
  dims.validate(std::numeric_limits<std::size_t>::max());
  if (na >= dims.dim_a || nb >= dims.dim_b) throw InvalidParameter("Fock level outside the truncation");
  Vector v = Vector::Zero(static_cast<Eigen::Index>(dims.total()));
  v[static_cast<Eigen::Index>(dims.index(na, nb))] = 1.0;
  return {dims, std::move(v)};
}

PureState PureState::coherent(const FockDims& dims, complex alpha, complex beta) {
  dims.validate(std::numeric_limits<std::size_t>::max());
  auto mode = [](std::size_t dim, complex z) {
    Vector c(static_cast<Eigen::Index>(dim));
    c[0] = 1.0;
    for (std::size_t n = 1; n < dim; ++n) {
      c[static_cast<Eigen::Index>(n)] = c[static_cast<Eigen::Index>(n - 1)] * z / std::sqrt(static_cast<double>(n));
    }
    return c;
  };
  const Vector ca = mode(dims.dim_a, alpha);
  const Vector cb = mode(dims.dim_b, beta);
  Vector v(static_cast<Eigen::Index>(dims.total()));
  for (std::size_t na = 0; na < dims.dim_a; ++na) {
    for (std::size_t nb = 0; nb < dims.dim_b; ++nb) {
      v[static_cast<Eigen::Index>(dims.index(na, nb))] =
          ca[static_cast<Eigen::Index>(na)] * cb[static_cast<Eigen::Index>(nb)];
    }
  }
  return {dims, std::move(v)};
}

double PureState::top_population(Mode which) const {
  double p = 0.0;
  if (which == Mode::cavity) {
    for (std::size_t nb = 0; nb < dims_.dim_b; ++nb) p += std::norm((*this)(dims_.dim_a - 1, nb));
  } else {
    for (std::size_t na = 0; na < dims_.dim_a; ++na) p += std::norm((*this)(na, dims_.dim_b - 1));
  }
  return p;
}

Dense PureState::cavity_reduced() const {
  // Row-major reshape: M(n_a, n_b) = psi[n_a * dim_b + n_b].
  const Eigen::Map<const Eigen::Matrix<complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> m(
      amplitudes_.data(), static_cast<Eigen::Index>(dims_.dim_a), static_cast<Eigen::Index>(dims_.dim_b));
  return m * m.adjoint();
}

double DensityMatrix::hermiticity_error() const {
  return (entries - entries.adjoint()).cwiseAbs().maxCoeff();
}

double DensityMatrix::min_eigenvalue() const {
  const Dense herm = 0.5 * (entries + entries.adjoint());
  Eigen::SelfAdjointEigenSolver<Dense> es(herm, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

complex expectation_value(const PureState& psi, const SparseOp& op) {
  if (op.rows() != psi.amplitudes().size()) throw InvalidParameter("operator and state dimensions differ");
  return psi.amplitudes().dot(op * psi.amplitudes());
}

complex expectation_value(const DensityMatrix& rho, const SparseOp& op) {
  if (op.rows() != rho.entries.rows()) throw InvalidParameter("operator and density matrix dimensions differ");
  complex tr = 0.0;
  for (Eigen::Index r = 0; r < op.outerSize(); ++r) {
    for (SparseOp::InnerIterator it(op, r); it; ++it) tr += it.value() * rho.entries(it.col(), r);
  }
  return tr;
}

complex expectation_value(const DensityMatrix& rho, const Dense& op) {
  if (op.rows() != rho.entries.rows()) throw InvalidParameter("operator and density matrix dimensions differ");
  return (op * rho.entries).trace();
}

DensityMatrix accumulate_density_matrix(std::span<const PureState> states) {
  if (states.empty()) throw InvalidParameter("cannot assemble a density matrix from no states");
  const FockDims dims = states.front().dims();
  const auto n = static_cast<Eigen::Index>(dims.total());
  Dense rho = Dense::Zero(n, n);
  for (const auto& s : states) {
    if (!(s.dims() == dims)) throw InvalidParameter("snapshots have different dimensions");
    rho.noalias() += s.amplitudes() * s.amplitudes().adjoint();
  }
  rho /= static_cast<double>(states.size());
  return {std::move(rho)};
}

DensityMatrix partial_trace_cavity(const DensityMatrix& rho, const FockDims& dims) {
  if (static_cast<std::size_t>(rho.entries.rows()) != dims.total() || rho.entries.rows() != rho.entries.cols()) {
    throw InvalidParameter("density matrix does not match dim_a * dim_b");
  }
  const auto da = static_cast<Eigen::Index>(dims.dim_a);
  const auto db = static_cast<Eigen::Index>(dims.dim_b);
  Dense out = Dense::Zero(da, da);
  for (Eigen::Index m = 0; m < da; ++m) {
    for (Eigen::Index n = 0; n < da; ++n) {
      complex s = 0.0;
      for (Eigen::Index k = 0; k < db; ++k) s += rho.entries(m * db + k, n * db + k);
      out(m, n) = s;
    }
  }
  return {std::move(out)};
}

JumpModel::JumpModel(const model::DimensionlessParams& d, const FockDims& dims, std::size_t budget)
    : d_(d), dims_(dims) {
  check_params(d);
  const OperatorMatrix h = build_hamiltonian(d, dims, budget);
  a_ = annihilation_matrix(Mode::cavity, dims).matrix;
  b_ = annihilation_matrix(Mode::mechanics, dims).matrix;
  na_ = SparseOp(a_.adjoint() * a_);
  nb_ = SparseOp(b_.adjoint() * b_);
  h_ = h.matrix;
  heff_ = hilbert::effective_hamiltonian(h, d, dims).matrix;
  level_a_.resize(static_cast<Eigen::Index>(dims.total()));
  level_b_.resize(static_cast<Eigen::Index>(dims.total()));
  for (std::size_t na = 0; na < dims.dim_a; ++na) {
    for (std::size_t nb = 0; nb < dims.dim_b; ++nb) {
      level_a_[static_cast<Eigen::Index>(dims.index(na, nb))] = static_cast<double>(na);
      level_b_[static_cast<Eigen::Index>(dims.index(na, nb))] = static_cast<double>(nb);
    }
  }
  // Shifting by the centre of the diagonal range shortens the Taylor series; the
  // shift returns as a scalar phase and decay factor.
  double re_lo = std::numeric_limits<double>::infinity(), re_hi = -re_lo;
  double im_lo = re_lo, im_hi = -re_lo;
  for (Eigen::Index i = 0; i < heff_.rows(); ++i) {
    const complex v = heff_.coeff(i, i);
    re_lo = std::min(re_lo, v.real());
    re_hi = std::max(re_hi, v.real());
    im_lo = std::min(im_lo, v.imag());
    im_hi = std::max(im_hi, v.imag());
  }
  shift_ = complex(0.5 * (re_lo + re_hi), 0.5 * (im_lo + im_hi));
  SparseOp ident(heff_.rows(), heff_.cols());
  ident.setIdentity();
  shifted_ = heff_ - shift_ * ident;
  shifted_.makeCompressed();
  shifted_norm_ = norm_bound(shifted_);
}

std::pair<double, double> JumpModel::occupations(const Vector& psi) const {
  const Eigen::ArrayXd w = psi.cwiseAbs2().array();
  return {(w * level_a_).sum(), (w * level_b_).sum()};
}

Vector JumpModel::propagate_no_jump(const Vector& psi, double dt) const {
  constexpr double kTheta = 1.0;
  constexpr double kTol = 1e-14;
  const int substeps = std::max(1, static_cast<int>(std::ceil(shifted_norm_ * dt / kTheta)));
  const double h = dt / substeps;
  const complex phase = std::exp(-kI * shift_ * h);
  Vector v = psi;
  Vector term(psi.size());
  Vector next(psi.size());
  for (int s = 0; s < substeps; ++s) {
    term = v;
    const double scale = v.norm();
    for (int k = 1; k <= 80; ++k) {
      next.noalias() = shifted_ * term;
      term = complex(0.0, -h / k) * next;
      v += term;
      if (term.norm() <= kTol * scale) break;
    }
    v *= phase;
  }
  return v;
}

void TrajectoryOptions::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidParameter("dt must be positive");
  if (!(t_end >= 0.0) || !std::isfinite(t_end)) throw InvalidParameter("t_end must be non-negative");
  if (stride < 1) throw InvalidParameter("sample stride must be at least 1");
  if (!(max_jump_probability > 0.0) || max_jump_probability >= kMaxJumpProbability) {
    throw InvalidParameter("max_jump_probability must lie in (0, 0.1)");
  }
}

std::size_t TrajectoryOptions::steps() const {
  return static_cast<std::size_t>(std::floor(t_end / dt + 1e-9));
}

JumpStep jump_step(const PureState& psi, const JumpModel& model, double dt, double uniform) {
  if (!(psi.dims() == model.dims())) throw InvalidParameter("state and model dimensions differ");
  if (!(dt > 0.0)) throw InvalidParameter("dt must be positive");
  const auto& d = model.params();
  const Vector& v = psi.amplitudes();
  const auto [n_a, n_b] = model.occupations(v);
  const double p1 = 2.0 * d.kappa * dt * n_a;
  const double p2 = 2.0 * d.gamma * dt * n_b;
  if (p1 + p2 >= 1.0) {
    throw StepSizeError("jump probability " + std::to_string(p1 + p2) + " >= 1; reduce dt");
  }
  if (p1 + p2 >= kMaxJumpProbability) {
    throw StepSizeError("jump probability " + std::to_string(p1 + p2) + " exceeds 0.1; reduce dt");
  }
  if (uniform < p1) {
    return {PureState(psi.dims(), model.a() * v), JumpOutcome::cavity, p1, p2};
  }
  if (uniform < p1 + p2) {
    return {PureState(psi.dims(), model.b() * v), JumpOutcome::mechanics, p1, p2};
  }
  return {PureState(psi.dims(), model.propagate_no_jump(v, dt)), JumpOutcome::none, p1, p2};
}

JumpStep jump_step(const PureState& psi, const JumpModel& model, double dt,
                   const rng::CounterStream& stream, std::uint64_t step, std::uint32_t slot) {
  return jump_step(psi, model, dt, stream.uniform(step, slot));
}

std::vector<std::size_t> snapshot_indices(const TrajectoryOptions& opts) {
  std::vector<std::size_t> idx;
  const double sample_dt = opts.dt * static_cast<double>(opts.stride);
  for (double t : opts.snapshot_times) {
    const double k = std::round(t / sample_dt);
    if (k < 0.0 || std::abs(k * sample_dt - t) > 1e-6 * sample_dt ||
        static_cast<std::size_t>(k) >= opts.samples()) {
      throw InvalidParameter("snapshot time " + std::to_string(t) + " is not on the sampled grid");
    }
    idx.push_back(static_cast<std::size_t>(k));
  }
  return idx;
}

QuantumTrajectory evolve_trajectory(const PureState& psi0, const JumpModel& model,
                                    const TrajectoryOptions& opts, std::size_t traj_index,
                                    std::uint64_t seed) {
  opts.validate();
  if (!(psi0.dims() == model.dims())) throw InvalidParameter("state and model dimensions differ");
  if (std::abs(psi0.norm() - 1.0) > 1e-10) throw InvalidParameter("initial state is not normalised");
  if (traj_index > 0xffffffffULL) throw InvalidParameter("trajectory index exceeds 2^32 - 1");
  const auto snaps = snapshot_indices(opts);
  const rng::CounterStream stream(seed, static_cast<std::uint32_t>(traj_index));
  const auto& d = model.params();

  QuantumTrajectory out;
  const std::size_t samples = opts.samples();
  out.times.reserve(samples);
  out.n_a.reserve(samples);
  out.n_b.reserve(samples);
  out.top_a.reserve(samples);
  out.top_b.reserve(samples);
  out.snapshots.reserve(snaps.size());

  PureState psi = psi0;
  std::size_t sample = 0;
  auto record = [&](double t) {
    out.times.push_back(t);
    const auto [n_a, n_b] = model.occupations(psi.amplitudes());
    out.n_a.push_back(n_a);
    out.n_b.push_back(n_b);
    out.top_a.push_back(psi.top_population(Mode::cavity));
    out.top_b.push_back(psi.top_population(Mode::mechanics));
    for (std::size_t s : snaps) {
      if (s == sample) out.snapshots.push_back(psi);
    }
    ++sample;
  };
  record(0.0);

  const std::size_t steps = opts.steps();
  for (std::size_t k = 0; k < steps; ++k) {
    double remaining = opts.dt;
    std::uint32_t slot = 0;
    while (remaining > 0.0) {
      const auto [n_a, n_b] = model.occupations(psi.amplitudes());
      const double rate = 2.0 * d.kappa * n_a + 2.0 * d.gamma * n_b;
      const double pieces = std::ceil(rate * remaining / opts.max_jump_probability);
      double h = remaining;
      if (pieces > 1.0) {
        h = remaining / pieces;
        remaining -= h;
      } else {
        remaining = 0.0;
      }
      JumpStep js = jump_step(psi, model, h, stream.uniform(k, slot++));
      if (js.outcome == JumpOutcome::cavity) ++out.cavity_jumps;
      if (js.outcome == JumpOutcome::mechanics) ++out.mechanical_jumps;
      psi = std::move(js.state);
    }
    if ((k + 1) % opts.stride == 0) record(static_cast<double>(k + 1) * opts.dt);
  }
  return out;
}

double JumpEnsembleResult::max_top_a() const {
  return mean_top_a.empty() ? 0.0 : *std::max_element(mean_top_a.begin(), mean_top_a.end());
}

double JumpEnsembleResult::max_top_b() const {
  return mean_top_b.empty() ? 0.0 : *std::max_element(mean_top_b.begin(), mean_top_b.end());
}

bool JumpEnsembleResult::truncation_warning() const {
  return max_top_a() > kTruncationWarning || max_top_b() > kTruncationWarning;
}

Dense lindblad_rhs(const Dense& rho, const Dense& h, const Dense& a, const Dense& b,
                   const model::DimensionlessParams& d) {
  const Dense ad = a.adjoint();
  const Dense bd = b.adjoint();
  const Dense na = ad * a;
  const Dense nb = bd * b;
  Dense out = -kI * (h * rho - rho * h);
  out += d.kappa * (2.0 * a * rho * ad - na * rho - rho * na);
  out += d.gamma * (2.0 * b * rho * bd - nb * rho - rho * nb);
  return out;
}

MasterTrajectory integrate_master_oracle(const DensityMatrix& rho0, const model::DimensionlessParams& d,
                                         const FockDims& dims, double t_end, double dt,
                                         std::size_t stride, std::size_t budget) {
  dims.validate(budget);
  check_params(d);
  if (static_cast<std::size_t>(rho0.entries.rows()) != dims.total()) {
    throw InvalidParameter("initial density matrix does not match dim_a * dim_b");
  }
  TrajectoryOptions grid;
  grid.t_end = t_end;
  grid.dt = dt;
  grid.stride = stride;
  grid.validate();
  const Dense h(build_hamiltonian(d, dims, budget).matrix);
  const Dense a(annihilation_matrix(Mode::cavity, dims).matrix);
  const Dense b(annihilation_matrix(Mode::mechanics, dims).matrix);
  // Precompute the pieces so each RK4 stage is a handful of dense products.
  const Dense ad = a.adjoint();
  const Dense bd = b.adjoint();
  const Dense heff = h - kI * (d.kappa * ad * a + d.gamma * bd * b);
  const Dense heff_dag = heff.adjoint();
  auto rhs = [&](const Dense& r) -> Dense {
    Dense out = -kI * (heff * r - r * heff_dag);
    out += 2.0 * d.kappa * a * r * ad;
    out += 2.0 * d.gamma * b * r * bd;
    return out;
  };

  MasterTrajectory out;
  Dense rho = rho0.entries;
  out.times.push_back(0.0);
  out.states.push_back({rho});
  const std::size_t steps = grid.steps();
  for (std::size_t k = 0; k < steps; ++k) {
    const Dense k1 = rhs(rho);
    const Dense k2 = rhs(rho + 0.5 * dt * k1);
    const Dense k3 = rhs(rho + 0.5 * dt * k2);
    const Dense k4 = rhs(rho + dt * k3);
    rho += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if ((k + 1) % stride == 0) {
      out.times.push_back(static_cast<double>(k + 1) * dt);
      out.states.push_back({rho});
    }
  }
  return out;
}

}  // namespace chaos_anneal::hilbert
