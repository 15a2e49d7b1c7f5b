#include <algorithm>
#include <cmath>
#include <exception>
#include <optional>

#include "chaos_anneal/errors.hpp"
#include "chaos_anneal/hilbert.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace chaos_anneal::hilbert {
namespace {

constexpr std::size_t kBatch = 32;

struct Record {
  std::optional<QuantumTrajectory> traj;
  std::vector<Dense> cavity;
  std::exception_ptr error;
};

class JumpRunner {
 public:
  JumpRunner(const PureState& psi0, const JumpModel& model, const JumpEnsembleConfig& cfg)
      : psi0_(psi0), model_(model), cfg_(cfg) {
    cfg.trajectory.validate();
    if (cfg.n_traj == 0) throw InvalidParameter("ensemble needs at least one trajectory");
    if (!(psi0.dims() == model.dims())) throw InvalidParameter("state and model dimensions differ");
    const auto samples = cfg.trajectory.samples();
    sum_n_a_.assign(samples, 0.0);
    sum_sq_n_a_.assign(samples, 0.0);
    sum_n_b_.assign(samples, 0.0);
    sum_top_a_.assign(samples, 0.0);
    sum_top_b_.assign(samples, 0.0);
  }

  Record run_one(std::size_t j) const {
    Record rec;
    try {
      QuantumTrajectory t = evolve_trajectory(psi0_, model_, cfg_.trajectory, j, cfg_.seed);
      for (const auto& s : t.snapshots) rec.cavity.push_back(s.cavity_reduced());
      if (!cfg_.full_density && j >= cfg_.keep_trajectories) t.snapshots.clear();
      rec.traj = std::move(t);
    } catch (...) {
      rec.error = std::current_exception();
    }
    return rec;
  }

  void fold(JumpEnsembleResult& r, std::size_t j, Record&& rec) {
    if (rec.error) std::rethrow_exception(rec.error);
    QuantumTrajectory& t = *rec.traj;
    if (r.times.empty()) {
      r.times = t.times;
      r.snapshot_times = cfg_.trajectory.snapshot_times;
      const auto da = static_cast<Eigen::Index>(model_.dims().dim_a);
      const auto n = static_cast<Eigen::Index>(model_.dims().total());
      r.cavity_density.assign(rec.cavity.size(), {Dense::Zero(da, da)});
      if (cfg_.full_density) r.full_density.assign(rec.cavity.size(), {Dense::Zero(n, n)});
    }
    for (std::size_t k = 0; k < t.n_a.size(); ++k) {
      sum_n_a_[k] += t.n_a[k];
      sum_sq_n_a_[k] += t.n_a[k] * t.n_a[k];
      sum_n_b_[k] += t.n_b[k];
      sum_top_a_[k] += t.top_a[k];
      sum_top_b_[k] += t.top_b[k];
    }
    for (std::size_t i = 0; i < rec.cavity.size(); ++i) {
      r.cavity_density[i].entries += rec.cavity[i];
      if (cfg_.full_density) {
        const Vector& v = t.snapshots[i].amplitudes();
        r.full_density[i].entries.noalias() += v * v.adjoint();
      }
    }
    r.total_jumps += t.cavity_jumps + t.mechanical_jumps;
    if (j < cfg_.keep_trajectories) r.sample_trajectories.push_back(std::move(t));
  }

  void finish(JumpEnsembleResult& r) const {
    const auto n = static_cast<double>(cfg_.n_traj);
    const std::size_t samples = sum_n_a_.size();
    r.mean_n_a.resize(samples);
    r.stderr_n_a.resize(samples);
    r.mean_n_b.resize(samples);
    r.mean_top_a.resize(samples);
    r.mean_top_b.resize(samples);
    for (std::size_t k = 0; k < samples; ++k) {
      const double m = sum_n_a_[k] / n;
      r.mean_n_a[k] = m;
      const double var = cfg_.n_traj > 1 ? std::max(0.0, (sum_sq_n_a_[k] - n * m * m) / (n - 1.0)) : 0.0;
      r.stderr_n_a[k] = std::sqrt(var / n);
      r.mean_n_b[k] = sum_n_b_[k] / n;
      r.mean_top_a[k] = sum_top_a_[k] / n;
      r.mean_top_b[k] = sum_top_b_[k] / n;
    }
    for (auto& rho : r.cavity_density) rho.entries /= n;
    for (auto& rho : r.full_density) rho.entries /= n;
  }

 private:
  const PureState& psi0_;
  const JumpModel& model_;
  const JumpEnsembleConfig& cfg_;
  std::vector<double> sum_n_a_, sum_sq_n_a_, sum_n_b_, sum_top_a_, sum_top_b_;
};

}  // namespace

JumpEnsembleResult simulate_jump_ensemble(const PureState& psi0, const JumpModel& model,
                                          const JumpEnsembleConfig& cfg) {
  JumpRunner runner(psi0, model, cfg);
  JumpEnsembleResult result;
  std::vector<Record> batch(kBatch);
#ifdef _OPENMP
  const int workers = cfg.workers > 0 ? cfg.workers : omp_get_max_threads();
#endif
  for (std::size_t start = 0; start < cfg.n_traj; start += kBatch) {
    const std::size_t count = std::min(kBatch, cfg.n_traj - start);
    const auto n = static_cast<long>(count);
#pragma omp parallel for schedule(dynamic, 1) num_threads(workers)
    for (long i = 0; i < n; ++i) {
      batch[static_cast<std::size_t>(i)] = runner.run_one(start + static_cast<std::size_t>(i));
    }
    for (std::size_t i = 0; i < count; ++i) runner.fold(result, start + i, std::move(batch[i]));
  }
  runner.finish(result);
  return result;
}

namespace reference {

JumpEnsembleResult simulate_jump_ensemble(const PureState& psi0, const JumpModel& model,
                                          const JumpEnsembleConfig& cfg) {
  JumpRunner runner(psi0, model, cfg);
  JumpEnsembleResult result;
  for (std::size_t j = 0; j < cfg.n_traj; ++j) runner.fold(result, j, runner.run_one(j));
  runner.finish(result);
  return result;
}

}  // namespace reference
}  // namespace chaos_anneal::hilbert
