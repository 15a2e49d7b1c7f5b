#include <algorithm>
#include <exception>
#include <cmath>
#include <optional>

#include "chaos_anneal/errors.hpp"
#include "chaos_anneal/langevin.hpp"
#include "chaos_anneal/langevin_kernel.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace chaos_anneal::langevin {
namespace {

// Trajectories per parallel batch. Fixed so the reduction order never depends on workers.
constexpr std::size_t kBatch = 32;

struct TrajectoryRecord {
  std::vector<ObservableRow> rows;
  std::vector<complex> snap_a;
  std::vector<complex> snap_b;
  std::optional<Trajectory> full;
  std::optional<double> diverged_at;
  std::exception_ptr error;
};

class EnsembleRunner {
 public:
  EnsembleRunner(const model::DimensionlessParams& d, const NoiseConfig& noise,
                 const EnsembleConfig& cfg)
      : cfg_(cfg), kernel_(d, noise, cfg.integration) {
    d.validate();
    cfg.integration.validate();
    if (cfg.n_traj == 0) throw InvalidParameter("ensemble needs at least one trajectory");
    const double sample_dt = cfg.integration.dt * static_cast<double>(cfg.integration.stride);
    for (double t : cfg.snapshot_times) {
      const double k = std::round(t / sample_dt);
      if (k < 0.0 || std::abs(k * sample_dt - t) > 1e-6 * sample_dt ||
          static_cast<std::size_t>(k) >= kernel_.samples()) {
        throw InvalidParameter("snapshot time " + std::to_string(t) + " is not on the sampled grid");
      }
      snapshot_index_.push_back(static_cast<std::size_t>(k));
    }
  }

  EnsembleResult make_empty() const {
    EnsembleResult r;
    r.times.resize(kernel_.samples());
    for (std::size_t k = 0; k < r.times.size(); ++k) {
      r.times[k] = static_cast<double>(k * cfg_.integration.stride) * cfg_.integration.dt;
    }
    r.moments.resize(kernel_.samples());
    for (std::size_t i = 0; i < snapshot_index_.size(); ++i) {
      Snapshot s;
      s.time = cfg_.snapshot_times[i];
      s.sample_index = snapshot_index_[i];
      r.snapshots.push_back(std::move(s));
    }
    return r;
  }

  TrajectoryRecord run_one(std::size_t j) const {
    TrajectoryRecord rec;
    rec.rows.reserve(kernel_.samples());
    rec.snap_a.resize(snapshot_index_.size());
    if (cfg_.keep_b_snapshots) rec.snap_b.resize(snapshot_index_.size());
    const bool keep_full = j < cfg_.keep_trajectories;
    if (keep_full) rec.full.emplace();
    try {
      kernel_.run(cfg_.initial, j, [&](std::size_t k, double t, const PhaseState& s) {
        rec.rows.push_back(observables_of(s));
        for (std::size_t i = 0; i < snapshot_index_.size(); ++i) {
          if (snapshot_index_[i] == k) {
            rec.snap_a[i] = s.a;
            if (cfg_.keep_b_snapshots) rec.snap_b[i] = s.b;
          }
        }
        if (keep_full) {
          rec.full->times.push_back(t);
          rec.full->states.push_back(s);
        }
      });
    } catch (const DivergenceError& e) {
      rec.diverged_at = e.last_valid_time();
    } catch (...) {
      rec.error = std::current_exception();
    }
    return rec;
  }

  /// Adds one trajectory to the result. Must be called in trajectory-index order.
  void fold(EnsembleResult& r, std::size_t j, TrajectoryRecord&& rec) const {
    if (rec.error) std::rethrow_exception(rec.error);
    if (rec.diverged_at) {
      r.divergent.push_back({j, *rec.diverged_at});
      if (!cfg_.drop_divergent) {
        throw DivergenceError("trajectory " + std::to_string(j) + " diverged", *rec.diverged_at);
      }
      return;
    }
    for (std::size_t k = 0; k < rec.rows.size(); ++k) r.moments[k].add(rec.rows[k]);
    for (std::size_t i = 0; i < r.snapshots.size(); ++i) {
      r.snapshots[i].a.push_back(rec.snap_a[i]);
      if (cfg_.keep_b_snapshots) r.snapshots[i].b.push_back(rec.snap_b[i]);
    }
    if (rec.full) r.sample_trajectories.push_back(std::move(*rec.full));
  }

  const EnsembleConfig& config() const noexcept { return cfg_; }

 private:
  EnsembleConfig cfg_;
  detail::TrajectoryKernel kernel_;
  std::vector<std::size_t> snapshot_index_;
};

}  // namespace

EnsembleResult simulate_ensemble(const model::DimensionlessParams& d, const NoiseConfig& noise,
                                 const EnsembleConfig& cfg) {
  const EnsembleRunner runner(d, noise, cfg);
  EnsembleResult result = runner.make_empty();
  std::vector<TrajectoryRecord> batch(kBatch);
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
  return result;
}

namespace reference {

EnsembleResult simulate_ensemble(const model::DimensionlessParams& d, const NoiseConfig& noise,
                                 const EnsembleConfig& cfg) {
  const EnsembleRunner runner(d, noise, cfg);
  EnsembleResult result = runner.make_empty();
  for (std::size_t j = 0; j < cfg.n_traj; ++j) runner.fold(result, j, runner.run_one(j));
  return result;
}

}  // namespace reference
}  // namespace chaos_anneal::langevin
