// Runs the acceptance criteria and prints one PASS/FAIL line per criterion.
// Usage: acceptance [criterion numbers...]   (no arguments runs all nine)

#include <CLI11.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>

#include "../test_support.hpp"
#include "chaos_anneal/analysis.hpp"
#include "chaos_anneal/cli.hpp"
#include "chaos_anneal/hilbert.hpp"
#include "chaos_anneal/io.hpp"
#include "chaos_anneal/langevin.hpp"
#include "chaos_anneal/meanfield.hpp"
#include "chaos_anneal/model.hpp"
#include "chaos_anneal/wigner.hpp"

using namespace chaos_anneal;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;

// Pinned tolerances and run sizes.
namespace pin {
constexpr double kGammaRel = 1e-3;  // 1.000e-7 to the quoted digits
constexpr double kKappaAbs = 1e-4;
constexpr double kChiAbs = 0.005e-9;
constexpr double kDriveAbs = 30.0;
constexpr double kLinearRel = 1e-6;
constexpr double kSigmas = 5.0;
constexpr std::size_t kEnsemble = 10000;
constexpr double kScalingRel = 1e-6;
constexpr double kSidebandRatio = 1e-2;
constexpr double kNoisyRelStd = 0.10;
constexpr double kBaselineRelStd = 0.30;
constexpr double kOverlap = 0.90;
constexpr double kOverlapBins = 3.0;
constexpr double kWignerVacuum = 1e-8;
constexpr double kWignerPhoton = 1e-6;
constexpr double kWignerQuadrature = 1e-6;
constexpr double kWignerNorm = 1e-3;
constexpr double kTruncation = 1e-4;
// Criterion 8 has no stated number: the ensemble mean must fluctuate less than half
// as much over the late window as a typical single trajectory.
constexpr double kFluctuationRatio = 0.5;
// Negativity must clear this multiple of the rounding bound eps * sum|rho_mn| / pi of the Wigner sum.
constexpr double kRoundingMargin = 1e3;
}  // namespace pin

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    detail << (detail.tellp() > 0 ? "; " : "") << what << (ok ? "" : " [failed]");
  }
};

std::string num(double v) {
  std::ostringstream s;
  s.precision(4);
  s << v;
  return s.str();
}

model::DimensionlessParams lab_params(double coupling_hz, double delta) {
  auto d = model::to_dimensionless(test_support::lab_physical(coupling_hz));
  d.delta = delta;
  return d;
}

// Detuning used for the strong-coupling semiclassical runs: the quoted parameter set
// leaves it unspecified and the mean-field orbit is chaotic here.
constexpr double kChaosDelta = -3.0;

void criterion1(Verdict& v) {
  const auto d = model::to_dimensionless(test_support::lab_physical());
  v.require(std::abs(d.gamma / 1e-7 - 1.0) < pin::kGammaRel, "gamma=" + num(d.gamma));
  v.require(std::abs(d.kappa - 0.4190) <= pin::kKappaAbs, "kappa=" + num(d.kappa));
  v.require(std::abs(d.chi - 3.095e-9) <= pin::kChiAbs, "chi=" + num(d.chi));
  v.require(std::abs(d.drive - 26404.0) <= pin::kDriveAbs, "E=" + num(d.drive));
}

void criterion2(Verdict& v) {
  // (a) closed-form relaxation a(t) = a* + (a0 - a*) exp((-kappa + i delta) t)
  {
    model::DimensionlessParams d;
    d.delta = -0.7;
    d.kappa = 0.41905;
    d.gamma = 1e-7;
    d.drive = 2.0;
    meanfield::IntegrationOptions o;
    o.t_end = 40.0;
    o.dt = 1e-3;
    o.stride = 100;
    const complex a0(0.3, -0.2);
    const auto tr = meanfield::integrate_meanfield(d, {a0, 0.0}, o);
    const complex star = d.drive / complex(d.kappa, -d.delta);
    double worst = 0.0;
    for (std::size_t k = 0; k < tr.times.size(); ++k) {
      const complex want = star + (a0 - star) * std::exp(complex(-d.kappa, d.delta) * tr.times[k]);
      worst = std::max(worst, std::abs(tr.states[k].a - want) / std::abs(want));
    }
    v.require(worst < pin::kLinearRel, "(a) mean-field rel err " + num(worst));
  }
  // (b) stationary spread of the cavity amplitude
  {
    model::DimensionlessParams d;
    d.delta = -0.5;
    d.kappa = 0.41905;
    d.gamma = 1e-7;
    d.drive = 2.0;
    d.n_bar_a = 0.7;
    langevin::EnsembleConfig cfg;
    cfg.n_traj = pin::kEnsemble;
    cfg.integration.t_end = 25.0;
    cfg.integration.dt = 1e-3;
    cfg.integration.stride = 1000;
    const auto r = langevin::simulate_ensemble(d, {d.n_bar_a, 0.0, 2024, true}, cfg);
    const std::size_t last = r.times.size() - 1;
    const double var = r.variance_a(last);
    // |a - <a>|^2 is exponential for a complex Gaussian, so its standard error is var / sqrt(N).
    const double se = var / std::sqrt(static_cast<double>(cfg.n_traj));
    v.require(std::abs(var - (d.n_bar_a + 0.5)) < pin::kSigmas * se,
              "(b) var a=" + num(var) + " want " + num(d.n_bar_a + 0.5) + " se " + num(se));
  }
  // (c) single-photon decay
  {
    model::DimensionlessParams d;
    d.kappa = 0.41905;
    d.gamma = 1e-7;
    const hilbert::FockDims dims{3, 2};
    const hilbert::JumpModel m(d, dims);
    hilbert::JumpEnsembleConfig cfg;
    cfg.n_traj = pin::kEnsemble;
    cfg.seed = 99;
    cfg.trajectory.t_end = 5.0;
    cfg.trajectory.dt = 5e-3;
    cfg.trajectory.stride = 100;
    const auto r = hilbert::simulate_jump_ensemble(hilbert::PureState::fock(dims, 1, 0), m, cfg);
    double worst = 0.0;
    bool ok = true;
    for (std::size_t k = 1; k < r.times.size(); ++k) {
      const double want = std::exp(-2.0 * d.kappa * r.times[k]);
      const double z = std::abs(r.mean_n_a[k] - want) / r.stderr_n_a[k];
      worst = std::max(worst, z);
      ok = ok && z < pin::kSigmas;
    }
    v.require(ok, "(c) worst |dev|/se " + num(worst) + " over " + std::to_string(r.times.size() - 1) + " times");
  }
}

void criterion3(Verdict& v) {
  model::DimensionlessParams d;
  d.delta = -0.5;
  d.kappa = 0.5;
  d.gamma = 0.1;
  d.g = 0.3;
  d.chi = 0.1;
  d.drive = 0.6;
  const hilbert::FockDims dims{3, 4};
  const hilbert::JumpModel m(d, dims);
  hilbert::JumpEnsembleConfig cfg;
  cfg.n_traj = pin::kEnsemble;
  cfg.seed = 314159;
  cfg.trajectory.t_end = 10.0;
  cfg.trajectory.dt = 5e-3;
  cfg.trajectory.stride = 200;
  const auto psi0 = hilbert::PureState::vacuum(dims);
  const auto ens = hilbert::simulate_jump_ensemble(psi0, m, cfg);
  const std::vector<hilbert::PureState> s{psi0};
  const auto oracle =
      hilbert::integrate_master_oracle(hilbert::accumulate_density_matrix(s), d, dims, 10.0, 1e-3, 1000);
  double worst = 0.0;
  int compared = 0;
  for (std::size_t k = 1; k < ens.times.size(); ++k) {
    const double want = hilbert::expectation_value(oracle.states[k], m.number_a()).real();
    worst = std::max(worst, std::abs(ens.mean_n_a[k] - want) / ens.stderr_n_a[k]);
    ++compared;
  }
  v.require(compared == 10, std::to_string(compared) + " sample times");
  v.require(worst < pin::kSigmas, "worst |dev|/se " + num(worst));
}

double scaling_error(const model::DimensionlessParams& d, double s, double t_end) {
  meanfield::IntegrationOptions o;
  o.t_end = t_end;
  o.dt = 1e-3;
  o.stride = 100;
  const PhaseState s0{complex(10.0, 0.0), complex(0.0, 0.0)};
  const auto base = meanfield::integrate_meanfield(d, s0, o);
  const auto ds = model::apply_scaling(d, model::ScalingTransform(s));
  const auto scaled = meanfield::integrate_meanfield(ds, {s0.a / s, s0.b / s}, o);
  double worst = 0.0;
  for (std::size_t k = 0; k < base.times.size(); ++k) {
    const double scale = std::hypot(std::abs(base.states[k].a), std::abs(base.states[k].b));
    const double diff = std::hypot(std::abs(scaled.states[k].a * s - base.states[k].a),
                                   std::abs(scaled.states[k].b * s - base.states[k].b));
    worst = std::max(worst, diff / scale);
  }
  return worst;
}

// Gated on the weak-coupling set, whose orbit is regular. On the chaotic set the last-bit
// rounding of E/s and s^2 chi is amplified at the Lyapunov rate, so that run is reported only.
void criterion4(Verdict& v) {
  const auto weak = lab_params(1.0, kChaosDelta);
  for (double s : {5.0, 25.0}) {
    const double err = scaling_error(weak, s, 100.0);
    v.require(err < pin::kScalingRel, "weak coupling s=" + num(s) + " rel err " + num(err));
  }
  const auto strong = lab_params(25.0, kChaosDelta);
  v.detail << "; info: chaotic set s=5 rel err " << num(scaling_error(strong, 5.0, 40.0)) << " to t=40, "
           << num(scaling_error(strong, 5.0, 100.0)) << " to t=100";
}

// Shared by criteria 5 and 6.
struct AnnealRuns {
  langevin::EnsembleResult hot, cold;
  Trajectory baseline;
  double t_mid = 0.0;
};

std::optional<AnnealRuns> g_anneal;

const AnnealRuns& anneal_runs() {
  if (g_anneal) return *g_anneal;
  const double t_end = 395.84;
  AnnealRuns runs;
  runs.t_mid = 0.5 * t_end;
  const auto d = lab_params(25.0, kChaosDelta);
  langevin::EnsembleConfig cfg;
  cfg.n_traj = pin::kEnsemble;
  cfg.integration.t_end = t_end;
  cfg.integration.dt = 1e-3;
  cfg.integration.stride = 10;
  cfg.snapshot_times = {t_end};
  runs.hot = langevin::simulate_ensemble(d, {0.0, 1e7, 7, true}, cfg);
  cfg.snapshot_times.clear();
  runs.cold = langevin::simulate_ensemble(d, {0.0, 0.1, 7, true}, cfg);
  runs.baseline = meanfield::integrate_meanfield(d, {}, cfg.integration);
  g_anneal = std::move(runs);
  return *g_anneal;
}

double relative_std(const std::vector<double>& t, const std::vector<double>& x, double t_start) {
  double n = 0.0, sum = 0.0, sq = 0.0;
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (t[k] < t_start) continue;
    n += 1.0;
    sum += x[k];
    sq += x[k] * x[k];
  }
  const double mean = sum / n;
  return std::sqrt(std::max(0.0, sq / n - mean * mean)) / mean;
}

void criterion5(Verdict& v) {
  const auto& r = anneal_runs();
  analysis::BandSpec band;
  // The mechanical line sits at omega ~ 1; skip the leakage skirt around DC.
  band.min_fundamental = 0.5;
  const auto hot = analysis::split_window_spectra(r.hot.times, r.hot.mean_intensity_series(), r.t_mid).second;
  const auto cold = analysis::split_window_spectra(r.cold.times, r.cold.mean_intensity_series(), r.t_mid).second;
  const double w0 = analysis::find_fundamental(cold, band);
  const double ratio = analysis::sideband_suppression_ratio(cold, hot, band);
  v.require(ratio <= pin::kSidebandRatio, "(a) sideband ratio " + num(ratio) + " (fundamental " + num(w0) + ")");

  const double hot_std = relative_std(r.hot.times, r.hot.mean_intensity_series(), r.t_mid);
  std::vector<double> base_i;
  for (const auto& s : r.baseline.states) base_i.push_back(std::norm(s.a));
  const double base_std = relative_std(r.baseline.times, base_i, r.t_mid);
  v.require(hot_std < pin::kNoisyRelStd, "(b) noisy rel std " + num(hot_std));
  v.require(base_std > pin::kBaselineRelStd, "mean-field rel std " + num(base_std));

  // Diagnostics only: how regular the reference run already is, and suppression against mean field.
  const auto base_spec = analysis::split_window_spectra(r.baseline.times, base_i, r.t_mid).second;
  v.detail << "; info: n_b=0.1 rel std " << num(relative_std(r.cold.times, r.cold.mean_intensity_series(), r.t_mid))
           << ", ratio vs mean field " << num(analysis::sideband_suppression_ratio(base_spec, hot, band))
           << ", n_b=0.1 vs mean field " << num(analysis::sideband_suppression_ratio(base_spec, cold, band));
}

void criterion6(Verdict& v) {
  const auto& r = anneal_runs();
  std::vector<complex> attractor;
  for (std::size_t k = 0; k < r.baseline.times.size(); ++k) {
    if (r.baseline.times[k] >= r.t_mid) attractor.push_back(r.baseline.states[k].a);
  }
  const auto& snap = r.hot.snapshots.back();
  const auto spec = langevin::default_histogram_spec(attractor, snap.a);
  const auto hist = langevin::phase_space_histogram(snap.a, spec);
  const double overlap = langevin::attractor_overlap(hist, attractor, pin::kOverlapBins * spec.h);
  v.require(overlap >= pin::kOverlap, "overlap " + num(overlap) + " at t=" + num(snap.time) + ", h=" + num(spec.h));
}

// Independent Fock wavefunctions from the normalised three-term recurrence.
double psi(int n, double x) {
  double prev = 0.0, cur = std::pow(kPi, -0.25) * std::exp(-0.5 * x * x);
  for (int k = 0; k < n; ++k) {
    const double next = std::sqrt(2.0 / (k + 1)) * x * cur - std::sqrt(static_cast<double>(k) / (k + 1)) * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

void criterion7(Verdict& v) {
  wigner::GridSpec g;
  g.x_min = g.p_min = -6.0;
  g.x_max = g.p_max = 6.0;
  g.nx = g.np = 121;
  auto fock = [](std::size_t n) {
    const auto s = hilbert::PureState::fock({8, 1}, n, 0);
    return hilbert::DensityMatrix{s.amplitudes() * s.amplitudes().adjoint()};
  };
  const auto vac = wigner::wigner_from_density(fock(0), g);
  const auto one = wigner::wigner_from_density(fock(1), g);
  v.require(std::abs(vac.at(60, 60) - 1.0 / kPi) <= pin::kWignerVacuum, "W_vac(0,0) err " + num(vac.at(60, 60) - 1.0 / kPi));
  v.require(std::abs(one.at(60, 60) + 1.0 / kPi) <= pin::kWignerPhoton, "W_1(0,0) err " + num(one.at(60, 60) + 1.0 / kPi));

  using boost::math::quadrature::gauss_kronrod;
  double worst = 0.0;
  const double pts[] = {-1.5, -0.4, 0.0, 0.9};
  for (int m = 0; m <= 6; ++m) {
    for (int n = 0; n <= 6; ++n) {
      for (double x : pts) {
        for (double p : pts) {
          auto f = [&](double y, bool imag) {
            const double phase = 2.0 * p * y;
            return psi(m, x - y) * psi(n, x + y) * (imag ? std::sin(phase) : std::cos(phase));
          };
          const double re = gauss_kronrod<double, 61>::integrate([&](double y) { return f(y, false); }, -12.0, 12.0, 15, 1e-13);
          const double im = gauss_kronrod<double, 61>::integrate([&](double y) { return f(y, true); }, -12.0, 12.0, 15, 1e-13);
          worst = std::max(worst, std::abs(wigner::wigner_basis_element(m, n, x, p) - complex(re, im) / kPi));
        }
      }
    }
  }
  v.require(worst < pin::kWignerQuadrature, "Laguerre vs quadrature " + num(worst));

  // A mixed state with coherences across several levels.
  hilbert::DensityMatrix rho{hilbert::Dense::Zero(8, 8)};
  const auto coh = hilbert::PureState::coherent({8, 1}, complex(0.8, -0.5), 0.0);
  rho.entries = 0.6 * coh.amplitudes() * coh.amplitudes().adjoint() + 0.4 * fock(3).entries;
  double norm_err = 0.0;
  for (const auto* r : {&vac.normalization, &one.normalization}) norm_err = std::max(norm_err, std::abs(*r - 1.0));
  norm_err = std::max(norm_err, std::abs(wigner::wigner_from_density(rho, g).normalization - 1.0));
  v.require(norm_err < pin::kWignerNorm, "normalization err " + num(norm_err));
}

// Quantum run at desk scale: C1 and C2 of the strong-coupling set, g/omega_m = 0.381.
void criterion8(Verdict& v) {
  const auto strong = lab_params(25.0, 2.0);
  const auto d = model::apply_scaling(strong, model::ScalingTransform(0.381 / strong.g));
  const hilbert::FockDims dims{22, 128};
  const hilbert::JumpModel m(d, dims);
  hilbert::JumpEnsembleConfig cfg;
  cfg.n_traj = 128;
  cfg.seed = 2025;
  cfg.keep_trajectories = cfg.n_traj;
  cfg.trajectory.t_end = 28.0;
  cfg.trajectory.dt = 5e-3;
  cfg.trajectory.stride = 20;
  cfg.trajectory.snapshot_times = {cfg.trajectory.t_end};
  const auto r = hilbert::simulate_jump_ensemble(hilbert::PureState::vacuum(dims), m, cfg);
  v.require(r.max_top_a() < pin::kTruncation && r.max_top_b() < pin::kTruncation,
            "truncation a " + num(r.max_top_a()) + " b " + num(r.max_top_b()) + " (C1=" + num(d.c1()) +
                " C2=" + num(d.c2()) + " g=" + num(d.g) + ")");

  const double t_late = 0.5 * cfg.trajectory.t_end;
  auto temporal_variance = [&](const std::vector<double>& x) {
    double n = 0.0, s = 0.0, q = 0.0;
    for (std::size_t k = 0; k < r.times.size(); ++k) {
      if (r.times[k] < t_late) continue;
      n += 1.0;
      s += x[k];
      q += x[k] * x[k];
    }
    return q / n - (s / n) * (s / n);
  };
  double single = 0.0;
  for (const auto& t : r.sample_trajectories) single += temporal_variance(t.n_a);
  single /= static_cast<double>(r.sample_trajectories.size());
  const double mean = temporal_variance(r.mean_n_a);
  v.require(mean < pin::kFluctuationRatio * single,
            "(a) late variance of mean " + num(mean) + " vs single " + num(single) + ", ratio " + num(mean / single));

  const auto& rho_a = r.cavity_density.back();
  const auto w = wigner::wigner_from_density(rho_a, wigner::default_grid(dims.dim_a, 201));
  const double rounding = std::numeric_limits<double>::epsilon() * rho_a.entries.cwiseAbs().sum() / kPi;
  v.require(w.min_value < -pin::kRoundingMargin * rounding,
            "(b) min W " + num(w.min_value) + " (max " + num(w.max_value) + ", rounding bound " + num(rounding) +
                ") at t=" + num(cfg.trajectory.t_end));
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void criterion9(Verdict& v) {
  const fs::path dir = fs::temp_directory_path() / "chaos_anneal_acceptance_replay";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string params =
      "[params]\ndelta = -0.5\nkappa = 0.4\ngamma = 0.1\ng = 0.3\nchi = 0.1\ndrive = 0.6\nn_bar_b = 2\n";
  const std::map<std::string, std::string> configs{
      {"langevin", params + "[solver]\nt_end = 10\ndt = 0.001\nstride = 50\nn_traj = 100\nsnapshot_times = 5,10\n"
                            "keep_trajectories = 2\n[run]\nseed = 17\n"},
      {"qjump", params + "[solver]\nt_end = 4\ndt = 0.01\nstride = 10\ndim_a = 5\ndim_b = 6\nn_traj = 60\n"
                         "snapshot_times = 4\nkeep_trajectories = 2\n[run]\nseed = 17\n"}};
  std::size_t compared = 0;
  for (const auto& [command, body] : configs) {
    const auto cfg = dir / (command + ".ini");
    std::ofstream(cfg) << body;
    std::ostringstream out, err;
    const auto first = dir / (command + "_w1");
    const auto second = dir / (command + "_w4");
    const int s1 = cli::run({command, "--config", cfg.string(), "--out", first.string(), "--workers", "1"}, out, err);
    const int s2 = cli::run({"replay", (first / "manifest.ini").string(), "--out", second.string(), "--workers", "4"},
                            out, err);
    v.require(s1 == 0 && s2 == 0, command + " run and replay" + (s1 == 0 && s2 == 0 ? "" : ": " + err.str()));
    for (const auto& e : fs::directory_iterator(first)) {
      const auto name = e.path().filename();
      if (name == "manifest.ini") continue;
      ++compared;
      if (slurp(first / name) != slurp(second / name)) v.require(false, command + "/" + name.string() + " differs");
    }
  }
  v.require(compared > 0, std::to_string(compared) + " data files byte-identical across workers {1,4}");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::vector<int> only;
  app.add_option("criteria", only, "criterion numbers to run (default: all)")->check(CLI::Range(1, 9));
  CLI11_PARSE(app, argc, argv);
  const std::vector<std::function<void(Verdict&)>> all{criterion1, criterion2, criterion3, criterion4, criterion5,
                                                        criterion6, criterion7, criterion8, criterion9};
  std::set<int> selected(only.begin(), only.end());
  if (selected.empty()) for (int i = 1; i <= 9; ++i) selected.insert(i);

  int failures = 0;
  for (int i : selected) {
    Verdict v;
    const auto start = std::chrono::steady_clock::now();
    try {
      all[static_cast<std::size_t>(i - 1)](v);
    } catch (const std::exception& e) {
      v.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failures += v.pass ? 0 : 1;
    std::cout << "CRITERION " << i << ": " << (v.pass ? "PASS" : "FAIL") << " (" << num(secs) << " s) "
              << v.detail.str() << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
