#include "chaos_anneal/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <optional>
#include <set>
#include <span>

#include "chaos_anneal/analysis.hpp"
#include "chaos_anneal/errors.hpp"
#include "chaos_anneal/hilbert.hpp"
#include "chaos_anneal/io.hpp"
#include "chaos_anneal/langevin.hpp"
#include "chaos_anneal/meanfield.hpp"
#include "chaos_anneal/model.hpp"
#include "chaos_anneal/wigner.hpp"

#ifndef CHAOS_ANNEAL_VERSION
#define CHAOS_ANNEAL_VERSION "unknown"
#endif

namespace chaos_anneal::cli {
namespace fs = std::filesystem;
using io::Ini;

namespace {

const std::set<std::string> kCommands{"meanfield", "langevin", "qjump", "spectrum", "wigner"};

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> dims;
  std::optional<double> dt;
  std::optional<double> t_end;
  std::optional<std::uint64_t> n_traj;
};

// Reads typed values out of one section, records defaults, and rejects unknown keys.
class Section {
 public:
  Section(Ini& ini, const std::string& name) : ini_(ini), name_(name) {}

  bool has(const std::string& key) const {
    const auto it = ini_.find(name_);
    return it != ini_.end() && it->second.count(key) > 0;
  }
  std::string raw(const std::string& key) {
    used_.insert(key);
    if (!has(key)) throw ConfigError(key, "missing required key in [" + name_ + "]");
    return ini_[name_][key];
  }
  std::string text(const std::string& key, const std::string& fallback) {
    if (!has(key)) ini_[name_][key] = fallback;
    return raw(key);
  }
  double number(const std::string& key) { return io::parse_double(raw(key), key); }
  double number(const std::string& key, double fallback) {
    if (!has(key)) ini_[name_][key] = io::format_double(fallback);
    return number(key);
  }
  std::uint64_t count(const std::string& key) { return io::parse_unsigned(raw(key), key); }
  std::uint64_t count(const std::string& key, std::uint64_t fallback) {
    if (!has(key)) ini_[name_][key] = std::to_string(fallback);
    return count(key);
  }
  bool flag(const std::string& key, bool fallback) {
    if (!has(key)) ini_[name_][key] = fallback ? "true" : "false";
    return io::parse_bool(raw(key), key);
  }
  std::vector<double> list(const std::string& key) {
    if (!has(key)) ini_[name_][key] = "";
    return io::parse_double_list(raw(key), key);
  }
  complex complex_value(const std::string& key) {
    if (!has(key)) ini_[name_][key] = "0,0";
    const auto v = io::parse_double_list(raw(key), key);
    if (v.size() != 2) throw ConfigError(key, "expected 're,im'");
    return {v[0], v[1]};
  }
  void finish() const {
    const auto it = ini_.find(name_);
    if (it == ini_.end()) return;
    for (const auto& [key, value] : it->second) {
      if (!used_.count(key)) throw ConfigError(key, "unknown key in [" + name_ + "]");
    }
  }

 private:
  Ini& ini_;
  std::string name_;
  std::set<std::string> used_;
};

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + io::format_double(v[i]);
  return s;
}

model::DimensionlessParams resolve_params(Ini& ini) {
  Section s(ini, "params");
  const std::string units = s.text("units", "dimensionless");
  model::DimensionlessParams d;
  if (units == "dimensionless") {
    d.delta = s.number("delta");
    d.kappa = s.number("kappa");
    d.gamma = s.number("gamma");
    d.g = s.number("g");
    d.chi = s.number("chi");
    d.drive = s.number("drive");
    d.n_bar_a = s.number("n_bar_a", 0.0);
    d.n_bar_b = s.number("n_bar_b", 0.0);
  } else if (units == "physical") {
    model::PhysicalParams p;
    p.detuning_hz = s.number("delta_hz");
    p.omega_m_hz = s.number("omega_m_hz");
    p.quality_factor = s.number("quality_factor");
    p.input_power_w = s.number("input_power_w");
    p.kerr_chi_hz = s.number("kerr_chi_hz");
    p.kappa_hz = s.number("kappa_hz");
    p.kappa_in_hz = s.number("kappa_in_hz");
    p.drive_frequency_hz = s.number("drive_frequency_hz");
    p.coupling_g_hz = s.number("coupling_g_hz");
    if (s.has("bath_temperature_k")) p.bath_temperature_k = s.number("bath_temperature_k");
    if (s.has("n_bar_a")) p.n_bar_a = s.number("n_bar_a");
    if (s.has("n_bar_b")) p.n_bar_b = s.number("n_bar_b");
    d = model::to_dimensionless(p);
  } else {
    throw ConfigError("units", "expected 'dimensionless' or 'physical'");
  }
  const double scale = s.number("scale", 1.0);
  s.finish();
  if (scale != 1.0) d = model::apply_scaling(d, model::ScalingTransform(scale));
  return d;
}

void echo_dimensionless(Ini& manifest, const model::DimensionlessParams& d) {
  auto& r = manifest["dimensionless"];
  r["delta"] = io::format_double(d.delta);
  r["kappa"] = io::format_double(d.kappa);
  r["gamma"] = io::format_double(d.gamma);
  r["g"] = io::format_double(d.g);
  r["chi"] = io::format_double(d.chi);
  r["drive"] = io::format_double(d.drive);
  r["n_bar_a"] = io::format_double(d.n_bar_a);
  r["n_bar_b"] = io::format_double(d.n_bar_b);
  r["c1"] = io::format_double(d.c1());
  r["c2"] = io::format_double(d.c2());
}

std::vector<std::string> param_comments(const model::DimensionlessParams& d) {
  return {"delta=" + io::format_double(d.delta) + " kappa=" + io::format_double(d.kappa) +
          " gamma=" + io::format_double(d.gamma) + " g=" + io::format_double(d.g) +
          " chi=" + io::format_double(d.chi) + " drive=" + io::format_double(d.drive) +
          " n_bar_a=" + io::format_double(d.n_bar_a) + " n_bar_b=" + io::format_double(d.n_bar_b)};
}

// Smaller of the two bounding-box side lengths.
double extent(std::span<const complex> z) {
  if (z.empty()) return 0.0;
  double x0 = z[0].real(), x1 = x0, p0 = z[0].imag(), p1 = p0;
  for (const complex& v : z) {
    x0 = std::min(x0, v.real());
    x1 = std::max(x1, v.real());
    p0 = std::min(p0, v.imag());
    p1 = std::max(p1, v.imag());
  }
  return std::min(x1 - x0, p1 - p0);
}

std::string snapshot_tag(std::size_t i) { return std::to_string(i); }

// Everything a command needs besides the resolved configuration.
struct Context {
  fs::path out_dir;
  fs::path config_dir;
  int workers = 0;
  std::ostream& log;
  std::vector<std::string> outputs;
  Ini results;  // extra manifest sections (monitors, metrics)
  bool failed = false;
};

fs::path resolve_path(const Context& ctx, Section& s, const std::string& key) {
  fs::path p = s.raw(key);
  if (p.is_relative()) p = fs::absolute(ctx.config_dir / p);
  return p.lexically_normal();
}

std::uint64_t resolve_seed(Ini& ini) {
  Section run(ini, "run");
  const auto seed = run.count("seed", 0);
  run.finish();
  return seed;
}

meanfield::IntegrationOptions integration(Section& s, double default_dt) {
  meanfield::IntegrationOptions o;
  o.t_end = s.number("t_end");
  o.dt = s.number("dt", default_dt);
  o.stride = s.count("stride", 1);
  return o;
}

void write_trajectory_csv(const fs::path& path, const Trajectory& tr, const model::DimensionlessParams& d) {
  io::CsvWriter w(path, {"t", "re_a", "im_a", "re_b", "im_b", "intensity"}, param_comments(d));
  for (std::size_t k = 0; k < tr.times.size(); ++k) {
    const auto& s = tr.states[k];
    w.row({tr.times[k], s.a.real(), s.a.imag(), s.b.real(), s.b.imag(), std::norm(s.a)});
  }
}

void run_meanfield(Ini& ini, Context& ctx) {
  const auto d = resolve_params(ini);
  Section s(ini, "solver");
  const auto opts = integration(s, 1e-3);
  const PhaseState s0{s.complex_value("initial_a"), s.complex_value("initial_b")};
  s.finish();
  resolve_seed(ini);
  echo_dimensionless(ctx.results, d);
  const Trajectory tr = meanfield::integrate_meanfield(d, s0, opts);
  write_trajectory_csv(ctx.out_dir / "trajectory.csv", tr, d);
  ctx.outputs.push_back("trajectory.csv");
}

void run_langevin(Ini& ini, Context& ctx) {
  const auto d = resolve_params(ini);
  const auto seed = resolve_seed(ini);
  Section s(ini, "solver");
  langevin::EnsembleConfig cfg;
  cfg.integration = integration(s, 1e-3);
  cfg.n_traj = s.count("n_traj");
  cfg.initial = {s.complex_value("initial_a"), s.complex_value("initial_b")};
  cfg.snapshot_times = s.list("snapshot_times");
  cfg.keep_b_snapshots = s.flag("keep_b_snapshots", false);
  cfg.drop_divergent = s.flag("drop_divergent", false);
  cfg.keep_trajectories = s.count("keep_trajectories", 0);
  cfg.workers = ctx.workers;
  langevin::NoiseConfig noise{d.n_bar_a, d.n_bar_b, seed, s.flag("noise_enabled", true)};
  const bool baseline = s.flag("baseline", true);
  const double h_override = s.number("histogram_h", 0.0);
  const auto min_bins = s.count("histogram_min_bins", 100);
  const double overlap_bins = s.number("overlap_radius_bins", 3.0);
  s.finish();
  echo_dimensionless(ctx.results, d);

  const auto result = langevin::simulate_ensemble(d, noise, cfg);
  {
    io::CsvWriter w(ctx.out_dir / "ensemble.csv",
                    {"t", "mean_re_a", "mean_im_a", "mean_re_b", "mean_im_b", "mean_intensity", "photon_number",
                     "variance_a", "variance_b"},
                    param_comments(d));
    for (std::size_t k = 0; k < result.times.size(); ++k) {
      const auto a = result.mean_a(k);
      const auto b = result.mean_b(k);
      w.row({result.times[k], a.real(), a.imag(), b.real(), b.imag(), result.mean_intensity(k),
             result.photon_number(k), result.variance_a(k), result.variance_b(k)});
    }
    ctx.outputs.push_back("ensemble.csv");
  }
  for (std::size_t j = 0; j < result.sample_trajectories.size(); ++j) {
    const std::string name = "trajectory_" + std::to_string(j) + ".csv";
    write_trajectory_csv(ctx.out_dir / name, result.sample_trajectories[j], d);
    ctx.outputs.push_back(name);
  }

  // Mean-field run with the same drift parameters: reference attractor for histograms.
  std::vector<complex> attractor;
  if (baseline) {
    try {
      const auto tr = meanfield::integrate_meanfield(d, cfg.initial, cfg.integration);
      write_trajectory_csv(ctx.out_dir / "meanfield_baseline.csv", tr, d);
      ctx.outputs.push_back("meanfield_baseline.csv");
      for (std::size_t k = tr.times.size() / 2; k < tr.times.size(); ++k) attractor.push_back(tr.states[k].a);
    } catch (const Error& e) {
      ctx.log << "warning: mean-field baseline skipped: " << e.what() << '\n';
    }
  }

  for (std::size_t i = 0; i < result.snapshots.size(); ++i) {
    const auto& snap = result.snapshots[i];
    const std::string tag = snapshot_tag(i);
    {
      std::vector<std::string> cols{"index", "re_a", "im_a"};
      if (cfg.keep_b_snapshots) cols.insert(cols.end(), {"re_b", "im_b"});
      io::CsvWriter w(ctx.out_dir / ("snapshot_" + tag + ".csv"), cols, {"t=" + io::format_double(snap.time)});
      for (std::size_t j = 0; j < snap.a.size(); ++j) {
        if (cfg.keep_b_snapshots) {
          w.row({static_cast<double>(j), snap.a[j].real(), snap.a[j].imag(), snap.b[j].real(), snap.b[j].imag()});
        } else {
          w.row({static_cast<double>(j), snap.a[j].real(), snap.a[j].imag()});
        }
      }
      ctx.outputs.push_back("snapshot_" + tag + ".csv");
    }
    if (snap.a.size() < 2) continue;
    // A baseline far smaller than the sample cloud (a fixed point, say) would give absurdly
    // fine bins, so the samples set the width instead.
    const bool point_attractor = attractor.empty() || extent(attractor) < 0.1 * extent(snap.a);
    langevin::HistogramSpec spec = langevin::default_histogram_spec(
        point_attractor ? std::span<const complex>(snap.a) : std::span<const complex>(attractor), snap.a, min_bins);
    if (h_override > 0.0) {
      spec.h = h_override;
      spec.x_max = spec.x_min + std::ceil((spec.x_max - spec.x_min) / h_override) * h_override;
      spec.p_max = spec.p_min + std::ceil((spec.p_max - spec.p_min) / h_override) * h_override;
    }
    const auto hist = langevin::phase_space_histogram(snap.a, spec);
    {
      io::CsvWriter w(ctx.out_dir / ("histogram_" + tag + ".csv"), {"re_a", "im_a", "count", "density"});
      for (std::size_t ix = 0; ix < hist.nx; ++ix) {
        for (std::size_t ip = 0; ip < hist.np; ++ip) {
          const auto c = hist.count(ix, ip);
          if (c == 0) continue;
          w.row({hist.x_center(ix), hist.p_center(ip), static_cast<double>(c), hist.density[ix * hist.np + ip]});
        }
      }
    }
    Ini meta;
    auto& m = meta["histogram"];
    m["h"] = io::format_double(spec.h);
    m["x_min"] = io::format_double(spec.x_min);
    m["x_max"] = io::format_double(spec.x_max);
    m["p_min"] = io::format_double(spec.p_min);
    m["p_max"] = io::format_double(spec.p_max);
    m["n_samples"] = std::to_string(hist.n_samples);
    m["in_range"] = std::to_string(hist.in_range());
    m["seed"] = std::to_string(seed);
    m["time"] = io::format_double(snap.time);
    m["axes"] = "re_a,im_a (bin centres; sparse, empty bins omitted)";
    if (!attractor.empty()) {
      m["attractor_overlap"] = io::format_double(langevin::attractor_overlap(hist, attractor, overlap_bins * spec.h));
      m["overlap_radius"] = io::format_double(overlap_bins * spec.h);
    }
    io::write_ini(ctx.out_dir / ("histogram_" + tag + ".meta"), meta);
    ctx.outputs.push_back("histogram_" + tag + ".csv");
    ctx.outputs.push_back("histogram_" + tag + ".meta");
  }

  auto& r = ctx.results["ensemble"];
  r["used_trajectories"] = std::to_string(result.used_trajectories());
  r["divergent_trajectories"] = std::to_string(result.divergent.size());
  if (!result.divergent.empty()) {
    std::string list;
    for (const auto& dv : result.divergent) {
      list += (list.empty() ? "" : ",") + std::to_string(dv.trajectory) + "@" + io::format_double(dv.last_valid_time);
    }
    r["divergent"] = list;
    ctx.log << "error: " << result.divergent.size() << " trajectories diverged and were dropped\n";
    ctx.failed = true;
  }
}

void run_qjump(Ini& ini, Context& ctx) {
  const auto d = resolve_params(ini);
  const auto seed = resolve_seed(ini);
  Section s(ini, "solver");
  hilbert::JumpEnsembleConfig cfg;
  cfg.trajectory.t_end = s.number("t_end");
  cfg.trajectory.dt = s.number("dt", 1e-2);
  cfg.trajectory.stride = s.count("stride", 1);
  cfg.trajectory.snapshot_times = s.list("snapshot_times");
  cfg.trajectory.max_jump_probability = s.number("max_jump_probability", hilbert::kTargetJumpProbability);
  cfg.n_traj = s.count("n_traj");
  cfg.keep_trajectories = s.count("keep_trajectories", 0);
  cfg.full_density = s.flag("full_density", false);
  cfg.seed = seed;
  cfg.workers = ctx.workers;
  const hilbert::FockDims dims{s.count("dim_a"), s.count("dim_b")};
  const auto budget = s.count("budget", hilbert::kDefaultBudget);
  const std::string initial = s.text("initial", "vacuum");
  const complex alpha = s.complex_value("initial_a");
  const complex beta = s.complex_value("initial_b");
  s.finish();
  echo_dimensionless(ctx.results, d);

  const hilbert::JumpModel model(d, dims, budget);
  std::optional<hilbert::PureState> psi0;
  if (initial == "vacuum") psi0 = hilbert::PureState::vacuum(dims);
  else if (initial == "coherent") psi0 = hilbert::PureState::coherent(dims, alpha, beta);
  else throw ConfigError("initial", "expected 'vacuum' or 'coherent'");

  const auto result = hilbert::simulate_jump_ensemble(*psi0, model, cfg);
  const std::vector<std::string> basis{"basis index = n_a * dim_b + n_b (n_a outer)"};
  {
    auto comments = param_comments(d);
    comments.insert(comments.end(), basis.begin(), basis.end());
    io::CsvWriter w(ctx.out_dir / "expectations.csv", {"t", "n_a", "n_a_stderr", "n_b", "top_a", "top_b"}, comments);
    for (std::size_t k = 0; k < result.times.size(); ++k) {
      w.row({result.times[k], result.mean_n_a[k], result.stderr_n_a[k], result.mean_n_b[k], result.mean_top_a[k],
             result.mean_top_b[k]});
    }
    ctx.outputs.push_back("expectations.csv");
  }
  for (std::size_t j = 0; j < result.sample_trajectories.size(); ++j) {
    const auto& t = result.sample_trajectories[j];
    const std::string name = "qtrajectory_" + std::to_string(j) + ".csv";
    io::CsvWriter w(ctx.out_dir / name, {"t", "n_a", "n_b", "top_a", "top_b"});
    for (std::size_t k = 0; k < t.times.size(); ++k) w.row({t.times[k], t.n_a[k], t.n_b[k], t.top_a[k], t.top_b[k]});
    ctx.outputs.push_back(name);
  }
  for (std::size_t i = 0; i < result.cavity_density.size(); ++i) {
    const std::string tag = snapshot_tag(i);
    io::write_density_binary(ctx.out_dir / ("rho_a_" + tag + ".bin"), result.cavity_density[i], dims.dim_a, 1);
    ctx.outputs.push_back("rho_a_" + tag + ".bin");
    if (dims.dim_a <= 32) {
      io::write_density_csv(ctx.out_dir / ("rho_a_" + tag + ".csv"), result.cavity_density[i]);
      ctx.outputs.push_back("rho_a_" + tag + ".csv");
    }
    if (cfg.full_density) {
      io::write_density_binary(ctx.out_dir / ("rho_" + tag + ".bin"), result.full_density[i], dims.dim_a, dims.dim_b);
      ctx.outputs.push_back("rho_" + tag + ".bin");
    }
  }
  Ini meta;
  auto& m = meta["qjump"];
  m["seed"] = std::to_string(seed);
  m["dim_a"] = std::to_string(dims.dim_a);
  m["dim_b"] = std::to_string(dims.dim_b);
  m["basis"] = basis.front();
  m["dt"] = io::format_double(cfg.trajectory.dt);
  m["dt_policy"] = "base steps split so that 2 kappa dt <n_a> + 2 gamma dt <n_b> <= " +
                   io::format_double(cfg.trajectory.max_jump_probability);
  m["snapshot_times"] = join(cfg.trajectory.snapshot_times);
  m["max_top_a"] = io::format_double(result.max_top_a());
  m["max_top_b"] = io::format_double(result.max_top_b());
  m["truncation_warning"] = result.truncation_warning() ? "true" : "false";
  m["total_jumps"] = std::to_string(result.total_jumps);
  io::write_ini(ctx.out_dir / "qjump.meta", meta);
  ctx.outputs.push_back("qjump.meta");
  ctx.results["monitor"] = meta["qjump"];
  if (result.truncation_warning()) {
    ctx.log << "warning: top Fock-level population exceeds " << hilbert::kTruncationWarning
            << " (cavity " << result.max_top_a() << ", mechanics " << result.max_top_b() << ")\n";
  }
}

void write_spectrum(const fs::path& path, const analysis::Spectrum& sp) {
  io::CsvWriter w(path, {"omega", "S", "S_norm"},
                  {"window=[" + io::format_double(sp.window.t_start) + "," + io::format_double(sp.window.t_end) +
                   ") dt=" + io::format_double(sp.dt) + " samples=" + std::to_string(sp.n_samples) +
                   " omega in units of omega_m"});
  for (std::size_t i = 0; i < sp.frequencies.size(); ++i) w.row({sp.frequencies[i], sp.magnitude[i], sp.normalized[i]});
}

void run_spectrum(Ini& ini, Context& ctx) {
  Section s(ini, "spectrum");
  const fs::path input = resolve_path(ctx, s, "input");
  ini["spectrum"]["input"] = input.string();
  const std::string column = s.text("column", "mean_intensity");
  const std::string time_column = s.text("time_column", "t");
  analysis::SpectrumOptions opts;
  opts.hann = s.flag("hann", false);
  const bool split = s.has("t_mid");
  const double t_mid = split ? s.number("t_mid") : 0.0;
  std::optional<fs::path> reference;
  if (s.has("reference")) {
    reference = resolve_path(ctx, s, "reference");
    ini["spectrum"]["reference"] = reference->string();
  }
  analysis::BandSpec band;
  band.half_width = s.number("half_width", 0.1);
  band.min_fundamental = s.number("min_fundamental", 0.0);
  band.fundamental = s.number("fundamental", 0.0);
  const auto table = io::read_csv(input);
  const auto t = table.column(time_column);
  const auto x = table.column(column);
  if (t.empty()) throw ConfigError("input", "no rows in " + input.string());
  const double t_start = s.number("t_start", t.front());
  const double t_end = s.number("t_end", std::nextafter(t.back(), INFINITY));
  s.finish();
  resolve_seed(ini);

  auto spectrum_of = [&](const std::vector<double>& tt, const std::vector<double>& xx) {
    if (split) return analysis::split_window_spectra(tt, xx, t_mid, opts).second;
    return analysis::intensity_spectrum(tt, xx, {t_start, t_end}, opts);
  };
  Ini meta;
  auto& m = meta["spectrum"];
  m["input"] = input.string();
  m["column"] = column;
  if (split) {
    const auto [first, second] = analysis::split_window_spectra(t, x, t_mid, opts);
    write_spectrum(ctx.out_dir / "spectrum_first.csv", first);
    write_spectrum(ctx.out_dir / "spectrum_second.csv", second);
    ctx.outputs.push_back("spectrum_first.csv");
    ctx.outputs.push_back("spectrum_second.csv");
    m["t_mid"] = io::format_double(t_mid);
  } else {
    const auto sp = spectrum_of(t, x);
    write_spectrum(ctx.out_dir / "spectrum.csv", sp);
    ctx.outputs.push_back("spectrum.csv");
    m["t_start"] = io::format_double(t_start);
    m["t_end"] = io::format_double(t_end);
  }
  if (reference) {
    const auto rt = io::read_csv(*reference);
    const auto ref = spectrum_of(rt.column(time_column), rt.column(column));
    const auto test = spectrum_of(t, x);
    m["reference"] = reference->string();
    m["fundamental"] = io::format_double(analysis::find_fundamental(ref, band));
    m["sideband_suppression_ratio"] = io::format_double(analysis::sideband_suppression_ratio(ref, test, band));
  }
  io::write_ini(ctx.out_dir / "spectrum.meta", meta);
  ctx.outputs.push_back("spectrum.meta");
  ctx.results["spectrum"] = m;
}

void run_wigner(Ini& ini, Context& ctx) {
  Section s(ini, "wigner");
  const fs::path input = resolve_path(ctx, s, "input");
  ini["wigner"]["input"] = input.string();
  const auto file = io::read_density_binary(input);
  hilbert::DensityMatrix rho_a = file.rho;
  if (file.dim_b > 1) {
    rho_a = hilbert::partial_trace_cavity(file.rho, {file.dim_a, file.dim_b});
  }
  const auto def = wigner::default_grid(file.dim_a, 201);
  wigner::GridSpec g;
  g.x_min = s.number("x_min", def.x_min);
  g.x_max = s.number("x_max", def.x_max);
  g.nx = s.count("nx", def.nx);
  g.p_min = s.number("p_min", def.p_min);
  g.p_max = s.number("p_max", def.p_max);
  g.np = s.count("np", def.np);
  s.finish();
  resolve_seed(ini);
  const auto w = wigner::wigner_from_density(rho_a, g, ctx.workers);
  {
    io::CsvWriter out(ctx.out_dir / "wigner.csv", {"x", "p", "W"},
                      {"x = sqrt2 Re a, p = sqrt2 Im a; vacuum W = exp(-x^2 - p^2) / pi"});
    for (std::size_t i = 0; i < w.x_values.size(); ++i)
      for (std::size_t j = 0; j < w.p_values.size(); ++j) out.row({w.x_values[i], w.p_values[j], w.at(i, j)});
  }
  Ini meta;
  auto& m = meta["wigner"];
  m["input"] = input.string();
  m["min_value"] = io::format_double(w.min_value);
  m["max_value"] = io::format_double(w.max_value);
  m["negative_volume"] = io::format_double(w.negative_volume);
  m["normalization"] = io::format_double(w.normalization);
  m["support_warning"] = w.support_warning ? "true" : "false";
  io::write_ini(ctx.out_dir / "wigner.meta", meta);
  ctx.outputs.push_back("wigner.csv");
  ctx.outputs.push_back("wigner.meta");
  ctx.results["wigner"] = m;
  if (w.support_warning) ctx.log << "warning: Wigner grid does not capture the state's support\n";
}

void apply_overrides(Ini& ini, const Overrides& o) {
  if (o.seed) ini["run"]["seed"] = std::to_string(*o.seed);
  if (o.dt) ini["solver"]["dt"] = io::format_double(*o.dt);
  if (o.t_end) ini["solver"]["t_end"] = io::format_double(*o.t_end);
  if (o.n_traj) ini["solver"]["n_traj"] = std::to_string(*o.n_traj);
  if (o.dims) {
    const auto comma = o.dims->find(',');
    if (comma == std::string::npos) throw ConfigError("dims", "expected 'dim_a,dim_b'");
    ini["solver"]["dim_a"] = std::to_string(io::parse_unsigned(o.dims->substr(0, comma), "dims"));
    ini["solver"]["dim_b"] = std::to_string(io::parse_unsigned(o.dims->substr(comma + 1), "dims"));
  }
}

int resolve_workers(std::optional<int> flag, std::ostream& err) {
  if (flag) return std::max(0, *flag);
  if (const char* env = std::getenv("CHAOS_ANNEAL_WORKERS")) {
    try {
      return static_cast<int>(io::parse_unsigned(env, "CHAOS_ANNEAL_WORKERS"));
    } catch (const ConfigError&) {
      err << "warning: ignoring non-numeric CHAOS_ANNEAL_WORKERS='" << env << "'\n";
    }
  }
  return 0;
}

int execute(const std::string& command, Ini ini, const fs::path& out_dir, const fs::path& config_dir,
            int workers, std::ostream& out, std::ostream& err) {
  fs::create_directories(out_dir);
  Context ctx{out_dir, config_dir, workers, err, {}, {}, false};
  const std::set<std::string> allowed = [&]() -> std::set<std::string> {
    if (command == "spectrum") return {"spectrum", "run"};
    if (command == "wigner") return {"wigner", "run"};
    return {"params", "solver", "run"};
  }();
  for (const auto& [section, body] : ini) {
    if (!allowed.count(section)) throw ConfigError(section, "section not used by '" + command + "'");
  }
  if (command == "meanfield") run_meanfield(ini, ctx);
  else if (command == "langevin") run_langevin(ini, ctx);
  else if (command == "qjump") run_qjump(ini, ctx);
  else if (command == "spectrum") run_spectrum(ini, ctx);
  else run_wigner(ini, ctx);

  Ini manifest = ini;
  auto& m = manifest["manifest"];
  m["command"] = command;
  m["version"] = CHAOS_ANNEAL_VERSION;
  m["workers"] = std::to_string(workers);
  std::sort(ctx.outputs.begin(), ctx.outputs.end());
  std::string outputs;
  for (const auto& o : ctx.outputs) outputs += (outputs.empty() ? "" : ",") + o;
  m["outputs"] = outputs;
  m["status"] = ctx.failed ? "failed" : "ok";
  for (auto& [section, body] : ctx.results) manifest["result." + section] = body;
  io::write_ini(out_dir / "manifest.ini", manifest);
  out << command << ": wrote " << ctx.outputs.size() << " files to " << out_dir.string() << '\n';
  return ctx.failed ? 1 : 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Mean-field, Langevin and quantum-jump simulations of a Kerr optomechanical cavity"};
  app.set_version_flag("--version", std::string(CHAOS_ANNEAL_VERSION));
  app.require_subcommand(1);

  struct Common {
    std::string config;
    std::string out;
    Overrides over;
    std::optional<int> workers;
  };
  std::map<std::string, Common> common;
  for (const auto& name : kCommands) {
    auto* sub = app.add_subcommand(name, "run the " + name + " experiment");
    auto& c = common[name];
    sub->add_option("--config", c.config, "INI configuration file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", c.out, "output directory")->required();
    sub->add_option("--seed", c.over.seed, "master seed (overrides [run] seed)");
    sub->add_option("--workers", c.workers, "OpenMP worker count; falls back to CHAOS_ANNEAL_WORKERS");
    if (name != "spectrum" && name != "wigner") {
      sub->add_option("--dt", c.over.dt, "time step");
      sub->add_option("--t-end", c.over.t_end, "end time");
    }
    if (name == "langevin" || name == "qjump") sub->add_option("--n-traj", c.over.n_traj, "trajectory count");
    if (name == "qjump") sub->add_option("--dims", c.over.dims, "Fock truncation as dim_a,dim_b");
  }
  std::string manifest_path;
  Common replay;
  auto* rep = app.add_subcommand("replay", "re-run a previous run from its manifest");
  rep->add_option("manifest", manifest_path, "manifest.ini of the earlier run")->required()->check(CLI::ExistingFile);
  rep->add_option("--out", replay.out, "output directory")->required();
  rep->add_option("--seed", replay.over.seed, "override the recorded seed");
  rep->add_option("--workers", replay.workers, "OpenMP worker count");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, e2;
    const int code = app.exit(e, o, e2);
    out << o.str();
    err << e2.str();
    return code;
  }

  try {
    if (rep->parsed()) {
      Ini ini = io::read_ini(manifest_path);
      const auto m = ini["manifest"];
      ini.erase("manifest");
      for (auto it = ini.begin(); it != ini.end();) {
        if (it->first == "dimensionless" || it->first.rfind("result.", 0) == 0) it = ini.erase(it);
        else ++it;
      }
      const auto cmd = m.find("command");
      if (cmd == m.end() || !kCommands.count(cmd->second)) throw ConfigError("command", "manifest names no command");
      const auto ver = m.find("version");
      if (ver == m.end() || ver->second != CHAOS_ANNEAL_VERSION) {
        err << "warning: manifest was written by version " << (ver == m.end() ? "unknown" : ver->second)
            << ", this is " << CHAOS_ANNEAL_VERSION << "; outputs may differ\n";
      }
      apply_overrides(ini, replay.over);
      return execute(cmd->second, ini, replay.out, fs::path(manifest_path).parent_path(),
                     resolve_workers(replay.workers, err), out, err);
    }
    for (auto& [name, c] : common) {
      if (!app.get_subcommand(name)->parsed()) continue;
      Ini ini = io::read_ini(c.config);
      apply_overrides(ini, c.over);
      return execute(name, ini, c.out, fs::absolute(c.config).parent_path(), resolve_workers(c.workers, err), out, err);
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace chaos_anneal::cli
