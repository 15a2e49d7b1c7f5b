#include <algorithm>
#include <cmath>

#include "chaos_anneal/errors.hpp"
#include "chaos_anneal/meanfield.hpp"
#include "doctest.h"
#include "test_support.hpp"

using namespace chaos_anneal;
using namespace chaos_anneal::meanfield;

namespace {

model::DimensionlessParams linear_params(double delta) {
  model::DimensionlessParams d;
  d.delta = delta;
  d.kappa = 0.42;
  d.gamma = 1e-3;
  d.drive = 2.5;
  return d;
}

// a(t) for g = chi = 0 starting from vacuum
complex linear_solution(const model::DimensionlessParams& d, double t) {
  const complex star = d.drive / complex(d.kappa, -d.delta);
  return star * (1.0 - std::exp(complex(-d.kappa, d.delta) * t));
}

}  // namespace

TEST_CASE("mean-field drift") {
  auto d = linear_params(0.0);
  d.g = 0.3;
  d.chi = 0.01;
  const PhaseState at_origin = meanfield_rhs({}, d);
  CHECK(at_origin.a == complex(d.drive, 0.0));
  CHECK(at_origin.b == complex(0.0, 0.0));

  const auto lin = linear_params(0.0);
  const PhaseState still = meanfield_rhs({complex(lin.drive / lin.kappa, 0.0), {}}, lin);
  CHECK(std::abs(still.a) < 1e-15);
  CHECK(std::abs(still.b) == 0.0);

  for (double delta : {-3.0, -0.5, 0.7, 2.0}) {
    const auto dl = linear_params(delta);
    const PhaseState fixed = linear_steady_state(dl);
    CHECK(std::abs(meanfield_rhs(fixed, dl).a) < 1e-14);
  }
}

TEST_CASE("linear steady state") {
  auto d = linear_params(0.0);
  CHECK(std::abs(linear_steady_state(d).a - d.drive / d.kappa) < 1e-14);
  d.delta = d.kappa;
  const complex star = linear_steady_state(d).a;
  CHECK(std::abs(star - d.drive / (d.kappa * complex(1.0, -1.0))) < 1e-14);
  CHECK(std::abs(star) == doctest::Approx(d.drive / (d.kappa * std::sqrt(2.0))).epsilon(1e-14));
  d.drive = 0.0;
  CHECK(linear_steady_state(d).a == complex(0.0, 0.0));
  d.g = 0.1;
  CHECK_THROWS_AS(linear_steady_state(d), MisuseError);
}

TEST_CASE("RK4 follows the closed-form linear relaxation") {
  for (double delta : {0.0, 1.3, -2.0}) {
    const auto d = linear_params(delta);
    IntegrationOptions opts;
    opts.t_end = 30.0;
    opts.dt = 1e-3;
    opts.stride = 50;
    const auto traj = integrate_meanfield(d, {}, opts);
    REQUIRE(traj.size() == 601);
    const double star = std::abs(linear_steady_state(d).a);
    double worst = 0.0;
    for (std::size_t k = 0; k < traj.size(); ++k) {
      worst = std::max(worst, std::abs(traj.states[k].a - linear_solution(d, traj.times[k])));
    }
    CHECK(worst < 1e-6 * star);
    CHECK(traj.times.back() == doctest::Approx(30.0));
  }
}

TEST_CASE("RK4 converges at fourth order") {
  const auto d = linear_params(1.1);
  auto error_at = [&](double dt) {
    IntegrationOptions opts;
    opts.t_end = 4.0;
    opts.dt = dt;
    opts.stride = 1;
    opts.stability_bound = 1.0;
    const auto traj = integrate_meanfield(d, {}, opts);
    return std::abs(traj.states.back().a - linear_solution(d, 4.0));
  };
  const double e1 = error_at(0.08);
  const double e2 = error_at(0.04);
  const double e3 = error_at(0.02);
  CHECK(std::log2(e1 / e2) >= 3.5);
  CHECK(std::log2(e2 / e3) >= 3.5);
}

TEST_CASE("free decay without drive") {
  auto d = linear_params(0.8);
  d.drive = 0.0;
  IntegrationOptions opts;
  opts.t_end = 10.0;
  opts.dt = 1e-3;
  opts.stride = 100;
  const complex a0(1.5, -0.5);
  const auto traj = integrate_meanfield(d, {a0, {}}, opts);
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const double expected = std::abs(a0) * std::exp(-d.kappa * traj.times[k]);
    CHECK(std::abs(std::abs(traj.states[k].a) - expected) < 1e-10);
  }
}

TEST_CASE("integrator errors") {
  auto d = linear_params(0.0);
  IntegrationOptions opts;
  opts.t_end = 1.0;
  opts.dt = 0.0;
  CHECK_THROWS_AS(integrate_meanfield(d, {}, opts), InvalidParameter);
  opts.dt = 0.5;  // rate 1 * 0.5 > 0.1
  CHECK_THROWS_AS(integrate_meanfield(d, {}, opts), StepSizeError);

  opts.dt = 1e-3;
  opts.t_end = 5.0;
  opts.blowup_bound = 1.0;  // steady |a|^2 ~ 35
  try {
    integrate_meanfield(d, {}, opts);
    FAIL("expected divergence");
  } catch (const DivergenceError& e) {
    CHECK(e.last_valid_time() > 0.0);
    CHECK(e.last_valid_time() < 5.0);
  }
}

TEST_CASE("deterministic bit for bit") {
  const auto d = model::to_dimensionless(test_support::lab_physical(25.0, 0.0));
  IntegrationOptions opts;
  opts.t_end = 20.0;
  opts.dt = 1e-3;
  opts.stride = 10;
  const auto t1 = integrate_meanfield(d, {}, opts);
  const auto t2 = integrate_meanfield(d, {}, opts);
  CHECK(t1.states == t2.states);
}

TEST_CASE("property: mean-field dynamics are invariant under the coupling rescaling") {
  test_support::Gen gen(21);
  for (int trial = 0; trial < 6; ++trial) {
    model::DimensionlessParams d;
    d.delta = gen.uniform(-2.0, 2.0);
    d.kappa = gen.uniform(0.2, 0.6);
    d.gamma = 1e-4;
    d.g = gen.log_uniform(1e-4, 1e-2);
    d.chi = d.g * d.g * gen.uniform(0.1, 2.0);
    d.drive = gen.uniform(0.5, 2.0) / d.g;
    const double s = gen.uniform(2.0, 30.0);
    const auto ds = model::apply_scaling(d, model::ScalingTransform(s));
    const PhaseState s0{gen.complex_in(0.2 / d.g), gen.complex_in(0.2 / d.g)};
    IntegrationOptions opts;
    opts.t_end = 30.0;
    opts.dt = 2e-3;
    opts.stride = 25;
    const auto base = integrate_meanfield(d, s0, opts);
    const auto scaled = integrate_meanfield(ds, {s0.a / s, s0.b / s}, opts);
    double worst = 0.0;
    for (std::size_t k = 0; k < base.size(); ++k) {
      const double scale = std::hypot(std::abs(base.states[k].a), std::abs(base.states[k].b));
      const double diff = std::hypot(std::abs(scaled.states[k].a * s - base.states[k].a),
                                     std::abs(scaled.states[k].b * s - base.states[k].b));
      worst = std::max(worst, diff / scale);
    }
    CHECK(worst < 1e-6);
  }
}
