#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "chaos_anneal/analysis.hpp"
#include "chaos_anneal/errors.hpp"
#include "doctest.h"
#include "test_support.hpp"

using namespace chaos_anneal;
using namespace chaos_anneal::analysis;

namespace {

constexpr double kPi = std::numbers::pi;

struct Series {
  std::vector<double> t, x;
};

Series sample(std::size_t n, double dt, auto f) {
  Series s;
  for (std::size_t k = 0; k < n; ++k) {
    s.t.push_back(static_cast<double>(k) * dt);
    s.x.push_back(f(s.t.back()));
  }
  return s;
}

Window all_of(const Series& s) { return {s.t.front(), s.t.back() + 0.5 * (s.t[1] - s.t[0])}; }

double at(const Spectrum& s, double w) {
  std::size_t best = 0;
  for (std::size_t i = 0; i < s.frequencies.size(); ++i)
    if (std::abs(s.frequencies[i] - w) < std::abs(s.frequencies[best] - w)) best = i;
  return s.normalized[best];
}

}  // namespace

TEST_CASE("spectrum matches a direct DFT") {
  test_support::Gen gen(2);
  for (std::size_t n : {16u, 33u, 100u}) {
    const double dt = 0.07;
    const auto s = sample(n, dt, [&](double) { return gen.uniform(-1, 2); });
    const Spectrum sp = intensity_spectrum(s.t, s.x, all_of(s));
    REQUIRE(sp.n_samples == n);
    for (std::size_t i = 0; i < n; ++i) {
      std::complex<double> sum = 0.0;
      for (std::size_t k = 0; k < n; ++k) sum += s.x[k] * std::polar(1.0, -sp.frequencies[i] * s.t[k]);
      CHECK(sp.magnitude[i] == doctest::Approx(dt / std::sqrt(2.0) * std::abs(sum)).epsilon(1e-10));
    }
    CHECK(sp.frequencies[1] - sp.frequencies[0] == doctest::Approx(2 * kPi / (n * dt)));
  }
}

TEST_CASE("spectrum examples") {
  const double dt = 0.01;
  const std::size_t n = 1000;  // 10 time units
  const double w0 = 2 * kPi * 3 / 10.0;  // three whole periods
  SUBCASE("constant") {
    const auto s = sample(n, dt, [](double) { return 2.5; });
    const Spectrum sp = intensity_spectrum(s.t, s.x, all_of(s));
    for (std::size_t i = 0; i < n; ++i) {
      if (sp.frequencies[i] == 0.0) CHECK(sp.normalized[i] == 1.0);
      else CHECK(sp.normalized[i] < 1e-12);
    }
  }
  SUBCASE("cosine on whole periods") {
    const auto s = sample(n, dt, [&](double t) { return std::cos(w0 * t); });
    const Spectrum sp = intensity_spectrum(s.t, s.x, all_of(s));
    for (std::size_t i = 0; i < n; ++i) {
      if (std::abs(std::abs(sp.frequencies[i]) - w0) < 1e-9) CHECK(sp.normalized[i] == doctest::Approx(1.0));
      else CHECK(sp.normalized[i] < 1e-10);
    }
  }
  SUBCASE("second harmonic at one percent") {
    const auto s = sample(n, dt, [&](double t) { return std::cos(w0 * t) + 0.01 * std::cos(2 * w0 * t); });
    const Spectrum sp = intensity_spectrum(s.t, s.x, all_of(s));
    CHECK(std::abs(at(sp, 2 * w0) / at(sp, w0) - 0.01) < 1e-6);
    CHECK(find_fundamental(sp) == doctest::Approx(w0));
  }
  SUBCASE("non-uniform sampling") {
    auto s = sample(n, dt, [](double t) { return t; });
    s.t[500] += 1e-4;
    CHECK_THROWS_AS(intensity_spectrum(s.t, s.x, all_of(s)), InvalidParameter);
  }
  SUBCASE("bad windows") {
    const auto s = sample(n, dt, [](double t) { return t; });
    CHECK_THROWS_AS(intensity_spectrum(s.t, s.x, {3.0, 3.0}), InvalidParameter);
    CHECK_THROWS_AS(intensity_spectrum(s.t, s.x, {20.0, 30.0}), InvalidParameter);
  }
}

TEST_CASE("Parseval pins the 1/sqrt2 scale") {
  test_support::Gen gen(12);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = static_cast<std::size_t>(gen.integer(8, 2000));
    const double dt = gen.log_uniform(1e-3, 1.0);
    const auto s = sample(n, dt, [&](double) { return gen.uniform(-3, 5); });
    const Spectrum sp = intensity_spectrum(s.t, s.x, all_of(s));
    double lhs = 0.0, rhs = 0.0;
    for (double m : sp.magnitude) lhs += m * m * sp.resolution();
    for (double v : s.x) rhs += v * v;
    rhs *= kPi * dt;
    CHECK(test_support::rel_diff(lhs, rhs) < 1e-6);
  }
}

TEST_CASE("normalised spectrum ignores positive rescaling") {
  test_support::Gen gen(13);
  const auto s = sample(300, 0.05, [&](double t) { return std::sin(t) * std::sin(t) + gen.uniform(0, 0.2); });
  const Spectrum a = intensity_spectrum(s.t, s.x, all_of(s));
  for (double c : {1e-6, 0.3, 7.0, 1e8}) {
    std::vector<double> y(s.x);
    for (auto& v : y) v *= c;
    const Spectrum b = intensity_spectrum(s.t, y, all_of(s));
    for (std::size_t i = 0; i < a.normalized.size(); ++i) CHECK(std::abs(a.normalized[i] - b.normalized[i]) < 1e-12);
  }
}

TEST_CASE("sideband suppression ratio") {
  const double dt = 0.05;
  const std::size_t n = 4000;
  const double w0 = 2 * kPi * 20 / (n * dt);
  const auto rich = sample(n, dt, [&](double t) {
    return 5.0 + std::cos(w0 * t) + 0.3 * std::cos(2 * w0 * t) + 0.1 * std::cos(3 * w0 * t);
  });
  const auto pure = sample(n, dt, [&](double t) { return 5.0 + std::cos(w0 * t); });
  const Spectrum ref = intensity_spectrum(rich.t, rich.x, all_of(rich));
  const Spectrum clean = intensity_spectrum(pure.t, pure.x, all_of(pure));
  CHECK(find_fundamental(ref) == doctest::Approx(w0));
  CHECK(sideband_suppression_ratio(ref, ref) == doctest::Approx(1.0));
  CHECK(sideband_suppression_ratio(ref, clean) < 1e-12);

  // Invariant under a common renormalisation of both inputs.
  std::vector<double> scaled_rich(rich.x), scaled_pure(pure.x);
  for (auto& v : scaled_rich) v *= 40.0;
  for (auto& v : scaled_pure) v *= 40.0;
  const auto half = sample(n, dt, [&](double t) {
    return 5.0 + std::cos(w0 * t) + 0.15 * std::cos(2 * w0 * t) + 0.05 * std::cos(3 * w0 * t);
  });
  std::vector<double> scaled_half(half.x);
  for (auto& v : scaled_half) v *= 40.0;
  const double r1 = sideband_suppression_ratio(ref, intensity_spectrum(half.t, half.x, all_of(half)));
  const double r2 = sideband_suppression_ratio(intensity_spectrum(rich.t, scaled_rich, all_of(rich)),
                                               intensity_spectrum(half.t, scaled_half, all_of(half)));
  CHECK(r1 == doctest::Approx(r2).epsilon(1e-12));
  CHECK(r1 == doctest::Approx(0.5).epsilon(1e-9));

  const auto flat = sample(n, dt, [](double) { return 1.0; });
  const Spectrum dc = intensity_spectrum(flat.t, flat.x, all_of(flat));
  CHECK_THROWS_AS(sideband_suppression_ratio(dc, ref), InvalidParameter);
  const auto shorter = sample(n / 2, dt, [](double t) { return t; });
  CHECK_THROWS_AS(sideband_suppression_ratio(ref, intensity_spectrum(shorter.t, shorter.x, all_of(shorter))),
                  InvalidParameter);
}

TEST_CASE("split windows") {
  const double dt = 0.02;
  const std::size_t n = 2000;
  const double w = 2 * kPi * 10 / (n / 2 * dt);
  SUBCASE("periodic series gives matching halves") {
    const auto s = sample(n, dt, [&](double t) { return std::cos(w * t); });
    const auto [first, second] = split_window_spectra(s.t, s.x, s.t[n / 2]);
    CHECK(first.n_samples == n / 2);
    CHECK(second.n_samples == n / 2);
    for (std::size_t i = 0; i < first.magnitude.size(); ++i)
      CHECK(std::abs(first.magnitude[i] - second.magnitude[i]) < 1e-9);
  }
  SUBCASE("noise then a clean line") {
    test_support::Gen gen(1);
    const double tm = static_cast<double>(n / 2) * dt;
    const auto s = sample(n, dt, [&](double t) { return t < tm - 1e-9 ? gen.uniform(-1, 1) : std::cos(w * t); });
    const auto [first, second] = split_window_spectra(s.t, s.x, s.t[n / 2]);
    auto spread = [](const Spectrum& sp) {
      int above = 0;
      for (double v : sp.normalized) above += v > 0.1 ? 1 : 0;
      return above;
    };
    CHECK(spread(second) == 2);
    CHECK(spread(first) > 10);
  }
  const auto s = sample(10, 1.0, [](double t) { return t; });
  CHECK_THROWS_AS(split_window_spectra(s.t, s.x, 20.0), InvalidParameter);
  CHECK_THROWS_AS(split_window_spectra(s.t, s.x, 0.5), InvalidParameter);
}

TEST_CASE("Hz conversion") {
  CHECK(frequency_to_hz(1.0, 525e3) == 525e3);
  CHECK(frequency_to_hz(2.0, 525e3) == 1.05e6);
}
