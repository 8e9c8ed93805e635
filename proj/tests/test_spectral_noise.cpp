#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "hom/errors.hpp"
#include "hom/overlap.hpp"
#include "hom/spectral_noise.hpp"

using namespace hom;
using doctest::Approx;

namespace {

std::vector<double> uniform_times(std::size_t n, double dt) {
  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i) t[i] = dt * static_cast<double>(i);
  return t;
}

}  // namespace

TEST_CASE("zero wandering gives a flat path") {
  const auto t = uniform_times(1000, 1.0);
  for (auto f : sample_frequency_path({Rate{0.0}, 100.0, 1}, t)) CHECK(f.rad_per_ns == 0.0);
}

TEST_CASE("stationary variance") {
  // Samples spaced far beyond tau_c are independent draws.
  const std::size_t n = 1'000'000;
  const auto t = uniform_times(n, 50.0);
  const auto path = sample_frequency_path({Rate{2.0}, 1.0, 17}, t);
  double sum_sq = 0.0;
  for (auto f : path) sum_sq += f.rad_per_ns * f.rad_per_ns;
  const double var = sum_sq / static_cast<double>(n);
  // Relative standard error of a variance estimate is sqrt(2/n).
  CHECK(std::abs(var / 4.0 - 1.0) < 3.0 * std::sqrt(2.0 / static_cast<double>(n)));
  CHECK(std::abs(var / 4.0 - 1.0) < 0.01);
}

TEST_CASE("autocorrelation at lag tau_c") {
  const std::size_t n = 1'000'000;
  const double tau_c = 10.0;
  const double dt = 1.0;
  const auto path = sample_frequency_path({Rate{1.0}, tau_c, 23}, uniform_times(n, dt));
  const std::size_t lag = static_cast<std::size_t>(tau_c / dt);
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i + lag < n; ++i) num += path[i].rad_per_ns * path[i + lag].rad_per_ns;
  for (auto f : path) den += f.rad_per_ns * f.rad_per_ns;
  const double r = (num / static_cast<double>(n - lag)) / (den / static_cast<double>(n));
  CHECK(r == Approx(std::exp(-1.0)).epsilon(0.02 / std::exp(-1.0)));
}

TEST_CASE("paths are deterministic per seed and exact at any step") {
  const auto t = uniform_times(1000, 3.0);
  const auto a = sample_frequency_path({Rate{1.5}, 50.0, 9}, t);
  const auto b = sample_frequency_path({Rate{1.5}, 50.0, 9}, t);
  const auto c = sample_frequency_path({Rate{1.5}, 50.0, 10}, t);
  bool same = true;
  bool differ = false;
  for (std::size_t i = 0; i < t.size(); ++i) {
    same = same && a[i].rad_per_ns == b[i].rad_per_ns;
    differ = differ || a[i].rad_per_ns != c[i].rad_per_ns;
  }
  CHECK(same);
  CHECK(differ);
  const std::vector<double> bad = {0.0, 2.0, 2.0};
  CHECK_THROWS_AS(sample_frequency_path({Rate{1.0}, 1.0, 1}, bad), DomainError);
}

TEST_CASE("delay visibility law") {
  CHECK(visibility_vs_delay(0.9, 0.5, 100.0, 0.0) == 0.9);
  CHECK(visibility_vs_delay(0.9, 0.5, 100.0, 1e9) == Approx(0.6).epsilon(1e-12));
  const double v0 = intrinsic_visibility(Rate{6.173}, Rate{0.17});
  CHECK(visibility_vs_delay(v0, 4.6 / 6.343, 1420.0, 525.0) == Approx(0.734).epsilon(0.01 / 0.734));
  for (double d : {0.0, 10.0, 1000.0}) CHECK(visibility_vs_delay(0.8, 0.0, 50.0, d) == 0.8);
  double last = 1.0;
  for (double d = 0.0; d < 5000.0; d += 50.0) {
    const double v = visibility_vs_delay(0.95, 0.7, 1400.0, d);
    CHECK(v <= last);
    last = v;
  }
  last = 1.0;
  for (double r = 0.0; r < 3.0; r += 0.1) {
    const double v = visibility_vs_delay(0.95, r, 1400.0, 300.0);
    CHECK(v <= last);
    last = v;
  }
  CHECK_THROWS_AS(visibility_vs_delay(1.2, 0.1, 1.0, 1.0), DomainError);
  CHECK_THROWS_AS(visibility_vs_delay(0.9, -0.1, 1.0, 1.0), DomainError);
  CHECK_THROWS_AS(visibility_vs_delay(0.9, 0.1, 0.0, 1.0), DomainError);
  CHECK_THROWS_AS(visibility_vs_delay(0.9, 0.1, 1.0, -1.0), DomainError);
}

TEST_CASE("intrinsic visibility") {
  CHECK(intrinsic_visibility(Rate{3.0}, Rate{0.0}) == 1.0);
  CHECK(intrinsic_visibility(Rate{3.0}, Rate{3.0}) == 0.5);
  CHECK(intrinsic_visibility(Rate{6.173}, Rate{0.17}) == Approx(0.9732).epsilon(1e-4));
  CHECK_THROWS_AS(intrinsic_visibility(Rate{0.0}, Rate{0.1}), DomainError);
}

TEST_CASE("photon pairs from sampled paths against the delay law") {
  // Pairs of photons from one source separated by `delay`; each pair interferes
  // with the dephased law at the instantaneous detuning. The exact average is a
  // Voigt value; the delay law is its first-order expansion in the wandering.
  const double gamma = 6.173;
  const double gamma_star = 0.17;
  const double width = gamma + gamma_star;
  const double tau_c = 1.0;
  const std::size_t pairs = 200'000;
  int seed = 100;
  for (double dw_r : {0.05, 0.1, 0.3, 0.6, 1.0}) {
    for (double delay_ratio : {0.3, 3.0}) {
      const double sigma = dw_r * width;
      const double delay = delay_ratio * tau_c;
      std::vector<double> times;
      times.reserve(2 * pairs);
      for (std::size_t k = 0; k < pairs; ++k) {
        const double start = static_cast<double>(k) * (delay + 20.0 * tau_c);
        times.push_back(start);
        times.push_back(start + delay);
      }
      const auto path = sample_frequency_path({Rate{sigma}, tau_c, static_cast<std::uint64_t>(seed++)}, times);
      double sum = 0.0;
      double sum_sq = 0.0;
      for (std::size_t k = 0; k < pairs; ++k) {
        const double d = path[2 * k + 1].rad_per_ns - path[2 * k].rad_per_ns;
        const double m = gamma * width / (width * width + d * d);
        sum += m;
        sum_sq += m * m;
      }
      const double n = static_cast<double>(pairs);
      const double mean = sum / n;
      const double se = std::sqrt((sum_sq / n - mean * mean) / (n - 1.0));

      const double decorrelated = 1.0 - std::exp(-delay / tau_c);
      const double spread = std::sqrt(2.0 * sigma * sigma * decorrelated);
      const double exact = kPi * gamma * voigt(Frequency{0.0}, Rate{width}, Rate{spread});
      CHECK(std::abs(mean - exact) < 3.0 * se + 1e-12);

      const double law = visibility_vs_delay(gamma / width, dw_r, tau_c, delay);
      const double expansion = 2.0 * dw_r * dw_r * decorrelated;
      // Second-order gap between the exact average and the law.
      CHECK(std::abs(exact - law) <= 2.5 * expansion * expansion + 1e-12);
      if (dw_r <= 0.1) CHECK(std::abs(mean - law) < 3.0 * se + 1e-3);
    }
  }
}

TEST_CASE("delay series validation") {
  DelayVisibilitySeries s;
  s.entries = {{12.2, 0.9, 0.01, false}, {525.0, 0.7, 0.01, false}};
  CHECK_NOTHROW(s.validate());
  s.entries = {{525.0, 0.9, 0.01, false}, {12.2, 0.7, 0.01, false}};
  CHECK_THROWS_AS(s.validate(), DomainError);
  s.entries = {{12.2, 1.2, 0.01, false}};
  CHECK_THROWS_AS(s.validate(), DomainError);
}
