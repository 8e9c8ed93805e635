#include <doctest.h>

#include <omp.h>

#include <cmath>

#include "hom/errors.hpp"
#include "hom/hom_montecarlo.hpp"

using namespace hom;
using doctest::Approx;

namespace {

SourcePair ideal_pair() {
  SourcePair p;
  for (auto* e : {&p.a, &p.b}) {
    e->t1_ps = 160.0;
    e->sideband_fraction = 0.0;
  }
  return p;
}

HomExperimentConfig quiet_experiment(std::uint64_t pulses) {
  HomExperimentConfig c;
  c.n_pulses = pulses;
  c.blink_on_prob = 1.0;
  return c;
}

CoincidenceHistogram flat_histogram(Polarization pol, std::uint64_t central) {
  CoincidenceHistogram h;
  h.polarization = pol;
  h.rep_period_ns = 10.0;
  h.bin_width_ns = 1.0;
  for (int i = -15; i < 15; ++i) {
    h.bin_centers_ns.push_back(i + 0.5);
    h.counts.push_back(0);
  }
  h.counts[15] = central;  // bin centred at 0.5 ns
  return h;
}

}  // namespace

TEST_CASE("experiment validation") {
  HomExperimentConfig c;
  CHECK_NOTHROW(c.validate());
  c.g2 = 1.0;
  CHECK_THROWS_AS(c.validate(), DomainError);
  c = HomExperimentConfig{};
  c.rep_period_ns = 0.0;
  CHECK_THROWS_AS(c.validate(), DomainError);
  c = HomExperimentConfig{};
  c.bin_width_ps = 0.0;
  CHECK_THROWS_AS(c.validate(), DomainError);
}

TEST_CASE("visibility estimator") {
  auto par = flat_histogram(Polarization::parallel, 400);
  auto perp = flat_histogram(Polarization::perpendicular, 400);
  CHECK(estimate_visibility(par, perp).v_tpi == 0.0);
  par.counts[15] = 0;
  const auto full = estimate_visibility(par, perp);
  CHECK(full.v_tpi == 1.0);
  CHECK(full.a_par == 0.0);
  CHECK(full.a_perp == 400.0);
  par.counts[15] = 100;
  const auto mid = estimate_visibility(par, perp);
  CHECK(mid.v_tpi == Approx(0.75));
  CHECK(mid.sigma == Approx(std::sqrt(100.0 / 160000.0 + 10000.0 / 64000000.0)));

  perp.counts[15] = 0;
  CHECK_THROWS_AS(estimate_visibility(par, perp), EstimationError);
  CHECK_THROWS_AS(estimate_visibility(perp, par), DomainError);
  auto other = flat_histogram(Polarization::perpendicular, 10);
  other.bin_width_ns = 0.5;
  CHECK_THROWS_AS(estimate_visibility(par, other), DomainError);
}

TEST_CASE("perfect interference empties the central peak") {
  const auto pair = ideal_pair();
  const auto cfg = quiet_experiment(400'000);
  const auto par = simulate_histogram(pair, cfg, Polarization::parallel, 1);
  const auto perp = simulate_histogram(pair, cfg, Polarization::perpendicular, 1);
  CHECK(par.central_area() == 0);
  CHECK(perp.central_area() > 10000);

  // Without interference or blinking: one photon pair per pulse feeds the
  // central peak, four pairs per pulse pair feed the two side peaks at +-n,
  // so each side peak holds twice the central area.
  const double c = static_cast<double>(perp.central_area());
  for (int n : {-2, -1, 1, 2}) {
    const double side = static_cast<double>(perp.peak_area(n));
    CHECK(std::abs(side - 2.0 * c) < 3.0 * std::sqrt(side + 4.0 * c));
  }
  const auto est = estimate_visibility(par, perp);
  CHECK(est.v_tpi == 1.0);
}

TEST_CASE("histogram layout") {
  const auto cfg = quiet_experiment(70'000);
  const auto h = simulate_histogram(ideal_pair(), cfg, Polarization::perpendicular, 2);
  REQUIRE(h.counts.size() == h.bin_centers_ns.size());
  for (std::size_t i = 1; i < h.bin_centers_ns.size(); ++i) {
    CHECK(h.bin_centers_ns[i] - h.bin_centers_ns[i - 1] == Approx(0.025));
  }
  CHECK(h.bin_centers_ns.front() < -2.5 * cfg.rep_period_ns + 0.05);
  CHECK(h.shard_central_counts.size() == 2);
}

TEST_CASE("serial and parallel runs are bit identical for any worker count") {
  SourcePair pair = ideal_pair();
  pair.a.delta_omega = Rate{3.0};
  pair.b.delta_omega = Rate{2.0};
  pair.a.gamma_star = Rate{0.2};
  pair.a.sideband_fraction = 0.05;
  pair.s_classical = 0.99;
  HomExperimentConfig cfg;
  cfg.n_pulses = 300'000;
  cfg.g2 = 0.01;
  const auto ref = simulate_histogram(pair, cfg, Polarization::parallel, 77, Execution::serial);
  for (int threads : {1, 2, 3, 8}) {
    omp_set_num_threads(threads);
    const auto h = simulate_histogram(pair, cfg, Polarization::parallel, 77, Execution::parallel);
    CHECK(h.counts == ref.counts);
    CHECK(h.shard_central_counts == ref.shard_central_counts);
  }
  omp_set_num_threads(omp_get_num_procs());
  const auto other = simulate_histogram(pair, cfg, Polarization::parallel, 78, Execution::serial);
  CHECK(other.counts != ref.counts);
}

TEST_CASE("temporal mismatch alone limits the visibility to s") {
  SourcePair pair = ideal_pair();
  pair.s_classical = 0.9;
  const auto cfg = quiet_experiment(600'000);
  const auto est = estimate_visibility(simulate_histogram(pair, cfg, Polarization::parallel, 5),
                                       simulate_histogram(pair, cfg, Polarization::perpendicular, 5));
  CHECK(std::abs(est.v_tpi - 0.9) < 3.0 * est.sigma);
  CHECK(analytic_prediction(pair) == Approx(0.81));  // printed form carries s squared
}

TEST_CASE("blinking bunches side peaks equally in both polarizations") {
  SourcePair pair = ideal_pair();
  pair.a.gamma_star = Rate{0.5};
  pair.b.delta_omega = Rate{3.0};
  HomExperimentConfig cfg;
  cfg.n_pulses = 1'000'000;
  cfg.blink_on_prob = 0.6;
  cfg.blink_dwell_ns = 40.0;
  const auto par = simulate_histogram(pair, cfg, Polarization::parallel, 9);
  const auto perp = simulate_histogram(pair, cfg, Polarization::perpendicular, 9);
  // Blinking bunches the side peaks above the steady-state ratio of two.
  CHECK(perp.peak_area(1) > 2.2 * perp.central_area());
  for (int n : {-2, -1, 1, 2}) {
    const double a = static_cast<double>(par.peak_area(n));
    const double b = static_cast<double>(perp.peak_area(n));
    CHECK(std::abs(a - b) < 3.0 * std::sqrt(a + b));
  }
  auto steady = cfg;
  steady.blink_on_prob = 1.0;
  const auto blinking = estimate_visibility(par, perp);
  const auto reference = estimate_visibility(simulate_histogram(pair, steady, Polarization::parallel, 9),
                                             simulate_histogram(pair, steady, Polarization::perpendicular, 9));
  const double combined = std::hypot(blinking.sigma_batch, reference.sigma_batch);
  CHECK(std::abs(blinking.v_tpi - reference.v_tpi) < 3.0 * combined);
}

TEST_CASE("multiphoton contamination lowers the visibility") {
  const auto pair = ideal_pair();
  auto cfg = quiet_experiment(300'000);
  cfg.g2 = 0.05;
  const auto est = estimate_visibility(simulate_histogram(pair, cfg, Polarization::parallel, 4),
                                       simulate_histogram(pair, cfg, Polarization::perpendicular, 4));
  CHECK(est.v_tpi < 0.95);
  CHECK(est.v_tpi <= 1.0);
}

TEST_CASE("analytic prediction") {
  SourcePair pair = ideal_pair();
  pair.a.delta_omega = Rate{4.0};
  pair.a.gamma_star = Rate{0.3};
  pair.s_classical = 0.98;
  CHECK(analytic_prediction(pair) == mwo_voigt_averaged(pair));
  pair.a.sideband_fraction = 0.1;
  pair.b.sideband_fraction = 0.2;
  CHECK(analytic_prediction(pair) == Approx(0.72 * mwo_voigt_averaged(pair)).epsilon(1e-14));
}
