#include <doctest.h>

#include <cmath>
#include <random>

#include "hom/errors.hpp"
#include "hom/fits.hpp"
#include "hom/least_squares.hpp"
#include "oracles.hpp"

using namespace hom;
using doctest::Approx;

namespace {

CurveModel linear_model(std::vector<double> x) {
  CurveModel m;
  m.n_obs = x.size();
  m.predict = [x](const Eigen::VectorXd& p, Eigen::VectorXd& out) {
    out.resize(static_cast<Eigen::Index>(x.size()));
    for (std::size_t i = 0; i < x.size(); ++i) out(static_cast<Eigen::Index>(i)) = p(0) * x[i];
  };
  m.jacobian = [x](const Eigen::VectorXd&, Eigen::MatrixXd& jac) {
    jac.resize(static_cast<Eigen::Index>(x.size()), 1);
    for (std::size_t i = 0; i < x.size(); ++i) jac(static_cast<Eigen::Index>(i), 0) = x[i];
  };
  return m;
}

// Linear in the parameters, so the residual surface is quadratic.
CurveModel polynomial_model(std::vector<double> x) {
  CurveModel m;
  m.n_obs = x.size();
  m.predict = [x](const Eigen::VectorXd& p, Eigen::VectorXd& out) {
    out.resize(static_cast<Eigen::Index>(x.size()));
    for (std::size_t i = 0; i < x.size(); ++i) out(static_cast<Eigen::Index>(i)) = p(0) + p(1) * x[i] + p(2) * x[i] * x[i];
  };
  m.jacobian = [x](const Eigen::VectorXd&, Eigen::MatrixXd& jac) {
    jac.resize(static_cast<Eigen::Index>(x.size()), 3);
    for (std::size_t i = 0; i < x.size(); ++i) jac.row(static_cast<Eigen::Index>(i)) << 1.0, x[i], x[i] * x[i];
  };
  return m;
}

std::vector<double> linspace(double a, double b, std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  return v;
}

std::vector<double> evaluate(const CurveModel& m, const std::vector<double>& p) {
  Eigen::VectorXd out;
  m.predict(Eigen::Map<const Eigen::VectorXd>(p.data(), static_cast<Eigen::Index>(p.size())), out);
  return {out.data(), out.data() + out.size()};
}

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

std::vector<ParameterSpec> perturbed(const std::vector<std::string>& names, const std::vector<double>& truth,
                                     const std::vector<double>& factors) {
  std::vector<ParameterSpec> init;
  for (std::size_t i = 0; i < names.size(); ++i) init.push_back({names[i], truth[i] * factors[i]});
  return init;
}

ReflectivitySpectrum synthetic_spectrum(double xc, double q, double noise, std::uint64_t seed) {
  const double fwhm = xc / q;
  ReflectivitySpectrum s;
  s.wavelength_nm = linspace(xc - 5.0 * fwhm, xc + 5.0 * fwhm, 400);
  const auto clean = evaluate(reflectivity_curve(s.wavelength_nm), {xc, fwhm, 0.6, 0.9});
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n;
  for (double v : clean) s.reflectivity.push_back(v * (1.0 + noise * n(rng)));
  return s;
}

}  // namespace

TEST_CASE("linear model is solved exactly") {
  const auto x = linspace(0.0, 5.0, 20);
  std::vector<double> y;
  for (double v : x) y.push_back(2.0 * v);
  const auto r = least_squares(linear_model(x), y, {}, {{"a", 0.5}});
  CHECK(r.converged);
  CHECK(std::abs(r.value("a") - 2.0) < 1e-9);
}

TEST_CASE("quadratic residual surface converges within three iterations") {
  const auto x = linspace(-1.0, 2.0, 30);
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n(0.0, 0.1);
  std::vector<double> y;
  for (double v : x) y.push_back(1.0 - 0.5 * v + 0.3 * v * v + n(rng));
  const auto r = least_squares(polynomial_model(x), y, {}, {{"c0", 5.0}, {"c1", 3.0}, {"c2", -2.0}});
  CHECK(r.converged);
  CHECK(r.n_iter <= 3);
  CHECK(r.covariance.rows() == 3);
  for (double s : r.sigmas) CHECK(s > 0.0);
}

TEST_CASE("singular Jacobian is rejected") {
  CurveModel m = polynomial_model(linspace(0.0, 1.0, 10));
  auto base = m.jacobian;
  m.jacobian = [base](const Eigen::VectorXd& p, Eigen::MatrixXd& jac) {
    base(p, jac);
    jac.col(2) = jac.col(1);
  };
  const std::vector<double> y(10, 1.0);
  CHECK_THROWS_AS(least_squares(m, y, {}, {{"a", 1.0}, {"b", 1.0}, {"c", 1.0}}), RankDeficientError);
}

TEST_CASE("iteration limit is reported, not thrown") {
  const auto t = linspace(0.0, 1000.0, 200);
  const auto y = evaluate(lifetime_curve(t, LifetimeModel::MonoExp), {162.0, 1000.0, 5.0});
  LeastSquaresOptions opts;
  opts.max_iterations = 1;
  const auto r = least_squares(lifetime_curve(t, LifetimeModel::MonoExp), y, {},
                               {{"t1_ps", 400.0}, {"amplitude", 10.0}, {"background", 100.0}}, opts);
  CHECK_FALSE(r.converged);
  CHECK_FALSE(r.diagnostics.empty());
}

TEST_CASE("initial values outside bounds are rejected") {
  const auto x = linspace(0.0, 1.0, 5);
  const std::vector<double> y(5, 0.0);
  CHECK_THROWS_AS(least_squares(linear_model(x), y, {}, {{"a", 2.0, 0.0, 1.0}}), DomainError);
}

TEST_CASE("model Jacobians agree with central differences") {
  const auto t = linspace(-50.0, 2000.0, 300);
  CHECK(oracle::jacobian_mismatch(lifetime_curve(t, LifetimeModel::MonoExp), vec({162.0, 1e4, 12.0})) < 1e-5);
  CHECK(oracle::jacobian_mismatch(lifetime_curve(t, LifetimeModel::FssBeating), vec({128.0, 6.7, 1e4, 13.3, 12.0})) <
        1e-5);
  const auto x = linspace(924.0, 925.5, 300);
  CHECK(oracle::jacobian_mismatch(reflectivity_curve(x), vec({924.734, 924.734 / 2900.0, 0.6, 0.9})) < 1e-5);
  const auto df = linspace(12.2, 7000.0, 40);
  const auto du = linspace(12.2, 3000.0, 25);
  CHECK(oracle::jacobian_mismatch(delay_visibility_curve(df, du, Rate{6.173}), vec({0.17, 4.6, 4.7, 1400.0})) < 1e-5);
}

TEST_CASE("noiseless round trips from perturbed starts") {
  const auto t = linspace(0.0, 2000.0, 400);
  {
    const std::vector<double> truth{162.0, 1e4, 12.0};
    const auto y = evaluate(lifetime_curve(t, LifetimeModel::MonoExp), truth);
    const auto r = least_squares(lifetime_curve(t, LifetimeModel::MonoExp), y, {},
                                 perturbed(lifetime_parameter_names(LifetimeModel::MonoExp), truth, {1.2, 0.8, 1.2}));
    for (std::size_t i = 0; i < truth.size(); ++i) CHECK(r.params[i] == Approx(truth[i]).epsilon(1e-6));
  }
  {
    const auto tf = linspace(0.0, 2000.0, 2000);
    const std::vector<double> truth{128.0, 6.7, 1e4, 13.0, 12.0};
    const auto y = evaluate(lifetime_curve(tf, LifetimeModel::FssBeating), truth);
    const auto r = least_squares(lifetime_curve(tf, LifetimeModel::FssBeating), y, {},
                                 perturbed(lifetime_parameter_names(LifetimeModel::FssBeating), truth,
                                           {1.2, 0.95, 0.8, 1.2, 1.2}));
    for (std::size_t i = 0; i < truth.size(); ++i) CHECK(r.params[i] == Approx(truth[i]).epsilon(1e-6));
  }
  {
    const auto x = linspace(924.5, 925.0, 300);
    const std::vector<double> truth{924.734, 924.734 / 2900.0, 0.6, 0.9};
    const auto y = evaluate(reflectivity_curve(x), truth);
    const auto r = least_squares(reflectivity_curve(x), y, {},
                                 perturbed({"x_c_nm", "fwhm_nm", "depth", "baseline"}, truth, {1.00002, 1.2, 0.8, 1.2}));
    for (std::size_t i = 0; i < truth.size(); ++i) CHECK(r.params[i] == Approx(truth[i]).epsilon(1e-6));
  }
  {
    const auto df = linspace(12.2, 7000.0, 30);
    const auto du = linspace(12.2, 7000.0, 30);
    const std::vector<double> truth{0.17, 4.6, 4.7, 1400.0};
    const auto m = delay_visibility_curve(df, du, Rate{6.173});
    const auto y = evaluate(m, truth);
    const auto r = least_squares(m, y, {}, perturbed({"g", "f", "u", "t"}, truth, {1.2, 0.8, 1.2, 0.8}));
    for (std::size_t i = 0; i < truth.size(); ++i) CHECK(r.params[i] == Approx(truth[i]).epsilon(1e-6));
  }
}

TEST_CASE("mono-exponential lifetime fit with Poisson noise") {
  LifetimeTrace trace;
  trace.time_ps = linspace(0.0, 2000.0, 500);
  std::mt19937_64 rng(31);
  for (double t : trace.time_ps) {
    std::poisson_distribution<long> p(1e4 * std::exp(-t / 162.0) + 5.0);
    trace.counts.push_back(static_cast<double>(p(rng)));
  }
  const auto r = fit_lifetime(trace, LifetimeModel::MonoExp);
  CHECK(r.converged);
  CHECK(std::abs(r.value("t1_ps") - 162.0) <= 2.0 * r.sigma("t1_ps"));
  CHECK(std::abs(r.value("t1_ps") - 162.0) <= 7.0);
}

TEST_CASE("beating lifetime fit with Poisson noise") {
  LifetimeTrace trace;
  trace.time_ps = linspace(0.0, 2500.0, 1250);
  const auto clean = evaluate(lifetime_curve(trace.time_ps, LifetimeModel::FssBeating), {128.0, 6.7, 1e4, 0.0, 5.0});
  std::mt19937_64 rng(37);
  for (double c : clean) {
    std::poisson_distribution<long> p(c);
    trace.counts.push_back(static_cast<double>(p(rng)));
  }
  const auto r = fit_lifetime(trace, LifetimeModel::FssBeating);
  CHECK(r.converged);
  CHECK(std::abs(r.value("t1_ps") - 128.0) <= 2.0 * std::max(r.sigma("t1_ps"), 3.0));
  CHECK(std::abs(r.value("fss_ueV") - 6.7) <= 2.0 * std::max(r.sigma("fss_ueV"), 0.1));
}

TEST_CASE("lifetime fit is order invariant and checks its preconditions") {
  LifetimeTrace trace;
  trace.time_ps = linspace(0.0, 1500.0, 300);
  trace.counts = evaluate(lifetime_curve(trace.time_ps, LifetimeModel::MonoExp), {200.0, 500.0, 2.0});
  const auto a = fit_lifetime(trace, LifetimeModel::MonoExp);
  LifetimeTrace reversed = trace;
  std::reverse(reversed.time_ps.begin(), reversed.time_ps.end());
  std::reverse(reversed.counts.begin(), reversed.counts.end());
  const auto b = fit_lifetime(reversed, LifetimeModel::MonoExp);
  CHECK(a.params == b.params);
  CHECK(a.value("t1_ps") == Approx(200.0).epsilon(1e-6));

  LifetimeTrace short_trace;
  short_trace.time_ps = linspace(0.0, 1500.0, 50);
  short_trace.counts.assign(50, 1.0);
  CHECK_THROWS_AS(fit_lifetime(short_trace, LifetimeModel::MonoExp), EstimationError);
  LifetimeTrace narrow;
  narrow.time_ps = linspace(0.0, 300.0, 200);
  narrow.counts = evaluate(lifetime_curve(narrow.time_ps, LifetimeModel::MonoExp), {200.0, 500.0, 0.0});
  CHECK_THROWS_AS(fit_lifetime(narrow, LifetimeModel::MonoExp), EstimationError);
}

TEST_CASE("reflectivity fit") {
  for (auto [xc, q, seed] : {std::tuple{924.734, 2900.0, 1}, std::tuple{924.817, 1700.0, 2}}) {
    const auto noisy = fit_reflectivity(synthetic_spectrum(xc, q, 0.01, static_cast<std::uint64_t>(seed)));
    CHECK(noisy.converged);
    CHECK(noisy.value("q") == Approx(q).epsilon(0.05));
    const auto exact = fit_reflectivity(synthetic_spectrum(xc, q, 0.0, 0));
    CHECK(exact.value("q") == Approx(q).epsilon(1e-6));
    CHECK(exact.value("x_c_nm") == Approx(xc).epsilon(1e-9));
  }
  ReflectivitySpectrum narrow;
  narrow.wavelength_nm = linspace(924.7, 924.77, 50);
  narrow.reflectivity = evaluate(reflectivity_curve(narrow.wavelength_nm), {924.734, 0.32, 0.6, 0.9});
  CHECK_THROWS_AS(fit_reflectivity(narrow), EstimationError);
}

TEST_CASE("delay fit shares V(0) and handles flat series") {
  const double gamma = 1000.0 / 162.0;
  DelayVisibilitySeries f, u;
  for (double d : {12.2, 100.0, 300.0, 525.0}) {
    f.entries.push_back({d, 0.9, 0.0, false});
    u.entries.push_back({d, 0.9, 0.0, false});
  }
  const auto r = fit_delay_visibility(f, u, Rate{gamma});
  CHECK(r.value("v0") == Approx(0.9).epsilon(1e-9));
  CHECK(r.value("delta_omega_filtered") <= 1e-3 * gamma + r.sigma("delta_omega_filtered"));
  CHECK(r.value("delta_omega_unfiltered") <= 1e-3 * gamma + r.sigma("delta_omega_unfiltered"));

  // Both series evaluate to the shared intrinsic value at zero delay.
  const std::vector<double> zero{0.0};
  const auto curve = delay_visibility_curve(zero, zero, Rate{gamma});
  Eigen::VectorXd out;
  curve.predict(Eigen::Map<const Eigen::VectorXd>(r.params.data(), 4), out);
  CHECK(out(0) == out(1));

  DelayVisibilitySeries tiny;
  tiny.entries = {{12.2, 0.9, 0.0, false}, {525.0, 0.8, 0.0, false}};
  CHECK_THROWS_AS(fit_delay_visibility(tiny, u, Rate{gamma}), EstimationError);
  DelayVisibilitySeries mixed = f;
  mixed.entries[0].sigma_v = 0.01;
  CHECK_THROWS_AS(fit_delay_visibility(mixed, u, Rate{gamma}), DomainError);
}
