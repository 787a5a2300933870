#include "doctest.h"

#include "hsw/errors.hpp"
#include "hsw/fuyau_solver.hpp"

#include <cmath>
#include <random>

using namespace hsw;

namespace {

const Complex I(0.0, 1.0);
const double kVol = std::pow(kTwoPi, 4);

// rho = i sum h_kl dz_k ^ dzbar_l with h Hermitian.
BaseForm hermitian_rho(const PeriodicGrid& g, double h00, Complex h01, double h11) {
  return BaseForm::constant(g, 2,
                            {{kDz1 | kDzbar1, I * h00},
                             {kDz1 | kDzbar2, I * h01},
                             {kDz2 | kDzbar1, I * std::conj(h01)},
                             {kDz2 | kDzbar2, I * h11}});
}

BaseForm sample_rho(const PeriodicGrid& g) { return hermitian_rho(g, 0.3, Complex(0.1, 0.05), 0.2); }

ScalarField u_star(const PeriodicGrid& g) {
  return ScalarField::sample(g, [](double x1, double, double x3, double) {
    return Complex(0.1 * std::cos(x1) + 0.05 * std::cos(x3));
  });
}

// Random real trigonometric polynomial with wavenumbers |k_a| <= kmax.
ScalarField random_band_limited(const PeriodicGrid& g, unsigned seed, double amp, int kmax = 2, int terms = 6) {
  std::mt19937 rng(seed);
  std::uniform_int_distribution<int> kd(-kmax, kmax);
  std::uniform_real_distribution<double> cd(-1.0, 1.0);
  struct Term { int k[4]; double a, b; };
  std::vector<Term> ts;
  for (int i = 0; i < terms; ++i) ts.push_back({{kd(rng), kd(rng), kd(rng), kd(rng)}, cd(rng), cd(rng)});
  return ScalarField::sample(g, [&](double x1, double x2, double x3, double x4) {
    double s = 0.0;
    for (const auto& t : ts) {
      const double ph = t.k[0] * x1 + t.k[1] * x2 + t.k[2] * x3 + t.k[3] * x4;
      s += t.a * std::cos(ph) + t.b * std::sin(ph);
    }
    return Complex(amp * s);
  });
}

ScalarField mean_zero(ScalarField f) {
  f += -f.mean();
  return f;
}

double max_diff(const ScalarField& a, const ScalarField& b) { return (a - b).max_abs(); }

// Residual assembled from the generic form algebra, as an independent check.
ScalarField residual_generic(const ScalarField& u, const EquationData& data, double t) {
  const auto& g = u.grid();
  ScalarField r = top_density(wedge(i_ddbar(u.exp()), kahler_form(g)));
  if (data.rho.grid().n() > 0) {
    const BaseForm gr = (-u).exp() * data.rho;
    r += (data.sign_rho * t * data.alpha) * top_density(I * del(delbar(gr)));
  }
  const BaseForm h = i_ddbar(u);
  r += (0.5 * data.alpha) * top_density(wedge(h, h));
  r += t * data.mu;
  return r;
}

SolverParams manufactured_params(const ScalarField& us) {
  SolverParams p;
  p.delta = 2.0;
  p.tau = 0.1;
  p.A_norm = exp_integral(us);
  p.newton_tol = 1e-11;
  return p;
}

}  // namespace

TEST_CASE("residual: trivial examples") {
  const PeriodicGrid g(8);
  EquationData data;
  data.rho = sample_rho(g);
  data.mu = ScalarField(g);
  data.alpha = 0.7;
  CHECK(residual(ScalarField(g, 0.4), data, 0.6).max_abs() <= 1e-13);

  EquationData d2;
  d2.mu = mean_zero(random_band_limited(g, 3, 0.5));
  d2.alpha = -1.3;
  CHECK(max_diff(residual(ScalarField(g, 0.0), d2, 1.0), d2.mu) <= 1e-15);
}

TEST_CASE("residual agrees with the generic form algebra") {
  const PeriodicGrid g(12);
  EquationData data;
  data.mu = mean_zero(random_band_limited(g, 5, 0.3));
  data.alpha = 0.35;
  const ScalarField u = random_band_limited(g, 6, 0.1);
  SUBCASE("constant rho") { data.rho = sample_rho(g); }
  SUBCASE("varying rho") {
    const auto f = ScalarField::sample(g, [](double x1, double, double, double x4) {
      return Complex(1.0 + 0.2 * std::cos(x1 - x4));
    });
    data.rho = f * sample_rho(g);
  }
  SUBCASE("sign +1") {
    data.rho = sample_rho(g);
    data.sign_rho = 1;
  }
  const ScalarField a = residual(u, data, 0.7);
  const ScalarField b = residual_generic(u, data, 0.7);
  CHECK(max_diff(a, b) <= 1e-12);
  CHECK(a.max_imag() == 0.0);
}

TEST_CASE("residual integrates to zero") {
  const PeriodicGrid g(12);
  for (unsigned seed = 0; seed < 4; ++seed) {
    EquationData data;
    data.rho = sample_rho(g);
    data.mu = ScalarField(g);
    data.alpha = seed % 2 == 0 ? 0.4 : -0.4;
    const ScalarField u = random_band_limited(g, 100 + seed, 0.15, 3);
    const ScalarField r = residual(u, data, 0.8);
    CHECK(std::abs(r.mean()) <= 1e-10 * r.max_abs());
  }
}

TEST_CASE("manufacture") {
  const PeriodicGrid g(16);
  SUBCASE("zero") {
    const auto data = manufacture(ScalarField(g), BaseForm(g, 2), 0.3);
    CHECK(data.mu.max_abs() == 0.0);
  }
  SUBCASE("alpha = 0 matches the analytic Laplacian") {
    const double eps = 0.1;
    const auto us = ScalarField::sample(g, [eps](double x1, double, double, double) { return Complex(eps * std::cos(x1)); });
    const auto data = manufacture(us, BaseForm(g, 2), 0.0);
    const auto expected = ScalarField::sample(g, [eps](double x1, double, double, double) {
      const double e = std::exp(eps * std::cos(x1));
      const double s = std::sin(x1);
      return Complex(-0.5 * e * (-eps * std::cos(x1) + eps * eps * s * s));
    });
    CHECK(max_diff(data.mu, expected) <= 1e-9);
  }
  SUBCASE("mean zero with rho and alpha") {
    const auto us = u_star(g);
    const auto data = manufacture(us, sample_rho(g), 0.2);
    CHECK(std::abs(data.mu.mean()) <= 1e-10 * data.mu.max_abs());
    CHECK(residual(us, data, 1.0).max_abs() <= 1e-9);
    CHECK_NOTHROW(data.validate());
  }
}

TEST_CASE("equation data validation") {
  const PeriodicGrid g(8);
  EquationData data;
  data.mu = ScalarField(g, 0.1);
  CHECK_THROWS_AS(data.validate(), FeasibilityError);
  data.mu = ScalarField(g);
  data.sign_rho = 0;
  CHECK_THROWS_AS(data.validate(), std::invalid_argument);
  data.sign_rho = 1;
  data.rho = BaseForm::constant(g, 2, {{kDz1 | kDz2, 1.0}});
  CHECK_THROWS_AS(data.validate(), std::invalid_argument);
}

TEST_CASE("linearize: plane wave eigenvalue and constants") {
  const PeriodicGrid g(8);
  EquationData data;
  data.mu = ScalarField(g);
  data.alpha = 0.5;
  const double u0 = 0.3;
  const auto op = linearize(ScalarField(g, u0), data, 1.0);
  const auto wave = ScalarField::sample(g, [](double x1, double, double, double) { return std::exp(I * x1); });
  CHECK(max_diff(op.apply(wave), -0.5 * std::exp(u0) * wave) <= 1e-13);
  const auto wave2 = ScalarField::sample(g, [](double, double x2, double x3, double) { return Complex(std::cos(2 * x2 + x3)); });
  CHECK(max_diff(op.apply(wave2), -2.5 * std::exp(u0) * wave2) <= 1e-13);
  CHECK(op.apply(ScalarField(g, 1.0)).max_abs() <= 1e-14);
}

TEST_CASE("linearize: second-order agreement with central differences") {
  const PeriodicGrid g(12);
  EquationData data;
  data.rho = sample_rho(g);
  data.mu = mean_zero(random_band_limited(g, 9, 0.2));
  data.alpha = -0.3;
  const ScalarField u0 = random_band_limited(g, 10, 0.1);
  const ScalarField v = random_band_limited(g, 11, 1.0);
  const double t = 0.6;
  const auto op = linearize(u0, data, t);
  const ScalarField lv = op.apply(v);
  double err[2];
  const double eps[2] = {1e-3, 1e-4};
  for (int i = 0; i < 2; ++i) {
    const ScalarField fd = (1.0 / (2 * eps[i])) * (residual(u0 + eps[i] * v, data, t) - residual(u0 - eps[i] * v, data, t));
    err[i] = max_diff(fd, lv);
  }
  CHECK(err[1] <= 1e-5);
  // Richardson slope: a factor 10 in eps gives about 100 in the error.
  CHECK(err[0] / err[1] >= 50.0);
}

TEST_CASE("preconditioned linear solve") {
  const PeriodicGrid g(12);
  EquationData data;
  data.rho = sample_rho(g);
  data.mu = ScalarField(g);
  data.alpha = 0.2;
  const ScalarField u0 = random_band_limited(g, 12, 0.1) + Complex(0.5);
  const auto op = linearize(u0, data, 1.0);
  const ScalarField f = drop_null_modes(random_band_limited(g, 13, 1.0));
  int its = 0;
  const ScalarField w = solve_linearized(op, f, 1e-13, 300, &its);
  CHECK(max_diff(drop_null_modes(op.apply(w)), f) <= 1e-10);
  CHECK(max_diff(drop_null_modes(w), w) <= 1e-14);
  CHECK(std::abs(w.mean()) <= 1e-13);
  CHECK(its < 60);
}

TEST_CASE("upsilon check") {
  const PeriodicGrid g(8);
  SolverParams p;
  p.delta = 1e-2;
  p.tau = 1e-2;
  p.A_norm = 1.0;
  auto f = upsilon_check(ScalarField(g, 5.0), 0.1, p);
  CHECK(f.exp_bound);
  CHECK(f.hessian_bound);
  p.delta = 0.5;
  CHECK_FALSE(upsilon_check(ScalarField(g, 0.0), 0.1, p).exp_bound);

  const auto u = ScalarField::sample(g, [](double x1, double, double, double) { return Complex(0.1 * std::cos(x1)); });
  CHECK(hessian_norm(u).max_abs() == doctest::Approx(0.05).epsilon(1e-12));
  p.tau = 1e-3;
  CHECK_FALSE(upsilon_check(u, 1.0, p).hessian_bound);
  p.tau = 0.1;
  CHECK(upsilon_check(u, 1.0, p).hessian_bound);
}

TEST_CASE("comparison form positivity") {
  const PeriodicGrid g(8);
  EquationData data;
  data.mu = ScalarField(g);
  data.rho = sample_rho(g);
  data.alpha = 0.1;
  const auto u = ScalarField::sample(g, [](double x1, double, double, double) { return Complex(0.1 * std::cos(x1)); });
  CHECK(comparison_form_positive(u, data, 1.0));
  data.alpha = 100.0;  // alpha u_{1 1bar} reaches -2.5, below e^u / 2
  CHECK_FALSE(comparison_form_positive(u, data, 0.0));
  data.alpha = 20.0;  // the rho term alone: e^u/2 - 20 * 0.3 e^{-u} < 0
  CHECK_FALSE(comparison_form_positive(ScalarField(g, 0.0), data, 1.0));
}

TEST_CASE("solve_at_t: mu = 0 gives the normalized constant") {
  const PeriodicGrid g(8);
  EquationData data;
  data.mu = ScalarField(g);
  data.alpha = 0.3;
  SolverParams p;
  p.A_norm = kVol * std::exp(3.0);
  const auto s = solve_at_t(ScalarField(g, 2.2), data, 0.5, p);
  CHECK(s.newton_iterations <= 2);
  CHECK(max_diff(s.u, ScalarField(g, 3.0)) <= 1e-12);
  CHECK(constant_solution(p.A_norm) == doctest::Approx(3.0));
  CHECK(s.in_upsilon);
  CHECK(s.omega_positive);
}

TEST_CASE("solve_at_t: manufactured recovery at t = 1") {
  const PeriodicGrid g(16);
  const ScalarField us = u_star(g);
  const auto data = manufacture(us, sample_rho(g), 0.2);
  const auto p = manufactured_params(us);
  const auto s = solve_at_t(ScalarField(g, constant_solution(p.A_norm)), data, 1.0, p);
  CHECK(max_diff(s.u, us) <= 1e-6);
  CHECK(std::abs(exp_integral(s.u) - p.A_norm) <= 1e-9 * p.A_norm);
  CHECK(s.residual_norm <= p.newton_tol);
}

TEST_CASE("solve_at_t: alpha = 0 matches the linear oracle") {
  const PeriodicGrid g(12);
  EquationData data;
  data.mu = mean_zero(random_band_limited(g, 21, 0.1));
  data.alpha = 0.0;
  SolverParams p;
  p.delta = 2.0;
  p.A_norm = kVol;
  p.newton_tol = 1e-12;
  const auto s = solve_at_t(ScalarField(g, 0.0), data, 1.0, p);
  const ScalarField ref = linear_oracle(data.mu, 1.0, p.A_norm);
  CHECK(max_diff(s.u.exp(), ref.exp()) <= 1e-8);
}

TEST_CASE("linear oracle rejects non-positive e^u") {
  const PeriodicGrid g(8);
  const auto mu = ScalarField::sample(g, [](double x1, double, double, double) { return Complex(std::cos(x1)); });
  CHECK_THROWS_AS(linear_oracle(mu, 1.0, kVol * 0.5), FeasibilityError);
}

TEST_CASE("solve_at_t errors") {
  const PeriodicGrid g(8);
  EquationData data;
  data.mu = mean_zero(random_band_limited(g, 31, 0.2));
  data.alpha = 0.0;
  SolverParams p;
  p.delta = 2.0;
  p.A_norm = kVol;
  p.newton_tol = 1e-30;
  p.max_newton = 2;
  CHECK_THROWS_WITH_AS(solve_at_t(ScalarField(g, 0.0), data, 1.0, p), doctest::Contains("max_newton"), FeasibilityError);
  p.delta = 0.5;
  CHECK_THROWS_WITH_AS(solve_at_t(ScalarField(g, 0.0), data, 1.0, p), doctest::Contains("left admissible set"),
                       FeasibilityError);
}

TEST_CASE("continuity_solve") {
  SUBCASE("mu = 0 keeps the constant") {
    const PeriodicGrid g(8);
    EquationData data;
    data.mu = ScalarField(g);
    data.rho = BaseForm(g, 2);
    data.alpha = 0.2;
    SolverParams p;
    p.A_norm = kVol * std::exp(3.0);
    p.t_steps = 4;
    const auto s = continuity_solve(data, p);
    CHECK(s.trace.size() == 5);
    CHECK(s.newton_iterations <= 4);
    CHECK(max_diff(s.u, ScalarField(g, 3.0)) <= 1e-12);
    CHECK(s.t == 1.0);
  }
  SUBCASE("manufactured alpha = -0.2") {
    const PeriodicGrid g(16);
    const ScalarField us = u_star(g);
    const auto data = manufacture(us, sample_rho(g), -0.2);
    auto p = manufactured_params(us);
    p.newton_tol = 5e-8;
    const auto s = continuity_solve(data, p);
    CHECK(max_diff(s.u, us) <= 1e-6);
    CHECK(s.newton_iterations <= 20);
    CHECK(s.trace.size() == 11);
  }
  SUBCASE("alpha scaled x100 leaves the admissible set") {
    const PeriodicGrid g(16);
    const ScalarField us = u_star(g);
    const auto data = manufacture(us, sample_rho(g), 20.0);
    auto p = manufactured_params(us);
    CHECK_THROWS_WITH_AS(continuity_solve(data, p), doctest::Contains("left admissible set Υ"), FeasibilityError);
  }
}
