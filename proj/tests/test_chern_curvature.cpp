#include "doctest.h"

#include "hsw/chern_curvature.hpp"

#include <cmath>
#include <random>

using namespace hsw;

namespace {

const Complex I(0.0, 1.0);

ScalarField cos_x1(const PeriodicGrid& g, double eps) {
  return ScalarField::sample(g, [eps](double a, double, double, double) { return Complex(eps * std::cos(a)); });
}

ScalarField smooth_real(const PeriodicGrid& g, double s) {
  return ScalarField::sample(g, [s](double x1, double x2, double x3, double x4) {
    return Complex(s * (std::cos(x1 + x2) + 0.5 * std::sin(x3 - x4) + 0.3 * std::cos(x2 + x4)));
  });
}

HermitianMatrixField varying_unimodular(const PeriodicGrid& g, double c = 4.0) {
  const auto a = ScalarField::sample(g, [c](double x1, double, double x3, double) {
    return Complex((c - 1.0) / (c + std::cos(x1 + x3)));
  });
  const auto b = ScalarField::sample(g, [](double, double x2, double, double x4) {
    return Complex(0.2 * std::cos(x2), 0.1 * std::sin(x4));
  });
  return HermitianMatrixField::unimodular(a, b);
}

Eigen::Matrix2cd sample_M() {
  Eigen::Matrix2cd M;
  M << Complex(0.3, 0.1), Complex(-0.2, 0.05), Complex(0.1, -0.3), Complex(0.25, 0.0);
  return M;
}

}  // namespace

TEST_CASE("curvature of trivial metrics vanishes") {
  const PeriodicGrid g(8);
  CHECK(curvature(HermitianMatrixField::identity(g, 2)).max_abs() < 1e-15);
  HermitianMatrixField G(g, 2);
  G.set(0, 0, ScalarField(g, 2.0));
  G.set(0, 1, ScalarField(g, Complex(0.3, -0.4)));
  G.set(1, 1, ScalarField(g, 1.5));
  CHECK(curvature(G).max_abs() < 1e-14);
}

TEST_CASE("conformal line bundle metric") {
  const PeriodicGrid g(24);
  const auto u = smooth_real(g, 0.2);
  HermitianMatrixField G(g, 1);
  G.set(0, 0, u.exp());
  const auto R = curvature(G);
  // dbar d u = -ddbar u
  const Spectrum s(u);
  for (int k = 0; k < 2; ++k) {
    for (int l = 0; l < 2; ++l) {
      const Mask m = (1u << k) | (4u << l);
      CHECK((R.entry(0, 0).coefficient(m) + s.dz_dzbar(k, l)).max_abs() < 1e-10);
    }
  }
}

TEST_CASE("singular metric is rejected with a location") {
  const PeriodicGrid g(8);
  HermitianMatrixField G(g, 1);
  G.set(0, 0, cos_x1(g, 1.0));
  CHECK_THROWS_WITH_AS(curvature(G), doctest::Contains("grid point"), std::invalid_argument);
}

TEST_CASE("conformal shift and trace identities") {
  const PeriodicGrid g(24);
  const auto G = varying_unimodular(g, 8.0);
  CHECK(G.hermitian_defect() == 0.0);
  CHECK((G.determinant() - ScalarField(g, 1.0)).max_abs() < 1e-13);
  const auto u = smooth_real(g, 0.1);
  const auto R = curvature(G);
  const auto Ru = curvature(G.scaled(u.exp()));
  const Spectrum s(u);
  for (int k = 0; k < 2; ++k) {
    for (int l = 0; l < 2; ++l) {
      const Mask m = (1u << k) | (4u << l);
      const ScalarField shift = -s.dz_dzbar(k, l);
      for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
          ScalarField expected = R.entry(i, j).coefficient(m);
          if (i == j) expected += shift;
          CHECK((Ru.entry(i, j).coefficient(m) - expected).max_abs() < 1e-9);
        }
      }
      // det G_B = 1 => tr R_B = 0
      CHECK((R.entry(0, 0).coefficient(m) + R.entry(1, 1).coefficient(m)).max_abs() < 1e-9);
    }
  }
}

TEST_CASE("trace of curvature is ddbar log det") {
  const PeriodicGrid g(24);
  HermitianMatrixField G(g, 2);
  const auto f = smooth_real(g, 0.2);
  G.set(0, 0, f.exp());
  G.set(0, 1, cos_x1(g, 0.3) * Complex(1.0, 0.5));
  G.set(1, 1, ScalarField(g, 2.0) + smooth_real(g, 0.1));
  const auto logdet = G.determinant().map([](Complex z) { return std::log(z); });
  const Spectrum s(logdet);
  const auto R = curvature(G);
  double err = 0.0, scale = 0.0;
  for (int k = 0; k < 2; ++k) {
    for (int l = 0; l < 2; ++l) {
      const Mask m = (1u << k) | (4u << l);
      const auto tr = R.entry(0, 0).coefficient(m) + R.entry(1, 1).coefficient(m);
      err = std::max(err, (tr + s.dz_dzbar(k, l)).max_abs());
      scale = std::max(scale, tr.max_abs());
    }
  }
  CHECK(err < 1e-7 * scale);
}

TEST_CASE("curvature reality: R^{kl} G = (R^{lk} G)^*") {
  const PeriodicGrid g(24);
  const auto G = varying_unimodular(g, 8.0);
  const auto R = curvature(G);
  double err = 0.0;
  for (std::size_t p = 0; p < g.size(); p += 37) {
    const auto Rp = R.at(p);
    const MatrixC Gp = G.at(p);
    for (int k = 0; k < 2; ++k)
      for (int l = 0; l < 2; ++l)
        err = std::max(err, (Rp[2 * k + l] * Gp - (Rp[2 * l + k] * Gp).adjoint()).cwiseAbs().maxCoeff());
  }
  CHECK(err < 1e-8);
}

TEST_CASE("jet curvature agrees with spectral curvature on periodic metrics") {
  const PeriodicGrid g(24);
  const auto G = varying_unimodular(g, 8.0);
  const auto R = curvature(G);
  const HermitianJetField jet(G);
  double err = 0.0;
  for (std::size_t p = 0; p < g.size(); p += 53) {
    const auto a = curvature_at(jet.at(p));
    const auto b = R.at(p);
    for (int i = 0; i < 4; ++i) err = std::max(err, (a[i] - b[i]).cwiseAbs().maxCoeff());
  }
  CHECK(err < 1e-9);
}

TEST_CASE("assemble_total_metric") {
  const PeriodicGrid g(8);
  const auto GB = varying_unimodular(g, 3.0);
  SUBCASE("A = 0") {
    const auto G = assemble_total_metric(GB, PotentialMatrix{});
    for (int i = 0; i < 2; ++i) {
      CHECK((G.entry(i, 2)).max_abs() == 0.0);
      for (int j = 0; j < 2; ++j) CHECK((G.entry(i, j) - GB.entry(i, j)).max_abs() == 0.0);
    }
    CHECK((G.entry(2, 2) - ScalarField(g, 1.0)).max_abs() == 0.0);
  }
  SUBCASE("constant A on the identity") {
    const Complex c(0.4, -0.7);
    PotentialMatrix A;
    A.periodic[0] = ScalarField(g, c);
    const auto G = assemble_total_metric(HermitianMatrixField::identity(g, 2), A);
    CHECK((G.entry(0, 0) - ScalarField(g, 1.0 + std::norm(c))).max_abs() < 1e-15);
    CHECK((G.entry(0, 2) - ScalarField(g, c)).max_abs() == 0.0);
    CHECK((G.entry(2, 0) - ScalarField(g, std::conj(c))).max_abs() == 0.0);
  }
  SUBCASE("Schur complement: det G = det G_B") {
    PotentialMatrix A = PotentialMatrix::constant_delbar(sample_M());
    A.periodic[1] = cos_x1(g, 0.5) * Complex(1.0, 1.0);
    const auto G = assemble_total_metric(GB, A);
    CHECK(G.hermitian_defect() < 1e-15);
    CHECK((G.determinant() - GB.determinant()).max_abs() < 1e-10);
  }
}

TEST_CASE("rho from potential") {
  const PeriodicGrid g(8);
  const auto id = HermitianMatrixField::identity(g, 2);
  CHECK(rho_from_potential(PotentialMatrix{}, id).max_abs() == 0.0);

  const Eigen::Matrix2cd M = sample_M();
  const auto rho = rho_from_potential(PotentialMatrix::constant_delbar(M), id);
  CHECK(rho.is_real(1e-12));
  CHECK(rho.bidegree() == std::optional<std::pair<int, int>>({1, 1}));
  // brute force: coefficient of dz_m ^ dzbar_l is i sum_i M_il conj(M_im)
  for (int m = 0; m < 2; ++m) {
    for (int l = 0; l < 2; ++l) {
      Complex expected = 0.0;
      for (int i = 0; i < 2; ++i) expected += I * M(i, l) * std::conj(M(i, m));
      const Mask mask = (1u << m) | (4u << l);
      CHECK((rho.coefficient(mask) - ScalarField(g, expected)).max_abs() < 1e-15);
    }
  }

  const auto GB = varying_unimodular(g, 3.0);
  const auto u = smooth_real(g, 0.3);
  const auto r0 = rho_from_potential(PotentialMatrix::constant_delbar(M), GB);
  const auto r1 = rho_from_potential(PotentialMatrix::constant_delbar(M), GB.scaled(u.exp()));
  CHECK((r1 - (-u).exp() * r0).max_abs() < 1e-14);
  CHECK(r0.is_real(1e-12));

  PotentialMatrix shifted = PotentialMatrix::constant_delbar(M);
  shifted.periodic[0] = ScalarField(g, Complex(3.0, -1.0));
  shifted.periodic[1] = ScalarField(g, Complex(-2.0, 0.5));
  CHECK((rho_from_potential(shifted, GB) - r0).max_abs() < 1e-14);
}

TEST_CASE("trace identity for the bordered metric") {
  SUBCASE("trivial data") {
    const PeriodicGrid g(8);
    CHECK(rr_identity_residual(ScalarField(g), HermitianMatrixField::identity(g, 2), PotentialMatrix{}) == 0.0);
  }
  SUBCASE("A = 0, G_B = I, u = 0.1 cos x1") {
    const PeriodicGrid g(16);
    const auto r = rr_identity_report(cos_x1(g, 0.1), HermitianMatrixField::identity(g, 2), PotentialMatrix{});
    // u depends on x1 only, so ddbar u ^ ddbar u = 0 and both sides vanish
    CHECK(r.absolute <= 1e-12);
    CHECK(r.relative <= 1e-8);
  }
  SUBCASE("A = 0, G_B = I, u depending on z1 and z2") {
    const PeriodicGrid g(16);
    const auto u = ScalarField::sample(g, [](double a, double, double c, double) {
      return Complex(0.1 * std::cos(a) + 0.05 * std::cos(c));
    });
    const auto r = rr_identity_report(u, HermitianMatrixField::identity(g, 2), PotentialMatrix{});
    CHECK(r.rhs_max > 1e-4);
    CHECK(r.relative <= 1e-8);
  }
  SUBCASE("constant dbar A, G_B = I") {
    const PeriodicGrid g(16);
    const auto A = PotentialMatrix::constant_delbar(sample_M());
    CHECK(rr_identity_residual(cos_x1(g, 0.1), HermitianMatrixField::identity(g, 2), A) <= 1e-10);
  }
  SUBCASE("periodic part of A and a varying G_B") {
    const PeriodicGrid g(16);
    PotentialMatrix A = PotentialMatrix::constant_delbar(sample_M());
    A.periodic[0] = ScalarField::sample(g, [](double, double x2, double x3, double) {
      return Complex(0.1 * std::cos(x2 - x3), 0.05 * std::sin(x3));
    });
    const auto r = rr_identity_report(cos_x1(g, 0.1), varying_unimodular(g, 8.0), A);
    CHECK(r.relative <= 1e-6);
  }
  SUBCASE("a wrong coefficient is detected") {
    // the rho term is essential: dropping A's contribution from the left breaks the identity
    const PeriodicGrid g(16);
    const auto A = PotentialMatrix::constant_delbar(sample_M());
    const auto full = rr_identity_report(cos_x1(g, 0.1), HermitianMatrixField::identity(g, 2), A);
    const auto none = rr_identity_report(cos_x1(g, 0.1), HermitianMatrixField::identity(g, 2), PotentialMatrix{});
    CHECK(std::abs(full.lhs_max - none.lhs_max) > 1e-4);
  }
}

TEST_CASE("hermitian yang-mills residual") {
  const PeriodicGrid g(8);
  const auto w = kahler_form(g);
  CurvatureMatrixField zero(g, 2);
  const auto r0 = hym_residual(zero, w);
  CHECK(r0.first == 0.0);
  CHECK(r0.second == 0.0);

  const Complex h(0.0, 0.5);
  const auto w1 = BaseForm::constant(g, 2, {{kDz1 | kDzbar1, h}, {kDz2 | kDzbar2, -h}});
  CurvatureMatrixField F(g, 2);
  F.entry(0, 0) = I * w1;
  F.entry(1, 1) = -I * w1;
  const auto r1 = hym_residual(F, w);
  CHECK(r1.first <= 1e-10);
  CHECK(r1.second <= 1e-10);

  CurvatureMatrixField Fb(g, 2);
  Fb.entry(0, 0) = I * w;
  Fb.entry(1, 1) = -I * w;
  CHECK(hym_residual(Fb, w).first > 0.1);

  CurvatureMatrixField F02(g, 1);
  F02.entry(0, 0) = BaseForm::constant(g, 2, {{kDzbar1 | kDzbar2, 1.0}});
  CHECK(hym_residual(F02, w).second == doctest::Approx(1.0));
}
