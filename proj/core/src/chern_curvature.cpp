#include "hsw/chern_curvature.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace hsw {

namespace {

Mask mixed_mask(int k, int l) { return (1u << k) | (4u << l); }

std::string location(const PeriodicGrid& g, std::size_t p) {
  const auto idx = g.unflatten(p);
  return "(" + std::to_string(idx[0]) + ", " + std::to_string(idx[1]) + ", " + std::to_string(idx[2]) + ", " +
         std::to_string(idx[3]) + ")";
}

}  // namespace

HermitianMatrixField::HermitianMatrixField(const PeriodicGrid& grid, int rank)
    : grid_(grid), rank_(rank), entries_(static_cast<std::size_t>(rank * rank), ScalarField(grid)) {
  if (rank < 1) throw std::invalid_argument("matrix rank must be positive");
}

HermitianMatrixField HermitianMatrixField::identity(const PeriodicGrid& grid, int rank) {
  HermitianMatrixField G(grid, rank);
  for (int i = 0; i < rank; ++i) G.entries_[i * rank + i] = ScalarField(grid, 1.0);
  return G;
}

HermitianMatrixField HermitianMatrixField::unimodular(const ScalarField& a, const ScalarField& b) {
  HermitianMatrixField G(a.grid(), 2);
  const ScalarField ar = a.real_part();
  ScalarField dd(a.grid());
  for (std::size_t p = 0; p < dd.size(); ++p) dd[p] = (1.0 + std::norm(b[p])) / ar[p].real();
  G.set(0, 0, ar);
  G.set(0, 1, b);
  G.set(1, 1, dd);
  return G;
}

void HermitianMatrixField::set(int i, int j, const ScalarField& f) {
  if (!(f.grid() == grid_)) throw std::invalid_argument("fields live on different grids");
  entries_[i * rank_ + j] = f;
  if (i != j) entries_[j * rank_ + i] = f.conj();
}

MatrixC HermitianMatrixField::at(std::size_t p) const {
  MatrixC m(rank_, rank_);
  for (int i = 0; i < rank_; ++i)
    for (int j = 0; j < rank_; ++j) m(i, j) = entries_[i * rank_ + j][p];
  return m;
}

HermitianMatrixField HermitianMatrixField::scaled(const ScalarField& factor) const {
  HermitianMatrixField out(*this);
  for (auto& e : out.entries_) e *= factor;
  return out;
}

ScalarField HermitianMatrixField::determinant() const {
  ScalarField out(grid_);
  for (std::size_t p = 0; p < out.size(); ++p) out[p] = at(p).determinant();
  return out;
}

double HermitianMatrixField::hermitian_defect() const {
  double m = 0.0;
  for (int i = 0; i < rank_; ++i)
    for (int j = i; j < rank_; ++j)
      m = std::max(m, (entry(i, j) - entry(j, i).conj()).max_abs());
  return m;
}

void HermitianMatrixField::check_positive() const {
  for (std::size_t p = 0; p < grid_.size(); ++p) {
    const MatrixC m = at(p);
    for (int k = 1; k <= rank_; ++k) {
      const Complex minor = m.topLeftCorner(k, k).determinant();
      if (!(minor.real() > 0.0)) {
        throw std::invalid_argument("matrix field not positive definite at grid point " + location(grid_, p) +
                                    " (leading minor " + std::to_string(k) + " = " + std::to_string(minor.real()) + ")");
      }
    }
  }
}

CurvatureMatrixField::CurvatureMatrixField(const PeriodicGrid& grid, int rank)
    : grid_(grid), rank_(rank), entries_(static_cast<std::size_t>(rank * rank), BaseForm(grid, 2)) {}

std::array<MatrixC, 4> CurvatureMatrixField::at(std::size_t p) const {
  std::array<MatrixC, 4> out;
  for (int k = 0; k < 2; ++k) {
    for (int l = 0; l < 2; ++l) {
      MatrixC m = MatrixC::Zero(rank_, rank_);
      for (int i = 0; i < rank_; ++i) {
        for (int j = 0; j < rank_; ++j) {
          if (const ScalarField* c = entry(i, j).component(mixed_mask(k, l))) m(i, j) = (*c)[p];
        }
      }
      out[2 * k + l] = m;
    }
  }
  return out;
}

double CurvatureMatrixField::max_abs() const {
  double m = 0.0;
  for (const auto& e : entries_) m = std::max(m, e.max_abs());
  return m;
}

CurvatureMatrixField curvature(const HermitianMatrixField& G) {
  G.check_positive();
  const PeriodicGrid& g = G.grid();
  const int r = G.rank();
  // dG per entry
  std::array<std::vector<ScalarField>, 2> dG;
  for (int i = 0; i < r; ++i) {
    for (int j = 0; j < r; ++j) {
      const Spectrum s(G.entry(i, j));
      dG[0].push_back(s.derivative(Derivative::dz1));
      dG[1].push_back(s.derivative(Derivative::dz2));
    }
  }
  // P_k = (d_k G) G^{-1}
  std::array<std::vector<ScalarField>, 2> P;
  for (int k = 0; k < 2; ++k) P[k].assign(static_cast<std::size_t>(r * r), ScalarField(g));
  for (std::size_t p = 0; p < g.size(); ++p) {
    const MatrixC inv = G.at(p).inverse();
    for (int k = 0; k < 2; ++k) {
      MatrixC dk(r, r);
      for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j) dk(i, j) = dG[k][i * r + j][p];
      const MatrixC pk = dk * inv;
      for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j) P[k][i * r + j][p] = pk(i, j);
    }
  }
  // dbar(P_k dz_k) = -dbar_l P_k dz_k ^ dzbar_l
  CurvatureMatrixField R(g, r);
  for (int k = 0; k < 2; ++k) {
    for (int ij = 0; ij < r * r; ++ij) {
      const Spectrum s(P[k][ij]);
      for (int l = 0; l < 2; ++l) {
        ScalarField c = s.derivative(l == 0 ? Derivative::dzbar1 : Derivative::dzbar2);
        c *= Complex(-1.0);
        R.entry(ij / r, ij % r).at(mixed_mask(k, l)) += c;
      }
    }
  }
  return R;
}

std::array<MatrixC, 4> curvature_at(const PointJet& jet) {
  const MatrixC inv = jet.g.inverse();
  std::array<MatrixC, 4> R;
  for (int k = 0; k < 2; ++k) {
    for (int l = 0; l < 2; ++l) {
      R[2 * k + l] = -(jet.ddb[k][l] * inv - jet.d[k] * inv * jet.db[l] * inv);
    }
  }
  return R;
}

Complex trace_rs_coefficient(const std::array<MatrixC, 4>& R, const std::array<MatrixC, 4>& S) {
  // dz_k dzbar_l dz_m dzbar_n = -s_km s_ln dz1 dz2 dzbar1 dzbar2 for k != m, l != n
  Complex acc = 0.0;
  for (int k = 0; k < 2; ++k) {
    for (int l = 0; l < 2; ++l) {
      const int m = 1 - k;
      const int n = 1 - l;
      const double s = (k == 0 ? 1.0 : -1.0) * (l == 0 ? 1.0 : -1.0);
      acc -= s * (R[2 * k + l] * S[2 * m + n]).trace();
    }
  }
  return acc;
}

Complex trace_rr_coefficient(const std::array<MatrixC, 4>& R) { return trace_rs_coefficient(R, R); }

HermitianJetField::HermitianJetField(const HermitianMatrixField& G) : grid_(G.grid()), rank_(G.rank()) {
  for (int i = 0; i < rank_; ++i) {
    for (int j = 0; j < rank_; ++j) {
      const Spectrum s(G.entry(i, j));
      g_.push_back(G.entry(i, j));
      d_[0].push_back(s.derivative(Derivative::dz1));
      d_[1].push_back(s.derivative(Derivative::dz2));
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l) ddb_[k][l].push_back(s.dz_dzbar(k, l));
    }
  }
}

PointJet HermitianJetField::at(std::size_t p) const {
  const int r = rank_;
  PointJet jet;
  jet.g.resize(r, r);
  for (int k = 0; k < 2; ++k) {
    jet.d[k].resize(r, r);
    jet.db[k].resize(r, r);
    for (int l = 0; l < 2; ++l) jet.ddb[k][l].resize(r, r);
  }
  for (int i = 0; i < r; ++i) {
    for (int j = 0; j < r; ++j) {
      const int ij = i * r + j;
      jet.g(i, j) = g_[ij][p];
      for (int k = 0; k < 2; ++k) {
        jet.d[k](i, j) = d_[k][ij][p];
        // dbar_l G_ij = conj(d_l G_ji)
        jet.db[k](i, j) = std::conj(d_[k][j * r + i][p]);
        for (int l = 0; l < 2; ++l) jet.ddb[k][l](i, j) = ddb_[k][l][ij][p];
      }
    }
  }
  return jet;
}

PotentialMatrix PotentialMatrix::from_curvature(const BaseForm& W) {
  PotentialMatrix A;
  for (int k = 0; k < 2; ++k) {
    for (int l = 0; l < 2; ++l) {
      const ScalarField c = W.coefficient(mixed_mask(k, l));
      const Complex mean = c.mean();
      if ((c - ScalarField(c.grid(), mean)).max_abs() > 1e-12 * std::max(1.0, std::abs(mean))) {
        throw std::invalid_argument("from_curvature expects constant coefficients");
      }
      A.M(k, l) = -mean;
    }
  }
  return A;
}

ScalarField PotentialMatrix::value(const PeriodicGrid& grid, int k) const {
  const Complex m0 = M(k, 0), m1 = M(k, 1);
  ScalarField lin = ScalarField::sample(grid, [&](double x1, double x2, double x3, double x4) {
    return m0 * Complex(x1, -x2) + m1 * Complex(x3, -x4);
  });
  if (periodic[k]) lin += *periodic[k];
  return lin;
}

ScalarField PotentialMatrix::delbar(const PeriodicGrid& grid, int k, int l) const {
  ScalarField out = periodic[k] ? derivative(*periodic[k], l == 0 ? Derivative::dzbar1 : Derivative::dzbar2)
                                : ScalarField(grid);
  out += M(k, l);
  return out;
}

ScalarField PotentialMatrix::del(const PeriodicGrid& grid, int k, int m) const {
  return periodic[k] ? derivative(*periodic[k], m == 0 ? Derivative::dz1 : Derivative::dz2) : ScalarField(grid);
}

HermitianMatrixField assemble_total_metric(const HermitianMatrixField& G_B, const PotentialMatrix& A) {
  if (G_B.rank() != 2) throw std::invalid_argument("base metric must be 2x2");
  const PeriodicGrid& g = G_B.grid();
  const ScalarField a[2] = {A.value(g, 0), A.value(g, 1)};
  HermitianMatrixField out(g, 3);
  for (int i = 0; i < 2; ++i) {
    for (int j = i; j < 2; ++j) out.set(i, j, G_B.entry(i, j) + a[i] * a[j].conj());
    out.set(i, 2, a[i]);
  }
  out.set(2, 2, ScalarField(g, 1.0));
  return out;
}

BaseForm rho_from_potential(const PotentialMatrix& A, const HermitianMatrixField& G_B) {
  const PeriodicGrid& g = G_B.grid();
  // dbar_l alpha_i
  std::array<std::array<ScalarField, 2>, 2> dba;
  for (int i = 0; i < 2; ++i)
    for (int l = 0; l < 2; ++l) dba[i][l] = A.delbar(g, i, l);
  BaseForm rho(g, 2);
  std::array<std::array<ScalarField, 2>, 2> coef;
  for (auto& row : coef)
    for (auto& c : row) c = ScalarField(g);
  for (std::size_t p = 0; p < g.size(); ++p) {
    const MatrixC inv = G_B.at(p).inverse();
    for (int m = 0; m < 2; ++m) {
      for (int l = 0; l < 2; ++l) {
        Complex s = 0.0;
        for (int i = 0; i < 2; ++i)
          for (int j = 0; j < 2; ++j) s += dba[i][l][p] * std::conj(dba[j][m][p]) * inv(j, i);
        coef[m][l][p] = Complex(0.0, 1.0) * s;
      }
    }
  }
  for (int m = 0; m < 2; ++m)
    for (int l = 0; l < 2; ++l) rho.set(mixed_mask(m, l), coef[m][l]);
  return rho;
}

namespace {

struct VectorJet {
  Eigen::Vector2cd a;
  std::array<Eigen::Vector2cd, 2> d, db;
  std::array<std::array<Eigen::Vector2cd, 2>, 2> ddb;
};

// Bordered metric jet at one point, linear part of A gauged to vanish there.
PointJet bordered_jet(const PointJet& B, const VectorJet& A) {
  PointJet G;
  auto embed = [](const MatrixC& top, const Eigen::Vector2cd& col, const Eigen::RowVector2cd& row, Complex corner) {
    MatrixC m(3, 3);
    m.topLeftCorner(2, 2) = top;
    m.topRightCorner(2, 1) = col;
    m.bottomLeftCorner(1, 2) = row;
    m(2, 2) = corner;
    return m;
  };
  const Eigen::RowVector2cd as = A.a.adjoint();
  G.g = embed(B.g + A.a * as, A.a, as, 1.0);
  for (int k = 0; k < 2; ++k) {
    // d_k A^* = (dbar_k A)^*, dbar_k A^* = (d_k A)^*
    const Eigen::RowVector2cd d_as = A.db[k].adjoint();
    const Eigen::RowVector2cd db_as = A.d[k].adjoint();
    G.d[k] = embed(B.d[k] + A.d[k] * as + A.a * d_as, A.d[k], d_as, 0.0);
    G.db[k] = embed(B.db[k] + A.db[k] * as + A.a * db_as, A.db[k], db_as, 0.0);
  }
  for (int k = 0; k < 2; ++k) {
    for (int l = 0; l < 2; ++l) {
      const Eigen::RowVector2cd dk_as = A.db[k].adjoint();
      const Eigen::RowVector2cd dbl_as = A.d[l].adjoint();
      const Eigen::RowVector2cd ddb_as = A.ddb[l][k].adjoint();
      const MatrixC top = B.ddb[k][l] + A.ddb[k][l] * as + A.db[l] * dk_as + A.d[k] * dbl_as + A.a * ddb_as;
      G.ddb[k][l] = embed(top, A.ddb[k][l], ddb_as, 0.0);
    }
  }
  return G;
}

}  // namespace

RRIdentityReport rr_identity_report(const ScalarField& u_in, const HermitianMatrixField& G_B, const PotentialMatrix& A) {
  if (G_B.rank() != 2) throw std::invalid_argument("base metric must be 2x2");
  G_B.check_positive();
  const PeriodicGrid& g = G_B.grid();
  const ScalarField u = u_in.real_part();

  // u jet
  const Spectrum su(u);
  const ScalarField du[2] = {su.derivative(Derivative::dz1), su.derivative(Derivative::dz2)};
  std::array<std::array<ScalarField, 2>, 2> ddbu;
  for (int k = 0; k < 2; ++k)
    for (int l = 0; l < 2; ++l) ddbu[k][l] = su.dz_dzbar(k, l);

  // periodic part of A
  struct PeriodicJet {
    ScalarField a;
    std::array<ScalarField, 2> d, db;
    std::array<std::array<ScalarField, 2>, 2> ddb;
  };
  std::array<std::optional<PeriodicJet>, 2> aj;
  for (int i = 0; i < 2; ++i) {
    if (!A.periodic[i]) continue;
    const Spectrum s(*A.periodic[i]);
    PeriodicJet j;
    j.a = *A.periodic[i];
    j.d = {s.derivative(Derivative::dz1), s.derivative(Derivative::dz2)};
    j.db = {s.derivative(Derivative::dzbar1), s.derivative(Derivative::dzbar2)};
    for (int k = 0; k < 2; ++k)
      for (int l = 0; l < 2; ++l) j.ddb[k][l] = s.dz_dzbar(k, l);
    aj[i] = std::move(j);
  }

  // right side: 2i ddbar(e^{-u} rho) spectrally
  const BaseForm rho = rho_from_potential(A, G_B);
  const ScalarField rho_term =
      del(delbar(BaseForm((-u).exp() * rho)), Overflow::raise).coefficient(kTop) * Complex(0.0, 2.0);

  const HermitianJetField jB(G_B);
  ScalarField lhs(g), rhs(g);
  for (std::size_t p = 0; p < g.size(); ++p) {
    const PointJet base = jB.at(p);

    // e^u G_B jet
    const double eu = std::exp(u[p].real());
    const Complex uk[2] = {du[0][p], du[1][p]};
    const Complex ubl[2] = {std::conj(uk[0]), std::conj(uk[1])};
    PointJet B;
    B.g = eu * base.g;
    for (int k = 0; k < 2; ++k) {
      B.d[k] = eu * (uk[k] * base.g + base.d[k]);
      B.db[k] = eu * (ubl[k] * base.g + base.db[k]);
    }
    for (int k = 0; k < 2; ++k) {
      for (int l = 0; l < 2; ++l) {
        B.ddb[k][l] = eu * ((ddbu[k][l][p] + uk[k] * ubl[l]) * base.g + uk[k] * base.db[l] + ubl[l] * base.d[k] +
                            base.ddb[k][l]);
      }
    }

    VectorJet a;
    a.a.setZero();
    for (int k = 0; k < 2; ++k) {
      a.d[k].setZero();
      a.db[k].setZero();
      for (int l = 0; l < 2; ++l) a.ddb[k][l].setZero();
    }
    for (int i = 0; i < 2; ++i) {
      for (int l = 0; l < 2; ++l) a.db[l](i) = A.M(i, l);
      if (!aj[i]) continue;
      a.a(i) = aj[i]->a[p];
      for (int k = 0; k < 2; ++k) {
        a.d[k](i) = aj[i]->d[k][p];
        a.db[k](i) += aj[i]->db[k][p];
        for (int l = 0; l < 2; ++l) a.ddb[k][l](i) = aj[i]->ddb[k][l][p];
      }
    }

    lhs[p] = trace_rr_coefficient(curvature_at(bordered_jet(B, a)));

    std::array<MatrixC, 4> H;
    for (int k = 0; k < 2; ++k)
      for (int l = 0; l < 2; ++l) H[2 * k + l] = MatrixC::Constant(1, 1, ddbu[k][l][p]);
    rhs[p] = trace_rr_coefficient(curvature_at(base)) + 2.0 * trace_rr_coefficient(H) + rho_term[p];
  }

  RRIdentityReport r;
  r.lhs_max = lhs.max_abs();
  r.rhs_max = rhs.max_abs();
  r.absolute = (lhs - rhs).max_abs();
  const double ref = std::max(r.lhs_max, r.rhs_max);
  r.relative = ref > 0.0 ? r.absolute / ref : 0.0;
  return r;
}

double rr_identity_residual(const ScalarField& u, const HermitianMatrixField& G_B, const PotentialMatrix& A) {
  return rr_identity_report(u, G_B, A).relative;
}

BaseForm trace_rr(const CurvatureMatrixField& R) {
  BaseForm out(R.grid(), 4);
  for (int i = 0; i < R.rank(); ++i)
    for (int j = 0; j < R.rank(); ++j) out += wedge(R.entry(i, j), R.entry(j, i));
  return out;
}

std::pair<double, double> hym_residual(const CurvatureMatrixField& F, const BaseForm& omega_B) {
  double wedge_res = 0.0, anti = 0.0;
  for (int i = 0; i < F.rank(); ++i) {
    for (int j = 0; j < F.rank(); ++j) {
      wedge_res = std::max(wedge_res, wedge(F.entry(i, j), omega_B).max_abs());
      anti = std::max(anti, F.entry(i, j).component_of_type(0, 2).max_abs());
    }
  }
  return {wedge_res, anti};
}

}  // namespace hsw
