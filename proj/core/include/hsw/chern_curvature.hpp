#pragma once

// Chern curvature R = dbar(dG G^{-1}) of Hermitian matrix fields, the bordered
// 3x3 metric [[G_B + A A^*, A], [A^*, 1]] and the trace identity relating its
// curvature to the base data. A (1,1) matrix-valued form is stored by its
// coefficients R^{kl} of dz_k ^ dzbar_l.

#include "hsw/base_form.hpp"

#include <Eigen/Dense>

#include <array>
#include <optional>
#include <vector>

namespace hsw {

using MatrixC = Eigen::MatrixXcd;

class HermitianMatrixField {
 public:
  HermitianMatrixField() = default;
  HermitianMatrixField(const PeriodicGrid& grid, int rank);

  static HermitianMatrixField identity(const PeriodicGrid& grid, int rank);
  /// Det-1 2x2 field [[a, b], [conj b, (1 + |b|^2) / a]] with a > 0 real.
  static HermitianMatrixField unimodular(const ScalarField& a, const ScalarField& b);

  const PeriodicGrid& grid() const { return grid_; }
  int rank() const { return rank_; }
  const ScalarField& entry(int i, int j) const { return entries_[i * rank_ + j]; }
  /// Sets (i, j) and its mirror (j, i) = conj.
  void set(int i, int j, const ScalarField& f);

  MatrixC at(std::size_t point) const;
  HermitianMatrixField scaled(const ScalarField& factor) const;
  ScalarField determinant() const;

  /// Max |G - G^*| over the grid.
  double hermitian_defect() const;
  /// Throws std::invalid_argument naming the first grid point where a leading
  /// principal minor is not positive.
  void check_positive() const;

 private:
  PeriodicGrid grid_;
  int rank_ = 0;
  std::vector<ScalarField> entries_;
};

/// r x r matrix of 2-forms, entries row-major. Curvatures are (1,1); the
/// other types are kept so the HYM check can see them.
class CurvatureMatrixField {
 public:
  CurvatureMatrixField() = default;
  CurvatureMatrixField(const PeriodicGrid& grid, int rank);

  const PeriodicGrid& grid() const { return grid_; }
  int rank() const { return rank_; }
  BaseForm& entry(int i, int j) { return entries_[i * rank_ + j]; }
  const BaseForm& entry(int i, int j) const { return entries_[i * rank_ + j]; }

  /// Coefficient matrices of dz_k ^ dzbar_l at one point, index 2k + l.
  std::array<MatrixC, 4> at(std::size_t point) const;
  double max_abs() const;

 private:
  PeriodicGrid grid_;
  int rank_ = 0;
  std::vector<BaseForm> entries_;
};

/// Spectral Chern curvature: R^{kl} = -dbar_l((d_k G) G^{-1}).
CurvatureMatrixField curvature(const HermitianMatrixField& G);

/// Value, first and mixed second derivatives of a matrix at one point.
struct PointJet {
  MatrixC g;
  std::array<MatrixC, 2> d;                   // d/dz_k
  std::array<MatrixC, 2> db;                  // d/dzbar_l
  std::array<std::array<MatrixC, 2>, 2> ddb;  // d/dz_k d/dzbar_l
};

/// R^{kl} = -[(d_k dbar_l G) G^{-1} - (d_k G) G^{-1} (dbar_l G) G^{-1}].
std::array<MatrixC, 4> curvature_at(const PointJet& jet);
/// Coefficient of dz1^dz2^dzbar1^dzbar2 in tr(R ^ R).
Complex trace_rr_coefficient(const std::array<MatrixC, 4>& R);
/// Same for tr(R ^ S).
Complex trace_rs_coefficient(const std::array<MatrixC, 4>& R, const std::array<MatrixC, 4>& S);

/// Spectral 2-jet of a Hermitian matrix field (dbar entries recovered by
/// Hermitian symmetry).
class HermitianJetField {
 public:
  explicit HermitianJetField(const HermitianMatrixField& G);
  PointJet at(std::size_t point) const;
  const PeriodicGrid& grid() const { return grid_; }

 private:
  PeriodicGrid grid_;
  int rank_;
  std::vector<ScalarField> g_;
  std::array<std::vector<ScalarField>, 2> d_;
  std::array<std::array<std::vector<ScalarField>, 2>, 2> ddb_;
};

/// Column A = (alpha_1, alpha_2) with alpha = periodic + M zbar:
/// dbar_l alpha_k = dbar_l periodic_k + M(k, l). Only derivatives of A enter
/// the curvature identities, so the non-periodic linear part never needs
/// sampling there.
struct PotentialMatrix {
  std::array<std::optional<ScalarField>, 2> periodic;
  Eigen::Matrix2cd M = Eigen::Matrix2cd::Zero();

  static PotentialMatrix constant_delbar(const Eigen::Matrix2cd& M) { return PotentialMatrix{{}, M}; }
  /// Potential with dbar A equal to the (1,1) form W: W = sum W_kl dz_k ^ dzbar_l
  /// gives M = -W (dbar(M zbar) = M_kl dzbar_l, and d theta = dbar alpha
  /// written as dz ^ dzbar flips the sign).
  static PotentialMatrix from_curvature(const BaseForm& W);

  /// alpha_k sampled on the grid, linear part included (not periodic).
  ScalarField value(const PeriodicGrid& grid, int k) const;
  ScalarField delbar(const PeriodicGrid& grid, int k, int l) const;
  ScalarField del(const PeriodicGrid& grid, int k, int m) const;
};

/// [[G_B + A A^*, A], [A^*, 1]] with A sampled by PotentialMatrix::value.
HermitianMatrixField assemble_total_metric(const HermitianMatrixField& G_B, const PotentialMatrix& A);

/// rho = -i tr(dbar A ^ d A^* G_B^{-1}), A^* the conjugate transpose:
/// coefficient of dz_m ^ dzbar_l is i sum_ij dbar_l alpha_i d_m conj(alpha_j) (G_B^{-1})_ji.
BaseForm rho_from_potential(const PotentialMatrix& A, const HermitianMatrixField& G_B);

struct RRIdentityReport {
  double relative = 0.0;
  double absolute = 0.0;
  double lhs_max = 0.0;
  double rhs_max = 0.0;
};

/// Both sides of tr(R_u ^ R_u) = tr(R_B ^ R_B) + 2 ddbar u ^ ddbar u + 2i ddbar(e^{-u} rho)
/// as top densities, R_u the curvature of the bordered metric with G_B
/// scaled by e^u. The bordered metric is evaluated pointwise from jets in the
/// gauge where the linear part of A vanishes at the evaluation point.
RRIdentityReport rr_identity_report(const ScalarField& u, const HermitianMatrixField& G_B, const PotentialMatrix& A);
double rr_identity_residual(const ScalarField& u, const HermitianMatrixField& G_B, const PotentialMatrix& A);

/// tr(R ^ R) as a top BaseForm for a spectral curvature field.
BaseForm trace_rr(const CurvatureMatrixField& R);

/// (max |F ^ omega_B| over entries as top forms, max |F^{0,2}|).
std::pair<double, double> hym_residual(const CurvatureMatrixField& F, const BaseForm& omega_B);

}  // namespace hsw
