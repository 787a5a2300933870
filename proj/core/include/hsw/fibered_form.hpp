#pragma once

// Forms on the total space of a T^2-bundle over T^4, expanded in the fiber
// monomials {1, theta, thetabar, theta^thetabar} with basic coefficients:
// f = sum_s beta_s ^ theta^s. theta is never sampled; only d theta = W is used.

#include "hsw/base_form.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace hsw {

enum FiberSlot : unsigned { kOne = 0u, kTheta = 1u, kThetaBar = 2u, kThetaThetaBar = 3u };

class FiberedForm {
 public:
  FiberedForm() = default;
  FiberedForm(const PeriodicGrid& grid, int degree);

  static FiberedForm basic(const BaseForm& beta);
  /// beta ^ theta^s
  static FiberedForm monomial(const BaseForm& beta, unsigned slot);
  static FiberedForm theta(const PeriodicGrid& grid) { return monomial(BaseForm::scalar(ScalarField(grid, 1.0)), kTheta); }
  static FiberedForm theta_bar(const PeriodicGrid& grid) { return monomial(BaseForm::scalar(ScalarField(grid, 1.0)), kThetaBar); }
  /// chi = (i/2) theta ^ thetabar
  static FiberedForm chi(const PeriodicGrid& grid);

  const PeriodicGrid& grid() const { return grid_; }
  int degree() const { return degree_; }
  /// Base degree carried by slot s, or -1 if that slot cannot exist.
  int slot_degree(unsigned s) const;
  bool has(unsigned s) const { return slots_[s].has_value(); }
  /// Coefficient of theta^s; an empty form if absent.
  BaseForm slot(unsigned s) const;
  void set_slot(unsigned s, BaseForm beta);
  void add_to_slot(unsigned s, const BaseForm& beta);

  FiberedForm& operator+=(const FiberedForm& other);
  FiberedForm& operator-=(const FiberedForm& other);
  FiberedForm& operator*=(Complex s);
  FiberedForm& operator*=(const ScalarField& f);
  friend FiberedForm operator+(FiberedForm a, const FiberedForm& b) { return a += b; }
  friend FiberedForm operator-(FiberedForm a, const FiberedForm& b) { return a -= b; }
  friend FiberedForm operator*(Complex s, FiberedForm a) { return a *= s; }
  friend FiberedForm operator*(const ScalarField& f, FiberedForm a) { return a *= f; }

  double max_abs() const;
  /// True when only the scalar slot is populated.
  bool is_basic() const;

 private:
  PeriodicGrid grid_;
  int degree_ = 0;
  std::array<std::optional<BaseForm>, 4> slots_;
};

FiberedForm wedge(const FiberedForm& a, const FiberedForm& b);
FiberedForm conj(const FiberedForm& f);

/// d with d theta = W, d thetabar = conj(W).
FiberedForm d_total(const FiberedForm& f, const BaseForm& W);
/// (1,0) and (0,1) parts of d_total for (1,1) W: del theta = 0, delbar theta = W.
FiberedForm del_total(const FiberedForm& f, const BaseForm& W);
FiberedForm delbar_total(const FiberedForm& f, const BaseForm& W);

struct AnsatzReport {
  double dW = 0.0;
  double trace_re = 0.0;
  double trace_im = 0.0;
  double asd_re = 0.0;  // |*Re W + Re W|
  double asd_im = 0.0;
  double tolerance = 0.0;
  bool closed = false;
  bool primitive = false;
  bool anti_self_dual = false;
};

struct AnsatzData {
  BaseForm W;
  BaseForm omega_B;
  BaseForm psi_B;

  /// Throws std::invalid_argument if d W exceeds tol.
  static AnsatzData make(const BaseForm& W, double tol = 1e-10);
  AnsatzReport validate(double tol = 1e-10) const;
};

/// psi_B = dz1 ^ dz2 / (2 sqrt 2), so that |psi_B ^ theta|_{omega_0} = 1.
BaseForm psi_base(const PeriodicGrid& grid);

/// omega_u = e^u omega_B + (i/2) theta ^ thetabar.
FiberedForm build_omega_u(const ScalarField& u, const AnsatzData& data);

/// Pointwise density of a 6-form against dx1..dx4 ^ (i/2) theta ^ thetabar.
ScalarField top_density(const FiberedForm& f);

/// |psi|^2 = i psi ^ psibar / (omega_u^3 / 6) from first principles.
ScalarField psi_norm_squared(const ScalarField& u);
/// Pointwise norm e^{-u}; throws std::runtime_error if it disagrees with the
/// first-principles value beyond 1e-9 relative.
ScalarField psi_norm(const ScalarField& u);

struct ResidualEntry {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct StructureReport {
  int n = 0;
  std::vector<ResidualEntry> entries;  // d_omega_B, omega_B_wedge_W, balanced, conformally_balanced
  bool pass() const;
  const ResidualEntry& get(const std::string& name) const;
};

/// tol_floor is the absolute floor on each tolerance; the effective tolerance
/// is max(tol_floor, 10 x the same residual on W = 0 data).
StructureReport structure_residuals(const ScalarField& u, const AnsatzData& data, double tol_floor = 1e-10);

}  // namespace hsw
