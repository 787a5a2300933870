#pragma once

// Continuity-method Newton solver for the reduced scalar equation on the flat
// base,
//
//   i ddbar e^u ^ omega_B + s t alpha i ddbar(e^{-u} rho)
//     - (alpha/2) ddbar u ^ ddbar u + t mu omega_B^2/2 = 0,
//
// where s = sign_rho. All densities are taken against omega_B^2/2 = dx1..dx4.

#include "hsw/base_form.hpp"

#include <array>
#include <string>
#include <utility>
#include <vector>

namespace hsw {

struct EquationData {
  BaseForm rho;  // real (1,1)-form; an empty form means rho = 0
  ScalarField mu;
  double alpha = 0.0;
  int sign_rho = -1;

  /// Throws std::invalid_argument on shape errors and FeasibilityError when
  /// the integral of mu is not zero to rel_tol.
  void validate(double rel_tol = 1e-10) const;
};

struct SolverParams {
  double delta = 1e-2;
  double tau = 1e-2;
  double A_norm = 0.0;
  int t_steps = 10;
  double newton_tol = 1e-10;
  int max_newton = 30;
  double linear_tol = 1e-13;
  int linear_max_iter = 400;

  void validate() const;
};

struct TracePoint {
  double t = 0.0;
  double residual = 0.0;
  int iterations = 0;
};

struct SolverState {
  ScalarField u;
  double t = 0.0;
  double residual_norm = 0.0;
  bool in_upsilon = false;
  bool omega_positive = false;
  int newton_iterations = 0;
  std::vector<TracePoint> trace;
};

/// Residual density r with r omega_B^2/2 equal to the left side.
ScalarField residual(const ScalarField& u, const EquationData& data, double t);

/// Data whose mu makes u_star an exact solution at t = 1. Throws
/// FeasibilityError when the computed mu has a mean above 1e-8 relative.
EquationData manufacture(const ScalarField& u_star, const BaseForm& rho, double alpha,
                         int sign_rho = -1);

/// First variation of the residual at u0.
class LinearizedOperator {
 public:
  LinearizedOperator(const ScalarField& u0, const EquationData& data, double t);

  ScalarField apply(const ScalarField& v) const;
  ScalarField operator()(const ScalarField& v) const { return apply(v); }

  const PeriodicGrid& grid() const { return u0_.grid(); }
  /// Mean of e^{u0}, the constant-coefficient part used by the preconditioner.
  double mean_exp() const { return mean_exp_; }

 private:
  ScalarField u0_;
  ScalarField exp_u0_;
  ScalarField exp_minus_u0_;
  std::array<ScalarField, 4> hess_u0_;  // index 2k + l: d_k dbar_l u0
  BaseForm rho_;
  double coeff_rho_ = 0.0;  // s t alpha
  double alpha_ = 0.0;
  double mean_exp_ = 1.0;
};

LinearizedOperator linearize(const ScalarField& u0, const EquationData& data, double t);

/// Real part of f without the 16 modes whose indices are all 0 or Nyquist.
/// Every spectral derivative vanishes there, so the Newton system is posed on
/// the complement; the mean is one of them.
ScalarField drop_null_modes(const ScalarField& f);

/// Solves (1 - Q) L w = f for f without null modes (Q above) by BiCGSTAB with
/// the spectral preconditioner; the returned w has no null modes either.
ScalarField solve_linearized(const LinearizedOperator& op, const ScalarField& f, double tol,
                             int max_iter, int* iterations = nullptr);

struct UpsilonFlags {
  bool exp_bound = false;      // max e^{-2u} < delta
  bool hessian_bound = false;  // |alpha| ||i ddbar u|| < e^u tau everywhere
  bool ok() const { return exp_bound && hessian_bound; }
};

UpsilonFlags upsilon_check(const ScalarField& u, double alpha, const SolverParams& params);
/// Pointwise flat-metric norm of i ddbar u (||dz_k ^ dzbar_l|| = 2).
ScalarField hessian_norm(const ScalarField& u);

/// e^u omega_B + s t alpha e^{-u} rho + alpha i ddbar u is positive definite
/// at every grid point.
bool comparison_form_positive(const ScalarField& u, const EquationData& data, double t);

/// Integral of e^u over T^4.
double exp_integral(const ScalarField& u);
/// The constant u with integral of e^u equal to A.
double constant_solution(double A_norm);

SolverState solve_at_t(const ScalarField& u_init, const EquationData& data, double t,
                       const SolverParams& params);
SolverState continuity_solve(const EquationData& data, const SolverParams& params);

/// At alpha = 0 the equation is linear in w = e^u: Delta w / 2 = -t mu.
/// Returns log w with the mean of w fixed by A_norm; throws FeasibilityError
/// if w is not positive.
ScalarField linear_oracle(const ScalarField& mu, double t, double A_norm);

}  // namespace hsw
