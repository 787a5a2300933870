#include "hsw/fuyau_solver.hpp"

#include "hsw/errors.hpp"

#include <Eigen/Core>
#include <Eigen/IterativeLinearSolvers>

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace hsw {

class MatrixFreeOperator;

}  // namespace hsw

namespace Eigen::internal {

template <>
struct traits<hsw::MatrixFreeOperator> : public Eigen::internal::traits<Eigen::SparseMatrix<double>> {};

}  // namespace Eigen::internal

namespace hsw {

namespace {

constexpr double kTorusVolume = kTwoPi * kTwoPi * kTwoPi * kTwoPi;

double axis_symbol(int k, int n) { return 2 * std::abs(k) == n ? 0.0 : static_cast<double>(k); }

// Symbols of d/dz_m and d/dzbar_m on signed wavenumbers, Nyquist zeroed.
Complex dz_symbol(int m, int k1, int k2, int k3, int k4, int n) {
  const double a = axis_symbol(m == 0 ? k1 : k3, n);
  const double b = axis_symbol(m == 0 ? k2 : k4, n);
  return 0.5 * Complex(b, a);  // (i a - i (i b)) / 2
}

Complex dzbar_symbol(int m, int k1, int k2, int k3, int k4, int n) {
  const double a = axis_symbol(m == 0 ? k1 : k3, n);
  const double b = axis_symbol(m == 0 ? k2 : k4, n);
  return 0.5 * Complex(-b, a);
}

double reduced_sq(int k1, int k2, int k3, int k4, int n) {
  const double a = axis_symbol(k1, n), b = axis_symbol(k2, n), c = axis_symbol(k3, n),
               d = axis_symbol(k4, n);
  return a * a + b * b + c * c + d * d;
}

// Density of i ddbar f ^ omega_B: 2 (f_{1 1bar} + f_{2 2bar}) = Delta f / 2.
ScalarField kahler_laplacian(const ScalarField& f) {
  const int n = f.grid().n();
  return Spectrum(f).apply([n](int a, int b, int c, int d) { return Complex(-0.5 * reduced_sq(a, b, c, d, n)); });
}

std::array<ScalarField, 4> complex_hessian(const ScalarField& f) {
  const Spectrum s(f);
  return {s.dz_dzbar(0, 0), s.dz_dzbar(0, 1), s.dz_dzbar(1, 0), s.dz_dzbar(1, 1)};
}

// Density of ddbar u ^ ddbar v from the two complex Hessians.
ScalarField hessian_pair_density(const std::array<ScalarField, 4>& hu, const std::array<ScalarField, 4>& hv) {
  ScalarField out(hu[0].grid());
  for (std::size_t p = 0; p < out.size(); ++p) {
    out[p] = -4.0 * (hu[0][p] * hv[3][p] + hu[3][p] * hv[0][p] - hu[1][p] * hv[2][p] - hu[2][p] * hv[1][p]);
  }
  return out;
}

bool has_rho(const BaseForm& rho) { return rho.grid().n() > 0 && !rho.is_zero(); }

// Density of i ddbar(g rho) for a (1,1)-form rho. The (2,2) coefficient is
// -sum s_mk s_nl d_m dbar_n (g rho_kl) with m = 1-k, n = 1-l.
ScalarField rho_density(const ScalarField& g, const BaseForm& rho) {
  const int n = g.grid().n();
  ScalarField acc(g.grid());
  for (int k = 0; k < 2; ++k) {
    for (int l = 0; l < 2; ++l) {
      const Mask mask = (k == 0 ? kDz1 : kDz2) | (l == 0 ? kDzbar1 : kDzbar2);
      const ScalarField* c = rho.component(mask);
      if (c == nullptr) continue;
      const int m = 1 - k, q = 1 - l;
      const double sign = (m == 0 ? 1.0 : -1.0) * (q == 0 ? 1.0 : -1.0);
      acc += Spectrum(g * *c).apply([=](int a, int b, int cc, int d) {
        return -sign * dz_symbol(m, a, b, cc, d, n) * dzbar_symbol(q, a, b, cc, d, n);
      });
    }
  }
  return Complex(0.0, 4.0) * acc;
}

ScalarField ones(const PeriodicGrid& g) { return ScalarField(g, 1.0); }

// Projection onto the 16 modes with every index 0 or Nyquist, where all
// spectral derivatives vanish. Computed directly from sign patterns.
std::vector<double> null_projection(const PeriodicGrid& g, const double* w) {
  const std::size_t size = g.size();
  std::vector<unsigned> pattern(size);
  for (std::size_t p = 0; p < size; ++p) {
    const auto idx = g.unflatten(p);
    unsigned odd = 0;
    for (int a = 0; a < 4; ++a) odd |= static_cast<unsigned>(idx[a] & 1) << a;
    pattern[p] = odd;
  }
  // (-1)^{<pat, idx>} depends only on the parity bits of the index.
  auto sign = [](unsigned pat, unsigned odd) { return std::popcount(pat & odd) % 2 == 0 ? 1.0 : -1.0; };
  std::array<double, 16> sums{};
  for (std::size_t p = 0; p < size; ++p) sums[pattern[p]] += w[p];
  std::array<double, 16> coeff{};
  for (unsigned pat = 0; pat < 16; ++pat)
    for (unsigned odd = 0; odd < 16; ++odd) coeff[pat] += sign(pat, odd) * sums[odd];
  std::array<double, 16> value{};
  for (unsigned odd = 0; odd < 16; ++odd)
    for (unsigned pat = 0; pat < 16; ++pat) value[odd] += sign(pat, odd) * coeff[pat];
  std::vector<double> out(size);
  for (std::size_t p = 0; p < size; ++p) out[p] = value[pattern[p]] / static_cast<double>(size);
  return out;
}

ScalarField to_field(const PeriodicGrid& g, const Eigen::VectorXd& v) {
  ScalarField f(g);
  for (std::size_t p = 0; p < g.size(); ++p) f[p] = v[static_cast<Eigen::Index>(p)];
  return f;
}

Eigen::VectorXd to_vector(const ScalarField& f) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(f.size()));
  for (std::size_t p = 0; p < f.size(); ++p) v[static_cast<Eigen::Index>(p)] = f[p].real();
  return v;
}

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace

ScalarField drop_null_modes(const ScalarField& f) {
  const auto& g = f.grid();
  std::vector<double> re(g.size());
  for (std::size_t p = 0; p < g.size(); ++p) re[p] = f[p].real();
  const auto q = null_projection(g, re.data());
  ScalarField out(g);
  for (std::size_t p = 0; p < g.size(); ++p) out[p] = re[p] - q[p];
  return out;
}

// A(w) = (1 - Q) L((1 - Q) w) + Q w with Q the null-mode projection: L posed
// on the complement of the modes it cannot see, identity on them.
class MatrixFreeOperator : public Eigen::EigenBase<MatrixFreeOperator> {
 public:
  using Scalar = double;
  using RealScalar = double;
  using StorageIndex = int;
  enum { ColsAtCompileTime = Eigen::Dynamic, MaxColsAtCompileTime = Eigen::Dynamic, IsRowMajor = false };

  explicit MatrixFreeOperator(const LinearizedOperator& op) : op_(&op) {}

  Eigen::Index rows() const { return static_cast<Eigen::Index>(op_->grid().size()); }
  Eigen::Index cols() const { return rows(); }

  template <typename Rhs>
  Eigen::Product<MatrixFreeOperator, Rhs, Eigen::AliasFreeProduct> operator*(const Eigen::MatrixBase<Rhs>& x) const {
    return Eigen::Product<MatrixFreeOperator, Rhs, Eigen::AliasFreeProduct>(*this, x.derived());
  }

  Eigen::VectorXd apply(const Eigen::VectorXd& w) const {
    const auto& g = op_->grid();
    const auto q = null_projection(g, w.data());
    ScalarField f(g);
    for (std::size_t p = 0; p < g.size(); ++p) f[p] = w[static_cast<Eigen::Index>(p)] - q[p];
    Eigen::VectorXd out = to_vector(drop_null_modes(op_->apply(f)));
    for (std::size_t p = 0; p < g.size(); ++p) out[static_cast<Eigen::Index>(p)] += q[p];
    return out;
  }

  const LinearizedOperator& op() const { return *op_; }

 private:
  const LinearizedOperator* op_;
};

}  // namespace hsw

namespace Eigen::internal {

template <typename Rhs>
struct generic_product_impl<hsw::MatrixFreeOperator, Rhs, SparseShape, DenseShape, GemvProduct>
    : generic_product_impl_base<hsw::MatrixFreeOperator, Rhs,
                                generic_product_impl<hsw::MatrixFreeOperator, Rhs>> {
  template <typename Dest>
  static void scaleAndAddTo(Dest& dst, const hsw::MatrixFreeOperator& lhs, const Rhs& rhs, const double& alpha) {
    dst.noalias() += alpha * lhs.apply(rhs);
  }
};

}  // namespace Eigen::internal

namespace hsw {

namespace {

// Inverse of the constant-coefficient symbol -mean(e^u) |k|^2 / 2; identity on
// the null modes.
class SpectralPreconditioner {
 public:
  SpectralPreconditioner() = default;

  template <typename M>
  SpectralPreconditioner& analyzePattern(const M&) { return *this; }
  template <typename M>
  SpectralPreconditioner& factorize(const M& m) { return compute(m); }
  SpectralPreconditioner& compute(const MatrixFreeOperator& m) {
    grid_ = m.op().grid();
    scale_ = m.op().mean_exp();
    return *this;
  }

  template <typename Rhs>
  Eigen::VectorXd solve(const Rhs& b) const {
    const int n = grid_.n();
    const double scale = scale_;
    Eigen::VectorXd vb = b;
    const ScalarField out = Spectrum(to_field(grid_, vb)).apply([=](int k1, int k2, int k3, int k4) {
      const double sq = reduced_sq(k1, k2, k3, k4, n);
      return sq == 0.0 ? Complex(1.0) : Complex(-2.0 / (scale * sq));
    });
    return to_vector(out);
  }

  Eigen::ComputationInfo info() const { return Eigen::Success; }

 private:
  PeriodicGrid grid_;
  double scale_ = 1.0;
};

}  // namespace

void EquationData::validate(double rel_tol) const {
  if (mu.grid().n() == 0) throw std::invalid_argument("equation data has no mu field");
  if (sign_rho != 1 && sign_rho != -1) throw std::invalid_argument("sign_rho must be +1 or -1");
  if (rho.grid().n() > 0) {
    if (!(rho.grid() == mu.grid())) throw std::invalid_argument("rho and mu live on different grids");
    if (rho.degree() != 2) throw std::invalid_argument("rho must be a 2-form");
    if (!rho.is_zero()) {
      const auto bd = rho.bidegree();
      if (!bd || *bd != std::pair{1, 1}) throw std::invalid_argument("rho must be a (1,1)-form");
      if (!rho.is_real(1e-10)) throw std::invalid_argument("rho must be real");
    }
  }
  if (!mu.is_real(1e-10)) throw std::invalid_argument("mu must be real");
  const double scale = std::max(mu.max_abs(), 1e-300);
  if (std::abs(mu.mean()) > rel_tol * scale) {
    throw FeasibilityError("integral of mu is not zero (mean " + format_double(std::abs(mu.mean())) + ")");
  }
}

void SolverParams::validate() const {
  if (!(delta > 0) || !(tau > 0) || !(A_norm > 0)) {
    throw std::invalid_argument("delta, tau and A_norm must be positive");
  }
  if (t_steps < 1) throw std::invalid_argument("t_steps must be at least 1");
  if (!(newton_tol > 0) || max_newton < 1) throw std::invalid_argument("invalid Newton settings");
  if (!(linear_tol > 0) || linear_max_iter < 1) throw std::invalid_argument("invalid linear solver settings");
}

ScalarField residual(const ScalarField& u, const EquationData& data, double t) {
  ScalarField r = kahler_laplacian(u.exp());
  if (has_rho(data.rho) && data.alpha != 0.0) {
    r += (data.sign_rho * t * data.alpha) * rho_density((-u).exp(), data.rho);
  }
  if (data.alpha != 0.0) {
    const auto h = complex_hessian(u);
    r += (-0.5 * data.alpha) * hessian_pair_density(h, h);
  }
  if (data.mu.grid().n() > 0) r += t * data.mu;
  return r.real_part();
}

EquationData manufacture(const ScalarField& u_star, const BaseForm& rho, double alpha, int sign_rho) {
  EquationData data;
  data.rho = rho;
  data.alpha = alpha;
  data.sign_rho = sign_rho;
  data.mu = -residual(u_star, data, 1.0);
  const double scale = std::max(data.mu.max_abs(), 1e-300);
  if (std::abs(data.mu.mean()) > 1e-8 * scale) {
    throw FeasibilityError("manufactured mu has nonzero mean; the residual is not exact");
  }
  return data;
}

LinearizedOperator::LinearizedOperator(const ScalarField& u0, const EquationData& data, double t)
    : u0_(u0), exp_u0_(u0.exp()), exp_minus_u0_((-u0).exp()), alpha_(data.alpha) {
  if (has_rho(data.rho) && data.alpha != 0.0) {
    rho_ = data.rho;
    coeff_rho_ = data.sign_rho * t * data.alpha;
  }
  if (alpha_ != 0.0) hess_u0_ = complex_hessian(u0);
  mean_exp_ = exp_u0_.mean().real();
}

ScalarField LinearizedOperator::apply(const ScalarField& v) const {
  ScalarField out = kahler_laplacian(v * exp_u0_);
  if (coeff_rho_ != 0.0) out += (-coeff_rho_) * rho_density(v * exp_minus_u0_, rho_);
  if (alpha_ != 0.0) out += (-alpha_) * hessian_pair_density(complex_hessian(v), hess_u0_);
  return out;
}

LinearizedOperator linearize(const ScalarField& u0, const EquationData& data, double t) {
  return LinearizedOperator(u0, data, t);
}

ScalarField solve_linearized(const LinearizedOperator& op, const ScalarField& f, double tol, int max_iter,
                             int* iterations) {
  const auto& g = op.grid();
  MatrixFreeOperator a(op);
  Eigen::BiCGSTAB<MatrixFreeOperator, SpectralPreconditioner> solver;
  solver.setTolerance(tol);
  solver.setMaxIterations(max_iter);
  solver.compute(a);
  const Eigen::VectorXd rhs = to_vector(f);
  Eigen::VectorXd x = solver.solve(rhs);
  if (iterations != nullptr) *iterations = static_cast<int>(solver.iterations());
  if (solver.info() != Eigen::Success && solver.error() > 1e3 * tol) {
    throw FeasibilityError("linear solve did not converge (relative residual " + format_double(solver.error()) +
                           ")");
  }
  const auto q = null_projection(g, x.data());
  ScalarField w = to_field(g, x);
  for (std::size_t p = 0; p < g.size(); ++p) w[p] -= q[p];
  return w;
}

ScalarField hessian_norm(const ScalarField& u) {
  const auto h = complex_hessian(u);
  ScalarField out(u.grid());
  for (std::size_t p = 0; p < out.size(); ++p) {
    double s = 0.0;
    for (const auto& c : h) s += std::norm(c[p]);
    out[p] = 2.0 * std::sqrt(s);
  }
  return out;
}

UpsilonFlags upsilon_check(const ScalarField& u, double alpha, const SolverParams& params) {
  UpsilonFlags flags;
  double max_exp = 0.0;
  for (std::size_t p = 0; p < u.size(); ++p) max_exp = std::max(max_exp, std::exp(-2.0 * u[p].real()));
  flags.exp_bound = max_exp < params.delta;
  flags.hessian_bound = true;
  if (alpha != 0.0) {
    const ScalarField hn = hessian_norm(u);
    for (std::size_t p = 0; p < u.size(); ++p) {
      if (!(std::abs(alpha) * hn[p].real() < std::exp(u[p].real()) * params.tau)) {
        flags.hessian_bound = false;
        break;
      }
    }
  }
  return flags;
}

bool comparison_form_positive(const ScalarField& u, const EquationData& data, double t) {
  // Hermitian matrix h of eta = i sum h_kl dz_k ^ dzbar_l.
  const auto hess = complex_hessian(u);
  const bool rho_on = has_rho(data.rho) && data.alpha != 0.0;
  const double c = data.sign_rho * t * data.alpha;
  for (std::size_t p = 0; p < u.size(); ++p) {
    const double eu = std::exp(u[p].real());
    Complex h[2][2];
    for (int k = 0; k < 2; ++k) {
      for (int l = 0; l < 2; ++l) {
        h[k][l] = (k == l ? 0.5 * eu : 0.0) + data.alpha * hess[2 * k + l][p];
        if (rho_on) {
          const Mask mask = (k == 0 ? kDz1 : kDz2) | (l == 0 ? kDzbar1 : kDzbar2);
          if (const ScalarField* r = data.rho.component(mask)) h[k][l] += c / eu * Complex(0.0, -1.0) * (*r)[p];
        }
      }
    }
    const double det = (h[0][0] * h[1][1] - h[0][1] * h[1][0]).real();
    if (!(h[0][0].real() > 0.0) || !(det > 0.0)) return false;
  }
  return true;
}

double exp_integral(const ScalarField& u) { return u.exp().integral().real(); }

double constant_solution(double A_norm) { return std::log(A_norm / kTorusVolume); }

namespace {

void shift_to_norm(ScalarField& u, double A_norm) {
  u += std::log(A_norm / exp_integral(u));
}

void check_monitors(const ScalarField& u, const EquationData& data, double t, const SolverParams& params) {
  const auto flags = upsilon_check(u, data.alpha, params);
  if (!flags.exp_bound) throw FeasibilityError("left admissible set Υ: e^{-2u} < δ violated");
  if (!flags.hessian_bound) throw FeasibilityError("left admissible set Υ: |α'| ||i∂∂̄u|| < e^u τ violated");
  if (!comparison_form_positive(u, data, t)) throw FeasibilityError("comparison form not positive");
}

}  // namespace

SolverState solve_at_t(const ScalarField& u_init, const EquationData& data, double t, const SolverParams& params) {
  params.validate();
  const auto& g = u_init.grid();
  SolverState state;
  state.t = t;
  state.u = u_init.real_part();
  shift_to_norm(state.u, params.A_norm);
  while (true) {
    check_monitors(state.u, data, t, params);
    const ScalarField r = drop_null_modes(residual(state.u, data, t));
    state.residual_norm = r.max_abs();
    if (state.residual_norm <= params.newton_tol) break;
    if (state.newton_iterations >= params.max_newton) {
      throw FeasibilityError("Newton iteration exceeded max_newton = " + std::to_string(params.max_newton) +
                             " (residual " + format_double(state.residual_norm) + ")");
    }
    const LinearizedOperator op(state.u, data, t);
    const ScalarField m = solve_linearized(op, -r, params.linear_tol, params.linear_max_iter);
    const ScalarField lift = solve_linearized(op, drop_null_modes(op.apply(ones(g))), params.linear_tol, params.linear_max_iter);
    const ScalarField kernel = ones(g) - lift;
    // Move along the kernel so the linearized normalization holds.
    const ScalarField e = state.u.exp();
    const double i0 = e.integral().real();
    const double im = (e * m).integral().real();
    const double ik = (e * kernel).integral().real();
    const double s = std::abs(ik) > 1e-14 * i0 ? (params.A_norm - i0 - im) / ik : 0.0;
    state.u += m;
    state.u += s * kernel;
    state.u = state.u.real_part();
    shift_to_norm(state.u, params.A_norm);
    ++state.newton_iterations;
  }
  state.in_upsilon = true;
  state.omega_positive = true;
  return state;
}

SolverState continuity_solve(const EquationData& data, const SolverParams& params) {
  data.validate();
  params.validate();
  const auto& g = data.mu.grid();
  ScalarField u(g, constant_solution(params.A_norm));
  if (!upsilon_check(u, data.alpha, params).ok()) {
    throw FeasibilityError("initial constant u = " + format_double(u[0].real()) +
                           " is not in Υ; raise A_norm or delta");
  }
  std::vector<TracePoint> trace;
  trace.push_back({0.0, drop_null_modes(residual(u, data, 0.0)).max_abs(), 0});
  int total = 0;
  SolverState state;
  double t_prev = 0.0;
  for (int step = 1; step <= params.t_steps; ++step) {
    const double t = static_cast<double>(step) / params.t_steps;
    try {
      state = solve_at_t(u, data, t, params);
    } catch (const FeasibilityError&) {
      const double mid = 0.5 * (t_prev + t);
      double failing = mid;
      try {
        SolverState half = solve_at_t(u, data, mid, params);
        total += half.newton_iterations;
        trace.push_back({mid, half.residual_norm, half.newton_iterations});
        failing = t;
        state = solve_at_t(half.u, data, t, params);
      } catch (const FeasibilityError& e) {
        throw FeasibilityError("at t = " + format_double(failing) + ": " + e.what());
      }
    }
    total += state.newton_iterations;
    trace.push_back({t, state.residual_norm, state.newton_iterations});
    u = state.u;
    t_prev = t;
  }
  state.newton_iterations = total;
  state.trace = std::move(trace);
  return state;
}

ScalarField linear_oracle(const ScalarField& mu, double t, double A_norm) {
  const int n = mu.grid().n();
  ScalarField w = Spectrum(mu).apply([=](int a, int b, int c, int d) {
    const double sq = reduced_sq(a, b, c, d, n);
    return sq == 0.0 ? Complex(0.0) : Complex(2.0 * t / sq);
  });
  w += A_norm / kTorusVolume;
  w = w.real_part();
  for (std::size_t p = 0; p < w.size(); ++p) {
    if (!(w[p].real() > 0.0)) throw FeasibilityError("linear solution e^u is not positive");
  }
  return w.map([](Complex v) { return Complex(std::log(v.real()), 0.0); });
}

}  // namespace hsw
