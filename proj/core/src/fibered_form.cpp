#include "hsw/fibered_form.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

namespace hsw {

namespace {

int fiber_degree(unsigned s) { return std::popcount(s); }

}  // namespace

FiberedForm::FiberedForm(const PeriodicGrid& grid, int degree) : grid_(grid), degree_(degree) {
  if (degree < 0 || degree > 6) throw std::invalid_argument("fibered form degree must lie in [0, 6]");
}

int FiberedForm::slot_degree(unsigned s) const {
  const int b = degree_ - fiber_degree(s);
  return (b < 0 || b > 4) ? -1 : b;
}

FiberedForm FiberedForm::basic(const BaseForm& beta) { return monomial(beta, kOne); }

FiberedForm FiberedForm::monomial(const BaseForm& beta, unsigned slot) {
  FiberedForm out(beta.grid(), beta.degree() + fiber_degree(slot));
  out.slots_[slot] = beta;
  return out;
}

FiberedForm FiberedForm::chi(const PeriodicGrid& grid) {
  return monomial(BaseForm::scalar(ScalarField(grid, Complex(0.0, 0.5))), kThetaThetaBar);
}

BaseForm FiberedForm::slot(unsigned s) const {
  if (slots_[s]) return *slots_[s];
  const int b = slot_degree(s);
  return BaseForm(grid_, b < 0 ? 0 : b);
}

void FiberedForm::set_slot(unsigned s, BaseForm beta) {
  if (slot_degree(s) != beta.degree()) throw std::invalid_argument("slot degree mismatch");
  slots_[s] = std::move(beta);
}

void FiberedForm::add_to_slot(unsigned s, const BaseForm& beta) {
  if (slot_degree(s) != beta.degree()) throw std::invalid_argument("slot degree mismatch");
  if (slots_[s]) *slots_[s] += beta;
  else slots_[s] = beta;
}

FiberedForm& FiberedForm::operator+=(const FiberedForm& other) {
  if (degree_ != other.degree_) throw std::invalid_argument("cannot add fibered forms of different degree");
  for (unsigned s = 0; s < 4; ++s) {
    if (other.slots_[s]) add_to_slot(s, *other.slots_[s]);
  }
  return *this;
}

FiberedForm& FiberedForm::operator-=(const FiberedForm& other) {
  if (degree_ != other.degree_) throw std::invalid_argument("cannot add fibered forms of different degree");
  for (unsigned s = 0; s < 4; ++s) {
    if (other.slots_[s]) add_to_slot(s, -*other.slots_[s]);
  }
  return *this;
}

FiberedForm& FiberedForm::operator*=(Complex s) {
  for (auto& b : slots_) {
    if (b) *b *= s;
  }
  return *this;
}

FiberedForm& FiberedForm::operator*=(const ScalarField& f) {
  for (auto& b : slots_) {
    if (b) *b *= f;
  }
  return *this;
}

double FiberedForm::max_abs() const {
  double m = 0.0;
  for (const auto& b : slots_) {
    if (b) m = std::max(m, b->max_abs());
  }
  return m;
}

bool FiberedForm::is_basic() const { return !slots_[1] && !slots_[2] && !slots_[3]; }

FiberedForm wedge(const FiberedForm& a, const FiberedForm& b) {
  if (a.degree() + b.degree() > 6) throw std::invalid_argument("fibered wedge degree overflow");
  FiberedForm out(a.grid(), a.degree() + b.degree());
  for (unsigned s = 0; s < 4; ++s) {
    if (!a.has(s)) continue;
    const BaseForm beta = a.slot(s);
    for (unsigned t = 0; t < 4; ++t) {
      if (!b.has(t)) continue;
      const int fs = wedge_sign(s, t);
      if (fs == 0) continue;
      const BaseForm gamma = b.slot(t);
      if (beta.degree() + gamma.degree() > 4) continue;  // vanishes on the base
      // (beta theta^s)(gamma theta^t) = (-1)^{|s||gamma|} beta gamma theta^s theta^t
      const int sign = fs * (((fiber_degree(s) * gamma.degree()) % 2) ? -1 : 1);
      out.add_to_slot(s | t, Complex(sign) * wedge(beta, gamma));
    }
  }
  return out;
}

FiberedForm conj(const FiberedForm& f) {
  FiberedForm out(f.grid(), f.degree());
  for (unsigned s = 0; s < 4; ++s) {
    if (!f.has(s)) continue;
    const BaseForm c = conj(f.slot(s));
    // conj(theta ^ thetabar) = thetabar ^ theta = -theta ^ thetabar
    if (s == kTheta) out.add_to_slot(kThetaBar, c);
    else if (s == kThetaBar) out.add_to_slot(kTheta, c);
    else if (s == kThetaThetaBar) out.add_to_slot(kThetaThetaBar, -c);
    else out.add_to_slot(kOne, c);
  }
  return out;
}

namespace {

enum class Op { d, del, delbar };

BaseForm base_op(const BaseForm& beta, Op op) {
  switch (op) {
    case Op::d: return d(beta);
    case Op::del: return del(beta, Overflow::drop);
    case Op::delbar: return delbar(beta, Overflow::drop);
  }
  return beta;
}

FiberedForm apply_total(const FiberedForm& f, const BaseForm& W, Op op) {
  if (f.degree() > 5) throw std::invalid_argument("exterior derivative of a 6-form");
  const PeriodicGrid& g = f.grid();
  const BaseForm zero2(g, 2);
  const BaseForm Wbar = conj(W);
  const BaseForm op_theta = op == Op::del ? zero2 : W;
  const BaseForm op_theta_bar = op == Op::delbar ? zero2 : Wbar;

  // op on the fiber monomials themselves
  std::array<FiberedForm, 4> fiber_op;
  fiber_op[kOne] = FiberedForm(g, 1);
  fiber_op[kTheta] = FiberedForm::basic(op_theta);
  fiber_op[kThetaBar] = FiberedForm::basic(op_theta_bar);
  fiber_op[kThetaThetaBar] = wedge(fiber_op[kTheta], FiberedForm::theta_bar(g)) -
                             wedge(FiberedForm::theta(g), fiber_op[kThetaBar]);

  FiberedForm out(g, f.degree() + 1);
  for (unsigned s = 0; s < 4; ++s) {
    if (!f.has(s)) continue;
    const BaseForm beta = f.slot(s);
    if (beta.degree() < 4) out.add_to_slot(s, base_op(beta, op));
    if (s != kOne) {
      const double sign = beta.degree() % 2 ? -1.0 : 1.0;
      out += Complex(sign) * wedge(FiberedForm::basic(beta), fiber_op[s]);
    }
  }
  return out;
}

}  // namespace

FiberedForm d_total(const FiberedForm& f, const BaseForm& W) { return apply_total(f, W, Op::d); }
FiberedForm del_total(const FiberedForm& f, const BaseForm& W) { return apply_total(f, W, Op::del); }
FiberedForm delbar_total(const FiberedForm& f, const BaseForm& W) { return apply_total(f, W, Op::delbar); }

AnsatzData AnsatzData::make(const BaseForm& W, double tol) {
  if (W.degree() != 2) throw std::invalid_argument("d theta must be a 2-form");
  const double dW = d(W).max_abs();
  if (dW > tol) {
    throw std::invalid_argument("W is not closed: |dW| = " + std::to_string(dW));
  }
  return AnsatzData{W, kahler_form(W.grid()), psi_base(W.grid())};
}

AnsatzReport AnsatzData::validate(double tol) const {
  AnsatzReport r;
  r.tolerance = tol;
  const BaseForm Wc = conj(W);
  const BaseForm re = Complex(0.5) * (W + Wc);
  const BaseForm im = Complex(0.0, -0.5) * (W - Wc);
  r.dW = d(W).max_abs();
  r.trace_re = trace_against(re).max_abs();
  r.trace_im = trace_against(im).max_abs();
  r.asd_re = (star_base(re) + re).max_abs();
  r.asd_im = (star_base(im) + im).max_abs();
  r.closed = r.dW <= tol;
  r.primitive = r.trace_re <= tol && r.trace_im <= tol;
  r.anti_self_dual = r.asd_re <= tol && r.asd_im <= tol;
  return r;
}

BaseForm psi_base(const PeriodicGrid& grid) {
  return BaseForm::constant(grid, 2, {{kDz1 | kDz2, 1.0 / (2.0 * std::sqrt(2.0))}});
}

FiberedForm build_omega_u(const ScalarField& u, const AnsatzData& data) {
  FiberedForm out = FiberedForm::basic(u.exp() * data.omega_B);
  out += FiberedForm::chi(u.grid());
  return out;
}

ScalarField top_density(const FiberedForm& f) {
  if (f.degree() != 6) throw std::invalid_argument("top_density needs a 6-form");
  // theta ^ thetabar = -2i chi
  return top_density(f.slot(kThetaThetaBar)) * Complex(0.0, -2.0);
}

ScalarField psi_norm_squared(const ScalarField& u) {
  const PeriodicGrid& g = u.grid();
  const AnsatzData flat{BaseForm(g, 2), kahler_form(g), psi_base(g)};
  const FiberedForm psi = FiberedForm::monomial(flat.psi_B, kTheta);
  const FiberedForm num = Complex(0.0, 1.0) * wedge(psi, conj(psi));
  const FiberedForm w = build_omega_u(u, flat);
  const FiberedForm w3 = Complex(1.0 / 6.0) * wedge(wedge(w, w), w);
  const ScalarField a = top_density(num);
  const ScalarField b = top_density(w3);
  ScalarField out(g);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] / b[i];
  return out;
}

ScalarField psi_norm(const ScalarField& u) {
  const ScalarField closed = (-u).exp();
  const ScalarField sq = psi_norm_squared(u);
  for (std::size_t i = 0; i < closed.size(); ++i) {
    const double ref = std::abs(closed[i]);
    if (std::abs(std::sqrt(sq[i]) - closed[i]) > 1e-9 * ref) {
      throw std::runtime_error("psi norm disagrees with the first-principles value");
    }
  }
  return closed;
}

bool StructureReport::pass() const {
  return std::all_of(entries.begin(), entries.end(), [](const ResidualEntry& e) { return e.pass; });
}

const ResidualEntry& StructureReport::get(const std::string& name) const {
  for (const auto& e : entries) {
    if (e.name == name) return e;
  }
  throw std::out_of_range("no residual named " + name);
}

namespace {

std::array<double, 4> raw_structure(const ScalarField& u, const AnsatzData& data) {
  const PeriodicGrid& g = u.grid();
  const FiberedForm w0 = build_omega_u(ScalarField(g), data);
  const FiberedForm wu = build_omega_u(u, data);
  const ScalarField norm = (-u).exp();
  const FiberedForm cb = norm * wedge(wu, wu);
  return {d(data.omega_B).max_abs(), wedge(data.omega_B, data.W).max_abs(),
          d_total(wedge(w0, w0), data.W).max_abs(), d_total(cb, data.W).max_abs()};
}

}  // namespace

StructureReport structure_residuals(const ScalarField& u, const AnsatzData& data, double tol_floor) {
  const auto raw = raw_structure(u, data);
  AnsatzData product = data;
  product.W = BaseForm(u.grid(), 2);
  const auto base = raw_structure(u, product);
  static const char* names[4] = {"d_omega_B", "omega_B_wedge_W", "balanced", "conformally_balanced"};
  StructureReport r;
  r.n = u.grid().n();
  for (int i = 0; i < 4; ++i) {
    ResidualEntry e;
    e.name = names[i];
    e.value = raw[i];
    e.tolerance = std::max(tol_floor, 10.0 * base[i]);
    e.pass = e.value <= e.tolerance;
    r.entries.push_back(e);
  }
  return r;
}

}  // namespace hsw
