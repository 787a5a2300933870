#include "hsw/base_form.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>

namespace hsw {

int mask_degree(Mask m) { return std::popcount(m); }
int mask_p(Mask m) { return std::popcount(m & 3u); }
int mask_q(Mask m) { return std::popcount(m & 12u); }

int wedge_sign(Mask a, Mask b) {
  if (a & b) return 0;
  int inversions = 0;
  for (int i = 0; i < 4; ++i) {
    if (!(a & (1u << i))) continue;
    inversions += std::popcount(b & ((1u << i) - 1u));
  }
  return inversions % 2 ? -1 : 1;
}

BaseForm::BaseForm(const PeriodicGrid& grid, int degree) : grid_(grid), degree_(degree) {
  if (degree < 0 || degree > 4) throw std::invalid_argument("form degree must lie in [0, 4]");
}

BaseForm BaseForm::scalar(const ScalarField& f) {
  BaseForm out(f.grid(), 0);
  out.comps_[0] = f;
  return out;
}

BaseForm BaseForm::constant(const PeriodicGrid& grid, int degree,
                            std::initializer_list<std::pair<Mask, Complex>> terms) {
  BaseForm out(grid, degree);
  for (const auto& [m, c] : terms) {
    if (m > 15 || mask_degree(m) != degree) throw std::invalid_argument("monomial degree mismatch");
    out.at(m) += c;
  }
  return out;
}

ScalarField BaseForm::coefficient(Mask m) const {
  return comps_[m] ? *comps_[m] : ScalarField(grid_);
}

ScalarField& BaseForm::at(Mask m) {
  if (mask_degree(m) != degree_) throw std::invalid_argument("monomial degree mismatch");
  if (!comps_[m]) comps_[m].emplace(grid_);
  return *comps_[m];
}

void BaseForm::set(Mask m, ScalarField f) {
  if (mask_degree(m) != degree_) throw std::invalid_argument("monomial degree mismatch");
  if (!(f.grid() == grid_)) throw std::invalid_argument("fields live on different grids");
  comps_[m] = std::move(f);
}

std::optional<std::pair<int, int>> BaseForm::bidegree() const {
  std::optional<std::pair<int, int>> pq;
  for (Mask m = 0; m < 16; ++m) {
    if (!comps_[m]) continue;
    std::pair<int, int> here{mask_p(m), mask_q(m)};
    if (pq && *pq != here) return std::nullopt;
    pq = here;
  }
  return pq;
}

BaseForm BaseForm::component_of_type(int p, int q) const {
  BaseForm out(grid_, degree_);
  for (Mask m = 0; m < 16; ++m) {
    if (comps_[m] && mask_p(m) == p && mask_q(m) == q) out.comps_[m] = comps_[m];
  }
  return out;
}

void BaseForm::check_compatible(const BaseForm& other) const {
  if (!(grid_ == other.grid_)) throw std::invalid_argument("forms live on different grids");
  if (degree_ != other.degree_) {
    throw std::invalid_argument("cannot add forms of degree " + std::to_string(degree_) + " and " +
                                std::to_string(other.degree_));
  }
}

BaseForm& BaseForm::operator+=(const BaseForm& other) {
  check_compatible(other);
  for (Mask m = 0; m < 16; ++m) {
    if (!other.comps_[m]) continue;
    if (comps_[m]) *comps_[m] += *other.comps_[m];
    else comps_[m] = other.comps_[m];
  }
  return *this;
}

BaseForm& BaseForm::operator-=(const BaseForm& other) {
  check_compatible(other);
  for (Mask m = 0; m < 16; ++m) {
    if (!other.comps_[m]) continue;
    if (comps_[m]) *comps_[m] -= *other.comps_[m];
    else comps_[m] = -*other.comps_[m];
  }
  return *this;
}

BaseForm& BaseForm::operator*=(Complex s) {
  for (auto& c : comps_) {
    if (c) *c *= s;
  }
  return *this;
}

BaseForm& BaseForm::operator*=(const ScalarField& f) {
  for (auto& c : comps_) {
    if (c) *c *= f;
  }
  return *this;
}

double BaseForm::max_abs() const {
  double m = 0.0;
  for (const auto& c : comps_) {
    if (c) m = std::max(m, c->max_abs());
  }
  return m;
}

bool BaseForm::is_real(double rel_tol) const {
  const double scale = max_abs();
  return (*this - conj(*this)).max_abs() <= rel_tol * std::max(scale, 1e-300);
}

namespace {

// Shared body of del / delbar: bits selects {dz1, dz2} or {dzbar1, dzbar2}.
BaseForm apply_dolbeault(const BaseForm& f, int first_bit, Overflow mode, const char* name) {
  if (f.degree() == 4) throw std::invalid_argument(std::string(name) + " of a 4-form");
  BaseForm out(f.grid(), f.degree() + 1);
  const Derivative dirs[2] = {first_bit == 0 ? Derivative::dz1 : Derivative::dzbar1,
                              first_bit == 0 ? Derivative::dz2 : Derivative::dzbar2};
  for (Mask m = 0; m < 16; ++m) {
    const ScalarField* c = f.component(m);
    if (!c) continue;
    const Mask both = 3u << first_bit;
    if ((m & both) == both) {
      if (mode == Overflow::raise) {
        throw std::invalid_argument(std::string(name) + ": bidegree overflow (p=" + std::to_string(mask_p(m)) +
                                    ", q=" + std::to_string(mask_q(m)) + ")");
      }
      continue;
    }
    const Spectrum spec(*c);
    for (int k = 0; k < 2; ++k) {
      const Mask bit = 1u << (first_bit + k);
      if (m & bit) continue;
      ScalarField dc = spec.derivative(dirs[k]);
      dc *= Complex(wedge_sign(bit, m));
      out.at(m | bit) += dc;
    }
  }
  return out;
}

// Change of basis between complex monomials and real monomials dx^S. Column c
// holds the real expansion of complex monomial c.
struct StarTables {
  Eigen::Matrix<Complex, 16, 16> T;
  Eigen::Matrix<Complex, 16, 16> S;  // star in the complex basis
  Complex top_density = 0.0;         // dx1234 coefficient of mask 15
};

const StarTables& star_tables() {
  static const StarTables tables = [] {
    // One-forms in the real basis dx1..dx4.
    const Complex I(0.0, 1.0);
    const std::array<std::array<Complex, 4>, 4> one = {{
        {1.0, I, 0.0, 0.0},   // dz1
        {0.0, 0.0, 1.0, I},   // dz2
        {1.0, -I, 0.0, 0.0},  // dzbar1
        {0.0, 0.0, 1.0, -I},  // dzbar2
    }};
    StarTables t;
    t.T.setZero();
    for (Mask c = 0; c < 16; ++c) {
      // Expand the wedge of the selected one-forms, keeping real masks.
      std::array<Complex, 16> acc{};
      acc[0] = 1.0;
      for (int b = 0; b < 4; ++b) {
        if (!(c & (1u << b))) continue;
        std::array<Complex, 16> next{};
        for (Mask r = 0; r < 16; ++r) {
          if (acc[r] == 0.0) continue;
          for (int a = 0; a < 4; ++a) {
            const Mask ra = 1u << a;
            const int s = wedge_sign(r, ra);
            if (s == 0) continue;
            next[r | ra] += acc[r] * one[b][a] * double(s);
          }
        }
        acc = next;
      }
      for (Mask r = 0; r < 16; ++r) t.T(r, c) = acc[r];
    }
    Eigen::Matrix<Complex, 16, 16> Sr = Eigen::Matrix<Complex, 16, 16>::Zero();
    for (Mask r = 0; r < 16; ++r) {
      const Mask rc = 15u & ~r;
      // e_S ^ *e_S = vol: *e_S = sign(S, S^c) e_{S^c}
      Sr(rc, r) = double(wedge_sign(r, rc));
    }
    t.S = t.T.inverse() * Sr * t.T;
    t.top_density = t.T(15, 15);
    return t;
  }();
  return tables;
}

}  // namespace

BaseForm del(const BaseForm& f, Overflow mode) { return apply_dolbeault(f, 0, mode, "del"); }
BaseForm delbar(const BaseForm& f, Overflow mode) { return apply_dolbeault(f, 2, mode, "delbar"); }

BaseForm d(const BaseForm& f) {
  return del(f, Overflow::drop) + delbar(f, Overflow::drop);
}

BaseForm i_ddbar(const ScalarField& f) {
  const Spectrum spec(f);
  BaseForm out(f.grid(), 2);
  for (int k = 0; k < 2; ++k) {
    for (int l = 0; l < 2; ++l) {
      // i d_k dbar_l f dz_k ^ dzbar_l
      const Mask m = (1u << k) | (4u << l);
      out.set(m, spec.dz_dzbar(k, l) * Complex(0.0, 1.0));
    }
  }
  return out;
}

BaseForm wedge(const BaseForm& a, const BaseForm& b) {
  if (!(a.grid() == b.grid())) throw std::invalid_argument("forms live on different grids");
  if (a.degree() + b.degree() > 4) {
    throw std::invalid_argument("wedge degree overflow: " + std::to_string(a.degree()) + " + " +
                                std::to_string(b.degree()) + " > 4");
  }
  BaseForm out(a.grid(), a.degree() + b.degree());
  for (Mask ma = 0; ma < 16; ++ma) {
    const ScalarField* ca = a.component(ma);
    if (!ca) continue;
    for (Mask mb = 0; mb < 16; ++mb) {
      const ScalarField* cb = b.component(mb);
      if (!cb) continue;
      const int s = wedge_sign(ma, mb);
      if (s == 0) continue;
      ScalarField prod = *ca * *cb;
      if (s < 0) prod *= Complex(-1.0);
      out.at(ma | mb) += prod;
    }
  }
  return out;
}

BaseForm conj(const BaseForm& f) {
  BaseForm out(f.grid(), f.degree());
  for (Mask m = 0; m < 16; ++m) {
    const ScalarField* c = f.component(m);
    if (!c) continue;
    const Mask I = m & 3u;
    const Mask J = (m >> 2) & 3u;
    const Mask swapped = J | (I << 2);
    const int s = (std::popcount(I) * std::popcount(J)) % 2 ? -1 : 1;
    ScalarField cc = c->conj();
    if (s < 0) cc *= Complex(-1.0);
    out.at(swapped) += cc;
  }
  return out;
}

BaseForm star_base(const BaseForm& f) {
  const auto& t = star_tables();
  BaseForm out(f.grid(), 4 - f.degree());
  for (Mask m = 0; m < 16; ++m) {
    const ScalarField* c = f.component(m);
    if (!c) continue;
    for (Mask n = 0; n < 16; ++n) {
      const Complex s = t.S(n, m);
      if (std::abs(s) < 1e-14) continue;
      out.at(n) += *c * s;
    }
  }
  return out;
}

ScalarField top_density(const BaseForm& f) {
  if (f.degree() != 4) throw std::invalid_argument("top_density needs a 4-form");
  return f.coefficient(kTop) * star_tables().top_density;
}

ScalarField trace_against(const BaseForm& f) {
  if (f.degree() != 2) throw std::invalid_argument("trace_against needs a 2-form");
  return top_density(wedge(f, kahler_form(f.grid())));
}

Complex integrate(const BaseForm& f) { return top_density(f).integral(); }

BaseForm kahler_form(const PeriodicGrid& grid) {
  const Complex h(0.0, 0.5);
  return BaseForm::constant(grid, 2, {{kDz1 | kDzbar1, h}, {kDz2 | kDzbar2, h}});
}

BaseForm volume_form(const PeriodicGrid& grid) {
  return BaseForm::constant(grid, 4, {{kTop, 1.0 / star_tables().top_density}});
}

BaseForm density_to_top(const ScalarField& f) {
  BaseForm out(f.grid(), 4);
  out.set(kTop, f * (1.0 / star_tables().top_density));
  return out;
}

BaseForm real_two_form(const PeriodicGrid& grid, const std::array<std::array<double, 4>, 4>& c) {
  const auto& t = star_tables();
  // Solve T x = real expansion for the complex coefficients.
  Eigen::Matrix<Complex, 16, 1> real = Eigen::Matrix<Complex, 16, 1>::Zero();
  for (int a = 0; a < 4; ++a) {
    for (int b = a + 1; b < 4; ++b) real((1u << a) | (1u << b)) += c[a][b] - c[b][a];
  }
  const Eigen::Matrix<Complex, 16, 1> cx = t.T.inverse() * real;
  BaseForm out(grid, 2);
  for (Mask m = 0; m < 16; ++m) {
    if (std::abs(cx(m)) > 1e-15) out.at(m) += cx(m);
  }
  return out;
}

BaseForm asd_form(const PeriodicGrid& grid, const std::array<double, 3>& n) {
  std::array<std::array<double, 4>, 4> c{};
  c[0][1] = n[0];
  c[2][3] = -n[0];
  c[0][2] = n[1];
  c[1][3] = n[1];
  c[0][3] = n[2];
  c[1][2] = -n[2];
  return real_two_form(grid, c);
}

}  // namespace hsw
