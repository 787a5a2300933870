#pragma once

// Differential forms on the flat torus T^4 in the complex coframe
// {dz1, dz2, dzbar1, dzbar2}. A monomial is a 4-bit mask (bit 0 = dz1,
// bit 1 = dz2, bit 2 = dzbar1, bit 3 = dzbar2) read as the wedge of its set
// bits in increasing order, so mask 15 is dz1^dz2^dzbar1^dzbar2.

#include "hsw/scalar_field.hpp"

#include <array>
#include <initializer_list>
#include <optional>
#include <utility>

namespace hsw {

using Mask = unsigned;

inline constexpr Mask kDz1 = 1u;
inline constexpr Mask kDz2 = 2u;
inline constexpr Mask kDzbar1 = 4u;
inline constexpr Mask kDzbar2 = 8u;
inline constexpr Mask kTop = 15u;

int mask_degree(Mask m);
int mask_p(Mask m);
int mask_q(Mask m);
/// Sign of dz^a ^ dz^b relative to the sorted monomial a|b; 0 if they overlap.
int wedge_sign(Mask a, Mask b);

enum class Overflow { raise, drop };

class BaseForm {
 public:
  BaseForm() = default;
  BaseForm(const PeriodicGrid& grid, int degree);

  static BaseForm scalar(const ScalarField& f);
  static BaseForm constant(const PeriodicGrid& grid, int degree,
                           std::initializer_list<std::pair<Mask, Complex>> terms);

  const PeriodicGrid& grid() const { return grid_; }
  int degree() const { return degree_; }

  bool has(Mask m) const { return comps_[m].has_value(); }
  const ScalarField* component(Mask m) const { return comps_[m] ? &*comps_[m] : nullptr; }
  /// Coefficient of monomial m, zero if not stored.
  ScalarField coefficient(Mask m) const;
  /// Mutable coefficient, created as zero on first access.
  ScalarField& at(Mask m);
  void set(Mask m, ScalarField f);
  void erase(Mask m) { comps_[m].reset(); }

  /// Bidegree of the stored monomials if they all share one.
  std::optional<std::pair<int, int>> bidegree() const;
  /// Keeps only the (p, q) monomials.
  BaseForm component_of_type(int p, int q) const;

  BaseForm& operator+=(const BaseForm& other);
  BaseForm& operator-=(const BaseForm& other);
  BaseForm& operator*=(Complex s);
  BaseForm& operator*=(const ScalarField& f);

  friend BaseForm operator+(BaseForm a, const BaseForm& b) { return a += b; }
  friend BaseForm operator-(BaseForm a, const BaseForm& b) { return a -= b; }
  friend BaseForm operator*(Complex s, BaseForm a) { return a *= s; }
  friend BaseForm operator*(const ScalarField& f, BaseForm a) { return a *= f; }
  BaseForm operator-() const { return Complex(-1.0) * (*this); }

  /// Max over monomials and grid points of |coefficient|.
  double max_abs() const;
  bool is_zero(double tol = 0.0) const { return max_abs() <= tol; }
  /// conj(f) == f up to rel_tol times max_abs.
  bool is_real(double rel_tol = 1e-12) const;

 private:
  void check_compatible(const BaseForm& other) const;

  PeriodicGrid grid_;
  int degree_ = 0;
  std::array<std::optional<ScalarField>, 16> comps_;
};

BaseForm del(const BaseForm& f, Overflow mode = Overflow::raise);
BaseForm delbar(const BaseForm& f, Overflow mode = Overflow::raise);
/// d = del + delbar; components past the top degree vanish on a surface.
BaseForm d(const BaseForm& f);
/// i del delbar of a scalar field as a (1,1)-form.
BaseForm i_ddbar(const ScalarField& f);

BaseForm wedge(const BaseForm& a, const BaseForm& b);
BaseForm conj(const BaseForm& f);
BaseForm star_base(const BaseForm& f);

/// Density of a top form against dx1^dx2^dx3^dx4.
ScalarField top_density(const BaseForm& f);
/// Lambda f with f ^ omega_B = (Lambda f) omega_B^2 / 2; f a 2-form.
ScalarField trace_against(const BaseForm& f);
/// Integral of a 4-form over T^4.
Complex integrate(const BaseForm& f);

/// omega_B = (i/2)(dz1^dzbar1 + dz2^dzbar2).
BaseForm kahler_form(const PeriodicGrid& grid);
/// omega_B^2 / 2 = dx1^dx2^dx3^dx4.
BaseForm volume_form(const PeriodicGrid& grid);
/// f * omega_B^2 / 2.
BaseForm density_to_top(const ScalarField& f);

/// Constant real 2-forms in the real coframe dx1..dx4: sum c_ab dx_a ^ dx_b
/// over a < b, indices 0-based.
BaseForm real_two_form(const PeriodicGrid& grid, const std::array<std::array<double, 4>, 4>& c);

/// The anti-self-dual basis {dx12 - dx34, dx13 + dx24, dx14 - dx23} with
/// integer weights, as a real constant 2-form.
BaseForm asd_form(const PeriodicGrid& grid, const std::array<double, 3>& n);

}  // namespace hsw
