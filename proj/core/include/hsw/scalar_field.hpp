#pragma once

#include "hsw/grid.hpp"

#include <functional>
#include <vector>

namespace hsw {

/// Complex samples of a function on the periodic grid.
class ScalarField {
 public:
  ScalarField() = default;
  explicit ScalarField(const PeriodicGrid& grid, Complex value = 0.0);
  ScalarField(const PeriodicGrid& grid, std::vector<Complex> samples);

  using PointFunction = std::function<Complex(double, double, double, double)>;
  static ScalarField sample(const PeriodicGrid& grid, const PointFunction& f);

  const PeriodicGrid& grid() const { return grid_; }
  std::size_t size() const { return data_.size(); }
  std::span<const Complex> samples() const { return data_; }
  std::span<Complex> samples() { return data_; }
  const Complex& operator[](std::size_t i) const { return data_[i]; }
  Complex& operator[](std::size_t i) { return data_[i]; }

  ScalarField& operator+=(const ScalarField& other);
  ScalarField& operator-=(const ScalarField& other);
  ScalarField& operator*=(const ScalarField& other);
  ScalarField& operator*=(Complex s);
  ScalarField& operator+=(Complex s);

  friend ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
  friend ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
  friend ScalarField operator*(ScalarField a, const ScalarField& b) { return a *= b; }
  friend ScalarField operator*(Complex s, ScalarField a) { return a *= s; }
  friend ScalarField operator*(ScalarField a, Complex s) { return a *= s; }
  friend ScalarField operator+(ScalarField a, Complex s) { return a += s; }
  ScalarField operator-() const { return (*this) * Complex(-1.0); }

  ScalarField map(const std::function<Complex(Complex)>& f) const;
  ScalarField conj() const;
  ScalarField real_part() const;
  ScalarField exp() const;

  double max_abs() const;
  double max_imag() const;
  Complex mean() const;
  /// Riemann sum times the cell volume: the integral of f dx1..dx4.
  Complex integral() const;
  /// Imaginary parts below rel_tol times the max magnitude.
  bool is_real(double rel_tol = 1e-12) const;

 private:
  void check_same_grid(const ScalarField& other) const;

  PeriodicGrid grid_;
  std::vector<Complex> data_;
};

enum class Derivative { dx1, dx2, dx3, dx4, dz1, dz2, dzbar1, dzbar2 };

/// Forward transform of a field, reused for several derivatives.
class Spectrum {
 public:
  explicit Spectrum(const ScalarField& f);

  const PeriodicGrid& grid() const { return grid_; }
  /// Spectral derivative. Odd derivatives zero the Nyquist mode so real fields
  /// stay real.
  ScalarField derivative(Derivative d) const;
  /// Mixed second derivative d/dz_k d/dzbar_l (k, l in {0, 1}).
  ScalarField dz_dzbar(int k, int l) const;
  /// Applies an arbitrary multiplier m(k1, k2, k3, k4) with signed wavenumbers.
  ScalarField apply(const std::function<Complex(int, int, int, int)>& multiplier) const;

 private:
  PeriodicGrid grid_;
  std::vector<Complex> coeffs_;
};

ScalarField derivative(const ScalarField& f, Derivative d);

}  // namespace hsw
