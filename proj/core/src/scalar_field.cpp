#include "hsw/scalar_field.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hsw {

ScalarField::ScalarField(const PeriodicGrid& grid, Complex value)
    : grid_(grid), data_(grid.size(), value) {}

ScalarField::ScalarField(const PeriodicGrid& grid, std::vector<Complex> samples)
    : grid_(grid), data_(std::move(samples)) {
  if (data_.size() != grid_.size()) throw std::invalid_argument("sample count does not match grid");
}

ScalarField ScalarField::sample(const PeriodicGrid& grid, const PointFunction& f) {
  ScalarField out(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto x = grid.point(i);
    out.data_[i] = f(x[0], x[1], x[2], x[3]);
  }
  return out;
}

void ScalarField::check_same_grid(const ScalarField& other) const {
  if (!(grid_ == other.grid_)) throw std::invalid_argument("fields live on different grids");
}

ScalarField& ScalarField::operator+=(const ScalarField& other) {
  check_same_grid(other);
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

ScalarField& ScalarField::operator-=(const ScalarField& other) {
  check_same_grid(other);
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

ScalarField& ScalarField::operator*=(const ScalarField& other) {
  check_same_grid(other);
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] *= other.data_[i];
  return *this;
}

ScalarField& ScalarField::operator*=(Complex s) {
  for (auto& v : data_) v *= s;
  return *this;
}

ScalarField& ScalarField::operator+=(Complex s) {
  for (auto& v : data_) v += s;
  return *this;
}

ScalarField ScalarField::map(const std::function<Complex(Complex)>& f) const {
  ScalarField out(*this);
  for (auto& v : out.data_) v = f(v);
  return out;
}

ScalarField ScalarField::conj() const {
  return map([](Complex v) { return std::conj(v); });
}

ScalarField ScalarField::real_part() const {
  return map([](Complex v) { return Complex(v.real(), 0.0); });
}

ScalarField ScalarField::exp() const {
  return map([](Complex v) { return std::exp(v); });
}

double ScalarField::max_abs() const {
  double m = 0.0;
  for (const auto& v : data_) m = std::max(m, std::abs(v));
  return m;
}

double ScalarField::max_imag() const {
  double m = 0.0;
  for (const auto& v : data_) m = std::max(m, std::abs(v.imag()));
  return m;
}

Complex ScalarField::mean() const {
  Complex s = 0.0;
  for (const auto& v : data_) s += v;
  return s / static_cast<double>(data_.size());
}

Complex ScalarField::integral() const {
  Complex s = 0.0;
  for (const auto& v : data_) s += v;
  return s * grid_.cell_volume();
}

bool ScalarField::is_real(double rel_tol) const {
  return max_imag() <= rel_tol * std::max(max_abs(), 1e-300);
}

Spectrum::Spectrum(const ScalarField& f) : grid_(f.grid()), coeffs_(f.samples().begin(), f.samples().end()) {
  fft::forward(grid_, coeffs_);
}

ScalarField Spectrum::apply(const std::function<Complex(int, int, int, int)>& multiplier) const {
  const int n = grid_.n();
  std::vector<Complex> out(coeffs_.size());
  std::size_t flat = 0;
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      for (int c = 0; c < n; ++c) {
        for (int d = 0; d < n; ++d, ++flat) {
          out[flat] = coeffs_[flat] * multiplier(grid_.wavenumber(a), grid_.wavenumber(b),
                                                 grid_.wavenumber(c), grid_.wavenumber(d));
        }
      }
    }
  }
  fft::inverse(grid_, out);
  return ScalarField(grid_, std::move(out));
}

namespace {

// First-derivative symbol along each real axis; Nyquist -> 0.
struct AxisSymbols {
  std::vector<Complex> ik;  // i * k per DFT index
};

AxisSymbols axis_symbols(const PeriodicGrid& g) {
  AxisSymbols s;
  s.ik.resize(g.n());
  for (int i = 0; i < g.n(); ++i) {
    s.ik[i] = g.is_nyquist(i) ? Complex(0.0) : Complex(0.0, static_cast<double>(g.wavenumber(i)));
  }
  return s;
}

// Multiplies by a symbol that is a product-free linear combination of axis
// symbols, evaluated on DFT indices rather than signed wavenumbers.
template <typename Symbol>
ScalarField apply_indexed(const PeriodicGrid& g, const std::vector<Complex>& coeffs, Symbol symbol) {
  const int n = g.n();
  std::vector<Complex> out(coeffs.size());
  std::size_t flat = 0;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d, ++flat) out[flat] = coeffs[flat] * symbol(a, b, c, d);
  fft::inverse(g, out);
  return ScalarField(g, std::move(out));
}

Complex first_symbol(const AxisSymbols& s, Derivative d, int a, int b, int c, int e) {
  switch (d) {
    case Derivative::dx1: return s.ik[a];
    case Derivative::dx2: return s.ik[b];
    case Derivative::dx3: return s.ik[c];
    case Derivative::dx4: return s.ik[e];
    // d/dz = (d/dx - i d/dy) / 2, d/dzbar = (d/dx + i d/dy) / 2
    case Derivative::dz1: return 0.5 * (s.ik[a] - Complex(0, 1) * s.ik[b]);
    case Derivative::dz2: return 0.5 * (s.ik[c] - Complex(0, 1) * s.ik[e]);
    case Derivative::dzbar1: return 0.5 * (s.ik[a] + Complex(0, 1) * s.ik[b]);
    case Derivative::dzbar2: return 0.5 * (s.ik[c] + Complex(0, 1) * s.ik[e]);
  }
  return 0.0;
}

}  // namespace

ScalarField Spectrum::derivative(Derivative d) const {
  const auto s = axis_symbols(grid_);
  return apply_indexed(grid_, coeffs_, [&](int a, int b, int c, int e) { return first_symbol(s, d, a, b, c, e); });
}

ScalarField Spectrum::dz_dzbar(int k, int l) const {
  const auto s = axis_symbols(grid_);
  const Derivative dz = k == 0 ? Derivative::dz1 : Derivative::dz2;
  const Derivative dzb = l == 0 ? Derivative::dzbar1 : Derivative::dzbar2;
  return apply_indexed(grid_, coeffs_, [&](int a, int b, int c, int e) {
    return first_symbol(s, dz, a, b, c, e) * first_symbol(s, dzb, a, b, c, e);
  });
}

ScalarField derivative(const ScalarField& f, Derivative d) { return Spectrum(f).derivative(d); }

}  // namespace hsw
