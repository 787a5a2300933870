#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>

namespace hsw {

using Complex = std::complex<double>;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Uniform grid on T^4 = (R / 2 pi Z)^4 with N points per axis. Points are
/// stored row-major, axis 4 fastest. Complex coordinates are z1 = x1 + i x2 and
/// z2 = x3 + i x4.
class PeriodicGrid {
 public:
  PeriodicGrid() = default;
  /// Throws std::invalid_argument unless n is even and >= 8.
  explicit PeriodicGrid(int n);

  int n() const { return n_; }
  std::size_t size() const { return size_; }
  double spacing() const { return kTwoPi / n_; }
  double cell_volume() const;

  double coordinate(int index) const { return spacing() * index; }
  std::array<int, 4> unflatten(std::size_t flat) const;
  std::array<double, 4> point(std::size_t flat) const;

  /// Signed integer wavenumber of DFT index i; the Nyquist index maps to
  /// n/2 here and callers decide how to treat it.
  int wavenumber(int i) const { return i <= n_ / 2 ? i : i - n_; }
  bool is_nyquist(int i) const { return i == n_ / 2; }

  friend bool operator==(const PeriodicGrid&, const PeriodicGrid&) = default;

 private:
  int n_ = 0;
  std::size_t size_ = 0;
};

namespace fft {

/// In-place 4-D DFT over a grid-sized buffer; the inverse divides by N^4.
/// Plans are created once per N and shared; execution is thread-safe.
void forward(const PeriodicGrid& grid, std::span<Complex> data);
void inverse(const PeriodicGrid& grid, std::span<Complex> data);

}  // namespace fft
}  // namespace hsw
