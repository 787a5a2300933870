#include "hsw/grid.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <stdexcept>
#include <string>

namespace hsw {

PeriodicGrid::PeriodicGrid(int n) : n_(n) {
  if (n < 8 || n % 2 != 0) {
    throw std::invalid_argument("grid size N must be even and >= 8, got " + std::to_string(n));
  }
  size_ = static_cast<std::size_t>(n) * n * n * n;
}

double PeriodicGrid::cell_volume() const {
  const double h = spacing();
  return h * h * h * h;
}

std::array<int, 4> PeriodicGrid::unflatten(std::size_t flat) const {
  std::array<int, 4> idx{};
  for (int axis = 3; axis >= 0; --axis) {
    idx[axis] = static_cast<int>(flat % n_);
    flat /= n_;
  }
  return idx;
}

std::array<double, 4> PeriodicGrid::point(std::size_t flat) const {
  const auto idx = unflatten(flat);
  return {coordinate(idx[0]), coordinate(idx[1]), coordinate(idx[2]), coordinate(idx[3])};
}

namespace fft {
namespace {

struct PlanPair {
  fftw_plan forward;
  fftw_plan inverse;
};

PlanPair plans_for(int n) {
  static std::mutex mutex;
  static std::map<int, PlanPair> cache;
  std::lock_guard lock(mutex);
  if (auto it = cache.find(n); it != cache.end()) return it->second;
  const std::size_t size = static_cast<std::size_t>(n) * n * n * n;
  auto* scratch = fftw_alloc_complex(size);
  const int dims[4] = {n, n, n, n};
  // FFTW_ESTIMATE does not touch the buffer; FFTW_UNALIGNED lets callers pass
  // std::vector storage.
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  PlanPair p{fftw_plan_dft(4, dims, scratch, scratch, FFTW_FORWARD, flags),
             fftw_plan_dft(4, dims, scratch, scratch, FFTW_BACKWARD, flags)};
  fftw_free(scratch);
  if (!p.forward || !p.inverse) throw std::runtime_error("FFTW plan creation failed");
  cache.emplace(n, p);
  return p;
}

void check(const PeriodicGrid& grid, std::span<Complex> data) {
  if (data.size() != grid.size()) throw std::invalid_argument("FFT buffer does not match grid size");
}

}  // namespace

void forward(const PeriodicGrid& grid, std::span<Complex> data) {
  check(grid, data);
  auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plans_for(grid.n()).forward, ptr, ptr);
}

void inverse(const PeriodicGrid& grid, std::span<Complex> data) {
  check(grid, data);
  auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plans_for(grid.n()).inverse, ptr, ptr);
  const double scale = 1.0 / static_cast<double>(grid.size());
  for (auto& v : data) v *= scale;
}

}  // namespace fft
}  // namespace hsw
