#include "hsw/field_io.hpp"

#include <nlohmann/json.hpp>

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace hsw::io {

namespace {

std::uint64_t to_le(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::little) return v;
  else return __builtin_bswap64(v);
}

void append_double(std::string& out, double x) {
  const std::uint64_t bits = to_le(std::bit_cast<std::uint64_t>(x));
  char buf[8];
  std::memcpy(buf, &bits, 8);
  out.append(buf, 8);
}

double read_double(const char* p) {
  std::uint64_t bits;
  std::memcpy(&bits, p, 8);
  return std::bit_cast<double>(to_le(bits));
}

std::filesystem::path sidecar(const std::filesystem::path& path) {
  return std::filesystem::path(path.string() + ".json");
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

void write_atomic(const std::filesystem::path& path, const std::string& bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void write_form(const std::filesystem::path& path, const BaseForm& f) {
  nlohmann::ordered_json meta;
  meta["N"] = f.grid().n();
  meta["degree"] = f.degree();
  if (auto pq = f.bidegree()) meta["bidegree"] = {pq->first, pq->second};
  else meta["bidegree"] = nullptr;
  meta["layout"] = "row-major, axis 4 fastest, complex128 little-endian (re, im)";
  meta["masks"] = nlohmann::json::array();

  std::string blob;
  for (Mask m = 0; m < 16; ++m) {
    const ScalarField* c = f.component(m);
    if (!c) continue;
    meta["masks"].push_back(m);
    blob.reserve(blob.size() + c->size() * 16);
    for (const Complex& v : c->samples()) {
      append_double(blob, v.real());
      append_double(blob, v.imag());
    }
  }
  write_atomic(path, blob);
  write_atomic(sidecar(path), meta.dump(2) + "\n");
}

BaseForm read_form(const std::filesystem::path& path) {
  const auto meta = nlohmann::json::parse(slurp(sidecar(path)));
  const PeriodicGrid grid(meta.at("N").get<int>());
  BaseForm f(grid, meta.at("degree").get<int>());
  const std::string blob = slurp(path);
  const auto masks = meta.at("masks").get<std::vector<unsigned>>();
  if (blob.size() != masks.size() * grid.size() * 16) {
    throw std::runtime_error("field file " + path.string() + " has unexpected size");
  }
  const char* p = blob.data();
  for (unsigned m : masks) {
    std::vector<Complex> samples(grid.size());
    for (auto& v : samples) {
      v = Complex(read_double(p), read_double(p + 8));
      p += 16;
    }
    f.set(m, ScalarField(grid, std::move(samples)));
  }
  return f;
}

void write_field(const std::filesystem::path& path, const ScalarField& f) {
  write_form(path, BaseForm::scalar(f));
}

ScalarField read_field(const std::filesystem::path& path) {
  const BaseForm f = read_form(path);
  if (f.degree() != 0) throw std::runtime_error(path.string() + " is not a scalar field");
  return f.coefficient(0);
}

}  // namespace hsw::io
