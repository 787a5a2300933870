#include "hsw/picard_lattice.hpp"

#include <optional>
#include <sstream>
#include <stdexcept>

namespace hsw::lattice {

OrbifoldSurface OrbifoldSurface::k3(std::string name, int num_A1, Rational h_self) {
  OrbifoldSurface s{std::move(name), 22 - num_A1, num_A1, std::move(h_self)};
  s.validate();
  return s;
}

void OrbifoldSurface::validate() const {
  if (h_self <= Rational(0)) throw std::invalid_argument("h_self must be positive, got " + hsw::to_string(h_self));
  if (num_A1 < 0) throw std::invalid_argument("num_A1 must be non-negative");
  if (b2_orb <= 0) throw std::invalid_argument("b2_orb must be positive");
}

BlowupLattice::BlowupLattice(OrbifoldSurface base, int k_blown)
    : base_(std::move(base)), k_blown_(k_blown) {
  base_.validate();
  if (k_blown < 0 || k_blown > base_.num_A1) {
    throw std::invalid_argument("k_blown must lie in [0, num_A1] = [0, " +
                                std::to_string(base_.num_A1) + "], got " + std::to_string(k_blown));
  }
}

Rational BlowupLattice::gram(std::size_t i, std::size_t j) const {
  if (i != j) return Rational(0);
  return i == 0 ? base_.h_self : Rational(-2);
}

DivisorClass DivisorClass::hyperplane(std::size_t rank) {
  auto d = zero(rank);
  d[0] = 1;
  return d;
}

DivisorClass DivisorClass::exceptional(std::size_t i, std::size_t rank) {
  if (i == 0 || i >= rank) throw std::invalid_argument("exceptional curve index out of range");
  auto d = zero(rank);
  d[i] = 1;
  return d;
}

DivisorClass& DivisorClass::operator+=(const DivisorClass& other) {
  if (other.size() != size()) throw std::invalid_argument("divisor dimension mismatch");
  for (std::size_t i = 0; i < size(); ++i) coeffs_[i] += other.coeffs_[i];
  return *this;
}

DivisorClass& DivisorClass::operator-=(const DivisorClass& other) {
  if (other.size() != size()) throw std::invalid_argument("divisor dimension mismatch");
  for (std::size_t i = 0; i < size(); ++i) coeffs_[i] -= other.coeffs_[i];
  return *this;
}

DivisorClass& DivisorClass::operator*=(const Rational& s) {
  for (auto& c : coeffs_) c *= s;
  return *this;
}

std::string DivisorClass::to_string() const {
  std::ostringstream out;
  out << "[";
  for (std::size_t i = 0; i < coeffs_.size(); ++i) {
    if (i) out << ", ";
    out << hsw::to_string(coeffs_[i]);
  }
  out << "]";
  return out.str();
}

Rational intersect(const DivisorClass& d1, const DivisorClass& d2, const BlowupLattice& lattice) {
  if (d1.size() != lattice.rank() || d2.size() != lattice.rank()) {
    throw std::invalid_argument("dimension mismatch: divisors have " + std::to_string(d1.size()) +
                                " and " + std::to_string(d2.size()) + " coefficients, lattice rank is " +
                                std::to_string(lattice.rank()));
  }
  // Gram is diagonal.
  Rational sum(0);
  for (std::size_t i = 0; i < d1.size(); ++i) sum += d1[i] * lattice.gram(i, i) * d2[i];
  return sum;
}

Rational weighted_ci_h_self(std::span<const int> weights, std::span<const int> degrees) {
  if (weights.empty() || degrees.empty()) {
    throw std::invalid_argument("weighted complete intersection needs non-empty weights and degrees");
  }
  BigInt num(1);
  BigInt den(1);
  for (int d : degrees) {
    if (d <= 0) throw std::invalid_argument("degrees must be positive");
    num *= d;
  }
  for (int w : weights) {
    if (w <= 0) throw std::invalid_argument("weights must be positive");
    den *= w;
  }
  return Rational(num, den);
}

bool nakai_positive(const DivisorClass& c, const BlowupLattice& lattice) {
  if (c.size() != lattice.rank()) return false;
  if (c[0] <= Rational(0)) return false;
  for (std::size_t i = 1; i < c.size(); ++i) {
    if (-c[i] <= Rational(0)) return false;  // a_i = -coefficient
  }
  if (intersect(c, c, lattice) <= Rational(0)) return false;
  for (std::size_t i = 1; i < c.size(); ++i) {
    if (intersect(c, DivisorClass::exceptional(i, c.size()), lattice) <= 0) return false;
  }
  return true;
}

namespace {

DivisorClass kahler_class(long n, std::size_t rank) {
  auto omega = DivisorClass::zero(rank);
  omega[0] = n;
  for (std::size_t i = 1; i < rank; ++i) omega[i] = -1;
  return omega;
}

// n * h = target(m) solved for the smallest n >= 1 such that m is an integer
// satisfying min_m and omega is positive. The search terminates because both
// constraints are eventually satisfied along multiples of h's denominator.
template <typename MFromN>
std::pair<long, long> smallest_solution(const BlowupLattice& lattice, MFromN m_from_n) {
  const std::size_t rank = lattice.rank();
  for (long n = 1;; ++n) {
    auto m = m_from_n(Rational(n) * lattice.base().h_self);
    if (!m) continue;
    if (nakai_positive(kahler_class(n, rank), lattice)) return {n, *m};
  }
}

}  // namespace

TracelessDivisor traceless_divisor(const BlowupLattice& lattice) {
  if (lattice.k_blown() < 1) throw std::invalid_argument("traceless_divisor needs k_blown >= 1");
  const std::size_t rank = lattice.rank();
  auto [n, m] = smallest_solution(lattice, [](const Rational& nh) -> std::optional<long> {
    Rational m = nh / 2;
    if (!is_integer(m) || m < Rational(1)) return std::nullopt;
    return static_cast<long>(m.numerator());
  });
  TracelessDivisor out;
  out.n = n;
  out.m = m;
  out.omega = kahler_class(n, rank);
  out.divisor = DivisorClass::hyperplane(rank) - Rational(m) * DivisorClass::exceptional(1, rank);
  return out;
}

CormainPair cormain_pair(const BlowupLattice& lattice) {
  if (lattice.k_blown() < 2) throw std::invalid_argument("cormain_pair needs k_blown >= 2");
  const std::size_t rank = lattice.rank();
  auto [n, m] = smallest_solution(lattice, [](const Rational& nh) -> std::optional<long> {
    Rational m = (nh - 2) / 2;
    if (!is_integer(m) || m < Rational(2)) return std::nullopt;
    return static_cast<long>(m.numerator());
  });
  const auto h = DivisorClass::hyperplane(rank);
  const auto e1 = DivisorClass::exceptional(1, rank);
  const auto e2 = DivisorClass::exceptional(2, rank);
  CormainPair out;
  out.n = n;
  out.m = m;
  out.omega = kahler_class(n, rank);
  out.d1 = h - Rational(m) * e1 - e2;
  out.d2 = h - e1 - Rational(m) * e2;
  return out;
}

int orbifold_euler(int num_A1) {
  if (num_A1 < 0 || num_A1 > 24) {
    throw std::invalid_argument("num_A1 must lie in [0, 24], got " + std::to_string(num_A1));
  }
  return 24 - num_A1;
}

int seifert5_copies(int b2_orb) {
  if (b2_orb < 2) throw std::invalid_argument("classify_seifert5 needs b2_orb >= 2");
  return b2_orb - 1;
}

std::string classify_seifert5(int b2_orb) {
  return "#_" + std::to_string(seifert5_copies(b2_orb)) + "(S2xS3)";
}

int t2_total_rank(int b2_orb) {
  if (b2_orb < 3) throw std::invalid_argument("classify_t2_total needs b2_orb >= 3");
  return b2_orb - 2;
}

std::string classify_t2_total(int b2_orb) {
  const int r = t2_total_rank(b2_orb);
  return "#_" + std::to_string(r) + "(S2xS4)#_" + std::to_string(r + 1) + "(S3xS3)";
}

IntegrabilityReport integrability_check(const Rational& alpha_prime, int euler,
                                        const BundleTopologyData& bundle, const Rational& q1,
                                        const Rational& q2) {
  if (!bundle.degree_zero) throw std::invalid_argument("degree-0 required");
  if (q1 > Rational(0) || q2 > Rational(0)) {
    throw std::invalid_argument("anti-self-dual classes have non-positive self-intersection; got Q1 = " +
                                hsw::to_string(q1) + ", Q2 = " + hsw::to_string(q2));
  }
  IntegrabilityReport r;
  r.alpha_prime = alpha_prime;
  r.euler = euler;
  r.lhs = alpha_prime * (Rational(euler) - (bundle.c2 - bundle.c1_sq / 2));
  r.rhs = -(q1 + q2);
  r.residual = r.lhs - r.rhs;
  r.satisfied = r.residual == Rational(0);
  return r;
}

}  // namespace hsw::lattice
