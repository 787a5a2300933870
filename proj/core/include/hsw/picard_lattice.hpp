#pragma once

// Exact intersection arithmetic on the Picard lattice of a K3 orbifold blown
// up at A1 points. The lattice is generated by the pulled-back ample class H
// and the exceptional curves E_1..E_k with Gram matrix diag(H.H, -2, ..., -2).
// Everything here is exact rational arithmetic.

#include "hsw/rational.hpp"

#include <span>
#include <string>
#include <vector>

namespace hsw::lattice {

struct OrbifoldSurface {
  std::string name;
  int b2_orb = 22;   // rank of H^2(X, Q)
  int num_A1 = 0;    // isolated A1 singularities
  Rational h_self{1};  // H.H of the ample divisor

  /// K3 orbifold with only A1 points: b2 = 22 - num_A1.
  static OrbifoldSurface k3(std::string name, int num_A1, Rational h_self);

  /// Throws std::invalid_argument unless h_self > 0, b2_orb > 0, num_A1 >= 0.
  void validate() const;
  bool b2_consistent() const { return b2_orb == 22 - num_A1; }
};

class BlowupLattice {
 public:
  BlowupLattice(OrbifoldSurface base, int k_blown);

  const OrbifoldSurface& base() const { return base_; }
  int k_blown() const { return k_blown_; }
  std::size_t rank() const { return static_cast<std::size_t>(k_blown_) + 1; }
  Rational gram(std::size_t i, std::size_t j) const;

 private:
  OrbifoldSurface base_;
  int k_blown_;
};

/// Coefficients over {H, E_1, ..., E_k}, H first.
class DivisorClass {
 public:
  DivisorClass() = default;
  explicit DivisorClass(std::vector<Rational> coeffs) : coeffs_(std::move(coeffs)) {}

  static DivisorClass zero(std::size_t rank) { return DivisorClass(std::vector<Rational>(rank)); }
  static DivisorClass hyperplane(std::size_t rank);
  /// E_i, 1-based as in the literature.
  static DivisorClass exceptional(std::size_t i, std::size_t rank);

  std::size_t size() const { return coeffs_.size(); }
  const Rational& operator[](std::size_t i) const { return coeffs_[i]; }
  Rational& operator[](std::size_t i) { return coeffs_[i]; }
  const std::vector<Rational>& coeffs() const { return coeffs_; }

  DivisorClass& operator+=(const DivisorClass& other);
  DivisorClass& operator-=(const DivisorClass& other);
  DivisorClass& operator*=(const Rational& s);

  friend DivisorClass operator+(DivisorClass a, const DivisorClass& b) { return a += b; }
  friend DivisorClass operator-(DivisorClass a, const DivisorClass& b) { return a -= b; }
  friend DivisorClass operator*(const Rational& s, DivisorClass a) { return a *= s; }
  friend bool operator==(const DivisorClass&, const DivisorClass&) = default;

  std::string to_string() const;

 private:
  std::vector<Rational> coeffs_;
};

struct BundleTopologyData {
  int rank = 1;
  Rational c1_sq{0};
  Rational c2{0};
  bool degree_zero = true;
  bool stable = true;  // assumption flag, never verified here
};

struct IntegrabilityReport {
  Rational alpha_prime;
  int euler = 0;
  Rational lhs;       // alpha' (e - (c2 - c1^2/2))
  Rational rhs;       // -(Q1 + Q2)
  Rational residual;  // lhs - rhs
  bool satisfied = false;
};

/// D1^T . Gram . D2. Throws std::invalid_argument on a dimension mismatch.
Rational intersect(const DivisorClass& d1, const DivisorClass& d2, const BlowupLattice& lattice);

/// (prod degrees) / (prod weights): H.H of the hyperplane class of a
/// quasi-smooth complete intersection in weighted projective space.
Rational weighted_ci_h_self(std::span<const int> weights, std::span<const int> degrees);

/// Nakai-Moishezon test restricted to the curves that can fail it on the
/// blow-up: L = nH - sum a_i E_i with n > 0, a_i > 0, L.L > 0 and L.E_i > 0.
/// Pulled-back curves are covered by ampleness of H.
bool nakai_positive(const DivisorClass& c, const BlowupLattice& lattice);

struct TracelessDivisor {
  DivisorClass divisor;  // H - m E_1
  DivisorClass omega;    // n H - E_1 - ... - E_k
  long n = 0;
  long m = 0;
};

/// Smallest positive (n, m) with n H.H = 2m and omega Nakai-positive.
TracelessDivisor traceless_divisor(const BlowupLattice& lattice);

struct CormainPair {
  DivisorClass d1;     // H - m E_1 - E_2
  DivisorClass d2;     // H - E_1 - m E_2
  DivisorClass omega;  // n H - E_1 - ... - E_k
  long n = 0;
  long m = 0;
};

/// Smallest (n, m), m >= 2, with n H.H = 2m + 2 and omega Nakai-positive.
/// m >= 2 keeps D1 and D2 independent (the E-minor is m^2 - 1).
CormainPair cormain_pair(const BlowupLattice& lattice);

/// e = 24 - num_A1 for a K3 orbifold with isolated A1 points.
int orbifold_euler(int num_A1);

int seifert5_copies(int b2_orb);     // b2 - 1
std::string classify_seifert5(int b2_orb);  // "#_k(S2xS3)"
int t2_total_rank(int b2_orb);       // b2 - 2
std::string classify_t2_total(int b2_orb);  // "#_r(S2xS4)#_{r+1}(S3xS3)"

/// Lattice side of the integrability condition with curvature classes
/// normalized as 2 pi times integral classes, so the 1/(4 pi^2) factor cancels
/// and the check is lhs == -(Q1 + Q2) in intersection numbers.
IntegrabilityReport integrability_check(const Rational& alpha_prime, int euler,
                                        const BundleTopologyData& bundle, const Rational& q1,
                                        const Rational& q2);

}  // namespace hsw::lattice
