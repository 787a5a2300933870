#include "hsw/pipeline.hpp"

#include "hsw/errors.hpp"
#include "hsw/field_io.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace hsw::pipeline {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr const char* kSkipped = "synthetic data — skipped";

void reject_unknown(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw std::invalid_argument(where + " must be an object");
  const std::set<std::string> keys(allowed.begin(), allowed.end());
  for (const auto& [key, value] : j.items()) {
    if (!keys.contains(key)) throw std::invalid_argument("unknown key \"" + key + "\" in " + where);
  }
}

Rational rational_from(const json& j, const std::string& what) {
  if (j.is_string()) return parse_rational(j.get<std::string>());
  if (j.is_number_integer()) return Rational(BigInt(j.get<long long>()));
  throw std::invalid_argument(what + " must be an integer or a \"p/q\" string");
}

int int_from(const json& j, const std::string& what) {
  if (!j.is_number_integer()) throw std::invalid_argument(what + " must be an integer");
  return j.get<int>();
}

double double_from(const json& j, const std::string& what) {
  if (!j.is_number()) throw std::invalid_argument(what + " must be a number");
  return j.get<double>();
}

std::array<int, 3> class_from(const json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 3) throw std::invalid_argument(what + " must be a list of 3 integers");
  return {int_from(j[0], what), int_from(j[1], what), int_from(j[2], what)};
}

int sign_from(const json& j) {
  const int s = int_from(j, "sign_rho");
  if (s != 1 && s != -1) throw std::invalid_argument("sign_rho must be +1 or -1");
  return s;
}

LatticeSection parse_lattice(const json& j) {
  reject_unknown(j, "lattice", {"name", "h_self", "weights", "degrees", "num_A1", "b2_orb", "k_blown", "bundle",
                                "alpha_prime", "Q1", "Q2", "alpha_grid"});
  LatticeSection s;
  if (j.contains("name")) s.name = j.at("name").get<std::string>();
  if (j.contains("weights") != j.contains("degrees")) {
    throw std::invalid_argument("lattice.weights and lattice.degrees go together");
  }
  if (j.contains("weights")) {
    s.weights = j.at("weights").get<std::vector<int>>();
    s.degrees = j.at("degrees").get<std::vector<int>>();
    s.h_self = lattice::weighted_ci_h_self(s.weights, s.degrees);
    if (j.contains("h_self") && rational_from(j.at("h_self"), "h_self") != s.h_self) {
      throw std::invalid_argument("lattice.h_self disagrees with weights/degrees");
    }
  } else if (j.contains("h_self")) {
    s.h_self = rational_from(j.at("h_self"), "lattice.h_self");
  } else {
    throw std::invalid_argument("lattice needs h_self or weights/degrees");
  }
  if (j.contains("num_A1")) s.num_A1 = int_from(j.at("num_A1"), "lattice.num_A1");
  s.b2_orb = j.contains("b2_orb") ? int_from(j.at("b2_orb"), "lattice.b2_orb") : 22 - s.num_A1;
  if (j.contains("k_blown")) s.k_blown = int_from(j.at("k_blown"), "lattice.k_blown");
  if (s.k_blown < 0 || s.k_blown > s.num_A1) throw std::invalid_argument("lattice.k_blown must lie in [0, num_A1]");
  if (j.contains("bundle")) {
    const auto& b = j.at("bundle");
    reject_unknown(b, "lattice.bundle", {"rank", "c1_sq", "c2"});
    if (b.contains("rank")) s.bundle.rank = int_from(b.at("rank"), "lattice.bundle.rank");
    if (b.contains("c1_sq")) s.bundle.c1_sq = rational_from(b.at("c1_sq"), "lattice.bundle.c1_sq");
    if (b.contains("c2")) s.bundle.c2 = rational_from(b.at("c2"), "lattice.bundle.c2");
  }
  if (j.contains("alpha_prime")) s.alpha_prime = rational_from(j.at("alpha_prime"), "lattice.alpha_prime");
  if (j.contains("Q1")) s.q1 = rational_from(j.at("Q1"), "lattice.Q1");
  if (j.contains("Q2")) s.q2 = rational_from(j.at("Q2"), "lattice.Q2");
  if (j.contains("alpha_grid")) {
    for (const auto& a : j.at("alpha_grid")) s.alpha_grid.push_back(rational_from(a, "lattice.alpha_grid"));
  }
  lattice::OrbifoldSurface surf{s.name, s.b2_orb, s.num_A1, s.h_self};
  surf.validate();
  return s;
}

GeometrySection parse_geometry(const json& j) {
  reject_unknown(j, "geometry", {"N", "omega1", "omega2", "bundle", "alpha_prime", "sign_rho"});
  GeometrySection s;
  if (j.contains("N")) s.n = int_from(j.at("N"), "geometry.N");
  if (j.contains("omega1")) s.omega1 = class_from(j.at("omega1"), "geometry.omega1");
  if (j.contains("omega2")) s.omega2 = class_from(j.at("omega2"), "geometry.omega2");
  if (j.contains("bundle")) {
    if (!j.at("bundle").is_array()) throw std::invalid_argument("geometry.bundle must be a list of charges");
    for (const auto& c : j.at("bundle")) s.charges.push_back(class_from(c, "geometry.bundle charge"));
  }
  if (j.contains("alpha_prime")) s.alpha_prime = double_from(j.at("alpha_prime"), "geometry.alpha_prime");
  if (j.contains("sign_rho")) s.sign_rho = sign_from(j.at("sign_rho"));
  PeriodicGrid check(s.n);
  return s;
}

ManufacturedSection parse_manufactured(const json& j) {
  reject_unknown(j, "manufactured", {"N", "alpha_prime", "sign_rho", "modes", "rho", "omega1", "omega2"});
  ManufacturedSection s;
  if (j.contains("N")) s.n = int_from(j.at("N"), "manufactured.N");
  if (j.contains("alpha_prime")) s.alpha_prime = double_from(j.at("alpha_prime"), "manufactured.alpha_prime");
  if (j.contains("sign_rho")) s.sign_rho = sign_from(j.at("sign_rho"));
  if (j.contains("modes")) {
    for (const auto& m : j.at("modes")) {
      reject_unknown(m, "manufactured.modes entry", {"amplitude", "k", "sine"});
      Mode mode;
      mode.amplitude = double_from(m.at("amplitude"), "mode amplitude");
      const auto& k = m.at("k");
      if (!k.is_array() || k.size() != 4) throw std::invalid_argument("mode k must be a list of 4 integers");
      for (int a = 0; a < 4; ++a) mode.k[a] = int_from(k[a], "mode k");
      if (m.contains("sine")) mode.sine = m.at("sine").get<bool>();
      s.modes.push_back(mode);
    }
  }
  if (j.contains("rho")) {
    const auto& r = j.at("rho");
    reject_unknown(r, "manufactured.rho", {"h00", "h01", "h11"});
    if (r.contains("h00")) s.h00 = double_from(r.at("h00"), "rho.h00");
    if (r.contains("h11")) s.h11 = double_from(r.at("h11"), "rho.h11");
    if (r.contains("h01")) {
      const auto& h = r.at("h01");
      if (!h.is_array() || h.size() != 2) throw std::invalid_argument("rho.h01 must be [re, im]");
      s.h01 = Complex(double_from(h[0], "rho.h01"), double_from(h[1], "rho.h01"));
    }
  }
  if (j.contains("omega1")) s.omega1 = class_from(j.at("omega1"), "manufactured.omega1");
  if (j.contains("omega2")) s.omega2 = class_from(j.at("omega2"), "manufactured.omega2");
  PeriodicGrid check(s.n);
  return s;
}

void parse_solver(const json& j, RunConfig& cfg) {
  reject_unknown(j, "solver", {"delta", "tau", "gamma", "A_norm", "t_steps", "newton_tol", "max_newton",
                               "linear_tol", "linear_max_iter"});
  auto& p = cfg.solver;
  if (j.contains("delta")) p.delta = double_from(j.at("delta"), "solver.delta");
  if (j.contains("tau") && j.contains("gamma") &&
      double_from(j.at("tau"), "solver.tau") != double_from(j.at("gamma"), "solver.gamma")) {
    throw std::invalid_argument("solver.tau and solver.gamma are aliases and must agree");
  }
  if (j.contains("tau")) p.tau = double_from(j.at("tau"), "solver.tau");
  if (j.contains("gamma")) p.tau = double_from(j.at("gamma"), "solver.gamma");
  if (j.contains("A_norm")) {
    p.A_norm = double_from(j.at("A_norm"), "solver.A_norm");
    cfg.a_norm_given = true;
  }
  if (j.contains("t_steps")) p.t_steps = int_from(j.at("t_steps"), "solver.t_steps");
  if (j.contains("newton_tol")) p.newton_tol = double_from(j.at("newton_tol"), "solver.newton_tol");
  if (j.contains("max_newton")) p.max_newton = int_from(j.at("max_newton"), "solver.max_newton");
  if (j.contains("linear_tol")) p.linear_tol = double_from(j.at("linear_tol"), "solver.linear_tol");
  if (j.contains("linear_max_iter")) p.linear_max_iter = int_from(j.at("linear_max_iter"), "solver.linear_max_iter");
  SolverParams probe = p;
  if (!cfg.a_norm_given) probe.A_norm = 1.0;
  probe.validate();
}

void parse_tolerances(const json& j, Tolerances& t) {
  reject_unknown(j, "tolerances", {"hym", "anomaly", "conformally_balanced", "integrability"});
  if (j.contains("hym")) t.hym = double_from(j.at("hym"), "tolerances.hym");
  if (j.contains("anomaly")) t.anomaly = double_from(j.at("anomaly"), "tolerances.anomaly");
  if (j.contains("conformally_balanced")) {
    t.conformally_balanced = double_from(j.at("conformally_balanced"), "tolerances.conformally_balanced");
  }
  if (j.contains("integrability")) t.integrability = double_from(j.at("integrability"), "tolerances.integrability");
}

std::string seifert_label(int k) { return "#_" + std::to_string(k) + "(S2xS3)"; }

std::string t2_label(int r) {
  return "#_" + std::to_string(r) + "(S2xS4)#_" + std::to_string(r + 1) + "(S3xS3)";
}

json integrability_json(const lattice::IntegrabilityReport& r) {
  return {{"alpha_prime", to_string(r.alpha_prime)},
          {"euler", r.euler},
          {"lhs", to_string(r.lhs)},
          {"rhs", to_string(r.rhs)},
          {"residual", to_string(r.residual)},
          {"satisfied", r.satisfied}};
}

std::array<double, 3> scaled_class(const std::array<int, 3>& n) {
  // 2 pi times the integral class dual to n: the integral class of e_a is
  // e_a / (2 pi)^2.
  return {n[0] / kTwoPi, n[1] / kTwoPi, n[2] / kTwoPi};
}

BaseForm w_form(const PeriodicGrid& g, const std::array<int, 3>& o1, const std::array<int, 3>& o2) {
  return asd_form(g, scaled_class(o1)) + Complex(0.0, 1.0) * asd_form(g, scaled_class(o2));
}

ScalarField band_limited(const PeriodicGrid& g, const std::vector<Mode>& modes) {
  return ScalarField::sample(g, [&](double x1, double x2, double x3, double x4) {
    double s = 0.0;
    for (const auto& m : modes) {
      const double ph = m.k[0] * x1 + m.k[1] * x2 + m.k[2] * x3 + m.k[3] * x4;
      s += m.amplitude * (m.sine ? std::sin(ph) : std::cos(ph));
    }
    return Complex(s);
  });
}

std::string format_number(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

double default_a_norm(const SolverParams& p) {
  // Constant u0 with e^{-2 u0} = delta / 2, inside the admissible set.
  const double u0 = std::max(0.0, 0.5 * std::log(2.0 / p.delta));
  return std::pow(kTwoPi, 4) * std::exp(u0);
}

json residual_entry(double value, double tol) {
  return {{"value", value}, {"tolerance", tol}, {"pass", value <= tol}};
}

std::string trace_csv(const std::vector<TracePoint>& trace) {
  std::ostringstream os;
  os.precision(17);
  os << "t,residual,iterations\n";
  for (const auto& p : trace) os << p.t << ',' << p.residual << ',' << p.iterations << '\n';
  return os.str();
}

// Root-mean-square Fourier amplitude per integer shell round(|k|).
std::string spectrum_csv(const ScalarField& r) {
  const auto& g = r.grid();
  std::vector<Complex> c(r.samples().begin(), r.samples().end());
  fft::forward(g, c);
  std::map<int, std::pair<double, int>> shells;
  for (std::size_t p = 0; p < g.size(); ++p) {
    const auto idx = g.unflatten(p);
    double sq = 0.0;
    for (int a = 0; a < 4; ++a) sq += std::pow(g.wavenumber(idx[a]), 2);
    auto& s = shells[static_cast<int>(std::lround(std::sqrt(sq)))];
    s.first += std::norm(c[p] / static_cast<double>(g.size()));
    s.second += 1;
  }
  std::ostringstream os;
  os.precision(17);
  os << "shell,rms_amplitude,modes\n";
  for (const auto& [shell, acc] : shells) {
    os << shell << ',' << std::sqrt(acc.first / acc.second) << ',' << acc.second << '\n';
  }
  return os.str();
}

}  // namespace

RunConfig RunConfig::parse(const json& j) {
  reject_unknown(j, "config", {"source", "lattice", "geometry", "manufactured", "solver", "tolerances", "output"});
  RunConfig cfg;
  if (j.contains("source")) cfg.source = j.at("source").get<std::string>();
  if (cfg.source != "geometry" && cfg.source != "manufactured") {
    throw std::invalid_argument("source must be \"geometry\" or \"manufactured\"");
  }
  if (j.contains("lattice")) cfg.lattice = parse_lattice(j.at("lattice"));
  if (j.contains("geometry")) cfg.geometry = parse_geometry(j.at("geometry"));
  if (j.contains("manufactured")) cfg.manufactured = parse_manufactured(j.at("manufactured"));
  if (j.contains("solver")) parse_solver(j.at("solver"), cfg);
  if (j.contains("tolerances")) parse_tolerances(j.at("tolerances"), cfg.tolerances);
  if (j.contains("output")) cfg.output = j.at("output").get<std::string>();
  return cfg;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("config is not valid JSON: " + std::string(e.what()));
  }
  try {
    return parse(j);
  } catch (const json::exception& e) {
    throw std::invalid_argument("config: " + std::string(e.what()));
  }
}

json conventions(const RunConfig& cfg) {
  int sign = -1;
  if (cfg.source == "geometry" && cfg.geometry) sign = cfg.geometry->sign_rho;
  if (cfg.source == "manufactured" && cfg.manufactured) sign = cfg.manufactured->sign_rho;
  return {{"torus", "T^4 = (R / 2 pi Z)^4, z1 = x1 + i x2, z2 = x3 + i x4"},
          {"period", "2*pi"},
          {"kahler_form", "omega_B = (i/2)(dz1^dzbar1 + dz2^dzbar2)"},
          {"volume", "omega_B^2/2 = dx1^dx2^dx3^dx4, total (2 pi)^4"},
          {"class_scaling", "omega_i = 2 pi x integral ASD class, Q = -2|n|^2"},
          {"asd_basis", "dx12 - dx34, dx13 + dx24, dx14 - dx23"},
          {"sign_rho", sign},
          {"rho_equation", "rho = rho_L / 2, rho_L = -i tr(dbar A ^ d A^* G_B^{-1})"},
          {"integrability", "integral of mu' vol = -2 pi^2 (lhs - rhs), flat base euler = 0"},
          {"psi_norm", "||psi||_{omega_u} = e^{-u}"}};
}

Rational asd_self_intersection(const std::array<int, 3>& n) {
  return Rational(BigInt(-2 * (n[0] * n[0] + n[1] * n[1] + n[2] * n[2])));
}

lattice::BundleTopologyData bundle_topology(const std::vector<std::array<int, 3>>& charges) {
  lattice::BundleTopologyData b;
  b.rank = static_cast<int>(charges.size());
  std::array<int, 3> total{};
  for (const auto& c : charges)
    for (int a = 0; a < 3; ++a) total[a] += c[a];
  b.c1_sq = asd_self_intersection(total);
  long c2 = 0;
  for (std::size_t i = 0; i < charges.size(); ++i) {
    for (std::size_t j = i + 1; j < charges.size(); ++j) {
      long dot = 0;
      for (int a = 0; a < 3; ++a) dot += static_cast<long>(charges[i][a]) * charges[j][a];
      c2 += -2 * dot;
    }
  }
  b.c2 = Rational(BigInt(c2));
  b.degree_zero = true;  // ASD classes are primitive, so every summand has degree 0
  return b;
}

Synthesis synthesize(const RunConfig& cfg) {
  Synthesis s;
  if (cfg.source == "manufactured") {
    if (!cfg.manufactured) throw std::invalid_argument("source \"manufactured\" needs a manufactured section");
    const auto& m = *cfg.manufactured;
    const PeriodicGrid g(m.n);
    const Complex I(0.0, 1.0);
    const BaseForm rho = BaseForm::constant(g, 2,
                                            {{kDz1 | kDzbar1, I * m.h00},
                                             {kDz1 | kDzbar2, I * m.h01},
                                             {kDz2 | kDzbar1, I * std::conj(m.h01)},
                                             {kDz2 | kDzbar2, I * m.h11}});
    s.u_star = band_limited(g, m.modes);
    s.data = manufacture(*s.u_star, rho, m.alpha_prime, m.sign_rho);
    s.ansatz = AnsatzData::make(w_form(g, m.omega1, m.omega2));
    s.A_norm = cfg.a_norm_given ? cfg.solver.A_norm : exp_integral(*s.u_star);
    s.mu_integral = s.data.mu.integral().real();
    return s;
  }

  if (!cfg.geometry) throw std::invalid_argument("source \"geometry\" needs a geometry section");
  const auto& geo = *cfg.geometry;
  const PeriodicGrid g(geo.n);
  s.geometric = true;
  const BaseForm W = w_form(g, geo.omega1, geo.omega2);
  s.ansatz = AnsatzData::make(W);
  const auto check = s.ansatz.validate();
  if (!check.primitive || !check.anti_self_dual) throw std::invalid_argument("synthesized W is not primitive ASD");

  // Bundle: diagonal sum of line bundles with constant ASD curvature i omega_j.
  const int rank = static_cast<int>(geo.charges.size());
  CurvatureMatrixField F(g, std::max(rank, 1));
  for (int i = 0; i < F.rank(); ++i)
    for (int j = 0; j < F.rank(); ++j) F.entry(i, j) = BaseForm(g, 2);
  for (int j = 0; j < rank; ++j) F.entry(j, j) = Complex(0.0, 1.0) * asd_form(g, scaled_class(geo.charges[j]));
  s.bundle_curvature = F;

  // rho from the potential of the connection form on the flat base (G_B = I).
  const auto A = PotentialMatrix::from_curvature(W);
  s.rho_L = rho_from_potential(A, HermitianMatrixField::identity(g, 2));

  // mu' = (1/2)||d theta||^2 - (alpha'/4)(tr R_B^2 - tr F^2), R_B = 0 here.
  const ScalarField dtheta_sq = -top_density(wedge(W, conj(W)));
  const ScalarField trff = top_density(trace_rr(F));
  ScalarField mu = 0.5 * dtheta_sq + (0.25 * geo.alpha_prime) * trff;
  s.mu_integral = mu.integral().real();
  s.mu_scale = std::abs((0.5 * dtheta_sq).integral().real()) + std::abs((0.25 * geo.alpha_prime * trff).integral().real());

  const Rational q1 = asd_self_intersection(geo.omega1);
  const Rational q2 = asd_self_intersection(geo.omega2);
  s.integrability = lattice::integrability_check(from_double(geo.alpha_prime), 0, bundle_topology(geo.charges), q1, q2);

  if (std::abs(s.mu_integral) > cfg.tolerances.integrability * std::max(s.mu_scale, 1e-300)) {
    throw FeasibilityError("integrability violated: lhs = " + to_string(s.integrability.lhs) +
                           ", rhs = " + to_string(s.integrability.rhs) +
                           ", lhs - rhs = " + to_string(s.integrability.residual) +
                           ", integral of mu' = " + format_number(s.mu_integral));
  }
  mu = mu.real_part();
  mu += -mu.mean();  // round-off only, the check above passed
  const double floor = 1e-12 *
                      (0.5 * dtheta_sq.max_abs() + std::abs(0.25 * geo.alpha_prime) * trff.max_abs());
  for (auto& v : mu.samples()) {
    if (std::abs(v.real()) <= floor) v = 0.0;
  }

  s.data.rho = Complex(0.5) * s.rho_L;
  s.data.mu = mu;
  s.data.alpha = geo.alpha_prime;
  s.data.sign_rho = geo.sign_rho;
  s.data.validate();
  s.A_norm = cfg.a_norm_given ? cfg.solver.A_norm : default_a_norm(cfg.solver);
  return s;
}

void write_json(const std::filesystem::path& path, const json& j) { io::write_atomic(path, j.dump(2) + "\n"); }

json cmd_lattice(const RunConfig& cfg, const std::filesystem::path& out) {
  if (!cfg.lattice) throw std::invalid_argument("lattice command needs a lattice section");
  const auto& L = *cfg.lattice;
  const lattice::OrbifoldSurface surf{L.name, L.b2_orb, L.num_A1, L.h_self};
  const lattice::BlowupLattice lat(surf, L.k_blown);
  const int euler = lattice::orbifold_euler(L.num_A1);
  const int b2_blown = L.b2_orb + L.k_blown;

  json r;
  r["conventions"] = conventions(cfg);
  json surface = {{"name", L.name},
                  {"h_self", to_string(L.h_self)},
                  {"num_A1", L.num_A1},
                  {"b2_orb", L.b2_orb},
                  {"b2_consistent", surf.b2_consistent()}};
  if (!L.weights.empty()) surface["h_self_source"] = {{"weights", L.weights}, {"degrees", L.degrees}};
  r["surface"] = surface;
  r["b2_chain"] = {{"b2_K3", 22},
                   {"num_A1", L.num_A1},
                   {"b2_orb", L.b2_orb},
                   {"expression", "22-" + std::to_string(L.num_A1) + "=" + std::to_string(22 - L.num_A1)},
                   {"k_blown", L.k_blown},
                   {"b2_blown", b2_blown}};
  r["euler"] = {{"value", euler}, {"expression", "24-" + std::to_string(L.num_A1) + "=" + std::to_string(euler)}};

  json divisors = json::object();
  if (L.k_blown >= 1) {
    const auto t = lattice::traceless_divisor(lat);
    divisors["traceless"] = {{"D", t.divisor.to_string()},
                             {"omega", t.omega.to_string()},
                             {"n", t.n},
                             {"m", t.m},
                             {"D.omega", to_string(lattice::intersect(t.divisor, t.omega, lat))},
                             {"omega.omega", to_string(lattice::intersect(t.omega, t.omega, lat))},
                             {"nakai_positive", lattice::nakai_positive(t.omega, lat)}};
  }
  if (L.k_blown >= 2) {
    const auto c = lattice::cormain_pair(lat);
    divisors["cormain_pair"] = {{"D1", c.d1.to_string()},
                                {"D2", c.d2.to_string()},
                                {"omega", c.omega.to_string()},
                                {"n", c.n},
                                {"m", c.m},
                                {"D1.omega", to_string(lattice::intersect(c.d1, c.omega, lat))},
                                {"D2.omega", to_string(lattice::intersect(c.d2, c.omega, lat))},
                                {"nakai_positive", lattice::nakai_positive(c.omega, lat)}};
  }
  r["divisors"] = divisors;

  r["labels"] = {{"b2", b2_blown},
                 {"seifert5", lattice::classify_seifert5(b2_blown)},
                 {"seifert5_copies", lattice::seifert5_copies(b2_blown)},
                 {"t2_total", lattice::classify_t2_total(b2_blown)},
                 {"t2_total_rank", lattice::t2_total_rank(b2_blown)}};

  // Published ranges from b2 arithmetic: b2 after blowing up j of the A1
  // points is b2_orb + j.
  json rows = json::array();
  for (int j = 0; j <= L.num_A1; ++j) {
    const int b2 = L.b2_orb + j;
    rows.push_back({{"blown_up", j},
                    {"b2", b2},
                    {"formula_seifert5", lattice::classify_seifert5(b2)},
                    {"formula_t2_total", lattice::classify_t2_total(b2)}});
  }
  const int k_lo = L.b2_orb, k_hi = L.b2_orb + L.num_A1;
  const int r_lo = L.b2_orb + std::min(1, L.num_A1), r_hi = L.b2_orb + L.num_A1;
  r["range_table"] = {{"rows", rows},
                      {"k_range", {k_lo, k_hi}},
                      {"k_endpoint_labels", {seifert_label(k_lo), seifert_label(k_hi)}},
                      {"r_range", {r_lo, r_hi}},
                      {"r_endpoint_labels", {t2_label(r_lo), t2_label(r_hi)}}};

  r["integrability"] = integrability_json(lattice::integrability_check(L.alpha_prime, euler, L.bundle, L.q1, L.q2));
  json budget = json::array();
  for (const auto& a : L.alpha_grid) {
    budget.push_back(integrability_json(lattice::integrability_check(a, euler, L.bundle, L.q1, L.q2)));
  }
  r["budget"] = budget;
  write_json(out / "lattice_report.json", r);
  return r;
}

json cmd_synthesize(const RunConfig& cfg, const std::filesystem::path& out) {
  json r;
  r["conventions"] = conventions(cfg);
  r["source"] = cfg.source;
  Synthesis s;
  try {
    s = synthesize(cfg);
  } catch (const FeasibilityError& e) {
    r["status"] = "failed";
    r["error"] = e.what();
    write_json(out / "synthesis_report.json", r);
    throw;
  }
  io::write_field(out / "mu.bin", s.data.mu);
  io::write_form(out / "rho.bin", s.data.rho.grid().n() > 0 ? s.data.rho : BaseForm(s.data.mu.grid(), 2));
  io::write_form(out / "W.bin", s.ansatz.W);
  if (s.u_star) io::write_field(out / "u_star.bin", *s.u_star);
  r["status"] = "ok";
  r["N"] = s.data.mu.grid().n();
  r["alpha_prime"] = s.data.alpha;
  r["sign_rho"] = s.data.sign_rho;
  r["A_norm"] = s.A_norm;
  r["mu"] = {{"integral", s.mu_integral}, {"max_abs", s.data.mu.max_abs()}};
  r["rho_max_abs"] = s.data.rho.grid().n() > 0 ? s.data.rho.max_abs() : 0.0;
  if (s.geometric) {
    r["integrability"] = integrability_json(s.integrability);
    r["integrability"]["analytic_integral_mu"] = s.mu_integral;
    r["integrability"]["analytic_over_minus_2pi2"] = s.mu_integral / (-2.0 * kPi * kPi);
  }
  write_json(out / "synthesis_report.json", r);
  return r;
}

json cmd_solve(const RunConfig& cfg, const std::filesystem::path& out) {
  const Synthesis s = synthesize(cfg);
  SolverParams p = cfg.solver;
  p.A_norm = s.A_norm;
  json r;
  r["conventions"] = conventions(cfg);
  r["source"] = cfg.source;
  r["params"] = {{"delta", p.delta},           {"tau", p.tau},
                 {"A_norm", p.A_norm},         {"t_steps", p.t_steps},
                 {"newton_tol", p.newton_tol}, {"max_newton", p.max_newton}};
  SolverState st;
  try {
    st = continuity_solve(s.data, p);
  } catch (const FeasibilityError& e) {
    r["status"] = "failed";
    r["error"] = e.what();
    write_json(out / "solve_summary.json", r);
    throw;
  }
  io::write_field(out / "u.bin", st.u);
  io::write_atomic(out / "trace.csv", trace_csv(st.trace));
  io::write_atomic(out / "residual_spectrum.csv", spectrum_csv(residual(st.u, s.data, 1.0)));
  r["status"] = "ok";
  r["t"] = st.t;
  r["residual_norm"] = st.residual_norm;
  r["newton_iterations"] = st.newton_iterations;
  r["in_upsilon"] = st.in_upsilon;
  r["omega_positive"] = st.omega_positive;
  r["exp_integral"] = exp_integral(st.u);
  double umin = st.u[0].real(), umax = umin;
  for (const auto& v : st.u.samples()) {
    umin = std::min(umin, v.real());
    umax = std::max(umax, v.real());
  }
  r["u_min"] = umin;
  r["u_max"] = umax;
  if (s.u_star) r["max_error_vs_u_star"] = (st.u - *s.u_star).max_abs();
  write_json(out / "solve_summary.json", r);
  return r;
}

json cmd_verify(const RunConfig& cfg, const std::filesystem::path& out, const std::filesystem::path& solution) {
  const Synthesis s = synthesize(cfg);
  const ScalarField u = io::read_field(solution);
  if (!(u.grid() == s.data.mu.grid())) throw std::invalid_argument("solution grid does not match the config");
  const auto& tol = cfg.tolerances;

  json r;
  r["conventions"] = conventions(cfg);
  r["source"] = cfg.source;
  json res;
  bool pass = true;

  if (s.geometric && s.bundle_curvature) {
    const auto [wedge_res, anti] = hym_residual(*s.bundle_curvature, u.exp() * s.ansatz.omega_B);
    res["hym_F02"] = residual_entry(anti, tol.hym);
    res["hym_trace"] = residual_entry(wedge_res, tol.hym);
    pass = pass && anti <= tol.hym && wedge_res <= tol.hym;
  } else {
    res["hym_F02"] = {{"status", kSkipped}};
    res["hym_trace"] = {{"status", kSkipped}};
  }

  const ScalarField anomaly = drop_null_modes(residual(u, s.data, 1.0));
  res["anomaly"] = residual_entry(anomaly.max_abs(), tol.anomaly);
  pass = pass && anomaly.max_abs() <= tol.anomaly;

  const auto structure = structure_residuals(u, s.ansatz);
  const double cb = structure.get("conformally_balanced").value;
  res["conformally_balanced"] = residual_entry(cb, tol.conformally_balanced);
  pass = pass && cb <= tol.conformally_balanced;
  r["residuals"] = res;

  if (s.geometric) {
    json integ = integrability_json(s.integrability);
    integ["analytic_integral_mu"] = s.mu_integral;
    r["integrability"] = integ;
    pass = pass && s.integrability.satisfied;
  }
  r["pass"] = pass;
  write_json(out / "verification_report.json", r);
  return r;
}

}  // namespace hsw::pipeline
