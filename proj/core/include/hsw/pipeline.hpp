#pragma once

// Config-driven orchestration: lattice report, data synthesis on the flat
// base, continuity solve and verification of the four system residuals.
// Config errors throw std::invalid_argument; failed feasibility or residual
// checks throw FeasibilityError.

#include "hsw/chern_curvature.hpp"
#include "hsw/fibered_form.hpp"
#include "hsw/fuyau_solver.hpp"
#include "hsw/picard_lattice.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace hsw::pipeline {

using nlohmann::json;

struct LatticeSection {
  std::string name = "X";
  Rational h_self{1};
  std::vector<int> weights;  // optional: h_self from a weighted complete intersection
  std::vector<int> degrees;
  int num_A1 = 0;
  int b2_orb = 22;
  int k_blown = 0;
  lattice::BundleTopologyData bundle;
  Rational alpha_prime{0};
  Rational q1{0};
  Rational q2{0};
  std::vector<Rational> alpha_grid;
};

struct GeometrySection {
  int n = 16;
  std::array<int, 3> omega1{};
  std::array<int, 3> omega2{};
  std::vector<std::array<int, 3>> charges;  // one ASD class per line-bundle summand
  double alpha_prime = 0.0;
  int sign_rho = -1;
};

struct Mode {
  double amplitude = 0.0;
  std::array<int, 4> k{};
  bool sine = false;
};

struct ManufacturedSection {
  int n = 16;
  double alpha_prime = 0.0;
  int sign_rho = -1;
  std::vector<Mode> modes;
  // rho = i sum h_kl dz_k ^ dzbar_l, h Hermitian
  double h00 = 0.0;
  Complex h01 = 0.0;
  double h11 = 0.0;
  std::array<int, 3> omega1{};
  std::array<int, 3> omega2{};
};

struct Tolerances {
  double hym = 1e-8;
  double anomaly = 1e-6;
  double conformally_balanced = 1e-8;
  double integrability = 1e-10;
};

struct RunConfig {
  std::string source = "geometry";  // geometry | manufactured
  std::optional<LatticeSection> lattice;
  std::optional<GeometrySection> geometry;
  std::optional<ManufacturedSection> manufactured;
  SolverParams solver;
  bool a_norm_given = false;
  Tolerances tolerances;
  std::filesystem::path output = "out";

  /// Validates every section; unknown keys are rejected.
  static RunConfig parse(const json& j);
  static RunConfig load(const std::filesystem::path& path);
};

struct Synthesis {
  bool geometric = false;
  EquationData data;
  AnsatzData ansatz;
  std::optional<CurvatureMatrixField> bundle_curvature;
  std::optional<ScalarField> u_star;
  BaseForm rho_L;                   // geometric rho before the 1/2
  lattice::IntegrabilityReport integrability;  // flat base: euler = 0
  double mu_integral = 0.0;         // before removing round-off
  double mu_scale = 0.0;            // integral of the absolute parts
  double A_norm = 0.0;
};

/// Physical conventions echoed into every report.
json conventions(const RunConfig& cfg);

/// Lattice classes for the line-bundle charges: c1^2 and c2 from the ASD
/// self-intersection (n . n') = -2 sum n_a n'_a.
lattice::BundleTopologyData bundle_topology(const std::vector<std::array<int, 3>>& charges);
/// Q = -2 |n|^2 for an integral ASD class.
Rational asd_self_intersection(const std::array<int, 3>& n);

/// Builds the equation data. Throws FeasibilityError "integrability violated"
/// when the integral of mu is not zero to the configured tolerance.
Synthesis synthesize(const RunConfig& cfg);

json cmd_lattice(const RunConfig& cfg, const std::filesystem::path& out);
json cmd_synthesize(const RunConfig& cfg, const std::filesystem::path& out);
/// Writes u.bin, trace.csv, residual_spectrum.csv and solve_summary.json. On
/// solver failure the summary records the error and the exception propagates.
json cmd_solve(const RunConfig& cfg, const std::filesystem::path& out);
/// Returns the report; report["pass"] is false if any residual fails.
json cmd_verify(const RunConfig& cfg, const std::filesystem::path& out, const std::filesystem::path& solution);

/// Writes a JSON document atomically with a fixed layout.
void write_json(const std::filesystem::path& path, const json& j);

}  // namespace hsw::pipeline
