// hsw: lattice | synthesize | solve | verify
// Exit codes: 0 pass, 2 residual or feasibility failure, 1 usage error.

#include "CLI11.hpp"

#include "hsw/errors.hpp"
#include "hsw/pipeline.hpp"

#include <filesystem>
#include <iostream>

namespace fs = std::filesystem;
using namespace hsw;

namespace {

struct Options {
  std::string config;
  std::string out;
  std::string solution;
};

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--config", o.config, "JSON run configuration")->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", o.out, "output directory (default: config \"output\")");
}

fs::path out_dir(const Options& o, const pipeline::RunConfig& cfg) {
  const fs::path dir = o.out.empty() ? cfg.output : fs::path(o.out);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Flat-base Hull-Strominger pipeline"};
  app.require_subcommand(1);
  Options o;
  auto* lattice = app.add_subcommand("lattice", "Picard lattice report");
  auto* synth = app.add_subcommand("synthesize", "Build equation data from the config");
  auto* solve = app.add_subcommand("solve", "Continuity-method solve");
  auto* verify = app.add_subcommand("verify", "Evaluate the four system residuals");
  for (auto* c : {lattice, synth, solve, verify}) add_common(c, o);
  verify->add_option("--solution", o.solution, "solution field (default: <out>/u.bin)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    const auto cfg = pipeline::RunConfig::load(o.config);
    const fs::path out = out_dir(o, cfg);
    if (lattice->parsed()) {
      const auto r = pipeline::cmd_lattice(cfg, out);
      std::cout << "lattice: b2_orb " << r["surface"]["b2_orb"] << ", euler " << r["euler"]["value"]
                << ", integrability " << (r["integrability"]["satisfied"].get<bool>() ? "satisfied" : "violated")
                << "\n";
    } else if (synth->parsed()) {
      const auto r = pipeline::cmd_synthesize(cfg, out);
      std::cout << "synthesize: ok, max |mu'| " << r["mu"]["max_abs"] << "\n";
    } else if (solve->parsed()) {
      const auto r = pipeline::cmd_solve(cfg, out);
      std::cout << "solve: residual " << r["residual_norm"] << " after " << r["newton_iterations"]
                << " Newton iterations\n";
    } else if (verify->parsed()) {
      const fs::path sol = o.solution.empty() ? out / "u.bin" : fs::path(o.solution);
      const auto r = pipeline::cmd_verify(cfg, out, sol);
      const bool pass = r["pass"].get<bool>();
      std::cout << "verify: " << (pass ? "pass" : "FAIL") << "\n";
      return pass ? 0 : 2;
    }
  } catch (const FeasibilityError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
