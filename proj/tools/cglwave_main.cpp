// cglwave CLI: simulate | compare | sweep | verify-semigroup | diagnostics
// Every subcommand reads the same key = value config document; the subcommand
// name selects the experiment and --seed/--out override the document.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "cglwave/cglwave.hpp"

namespace {

struct CliOptions {
  std::string config_path;
  std::string out_dir;
  long long seed = -1;
  bool quiet = false;
};

int run_subcommand(cglwave::Experiment exp, const CliOptions& opt) {
  using namespace cglwave;
  std::string text;
  if (!opt.config_path.empty()) {
    std::ifstream in(opt.config_path);
    if (!in) {
      std::cerr << "error: cannot open config file '" << opt.config_path
                << "'\n";
      return kExitConfig;
    }
    std::stringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  }

  try {
    RunConfig rc = parse_config(text, exp);
    rc.experiment = exp;
    if (opt.seed >= 0) rc.seed = static_cast<std::uint64_t>(opt.seed);
    if (!opt.out_dir.empty()) rc.output_dir = opt.out_dir;
    // re-validate constraints that depend on the experiment choice
    if (rc.experiment == Experiment::verify_semigroup &&
        rc.kappa >= kappa0())
      throw config_error(
          "verify-semigroup requires kappa < kappa0 = sqrt(8/9)");
    if (!opt.quiet) {
      std::cout << "# effective configuration\n"
                << effective_config_text(rc) << "\n";
    }
    RunResult res = run(rc, opt.quiet);
    if (res.exit_code != kExitOk)
      std::cerr << "run finished with status " << res.exit_code << ": "
                << res.message << "\n";
    return res.exit_code;
  } catch (const config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const vanishing_risk& e) {
    std::cerr << "vanishing risk: " << e.what() << " (min |psi| = "
              << e.min_abs_psi << " at flat index " << e.grid_index << ")\n";
    return kExitRegime;
  } catch (const regime_violation& e) {
    std::cerr << "regime violation: " << e.what() << "\n";
    return kExitRegime;
  } catch (const numerical_instability& e) {
    std::cerr << "numerical instability: " << e.what() << "\n";
    return kExitInstability;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pseudospectral simulator and verification harness for the "
               "complex Ginzburg-Landau equation with low dissipation"};
  app.require_subcommand(1);

  CliOptions opt;
  const std::vector<std::pair<std::string, cglwave::Experiment>> cmds = {
      {"simulate", cglwave::Experiment::simulate},
      {"compare", cglwave::Experiment::compare},
      {"sweep", cglwave::Experiment::sweep},
      {"verify-semigroup", cglwave::Experiment::verify_semigroup},
      {"diagnostics", cglwave::Experiment::diagnostics}};

  for (const auto& [name, exp] : cmds) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", opt.config_path, "configuration file");
    sub->add_option("--out", opt.out_dir, "output directory override");
    sub->add_option("--seed", opt.seed, "seed override");
    sub->add_flag("--quiet", opt.quiet, "suppress progress output");
    cglwave::Experiment e = exp;
    sub->callback([&opt, e]() { std::exit(run_subcommand(e, opt)); });
  }

  CLI11_PARSE(app, argc, argv);
  return 0;
}
