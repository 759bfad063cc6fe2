// Command-line front end: Monte-Carlo simulations of the test constructions,
// consistency sweeps, metric verification batches, and conditional
// independence benches. Exit codes: 0 ok, 2 config error, 3 invariant
// violation.

#include <fstream>
#include <iostream>

#include "CLI11.hpp"

#include "fptest/fptest.hpp"

namespace {

using namespace fptest;

void print_result(const SimResult& result, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << result.csv();
  } else {
    result.write(out_path);
    std::cout << "wrote " << out_path << " (+ provenance sidecar)\n";
  }
  for (const std::string& f : result.flags) std::cerr << "flag: " << f << "\n";
}

int run(int argc, char** argv) {
  CLI::App app{"finite-precision hypothesis testing bench"};
  app.require_subcommand(1);

  // simulate --config <file> [--seed n] [--out path]
  auto* sim = app.add_subcommand("simulate", "run a Monte-Carlo table from a JSON config");
  std::string cfg_path, sim_out;
  uint64_t sim_seed = 0;
  bool sim_seed_set = false, sim_out_set = false;
  sim->add_option("--config", cfg_path, "JSON config file")->required();
  auto* seed_opt = sim->add_option("--seed", sim_seed, "override the config seed");
  auto* out_opt = sim->add_option("--out", sim_out, "override the output CSV path");

  // sweep --pair <1..5> --test <name> --p <value> ...
  auto* sweep = app.add_subcommand("sweep", "consistency curve for a catalogue pair");
  int sweep_pair = 3;
  std::string sweep_test = "subbasis", sweep_p = "1/2", sweep_eps, sweep_out;
  double sweep_alpha = 0.05, sweep_gamma = 0.0, sweep_amp_eps = 0.1;
  std::vector<size_t> sweep_grid{10, 100, 1000, 10000};
  size_t sweep_reps = 2000, sweep_truncate = 0;
  uint64_t sweep_seed = 1;
  sweep->add_option("--pair", sweep_pair, "catalogue pair id (1..5)")->required();
  sweep->add_option("--test", sweep_test,
                    "constructor: subbasis|amplify|combine|clopen|fsigma|bl_separated");
  sweep->add_option("--p", sweep_p, "true Bernoulli parameter ('2/5', '0.3', or 'a+sqrt2' token "
                                    "as a,b e.g. '-1/2,1')");
  sweep->add_option("--pair-eps", sweep_eps, "separation of pair 5 (rational)");
  sweep->add_option("--alpha", sweep_alpha, "error budget");
  sweep->add_option("--gamma", sweep_gamma, "BL margin (0 = default)");
  sweep->add_option("--amp-eps", sweep_amp_eps, "amplification margin");
  sweep->add_option("--n", sweep_grid, "sample-size grid");
  sweep->add_option("--reps", sweep_reps, "replicates per grid point");
  sweep->add_option("--seed", sweep_seed, "RNG seed");
  sweep->add_option("--truncate", sweep_truncate, "cap on enumerated F-sigma pieces (0 = none)");
  sweep->add_option("--out", sweep_out, "output CSV path (stdout when omitted)");

  // blcheck --instances k --tol x
  auto* blc = app.add_subcommand("blcheck", "LP-vs-oracle and metric axiom batch");
  size_t bl_instances = 200;
  double bl_tol = 1e-9;
  uint64_t bl_seed = 2024;
  blc->add_option("--instances", bl_instances, "number of random instances");
  blc->add_option("--tol", bl_tol, "extra tolerance on each check");
  blc->add_option("--seed", bl_seed, "RNG seed");

  // ci --mode m --n k --eps x --gamma y
  auto* ci = app.add_subcommand("ci", "conditional independence bench");
  std::string ci_mode = "independent";
  CiBenchParams ci_params;
  ci->add_option("--mode", ci_mode, "independent|dependent|densify")->required();
  ci->add_option("--n", ci_params.n, "sample size");
  ci->add_option("--reps", ci_params.reps, "replicates");
  ci->add_option("--eps", ci_params.eps, "separation");
  ci->add_option("--gamma", ci_params.gamma, "margin (0 = eps/4)");
  ci->add_option("--seed", ci_params.seed, "RNG seed");
  ci->add_option("--fixtures", ci_params.fixtures, "fixture count for densify mode");

  // catalogue --list
  auto* cat = app.add_subcommand("catalogue", "describe the example catalogue");
  bool cat_list = false;
  cat->add_flag("--list", cat_list, "list the five pairs");

  CLI11_PARSE(app, argc, argv);

  if (sim->parsed()) {
    std::ifstream f(cfg_path);
    if (!f) throw ConfigError("cannot open config " + cfg_path);
    Json j;
    try {
      f >> j;
    } catch (const std::exception& e) {
      throw ConfigError(std::string("config parse failure: ") + e.what());
    }
    SimConfig cfg = SimConfig::from_json(j);
    sim_seed_set = seed_opt->count() > 0;
    sim_out_set = out_opt->count() > 0;
    if (sim_seed_set) cfg.seed = sim_seed;
    if (sim_out_set) cfg.out_path = sim_out;
    SimResult result = run_simulation(cfg);
    print_result(result, cfg.out_path);
    return 0;
  }

  if (sweep->parsed()) {
    SimConfig cfg;
    cfg.pair_id = sweep_pair;
    if (!sweep_eps.empty()) cfg.pair_eps = rat_parse(sweep_eps);
    cfg.test_name = sweep_test;
    cfg.alpha = sweep_alpha;
    cfg.gamma = sweep_gamma;
    cfg.eps = sweep_amp_eps;
    if (sweep_truncate > 0) cfg.truncate = sweep_truncate;
    auto comma = sweep_p.find(',');
    if (comma == std::string::npos) {
      cfg.truth = BernParam{rat_parse(sweep_p), rat(0)};
    } else {
      cfg.truth = BernParam{rat_parse(sweep_p.substr(0, comma)),
                            rat_parse(sweep_p.substr(comma + 1))};
    }
    cfg.n_grid = sweep_grid;
    cfg.reps = sweep_reps;
    cfg.seed = sweep_seed;
    cfg.out_path = sweep_out;
    SimResult result = sweep_consistency(cfg);
    print_result(result, cfg.out_path);
    return 0;
  }

  if (blc->parsed()) {
    BlCheckReport rep = bl_check(bl_instances, bl_tol, bl_seed);
    std::cout << "instances: " << rep.instances << "\nfailures: " << rep.failures
              << "\nmax oracle deviation: " << rep.max_oracle_dev
              << "\nmax axiom violation: " << rep.max_axiom_violation << "\n";
    for (const std::string& m : rep.messages) std::cerr << m << "\n";
    if (!rep.pass()) throw InvariantViolation("bl_check found violations");
    return 0;
  }

  if (ci->parsed()) {
    CiBenchRow row = ci_bench(ci_mode, ci_params);
    std::cout << "mode," << row.mode << "\nn," << row.n << "\nreps," << row.reps << "\n";
    if (ci_mode == "densify") {
      std::cout << "pass," << row.pass_count << "/" << row.total << "\n";
      if (row.pass_count != row.total)
        throw InvariantViolation("densify fixtures failed verification");
    } else {
      std::cout << "freq0," << row.freq[0] << "\nfreq1," << row.freq[1] << "\nfreq2,"
                << row.freq[2] << "\n";
      if (ci_mode == "dependent") std::cout << "d_star," << row.statistic << "\n";
    }
    return 0;
  }

  if (cat->parsed()) {
    for (int id = 1; id <= 5; ++id) {
      HypothesisPair pair =
          id == 5 ? catalogue(id, rat(1, 10)) : catalogue(id);
      std::cout << id << ": " << pair.desc << "\n   H0 [" << topo_class_name(pair.h0.declared_class)
                << "] " << pair.h0.label << "\n   H1 [" << topo_class_name(pair.h1.declared_class)
                << "] " << pair.h1.label << "\n";
      if (id == 5) std::cout << "   (shown with eps = 1/10; eps is a parameter)\n";
    }
    return 0;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const fptest::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const fptest::InvariantViolation& e) {
    std::cerr << "invariant violation: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
