// netdid command line: `simulate` runs the Monte Carlo study on the synthetic
// data-generating process, `estimate` fits the estimators on user CSVs, and
// `replicate` emits the full set of study tables and robustness sweeps.
//
// Exit codes: 0 success; 1 unexpected error; 2 bad flags/config; 3 input
// schema error; 4 missing network input; 5 estimation error (e.g. no
// overlap); 6 numerical failure; 7 some estimators failed (stderr lists them).

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "netdid/io.hpp"
#include "netdid/simulation.hpp"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitUnexpected = 1;
constexpr int kExitUsage = 2;
constexpr int kExitSchema = 3;
constexpr int kExitMissingNetwork = 4;
constexpr int kExitEstimation = 5;
constexpr int kExitNumerical = 6;
constexpr int kExitPartial = 7;

// Flag defaults, overridable by --config JSON and then by explicit flags.
struct Defaults {
  int n = 500;
  double area_side = 20.0;
  double radius = 1.0;
  std::string metric = "chebyshev";
  int K = 1;
  int L = 10;
  double rho0 = 0.5;
  double tau = 0.8;
  std::uint64_t seed = 20240502;
  int replications = 100;
  int threads = 1;
  double alpha = 0.05;
  std::string kernel = "bartlett";
  double bandwidth = -1.0;  // negative = use multiplier * K
  double bandwidth_multiplier = 2.0;
  std::vector<std::string> estimators;
  std::string out = ".";
  double trim_lo = 0.01;
  double trim_hi = 0.99;
};

void apply_config(Defaults& d, const json& cfg, const std::string& path) {
  for (const auto& [key, value] : cfg.items()) {
    if (key == "n") d.n = value.get<int>();
    else if (key == "area_side") d.area_side = value.get<double>();
    else if (key == "radius") d.radius = value.get<double>();
    else if (key == "metric") d.metric = value.get<std::string>();
    else if (key == "K") d.K = value.get<int>();
    else if (key == "L") d.L = value.get<int>();
    else if (key == "rho0") d.rho0 = value.get<double>();
    else if (key == "tau") d.tau = value.get<double>();
    else if (key == "seed") d.seed = value.get<std::uint64_t>();
    else if (key == "replications") d.replications = value.get<int>();
    else if (key == "threads") d.threads = value.get<int>();
    else if (key == "alpha") d.alpha = value.get<double>();
    else if (key == "kernel") d.kernel = value.get<std::string>();
    else if (key == "bandwidth") d.bandwidth = value.get<double>();
    else if (key == "bandwidth_multiplier") d.bandwidth_multiplier = value.get<double>();
    else if (key == "estimators") d.estimators = value.get<std::vector<std::string>>();
    else if (key == "out") d.out = value.get<std::string>();
    else if (key == "trim_lo") d.trim_lo = value.get<double>();
    else if (key == "trim_hi") d.trim_hi = value.get<double>();
    else
      throw netdid::InvalidInput("unknown config key '" + key + "' in " + path);
  }
}

Defaults load_defaults(int argc, char** argv) {
  Defaults d;
  std::string config_path;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--config" && i + 1 < argc) config_path = argv[i + 1];
    else if (arg.rfind("--config=", 0) == 0) config_path = arg.substr(9);
  }
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) throw netdid::InvalidInput("cannot open config: " + config_path);
    json cfg;
    try {
      in >> cfg;
    } catch (const json::parse_error& ex) {
      throw netdid::InvalidInput("config parse error in " + config_path + ": " +
                                 ex.what());
    }
    apply_config(d, cfg, config_path);
  }
  return d;
}

netdid::Metric parse_metric(const std::string& name) {
  if (name == "chebyshev") return netdid::Metric::Chebyshev;
  if (name == "euclidean") return netdid::Metric::Euclidean;
  throw netdid::InvalidInput("metric must be chebyshev or euclidean");
}

netdid::KernelKind parse_kernel(const std::string& name) {
  if (name == "bartlett") return netdid::KernelKind::Bartlett;
  if (name == "parzen") return netdid::KernelKind::Parzen;
  throw netdid::InvalidInput("kernel must be bartlett or parzen");
}

netdid::SimConfig sim_config(const Defaults& d) {
  netdid::SimConfig cfg;
  cfg.n = d.n;
  cfg.area_side = d.area_side;
  cfg.adjacency_radius = d.radius;
  cfg.metric = parse_metric(d.metric);
  cfg.K = d.K;
  cfg.L = d.L;
  cfg.rho0 = d.rho0;
  cfg.tau = d.tau;
  cfg.seed = d.seed;
  return cfg;
}

netdid::RunOptions run_options(const Defaults& d) {
  netdid::RunOptions opt;
  opt.estimators = d.estimators;
  opt.hac.kernel = parse_kernel(d.kernel);
  if (d.bandwidth >= 0) opt.hac.bandwidth = d.bandwidth;
  opt.hac.bandwidth_multiplier = d.bandwidth_multiplier;
  opt.alpha = d.alpha;
  opt.replications = d.replications;
  opt.threads = d.threads;
  opt.estimation.trim.lo = d.trim_lo;
  opt.estimation.trim.hi = d.trim_hi;
  return opt;
}

std::filesystem::path prepare_out_dir(const std::string& out) {
  std::filesystem::path dir(out);
  std::filesystem::create_directories(dir);
  return dir;
}

void print_summary(const netdid::SimResult& result) {
  std::printf("%-16s %6s %10s %10s %10s %10s\n", "estimator", "reps", "truth",
              "bias", "rmse", "coverage");
  for (const auto& agg : result.aggregates)
    std::printf("%-16s %6d %10.4f %10.4f %10.4f %10.4f\n", agg.estimator.c_str(),
                agg.reps_ok, agg.truth_mean, agg.bias, agg.rmse, agg.coverage);
}

int cmd_simulate(const Defaults& d) {
  const auto dir = prepare_out_dir(d.out);
  const netdid::SimResult result = run_simulation(sim_config(d), run_options(d));
  netdid::write_records_csv((dir / "results.csv").string(), result);
  netdid::write_summary_csv((dir / "summary.csv").string(), result);
  print_summary(result);
  int failed = 0;
  for (const auto& agg : result.aggregates)
    if (agg.reps_ok < d.replications) ++failed;
  if (failed > 0) {
    std::cerr << failed << " estimator(s) had failing replications; see results.csv\n";
    return kExitPartial;
  }
  return kExitOk;
}

int cmd_estimate(const Defaults& d, const std::string& panel_path,
                 const std::string& points_path, const std::string& edges_path,
                 const std::string& neighborhood) {
  if (points_path.empty() && edges_path.empty()) {
    std::cerr << "estimate: provide a network via --points or --edges\n";
    return kExitMissingNetwork;
  }
  if (!points_path.empty() && !edges_path.empty())
    throw netdid::InvalidInput("estimate: --points and --edges are exclusive");
  if (neighborhood != "l_nearest" && neighborhood != "within_k")
    throw netdid::InvalidInput("estimate: --neighborhood must be l_nearest or within_k");

  const netdid::LoadedPanel loaded = netdid::read_panel_csv(panel_path);
  netdid::PanelData panel;
  panel.z = loaded.z;
  panel.d = loaded.d;
  panel.y1 = loaded.y1;
  panel.y2 = loaded.y2;
  if (!points_path.empty()) {
    const auto points = netdid::read_points_csv(points_path);
    if (int(points.size()) != loaded.n())
      throw netdid::SchemaError("points file has " + std::to_string(points.size()) +
                                " units, panel has " + std::to_string(loaded.n()));
    panel.network =
        netdid::build_network_from_points(points, d.radius, parse_metric(d.metric));
  } else {
    panel.network =
        netdid::build_network_from_edges(loaded.n(), netdid::read_edges_csv(edges_path));
  }

  const double treated = panel.d.sum();
  if (treated == 0.0 || treated == double(loaded.n())) {
    std::cerr << "estimate: no overlap (all units share one treatment arm)\n";
    return kExitEstimation;
  }

  std::vector<int> d_int(std::size_t(loaded.n()));
  for (int i = 0; i < loaded.n(); ++i) d_int[std::size_t(i)] = int(panel.d[i]);
  netdid::Rng sampler = netdid::Rng::for_stream(d.seed, 1);
  panel.index = netdid::build_neighborhood_index(
      panel.network, d_int, d.L, d.K, &sampler, neighborhood == "within_k");
  const std::vector<int> s_count =
      netdid::count_treated_within(panel.network, d_int, d.K);

  const netdid::RunOptions opt = run_options(d);
  const std::vector<std::string> names =
      opt.estimators.empty() ? netdid::proposed_estimator_names() : opt.estimators;
  const auto outcomes = netdid::run_estimators(
      panel, s_count, names, opt.hac, opt.alpha, opt.estimation,
      netdid::derive_seed(d.seed, 2));

  netdid::EstimateRunMeta meta;
  meta.alpha = opt.alpha;
  meta.kernel = opt.hac.kernel;
  meta.bandwidth = opt.hac.resolve_bandwidth(d.K);
  meta.L = d.L;
  meta.K = d.K;
  meta.seed = d.seed;
  meta.n = loaded.n();
  meta.assumption3_violations = panel.index.assumption3_violations;
  const auto dir = prepare_out_dir(d.out);
  netdid::write_estimates_json((dir / "estimates.json").string(), outcomes, meta);

  int failures = 0;
  for (const auto& out : outcomes)
    if (!out.report) {
      ++failures;
      std::cerr << "estimator " << out.name << " failed: " << out.error << '\n';
    }
  if (failures == int(outcomes.size())) return kExitEstimation;
  return failures > 0 ? kExitPartial : kExitOk;
}

int cmd_replicate(const Defaults& d) {
  const auto dir = prepare_out_dir(d.out);
  const std::vector<std::string> table1 = {
      "ipw_adtt",  "dr_adtt",        "xu_oracle_dr", "xu_mo_dr", "xu_fm_dr",
      "canonical_ipw", "canonical_twfe", "dr_did",   "modified_twfe"};
  const std::vector<std::string> table2 = {"ipw_aitt", "dr_aitt"};

  // Main experiment feeding both tables.
  {
    netdid::RunOptions opt = run_options(d);
    opt.estimators = table1;
    opt.estimators.insert(opt.estimators.end(), table2.begin(), table2.end());
    const netdid::SimResult result = run_simulation(sim_config(d), opt);
    netdid::write_summary_csv((dir / "table1.csv").string(), result, table1);
    netdid::write_summary_csv((dir / "table2.csv").string(), result, table2);
    std::printf("== main experiment (n=%d, %d replications) ==\n", d.n,
                d.replications);
    print_summary(result);
  }

  const auto& proposed = netdid::proposed_estimator_names();
  auto sweep = [&](const std::string& stem, const std::string& param,
                   const std::vector<double>& values) {
    std::vector<std::pair<double, netdid::SimResult>> runs;
    for (double value : values) {
      Defaults dv = d;
      if (param == "n") dv.n = int(value);
      else if (param == "rho0") dv.rho0 = value;
      else dv.L = int(value);
      netdid::RunOptions opt = run_options(dv);
      opt.estimators = proposed;
      runs.emplace_back(value, run_simulation(sim_config(dv), opt));
    }
    netdid::write_sweep_csv((dir / ("fig_" + stem + "_sweep.csv")).string(),
                            param, runs);
  };
  sweep("n", "n", {300, 500, 700});
  sweep("rho", "rho0", {0.2, 0.5, 0.8});
  sweep("L", "L", {5, 10, 15});
  std::printf("wrote table1.csv table2.csv fig_n_sweep.csv fig_rho_sweep.csv "
              "fig_L_sweep.csv under %s\n", dir.string().c_str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  Defaults d;
  try {
    d = load_defaults(argc, argv);
  } catch (const std::exception& ex) {
    std::cerr << ex.what() << '\n';
    return kExitUsage;
  }

  CLI::App app{
      "Difference-in-differences estimation of direct and spillover treatment\n"
      "effects under local network interference.\n\n"
      "File schemas: panel CSV 'id,z...,d,y1,y2' (extra columns ignored);\n"
      "points CSV 'id,x,y'; edges CSV 'src,dst'; exported panels\n"
      "'id,x,y,z,d,y1,y2,s'. simulate writes results.csv (rep,estimator,point,\n"
      "se,ci_lo,ci_hi,truth,covered,ok,error) and summary.csv (estimator,reps,\n"
      "truth_mean,bias,rmse,coverage,mean_se); estimate writes estimates.json;\n"
      "replicate writes table1.csv, table2.csv and fig_{n,rho,L}_sweep.csv.\n\n"
      "Exit codes: 0 ok; 1 unexpected; 2 bad flags/config; 3 schema; 4 missing\n"
      "network; 5 estimation (no overlap); 6 numerical; 7 partial failures."};
  app.require_subcommand(1);
  std::string config_path;  // consumed by load_defaults; declared for --help
  app.add_option("--config", config_path, "JSON config with flag defaults");

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON config with flag defaults");
    cmd->add_option("--seed", d.seed, "base RNG seed");
    cmd->add_option("--threads", d.threads, "worker threads");
    cmd->add_option("--out", d.out, "output directory");
    cmd->add_option("--alpha", d.alpha, "confidence level alpha");
    cmd->add_option("--kernel", d.kernel, "HAC kernel: bartlett|parzen");
    cmd->add_option("--bandwidth", d.bandwidth, "explicit HAC bandwidth");
    cmd->add_option("--bandwidth-multiplier", d.bandwidth_multiplier,
                    "HAC bandwidth = multiplier * K");
    cmd->add_option("--estimators", d.estimators,
                    "comma-separated estimator names")
        ->delimiter(',');
    cmd->add_option("--L", d.L, "neighborhood feature count");
    cmd->add_option("--K", d.K, "interference range (hops)");
  };

  CLI::App* simulate = app.add_subcommand(
      "simulate", "Monte Carlo study on the synthetic DGP");
  add_common(simulate);
  simulate->add_option("--n", d.n, "units per replication");
  simulate->add_option("--replications", d.replications, "Monte Carlo replications");
  simulate->add_option("--rho0", d.rho0, "confounder correlation base");
  simulate->add_option("--tau", d.tau, "true direct effect");
  simulate->add_option("--area-side", d.area_side, "square side length");
  simulate->add_option("--radius", d.radius, "adjacency radius");
  simulate->add_option("--metric", d.metric, "distance metric: chebyshev|euclidean");

  CLI::App* estimate = app.add_subcommand(
      "estimate", "estimate effects on user-supplied CSV data");
  add_common(estimate);
  std::string panel_path, points_path, edges_path, neighborhood = "l_nearest";
  estimate->add_option("--panel", panel_path, "panel CSV (id,z...,d,y1,y2)")
      ->required();
  estimate->add_option("--points", points_path, "coordinates CSV (id,x,y)");
  estimate->add_option("--edges", edges_path, "edge list CSV (src,dst)");
  estimate->add_option("--radius", d.radius, "adjacency radius for --points");
  estimate->add_option("--metric", d.metric, "distance metric for --points");
  estimate->add_option("--neighborhood", neighborhood,
                       "neighborhood rule: l_nearest|within_k");

  CLI::App* replicate = app.add_subcommand(
      "replicate", "simulation study tables and robustness sweeps in one run");
  add_common(replicate);
  replicate->add_option("--n", d.n, "units per replication");
  replicate->add_option("--replications", d.replications, "Monte Carlo replications");
  replicate->add_option("--rho0", d.rho0, "confounder correlation base");
  replicate->add_option("--tau", d.tau, "true direct effect");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(d);
    if (estimate->parsed())
      return cmd_estimate(d, panel_path, points_path, edges_path, neighborhood);
    return cmd_replicate(d);
  } catch (const netdid::SchemaError& ex) {
    std::cerr << "schema error: " << ex.what() << '\n';
    return kExitSchema;
  } catch (const netdid::InvalidInput& ex) {
    std::cerr << "invalid input: " << ex.what() << '\n';
    return kExitUsage;
  } catch (const netdid::EstimationError& ex) {
    std::cerr << "estimation error: " << ex.what() << '\n';
    return kExitEstimation;
  } catch (const netdid::NumericalError& ex) {
    std::cerr << "numerical error: " << ex.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return kExitUnexpected;
  }
}
