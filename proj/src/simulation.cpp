#include "netdid/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

namespace netdid {

namespace {

bool is_aitt(const std::string& name) {
  return name == "ipw_aitt" || name == "dr_aitt";
}

bool needs_nuisances(const std::string& name) {
  return name == "ipw_adtt" || name == "dr_adtt" || name == "ipw_aitt" ||
         name == "dr_aitt";
}

}  // namespace

const std::vector<std::string>& all_estimator_names() {
  static const std::vector<std::string> names = {
      "ipw_adtt",   "dr_adtt",       "ipw_aitt",  "dr_aitt",
      "xu_oracle_ipw", "xu_oracle_dr", "xu_mo_ipw", "xu_mo_dr",
      "xu_fm_ipw",  "xu_fm_dr",      "canonical_ipw", "canonical_twfe",
      "dr_did",     "modified_twfe"};
  return names;
}

const std::vector<std::string>& proposed_estimator_names() {
  static const std::vector<std::string> names = {"ipw_adtt", "dr_adtt",
                                                 "ipw_aitt", "dr_aitt"};
  return names;
}

std::vector<EstimatorOutcome> run_estimators(const PanelData& panel,
                                             const std::vector<int>& s_count,
                                             const std::vector<std::string>& names,
                                             const HacConfig& hac, double alpha,
                                             const EstimationConfig& est_cfg,
                                             std::uint64_t exposure_seed) {
  const auto& known = all_estimator_names();
  for (const auto& name : names)
    if (std::find(known.begin(), known.end(), name) == known.end())
      throw InvalidInput("unknown estimator: " + name);

  HacConfig resolved = hac;
  resolved.bandwidth = hac.resolve_bandwidth(panel.index.K);
  const int s_needed = int(std::floor(*resolved.bandwidth));
  const DistanceShell shells = distance_shells(panel.network, s_needed);

  // Nuisances and exposure mappings are shared across the estimators that
  // need them; failures there surface on each dependent estimator.
  std::optional<NuisanceSet> nuis;
  std::string nuis_error;
  const bool want_nuis =
      std::any_of(names.begin(), names.end(),
                  [](const std::string& s) { return needs_nuisances(s); });
  if (want_nuis) {
    try {
      nuis = fit_nuisances(panel, est_cfg);
    } catch (const std::exception& ex) {
      nuis_error = ex.what();
    }
  }

  std::vector<EstimatorOutcome> outcomes;
  outcomes.reserve(names.size());
  for (const auto& name : names) {
    EstimatorOutcome out;
    out.name = name;
    try {
      EstimateReport report;
      if (needs_nuisances(name)) {
        if (!nuis) throw EstimationError(nuis_error);
        if (name == "ipw_adtt") report = ipw_adtt(panel, *nuis);
        else if (name == "dr_adtt") report = dr_adtt(panel, *nuis);
        else if (name == "ipw_aitt") report = ipw_aitt(panel, *nuis);
        else report = dr_aitt(panel, *nuis);
      } else if (name.rfind("xu_", 0) == 0) {
        ExposureKind kind = ExposureKind::Oracle;
        if (name.find("_mo_") != std::string::npos) kind = ExposureKind::MO;
        if (name.find("_fm_") != std::string::npos) kind = ExposureKind::FM;
        const Method method =
            name.size() >= 3 && name.compare(name.size() - 3, 3, "_dr") == 0
                ? Method::DR
                : Method::IPW;
        const ExposureMapping mapping =
            build_exposure(kind, s_count, exposure_seed);
        report = xu_estimator(panel, mapping, method, est_cfg);
      } else if (name == "canonical_ipw") {
        report = canonical_ipw_did(panel, est_cfg);
      } else if (name == "canonical_twfe") {
        report = canonical_twfe(panel);
      } else if (name == "dr_did") {
        report = dr_did_benchmark(panel, est_cfg);
      } else {  // modified_twfe
        report = modified_twfe(panel, s_count);
      }
      report.variance = hac_variance(report.influence, shells, resolved, alpha,
                                     report.point, &report.unit_ids);
      out.report = std::move(report);
    } catch (const std::exception& ex) {
      out.error = ex.what();
    }
    outcomes.push_back(std::move(out));
  }
  return outcomes;
}

SimResult run_simulation(const SimConfig& cfg, const RunOptions& opt) {
  cfg.validate();
  if (opt.replications < 1)
    throw InvalidInput("run_simulation: replications must be >= 1");
  if (!(opt.alpha > 0.0 && opt.alpha < 1.0))
    throw InvalidInput("run_simulation: alpha must lie in (0, 1)");
  const std::vector<std::string> names =
      opt.estimators.empty() ? all_estimator_names() : opt.estimators;
  // Reject typos before any replication runs, not inside the workers.
  const auto& known = all_estimator_names();
  for (const auto& name : names)
    if (std::find(known.begin(), known.end(), name) == known.end())
      throw InvalidInput("unknown estimator: " + name);

  const int reps = opt.replications;
  struct RepResult {
    std::vector<EstimatorOutcome> outcomes;
    double true_aitt = 0.0;
    std::string error;  // replication-level failure (e.g. generation)
  };
  std::vector<RepResult> results(static_cast<std::size_t>(reps));

  std::atomic<int> next{0};
  auto worker = [&]() {
    while (true) {
      const int r = next.fetch_add(1);
      if (r >= reps) break;
      RepResult& slot = results[std::size_t(r)];
      try {
        Rng panel_rng = Rng::for_stream(cfg.seed, 4 * std::uint64_t(r));
        Rng index_rng = Rng::for_stream(cfg.seed, 4 * std::uint64_t(r) + 1);
        const std::uint64_t exposure_seed =
            derive_seed(cfg.seed, 4 * std::uint64_t(r) + 2);
        const SimulatedPanel sim = generate_panel(cfg, panel_rng, index_rng);
        slot.true_aitt = sim.true_aitt;
        slot.outcomes = run_estimators(sim.panel, sim.s_count, names, opt.hac,
                                       opt.alpha, opt.estimation, exposure_seed);
      } catch (const std::exception& ex) {
        slot.error = ex.what();
      }
    }
  };

  const int workers = std::max(1, std::min(opt.threads, reps));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(std::size_t(workers));
    for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  SimResult sim_result;
  sim_result.records.reserve(std::size_t(reps) * names.size());
  for (int r = 0; r < reps; ++r) {
    const RepResult& res = results[std::size_t(r)];
    for (std::size_t e = 0; e < names.size(); ++e) {
      RepRecord rec;
      rec.rep = r;
      rec.estimator = names[e];
      rec.truth = is_aitt(names[e]) ? res.true_aitt : cfg.tau;
      if (!res.error.empty()) {
        rec.error = res.error;
      } else {
        const EstimatorOutcome& out = res.outcomes[e];
        if (out.report) {
          const EstimateReport& rep = *out.report;
          rec.ok = true;
          rec.point = rep.point;
          rec.se = rep.variance->se;
          rec.ci_lo = rep.variance->ci.first;
          rec.ci_hi = rep.variance->ci.second;
          rec.covered = coverage_indicator(*rep.variance, rec.truth);
        } else {
          rec.error = out.error;
        }
      }
      sim_result.records.push_back(std::move(rec));
    }
  }

  for (std::size_t e = 0; e < names.size(); ++e) {
    AggRecord agg;
    agg.estimator = names[e];
    double sum_err = 0.0, sum_sq = 0.0, sum_truth = 0.0, sum_cov = 0.0,
           sum_se = 0.0;
    for (int r = 0; r < reps; ++r) {
      const RepRecord& rec = sim_result.records[std::size_t(r) * names.size() + e];
      if (!rec.ok) continue;
      ++agg.reps_ok;
      sum_err += rec.point - rec.truth;
      sum_sq += (rec.point - rec.truth) * (rec.point - rec.truth);
      sum_truth += rec.truth;
      sum_cov += rec.covered ? 1.0 : 0.0;
      sum_se += rec.se;
    }
    if (agg.reps_ok > 0) {
      agg.bias = sum_err / agg.reps_ok;
      agg.rmse = std::sqrt(sum_sq / agg.reps_ok);
      agg.truth_mean = sum_truth / agg.reps_ok;
      agg.coverage = sum_cov / agg.reps_ok;
      agg.mean_se = sum_se / agg.reps_ok;
    }
    sim_result.aggregates.push_back(std::move(agg));
  }
  return sim_result;
}

}  // namespace netdid
