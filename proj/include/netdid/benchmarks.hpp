// Comparator estimators: exposure-mapping stratified DID (with oracle,
// misspecified-oracle, and functional-misspecification mappings), canonical
// IPW-DID, canonical two-period TWFE, z-only doubly robust DID, and a TWFE
// variant with a crude any-treated-neighbor exposure term. All marginal
// weighting uses mean(D) (ATT weighting), so a constant exposure mapping
// collapses the stratified estimators onto their canonical counterparts.
#pragma once

#include <cstdint>

#include "netdid/estimators.hpp"

namespace netdid {

enum class ExposureKind { Oracle, MO, FM, Custom };

struct ExposureMapping {
  ExposureKind kind = ExposureKind::Oracle;
  std::vector<int> levels;     // per-unit exposure level G_i
  double mo_flip_rate = 0.3;
  std::uint64_t rng_seed = 0;  // seed used for MO reassignment
};

// Oracle: G = min(S, 3). FM: G = 1(S > 1). MO: oracle with round(flip_rate*n)
// distinct units reassigned to a uniformly random different level in {0..3};
// deterministic given seed.
ExposureMapping build_exposure(ExposureKind kind, const std::vector<int>& s_count,
                               std::uint64_t seed = 0, double flip_rate = 0.3);

// Stratified DID in the style of exposure-mapping estimators: stratum
// propensity q = P(D = 1 | z, G) by logistic on [1, z, level dummies], then
// the IPW or DR ADTT algebra with e replaced by q and the marginal weight
// mean(D). Degenerate strata (all treated or all control) are merged into the
// nearest surviving level, flagged in diagnostics.
EstimateReport xu_estimator(const PanelData& data, const ExposureMapping& mapping,
                            Method method, const EstimationConfig& cfg = {});

// (1/n) sum (D_i - p_i) dY_i / (pbar (1 - p_i)), p from logistic of D on
// [1, z], pbar = mean(D).
EstimateReport canonical_ipw_did(const PanelData& data,
                                 const EstimationConfig& cfg = {});

// OLS of dY on [1, D]; two-period TWFE. Influence is the OLS sandwich form
// for the D coordinate.
EstimateReport canonical_twfe(const PanelData& data);

// DR ADTT algebra with the z-only propensity and outcome model dY ~ [1, D, z];
// ignores interference entirely.
EstimateReport dr_did_benchmark(const PanelData& data,
                                const EstimationConfig& cfg = {});

// OLS of dY on [1, D, 1(S >= 1)], reporting the D coefficient; the exposure
// column is dropped (with a diagnostic) when it carries no variation.
EstimateReport modified_twfe(const PanelData& data, const std::vector<int>& s_count);

}  // namespace netdid
