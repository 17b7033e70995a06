// Comparator estimators: exposure mappings, collapse of the stratified
// estimator onto the canonical ones, TWFE closed forms, the collinearity
// fallback, and a coarse bias comparison between spillover and no-spillover
// designs.
#include <cmath>
#include <set>
#include <utility>
#include <vector>

#include <doctest.h>

#include "netdid/benchmarks.hpp"
#include "netdid/dgp.hpp"
#include "test_util.hpp"

using netdid::build_exposure;
using netdid::canonical_ipw_did;
using netdid::canonical_twfe;
using netdid::dr_did_benchmark;
using netdid::ExposureKind;
using netdid::ExposureMapping;
using netdid::Method;
using netdid::modified_twfe;
using netdid::PanelData;
using netdid::Rng;
using netdid::xu_estimator;

using testutil::make_panel_edges;

namespace {

// Random panel over a long path; outcomes carry a treatment effect plus noise.
PanelData random_panel(int n, std::uint64_t seed, double effect = 1.0) {
  Rng rng(seed);
  std::vector<double> z(n), d(n), y1(n), y2(n);
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < n; ++i) {
    z[std::size_t(i)] = rng.normal();
    d[std::size_t(i)] = rng.bernoulli(0.5) ? 1.0 : 0.0;
    y1[std::size_t(i)] = rng.normal();
    y2[std::size_t(i)] =
        y1[std::size_t(i)] + effect * d[std::size_t(i)] + 0.3 * z[std::size_t(i)] +
        0.5 * rng.normal();
    if (i > 0) edges.emplace_back(i - 1, i);
  }
  return make_panel_edges(n, edges, z, d, y1, y2, 2, 1);
}

}  // namespace

TEST_CASE("exposure mappings") {
  const std::vector<int> s{0, 1, 2, 5};
  SUBCASE("oracle caps at three") {
    CHECK(build_exposure(ExposureKind::Oracle, s).levels ==
          std::vector<int>{0, 1, 2, 3});
  }
  SUBCASE("functional misspecification is a coarse indicator") {
    CHECK(build_exposure(ExposureKind::FM, s).levels ==
          std::vector<int>{0, 0, 1, 1});
  }
  SUBCASE("zero flip rate reproduces the oracle") {
    CHECK(build_exposure(ExposureKind::MO, s, 99, 0.0).levels ==
          build_exposure(ExposureKind::Oracle, s).levels);
  }
  SUBCASE("flip rate moves exactly the requested share") {
    Rng rng(3);
    std::vector<int> big(200);
    for (auto& v : big) v = rng.uniform_int(6);
    const auto oracle = build_exposure(ExposureKind::Oracle, big);
    const auto mo = build_exposure(ExposureKind::MO, big, 1234, 0.3);
    int moved = 0;
    for (std::size_t i = 0; i < big.size(); ++i) {
      CHECK(mo.levels[i] >= 0);
      CHECK(mo.levels[i] <= 3);
      if (mo.levels[i] != oracle.levels[i]) ++moved;
    }
    CHECK(moved == 60);  // round(0.3 * 200), and every flip lands elsewhere
    const auto again = build_exposure(ExposureKind::MO, big, 1234, 0.3);
    CHECK(again.levels == mo.levels);
    const auto other = build_exposure(ExposureKind::MO, big, 1235, 0.3);
    CHECK(other.levels != mo.levels);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(build_exposure(ExposureKind::Oracle, {0, -1}),
                    netdid::InvalidInput);
    CHECK_THROWS_AS(build_exposure(ExposureKind::Custom, s), netdid::InvalidInput);
  }
}

TEST_CASE("constant exposure collapses the stratified estimator") {
  // Empty network: every spillover count is zero, so the oracle mapping is a
  // single stratum and the Xu algebra must reduce to the canonical one.
  Rng rng(11);
  const int n = 120;
  std::vector<double> z(n), d(n), y1(n), y2(n);
  for (int i = 0; i < n; ++i) {
    z[std::size_t(i)] = rng.normal();
    d[std::size_t(i)] = rng.bernoulli(0.5) ? 1.0 : 0.0;
    y1[std::size_t(i)] = rng.normal();
    y2[std::size_t(i)] = y1[std::size_t(i)] + d[std::size_t(i)] + 0.4 * rng.normal();
  }
  PanelData p = make_panel_edges(n, {}, z, d, y1, y2, 2, 1);
  const std::vector<int> s(std::size_t(n), 0);
  const auto mapping = build_exposure(ExposureKind::Oracle, s);

  const auto xu_ipw = xu_estimator(p, mapping, Method::IPW);
  const auto can_ipw = canonical_ipw_did(p);
  CHECK(xu_ipw.point == doctest::Approx(can_ipw.point).epsilon(1e-10));
  CHECK_FALSE(xu_ipw.diagnostics.merged_strata);
  CHECK(xu_ipw.estimator == "xu_oracle_ipw");

  const auto xu_dr = xu_estimator(p, mapping, Method::DR);
  const auto dr = dr_did_benchmark(p);
  CHECK(xu_dr.point == doctest::Approx(dr.point).epsilon(1e-10));

  CHECK_THROWS_AS(xu_estimator(p, mapping, Method::OLS), netdid::InvalidInput);
}

TEST_CASE("degenerate strata merge into the nearest level") {
  Rng rng(13);
  const int n = 120;
  std::vector<double> z(n), d(n), y1(n), y2(n);
  std::vector<int> levels(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    z[std::size_t(i)] = rng.normal();
    if (i < 40) {
      levels[std::size_t(i)] = 0;
      d[std::size_t(i)] = i % 2;
    } else if (i < 80) {
      levels[std::size_t(i)] = 1;
      d[std::size_t(i)] = i % 2;
    } else {
      levels[std::size_t(i)] = 3;
      d[std::size_t(i)] = 1.0;  // all treated: must merge
    }
    y1[std::size_t(i)] = rng.normal();
    y2[std::size_t(i)] = y1[std::size_t(i)] + d[std::size_t(i)] + 0.3 * rng.normal();
  }
  PanelData p = make_panel_edges(n, {}, z, d, y1, y2, 2, 1);
  ExposureMapping mapping;
  mapping.kind = ExposureKind::Custom;
  mapping.levels = levels;
  const auto rep = xu_estimator(p, mapping, Method::DR);
  CHECK(rep.diagnostics.merged_strata);
  CHECK(std::isfinite(rep.point));
  CHECK(rep.estimator == "xu_custom_dr");

  SUBCASE("merging cannot rescue a fully treated panel") {
    for (int i = 0; i < n; ++i) p.d[i] = 1.0;
    CHECK_THROWS_AS(xu_estimator(p, mapping, Method::DR), netdid::EstimationError);
  }
}

TEST_CASE("canonical IPW hand example") {
  PanelData p = make_panel_edges(2, {{0, 1}}, {0.0, 0.0}, {1, 0}, {0, 0},
                                 {1, 1}, 1, 1);
  CHECK(canonical_ipw_did(p).point == doctest::Approx(0.0).epsilon(1).scale(1e-8));
  p.y2[0] = 2.0;
  CHECK(canonical_ipw_did(p).point == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(canonical_ipw_did(p).estimator == "canonical_ipw");
}

TEST_CASE("canonical TWFE closed forms") {
  Rng rng(17);
  const int n = 50;
  std::vector<double> z(n, 0.0), d(n), y1(n), y2(n);
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < n; ++i) {
    d[std::size_t(i)] = rng.bernoulli(0.5) ? 1.0 : 0.0;
    y1[std::size_t(i)] = rng.normal();
    y2[std::size_t(i)] = y1[std::size_t(i)] + 2.0 * d[std::size_t(i)];
    if (i > 0) edges.emplace_back(i - 1, i);
  }
  PanelData p = make_panel_edges(n, edges, z, d, y1, y2, 2, 1);
  const auto rep = canonical_twfe(p);
  CHECK(rep.point == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(rep.point == doctest::Approx(rep.influence.mean()).epsilon(1e-9));

  // Shifting every outcome change lands in the intercept.
  for (int i = 0; i < n; ++i) p.y2[i] += 7.0;
  CHECK(canonical_twfe(p).point == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("modified TWFE") {
  Rng rng(19);
  const int n = 80;
  std::vector<double> z(n, 0.0), d(n), y1(n), y2(n);
  std::vector<int> s(static_cast<std::size_t>(n));
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < n; ++i) {
    d[std::size_t(i)] = rng.bernoulli(0.5) ? 1.0 : 0.0;
    s[std::size_t(i)] = rng.uniform_int(3);  // some zeros, some positive
    y1[std::size_t(i)] = rng.normal();
    y2[std::size_t(i)] = y1[std::size_t(i)] + 0.8 * d[std::size_t(i)] +
                         0.5 * (s[std::size_t(i)] >= 1 ? 1.0 : 0.0);
    if (i > 0) edges.emplace_back(i - 1, i);
  }
  PanelData p = make_panel_edges(n, edges, z, d, y1, y2, 2, 1);

  SUBCASE("exact two-factor outcome") {
    const auto rep = modified_twfe(p, s);
    CHECK(rep.point == doctest::Approx(0.8).epsilon(1e-9));
    CHECK_FALSE(rep.diagnostics.dropped_exposure_column);
    CHECK(rep.estimator == "modified_twfe");
  }
  SUBCASE("no exposure variation drops the column") {
    const std::vector<int> zeros(std::size_t(n), 0);
    const auto rep = modified_twfe(p, zeros);
    CHECK(rep.diagnostics.dropped_exposure_column);
    CHECK(rep.point == doctest::Approx(canonical_twfe(p).point).epsilon(1e-12));
  }
  SUBCASE("all-exposed is collinear with the intercept and also drops") {
    const std::vector<int> ones(std::size_t(n), 1);
    const auto rep = modified_twfe(p, ones);
    CHECK(rep.diagnostics.dropped_exposure_column);
    CHECK(rep.point == doctest::Approx(canonical_twfe(p).point).epsilon(1e-12));
  }
}

TEST_CASE("z-only DR benchmark") {
  SUBCASE("constant outcome change gives zero") {
    Rng rng(23);
    const int n = 60;
    std::vector<double> z(n), d(n), y1(n), y2(n);
    for (int i = 0; i < n; ++i) {
      z[std::size_t(i)] = rng.normal();
      d[std::size_t(i)] = rng.bernoulli(0.5) ? 1.0 : 0.0;
      y1[std::size_t(i)] = rng.normal();
      y2[std::size_t(i)] = y1[std::size_t(i)] + 3.0;
    }
    PanelData p = make_panel_edges(n, {}, z, d, y1, y2, 2, 1);
    CHECK(dr_did_benchmark(p).point == doctest::Approx(0.0).epsilon(1).scale(1e-8));
  }
  SUBCASE("exact linear outcome recovers the effect") {
    Rng rng(29);
    const int n = 200;
    std::vector<double> z(n), d(n), y1(n), y2(n);
    for (int i = 0; i < n; ++i) {
      z[std::size_t(i)] = rng.normal();
      const double pr = 1.0 / (1.0 + std::exp(-0.8 * z[std::size_t(i)]));
      d[std::size_t(i)] = rng.bernoulli(pr) ? 1.0 : 0.0;
      y1[std::size_t(i)] = rng.normal();
      y2[std::size_t(i)] =
          y1[std::size_t(i)] + 1.0 + 2.0 * d[std::size_t(i)] + 0.5 * z[std::size_t(i)];
    }
    PanelData p = make_panel_edges(n, {}, z, d, y1, y2, 2, 1);
    CHECK(dr_did_benchmark(p).point == doctest::Approx(2.0).epsilon(1e-4));
  }
  SUBCASE("no overlap raises") {
    PanelData p = make_panel_edges(3, {}, {0.0, 0.1, 0.2}, {0, 0, 0}, {0, 0, 0},
                                   {1, 1, 1}, 1, 1);
    CHECK_THROWS_AS(dr_did_benchmark(p), netdid::EstimationError);
    CHECK_THROWS_AS(canonical_ipw_did(p), netdid::EstimationError);
  }
}

TEST_CASE("benchmark reports carry influence vectors consistent with the point") {
  PanelData p = random_panel(150, 31);
  std::vector<int> s(150, 0);
  for (std::size_t i = 0; i < 150; i += 3) s[i] = 1 + int((i / 3) % 3);
  for (const auto& rep :
       {canonical_ipw_did(p), canonical_twfe(p), dr_did_benchmark(p),
        modified_twfe(p, s),
        xu_estimator(p, build_exposure(ExposureKind::FM, s), Method::IPW)}) {
    CHECK(rep.influence.size() == 150);
    CHECK(rep.point == doctest::Approx(rep.influence.mean()).epsilon(1e-10));
    CHECK(std::isfinite(rep.point));
  }
}

TEST_CASE("spillovers inflate the canonical bias far above the no-spillover run") {
  // With spillovers off, the canonical estimator keeps only the latent-trend
  // bias (about 0.07 at these settings); with the default steps it also
  // absorbs the neighbors' spillovers and roughly triples.
  auto mean_bias = [](bool with_spillover) {
    netdid::SimConfig cfg;
    cfg.n = 400;
    if (!with_spillover) cfg.spillover_steps = {0.0, 0.0, 0.0};
    double total = 0.0;
    const int reps = 12;
    for (int r = 0; r < reps; ++r) {
      cfg.seed = 6000 + std::uint64_t(r);
      const auto sim = netdid::generate_panel(cfg);
      total += canonical_ipw_did(sim.panel).point - cfg.tau;
    }
    return total / reps;
  };
  const double without = mean_bias(false);
  const double with = mean_bias(true);
  CHECK(std::abs(without) < 0.15);
  CHECK(with > 0.1);
  CHECK(std::abs(without) < with);
}
