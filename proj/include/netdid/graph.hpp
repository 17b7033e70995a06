// Interference network: adjacency, all-pairs hop distances (BFS), the
// distance-ranked L-neighborhoods that drive feature construction, and the
// exact-distance shells the HAC variance estimator sums over.
#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include "netdid/errors.hpp"
#include "netdid/rng.hpp"

namespace netdid {

enum class Metric { Chebyshev, Euclidean };

struct Network {
  // Hop count marking disconnected pairs.
  static constexpr std::int32_t kInfinite = std::numeric_limits<std::int32_t>::max();

  int n = 0;
  std::vector<std::vector<int>> adjacency;   // sorted neighbor ids per unit
  std::vector<std::int32_t> hop;             // n*n row-major shortest-path lengths
  std::vector<std::array<double, 2>> points; // empty unless built from coordinates
  Metric metric = Metric::Chebyshev;

  std::int32_t dist(int i, int j) const {
    return hop[std::size_t(i) * std::size_t(n) + std::size_t(j)];
  }
  bool adjacent(int i, int j) const { return i != j && dist(i, j) == 1; }
  bool has_points() const { return !points.empty(); }
  // Raw coordinate distance used as a tie-break; requires points.
  double metric_dist(int i, int j) const;
};

Network build_network_from_points(const std::vector<std::array<double, 2>>& points,
                                  double radius, Metric metric);
Network build_network_from_edges(int n, const std::vector<std::pair<int, int>>& edges);

// Per-unit distance-ranked neighbor lists N_i (length <= L) with the aligned,
// zero-padded treatment vector D_{N_i}. Ordering key: (hop distance, raw
// metric distance when coordinates exist, unit id). When
// cap_to_interference_range is set, candidates are restricted to units within
// hop distance K and sampled down to L with `sampler` when more than L
// qualify; otherwise the plain L nearest reachable units are taken and
// assumption3_violations counts units whose list reaches beyond K.
struct NeighborhoodIndex {
  int L = 0;
  int K = 0;
  std::vector<std::vector<int>> neighbors;
  std::vector<std::vector<double>> treatment_vector;  // each length L
  std::vector<std::vector<bool>> pad_mask;            // true on padded slots
  int assumption3_violations = 0;
};

NeighborhoodIndex build_neighborhood_index(const Network& net,
                                           const std::vector<int>& treatments,
                                           int L, int K, Rng* sampler = nullptr,
                                           bool cap_to_interference_range = false);

// Exact-distance shells N^d(i; s) for s = 0..s_max plus the average shell
// sizes M_n(s); shells[0][i] = {i}.
struct DistanceShell {
  int s_max = 0;
  std::vector<std::vector<std::vector<int>>> shells;  // shells[s][i]
  std::vector<double> avg_shell_size;                 // indexed by s
};

DistanceShell distance_shells(const Network& net, int s_max);

// Number of treated units within hop distance K of each unit, self excluded
// (the spillover count S_i of the data-generating process).
std::vector<int> count_treated_within(const Network& net,
                                      const std::vector<int>& treatments, int K);

}  // namespace netdid
