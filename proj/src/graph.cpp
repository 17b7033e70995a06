#include "netdid/graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>

namespace netdid {

namespace {

double point_distance(const std::array<double, 2>& a, const std::array<double, 2>& b,
                      Metric metric) {
  const double dx = std::abs(a[0] - b[0]);
  const double dy = std::abs(a[1] - b[1]);
  if (metric == Metric::Chebyshev) return std::max(dx, dy);
  return std::hypot(dx, dy);
}

// BFS hop distances from every source; kInfinite where unreachable.
void fill_hops(Network& net) {
  const int n = net.n;
  net.hop.assign(std::size_t(n) * std::size_t(n), Network::kInfinite);
  std::vector<int> frontier, next;
  for (int src = 0; src < n; ++src) {
    auto* row = net.hop.data() + std::size_t(src) * std::size_t(n);
    row[src] = 0;
    frontier.assign(1, src);
    std::int32_t depth = 0;
    while (!frontier.empty()) {
      ++depth;
      next.clear();
      for (int u : frontier) {
        for (int v : net.adjacency[std::size_t(u)]) {
          if (row[v] == Network::kInfinite) {
            row[v] = depth;
            next.push_back(v);
          }
        }
      }
      frontier.swap(next);
    }
  }
}

void add_edge(std::vector<std::vector<int>>& adj, int i, int j) {
  adj[std::size_t(i)].push_back(j);
  adj[std::size_t(j)].push_back(i);
}

void sort_dedup(std::vector<std::vector<int>>& adj) {
  for (auto& lst : adj) {
    std::sort(lst.begin(), lst.end());
    lst.erase(std::unique(lst.begin(), lst.end()), lst.end());
  }
}

}  // namespace

double Network::metric_dist(int i, int j) const {
  if (!has_points()) throw InvalidInput("metric_dist: network has no coordinates");
  return point_distance(points[std::size_t(i)], points[std::size_t(j)], metric);
}

Network build_network_from_points(const std::vector<std::array<double, 2>>& points,
                                  double radius, Metric metric) {
  if (points.empty()) throw InvalidInput("build_network_from_points: empty point list");
  if (!(radius > 0)) throw InvalidInput("build_network_from_points: radius must be > 0");
  Network net;
  net.n = int(points.size());
  net.points = points;
  net.metric = metric;
  net.adjacency.assign(std::size_t(net.n), {});
  for (int i = 0; i < net.n; ++i)
    for (int j = i + 1; j < net.n; ++j)
      if (point_distance(points[std::size_t(i)], points[std::size_t(j)], metric) <= radius)
        add_edge(net.adjacency, i, j);
  sort_dedup(net.adjacency);
  fill_hops(net);
  return net;
}

Network build_network_from_edges(int n, const std::vector<std::pair<int, int>>& edges) {
  if (n < 1) throw InvalidInput("build_network_from_edges: n must be >= 1");
  Network net;
  net.n = n;
  net.adjacency.assign(std::size_t(n), {});
  for (const auto& [a, b] : edges) {
    if (a < 0 || a >= n || b < 0 || b >= n)
      throw InvalidInput("build_network_from_edges: unit id out of range: (" +
                         std::to_string(a) + "," + std::to_string(b) + ")");
    if (a == b) continue;  // self-loops carry no interference information
    add_edge(net.adjacency, a, b);
  }
  sort_dedup(net.adjacency);
  fill_hops(net);
  return net;
}

NeighborhoodIndex build_neighborhood_index(const Network& net,
                                           const std::vector<int>& treatments,
                                           int L, int K, Rng* sampler,
                                           bool cap_to_interference_range) {
  if (L < 1) throw InvalidInput("build_neighborhood_index: L must be >= 1");
  if (K < 1) throw InvalidInput("build_neighborhood_index: K must be >= 1");
  if (int(treatments.size()) != net.n)
    throw InvalidInput("build_neighborhood_index: treatments length != n");

  NeighborhoodIndex index;
  index.L = L;
  index.K = K;
  index.neighbors.assign(std::size_t(net.n), {});
  index.treatment_vector.assign(std::size_t(net.n), std::vector<double>(std::size_t(L), 0.0));
  index.pad_mask.assign(std::size_t(net.n), std::vector<bool>(std::size_t(L), true));

  // Ordering key shared by both construction modes.
  auto closer = [&](int i) {
    return [&net, i](int a, int b) {
      const auto da = net.dist(i, a), db = net.dist(i, b);
      if (da != db) return da < db;
      if (net.has_points()) {
        const double ma = net.metric_dist(i, a), mb = net.metric_dist(i, b);
        if (ma != mb) return ma < mb;
      }
      return a < b;
    };
  };

  std::vector<int> cand;
  for (int i = 0; i < net.n; ++i) {
    cand.clear();
    if (cap_to_interference_range) {
      for (int j = 0; j < net.n; ++j) {
        const auto d = net.dist(i, j);
        if (j != i && d != Network::kInfinite && d <= K) cand.push_back(j);
      }
      if (int(cand.size()) > L) {
        if (sampler == nullptr)
          throw InvalidInput(
              "build_neighborhood_index: sampler required to cap neighborhoods");
        cand = sampler->sample_without_replacement(cand, L);
      }
      std::sort(cand.begin(), cand.end(), closer(i));
    } else {
      for (int j = 0; j < net.n; ++j)
        if (j != i && net.dist(i, j) != Network::kInfinite) cand.push_back(j);
      std::sort(cand.begin(), cand.end(), closer(i));
      if (int(cand.size()) > L) cand.resize(std::size_t(L));
      for (int j : cand)
        if (net.dist(i, j) > K) {
          ++index.assumption3_violations;
          break;
        }
    }
    auto& nbrs = index.neighbors[std::size_t(i)];
    nbrs = cand;
    for (std::size_t k = 0; k < nbrs.size(); ++k) {
      index.treatment_vector[std::size_t(i)][k] = double(treatments[std::size_t(nbrs[k])]);
      index.pad_mask[std::size_t(i)][k] = false;
    }
  }
  return index;
}

DistanceShell distance_shells(const Network& net, int s_max) {
  if (s_max < 0) throw InvalidInput("distance_shells: s_max must be >= 0");
  DistanceShell out;
  out.s_max = s_max;
  out.shells.assign(std::size_t(s_max) + 1,
                    std::vector<std::vector<int>>(std::size_t(net.n)));
  out.avg_shell_size.assign(std::size_t(s_max) + 1, 0.0);
  for (int i = 0; i < net.n; ++i)
    for (int j = 0; j < net.n; ++j) {
      const auto d = net.dist(i, j);
      if (d != Network::kInfinite && d <= s_max)
        out.shells[std::size_t(d)][std::size_t(i)].push_back(j);
    }
  for (int s = 0; s <= s_max; ++s) {
    std::size_t total = 0;
    for (const auto& shell : out.shells[std::size_t(s)]) total += shell.size();
    out.avg_shell_size[std::size_t(s)] = double(total) / double(net.n);
  }
  return out;
}

std::vector<int> count_treated_within(const Network& net,
                                      const std::vector<int>& treatments, int K) {
  if (int(treatments.size()) != net.n)
    throw InvalidInput("count_treated_within: treatments length != n");
  std::vector<int> s(std::size_t(net.n), 0);
  for (int i = 0; i < net.n; ++i)
    for (int j = 0; j < net.n; ++j) {
      if (j == i) continue;
      const auto d = net.dist(i, j);
      if (d != Network::kInfinite && d <= K && treatments[std::size_t(j)] == 1)
        ++s[std::size_t(i)];
    }
  return s;
}

}  // namespace netdid
