// Small fixture builders shared by the test files.
#pragma once

#include <utility>
#include <vector>

#include "netdid/estimators.hpp"
#include "netdid/panel.hpp"

namespace testutil {

inline Eigen::VectorXd vec(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), Eigen::Index(v.size()));
}

// Panel over an explicit network with a single covariate column; the
// neighborhood index takes the plain L nearest (no capping).
inline netdid::PanelData make_panel(netdid::Network net, const std::vector<double>& z,
                                    const std::vector<double>& d,
                                    const std::vector<double>& y1,
                                    const std::vector<double>& y2, int L, int K) {
  netdid::PanelData p;
  p.network = std::move(net);
  const int n = p.network.n;
  p.z = Eigen::MatrixXd(n, 1);
  for (int i = 0; i < n; ++i) p.z(i, 0) = z[std::size_t(i)];
  p.d = vec(d);
  p.y1 = vec(y1);
  p.y2 = vec(y2);
  std::vector<int> di(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) di[std::size_t(i)] = int(d[std::size_t(i)]);
  p.index = netdid::build_neighborhood_index(p.network, di, L, K);
  return p;
}

inline netdid::PanelData make_panel_edges(int n,
                                          const std::vector<std::pair<int, int>>& edges,
                                          const std::vector<double>& z,
                                          const std::vector<double>& d,
                                          const std::vector<double>& y1,
                                          const std::vector<double>& y2, int L, int K) {
  return make_panel(netdid::build_network_from_edges(n, edges), z, d, y1, y2, L, K);
}

}  // namespace testutil
