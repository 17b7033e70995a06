// Two-period panel aligned to an interference network: covariates, binary
// treatment, both outcome waves, and the neighborhood index the estimators
// condition on.
#pragma once

#include <Eigen/Dense>

#include "netdid/graph.hpp"

namespace netdid {

struct PanelData {
  Eigen::MatrixXd z;   // n x p covariates
  Eigen::VectorXd d;   // binary treatment
  Eigen::VectorXd y1;  // pre-period outcome
  Eigen::VectorXd y2;  // post-period outcome
  Network network;
  NeighborhoodIndex index;

  int n() const { return int(d.size()); }
  Eigen::VectorXd delta_y() const { return y2 - y1; }

  void validate() const {
    const Eigen::Index m = d.size();
    if (m < 1) throw InvalidInput("PanelData: empty panel");
    if (z.rows() != m || y1.size() != m || y2.size() != m)
      throw InvalidInput("PanelData: array lengths differ");
    if (network.n != int(m)) throw InvalidInput("PanelData: network size != n");
    if (int(index.neighbors.size()) != int(m))
      throw InvalidInput("PanelData: index size != n");
    for (Eigen::Index i = 0; i < m; ++i) {
      if (d[i] != 0.0 && d[i] != 1.0)
        throw InvalidInput("PanelData: treatment must be binary");
      if (!std::isfinite(y1[i]) || !std::isfinite(y2[i]))
        throw InvalidInput("PanelData: outcomes must be finite");
    }
  }
};

}  // namespace netdid
