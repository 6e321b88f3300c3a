#pragma once

#include "duopoly/types.hpp"

namespace duopoly::testing {

inline MarketConfig make_config(std::vector<double> q1, std::vector<double> q2, int d, double v,
                                double c) {
  MarketConfig cfg;
  cfg.v = v;
  cfg.c = c;
  cfg.demand = DemandModel::deterministic(d);
  cfg.sellers[0].probs = std::move(q1);
  cfg.sellers[1].probs = std::move(q2);
  return cfg;
}

// the running example: d = 3, v = 10, c = 6
inline MarketConfig fig_config() {
  return make_config({0.3, 0.2, 0.2, 0.3}, {0.4, 0.2, 0.2, 0.2}, 3, 10.0, 6.0);
}

}  // namespace duopoly::testing
