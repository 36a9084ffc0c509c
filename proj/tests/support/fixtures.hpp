#pragma once

// Hand-built topologies with explicit gains.

#include <vector>

#include "skiswitch/network.hpp"

namespace fixture {

using skiswitch::BsKind;
using skiswitch::BsParams;

inline BsParams mbs(double tx = skiswitch::dbm_to_watts(33.0), double bandwidth = 10e6) {
  return BsParams{0, BsKind::Mbs, {250.0, 250.0}, tx, 20.0, bandwidth, 50};
}

inline BsParams sbs(std::size_t id, double tx = skiswitch::dbm_to_watts(23.0), double bandwidth = 10e6) {
  return BsParams{id, BsKind::Sbs, {10.0 * static_cast<double>(id), 10.0}, tx, 10.0, bandwidth, 10};
}

/// MBS plus `n_sbs` identical SBSs; `gains` is row-major [ue][bs].
inline skiswitch::Topology explicit_topology(std::size_t n_sbs, std::size_t n_ue, std::vector<double> gains,
                                             double noise = skiswitch::dbm_to_watts(-104.0),
                                             BsParams macro = mbs()) {
  std::vector<BsParams> bs{macro};
  for (std::size_t j = 1; j <= n_sbs; ++j) bs.push_back(sbs(j));
  std::vector<skiswitch::Position> ue(n_ue, skiswitch::Position{1.0, 1.0});
  return skiswitch::Topology({500.0, 500.0}, std::move(bs), std::move(ue), noise, std::move(gains));
}

inline std::vector<bool> all_on(std::size_t n_bs) { return std::vector<bool>(n_bs, true); }

}  // namespace fixture
