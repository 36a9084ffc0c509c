#pragma once

// Rent and buy prices for small cells, and the offline ski-rental cost.

#include <cstddef>
#include <vector>

#include "skiswitch/network.hpp"

namespace skiswitch {

struct CostWeights {
  double alpha_d = 0.05;  // cost per second of delay
  double alpha_p = 0.05;  // cost per watt
  double alpha_b = 0.05;  // fraction of the worst-case MBS cost charged on handover

  void validate() const;
  bool operator==(const CostWeights&) const = default;
};

/// Per-SBS prices for one period.
struct PriceTag {
  std::size_t sbs = 0;     // BS index, >= 1
  double rent = 0.0;       // cost per second
  double buy = 0.0;        // cost
  double frozen_at = 0.0;  // seconds, start of the period
  bool used = true;        // false when the SBS had no UEs in the all-ON association
};

/// alpha_d * delay + alpha_p * power for SBS `bs` on the given state.
double rent_price(std::size_t bs, const NetworkState& state, const Topology& topo,
                  const CostWeights& w, double q, double file_bits);

/// Worst-case MBS delay for `members`, splitting the MBS band over all `total_ue` UEs.
double mbs_delay_share(const std::vector<std::size_t>& members, const Topology& topo,
                       double file_bits, std::size_t total_ue);

/// MBS power attributable to `n_members` extra users.
double mbs_power_share(std::size_t n_members, const BsParams& mbs, double q);

/// alpha_b * (alpha_d * phi + alpha_p * psi) * period.
double buy_price(double phi, double psi, const CostWeights& w, double period);

/// min(rent * u, buy).
double offline_cost(double rent, double buy, double u, double period);

/// Prices for every SBS from the all-ON association at time `at`.
std::vector<PriceTag> freeze_prices(const Topology& topo, const CostWeights& w, double q,
                                    double file_bits, double period, double at);

}  // namespace skiswitch
