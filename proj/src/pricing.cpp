#include "skiswitch/pricing.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "skiswitch/energy.hpp"
#include "skiswitch/errors.hpp"

namespace skiswitch {

void CostWeights::validate() const {
  if (!(alpha_d >= 0.0)) throw ConfigError("cost.alpha_d", "must be non-negative");
  if (!(alpha_p >= 0.0)) throw ConfigError("cost.alpha_p", "must be non-negative");
  if (!(alpha_b >= 0.0) || alpha_b > 1.0) throw ConfigError("cost.alpha_b", "must lie in [0, 1]");
}

double rent_price(std::size_t bs, const NetworkState& state, const Topology& topo,
                  const CostWeights& w, double q, double file_bits) {
  if (bs == 0 || bs >= topo.num_bs()) throw DomainError("rent is defined for SBS indices only");
  const double delay = w.alpha_d == 0.0 ? 0.0 : bs_delay(bs, state, topo, file_bits);
  const double power = bs_power(topo.bs(bs), state.load(bs), q);
  return w.alpha_d * delay + w.alpha_p * power;
}

double mbs_delay_share(const std::vector<std::size_t>& members, const Topology& topo,
                       double file_bits, std::size_t total_ue) {
  if (members.empty()) return 0.0;
  if (total_ue == 0) throw DomainError("total UE count must be positive");
  const double share = topo.bs(0).bandwidth / static_cast<double>(total_ue);
  double total = 0.0;
  for (std::size_t i : members) {
    const double c = share * std::log2(1.0 + snr_mbs(i, topo));
    if (!(c > 0.0)) throw UnserviceableError("UE " + std::to_string(i) + " has zero MBS rate");
    total += file_bits / c;
  }
  return total;
}

double mbs_power_share(std::size_t n_members, const BsParams& mbs, double q) {
  const double utilization = static_cast<double>(n_members) / static_cast<double>(mbs.max_users);
  return utilization * (1.0 - q) * mbs.op_power_max + q * mbs.op_power_max;
}

double buy_price(double phi, double psi, const CostWeights& w, double period) {
  if (!(period > 0.0)) throw DomainError("period must be positive");
  return w.alpha_b * (w.alpha_d * phi + w.alpha_p * psi) * period;
}

double offline_cost(double rent, double buy, double u, double period) {
  if (u < 0.0 || u > period) throw DomainError("u must lie in [0, period]");
  return std::min(rent * u, buy);
}

std::vector<PriceTag> freeze_prices(const Topology& topo, const CostWeights& w, double q,
                                    double file_bits, double period, double at) {
  const NetworkState all_on = associate(std::vector<bool>(topo.num_bs(), true), topo);
  std::vector<PriceTag> tags;
  tags.reserve(topo.num_sbs());
  for (std::size_t j = 1; j < topo.num_bs(); ++j) {
    PriceTag tag;
    tag.sbs = j;
    tag.frozen_at = at;
    tag.rent = rent_price(j, all_on, topo, w, q, file_bits);
    const auto& members = all_on.assoc[j];
    tag.used = !members.empty();
    if (tag.used) {
      const double phi = mbs_delay_share(members, topo, file_bits, topo.num_ue());
      const double psi = mbs_power_share(members.size(), topo.bs(0), q);
      tag.buy = buy_price(phi, psi, w, period);
    }
    tags.push_back(tag);
  }
  return tags;
}

}  // namespace skiswitch
