#pragma once

// Node placement, channel gains, SINR/SNR, max-SINR association, per-UE rate
// and per-BS transmission delay for a two-tier network: one grid-powered
// macro BS (index 0) at the area center plus J self-powered small cells.

#include <cstddef>
#include <span>
#include <vector>

#include <json.hpp>

#include "skiswitch/random.hpp"
#include "skiswitch/units.hpp"

namespace skiswitch {

struct Position {
  double x = 0.0;  // meters
  double y = 0.0;  // meters

  bool operator==(const Position&) const = default;
};

double distance(const Position& a, const Position& b);

/// Rectangular service area anchored at the origin.
struct Area {
  double width = 500.0;   // meters
  double height = 500.0;  // meters

  bool contains(const Position& p) const {
    return p.x >= 0.0 && p.x <= width && p.y >= 0.0 && p.y <= height;
  }
  Position center() const { return {width / 2.0, height / 2.0}; }
  bool operator==(const Area&) const = default;
};

enum class BsKind { Mbs, Sbs };
enum class LinkKind { Mbs, Sbs };

/// Log-distance path loss PL(d) = intercept + slope * log10(d / 1 km), in dB.
/// Distances below `min_distance` are clamped to it.
struct PathLossModel {
  double mbs_intercept = 128.1;
  double mbs_slope = 37.6;
  double sbs_intercept = 140.7;
  double sbs_slope = 36.7;
  double min_distance = 1.0;  // meters

  double path_loss_db(double d, LinkKind link) const;
  bool operator==(const PathLossModel&) const = default;
};

/// Linear channel gain 10^(-PL(d)/10). Throws DomainError for d <= 0 after clamping.
double channel_gain(double d, LinkKind link, const PathLossModel& model = {});

struct BsParams {
  std::size_t id = 0;
  BsKind kind = BsKind::Mbs;
  Position pos;
  double tx_power = 0.0;      // watts
  double op_power_max = 0.0;  // watts, consumption at full utilization
  double bandwidth = 0.0;     // Hz
  std::size_t max_users = 1;

  /// Fraction of the operational power radiated, tx_power = a * op_power_max.
  double tx_fraction() const { return tx_power / op_power_max; }
  bool operator==(const BsParams&) const = default;
};

/// Radio parameters shared by every BS of a tier (defaults: Table 1 values).
struct RadioParams {
  double mbs_tx_power = dbm_to_watts(33.0);
  double sbs_tx_power = dbm_to_watts(23.0);
  double mbs_op_power = 20.0;  // W
  double sbs_op_power = 10.0;  // W
  double mbs_bandwidth = 10e6;  // Hz
  double sbs_bandwidth = 10e6;  // Hz
  std::size_t mbs_max_users = 50;
  std::size_t sbs_max_users = 10;
  double noise_power = dbm_to_watts(-104.0);

  bool operator==(const RadioParams&) const = default;
};

/// Immutable node placement plus the UE x BS channel-gain matrix.
class Topology {
 public:
  /// Gains computed from positions with `path_loss`.
  Topology(Area area, std::vector<BsParams> bs, std::vector<Position> ue, double noise_power,
           PathLossModel path_loss = {});
  /// Explicit gains, row-major [ue][bs].
  Topology(Area area, std::vector<BsParams> bs, std::vector<Position> ue, double noise_power,
           std::vector<double> gains);

  const Area& area() const { return area_; }
  const std::vector<BsParams>& bs() const { return bs_; }
  const BsParams& bs(std::size_t j) const { return bs_[j]; }
  const std::vector<Position>& ue() const { return ue_; }
  const PathLossModel& path_loss() const { return path_loss_; }
  double noise_power() const { return noise_power_; }
  double gain(std::size_t ue, std::size_t bs) const { return gains_[ue * bs_.size() + bs]; }

  std::size_t num_bs() const { return bs_.size(); }
  std::size_t num_sbs() const { return bs_.size() - 1; }
  std::size_t num_ue() const { return ue_.size(); }

  /// Copy with every SBS transmitting at `watts`; gains are unchanged.
  Topology with_sbs_tx_power(double watts) const;

 private:
  void validate() const;

  Area area_;
  std::vector<BsParams> bs_;
  std::vector<Position> ue_;
  double noise_power_;
  PathLossModel path_loss_;
  std::vector<double> gains_;
};

/// Places the MBS at the area center and SBSs then UEs uniformly at random.
Topology place_nodes(const Area& area, std::size_t n_sbs, std::size_t n_ue,
                     const RadioParams& radio, const PathLossModel& path_loss, Rng& rng);

/// ON/OFF vector plus the resulting association. Built by `associate`.
struct NetworkState {
  std::vector<bool> sigma;                      // per BS, sigma[0] is always true
  std::vector<std::vector<std::size_t>> assoc;  // per BS, UE indices in ascending order
  std::vector<std::size_t> serving;             // per UE, serving BS index

  std::size_t load(std::size_t bs) const { return assoc[bs].size(); }
};

/// SINR at `ue` from SBS `bs`; interference sums over the other ON SBSs only.
double sinr(std::size_t ue, std::size_t bs, const std::vector<bool>& sigma, const Topology& topo);

/// SNR at `ue` from the MBS; the tiers use disjoint bands so SBSs never interfere.
double snr_mbs(std::size_t ue, const Topology& topo);

/// SINR for an SBS, SNR for the MBS.
double link_quality(std::size_t ue, std::size_t bs, const std::vector<bool>& sigma,
                    const Topology& topo);

/// Max-SINR/SNR association over ON BSs; ties go to the lowest BS index.
NetworkState associate(const std::vector<bool>& sigma, const Topology& topo);

/// Round-robin equal share of the serving BS bandwidth: (B / |I_j|) log2(1 + gamma).
double rate(std::size_t ue, const NetworkState& state, const Topology& topo);

/// Sum over the BS's users of file_bits / rate. Zero for an empty set; throws
/// UnserviceableError when a member has zero rate.
double bs_delay(std::size_t bs, const NetworkState& state, const Topology& topo, double file_bits);

/// Scenario replay document: positions in meters, powers in dBm. Gains are omitted
/// and recomputed from the stored path-loss model on load.
nlohmann::json topology_to_json(const Topology& topo);
Topology topology_from_json(const nlohmann::json& doc);

}  // namespace skiswitch
