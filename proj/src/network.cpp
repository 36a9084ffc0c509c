#include "skiswitch/network.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "skiswitch/errors.hpp"

namespace skiswitch {

double distance(const Position& a, const Position& b) { return std::hypot(a.x - b.x, a.y - b.y); }

double PathLossModel::path_loss_db(double d, LinkKind link) const {
  const double clamped = std::max(d, min_distance);
  if (!(clamped > 0.0)) {
    throw DomainError("path loss needs a positive distance, got " + std::to_string(d));
  }
  const double km = std::log10(clamped / 1000.0);
  return link == LinkKind::Mbs ? mbs_intercept + mbs_slope * km : sbs_intercept + sbs_slope * km;
}

double channel_gain(double d, LinkKind link, const PathLossModel& model) {
  return std::pow(10.0, -model.path_loss_db(d, link) / 10.0);
}

namespace {

std::vector<double> compute_gains(const std::vector<BsParams>& bs, const std::vector<Position>& ue,
                                  const PathLossModel& model) {
  std::vector<double> gains(ue.size() * bs.size());
  for (std::size_t i = 0; i < ue.size(); ++i) {
    for (std::size_t j = 0; j < bs.size(); ++j) {
      const LinkKind link = bs[j].kind == BsKind::Mbs ? LinkKind::Mbs : LinkKind::Sbs;
      gains[i * bs.size() + j] = channel_gain(distance(ue[i], bs[j].pos), link, model);
    }
  }
  return gains;
}

}  // namespace

Topology::Topology(Area area, std::vector<BsParams> bs, std::vector<Position> ue, double noise_power,
                   PathLossModel path_loss)
    : area_(area),
      bs_(std::move(bs)),
      ue_(std::move(ue)),
      noise_power_(noise_power),
      path_loss_(path_loss),
      gains_(compute_gains(bs_, ue_, path_loss_)) {
  validate();
}

Topology::Topology(Area area, std::vector<BsParams> bs, std::vector<Position> ue, double noise_power,
                   std::vector<double> gains)
    : area_(area),
      bs_(std::move(bs)),
      ue_(std::move(ue)),
      noise_power_(noise_power),
      gains_(std::move(gains)) {
  validate();
}

void Topology::validate() const {
  if (!(area_.width > 0.0) || !(area_.height > 0.0)) {
    throw ConfigError("topology.area", "area must have positive width and height");
  }
  if (bs_.empty() || bs_[0].kind != BsKind::Mbs) {
    throw ConfigError("topology.bs", "BS 0 must be the macro BS");
  }
  if (!(noise_power_ > 0.0)) throw ConfigError("radio.noise_power", "noise power must be positive");
  for (std::size_t j = 0; j < bs_.size(); ++j) {
    const BsParams& b = bs_[j];
    if (b.id != j) throw ConfigError("topology.bs", "BS ids must equal their index");
    if ((b.kind == BsKind::Mbs) != (j == 0)) {
      throw ConfigError("topology.bs", "only BS 0 may be the macro BS");
    }
    if (!(b.tx_power > 0.0)) throw ConfigError("radio.tx_power", "transmit power must be positive");
    if (!(b.op_power_max > 0.0)) {
      throw ConfigError("radio.op_power", "operational power must be positive");
    }
    if (!(b.tx_fraction() <= 1.0)) {
      throw ConfigError("radio.tx_power", "transmit power exceeds the operational power");
    }
    if (!(b.bandwidth > 0.0)) throw ConfigError("radio.bandwidth", "bandwidth must be positive");
    if (b.max_users < 1) throw ConfigError("radio.max_users", "max users must be at least 1");
    if (j > 0 && b.max_users > bs_[0].max_users) {
      throw ConfigError("radio.sbs_max_users", "an SBS cannot serve more users than the MBS");
    }
  }
  if (gains_.size() != bs_.size() * ue_.size()) {
    throw ConfigError("topology.gain", "gain matrix does not match node counts");
  }
  for (double g : gains_) {
    if (!(g > 0.0) || !std::isfinite(g)) {
      throw ConfigError("topology.gain", "channel gains must be positive and finite");
    }
  }
}

Topology Topology::with_sbs_tx_power(double watts) const {
  Topology copy = *this;
  for (std::size_t j = 1; j < copy.bs_.size(); ++j) copy.bs_[j].tx_power = watts;
  copy.validate();
  return copy;
}

Topology place_nodes(const Area& area, std::size_t n_sbs, std::size_t n_ue, const RadioParams& radio,
                     const PathLossModel& path_loss, Rng& rng) {
  if (!(area.width > 0.0) || !(area.height > 0.0)) {
    throw ConfigError("topology.area", "area must have positive width and height");
  }
  if (n_ue < 1) throw ConfigError("topology.n_ue", "at least one UE is required");

  std::uniform_real_distribution<double> ux(0.0, area.width);
  std::uniform_real_distribution<double> uy(0.0, area.height);

  std::vector<BsParams> bs;
  bs.reserve(n_sbs + 1);
  bs.push_back({0, BsKind::Mbs, area.center(), radio.mbs_tx_power, radio.mbs_op_power,
                radio.mbs_bandwidth, radio.mbs_max_users});
  for (std::size_t j = 1; j <= n_sbs; ++j) {
    const double x = ux(rng);
    const double y = uy(rng);
    bs.push_back({j, BsKind::Sbs, {x, y}, radio.sbs_tx_power, radio.sbs_op_power,
                  radio.sbs_bandwidth, radio.sbs_max_users});
  }
  std::vector<Position> ue;
  ue.reserve(n_ue);
  for (std::size_t i = 0; i < n_ue; ++i) {
    const double x = ux(rng);
    const double y = uy(rng);
    ue.push_back({x, y});
  }
  return Topology(area, std::move(bs), std::move(ue), radio.noise_power, path_loss);
}

double sinr(std::size_t ue, std::size_t bs, const std::vector<bool>& sigma, const Topology& topo) {
  if (bs == 0 || bs >= topo.num_bs()) throw DomainError("sinr is defined for SBS indices only");
  if (!sigma[bs]) return 0.0;
  double interference = 0.0;
  for (std::size_t k = 1; k < topo.num_bs(); ++k) {
    if (k != bs && sigma[k]) interference += topo.bs(k).tx_power * topo.gain(ue, k);
  }
  return topo.bs(bs).tx_power * topo.gain(ue, bs) / (interference + topo.noise_power());
}

double snr_mbs(std::size_t ue, const Topology& topo) {
  return topo.bs(0).tx_power * topo.gain(ue, 0) / topo.noise_power();
}

double link_quality(std::size_t ue, std::size_t bs, const std::vector<bool>& sigma,
                    const Topology& topo) {
  return bs == 0 ? snr_mbs(ue, topo) : sinr(ue, bs, sigma, topo);
}

NetworkState associate(const std::vector<bool>& sigma, const Topology& topo) {
  if (sigma.size() != topo.num_bs()) throw DomainError("sigma size does not match BS count");
  if (!sigma[0]) throw DomainError("the macro BS is always ON");

  NetworkState state;
  state.sigma = sigma;
  state.assoc.assign(topo.num_bs(), {});
  state.serving.assign(topo.num_ue(), 0);
  for (std::size_t i = 0; i < topo.num_ue(); ++i) {
    std::size_t best = 0;
    double best_quality = snr_mbs(i, topo);
    for (std::size_t j = 1; j < topo.num_bs(); ++j) {
      if (!sigma[j]) continue;
      const double q = sinr(i, j, sigma, topo);
      if (q > best_quality) {
        best_quality = q;
        best = j;
      }
    }
    state.serving[i] = best;
    state.assoc[best].push_back(i);
  }
  return state;
}

double rate(std::size_t ue, const NetworkState& state, const Topology& topo) {
  const std::size_t j = state.serving.at(ue);
  const std::size_t members = state.load(j);
  if (members == 0) throw InvariantViolation("UE served by a BS with an empty association set");
  const double gamma = link_quality(ue, j, state.sigma, topo);
  return topo.bs(j).bandwidth / static_cast<double>(members) * std::log2(1.0 + gamma);
}

double bs_delay(std::size_t bs, const NetworkState& state, const Topology& topo, double file_bits) {
  double total = 0.0;
  for (std::size_t i : state.assoc.at(bs)) {
    const double c = rate(i, state, topo);
    if (!(c > 0.0)) {
      throw UnserviceableError("UE " + std::to_string(i) + " has zero rate at BS " +
                               std::to_string(bs));
    }
    total += file_bits / c;
  }
  return total;
}

nlohmann::json topology_to_json(const Topology& topo) {
  nlohmann::json doc;
  doc["area"] = {{"width", topo.area().width}, {"height", topo.area().height}};
  doc["noise_power_dbm"] = watts_to_dbm(topo.noise_power());
  const PathLossModel& pl = topo.path_loss();
  doc["path_loss"] = {{"mbs_intercept", pl.mbs_intercept}, {"mbs_slope", pl.mbs_slope},
                      {"sbs_intercept", pl.sbs_intercept}, {"sbs_slope", pl.sbs_slope},
                      {"min_distance", pl.min_distance}};
  nlohmann::json bs = nlohmann::json::array();
  for (const BsParams& b : topo.bs()) {
    bs.push_back({{"id", b.id},
                  {"kind", b.kind == BsKind::Mbs ? "MBS" : "SBS"},
                  {"x", b.pos.x},
                  {"y", b.pos.y},
                  {"tx_power_dbm", watts_to_dbm(b.tx_power)},
                  {"op_power_w", b.op_power_max},
                  {"bandwidth_hz", b.bandwidth},
                  {"max_users", b.max_users}});
  }
  doc["bs"] = std::move(bs);
  nlohmann::json ue = nlohmann::json::array();
  for (const Position& p : topo.ue()) ue.push_back({{"x", p.x}, {"y", p.y}});
  doc["ue"] = std::move(ue);
  return doc;
}

Topology topology_from_json(const nlohmann::json& doc) {
  try {
    const Area area{doc.at("area").at("width").get<double>(),
                    doc.at("area").at("height").get<double>()};
    const auto& pl = doc.at("path_loss");
    const PathLossModel model{pl.at("mbs_intercept").get<double>(), pl.at("mbs_slope").get<double>(),
                              pl.at("sbs_intercept").get<double>(), pl.at("sbs_slope").get<double>(),
                              pl.at("min_distance").get<double>()};
    std::vector<BsParams> bs;
    for (const auto& b : doc.at("bs")) {
      const std::string kind = b.at("kind").get<std::string>();
      if (kind != "MBS" && kind != "SBS") throw ConfigError("bs.kind", "expected MBS or SBS");
      bs.push_back({b.at("id").get<std::size_t>(), kind == "MBS" ? BsKind::Mbs : BsKind::Sbs,
                    {b.at("x").get<double>(), b.at("y").get<double>()},
                    dbm_to_watts(b.at("tx_power_dbm").get<double>()),
                    b.at("op_power_w").get<double>(),
                    b.at("bandwidth_hz").get<double>(), b.at("max_users").get<std::size_t>()});
    }
    std::vector<Position> ue;
    for (const auto& p : doc.at("ue")) ue.push_back({p.at("x").get<double>(), p.at("y").get<double>()});
    return Topology(area, std::move(bs), std::move(ue),
                    dbm_to_watts(doc.at("noise_power_dbm").get<double>()), model);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("topology", std::string("malformed topology document: ") + e.what());
  }
}

}  // namespace skiswitch
