#include "bftsim/config.hpp"

#include "bftsim/errors.hpp"

#include <cmath>
#include <fstream>

namespace bftsim {

using nlohmann::json;

namespace {

void check_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string(name) + " must be positive and finite");
}

topology::TopologyParams topology_from_json(const json& j, topology::TopologyParams base) {
  if (j.is_string()) {
    base.kind = topology::parse_topology_kind(j.get<std::string>());
    return base;
  }
  if (!j.is_object()) throw ConfigError("topology must be a string or an object");
  for (const auto& [key, value] : j.items()) {
    if (key == "kind") {
      base.kind = topology::parse_topology_kind(value.get<std::string>());
    } else if (key == "nu_e") {
      base.nu_e = value.get<int>();
    } else if (key == "nu_12") {
      base.nu_12 = value.get<int>();
    } else if (key == "nu_d") {
      base.nu_d = value.get<int>();
    } else {
      throw ConfigError("unknown topology key: " + key);
    }
  }
  return base;
}

}  // namespace

void validate(const SimConfig& c) {
  if (c.n < 4) throw ConfigError("n must be at least 4");
  if (c.n_f < 0) throw ConfigError("n_f must be non-negative");
  if (c.n_f > protocol::max_faults(c.n)) {
    throw ConfigError("n_f = " + std::to_string(c.n_f) + " exceeds f = " + std::to_string(protocol::max_faults(c.n)));
  }
  if (c.instances < 1) throw ConfigError("instances must be at least 1");
  if (c.chains < 1 || c.chains > 64) throw ConfigError("chains must be in [1, 64]");
  check_positive(c.tau0, "tau0");
  check_positive(c.rv, "rv");
  check_positive(c.rs, "rs");
  if (c.horizon < 0.0 || !std::isfinite(c.horizon)) throw ConfigError("horizon must be non-negative");
  if (c.topology.kind != topology::TopologyKind::Clique) topology::build_topology(c.topology);
}

std::string to_string(sim::ServiceDistribution d) {
  return d == sim::ServiceDistribution::Exponential ? "exponential" : "deterministic";
}

sim::ServiceDistribution parse_distribution(const std::string& name) {
  if (name == "exponential" || name == "exp") return sim::ServiceDistribution::Exponential;
  if (name == "deterministic" || name == "det") return sim::ServiceDistribution::Deterministic;
  throw ConfigError("unknown service distribution: " + name);
}

json to_json(const SimConfig& c) {
  json topo = {{"kind", topology::to_string(c.topology.kind)}};
  if (c.topology.kind == topology::TopologyKind::FoldedClos) {
    topo["nu_e"] = c.topology.nu_e;
    topo["nu_12"] = c.topology.nu_12;
  } else if (c.topology.kind == topology::TopologyKind::Dragonfly) {
    topo["nu_d"] = c.topology.nu_d;
  }
  return json{
      {"protocol", protocol::to_string(c.protocol)},
      {"leader", protocol::to_string(c.leader_policy())},
      {"topology", topo},
      {"n", c.n},
      {"n_f", c.n_f},
      {"tau0", c.tau0},
      {"rv", c.rv},
      {"rs", c.rs},
      {"validator_service", to_string(c.validator_service)},
      {"switch_service", to_string(c.switch_service)},
      {"seed", c.seed},
      {"instances", c.instances},
      {"chains", c.chains},
      {"horizon", c.effective_horizon()},
  };
}

SimConfig config_from_json(const json& j, SimConfig base) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "protocol") {
        base.protocol = protocol::parse_protocol(value.get<std::string>());
      } else if (key == "leader") {
        base.leader = protocol::parse_leader_policy(value.get<std::string>());
      } else if (key == "topology") {
        base.topology = topology_from_json(value, base.topology);
      } else if (key == "n") {
        base.n = value.get<int>();
      } else if (key == "n_f") {
        base.n_f = value.get<int>();
      } else if (key == "tau0") {
        base.tau0 = value.get<double>();
      } else if (key == "rv") {
        base.rv = value.get<double>();
      } else if (key == "rs") {
        base.rs = value.get<double>();
      } else if (key == "validator_service") {
        base.validator_service = parse_distribution(value.get<std::string>());
      } else if (key == "switch_service") {
        base.switch_service = parse_distribution(value.get<std::string>());
      } else if (key == "seed") {
        base.seed = value.get<std::uint64_t>();
      } else if (key == "instances") {
        base.instances = value.get<int>();
      } else if (key == "chains") {
        base.chains = value.get<int>();
      } else if (key == "horizon") {
        base.horizon = value.get<double>();
      } else {
        throw ConfigError("unknown config key: " + key);
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  }
  return base;
}

SimConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("cannot parse " + path + ": " + e.what());
  }
  return config_from_json(j);
}

model::ModelParams model_params(const SimConfig& c) {
  model::ModelParams p;
  p.protocol = c.protocol;
  p.topology = c.topology;
  p.n = c.n;
  p.n_f = c.n_f;
  p.tau0 = c.tau0;
  p.rv = c.rv;
  p.rs = model::multichain_effective_rate(c.rs, c.chains);
  constexpr double kTiny = 1e-12;
  p.sigma_v = c.validator_service == sim::ServiceDistribution::Exponential ? 1.0 / p.rv : kTiny;
  p.sigma_s = c.switch_service == sim::ServiceDistribution::Exponential ? 1.0 / p.rs : kTiny;
  return model::with_measured_hops(p);
}

}  // namespace bftsim
