#pragma once

#include "bftsim/model.hpp"
#include "bftsim/protocols.hpp"
#include "bftsim/sim_core.hpp"
#include "bftsim/topology.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>

namespace bftsim {

struct SimConfig {
  protocol::Protocol protocol = protocol::Protocol::HotStuff;
  // Unset means the protocol default: rotation for IBFT, random for HotStuff.
  std::optional<protocol::LeaderPolicy> leader;
  topology::TopologyParams topology;
  int n = 16;
  int n_f = 0;
  double tau0 = 1e6;
  double rv = 1.0 / 3.0;
  double rs = 9.0;
  sim::ServiceDistribution validator_service = sim::ServiceDistribution::Exponential;
  sim::ServiceDistribution switch_service = sim::ServiceDistribution::Exponential;
  std::uint64_t seed = 1;
  int instances = 1000;
  int chains = 1;
  // Longest simulated stretch allowed without a new commit; 0 picks
  // 4096*tau0 + 1e7.
  double horizon = 0.0;

  [[nodiscard]] protocol::LeaderPolicy leader_policy() const {
    return leader.value_or(protocol::default_leader_policy(protocol));
  }
  [[nodiscard]] double effective_horizon() const { return horizon > 0.0 ? horizon : 4096.0 * tau0 + 1e7; }
};

// Throws ConfigError naming the first violated rule.
void validate(const SimConfig& c);

std::string to_string(sim::ServiceDistribution d);
sim::ServiceDistribution parse_distribution(const std::string& name);

nlohmann::json to_json(const SimConfig& c);
// Fields absent from `j` keep the value from `base`; unknown keys are errors.
SimConfig config_from_json(const nlohmann::json& j, SimConfig base = {});
SimConfig load_config(const std::string& path);

// Model parameters for the same system. With c chains the model sees one
// chain on switches of rate r_s / c; sigma follows the service distributions.
model::ModelParams model_params(const SimConfig& c);

}  // namespace bftsim
