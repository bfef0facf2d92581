#pragma once

// Closed-loop consensus simulation: validators and switches are FIFO
// single-server stations, links are free, and each commit immediately starts
// the next instance.

#include "bftsim/config.hpp"
#include "bftsim/protocols.hpp"

#include <cstdint>
#include <ostream>
#include <vector>

namespace bftsim {

class Observer {
 public:
  virtual ~Observer() = default;
  // A validator finished servicing `m` and is about to handle it.
  virtual void on_processed(double /*time*/, const protocol::Message& /*m*/) {}
  virtual void on_commit(double /*time*/, std::uint16_t /*chain*/, protocol::ValidatorId /*who*/,
                         const protocol::CommitRecord& /*rec*/) {}
};

struct SimResult {
  // Per chain, time between successive first commits (instance 0 from t = 0).
  std::vector<std::vector<double>> instance_times;
  // Per chain, the block decided by the first commit of each instance.
  std::vector<std::vector<protocol::BlockId>> decided;
  std::vector<protocol::ValidatorId> crashed;
  double mean_time = 0.0;
  std::size_t completed = 0;
  double end_time = 0.0;
  std::uint64_t events = 0;
  std::uint64_t validator_messages = 0;
  std::uint64_t switch_messages = 0;
  // Instances decided after at least one round or view change.
  std::uint64_t round_change_instances = 0;
  // Commits of a block other than the one first decided for that instance.
  std::uint64_t divergent_commits = 0;
  // Commits backed by fewer votes than the deciding phase requires.
  std::uint64_t subquorum_commits = 0;
  double h_t = 0.0;
};

// Runs until some chain has completed `c.instances` instances. Throws
// ConfigError for an invalid config and SimulationError when the livelock
// horizon passes without a commit.
SimResult run_simulation(const SimConfig& c, Observer* observer = nullptr, std::ostream* trace = nullptr);

}  // namespace bftsim
