#pragma once

// Datacenter topologies: the zero-delay clique, a 3-level Folded-Clos and a
// one-parameter Dragonfly. Validators attach to edge switches; messages are
// routed over minimal-hop paths with a uniformly random choice among
// equivalent next hops (ROMM).

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "bftsim/sim_core.hpp"

namespace bftsim::topology {

enum class TopologyKind { Clique, FoldedClos, Dragonfly };

std::string to_string(TopologyKind kind);
TopologyKind parse_topology_kind(const std::string& name);

struct TopologyParams {
  TopologyKind kind = TopologyKind::Clique;
  int nu_e = 0;   // Folded-Clos switches per level
  int nu_12 = 0;  // Folded-Clos up-links per level-1 switch
  int nu_d = 0;   // Dragonfly switches per group

  static TopologyParams clique() { return {}; }
  static TopologyParams folded_clos(int nu_e, int nu_12) { return {TopologyKind::FoldedClos, nu_e, nu_12, 0}; }
  static TopologyParams dragonfly(int nu_d) { return {TopologyKind::Dragonfly, 0, 0, nu_d}; }

  friend bool operator==(const TopologyParams&, const TopologyParams&) = default;
};

std::string describe(const TopologyParams& params);

struct SwitchInfo {
  int level = 1;  // Folded-Clos level 1..3; always 1 for Dragonfly
  int group = 0;  // Folded-Clos pod (level 1-2) or plane (level 3); Dragonfly group
};

using SwitchId = std::uint32_t;

class TopologyGraph {
 public:
  [[nodiscard]] TopologyKind kind() const { return params_.kind; }
  [[nodiscard]] const TopologyParams& params() const { return params_; }
  [[nodiscard]] std::size_t switch_count() const { return switches_.size(); }
  [[nodiscard]] const std::vector<SwitchInfo>& switches() const { return switches_; }
  [[nodiscard]] const std::vector<SwitchId>& neighbors(SwitchId s) const { return adjacency_.at(s); }
  [[nodiscard]] const std::vector<SwitchId>& edge_switches() const { return edge_switches_; }
  [[nodiscard]] std::size_t link_count() const;

  // Minimal number of links between two switches.
  [[nodiscard]] int distance(SwitchId a, SwitchId b) const { return distance_[a * switch_count() + b]; }

  // Undirected edge list, one "a b" pair per line with a < b.
  void write_adjacency(std::ostream& out) const;

 private:
  friend TopologyGraph build_topology(const TopologyParams& params);
  void add_link(SwitchId a, SwitchId b);
  void compute_distances();

  TopologyParams params_;
  std::vector<SwitchInfo> switches_;
  std::vector<std::vector<SwitchId>> adjacency_;
  std::vector<SwitchId> edge_switches_;
  std::vector<int> distance_;
};

// Throws ConfigError when nu_12 does not divide nu_e, a size is < 1, or nu_d < 2.
TopologyGraph build_topology(const TopologyParams& params);

struct Placement {
  std::vector<SwitchId> edge_of;  // validator -> edge switch; empty for a clique
  int max_per_switch = 0;
  int min_per_switch = 0;

  [[nodiscard]] bool attached() const { return !edge_of.empty(); }
};

// Round-robin over edge switches, interleaving groups, so per-switch and
// per-group counts each differ by at most one.
Placement place_validators(const TopologyGraph& graph, int n);

// A neighbor of `current` on a minimal path to `dest`, uniform over all such
// neighbors. Returns `current` when current == dest.
SwitchId next_hop(const TopologyGraph& graph, SwitchId current, SwitchId dest, sim::RngStream& rng);

// Mean over unordered validator pairs of the number of switches on a minimal
// path, counting both edge switches (a same-switch pair counts 1). Zero for a
// clique.
double average_hop_distance(const TopologyGraph& graph, const Placement& placement);

}  // namespace bftsim::topology
