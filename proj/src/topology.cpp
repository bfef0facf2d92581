#include "bftsim/topology.hpp"

#include <algorithm>
#include <deque>
#include <numeric>
#include <ostream>
#include <sstream>

#include "bftsim/errors.hpp"

namespace bftsim::topology {

std::string to_string(TopologyKind kind) {
  switch (kind) {
    case TopologyKind::Clique: return "clique";
    case TopologyKind::FoldedClos: return "folded_clos";
    case TopologyKind::Dragonfly: return "dragonfly";
  }
  return "unknown";
}

TopologyKind parse_topology_kind(const std::string& name) {
  if (name == "clique") return TopologyKind::Clique;
  if (name == "folded_clos" || name == "foldedclos" || name == "fc") return TopologyKind::FoldedClos;
  if (name == "dragonfly" || name == "df") return TopologyKind::Dragonfly;
  throw ConfigError("unknown topology '" + name + "' (expected clique, folded_clos, dragonfly)");
}

std::string describe(const TopologyParams& params) {
  std::ostringstream os;
  switch (params.kind) {
    case TopologyKind::Clique: os << "Clique"; break;
    case TopologyKind::FoldedClos: os << "FoldedClos(" << params.nu_e << "," << params.nu_12 << ")"; break;
    case TopologyKind::Dragonfly: os << "Dragonfly(" << params.nu_d << ")"; break;
  }
  return os.str();
}

std::size_t TopologyGraph::link_count() const {
  std::size_t degree_sum = 0;
  for (const auto& adj : adjacency_) degree_sum += adj.size();
  return degree_sum / 2;
}

void TopologyGraph::add_link(SwitchId a, SwitchId b) {
  adjacency_[a].push_back(b);
  adjacency_[b].push_back(a);
}

void TopologyGraph::compute_distances() {
  const std::size_t count = switches_.size();
  distance_.assign(count * count, -1);
  for (SwitchId src = 0; src < count; ++src) {
    int* row = &distance_[src * count];
    std::deque<SwitchId> frontier{src};
    row[src] = 0;
    while (!frontier.empty()) {
      const SwitchId u = frontier.front();
      frontier.pop_front();
      for (SwitchId v : adjacency_[u]) {
        if (row[v] < 0) {
          row[v] = row[u] + 1;
          frontier.push_back(v);
        }
      }
    }
  }
  if (std::find(distance_.begin(), distance_.end(), -1) != distance_.end()) {
    throw StructuralError("topology " + describe(params_) + " is disconnected");
  }
}

void TopologyGraph::write_adjacency(std::ostream& out) const {
  for (SwitchId a = 0; a < adjacency_.size(); ++a) {
    for (SwitchId b : adjacency_[a]) {
      if (a < b) out << a << ' ' << b << '\n';
    }
  }
}

namespace {

// Level 1: ids [0, nu_e), level 2: [nu_e, 2nu_e), level 3: [2nu_e, 3nu_e).
// Level-1 switches form pods of nu_12; every level-1 switch of a pod links to
// each of the pod's nu_12 level-2 switches. The level-2 switch at position s
// of each pod belongs to plane s and links to all nu_e/nu_12 level-3 switches
// of that plane, so any two pods meet at level 3.
void build_folded_clos(std::vector<SwitchInfo>& sw, int nu_e, int nu_12, auto&& link) {
  const int pods = nu_e / nu_12;
  sw.resize(static_cast<std::size_t>(3 * nu_e));
  for (int i = 0; i < nu_e; ++i) sw[i] = {1, i / nu_12};
  for (int p = 0; p < pods; ++p) {
    for (int s = 0; s < nu_12; ++s) {
      const int l2 = nu_e + p * nu_12 + s;
      sw[l2] = {2, p};
      for (int j = 0; j < nu_12; ++j) link(p * nu_12 + j, l2);
      for (int t = 0; t < pods; ++t) {
        const int l3 = 2 * nu_e + s * pods + t;
        sw[l3] = {3, s};
        link(l2, l3);
      }
    }
  }
}

// Group g holds switches g*nu_d .. g*nu_d+nu_d-1, fully meshed. Switch j of
// group g has its global link to group h = (g+j+1) mod (nu_d+1), landing on
// switch nu_d-1-j there, which maps back to g. Each group pair gets one link.
void build_dragonfly(std::vector<SwitchInfo>& sw, int nu_d, auto&& link) {
  const int groups = nu_d + 1;
  sw.resize(static_cast<std::size_t>(groups * nu_d));
  for (int g = 0; g < groups; ++g) {
    for (int j = 0; j < nu_d; ++j) {
      sw[g * nu_d + j] = {1, g};
      for (int k = j + 1; k < nu_d; ++k) link(g * nu_d + j, g * nu_d + k);
      const int h = (g + j + 1) % groups;
      const int peer = nu_d - 1 - j;
      if (g < h) link(g * nu_d + j, h * nu_d + peer);
    }
  }
}

}  // namespace

TopologyGraph build_topology(const TopologyParams& params) {
  TopologyGraph g;
  g.params_ = params;
  auto link = [&g](int a, int b) { g.add_link(static_cast<SwitchId>(a), static_cast<SwitchId>(b)); };

  switch (params.kind) {
    case TopologyKind::Clique:
      return g;
    case TopologyKind::FoldedClos: {
      if (params.nu_e < 1 || params.nu_12 < 1) throw ConfigError("FoldedClos requires nu_e >= 1 and nu_12 >= 1");
      if (params.nu_e % params.nu_12 != 0) {
        throw ConfigError("FoldedClos requires nu_12 to divide nu_e (got " + describe(params) + ")");
      }
      g.adjacency_.resize(static_cast<std::size_t>(3 * params.nu_e));
      build_folded_clos(g.switches_, params.nu_e, params.nu_12, link);
      for (int i = 0; i < params.nu_e; ++i) g.edge_switches_.push_back(static_cast<SwitchId>(i));
      break;
    }
    case TopologyKind::Dragonfly: {
      if (params.nu_d < 2) throw ConfigError("Dragonfly requires nu_d >= 2");
      g.adjacency_.resize(static_cast<std::size_t>(params.nu_d * (params.nu_d + 1)));
      build_dragonfly(g.switches_, params.nu_d, link);
      for (SwitchId i = 0; i < g.adjacency_.size(); ++i) g.edge_switches_.push_back(i);
      break;
    }
  }
  for (auto& adj : g.adjacency_) std::sort(adj.begin(), adj.end());
  g.compute_distances();
  return g;
}

Placement place_validators(const TopologyGraph& graph, int n) {
  if (n < 1) throw ConfigError("place_validators requires n >= 1");
  Placement p;
  const auto& edges = graph.edge_switches();
  if (edges.empty()) {
    if (graph.kind() != TopologyKind::Clique) throw StructuralError("topology has no edge switches");
    p.max_per_switch = 1;
    p.min_per_switch = 1;
    return p;
  }
  // Visit groups in turn (first switch of every group, then the second, ...)
  // so groups stay balanced as well as switches.
  std::vector<std::pair<int, int>> key;
  std::vector<int> seen;
  for (SwitchId s : edges) {
    const int grp = graph.switches()[s].group;
    if (static_cast<std::size_t>(grp) >= seen.size()) seen.resize(static_cast<std::size_t>(grp) + 1, 0);
    key.emplace_back(seen[static_cast<std::size_t>(grp)]++, grp);
  }
  std::vector<std::size_t> order(edges.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return key[a] < key[b]; });
  const auto e = static_cast<int>(edges.size());
  p.edge_of.reserve(static_cast<std::size_t>(n));
  for (int v = 0; v < n; ++v) p.edge_of.push_back(edges[order[static_cast<std::size_t>(v % e)]]);
  p.max_per_switch = (n + e - 1) / e;
  p.min_per_switch = n / e;
  return p;
}

SwitchId next_hop(const TopologyGraph& graph, SwitchId current, SwitchId dest, sim::RngStream& rng) {
  if (current == dest) return current;
  const int remaining = graph.distance(current, dest);
  const auto& nbs = graph.neighbors(current);
  std::uint32_t count = 0;
  for (SwitchId nb : nbs) count += graph.distance(nb, dest) == remaining - 1 ? 1U : 0U;
  if (count == 0) {
    throw StructuralError("no minimal next hop from switch " + std::to_string(current) + " to " +
                          std::to_string(dest));
  }
  std::uint32_t pick = count == 1 ? 0 : rng.uniform_index(count);
  for (SwitchId nb : nbs) {
    if (graph.distance(nb, dest) == remaining - 1 && pick-- == 0) return nb;
  }
  return nbs.front();  // unreachable
}

double average_hop_distance(const TopologyGraph& graph, const Placement& placement) {
  if (!placement.attached()) return 0.0;
  const std::size_t n = placement.edge_of.size();
  if (n < 2) return 0.0;
  double total = 0.0;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      total += graph.distance(placement.edge_of[a], placement.edge_of[b]) + 1;
    }
  }
  return total / (static_cast<double>(n) * static_cast<double>(n - 1) / 2.0);
}

}  // namespace bftsim::topology
