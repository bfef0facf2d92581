#include "bftsim/errors.hpp"
#include "bftsim/topology.hpp"

#include <doctest.h>

#include <deque>
#include <map>
#include <set>

using namespace bftsim;
using namespace bftsim::topology;

namespace {

// Independent all-pairs BFS over the adjacency lists.
std::vector<std::vector<int>> bfs_all_pairs(const TopologyGraph& g) {
  const std::size_t count = g.switch_count();
  std::vector<std::vector<int>> dist(count, std::vector<int>(count, -1));
  for (std::size_t s = 0; s < count; ++s) {
    std::deque<std::size_t> todo{s};
    dist[s][s] = 0;
    while (!todo.empty()) {
      const auto u = todo.front();
      todo.pop_front();
      for (SwitchId v : g.neighbors(static_cast<SwitchId>(u))) {
        if (dist[s][v] < 0) {
          dist[s][v] = dist[s][u] + 1;
          todo.push_back(v);
        }
      }
    }
  }
  return dist;
}

double hop_oracle(const TopologyGraph& g, const Placement& p) {
  const auto dist = bfs_all_pairs(g);
  double sum = 0.0;
  double pairs = 0.0;
  for (std::size_t a = 0; a < p.edge_of.size(); ++a) {
    for (std::size_t b = a + 1; b < p.edge_of.size(); ++b) {
      sum += dist[p.edge_of[a]][p.edge_of[b]] + 1;
      pairs += 1.0;
    }
  }
  return sum / pairs;
}

int count_level(const TopologyGraph& g, SwitchId s, int level) {
  int c = 0;
  for (SwitchId v : g.neighbors(s)) c += g.switches()[v].level == level;
  return c;
}

}  // namespace

TEST_CASE("Folded-Clos(8,4) wiring") {
  const auto g = build_topology(TopologyParams::folded_clos(8, 4));
  CHECK(g.switch_count() == 24);
  CHECK(g.edge_switches().size() == 8);
  for (SwitchId s = 0; s < g.switch_count(); ++s) {
    const int level = g.switches()[s].level;
    if (level == 1) {
      CHECK(count_level(g, s, 2) == 4);
      CHECK(g.neighbors(s).size() == 4);
    } else if (level == 2) {
      CHECK(count_level(g, s, 3) == 2);
    }
  }
}

TEST_CASE("Dragonfly wiring") {
  const auto g = build_topology(TopologyParams::dragonfly(3));
  CHECK(g.switch_count() == 12);
  for (SwitchId s = 0; s < g.switch_count(); ++s) {
    int intra = 0;
    int inter = 0;
    for (SwitchId v : g.neighbors(s)) (g.switches()[v].group == g.switches()[s].group ? intra : inter)++;
    CHECK(intra == 2);
    CHECK(inter == 1);
  }
  CHECK(build_topology(TopologyParams::dragonfly(4)).switch_count() == 20);
}

TEST_CASE("invalid topology sizes") {
  CHECK_THROWS_AS(build_topology(TopologyParams::folded_clos(8, 3)), ConfigError);
  CHECK_THROWS_AS(build_topology(TopologyParams::folded_clos(0, 1)), ConfigError);
  CHECK_THROWS_AS(build_topology(TopologyParams::dragonfly(1)), ConfigError);
  CHECK_THROWS_AS(parse_topology_kind("torus"), ConfigError);
}

TEST_CASE("stored distances match a BFS oracle") {
  for (const auto& params : {TopologyParams::folded_clos(8, 4), TopologyParams::folded_clos(9, 3),
                             TopologyParams::dragonfly(3), TopologyParams::dragonfly(5)}) {
    const auto g = build_topology(params);
    const auto dist = bfs_all_pairs(g);
    for (SwitchId a = 0; a < g.switch_count(); ++a) {
      for (SwitchId b = 0; b < g.switch_count(); ++b) {
        REQUIRE(dist[a][b] >= 0);
        CHECK(g.distance(a, b) == dist[a][b]);
      }
    }
  }
}

TEST_CASE("balanced placement") {
  const auto fc = build_topology(TopologyParams::folded_clos(8, 4));
  const auto p = place_validators(fc, 31);
  CHECK(p.max_per_switch == 4);
  CHECK(p.min_per_switch == 3);
  std::map<SwitchId, int> load;
  for (auto s : p.edge_of) load[s]++;
  for (const auto& [s, c] : load) CHECK((c == 3 || c == 4));

  const auto df = build_topology(TopologyParams::dragonfly(4));
  const auto q = place_validators(df, 40);
  std::map<SwitchId, int> per;
  for (auto s : q.edge_of) per[s]++;
  CHECK(per.size() == 20);
  for (const auto& [s, c] : per) CHECK(c == 2);

  // Extra validators go to different groups first.
  const auto df3 = build_topology(TopologyParams::dragonfly(3));
  std::map<int, int> groups;
  for (auto s : place_validators(df3, 31).edge_of) groups[df3.switches()[s].group]++;
  for (const auto& [grp, c] : groups) CHECK((c == 7 || c == 8));

  const auto clique = build_topology(TopologyParams::clique());
  const auto none = place_validators(clique, 16);
  CHECK_FALSE(none.attached());
  CHECK(average_hop_distance(clique, none) == 0.0);
}

TEST_CASE("next hop stays on minimal paths") {
  sim::RngStream rng(5, 5);
  const auto df = build_topology(TopologyParams::dragonfly(3));
  CHECK(next_hop(df, 0, 2, rng) == 2u);
  CHECK(next_hop(df, 4, 4, rng) == 4u);

  const auto fc = build_topology(TopologyParams::folded_clos(8, 4));
  const auto dist = bfs_all_pairs(fc);
  for (SwitchId a = 0; a < fc.switch_count(); ++a) {
    for (SwitchId b = 0; b < fc.switch_count(); ++b) {
      if (a == b) continue;
      const SwitchId h = next_hop(fc, a, b, rng);
      CHECK(dist[a][h] == 1);
      CHECK(dist[h][b] == dist[a][b] - 1);
    }
  }
}

TEST_CASE("next hop is uniform over the minimal choices") {
  const auto fc = build_topology(TopologyParams::folded_clos(8, 4));
  const auto dist = bfs_all_pairs(fc);
  // Two level-1 switches of the same pod.
  SwitchId a = 0;
  SwitchId b = 0;
  for (SwitchId s = 1; s < fc.switch_count(); ++s) {
    if (fc.switches()[s].level == 1 && fc.switches()[s].group == fc.switches()[a].group) {
      b = s;
      break;
    }
  }
  REQUIRE(b != a);
  std::set<SwitchId> expected;
  for (SwitchId v : fc.neighbors(a)) {
    if (dist[v][b] == dist[a][b] - 1) expected.insert(v);
  }
  CHECK(expected.size() == 4);
  sim::RngStream rng(17, 3);
  std::map<SwitchId, int> seen;
  const int draws = 40000;
  for (int i = 0; i < draws; ++i) seen[next_hop(fc, a, b, rng)]++;
  CHECK(seen.size() == expected.size());
  for (const auto& [s, c] : seen) {
    CHECK(expected.count(s) == 1);
    CHECK(c == doctest::Approx(draws / 4.0).epsilon(0.05));
  }
}

TEST_CASE("average hop distance") {
  // Dragonfly(3), one validator per switch: from any switch 3 switches are
  // 1 link away, 4 are 2 links and 4 are 3 links, so the mean path holds
  // (3*2 + 4*3 + 4*4) / 11 switches.
  const auto df3 = build_topology(TopologyParams::dragonfly(3));
  const auto p = place_validators(df3, 12);
  CHECK(average_hop_distance(df3, p) == doctest::Approx(34.0 / 11.0));

  // Two validators on one switch count as one switch.
  const auto df2 = build_topology(TopologyParams::dragonfly(2));
  Placement shared;
  shared.edge_of = {3, 3};
  CHECK(average_hop_distance(df2, shared) == doctest::Approx(1.0));

  for (const auto& params : {TopologyParams::folded_clos(8, 4), TopologyParams::dragonfly(4),
                             TopologyParams::dragonfly(5)}) {
    const auto g = build_topology(params);
    for (int n : {7, 31, 40}) {
      const auto pl = place_validators(g, n);
      CHECK(average_hop_distance(g, pl) == doctest::Approx(hop_oracle(g, pl)));
    }
  }
}
