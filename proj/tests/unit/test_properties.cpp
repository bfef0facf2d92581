// Randomized properties with small hand-rolled generators.

#include "bftsim/model.hpp"
#include "bftsim/simulation.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace bftsim;
using model::ModelParams;
using protocol::Protocol;
using topology::TopologyParams;

namespace {

struct Gen {
  std::mt19937_64 rng;
  explicit Gen(std::uint64_t seed) : rng(seed) {}

  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
  double real(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
  double log_real(double lo, double hi) { return std::exp(real(std::log(lo), std::log(hi))); }
  bool coin() { return integer(0, 1) == 1; }

  TopologyParams topology() {
    switch (integer(0, 3)) {
      case 0: return TopologyParams::folded_clos(8, 4);
      case 1: return TopologyParams::folded_clos(9, 3);
      case 2: return TopologyParams::dragonfly(integer(2, 5));
      default: return TopologyParams::clique();
    }
  }

  ModelParams model() {
    ModelParams m;
    m.protocol = coin() ? Protocol::HotStuff : Protocol::Ibft;
    m.topology = topology();
    m.n = integer(4, 64);
    m.n_f = integer(0, protocol::max_faults(m.n));
    m.rv = log_real(0.1, 3.0);
    m.rs = log_real(0.1, 20.0);
    m.tau0 = log_real(1.0, 1e5);
    return model::with_measured_hops(m);
  }

  SimConfig config() {
    SimConfig c;
    c.protocol = coin() ? Protocol::HotStuff : Protocol::Ibft;
    c.leader = coin() ? protocol::LeaderPolicy::Random : protocol::LeaderPolicy::Rotation;
    c.topology = integer(0, 1) ? TopologyParams::clique() : topology();
    c.n = integer(4, 20);
    c.n_f = integer(0, protocol::max_faults(c.n));
    c.tau0 = log_real(5.0, 2000.0);
    c.rs = log_real(0.3, 9.0);
    c.seed = rng();
    c.instances = integer(2, 8);
    c.chains = integer(1, 2);
    return c;
  }
};

}  // namespace

TEST_CASE("property: no divergent or sub-quorum commits") {
  Gen g(101);
  for (int i = 0; i < 300; ++i) {
    const SimConfig c = g.config();
    CAPTURE(to_json(c).dump());
    const auto r = run_simulation(c);
    CHECK(r.divergent_commits == 0);
    CHECK(r.subquorum_commits == 0);
    for (const auto& chain : r.decided) {
      for (auto b : chain) CHECK(b != protocol::kNoBlock);
    }
  }
}

TEST_CASE("property: runs replay exactly from the seed") {
  Gen g(202);
  for (int i = 0; i < 100; ++i) {
    const SimConfig c = g.config();
    CAPTURE(to_json(c).dump());
    const auto a = run_simulation(c);
    const auto b = run_simulation(c);
    CHECK(a.instance_times == b.instance_times);
    CHECK(a.decided == b.decided);
    CHECK(a.events == b.events);
  }
}

TEST_CASE("property: q stays in [0,1] and does not grow with tau0") {
  Gen g(303);
  for (int i = 0; i < 2000; ++i) {
    ModelParams m = g.model();
    const double t1 = g.log_real(1.0, 1e4);
    const double t2 = t1 * g.real(1.0, 10.0);
    m.tau0 = t1;
    const double q1 = model::predict(m).q;
    m.tau0 = t2;
    const double q2 = model::predict(m).q;
    CHECK(q1 >= 0.0);
    CHECK(q1 <= 1.0);
    CHECK(q2 <= q1 + 1e-15);
  }
}

TEST_CASE("property: q = 0 tail grows with slope r/(1-2r)") {
  Gen g(404);
  for (int i = 0; i < 500; ++i) {
    ModelParams m = g.model();
    m.q_override = 0.0;
    const double t1 = g.log_real(10.0, 1e4);
    m.tau0 = t1;
    const double e1 = model::predict(m).expected_time;
    m.tau0 = 2.0 * t1;
    const double e2 = model::predict(m).expected_time;
    const double r = m.r();
    CHECK((e2 - e1) / t1 == doctest::Approx(r / (1.0 - 2.0 * r)).epsilon(1e-9));
    if (m.n_f == 0) CHECK(e1 == model::predict(m).t3);
  }
}

TEST_CASE("property: improved HotStuff model is never below the simple one") {
  Gen g(505);
  for (int i = 0; i < 2000; ++i) {
    ModelParams m = g.model();
    if (m.topology.kind == topology::TopologyKind::Clique) continue;
    m.protocol = Protocol::HotStuff;
    m.sigma_v = g.log_real(1e-6, 10.0) / m.rv;
    m.sigma_s = g.log_real(1e-6, 10.0) / m.rs;
    CHECK(model::t3_hotstuff_topology_improved(m) >= model::t3_hotstuff_topology(m) - 1e-9);
  }
}

TEST_CASE("property: Gaussian max bounds") {
  Gen g(606);
  for (int i = 0; i < 2000; ++i) {
    const double u1 = g.real(-100, 100);
    const double u2 = g.real(-100, 100);
    const double v1 = g.log_real(1e-6, 100);
    const double v2 = g.log_real(1e-6, 100);
    const double m = model::g_max_gaussian(u1, v1, u2, v2);
    CHECK(m >= std::max(u1, u2) - 1e-9);
    CHECK(m <= std::max(u1, u2) + std::sqrt(v1 + v2));
    CHECK(m == doctest::Approx(model::g_max_gaussian(u2, v2, u1, v1)));
  }
}

TEST_CASE("property: U-shaped model curve with tau0* near its minimum") {
  Gen g(707);
  for (int i = 0; i < 200; ++i) {
    ModelParams m;
    m.protocol = g.coin() ? Protocol::HotStuff : Protocol::Ibft;
    m.n = g.integer(16, 64);
    m.n_f = g.integer(1, protocol::max_faults(m.n));
    const double star = model::predict(m).tau0_star;
    const double t3 = model::predict(m).t3;
    double best = INFINITY;
    double argmin = 0.0;
    const double lo = 0.5 * t3;
    const double hi = 4.0 * star;
    for (int k = 0; k <= 400; ++k) {
      m.tau0 = lo + (hi - lo) * k / 400.0;
      const double e = model::predict(m).expected_time;
      if (e < best) {
        best = e;
        argmin = m.tau0;
      }
    }
    CAPTURE(m.n);
    CAPTURE(m.n_f);
    CHECK(argmin > lo);
    CHECK(argmin < hi);
    CHECK(std::abs(star - argmin) <= 0.25 * argmin);
  }
}

TEST_CASE("property: fast switches recover the clique formulas") {
  Gen g(808);
  for (int i = 0; i < 200; ++i) {
    ModelParams m = g.model();
    if (m.topology.kind == topology::TopologyKind::Clique) continue;
    m.n_f = 0;
    m.rs = 1e15;
    ModelParams c = m;
    c.topology = TopologyParams::clique();
    if (m.protocol == Protocol::Ibft) {
      CHECK(model::t3_ibft_topology(m) == doctest::Approx(model::t3_clique(c)));
    } else {
      const double f = m.f();
      const double n = m.n;
      CHECK(model::t3_hotstuff_topology(m) ==
            doctest::Approx((4.0 * (n - f - 1.0) + 3.0 * (f + 2.0) + 2.0) / m.rv));
    }
  }
}
