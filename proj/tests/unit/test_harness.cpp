#include "bftsim/errors.hpp"
#include "bftsim/harness.hpp"
#include "bftsim/simulation.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace bftsim;
using namespace bftsim::harness;
using protocol::Protocol;
using topology::TopologyParams;

namespace {

SeriesPoint point(double value, std::optional<double> sim) {
  SeriesPoint p;
  p.value = value;
  p.tau0 = value;
  p.sim_mean = sim;
  return p;
}

SimConfig small(Protocol p) {
  SimConfig c;
  c.protocol = p;
  c.n = 7;
  c.instances = 40;
  return c;
}

}  // namespace

TEST_CASE("CSV: empty series is a header-only file") {
  std::ostringstream out;
  write_csv(ResultSeries{}, out);
  const std::string text = out.str();
  CHECK(std::count(text.begin(), text.end(), '\n') == 1);
  CHECK(text.rfind("variable,value,curve,label,", 0) == 0);
  std::istringstream in(text);
  CHECK(read_csv(in).points.empty());
}

TEST_CASE("CSV round trip keeps every value") {
  ResultSeries s;
  s.variable = SweepVariable::Rs;
  SeriesPoint p;
  p.curve = 1;
  p.label = "ibft \"FoldedClos(8,4)\", n=31";
  p.value = 1.0 / 3.0;
  p.protocol = "ibft";
  p.topology = "FoldedClos(8,4)";
  p.n = 31;
  p.n_f = 2;
  p.tau0 = 1e6;
  p.rs = 0.1 + 0.2;
  p.chains = 3;
  p.sim_mean = 472.71875000000006;
  p.sim_n = 1000;
  p.model = 2.0 / 7.0;
  p.q = 1e-300;
  s.points.push_back(p);
  s.points.push_back(SeriesPoint{});

  std::stringstream buf;
  write_csv(s, buf);
  const auto back = read_csv(buf);
  REQUIRE(back.points.size() == 2);
  CHECK(back.variable == SweepVariable::Rs);
  const auto& q = back.points[0];
  CHECK(q.label == p.label);
  CHECK(q.value == p.value);
  CHECK(q.rs == p.rs);
  CHECK(q.sim_mean == p.sim_mean);
  CHECK(q.sim_n == p.sim_n);
  CHECK(q.model == p.model);
  CHECK_FALSE(q.model_improved);
  CHECK(q.q == p.q);
  CHECK_FALSE(q.tau0_star);
  CHECK(q.chains == 3);
  CHECK(q.n_f == 2);
}

TEST_CASE("CSV rejects malformed input") {
  std::istringstream bad_header("a,b\n");
  CHECK_THROWS_AS(read_csv(bad_header), ConfigError);
  std::ostringstream out;
  write_csv(ResultSeries{}, out);
  std::istringstream short_row(out.str() + "tau0,1,2\n");
  CHECK_THROWS_AS(read_csv(short_row), ConfigError);
  CHECK_THROWS_AS(export_csv(ResultSeries{}, "/nonexistent-dir/x.csv"), ConfigError);
}

TEST_CASE("fig4a series has two curves told apart by n_f") {
  auto spec = preset("fig4a");
  for (auto& c : spec.curves) c.base.instances = 20;
  SweepOptions opts;
  opts.simulate = false;
  const auto s = run_sweep(spec, opts);
  CHECK(s.curve_count() == 2);
  std::ostringstream out;
  write_csv(s, out);
  std::istringstream in(out.str());
  const auto back = read_csv(in);
  CHECK(back.curve(0).front().n_f == 0);
  CHECK(back.curve(1).front().n_f == 2);
  CHECK(back.curve(0).size() == spec.values.size());
}

TEST_CASE("presets carry the caption parameters") {
  CHECK(preset_names().size() == 18);
  CHECK_THROWS_WITH_AS(preset("fig99"), doctest::Contains("fig10b"), ConfigError);

  const auto b = preset("fig1b");
  CHECK(b.variable == SweepVariable::N);
  REQUIRE(b.curves.size() == 2);
  for (const auto& c : b.curves) {
    CHECK(c.base.topology == TopologyParams::dragonfly(5));
    CHECK(c.base.rs == 9.0);
  }
  CHECK(b.curves[0].base.protocol != b.curves[1].base.protocol);
  const auto text = describe(b);
  CHECK(text.find("\"nu_d\":5") != std::string::npos);
  CHECK(text.find("\"rs\":9") != std::string::npos);
  CHECK(text.find("exponential") != std::string::npos);

  const auto a = preset("fig9a");
  CHECK(a.variable == SweepVariable::Tau0);
  CHECK(a.curves.front().base.topology == TopologyParams::dragonfly(4));
  CHECK(a.curves.front().base.n == 40);
  CHECK(a.curves.front().base.protocol == Protocol::HotStuff);

  const auto r = preset("fig10b");
  CHECK(r.variable == SweepVariable::NuD);
  CHECK(r.k_per_switch == 2.0);
  for (double v : r.values) CHECK(static_cast<int>(v * (v + 1)) % 3 == 0);

  const auto m = preset("fig14");
  CHECK(m.values == std::vector<double>{1, 2, 3});
}

TEST_CASE("nu_d sweep keeps k validators per switch") {
  const auto spec = preset("fig10b");
  for (const auto& curve : spec.curves) {
    for (double v : spec.values) {
      const auto c = apply_point(curve.base, SweepVariable::NuD, v, spec.k_per_switch);
      const int nu = static_cast<int>(v);
      CHECK(c.n == 2 * nu * (nu + 1));
      if (c.topology.kind == topology::TopologyKind::FoldedClos) {
        CHECK(3 * c.topology.nu_e == nu * (nu + 1));
        CHECK(c.topology.nu_e % c.topology.nu_12 == 0);
      }
    }
  }
  CHECK(folded_clos_matching(5) == TopologyParams::folded_clos(10, 5));
  CHECK_THROWS_AS(folded_clos_matching(4), ConfigError);
}

TEST_CASE("crossover search") {
  std::vector<SeriesPoint> h;
  std::vector<SeriesPoint> i;
  for (double x : {1.0, 2.0, 3.0, 4.0}) {
    h.push_back(point(x, 10.0 - 2.0 * x));
    i.push_back(point(x, 5.0));
  }
  const auto x = find_crossover(h, i);
  REQUIRE(x);
  CHECK(*x == doctest::Approx(2.5));

  std::vector<SeriesPoint> far;
  for (double v : {1.0, 2.0, 3.0, 4.0}) far.push_back(point(v, 100.0));
  CHECK_FALSE(find_crossover(far, i));

  far.pop_back();
  CHECK_THROWS_AS(find_crossover(far, i), ConfigError);
}

TEST_CASE("fits") {
  const auto fit = least_squares({1, 2, 3, 4}, {3, 5, 7, 9});
  CHECK(fit.slope == doctest::Approx(2.0));
  CHECK(fit.intercept == doctest::Approx(1.0));
  CHECK(power_exponent({2, 4, 8, 16}, {12, 48, 192, 768}) == doctest::Approx(2.0));
  CHECK_THROWS_AS(least_squares({1}, {2}), DomainError);
  CHECK_THROWS_AS(least_squares({1, 1}, {2, 3}), DomainError);

  std::vector<SeriesPoint> c{point(100, 5.0), point(200, 6.0), point(300, 7.0), point(400, 100.0)};
  CHECK(tail_slope(c, 100, 300) == doctest::Approx(0.01));
  CHECK_THROWS_AS(tail_slope(c, 100, 200), DomainError);

  std::vector<SeriesPoint> tie{point(1, 5.0), point(2, 4.0), point(3, 4.0), point(4, std::nullopt)};
  CHECK(*simulated_argmin(tie) == 2.0);
}

TEST_CASE("fault-free tail is flat") {
  SimConfig c;
  c.protocol = Protocol::HotStuff;
  c.n = 16;
  c.instances = 300;
  const auto s = run_sweep(c, SweepVariable::Tau0, {400, 500, 600, 700});
  CHECK(std::abs(tail_slope(s.curve(0), 400, 700)) < 0.02);
}

TEST_CASE("one-point sweep equals a single run") {
  const SimConfig c = small(Protocol::Ibft);
  const auto s = run_sweep(c, SweepVariable::Tau0, {c.tau0});
  REQUIRE(s.points.size() == 1);
  CHECK(*s.points[0].sim_mean == run_simulation(c).mean_time);
  CHECK(s.points[0].sim_n == 40);
}

TEST_CASE("parallel sweep matches serial sweep") {
  SimConfig c = small(Protocol::HotStuff);
  c.n_f = 1;
  const std::vector<double> values{50, 80, 120, 200, 400};
  for (bool crn : {true, false}) {
    SweepOptions serial;
    serial.common_random_numbers = crn;
    SweepOptions parallel = serial;
    parallel.threads = 3;
    const auto a = run_sweep(c, SweepVariable::Tau0, values, serial);
    const auto b = run_sweep(c, SweepVariable::Tau0, values, parallel);
    REQUIRE(a.points.size() == b.points.size());
    for (std::size_t i = 0; i < a.points.size(); ++i) {
      CHECK(a.points[i].value == b.points[i].value);
      CHECK(a.points[i].sim_mean == b.points[i].sim_mean);
    }
  }
  CHECK(point_seed(7, 0, 3, true) == 7);
  CHECK(point_seed(7, 0, 3, false) != point_seed(7, 0, 4, false));
}

TEST_CASE("invalid sweep points are skipped with a warning") {
  const SimConfig c = small(Protocol::Ibft);
  SweepOptions opts;
  opts.simulate = false;
  const auto s = run_sweep(c, SweepVariable::NF, {0, 1, 2, 3}, opts);
  CHECK(s.points.size() == 3);
  REQUIRE(s.warnings.size() == 1);
  CHECK(s.warnings[0].find("n_f") != std::string::npos);
}

TEST_CASE("config JSON") {
  SimConfig c;
  c.protocol = Protocol::Ibft;
  c.topology = TopologyParams::folded_clos(8, 4);
  c.n = 31;
  c.n_f = 3;
  c.rs = 2.5;
  c.seed = 12345678901234ULL;
  c.chains = 2;
  c.validator_service = sim::ServiceDistribution::Deterministic;
  const auto back = config_from_json(to_json(c));
  CHECK(back.protocol == c.protocol);
  CHECK(back.topology == c.topology);
  CHECK(back.n == 31);
  CHECK(back.n_f == 3);
  CHECK(back.rs == 2.5);
  CHECK(back.seed == c.seed);
  CHECK(back.chains == 2);
  CHECK(back.validator_service == sim::ServiceDistribution::Deterministic);

  CHECK_THROWS_WITH_AS(config_from_json(nlohmann::json{{"nodes", 4}}), doctest::Contains("nodes"), ConfigError);
  CHECK_THROWS_AS(config_from_json(nlohmann::json{{"n", "four"}}), ConfigError);
  CHECK_THROWS_AS(config_from_json(nlohmann::json{{"topology", {{"kind", "ring"}}}}), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("config validation") {
  SimConfig c;
  CHECK_NOTHROW(validate(c));
  c.n = 3;
  CHECK_THROWS_AS(validate(c), ConfigError);
  c.n = 16;
  c.n_f = 6;
  CHECK_THROWS_WITH_AS(validate(c), doctest::Contains("f = 5"), ConfigError);
  c.n_f = 0;
  c.instances = 0;
  CHECK_THROWS_AS(validate(c), ConfigError);
  c.instances = 10;
  c.topology = TopologyParams::folded_clos(8, 3);
  CHECK_THROWS_AS(validate(c), ConfigError);
  c.topology = TopologyParams::clique();
  c.tau0 = 0.0;
  CHECK_THROWS_AS(validate(c), ConfigError);
}

TEST_CASE("model parameters follow the configuration") {
  SimConfig c;
  c.topology = TopologyParams::folded_clos(8, 4);
  c.n = 31;
  c.rs = 9.0;
  c.chains = 3;
  const auto m = model_params(c);
  CHECK(m.rs == doctest::Approx(3.0));
  CHECK(m.sigma_v == doctest::Approx(3.0));
  CHECK(m.h_t > 1.0);
  c.validator_service = sim::ServiceDistribution::Deterministic;
  CHECK(model_params(c).sigma_v < 1e-9);
}
