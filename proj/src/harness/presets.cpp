#include "bftsim/errors.hpp"
#include "bftsim/harness.hpp"

#include <functional>
#include <map>
#include <sstream>

namespace bftsim::harness {

namespace {

using protocol::Protocol;
using topology::TopologyParams;

std::vector<double> grid(double lo, double hi, double step) {
  std::vector<double> out;
  for (double v = lo; v <= hi + 1e-9 * step; v += step) out.push_back(v);
  return out;
}

SimConfig base(Protocol p, TopologyParams topo, int n) {
  SimConfig c;
  c.protocol = p;
  c.topology = topo;
  c.n = n;
  return c;
}

Curve curve(std::string label, SimConfig c) { return Curve{std::move(label), std::move(c)}; }

SweepSpec clique_tau0(const std::string& name, Protocol p, int n, std::vector<double> tau0, std::vector<int> faults) {
  SweepSpec s;
  s.name = name;
  s.description = protocol::to_string(p) + " clique n=" + std::to_string(n) + ", tau0 sweep";
  s.variable = SweepVariable::Tau0;
  s.values = std::move(tau0);
  for (int nf : faults) {
    SimConfig c = base(p, TopologyParams::clique(), n);
    c.n_f = nf;
    s.curves.push_back(curve("n_f=" + std::to_string(nf), c));
  }
  return s;
}

SweepSpec both_protocols(const std::string& name, std::string description, SweepVariable var,
                         std::vector<double> values, const std::vector<TopologyParams>& topologies, int n, double rs) {
  SweepSpec s;
  s.name = name;
  s.description = std::move(description);
  s.variable = var;
  s.values = std::move(values);
  for (const auto& topo : topologies) {
    for (Protocol p : {Protocol::HotStuff, Protocol::Ibft}) {
      SimConfig c = base(p, topo, n);
      c.rs = rs;
      s.curves.push_back(curve(protocol::to_string(p) + " " + topology::describe(topo), c));
    }
  }
  return s;
}

SweepSpec single(const std::string& name, std::string description, SweepVariable var, std::vector<double> values,
                 const SimConfig& c) {
  SweepSpec s;
  s.name = name;
  s.description = std::move(description);
  s.variable = var;
  s.values = std::move(values);
  s.curves.push_back(curve(protocol::to_string(c.protocol) + " " + topology::describe(c.topology), c));
  return s;
}

const std::vector<double> kSwitchRates = {0.2, 0.3, 0.4, 0.5, 0.6, 0.8, 1, 1.5, 2, 3, 5, 9};

const std::map<std::string, std::function<SweepSpec()>>& registry() {
  static const std::map<std::string, std::function<SweepSpec()>> presets = {
      {"fig1a", [] { return clique_tau0("fig1a", Protocol::HotStuff, 16, grid(100, 600, 25), {0, 2, 4}); }},
      {"fig1b",
       [] {
         return both_protocols("fig1b", "HotStuff vs IBFT on Dragonfly(5), rs=9, n sweep", SweepVariable::N,
                               grid(8, 64, 8), {TopologyParams::dragonfly(5)}, 16, 9.0);
       }},
      {"fig1c",
       [] {
         return both_protocols("fig1c", "HotStuff vs IBFT on Dragonfly(3), n=31, rs sweep", SweepVariable::Rs,
                               kSwitchRates, {TopologyParams::dragonfly(3)}, 31, 9.0);
       }},
      {"fig4a", [] { return clique_tau0("fig4a", Protocol::HotStuff, 16, grid(150, 500, 25), {0, 2}); }},
      {"fig4b", [] { return clique_tau0("fig4b", Protocol::HotStuff, 32, grid(300, 900, 25), {0, 2}); }},
      {"fig5a", [] { return clique_tau0("fig5a", Protocol::Ibft, 16, grid(60, 400, 20), {0, 2}); }},
      {"fig5b", [] { return clique_tau0("fig5b", Protocol::Ibft, 32, grid(120, 600, 20), {0, 2}); }},
      {"fig7a",
       [] {
         return single("fig7a", "HotStuff on Folded-Clos(8,4), n=31, rs sweep", SweepVariable::Rs, kSwitchRates,
                       base(Protocol::HotStuff, TopologyParams::folded_clos(8, 4), 31));
       }},
      {"fig7b",
       [] {
         SimConfig c = base(Protocol::HotStuff, TopologyParams::folded_clos(10, 5), 16);
         c.rs = 9.0;
         return single("fig7b", "HotStuff on Folded-Clos(10,5), rs=9, n sweep", SweepVariable::N, grid(10, 70, 6), c);
       }},
      {"fig8a",
       [] {
         SweepSpec s;
         s.name = "fig8a";
         s.description = "IBFT on Folded-Clos(8,4) and Dragonfly(3), n=31, rs sweep";
         s.variable = SweepVariable::Rs;
         s.values = kSwitchRates;
         for (const auto& topo : {TopologyParams::folded_clos(8, 4), TopologyParams::dragonfly(3)}) {
           s.curves.push_back(curve("ibft " + topology::describe(topo), base(Protocol::Ibft, topo, 31)));
         }
         return s;
       }},
      {"fig8b",
       [] {
         SweepSpec s;
         s.name = "fig8b";
         s.description = "IBFT on Folded-Clos(8,4) and Dragonfly(5), rs=9, n sweep";
         s.variable = SweepVariable::N;
         s.values = grid(8, 64, 8);
         for (const auto& topo : {TopologyParams::folded_clos(8, 4), TopologyParams::dragonfly(5)}) {
           SimConfig c = base(Protocol::Ibft, topo, 16);
           c.rs = 9.0;
           s.curves.push_back(curve("ibft " + topology::describe(topo), c));
         }
         return s;
       }},
      {"fig9a",
       [] {
         SimConfig c = base(Protocol::HotStuff, TopologyParams::dragonfly(4), 40);
         c.n_f = 2;
         return single("fig9a", "HotStuff on Dragonfly(4), n=40, n_f=2, tau0 sweep", SweepVariable::Tau0,
                       grid(200, 1200, 50), c);
       }},
      {"fig9b",
       [] {
         SimConfig c = base(Protocol::Ibft, TopologyParams::folded_clos(8, 4), 40);
         c.n_f = 2;
         return single("fig9b", "IBFT on Folded-Clos(8,4), n=40, n_f=2, tau0 sweep", SweepVariable::Tau0,
                       grid(150, 800, 25), c);
       }},
      {"fig9c",
       [] {
         SimConfig c = base(Protocol::Ibft, TopologyParams::dragonfly(4), 40);
         c.n_f = 2;
         return single("fig9c", "IBFT on Dragonfly(4), n=40, n_f=2, tau0 sweep", SweepVariable::Tau0,
                       grid(150, 800, 25), c);
       }},
      {"fig10a",
       [] {
         return both_protocols("fig10a", "HotStuff/IBFT crossover over rs, n=31", SweepVariable::Rs, kSwitchRates,
                               {TopologyParams::folded_clos(8, 4), TopologyParams::dragonfly(5)}, 31, 9.0);
       }},
      {"fig10b",
       [] {
         SweepSpec s;
         s.name = "fig10b";
         s.description = "IBFT Folded-Clos/Dragonfly ratio over nu_d with k=2, rs=0.5";
         s.variable = SweepVariable::NuD;
         s.values = {2, 3, 5, 6};
         s.k_per_switch = 2.0;
         for (const auto& topo : {TopologyParams::folded_clos(2, 1), TopologyParams::dragonfly(2)}) {
           SimConfig c = base(Protocol::Ibft, topo, 12);
           c.rs = 0.5;
           s.curves.push_back(curve(topo.kind == topology::TopologyKind::Dragonfly ? "ibft dragonfly" : "ibft folded_clos", c));
         }
         return s;
       }},
      {"fig12",
       [] {
         return single("fig12", "HotStuff on Folded-Clos(8,4), n=31, rs sweep, simple and improved model",
                       SweepVariable::Rs, kSwitchRates, base(Protocol::HotStuff, TopologyParams::folded_clos(8, 4), 31));
       }},
      {"fig14",
       [] {
         SimConfig c = base(Protocol::Ibft, TopologyParams::folded_clos(8, 4), 31);
         c.rs = 2.0;
         return single("fig14", "IBFT on Folded-Clos(8,4), n=31, rs=2, c chains vs model at rs/c", SweepVariable::Chains,
                       {1, 2, 3}, c);
       }},
  };
  return presets;
}

}  // namespace

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const auto& [name, make] : registry()) names.push_back(name);
  return names;
}

SweepSpec preset(const std::string& name) {
  const auto& reg = registry();
  const auto it = reg.find(name);
  if (it == reg.end()) {
    std::string known;
    for (const auto& n : preset_names()) known += (known.empty() ? "" : ", ") + n;
    throw ConfigError("unknown preset '" + name + "'; known presets: " + known);
  }
  return it->second();
}

std::string describe(const SweepSpec& spec) {
  std::ostringstream out;
  out << "# preset " << spec.name << ": " << spec.description << '\n';
  out << "# sweep " << to_string(spec.variable) << " =";
  for (double v : spec.values) out << ' ' << v;
  out << '\n';
  if (spec.k_per_switch > 0.0) out << "# validators per switch k = " << spec.k_per_switch << '\n';
  out << "# defaults: exponential service, sigma = 1/rate, rv = 1/3\n";
  for (const auto& c : spec.curves) out << "# curve " << c.label << ": " << to_json(c.base).dump() << '\n';
  return out.str();
}

}  // namespace bftsim::harness
