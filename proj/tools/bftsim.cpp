// Command-line front end: simulate, model, sweep, preset, compare.

#include "bftsim/config.hpp"
#include "bftsim/errors.hpp"
#include "bftsim/harness.hpp"
#include "bftsim/model.hpp"
#include "bftsim/simulation.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace bftsim;
using nlohmann::json;

namespace {

struct Common {
  std::string config_path;
  std::string set_json;
  std::uint64_t seed = 0;
  int instances = 0;
  std::string out;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config_path, "JSON config file");
  cmd->add_option("--set", c.set_json, "JSON object overriding config fields, e.g. '{\"n\":31}'");
  cmd->add_option("--seed", c.seed, "random seed");
  cmd->add_option("--instances", c.instances, "consensus instances per run");
  cmd->add_option("--out", c.out, "output file (default stdout)");
}

SimConfig resolve(const Common& c, SimConfig cfg, CLI::App* cmd) {
  if (!c.config_path.empty()) {
    std::ifstream in(c.config_path);
    if (!in) throw ConfigError("cannot open config " + c.config_path);
    try {
      cfg = config_from_json(json::parse(in), cfg);
    } catch (const json::exception& e) {
      throw ConfigError("cannot parse " + c.config_path + ": " + e.what());
    }
  }
  if (!c.set_json.empty()) {
    json j;
    try {
      j = json::parse(c.set_json);
    } catch (const json::exception& e) {
      throw ConfigError(std::string("--set: ") + e.what());
    }
    cfg = config_from_json(j, cfg);
  }
  if (cmd->count("--seed")) cfg.seed = c.seed;
  if (cmd->count("--instances")) cfg.instances = c.instances;
  return cfg;
}

std::vector<double> parse_values(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw ConfigError("bad sweep value: " + item);
    }
  }
  return out;
}

std::vector<double> range_values(double from, double to, double step) {
  if (!(step > 0.0) || to < from) throw ConfigError("--from/--to/--step must describe a non-empty range");
  std::vector<double> out;
  for (double v = from; v <= to + 1e-9 * step; v += step) out.push_back(v);
  return out;
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  out << text;
}

json prediction_json(const model::Prediction& p) {
  return json{{"expected_time", p.expected_time}, {"t3", p.t3},   {"timer_tail", p.timer_tail},
              {"round_change", p.round_change},   {"q", p.q},     {"tau0_star", p.tau0_star}};
}

std::string series_csv(const harness::ResultSeries& s) {
  std::ostringstream out;
  harness::write_csv(s, out);
  return out.str();
}

std::string stats(const harness::SweepSpec& spec, const harness::ResultSeries& s) {
  std::ostringstream out;
  for (int c = 0; c < s.curve_count(); ++c) {
    const auto pts = s.curve(c);
    if (pts.empty()) continue;
    out << "# curve " << c << " (" << pts.front().label << ")";
    double err = 0.0;
    int counted = 0;
    for (const auto& p : pts) {
      if (p.sim_mean && p.model && *p.sim_mean > 0.0) {
        err += std::abs(*p.model - *p.sim_mean) / *p.sim_mean;
        ++counted;
      }
    }
    if (counted) out << " mean |model-sim|/sim = " << err / counted;
    if (spec.variable == harness::SweepVariable::Tau0) {
      if (auto am = harness::simulated_argmin(pts)) out << " sim argmin tau0 = " << *am;
      if (pts.front().tau0_star) {
        const double star = *pts.front().tau0_star;
        out << " tau0* = " << star;
        try {
          out << " tail slope = " << harness::tail_slope(pts, 1.5 * star, 1e300);
        } catch (const DomainError&) {
        }
      }
    }
    out << '\n';
  }
  if (spec.variable == harness::SweepVariable::Rs) {
    for (int a = 0; a < s.curve_count(); ++a) {
      for (int b = 0; b < s.curve_count(); ++b) {
        const auto ha = s.curve(a);
        const auto ib = s.curve(b);
        if (ha.empty() || ib.empty() || ha.front().protocol != "hotstuff" || ib.front().protocol != "ibft" ||
            ha.front().topology != ib.front().topology) {
          continue;
        }
        const auto x = harness::find_crossover(ha, ib);
        out << "# crossover " << ha.front().topology << ": ";
        if (x) {
          out << *x;
        } else {
          out << "none in range";
        }
        auto mp = model_params(spec.curves[static_cast<std::size_t>(b)].base);
        out << " (model " << model::crossover_switch_rate(mp) << ")\n";
      }
    }
  }
  for (const auto& w : s.warnings) out << "# warning: " << w << '\n';
  return out.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discrete-event BFT consensus simulator and analytical model"};
  app.require_subcommand(1);

  Common common;
  std::string trace_path;
  auto* simulate = app.add_subcommand("simulate", "run one simulation");
  add_common(simulate, common);
  simulate->add_option("--trace", trace_path, "per-delivery trace log");

  auto* model_cmd = app.add_subcommand("model", "closed-form prediction only");
  add_common(model_cmd, common);

  std::string variable;
  std::string values;
  double from = 0.0;
  double to = 0.0;
  double step = 0.0;
  unsigned threads = 1;
  bool model_only = false;
  auto* sweep = app.add_subcommand("sweep", "sweep one variable");
  add_common(sweep, common);
  sweep->add_option("--variable", variable, "tau0, n, n_f, rs, nu_d or c")->required();
  sweep->add_option("--values", values, "comma-separated values");
  sweep->add_option("--from", from);
  sweep->add_option("--to", to);
  sweep->add_option("--step", step);
  sweep->add_option("--threads", threads);
  sweep->add_flag("--model-only", model_only, "skip simulation");

  std::string preset_name;
  bool list = false;
  auto* preset = app.add_subcommand("preset", "run a figure preset");
  add_common(preset, common);
  preset->add_option("name", preset_name, "preset id");
  preset->add_flag("--list", list, "list presets");
  preset->add_option("--threads", threads);
  preset->add_flag("--model-only", model_only, "skip simulation");

  auto* compare = app.add_subcommand("compare", "preset sweep with model comparison statistics");
  add_common(compare, common);
  compare->add_option("name", preset_name, "preset id")->required();
  compare->add_option("--threads", threads);

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) {
      const SimConfig cfg = resolve(common, SimConfig{}, simulate);
      std::ofstream trace;
      if (!trace_path.empty()) {
        trace.open(trace_path);
        if (!trace) throw ConfigError("cannot write " + trace_path);
      }
      const SimResult r = run_simulation(cfg, nullptr, trace_path.empty() ? nullptr : &trace);
      json summary = {{"config", to_json(cfg)},
                      {"mean_time", r.mean_time},
                      {"completed", r.completed},
                      {"end_time", r.end_time},
                      {"events", r.events},
                      {"round_change_instances", r.round_change_instances},
                      {"divergent_commits", r.divergent_commits},
                      {"subquorum_commits", r.subquorum_commits},
                      {"h_t", r.h_t},
                      {"crashed", r.crashed},
                      {"model", prediction_json(model::predict(model_params(cfg)))}};
      std::cout << summary.dump(2) << '\n';
      if (!common.out.empty()) {
        std::ostringstream out;
        out << "chain,instance,time\n";
        for (std::size_t ch = 0; ch < r.instance_times.size(); ++ch) {
          for (std::size_t i = 0; i < r.instance_times[ch].size(); ++i) {
            out << ch << ',' << i << ',' << r.instance_times[ch][i] << '\n';
          }
        }
        emit(common.out, out.str());
      }
    } else if (model_cmd->parsed()) {
      const SimConfig cfg = resolve(common, SimConfig{}, model_cmd);
      const auto mp = model_params(cfg);
      json j = {{"config", to_json(cfg)}, {"h_t", mp.h_t}, {"prediction", prediction_json(model::predict(mp))}};
      if (auto imp = model::predict_improved(mp)) j["improved"] = *imp;
      if (cfg.topology.kind != topology::TopologyKind::Clique) j["crossover_rs"] = model::crossover_switch_rate(mp);
      emit(common.out, j.dump(2) + "\n");
    } else if (sweep->parsed()) {
      const SimConfig cfg = resolve(common, SimConfig{}, sweep);
      const auto var = harness::parse_sweep_variable(variable);
      const auto vals = values.empty() ? range_values(from, to, step) : parse_values(values);
      harness::SweepOptions opts;
      opts.simulate = !model_only;
      opts.threads = threads;
      const auto s = harness::run_sweep(cfg, var, vals, opts);
      std::cerr << "# base config: " << to_json(cfg).dump() << '\n';
      for (const auto& w : s.warnings) std::cerr << "# warning: " << w << '\n';
      emit(common.out, series_csv(s));
    } else if (preset->parsed() || compare->parsed()) {
      CLI::App* cmd = preset->parsed() ? preset : compare;
      if (list || preset_name.empty()) {
        for (const auto& name : harness::preset_names()) {
          std::cout << name << "  " << harness::preset(name).description << '\n';
        }
        return 0;
      }
      auto spec = harness::preset(preset_name);
      for (auto& c : spec.curves) c.base = resolve(common, c.base, cmd);
      harness::SweepOptions opts;
      opts.simulate = !(preset->parsed() && model_only);
      opts.threads = threads;
      std::cerr << harness::describe(spec);
      const auto s = harness::run_sweep(spec, opts);
      std::string text = series_csv(s);
      if (compare->parsed()) {
        std::cerr << stats(spec, s);
      } else {
        for (const auto& w : s.warnings) std::cerr << "# warning: " << w << '\n';
      }
      emit(common.out, text);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
