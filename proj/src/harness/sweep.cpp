#include "bftsim/errors.hpp"
#include "bftsim/harness.hpp"
#include "bftsim/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

namespace bftsim::harness {

std::string to_string(SweepVariable v) {
  switch (v) {
    case SweepVariable::Tau0: return "tau0";
    case SweepVariable::N: return "n";
    case SweepVariable::NF: return "n_f";
    case SweepVariable::Rs: return "rs";
    case SweepVariable::NuD: return "nu_d";
    case SweepVariable::Chains: return "c";
  }
  return "?";
}

SweepVariable parse_sweep_variable(const std::string& name) {
  if (name == "tau0") return SweepVariable::Tau0;
  if (name == "n") return SweepVariable::N;
  if (name == "n_f" || name == "nf") return SweepVariable::NF;
  if (name == "rs") return SweepVariable::Rs;
  if (name == "nu_d") return SweepVariable::NuD;
  if (name == "c" || name == "chains") return SweepVariable::Chains;
  throw ConfigError("unknown sweep variable: " + name + " (tau0, n, n_f, rs, nu_d, c)");
}

topology::TopologyParams folded_clos_matching(int nu_d) {
  const int switches = nu_d * (nu_d + 1);
  if (nu_d < 2 || switches % 3 != 0) {
    throw ConfigError("no Folded-Clos with the switch count of Dragonfly(" + std::to_string(nu_d) + ")");
  }
  const int nu_e = switches / 3;
  int smallest = nu_e;
  for (int p = 2; p * p <= nu_e; ++p) {
    if (nu_e % p == 0) {
      smallest = p;
      break;
    }
  }
  return topology::TopologyParams::folded_clos(nu_e, nu_e == 1 ? 1 : nu_e / smallest);
}

SimConfig apply_point(const SimConfig& base, SweepVariable var, double value, double k_per_switch) {
  SimConfig c = base;
  const auto as_int = [&](const char* what) {
    const double r = std::round(value);
    if (std::abs(r - value) > 1e-9) throw ConfigError(std::string(what) + " must be an integer");
    return static_cast<int>(r);
  };
  switch (var) {
    case SweepVariable::Tau0: c.tau0 = value; break;
    case SweepVariable::N: c.n = as_int("n"); break;
    case SweepVariable::NF: c.n_f = as_int("n_f"); break;
    case SweepVariable::Rs: c.rs = value; break;
    case SweepVariable::Chains: c.chains = as_int("c"); break;
    case SweepVariable::NuD: {
      const int nu_d = as_int("nu_d");
      if (c.topology.kind == topology::TopologyKind::FoldedClos) {
        c.topology = folded_clos_matching(nu_d);
      } else {
        c.topology = topology::TopologyParams::dragonfly(nu_d);
      }
      if (k_per_switch > 0.0) c.n = static_cast<int>(std::lround(k_per_switch * nu_d * (nu_d + 1)));
      break;
    }
  }
  validate(c);
  return c;
}

std::uint64_t point_seed(std::uint64_t base, int curve, std::size_t index, bool common_random_numbers) {
  if (common_random_numbers) return base;
  return sim::mix_seed(base, static_cast<std::uint64_t>(curve), index + 1);
}

std::vector<SeriesPoint> ResultSeries::curve(int index) const {
  std::vector<SeriesPoint> out;
  for (const auto& p : points) {
    if (p.curve == index) out.push_back(p);
  }
  return out;
}

int ResultSeries::curve_count() const {
  int count = 0;
  for (const auto& p : points) count = std::max(count, p.curve + 1);
  return count;
}

namespace {

struct Job {
  int curve = 0;
  std::string label;
  const SimConfig* base = nullptr;
  std::size_t index = 0;
  double value = 0.0;
};

struct Outcome {
  std::optional<SeriesPoint> point;
  std::vector<std::string> warnings;
};

Outcome evaluate(const Job& job, SweepVariable var, const SweepOptions& opts, double k_per_switch) {
  Outcome out;
  const std::string where = to_string(var) + "=" + std::to_string(job.value) +
                            (job.label.empty() ? "" : " [" + job.label + "]");
  SimConfig cfg;
  try {
    cfg = apply_point(*job.base, var, job.value, k_per_switch);
  } catch (const ConfigError& e) {
    out.warnings.push_back("skipped " + where + ": " + e.what());
    return out;
  }
  cfg.seed = point_seed(job.base->seed, job.curve, job.index, opts.common_random_numbers);
  SeriesPoint pt;
  pt.curve = job.curve;
  pt.label = job.label;
  pt.value = job.value;
  pt.protocol = protocol::to_string(cfg.protocol);
  pt.topology = topology::describe(cfg.topology);
  pt.n = cfg.n;
  pt.n_f = cfg.n_f;
  pt.tau0 = cfg.tau0;
  pt.rs = cfg.rs;
  pt.chains = cfg.chains;
  try {
    const auto mp = model_params(cfg);
    const auto pred = model::predict(mp);
    pt.model = pred.expected_time;
    pt.q = pred.q;
    pt.tau0_star = pred.tau0_star;
    pt.model_improved = model::predict_improved(mp);
  } catch (const std::exception& e) {
    out.warnings.push_back("no model at " + where + ": " + e.what());
  }
  if (opts.simulate) {
    try {
      const auto res = run_simulation(cfg);
      pt.sim_mean = res.mean_time;
      pt.sim_n = res.completed;
    } catch (const SimulationError& e) {
      out.warnings.push_back("simulation failed at " + where + ": " + e.what());
    }
  }
  out.point = std::move(pt);
  return out;
}

ResultSeries run_jobs(const std::vector<Job>& jobs, SweepVariable var, const SweepOptions& opts,
                      double k_per_switch) {
  std::vector<Outcome> outcomes(jobs.size());
  const unsigned threads = std::max(1U, std::min<unsigned>(opts.threads, static_cast<unsigned>(jobs.size())));
  if (threads <= 1) {
    for (std::size_t i = 0; i < jobs.size(); ++i) outcomes[i] = evaluate(jobs[i], var, opts, k_per_switch);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < jobs.size(); i = next++) {
          outcomes[i] = evaluate(jobs[i], var, opts, k_per_switch);
        }
      });
    }
    for (auto& th : pool) th.join();
  }
  ResultSeries series;
  series.variable = var;
  for (auto& o : outcomes) {
    if (o.point) series.points.push_back(std::move(*o.point));
    for (auto& w : o.warnings) series.warnings.push_back(std::move(w));
  }
  return series;
}

}  // namespace

ResultSeries run_sweep(const SimConfig& base, SweepVariable var, const std::vector<double>& values,
                       const SweepOptions& opts, double k_per_switch) {
  std::vector<Job> jobs;
  for (std::size_t i = 0; i < values.size(); ++i) jobs.push_back(Job{0, "", &base, i, values[i]});
  return run_jobs(jobs, var, opts, k_per_switch);
}

ResultSeries run_sweep(const SweepSpec& spec, const SweepOptions& opts) {
  std::vector<Job> jobs;
  for (std::size_t c = 0; c < spec.curves.size(); ++c) {
    for (std::size_t i = 0; i < spec.values.size(); ++i) {
      jobs.push_back(Job{static_cast<int>(c), spec.curves[c].label, &spec.curves[c].base, i, spec.values[i]});
    }
  }
  return run_jobs(jobs, spec.variable, opts, spec.k_per_switch);
}

}  // namespace bftsim::harness
