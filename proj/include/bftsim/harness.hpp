#pragma once

// Experiment plumbing: sweeps over one configuration variable, figure
// presets, model-vs-simulation statistics and CSV I/O.

#include "bftsim/config.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace bftsim::harness {

enum class SweepVariable { Tau0, N, NF, Rs, NuD, Chains };

std::string to_string(SweepVariable v);
SweepVariable parse_sweep_variable(const std::string& name);

// Sets `var` on a copy of `base`. For NuD the topology is rebuilt for nu_d
// (Dragonfly directly, Folded-Clos with the same switch count) and, when
// k_per_switch > 0, n becomes round(k_per_switch * switches) with Dragonfly
// switch counts.
SimConfig apply_point(const SimConfig& base, SweepVariable var, double value, double k_per_switch = 0.0);

// Folded-Clos with nu_e = nu_d(nu_d+1)/3 switches per level, i.e. the same
// switch count as Dragonfly(nu_d); nu_12 is the largest proper divisor.
topology::TopologyParams folded_clos_matching(int nu_d);

struct Curve {
  std::string label;
  SimConfig base;
};

struct SweepSpec {
  std::string name;
  std::string description;
  SweepVariable variable = SweepVariable::Tau0;
  std::vector<double> values;
  std::vector<Curve> curves;
  double k_per_switch = 0.0;
};

struct SeriesPoint {
  int curve = 0;
  std::string label;
  double value = 0.0;
  std::string protocol;
  std::string topology;
  int n = 0;
  int n_f = 0;
  double tau0 = 0.0;
  double rs = 0.0;
  int chains = 1;
  std::optional<double> sim_mean;
  std::size_t sim_n = 0;
  std::optional<double> model;
  std::optional<double> model_improved;
  std::optional<double> q;
  std::optional<double> tau0_star;
};

struct ResultSeries {
  SweepVariable variable = SweepVariable::Tau0;
  std::vector<SeriesPoint> points;
  std::vector<std::string> warnings;

  [[nodiscard]] std::vector<SeriesPoint> curve(int index) const;
  [[nodiscard]] int curve_count() const;
};

struct SweepOptions {
  bool simulate = true;
  unsigned threads = 1;
  // Every point runs on the base seed, so curves share random streams;
  // otherwise each point gets its own derived seed.
  bool common_random_numbers = true;
};

// Seed used for point `index` of curve `curve`.
std::uint64_t point_seed(std::uint64_t base, int curve, std::size_t index, bool common_random_numbers);

// Invalid points are skipped and reported in `warnings`.
ResultSeries run_sweep(const SimConfig& base, SweepVariable var, const std::vector<double>& values,
                       const SweepOptions& opts = {}, double k_per_switch = 0.0);
ResultSeries run_sweep(const SweepSpec& spec, const SweepOptions& opts = {});

std::vector<std::string> preset_names();
// Throws ConfigError listing the known presets.
SweepSpec preset(const std::string& name);
// Text block with every resolved parameter of the preset, one curve per line.
std::string describe(const SweepSpec& spec);

struct Fit {
  double slope = 0.0;
  double intercept = 0.0;
};

// Least squares y = a x + b. Throws DomainError with fewer than 2 points.
Fit least_squares(const std::vector<double>& x, const std::vector<double>& y);

// Slope of simulated mean against tau0 over points with tau0 in [lo, hi].
// Throws DomainError with fewer than 3 points in the window.
double tail_slope(const std::vector<SeriesPoint>& curve, double lo, double hi);

// Exponent b of y = a x^b fitted in log-log space.
double power_exponent(const std::vector<double>& x, const std::vector<double>& y);

// Sweep value with the smallest simulated mean; ties go to the smaller value.
std::optional<double> simulated_argmin(const std::vector<SeriesPoint>& curve);

// Switch rate where E T_H - E T_I first changes sign, by linear
// interpolation. nullopt means no crossover in range. Throws ConfigError when
// the grids differ.
std::optional<double> find_crossover(const std::vector<SeriesPoint>& hotstuff, const std::vector<SeriesPoint>& ibft);

void write_csv(const ResultSeries& series, std::ostream& out);
void export_csv(const ResultSeries& series, const std::string& path);
ResultSeries read_csv(std::istream& in);
ResultSeries import_csv(const std::string& path);

}  // namespace bftsim::harness
