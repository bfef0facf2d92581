#include "bftsim/errors.hpp"
#include "bftsim/harness.hpp"

#include <cmath>

namespace bftsim::harness {

Fit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw ConfigError("least_squares: x and y differ in length");
  if (x.size() < 2) throw DomainError("least_squares needs at least 2 points");
  const double count = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= count;
  my /= count;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw DomainError("least_squares: all x equal");
  Fit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  return fit;
}

double tail_slope(const std::vector<SeriesPoint>& curve, double lo, double hi) {
  std::vector<double> x;
  std::vector<double> y;
  for (const auto& p : curve) {
    if (p.sim_mean && p.tau0 >= lo && p.tau0 <= hi) {
      x.push_back(p.tau0);
      y.push_back(*p.sim_mean);
    }
  }
  if (x.size() < 3) throw DomainError("tail_slope needs at least 3 simulated points in the window");
  return least_squares(x, y).slope;
}

double power_exponent(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> lx;
  std::vector<double> ly;
  for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw DomainError("power_exponent needs positive data");
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  return least_squares(lx, ly).slope;
}

std::optional<double> simulated_argmin(const std::vector<SeriesPoint>& curve) {
  std::optional<double> best_value;
  double best = 0.0;
  for (const auto& p : curve) {
    if (!p.sim_mean) continue;
    if (!best_value || *p.sim_mean < best || (*p.sim_mean == best && p.value < *best_value)) {
      best = *p.sim_mean;
      best_value = p.value;
    }
  }
  return best_value;
}

std::optional<double> find_crossover(const std::vector<SeriesPoint>& hotstuff, const std::vector<SeriesPoint>& ibft) {
  if (hotstuff.size() != ibft.size()) throw ConfigError("find_crossover: series have different grids");
  std::optional<double> prev_x;
  double prev_d = 0.0;
  for (std::size_t i = 0; i < hotstuff.size(); ++i) {
    if (hotstuff[i].value != ibft[i].value) throw ConfigError("find_crossover: series have different grids");
    if (!hotstuff[i].sim_mean || !ibft[i].sim_mean) continue;
    const double x = hotstuff[i].value;
    const double d = *hotstuff[i].sim_mean - *ibft[i].sim_mean;
    if (d == 0.0) return x;
    if (prev_x && (prev_d < 0.0) != (d < 0.0)) return *prev_x + (x - *prev_x) * prev_d / (prev_d - d);
    prev_x = x;
    prev_d = d;
  }
  return std::nullopt;
}

}  // namespace bftsim::harness
