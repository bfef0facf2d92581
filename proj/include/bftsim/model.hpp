#pragma once

// Closed-form consensus-time model. Every function is pure.
//
// Notation: n validators, n_f crashed, f = floor((n-1)/3), n_w = n - n_f,
// r = n_f/n, validator rate r_v and switch rate r_s with service-time
// standard deviations sigma_v, sigma_s. k_T is validators per edge switch and
// h_T the mean number of switches on a path between two validators.

#include "bftsim/protocols.hpp"
#include "bftsim/topology.hpp"

#include <optional>

namespace bftsim::model {

using protocol::Protocol;
using topology::TopologyKind;
using topology::TopologyParams;

struct ModelParams {
  Protocol protocol = Protocol::HotStuff;
  TopologyParams topology;
  int n = 4;
  int n_f = 0;
  double tau0 = 1e6;
  double rv = 1.0 / 3.0;
  double rs = 9.0;
  // Non-positive means exponential: sigma = 1/rate.
  double sigma_v = 0.0;
  double sigma_s = 0.0;
  // Non-positive means derived from the topology (fractional allowed).
  double k_t = 0.0;
  double h_t = 0.0;
  // Forces the round-change probability instead of estimating it.
  std::optional<double> q_override;

  [[nodiscard]] int f() const { return protocol::max_faults(n); }
  [[nodiscard]] int n_w() const { return n - n_f; }
  [[nodiscard]] double r() const { return static_cast<double>(n_f) / n; }
  [[nodiscard]] double sv() const { return sigma_v > 0.0 ? sigma_v : 1.0 / rv; }
  [[nodiscard]] double ss() const { return sigma_s > 0.0 ? sigma_s : 1.0 / rs; }
  [[nodiscard]] double k() const;
  [[nodiscard]] int switch_count() const;
};

// Fills h_t from the actual wiring and round-robin placement.
ModelParams with_measured_hops(ModelParams p);

struct Prediction {
  double expected_time = 0.0;
  double t3 = 0.0;            // no-round-change time
  double timer_tail = 0.0;    // timer waits
  double round_change = 0.0;  // extra IBFT round-change traffic
  double q = 0.0;
  double tau0_star = 0.0;
};

double normal_cdf(double x);
double normal_pdf(double x);

// Round-change probability for a completion time ~ N(mean, sd^2).
double tail_probability(double tau0, double mean, double sd);

// Geometric backoff weight (r + (1-r) q) / (1 - 2r). Throws DomainError for r >= 1/2.
double backoff_weight(double r, double q);

// Messages the HotStuff leader processes per instance on a clique.
double hotstuff_leader_messages(int n, int n_f);
// Messages an IBFT validator must process before committing (collect quorum).
double ibft_quorum_messages(int n, int n_f);

double t3_clique(const ModelParams& p);
double q_hotstuff_clique(const ModelParams& p);
double q_ibft_clique(const ModelParams& p);
Prediction expected_time_clique(const ModelParams& p);

double tau0_star(const ModelParams& p);

double t3_hotstuff_topology(const ModelParams& p);

// Messages an edge switch relays per IBFT broadcast, crashed validators
// factored out. Reduces to the fault-free count at n_f = 0.
double ibft_relay_count(const ModelParams& p);
// Messages the busiest switch handles per IBFT instance: two broadcasts plus
// the PRE-PREPARE fan-out.
double ibft_switch_messages(const ModelParams& p);
double t3_ibft_topology(const ModelParams& p);

double crossover_switch_rate(const ModelParams& p);

struct Ratio {
  double exact = 0.0;
  double approx = 0.0;
};
Ratio fc_over_df_ratio(double k_d, int nu_d, int n);

struct Moments {
  double mean = 0.0;
  double variance = 0.0;
};

Moments hotstuff_topology_moments(const ModelParams& p);
Prediction expected_time_hotstuff_topology(const ModelParams& p);

Moments ibft_topology_moments(const ModelParams& p);
double q_ibft_topology(const ModelParams& p);
Prediction expected_time_ibft_topology(const ModelParams& p);

// E max{X, Y} for independent Gaussians X ~ N(u1, v1), Y ~ N(u2, v2).
double g_max_gaussian(double u1, double v1, double u2, double v2);
double t3_hotstuff_topology_improved(const ModelParams& p);

double multichain_effective_rate(double rs, int chains);

// The prediction that matches the configuration: clique formulas, the
// barrier model for HotStuff, the switch-bound model for IBFT.
Prediction predict(const ModelParams& p);
// HotStuff non-clique only: the improved base time plus the same timer tail.
std::optional<double> predict_improved(const ModelParams& p);

}  // namespace bftsim::model
