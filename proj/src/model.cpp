#include "bftsim/model.hpp"

#include "bftsim/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace bftsim::model {

namespace {

void require_switched(const ModelParams& p, const char* what) {
  if (p.topology.kind == TopologyKind::Clique) {
    throw ConfigError(std::string(what) + " needs a Folded-Clos or Dragonfly topology");
  }
}

void require_counts(const ModelParams& p) {
  if (p.n < 1) throw ConfigError("n must be positive");
  if (p.n_f < 0 || p.n_f > p.n) throw ConfigError("n_f out of range");
  if (!(p.rv > 0.0) || !(p.rs > 0.0)) throw ConfigError("service rates must be positive");
}

double resolve_q(const ModelParams& p, double estimated) {
  return std::clamp(p.q_override.value_or(estimated), 0.0, 1.0);
}

ModelParams fault_free(ModelParams p) {
  p.n_f = 0;
  return p;
}

// Validator work behind the IBFT completion-time distribution on a switched
// network.
double ibft_validator_messages(const ModelParams& p) { return (2.0 * p.n + 1.0) - p.f() + p.n_f - 1.0; }

double hotstuff_improved_base(const ModelParams& p) {
  const double n = p.n;
  const double f = p.f();
  const double nf = p.n_f;
  const double sv2 = p.sv() * p.sv();
  const double ss2 = p.ss() * p.ss();
  const double a = n - f - 1.0;
  const double b = n - nf - 2.0;
  const double c = f - nf + 2.0;
  return 4.0 * g_max_gaussian(a / p.rv, a * sv2, b / p.rs, b * ss2) +
         3.0 * g_max_gaussian(c / p.rv, c * sv2, n / p.rs, n * ss2) + 2.0 / p.rv + 2.0 * p.h_t / p.rs;
}

}  // namespace

double ModelParams::k() const {
  if (k_t > 0.0) return k_t;
  switch (topology.kind) {
    case TopologyKind::FoldedClos: return 3.0 * n / switch_count();
    case TopologyKind::Dragonfly: return static_cast<double>(n) / switch_count();
    case TopologyKind::Clique: break;
  }
  return 0.0;
}

int ModelParams::switch_count() const {
  switch (topology.kind) {
    case TopologyKind::FoldedClos: return 3 * topology.nu_e;
    case TopologyKind::Dragonfly: return topology.nu_d * (topology.nu_d + 1);
    case TopologyKind::Clique: break;
  }
  return 0;
}

ModelParams with_measured_hops(ModelParams p) {
  if (p.topology.kind == TopologyKind::Clique) {
    p.h_t = 0.0;
    return p;
  }
  const auto graph = topology::build_topology(p.topology);
  p.h_t = topology::average_hop_distance(graph, topology::place_validators(graph, p.n));
  return p;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

double tail_probability(double tau0, double mean, double sd) {
  if (!(sd > 0.0)) return tau0 < mean ? 1.0 : (tau0 > mean ? 0.0 : 0.5);
  const double z = std::clamp((tau0 - mean) / sd, -40.0, 40.0);
  return std::clamp(0.5 * std::erfc(z / std::numbers::sqrt2), 0.0, 1.0);
}

double backoff_weight(double r, double q) {
  if (!(r < 0.5)) throw DomainError("fault fraction r >= 1/2: the backoff series diverges");
  return (r + (1.0 - r) * q) / (1.0 - 2.0 * r);
}

double hotstuff_leader_messages(int n, int n_f) {
  return 4.0 * n - 3.0 * n_f - protocol::max_faults(n) + 4.0;
}

double ibft_quorum_messages(int n, int n_f) { return 2.0 * n - n_f - protocol::max_faults(n); }

double t3_clique(const ModelParams& p) {
  require_counts(p);
  if (p.protocol == Protocol::HotStuff) return hotstuff_leader_messages(p.n, p.n_f) / p.rv;
  return (2.0 * p.n_w() + 1.0) / p.rv;
}

double q_hotstuff_clique(const ModelParams& p) {
  const double m = hotstuff_leader_messages(p.n, p.n_f);
  return tail_probability(p.tau0, m / p.rv, p.sv() * std::sqrt(m));
}

double q_ibft_clique(const ModelParams& p) {
  const double m = ibft_quorum_messages(p.n, p.n_f);
  return tail_probability(p.tau0, m / p.rv, p.sv() * std::sqrt(m * (2.0 + 1.0 / p.n_w())));
}

Prediction expected_time_clique(const ModelParams& p) {
  Prediction out;
  out.t3 = t3_clique(p);
  const double r = p.r();
  if (p.protocol == Protocol::HotStuff) {
    out.q = resolve_q(p, q_hotstuff_clique(p));
    out.timer_tail = backoff_weight(r, out.q) * p.tau0;
  } else {
    out.q = resolve_q(p, q_ibft_clique(p));
    out.timer_tail = backoff_weight(r, out.q) * p.tau0;
    out.round_change = (r + (2.0 - r) * (1.0 - r) * out.q) / p.rv * p.n_w();
  }
  out.expected_time = out.t3 + out.timer_tail + out.round_change;
  out.tau0_star = tau0_star(p);
  return out;
}

double tau0_star(const ModelParams& p) {
  require_counts(p);
  if (p.topology.kind == TopologyKind::Clique) {
    if (p.protocol == Protocol::HotStuff) {
      const double m = hotstuff_leader_messages(p.n, p.n_f);
      return m / p.rv + 3.0 * p.sv() * std::sqrt(m);
    }
    const double m = ibft_quorum_messages(p.n, p.n_f);
    return m / p.rv + 3.0 * p.sv() * std::sqrt(m * (2.0 + 1.0 / p.n_w()));
  }
  const Moments y = p.protocol == Protocol::HotStuff ? hotstuff_topology_moments(p) : ibft_topology_moments(p);
  return y.mean + 3.0 * std::sqrt(y.variance);
}

double t3_hotstuff_topology(const ModelParams& p) {
  require_switched(p, "t3_hotstuff_topology");
  require_counts(p);
  const double n = p.n;
  const double f = p.f();
  return 4.0 * std::max((n - f - 1.0) / p.rv, (n - 2.0) / p.rs) + 3.0 * std::max((f + 2.0) / p.rv, n / p.rs) +
         2.0 * (1.0 / p.rv + p.h_t / p.rs);
}

double ibft_relay_count(const ModelParams& p) {
  require_switched(p, "ibft_relay_count");
  const double k = p.k();
  const double base = k * (p.n + p.n_w() - k - 1.0);
  if (p.topology.kind == TopologyKind::FoldedClos) return base;
  const double nu = p.topology.nu_d;
  return base + 2.0 * k * k * nu * (nu - 1.0) * (1.0 - p.r());
}

double ibft_switch_messages(const ModelParams& p) { return 2.0 * ibft_relay_count(p) + (p.n - 1.0); }

double t3_ibft_topology(const ModelParams& p) {
  require_counts(p);
  const double m = ibft_switch_messages(fault_free(p));
  return std::max((2.0 * p.n + 1.0) / p.rv, m / p.rs);
}

double crossover_switch_rate(const ModelParams& p) {
  require_counts(p);
  const double f = p.f();
  if (p.n_f == 0) return ibft_switch_messages(p) * p.rv / (4.0 * p.n - f + 4.0);
  const double r = p.r();
  return ((2.0 + r) * ibft_relay_count(p) + (p.n - 1.0)) * p.rv / (4.0 * p.n - f - 3.0 * p.n_f + 4.0);
}

Ratio fc_over_df_ratio(double k_d, int nu_d, int n) {
  if (!(k_d > 0.0) || nu_d < 2 || n < 2) throw ConfigError("fc_over_df_ratio needs k_d > 0, nu_d >= 2, n >= 2");
  const double k_f = 3.0 * k_d;
  const double n1 = n - 1.0;
  const double nu = nu_d;
  Ratio out;
  out.exact = (2.0 * k_f * (2.0 * n1 - (k_f - 1.0)) + n1) /
              (2.0 * k_d * (2.0 * n1 - (k_d - 1.0) + 2.0 * k_d * nu * (nu - 1.0)) + n1);
  out.approx = 1.5 / (1.0 + 1.0 / (8.0 * k_d));
  return out;
}

Moments hotstuff_topology_moments(const ModelParams& p) {
  require_switched(p, "hotstuff_topology_moments");
  require_counts(p);
  const double n = p.n;
  const double f = p.f();
  const double nf = p.n_f;
  const double sv2 = p.sv() * p.sv();
  const double ss2 = p.ss() * p.ss();
  Moments m;
  m.mean = 4.0 * std::max((n - f - 1.0) / p.rv, (n - nf - 2.0) / p.rs) +
           3.0 * std::max((f - nf + 2.0) / p.rv, n / p.rs) + 2.0 * (1.0 / p.rv + p.h_t / p.rs);
  m.variance = 4.0 * std::max((n - f - 1.0) * sv2, (n - nf - 2.0) * ss2) +
               3.0 * std::max((n - nf + 2.0) * sv2, n * ss2) + 2.0 * sv2 + 2.0 * p.h_t * ss2;
  return m;
}

Prediction expected_time_hotstuff_topology(const ModelParams& p) {
  const Moments y = hotstuff_topology_moments(p);
  Prediction out;
  out.t3 = y.mean;
  out.q = resolve_q(p, tail_probability(p.tau0, y.mean, std::sqrt(y.variance)));
  out.timer_tail = backoff_weight(p.r(), out.q) * p.tau0;
  out.expected_time = out.t3 + out.timer_tail;
  out.tau0_star = y.mean + 3.0 * std::sqrt(y.variance);
  return out;
}

Moments ibft_topology_moments(const ModelParams& p) {
  require_switched(p, "ibft_topology_moments");
  require_counts(p);
  const double spread = 2.0 + 1.0 / p.n_w();
  const double m_v = ibft_validator_messages(p);
  const double m_s = ibft_switch_messages(p) - p.k() * (p.f() - p.n_f) - (p.n - 1.0);
  Moments m;
  m.mean = std::max(m_v / p.rv, m_s / p.rs);
  m.variance = std::max(m_v * spread * p.sv() * p.sv(), m_s * spread * p.ss() * p.ss());
  return m;
}

double q_ibft_topology(const ModelParams& p) {
  const Moments y = ibft_topology_moments(p);
  return tail_probability(p.tau0, y.mean, std::sqrt(y.variance));
}

Prediction expected_time_ibft_topology(const ModelParams& p) {
  Prediction out;
  const double relays = ibft_relay_count(p);
  const double r = p.r();
  out.t3 = (2.0 * relays + (p.n - 1.0)) / p.rs;
  out.q = resolve_q(p, q_ibft_topology(p));
  out.timer_tail = backoff_weight(r, out.q) * p.tau0;
  out.round_change = (r + (2.0 - r) * (1.0 - r) * out.q) / p.rv * relays;
  out.expected_time = out.t3 + out.timer_tail + out.round_change;
  out.tau0_star = tau0_star(p);
  return out;
}

double g_max_gaussian(double u1, double v1, double u2, double v2) {
  if (v1 < 0.0 || v2 < 0.0) throw ConfigError("variances must be non-negative");
  const double s = std::sqrt(v1 + v2);
  if (!(s > 0.0)) return std::max(u1, u2);
  const double d = (u1 - u2) / s;
  return u1 * normal_cdf(d) + u2 * normal_cdf(-d) + s * normal_pdf(d);
}

double t3_hotstuff_topology_improved(const ModelParams& p) {
  require_switched(p, "t3_hotstuff_topology_improved");
  require_counts(p);
  return hotstuff_improved_base(fault_free(p));
}

double multichain_effective_rate(double rs, int chains) {
  if (chains < 1) throw ConfigError("chain count must be at least 1");
  if (!(rs > 0.0)) throw ConfigError("switch rate must be positive");
  return rs / chains;
}

Prediction predict(const ModelParams& p) {
  if (p.topology.kind == TopologyKind::Clique) return expected_time_clique(p);
  if (p.protocol == Protocol::HotStuff) return expected_time_hotstuff_topology(p);
  if (p.n_f > 0) return expected_time_ibft_topology(p);
  Prediction out;
  out.t3 = t3_ibft_topology(p);
  out.q = resolve_q(p, q_ibft_topology(p));
  out.timer_tail = backoff_weight(0.0, out.q) * p.tau0;
  out.round_change = 2.0 * out.q / p.rv * ibft_relay_count(p);
  out.expected_time = out.t3 + out.timer_tail + out.round_change;
  out.tau0_star = tau0_star(p);
  return out;
}

std::optional<double> predict_improved(const ModelParams& p) {
  if (p.topology.kind == TopologyKind::Clique || p.protocol != Protocol::HotStuff) return std::nullopt;
  const Prediction simple = expected_time_hotstuff_topology(p);
  return hotstuff_improved_base(p) + simple.timer_tail;
}

}  // namespace bftsim::model
