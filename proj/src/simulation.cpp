#include "bftsim/simulation.hpp"

#include "bftsim/errors.hpp"
#include "bftsim/sim_core.hpp"
#include "bftsim/topology.hpp"

#include <algorithm>
#include <memory>
#include <numeric>

namespace bftsim {

namespace {

using protocol::Actions;
using protocol::Message;
using protocol::ValidatorId;

constexpr std::uint64_t kRoutingStream = 0x7e7a11ULL;
constexpr std::uint64_t kSwitchStreamBase = 1ULL << 32;

class Run {
 public:
  Run(const SimConfig& c, Observer* observer, std::ostream* trace)
      : cfg_(c), observer_(observer), trace_(trace), routing_(c.seed, kRoutingStream) {
    validate(c);
    const int n = c.n;
    const bool switched = c.topology.kind != topology::TopologyKind::Clique;
    if (switched) {
      graph_ = topology::build_topology(c.topology);
      placement_ = topology::place_validators(graph_, n);
      result_.h_t = topology::average_hop_distance(graph_, placement_);
    }
    for (int v = 0; v < n; ++v) {
      engine_.add_station(sim::StationRole::Validator, c.rv * c.chains, c.validator_service,
                          sim::RngStream(c.seed, static_cast<std::uint64_t>(v)));
    }
    if (switched) {
      for (std::size_t s = 0; s < graph_.switch_count(); ++s) {
        engine_.add_station(sim::StationRole::Switch, c.rs, c.switch_service,
                            sim::RngStream(c.seed, kSwitchStreamBase + s));
      }
    }
    result_.crashed = protocol::inject_crashes(n, c.n_f, c.seed);
    for (ValidatorId v : result_.crashed) engine_.station(static_cast<sim::StationId>(v)).crash();

    protocol::ProtocolParams params;
    params.n = n;
    params.tau0 = c.tau0;
    validators_.resize(static_cast<std::size_t>(c.chains));
    for (int ch = 0; ch < c.chains; ++ch) {
      params.chain = static_cast<std::uint16_t>(ch);
      protocol::LeaderSchedule schedule{c.protocol, c.leader_policy(), n, c.seed, params.chain};
      for (int v = 0; v < n; ++v) {
        validators_[static_cast<std::size_t>(ch)].push_back(protocol::make_validator(c.protocol, v, params, schedule));
      }
    }
    result_.instance_times.resize(static_cast<std::size_t>(c.chains));
    result_.decided.resize(static_cast<std::size_t>(c.chains));
    last_commit_.assign(static_cast<std::size_t>(c.chains), 0.0);
    required_ = c.protocol == protocol::Protocol::HotStuff ? n - protocol::max_faults(n) : protocol::quorum_size(n);
  }

  SimResult execute() {
    for (int ch = 0; ch < cfg_.chains; ++ch) {
      for (int v = 0; v < cfg_.n; ++v) {
        if (crashed(v)) continue;
        actions_.clear();
        validator(ch, v).start(actions_);
        apply(ch, v);
      }
    }
    const double horizon = cfg_.effective_horizon();
    double last_progress = 0.0;
    std::size_t done_before = 0;
    while (!finished_) {
      if (engine_.idle()) throw SimulationError("simulation stalled: no pending events before completion");
      const sim::Event ev = engine_.next();
      ++result_.events;
      if (ev.kind == sim::EventKind::ServiceCompletion) {
        on_service(ev.station, static_cast<sim::MessageHandle>(ev.payload));
      } else {
        const auto chain = static_cast<int>(ev.payload & 0xffffU);
        const auto v = static_cast<int>(ev.station);
        actions_.clear();
        validator(chain, v).on_timer(ev.payload >> 16, actions_);
        apply(chain, v);
      }
      if (result_.completed != done_before) {
        done_before = result_.completed;
        last_progress = engine_.now();
      } else if (engine_.now() - last_progress > horizon) {
        throw SimulationError("livelock: no commit within horizon " + std::to_string(horizon) + " after t=" +
                              std::to_string(last_progress));
      }
    }
    result_.end_time = engine_.now();
    double total = 0.0;
    for (const auto& times : result_.instance_times) total = std::accumulate(times.begin(), times.end(), total);
    result_.mean_time = result_.completed ? total / static_cast<double>(result_.completed) : 0.0;
    return std::move(result_);
  }

 private:
  struct InFlight {
    Message msg;
  };

  [[nodiscard]] bool crashed(int v) const { return engine_.station(static_cast<sim::StationId>(v)).crashed(); }

  protocol::Validator& validator(int chain, int v) {
    return *validators_[static_cast<std::size_t>(chain)][static_cast<std::size_t>(v)];
  }

  sim::StationId switch_station(topology::SwitchId s) const {
    return static_cast<sim::StationId>(cfg_.n) + static_cast<sim::StationId>(s);
  }

  sim::MessageHandle store(const Message& m) {
    if (!free_.empty()) {
      const sim::MessageHandle h = free_.back();
      free_.pop_back();
      pool_[h].msg = m;
      return h;
    }
    pool_.push_back(InFlight{m});
    return static_cast<sim::MessageHandle>(pool_.size() - 1);
  }

  void release(sim::MessageHandle h) { free_.push_back(h); }

  void hand_to(sim::MessageHandle h, sim::StationId target) {
    if (!engine_.deliver(h, target)) release(h);
  }

  void route(const Message& m) {
    const sim::MessageHandle h = store(m);
    if (m.dest == m.sender || !placement_.attached()) {
      hand_to(h, static_cast<sim::StationId>(m.dest));
      return;
    }
    hand_to(h, switch_station(placement_.edge_of[static_cast<std::size_t>(m.sender)]));
  }

  void on_service(sim::StationId station, sim::MessageHandle h) {
    if (station >= static_cast<sim::StationId>(cfg_.n)) {
      ++result_.switch_messages;
      const auto here = static_cast<topology::SwitchId>(station - static_cast<sim::StationId>(cfg_.n));
      const auto dest = pool_[h].msg.dest;
      const topology::SwitchId target = placement_.edge_of[static_cast<std::size_t>(dest)];
      if (here == target) {
        hand_to(h, static_cast<sim::StationId>(dest));
      } else {
        hand_to(h, switch_station(topology::next_hop(graph_, here, target, routing_)));
      }
      return;
    }
    ++result_.validator_messages;
    const Message m = pool_[h].msg;
    release(h);
    if (trace_) {
      *trace_ << engine_.now() << ' ' << protocol::to_string(m.kind) << ' ' << m.sender << ' ' << m.dest << ' '
              << m.instance << ' ' << m.round << '\n';
    }
    if (observer_) observer_->on_processed(engine_.now(), m);
    actions_.clear();
    validator(m.chain, m.dest).on_message(m, actions_);
    apply(m.chain, m.dest);
  }

  void apply(int chain, int v) {
    // Commits first: an instance ends when its deciding message is serviced.
    for (const auto& rec : actions_.commits) record(chain, v, rec);
    if (actions_.timer) {
      const auto payload = (actions_.timer->token << 16) | static_cast<std::uint64_t>(chain);
      engine_.schedule_timer(static_cast<sim::StationId>(v), engine_.now() + actions_.timer->duration, payload);
    }
    for (const auto& send : actions_.sends) {
      if (!send.broadcast) {
        route(send.msg);
        continue;
      }
      Message copy = send.msg;
      copy.dest = v;
      route(copy);
      for (int k = 1; k < cfg_.n; ++k) {
        copy.dest = (v + k) % cfg_.n;
        route(copy);
      }
    }
  }

  void record(int chain, int v, const protocol::CommitRecord& rec) {
    if (observer_) observer_->on_commit(engine_.now(), static_cast<std::uint16_t>(chain), v, rec);
    if (rec.certificate < required_) ++result_.subquorum_commits;
    auto& decided = result_.decided[static_cast<std::size_t>(chain)];
    if (rec.instance < decided.size()) {
      if (decided[rec.instance] != rec.block) ++result_.divergent_commits;
      return;
    }
    if (rec.instance != decided.size()) throw StructuralError("commit skipped an instance");
    decided.push_back(rec.block);
    if (rec.round > 0) ++result_.round_change_instances;
    auto& last = last_commit_[static_cast<std::size_t>(chain)];
    result_.instance_times[static_cast<std::size_t>(chain)].push_back(engine_.now() - last);
    last = engine_.now();
    ++result_.completed;
    if (decided.size() >= static_cast<std::size_t>(cfg_.instances)) finished_ = true;
  }

  SimConfig cfg_;
  Observer* observer_;
  std::ostream* trace_;
  sim::Engine engine_;
  sim::RngStream routing_;
  topology::TopologyGraph graph_;
  topology::Placement placement_;
  std::vector<std::vector<std::unique_ptr<protocol::Validator>>> validators_;
  std::vector<InFlight> pool_;
  std::vector<sim::MessageHandle> free_;
  Actions actions_;
  std::vector<double> last_commit_;
  int required_ = 0;
  bool finished_ = false;
  SimResult result_;
};

}  // namespace

SimResult run_simulation(const SimConfig& c, Observer* observer, std::ostream* trace) {
  Run run(c, observer, trace);
  return run.execute();
}

}  // namespace bftsim
