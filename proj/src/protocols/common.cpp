#include "bftsim/errors.hpp"
#include "bftsim/protocols.hpp"
#include "bftsim/sim_core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace bftsim::protocol {

std::string to_string(Protocol p) { return p == Protocol::Ibft ? "ibft" : "hotstuff"; }

Protocol parse_protocol(const std::string& name) {
  if (name == "ibft" || name == "IBFT") return Protocol::Ibft;
  if (name == "hotstuff" || name == "HotStuff") return Protocol::HotStuff;
  throw ConfigError("unknown protocol: " + name);
}

std::string to_string(LeaderPolicy p) { return p == LeaderPolicy::Rotation ? "rotation" : "random"; }

LeaderPolicy parse_leader_policy(const std::string& name) {
  if (name == "rotation") return LeaderPolicy::Rotation;
  if (name == "random") return LeaderPolicy::Random;
  throw ConfigError("unknown leader policy: " + name);
}

LeaderPolicy default_leader_policy(Protocol p) {
  return p == Protocol::Ibft ? LeaderPolicy::Rotation : LeaderPolicy::Random;
}

std::string_view to_string(MessageKind kind) {
  switch (kind) {
    case MessageKind::PrePrepare: return "PRE-PREPARE";
    case MessageKind::RoundChange: return "ROUND-CHANGE";
    case MessageKind::NewView: return "NEW-VIEW";
    case MessageKind::PreCommit: return "PRECOMMIT";
    case MessageKind::Decide: return "DECIDE";
    case MessageKind::Prepare: return "PREPARE";
    case MessageKind::Commit: return "COMMIT";
  }
  return "?";
}

bool belongs_to(MessageKind kind, Protocol p) {
  switch (kind) {
    case MessageKind::PrePrepare:
    case MessageKind::RoundChange: return p == Protocol::Ibft;
    case MessageKind::NewView:
    case MessageKind::PreCommit:
    case MessageKind::Decide: return p == Protocol::HotStuff;
    case MessageKind::Prepare:
    case MessageKind::Commit: return true;
  }
  return false;
}

ValidatorId select_leader(Protocol, LeaderPolicy policy, std::uint64_t instance, std::uint32_t round, int n,
                          std::uint64_t seed, std::uint16_t chain) {
  if (n <= 0) throw ConfigError("leader selection needs n >= 1");
  if (policy == LeaderPolicy::Rotation) {
    return static_cast<ValidatorId>((instance + round + chain) % static_cast<std::uint64_t>(n));
  }
  const std::uint64_t h = sim::mix_seed(seed ^ 0x1ead3ULL, chain, instance, round);
  return static_cast<ValidatorId>(h % static_cast<std::uint64_t>(n));
}

std::vector<ValidatorId> inject_crashes(int n, int n_f, std::uint64_t seed) {
  if (n_f < 0) throw ConfigError("n_f must be non-negative");
  if (n_f > max_faults(n)) {
    throw ConfigError("n_f = " + std::to_string(n_f) + " exceeds f = " + std::to_string(max_faults(n)));
  }
  std::vector<ValidatorId> ids(static_cast<std::size_t>(n));
  std::iota(ids.begin(), ids.end(), 0);
  sim::RngStream rng(seed, 0xc2a5ULL);
  for (int i = 0; i < n_f; ++i) {
    const auto j = static_cast<std::size_t>(i) + rng.uniform_index(static_cast<std::uint32_t>(n - i));
    std::swap(ids[static_cast<std::size_t>(i)], ids[j]);
  }
  ids.resize(static_cast<std::size_t>(n_f));
  std::sort(ids.begin(), ids.end());
  return ids;
}

bool Tally::add(ValidatorId sender, int n) {
  if (seen_.empty()) seen_.assign(static_cast<std::size_t>(n), 0);
  if (sender < 0 || sender >= n) throw StructuralError("vote from unknown validator " + std::to_string(sender));
  auto& slot = seen_[static_cast<std::size_t>(sender)];
  if (slot) return false;
  slot = 1;
  ++count_;
  return true;
}

Validator::Validator(Protocol p, ValidatorId id, const ProtocolParams& params, const LeaderSchedule& schedule)
    : params_(params), schedule_(schedule) {
  if (params.n < 1) throw ConfigError("n must be at least 1");
  if (!(params.tau0 > 0.0) || !std::isfinite(params.tau0)) throw ConfigError("tau0 must be positive");
  if (id < 0 || id >= params.n) throw ConfigError("validator id out of range");
  state_.id = id;
  state_.protocol = p;
  state_.timer_duration = params.tau0;
}

Actions Validator::start() {
  Actions out;
  start(out);
  return out;
}

Actions Validator::handle(const Message& m) {
  Actions out;
  on_message(m, out);
  return out;
}

Actions Validator::expire(std::uint64_t token) {
  Actions out;
  on_timer(token, out);
  return out;
}

void Validator::arm_timer(Actions& out) {
  state_.timer_duration = std::ldexp(params_.tau0, static_cast<int>(std::min<std::uint32_t>(state_.round, 1000)));
  ++state_.timer_token;
  out.timer = TimerRequest{state_.timer_duration, state_.timer_token};
}

void Validator::record_commit(BlockId block, std::uint32_t round, int certificate, Actions& out) {
  state_.committed.push_back(block);
  out.commits.push_back(CommitRecord{state_.instance, round, block, certificate});
}

BlockId Validator::fresh_block(std::uint32_t round) const {
  BlockId b = sim::mix_seed(params_.chain, state_.instance, round, static_cast<std::uint64_t>(state_.id) + 1);
  return b == kNoBlock ? 1 : b;
}

Message Validator::make(MessageKind kind, std::uint32_t round, BlockId block) const {
  Message m;
  m.kind = kind;
  m.chain = params_.chain;
  m.sender = state_.id;
  m.dest = state_.id;
  m.instance = state_.instance;
  m.round = round;
  m.block = block;
  return m;
}

void Validator::drain(Actions& out) {
  while (moved_) {
    moved_ = false;
    if (buffered_.empty()) return;
    std::vector<Message> ready;
    std::vector<Message> keep;
    for (auto& m : buffered_) {
      if (m.instance < state_.instance) continue;
      if (m.instance == state_.instance && m.round <= state_.round) {
        ready.push_back(m);
      } else {
        keep.push_back(m);
      }
    }
    buffered_ = std::move(keep);
    for (const auto& m : ready) dispatch(m, out);
  }
}

std::unique_ptr<Validator> make_validator(Protocol p, ValidatorId id, const ProtocolParams& params,
                                          const LeaderSchedule& schedule) {
  if (p == Protocol::Ibft) return std::make_unique<IbftValidator>(id, params, schedule);
  return std::make_unique<HotStuffValidator>(id, params, schedule);
}

}  // namespace bftsim::protocol
