#pragma once

// IBFT and HotStuff validator state machines. Each validator is a transition
// function (state, input) -> (state, actions): inputs are delivered messages
// and timer expiries, actions are sends, a timer (re)start and commits. The
// engine owns time; validators never see a clock.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace bftsim::protocol {

enum class Protocol { Ibft, HotStuff };

std::string to_string(Protocol p);
Protocol parse_protocol(const std::string& name);

// Rotation: (instance + round) mod n, offset by the chain index. Random: uniform per (instance, round),
// a pure function of the seed.
enum class LeaderPolicy { Rotation, Random };

std::string to_string(LeaderPolicy p);
LeaderPolicy parse_leader_policy(const std::string& name);
LeaderPolicy default_leader_policy(Protocol p);

enum class MessageKind : std::uint8_t {
  // IBFT
  PrePrepare,
  RoundChange,
  // HotStuff
  NewView,
  PreCommit,
  Decide,
  // both
  Prepare,
  Commit,
};

std::string_view to_string(MessageKind kind);
bool belongs_to(MessageKind kind, Protocol p);

using ValidatorId = std::int32_t;
using BlockId = std::uint64_t;

inline constexpr BlockId kNoBlock = 0;

struct Message {
  MessageKind kind = MessageKind::Prepare;
  bool vote = false;  // HotStuff: vote to the leader rather than the leader's broadcast
  std::uint16_t chain = 0;
  ValidatorId sender = 0;
  ValidatorId dest = 0;
  std::uint64_t instance = 0;
  std::uint32_t round = 0;  // IBFT round or HotStuff view, within the instance
  BlockId block = kNoBlock;
  // Highest prepared block the sender knows of (ROUND-CHANGE, NEW-VIEW).
  BlockId justify_block = kNoBlock;
  std::int32_t justify_round = -1;
  // Size of the vote quorum backing a HotStuff DECIDE.
  std::int32_t certificate = 0;
};

// f = floor((n-1)/3): the largest number of crash faults n validators tolerate.
constexpr int max_faults(int n) { return n >= 1 ? (n - 1) / 3 : 0; }
constexpr int quorum_size(int n) { return 2 * max_faults(n) + 1; }

ValidatorId select_leader(Protocol p, LeaderPolicy policy, std::uint64_t instance, std::uint32_t round, int n,
                          std::uint64_t seed, std::uint16_t chain = 0);
inline ValidatorId select_leader(Protocol p, std::uint64_t instance, std::uint32_t round, int n, std::uint64_t seed) {
  return select_leader(p, default_leader_policy(p), instance, round, n, seed);
}

// n_f distinct validators, uniformly chosen from the seed, sorted ascending.
// Throws ConfigError when n_f > max_faults(n) or n_f < 0.
std::vector<ValidatorId> inject_crashes(int n, int n_f, std::uint64_t seed);

struct LeaderSchedule {
  Protocol protocol = Protocol::Ibft;
  LeaderPolicy policy = LeaderPolicy::Rotation;
  int n = 0;
  std::uint64_t seed = 0;
  std::uint16_t chain = 0;

  [[nodiscard]] ValidatorId leader(std::uint64_t instance, std::uint32_t round) const {
    return select_leader(protocol, policy, instance, round, n, seed, chain);
  }
};

struct ProtocolParams {
  int n = 4;
  double tau0 = 1e6;
  std::uint16_t chain = 0;

  [[nodiscard]] int f() const { return max_faults(n); }
  [[nodiscard]] int quorum() const { return quorum_size(n); }
};

struct Send {
  Message msg;
  bool broadcast = false;  // expand to every validator, self included
};

struct TimerRequest {
  double duration = 0.0;
  std::uint64_t token = 0;
};

struct CommitRecord {
  std::uint64_t instance = 0;
  std::uint32_t round = 0;
  BlockId block = kNoBlock;
  int certificate = 0;  // distinct votes behind the decision
};

struct Actions {
  std::vector<Send> sends;
  std::optional<TimerRequest> timer;  // replaces any running timer
  std::vector<CommitRecord> commits;

  void clear() {
    sends.clear();
    timer.reset();
    commits.clear();
  }
};

enum class Phase : std::uint8_t {
  AwaitProposal,  // IBFT PRE-PREPARE / HotStuff PREPARE
  Prepare,        // IBFT: collecting PREPARE
  Commit,         // IBFT: collecting COMMIT; HotStuff: waiting for the COMMIT broadcast
  PreCommit,      // HotStuff: waiting for the PRECOMMIT broadcast
  Decide,         // HotStuff: waiting for DECIDE
};

struct ValidatorState {
  ValidatorId id = 0;
  Protocol protocol = Protocol::Ibft;
  std::uint64_t instance = 0;
  std::uint32_t round = 0;
  Phase phase = Phase::AwaitProposal;
  double timer_duration = 0.0;
  std::uint64_t timer_token = 0;
  std::vector<BlockId> committed;
  bool crashed = false;
};

// Distinct-sender vote counter.
class Tally {
 public:
  // Returns false when the sender was already counted.
  bool add(ValidatorId sender, int n);
  [[nodiscard]] int count() const { return count_; }

 private:
  std::vector<std::uint8_t> seen_;
  int count_ = 0;
};

class Validator {
 public:
  Validator(Protocol p, ValidatorId id, const ProtocolParams& params, const LeaderSchedule& schedule);
  virtual ~Validator() = default;
  Validator(const Validator&) = delete;
  Validator& operator=(const Validator&) = delete;

  virtual void start(Actions& out) = 0;
  virtual void on_message(const Message& m, Actions& out) = 0;
  // Stale tokens (timer reset since it was armed) are ignored.
  virtual void on_timer(std::uint64_t token, Actions& out) = 0;

  Actions start();
  Actions handle(const Message& m);
  Actions expire(std::uint64_t token);

  [[nodiscard]] const ValidatorState& state() const { return state_; }
  [[nodiscard]] const ProtocolParams& params() const { return params_; }
  [[nodiscard]] ValidatorId leader_of(std::uint64_t instance, std::uint32_t round) const {
    return schedule_.leader(instance, round);
  }

 protected:
  void arm_timer(Actions& out);
  void record_commit(BlockId block, std::uint32_t round, int certificate, Actions& out);
  [[nodiscard]] BlockId fresh_block(std::uint32_t round) const;
  [[nodiscard]] Message make(MessageKind kind, std::uint32_t round, BlockId block) const;
  // Re-dispatches buffered messages once the validator's position changed.
  void drain(Actions& out);
  virtual void dispatch(const Message& m, Actions& out) = 0;

  ValidatorState state_;
  ProtocolParams params_;
  LeaderSchedule schedule_;
  std::vector<Message> buffered_;
  bool moved_ = false;

  // Per-instance, keyed by round.
  struct Justification {
    BlockId block = kNoBlock;
    std::int32_t round = -1;
    void merge(BlockId b, std::int32_t r) {
      if (r > round) {
        block = b;
        round = r;
      }
    }
  };
  Justification prepared_;  // own highest prepared block in this instance
};

class IbftValidator final : public Validator {
 public:
  IbftValidator(ValidatorId id, const ProtocolParams& params, const LeaderSchedule& schedule);

  using Validator::start;
  void start(Actions& out) override;
  void on_message(const Message& m, Actions& out) override;
  void on_timer(std::uint64_t token, Actions& out) override;

 private:
  void dispatch(const Message& m, Actions& out) override;
  void enter_instance(std::uint64_t instance, Actions& out);
  void enter_round(std::uint32_t round, Actions& out);
  void on_pre_prepare(const Message& m, Actions& out);
  void check_prepared(Actions& out);
  void maybe_lead(std::uint32_t round, Actions& out);

  struct RoundVotes {
    Tally prepare;
    Tally commit;
    Tally round_change;
    Justification best;
    bool proposed = false;
  };
  RoundVotes& votes(std::uint32_t round) { return rounds_[round]; }

  std::map<std::uint32_t, RoundVotes> rounds_;
  BlockId proposal_ = kNoBlock;
};

class HotStuffValidator final : public Validator {
 public:
  HotStuffValidator(ValidatorId id, const ProtocolParams& params, const LeaderSchedule& schedule);

  using Validator::start;
  void start(Actions& out) override;
  void on_message(const Message& m, Actions& out) override;
  void on_timer(std::uint64_t token, Actions& out) override;

 private:
  void dispatch(const Message& m, Actions& out) override;
  void enter_instance(std::uint64_t instance, Actions& out);
  void enter_view(std::uint32_t view, Actions& out);
  void on_broadcast(const Message& m, Actions& out);
  void on_vote(const Message& m, Actions& out);
  void maybe_propose(std::uint32_t view, Actions& out);
  void send_vote(MessageKind kind, BlockId block, Actions& out);

  struct ViewVotes {
    Tally new_view;
    Tally prepare;
    Tally pre_commit;
    Tally commit;
    Justification best;
    BlockId block = kNoBlock;
    int stage = 0;  // leader broadcasts issued: 1 PREPARE .. 4 DECIDE
  };
  std::map<std::uint32_t, ViewVotes> views_;
};

std::unique_ptr<Validator> make_validator(Protocol p, ValidatorId id, const ProtocolParams& params,
                                          const LeaderSchedule& schedule);

}  // namespace bftsim::protocol
