#include "bftsim/errors.hpp"
#include "bftsim/protocols.hpp"

namespace bftsim::protocol {

IbftValidator::IbftValidator(ValidatorId id, const ProtocolParams& params, const LeaderSchedule& schedule)
    : Validator(Protocol::Ibft, id, params, schedule) {}

void IbftValidator::start(Actions& out) {
  enter_instance(0, out);
  drain(out);
}

void IbftValidator::on_message(const Message& m, Actions& out) {
  if (state_.crashed) return;
  dispatch(m, out);
  drain(out);
}

void IbftValidator::on_timer(std::uint64_t token, Actions& out) {
  if (state_.crashed || token != state_.timer_token) return;
  const std::uint32_t next = state_.round + 1;
  Message rc = make(MessageKind::RoundChange, next, kNoBlock);
  rc.justify_block = prepared_.block;
  rc.justify_round = prepared_.round;
  out.sends.push_back(Send{rc, true});
  enter_round(next, out);
  maybe_lead(next, out);
  drain(out);
}

void IbftValidator::enter_instance(std::uint64_t instance, Actions& out) {
  state_.instance = instance;
  rounds_.clear();
  prepared_ = Justification{};
  enter_round(0, out);
  if (leader_of(instance, 0) == state_.id) {
    auto& v = votes(0);
    v.proposed = true;
    arm_timer(out);
    out.sends.push_back(Send{make(MessageKind::PrePrepare, 0, fresh_block(0)), true});
  }
}

void IbftValidator::enter_round(std::uint32_t round, Actions& out) {
  state_.round = round;
  state_.phase = Phase::AwaitProposal;
  proposal_ = kNoBlock;
  arm_timer(out);
  moved_ = true;
}

void IbftValidator::dispatch(const Message& m, Actions& out) {
  if (!belongs_to(m.kind, Protocol::Ibft) || m.vote) {
    throw StructuralError(std::string("IBFT validator received ") + std::string(to_string(m.kind)));
  }
  if (m.instance < state_.instance) return;
  if (m.instance > state_.instance) {
    buffered_.push_back(m);
    return;
  }
  switch (m.kind) {
    case MessageKind::PrePrepare:
      on_pre_prepare(m, out);
      return;
    case MessageKind::Prepare:
      if (m.round > state_.round) {
        buffered_.push_back(m);
      } else if (m.round == state_.round) {
        votes(m.round).prepare.add(m.sender, params_.n);
        check_prepared(out);
      }
      return;
    case MessageKind::Commit: {
      if (m.round > state_.round) {
        buffered_.push_back(m);
        return;
      }
      // A commit quorum from an earlier round still decides the instance.
      auto& t = votes(m.round).commit;
      t.add(m.sender, params_.n);
      if (t.count() >= params_.quorum()) {
        const int cert = t.count();
        record_commit(m.block, m.round, cert, out);
        enter_instance(state_.instance + 1, out);
      }
      return;
    }
    case MessageKind::RoundChange: {
      if (m.round < state_.round) return;
      auto& v = votes(m.round);
      if (v.round_change.add(m.sender, params_.n)) v.best.merge(m.justify_block, m.justify_round);
      maybe_lead(m.round, out);
      return;
    }
    default:
      throw StructuralError("unreachable IBFT message kind");
  }
}

void IbftValidator::on_pre_prepare(const Message& m, Actions& out) {
  if (m.sender != leader_of(m.instance, m.round)) return;
  if (m.round < state_.round) return;
  if (m.round > state_.round) {
    enter_round(m.round, out);
  } else if (state_.phase != Phase::AwaitProposal) {
    return;
  }
  proposal_ = m.block;
  state_.phase = Phase::Prepare;
  arm_timer(out);
  out.sends.push_back(Send{make(MessageKind::Prepare, state_.round, proposal_), true});
  check_prepared(out);
}

void IbftValidator::check_prepared(Actions& out) {
  if (state_.phase != Phase::Prepare) return;
  if (votes(state_.round).prepare.count() < params_.quorum()) return;
  prepared_.merge(proposal_, static_cast<std::int32_t>(state_.round));
  state_.phase = Phase::Commit;
  out.sends.push_back(Send{make(MessageKind::Commit, state_.round, proposal_), true});
}

void IbftValidator::maybe_lead(std::uint32_t round, Actions& out) {
  if (leader_of(state_.instance, round) != state_.id || round < state_.round) return;
  auto& v = votes(round);
  if (v.proposed || v.round_change.count() < params_.quorum()) return;
  if (round > state_.round) enter_round(round, out);
  auto& cur = votes(round);
  cur.proposed = true;
  Justification best = cur.best;
  best.merge(prepared_.block, prepared_.round);
  const BlockId block = best.round >= 0 ? best.block : fresh_block(round);
  arm_timer(out);
  out.sends.push_back(Send{make(MessageKind::PrePrepare, round, block), true});
}

}  // namespace bftsim::protocol
