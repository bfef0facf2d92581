#include "bftsim/errors.hpp"
#include "bftsim/protocols.hpp"

namespace bftsim::protocol {

namespace {

int rank(Phase p) {
  switch (p) {
    case Phase::AwaitProposal: return 0;
    case Phase::PreCommit: return 1;
    case Phase::Commit: return 2;
    case Phase::Decide: return 3;
    case Phase::Prepare: break;
  }
  throw StructuralError("HotStuff validator in an IBFT phase");
}

}  // namespace

HotStuffValidator::HotStuffValidator(ValidatorId id, const ProtocolParams& params, const LeaderSchedule& schedule)
    : Validator(Protocol::HotStuff, id, params, schedule) {}

void HotStuffValidator::start(Actions& out) {
  enter_instance(0, out);
  drain(out);
}

void HotStuffValidator::on_message(const Message& m, Actions& out) {
  if (state_.crashed) return;
  dispatch(m, out);
  drain(out);
}

void HotStuffValidator::on_timer(std::uint64_t token, Actions& out) {
  if (state_.crashed || token != state_.timer_token) return;
  enter_view(state_.round + 1, out);
  Message nv = make(MessageKind::NewView, state_.round, kNoBlock);
  nv.vote = true;
  nv.dest = leader_of(state_.instance, state_.round);
  nv.justify_block = prepared_.block;
  nv.justify_round = prepared_.round;
  out.sends.push_back(Send{nv, false});
  drain(out);
}

void HotStuffValidator::enter_instance(std::uint64_t instance, Actions& out) {
  state_.instance = instance;
  views_.clear();
  prepared_ = Justification{};
  enter_view(0, out);
  Message nv = make(MessageKind::NewView, 0, kNoBlock);
  nv.vote = true;
  nv.dest = leader_of(instance, 0);
  out.sends.push_back(Send{nv, false});
}

void HotStuffValidator::enter_view(std::uint32_t view, Actions& out) {
  state_.round = view;
  state_.phase = Phase::AwaitProposal;
  arm_timer(out);
  moved_ = true;
}

void HotStuffValidator::dispatch(const Message& m, Actions& out) {
  if (!belongs_to(m.kind, Protocol::HotStuff)) {
    throw StructuralError(std::string("HotStuff validator received ") + std::string(to_string(m.kind)));
  }
  if (m.instance < state_.instance) return;
  if (m.instance > state_.instance) {
    buffered_.push_back(m);
    return;
  }
  if (m.kind == MessageKind::Decide) {
    // A decision from any view of the current instance is final.
    record_commit(m.block, m.round, m.certificate, out);
    enter_instance(state_.instance + 1, out);
    return;
  }
  if (m.vote || m.kind == MessageKind::NewView) {
    on_vote(m, out);
  } else {
    on_broadcast(m, out);
  }
}

void HotStuffValidator::on_broadcast(const Message& m, Actions& out) {
  if (m.sender != leader_of(m.instance, m.round) || m.round < state_.round) return;
  if (m.kind == MessageKind::Prepare) {
    if (m.round > state_.round) {
      enter_view(m.round, out);
    } else if (state_.phase != Phase::AwaitProposal) {
      return;
    }
    state_.phase = Phase::PreCommit;
    moved_ = true;
    send_vote(MessageKind::Prepare, m.block, out);
    return;
  }
  if (m.round > state_.round) {
    buffered_.push_back(m);
    return;
  }
  const Phase wanted = m.kind == MessageKind::PreCommit ? Phase::PreCommit : Phase::Commit;
  if (rank(state_.phase) < rank(wanted)) {
    // Overtook an earlier phase on a different route.
    buffered_.push_back(m);
    return;
  }
  if (rank(state_.phase) > rank(wanted)) return;
  if (m.kind == MessageKind::PreCommit) {
    prepared_.merge(m.block, static_cast<std::int32_t>(m.round));
    state_.phase = Phase::Commit;
  } else {
    state_.phase = Phase::Decide;
  }
  moved_ = true;
  send_vote(m.kind, m.block, out);
}

void HotStuffValidator::on_vote(const Message& m, Actions& out) {
  if (leader_of(m.instance, m.round) != state_.id || m.round < state_.round) return;
  if (m.kind == MessageKind::NewView) {
    auto& v = views_[m.round];
    if (v.new_view.add(m.sender, params_.n)) v.best.merge(m.justify_block, m.justify_round);
    maybe_propose(m.round, out);
    return;
  }
  if (m.round > state_.round) {
    buffered_.push_back(m);
    return;
  }
  auto& v = views_[m.round];
  const int quorum = params_.quorum();
  auto broadcast = [&](MessageKind kind) {
    Message b = make(kind, m.round, v.block);
    out.sends.push_back(Send{b, true});
  };
  switch (m.kind) {
    case MessageKind::Prepare:
      v.prepare.add(m.sender, params_.n);
      if (v.stage == 1 && v.prepare.count() >= quorum) {
        v.stage = 2;
        broadcast(MessageKind::PreCommit);
      }
      return;
    case MessageKind::PreCommit:
      v.pre_commit.add(m.sender, params_.n);
      if (v.stage == 2 && v.pre_commit.count() >= quorum) {
        v.stage = 3;
        broadcast(MessageKind::Commit);
      }
      return;
    case MessageKind::Commit:
      v.commit.add(m.sender, params_.n);
      if (v.stage == 3 && v.commit.count() >= params_.n - params_.f()) {
        v.stage = 4;
        Message d = make(MessageKind::Decide, m.round, v.block);
        d.certificate = v.commit.count();
        out.sends.push_back(Send{d, true});
      }
      return;
    default:
      throw StructuralError("unexpected HotStuff vote kind");
  }
}

void HotStuffValidator::maybe_propose(std::uint32_t view, Actions& out) {
  if (leader_of(state_.instance, view) != state_.id || view < state_.round) return;
  if (views_[view].stage > 0 || views_[view].new_view.count() < params_.quorum()) return;
  if (view > state_.round) enter_view(view, out);
  auto& v = views_[view];
  Justification best = v.best;
  best.merge(prepared_.block, prepared_.round);
  v.block = best.round >= 0 ? best.block : fresh_block(view);
  v.stage = 1;
  out.sends.push_back(Send{make(MessageKind::Prepare, view, v.block), true});
}

void HotStuffValidator::send_vote(MessageKind kind, BlockId block, Actions& out) {
  Message m = make(kind, state_.round, block);
  m.vote = true;
  m.dest = leader_of(state_.instance, state_.round);
  out.sends.push_back(Send{m, false});
}

}  // namespace bftsim::protocol
