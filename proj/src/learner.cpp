#include "hetcons/learner.hpp"

namespace hetcons {

Learner::Learner(std::string me, Context& ctx)
    : me_(std::move(me)), my_index_(ctx.graph().learner_index(me_)), ctx_(&ctx) {}

bool Learner::knows(const MessageId& id) const {
    const auto& st = ctx_->store();
    return st.contains(id) && known_.test(st.index_of(id));
}

bool Learner::refs_known(const Message& m) const {
    for (const auto& r : m.refs)
        if (!knows(r)) return false;
    return true;
}

std::vector<DecisionEvent> Learner::receive(const Message& m) {
    std::vector<DecisionEvent> events;
    if (!refs_known(m)) {
        pending_.push_back(m);
        return events;
    }
    process(m, events);
    bool progress = true;
    while (progress) {
        progress = false;
        for (auto it = pending_.begin(); it != pending_.end(); ++it) {
            if (!refs_known(*it)) continue;
            Message mm = std::move(*it);
            pending_.erase(it);
            process(mm, events);
            progress = true;
            break;
        }
    }
    return events;
}

void Learner::process(const Message& m, std::vector<DecisionEvent>& events) {
    auto& st = ctx_->store();
    int idx = st.insert(m);
    if (known_.test(idx)) return;
    if (!ctx_->well_formed(idx)) {
        violations_.push_back({"MalformedMessage", "dropped non-well-formed message", m.id()});
        return;
    }
    known_.set(idx);
    if (m.kind != MsgKind::TwoA || m.lrn != me_ || !st.has_1a(idx)) return;
    if (!ctx_->graph().acceptors().knows(m.signer)) return;

    const Ballot& bal = st.ballot_of(idx);
    auto& entry = by_ballot_[bal];
    entry.first |= Mask{1} << ctx_->graph().acceptors().index_of(m.signer);
    entry.second.push_back(m.id());
    if (decided_.count(bal)) return;
    if (!ctx_->graph().quorums(my_index_).contains(entry.first)) return;
    decided_.insert(bal);
    DecisionEvent ev{me_, st.slot_of(idx), st.value_of(idx), bal, entry.second};
    decisions_.push_back(ev);
    events.push_back(ev);
}

void Learner::admit_external(const MessageId& id) {
    known_.set(ctx_->store().index_of(id));
}

}  // namespace hetcons
