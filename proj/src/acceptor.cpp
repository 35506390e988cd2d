#include "hetcons/acceptor.hpp"

namespace hetcons {

Acceptor::Acceptor(std::string me, Context& ctx) : me_(std::move(me)), ctx_(&ctx) {}

bool Acceptor::knows(const MessageId& id) const {
    const auto& st = ctx_->store();
    return st.contains(id) && known_.test(st.index_of(id));
}

bool Acceptor::refs_known(const Message& m) const {
    for (const auto& r : m.refs)
        if (!knows(r)) return false;
    return true;
}

void Acceptor::note_known(int idx) {
    known_.set(idx);
    recently_.push_back(idx);
    const auto& st = ctx_->store();
    if (st.has_1a(idx)) {
        const Ballot& b = st.ballot_of(idx);
        if (!max_ballot_ || b > *max_ballot_) max_ballot_ = b;
    }
}

ReceiveResult Acceptor::receive(const Message& m) {
    ReceiveResult res;
    if (!refs_known(m)) {
        pending_.push_back(m);
        res.parked.push_back(m.id());
        return res;
    }
    process(m, res);
    drain_pending(res);
    return res;
}

void Acceptor::drain_pending(ReceiveResult& res) {
    bool progress = true;
    while (progress) {
        progress = false;
        for (auto it = pending_.begin(); it != pending_.end(); ++it) {
            if (!refs_known(*it)) continue;
            Message m = std::move(*it);
            pending_.erase(it);
            process(m, res);
            progress = true;
            break;  // restart scan so arrival order is respected
        }
    }
}

void Acceptor::process(const Message& m, ReceiveResult& res) {
    auto& st = ctx_->store();
    MessageId id = m.id();
    int idx = st.insert(m);
    if (known_.test(idx)) return;

    if (m.kind == MsgKind::OneA) {
        auto [it, fresh_ballot] = first_1a_by_ballot_.try_emplace(m.ballot, id);
        if (!fresh_ballot && it->second != id) {
            auto v = ViolationRecord{"DuplicateBallot",
                                     "distinct 1a reuses ballot (time " +
                                         std::to_string(m.ballot.time) + ")",
                                     id};
            violations_.push_back(v);
            res.violations.push_back(v);
            return;
        }
    }
    if (!ctx_->well_formed(idx)) {
        auto v = ViolationRecord{"MalformedMessage", "dropped non-well-formed message", id};
        violations_.push_back(v);
        res.violations.push_back(v);
        return;
    }

    res.outbound.push_back(id);  // echo to all acceptors and learners
    note_known(idx);

    if (m.kind == MsgKind::OneA) {
        // Answer only when the reply would be well-formed: a 1b whose closure
        // holds another message at its own dominant ballot is malformed, so a
        // 1a that arrives after a higher ballot gets no reply — and must not
        // wipe recently_received, which still backs the top-ballot 2as.
        IdSet cl;
        for (int i : recently_) cl.merge(st.tran(i));
        int dom = -1;
        for (int i : cl.indices())
            if (st.at(i).kind == MsgKind::OneA &&
                (dom < 0 || st.at(i).ballot > st.at(dom).ballot))
                dom = i;
        for (int i : cl.indices()) {
            if (i == dom || !st.has_1a(i)) continue;
            if (st.ballot_of(i) == st.at(dom).ballot) return;  // companion
        }
        Message z;
        z.kind = MsgKind::OneB;
        z.signer = me_;
        for (int i : recently_) z.refs.push_back(st.id_at(i));
        recently_.clear();
        process(z, res);  // self-delivery precedes any other receipt
        return;
    }

    if (m.kind == MsgKind::TwoA) return;

    // 1b: emit per-learner 2as when this 1b sits at the top known ballot.
    // Copy: inserting the 2as below may reallocate the store.
    Ballot bal = st.ballot_of(idx);
    if (!max_ballot_ || bal != *max_ballot_) return;

    // All learners' 2as share one snapshot so they differ only in lrn.
    std::vector<MessageId> snapshot;
    IdSet closure;
    for (int i : recently_) {
        snapshot.push_back(st.id_at(i));
        closure.merge(st.tran(i));
    }
    std::vector<Message> batch;
    for (const auto& lrn : ctx_->graph().learners()) {
        if (emitted_2a_.count({bal, lrn})) continue;
        // Emit only when the snapshot already carries a quorum of fresh
        // same-ballot 1bs including our own; this keeps candidates that could
        // never be well-formed out of the shared store.
        int li = ctx_->graph().learner_index(lrn);
        Mask sigs = 0;
        bool self_in = false;
        for (int i : closure.indices()) {
            const Message& om = st.at(i);
            if (om.kind != MsgKind::OneB || !st.has_1a(i)) continue;
            if (st.ballot_of(i) != bal || !ctx_->fresh(li, i)) continue;
            if (!ctx_->graph().acceptors().knows(om.signer)) continue;
            sigs |= Mask{1} << ctx_->graph().acceptors().index_of(om.signer);
            if (om.signer == me_) self_in = true;
        }
        if (!self_in || !ctx_->graph().quorums(li).contains(sigs)) continue;
        Message z;
        z.kind = MsgKind::TwoA;
        z.signer = me_;
        z.refs = snapshot;
        z.lrn = lrn;
        int zidx = st.insert(z);
        if (!ctx_->well_formed(zidx)) continue;  // keep recently_received
        emitted_2a_.insert({bal, lrn});
        batch.push_back(std::move(z));
    }
    if (batch.empty()) return;
    recently_.clear();
    for (const auto& z : batch) process(z, res);
}

void Acceptor::admit_external(const MessageId& id) {
    auto& st = ctx_->store();
    int idx = st.index_of(id);
    if (known_.test(idx)) return;
    known_.set(idx);
    const Message& m = st.at(idx);
    if (m.kind == MsgKind::OneA) first_1a_by_ballot_.try_emplace(m.ballot, id);
    if (st.has_1a(idx)) {
        const Ballot& b = st.ballot_of(idx);
        if (!max_ballot_ || b > *max_ballot_) max_ballot_ = b;
    }
}

}  // namespace hetcons
