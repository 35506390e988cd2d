#include "hetcons/protocol.hpp"

#include <algorithm>

namespace hetcons {

Context::Context(const LearnerGraph& graph, MessageStore& store)
    : graph_(&graph), store_(&store) {
    auto v = check_valid(graph);  // throws NotCondensed first when applicable
    if (!v.ok) throw std::invalid_argument("learner graph fails validity");
}

Mask Context::caught(int x) {
    if (x >= static_cast<int>(caught_.size())) caught_.resize(x + 1);
    if (caught_[x]) return *caught_[x];

    const auto& st = *store_;
    std::map<std::string, std::vector<int>> by_signer;
    for (int i : st.tran(x).indices()) by_signer[st.at(i).signer].push_back(i);

    Mask out = 0;
    for (auto& [signer, msgs] : by_signer) {
        if (msgs.size() < 2 || !graph_->acceptors().knows(signer)) continue;
        bool caught_one = false;
        for (std::size_t i = 0; i < msgs.size() && !caught_one; ++i) {
            for (std::size_t j = i + 1; j < msgs.size() && !caught_one; ++j) {
                if (st.tran(msgs[i]).test(msgs[j]) || st.tran(msgs[j]).test(msgs[i]))
                    continue;
                // 2as of one batch differ only in their learner field and share
                // one snapshot, so they carry no conflicting history: one
                // logical multicast, not equivocation.
                const Message& a = st.at(msgs[i]);
                const Message& b = st.at(msgs[j]);
                if (a.kind == MsgKind::TwoA && b.kind == MsgKind::TwoA &&
                    a.refs == b.refs)
                    continue;
                caught_one = true;
            }
        }
        if (caught_one) out |= Mask{1} << graph_->acceptors().index_of(signer);
    }
    caught_[x] = out;
    return out;
}

std::vector<int> Context::con(int learner, int x) {
    Mask bad = caught(x);
    std::vector<int> out;
    for (int b = 0; b < graph_->learner_count(); ++b) {
        for (Mask s : graph_->edge(learner, b).minimal()) {
            if ((s & bad) == 0) {
                out.push_back(b);
                break;
            }
        }
    }
    return out;
}

std::vector<int> Context::q2a(int x) {
    const auto& st = *store_;
    const Message& m = st.at(x);
    if (m.kind != MsgKind::TwoA || !st.has_1a(x) || !graph_->has_learner(m.lrn))
        return {};
    int lrn = graph_->learner_index(m.lrn);
    const Ballot& bal = st.ballot_of(x);
    std::vector<int> out;
    for (int i : st.tran(x).indices()) {
        if (st.at(i).kind != MsgKind::OneB || !st.has_1a(i)) continue;
        if (st.ballot_of(i) != bal) continue;
        if (fresh(lrn, i)) out.push_back(i);
    }
    return out;
}

bool Context::buries(int m, int x) {
    auto key = std::make_pair(m, x);
    if (auto it = buries_.find(key); it != buries_.end()) return it->second;
    const auto& st = *store_;
    bool out = false;
    if (st.tran(m).test(x)) {
        const Ballot& bx = st.ballot_of(x);
        const Value& vx = st.value_of(x);
        const std::string& lrn = st.at(x).lrn;
        for (int z : st.tran(m).indices()) {
            const Message& zm = st.at(z);
            if (zm.kind != MsgKind::TwoA || zm.lrn != lrn || !st.has_1a(z)) continue;
            if (st.ballot_of(z) > bx && !(st.value_of(z) == vx)) {
                out = true;
                break;
            }
        }
    }
    buries_[key] = out;
    return out;
}

bool Context::buried(int x, int y) {
    auto key = std::make_pair(x, y);
    if (auto it = buried_.find(key); it != buried_.end()) return it->second;
    const auto& st = *store_;
    bool out = false;
    const Message& xm = st.at(x);
    if (xm.kind == MsgKind::TwoA && st.has_1a(x) && graph_->has_learner(xm.lrn)) {
        Mask sigs = 0;
        for (int m : st.tran(y).indices()) {
            const std::string& signer = st.at(m).signer;
            if (!graph_->acceptors().knows(signer)) continue;
            if (buries(m, x)) sigs |= Mask{1} << graph_->acceptors().index_of(signer);
        }
        out = graph_->quorums(graph_->learner_index(xm.lrn)).contains(sigs);
    }
    buried_[key] = out;
    return out;
}

std::vector<int> Context::cona(int learner, int x) {
    const auto& st = *store_;
    const Message& xm = st.at(x);
    std::vector<int> connected = con(learner, x);
    std::vector<int> out;
    for (int m : st.tran(x).indices()) {
        const Message& mm = st.at(m);
        if (mm.kind != MsgKind::TwoA || mm.signer != xm.signer) continue;
        if (!graph_->has_learner(mm.lrn)) continue;
        int ml = graph_->learner_index(mm.lrn);
        if (!std::binary_search(connected.begin(), connected.end(), ml)) continue;
        if (!buried(m, x)) out.push_back(m);
    }
    return out;
}

bool Context::fresh(int learner, int x) {
    auto key = std::make_pair(learner, x);
    if (auto it = fresh_.find(key); it != fresh_.end()) return it->second;
    const auto& st = *store_;
    bool out = true;
    if (!st.has_1a(x)) {
        out = false;
    } else {
        const Value& vx = st.value_of(x);
        for (int m : cona(learner, x)) {
            if (!st.has_1a(m) || !(st.value_of(m) == vx)) {
                out = false;
                break;
            }
        }
    }
    fresh_[key] = out;
    return out;
}

bool Context::well_formed(int x) {
    if (x >= static_cast<int>(wf_.size())) wf_.resize(x + 1, -1);
    if (wf_[x] >= 0) return wf_[x] == 1;

    const auto& st = *store_;
    const Message& m = st.at(x);
    bool out = false;
    switch (m.kind) {
        case MsgKind::OneA: {
            Ballot expect = make_ballot(m.ballot.time, m.value, m.signer, m.slot);
            out = m.ballot.tiebreak == expect.tiebreak;
            break;
        }
        case MsgKind::OneB: {
            if (!st.has_1a(x)) break;
            int one_a = st.get1a(x);
            const Ballot& bal = st.ballot_of(x);
            out = true;
            for (int y : st.tran(x).indices()) {
                if (y == x || y == one_a || !st.has_1a(y)) continue;
                if (st.ballot_of(y) == bal) {
                    out = false;
                    break;
                }
            }
            break;
        }
        case MsgKind::TwoA: {
            if (!st.has_1a(x) || !graph_->has_learner(m.lrn)) break;
            Mask sigs = 0;
            for (int i : q2a(x)) {
                const std::string& s = st.at(i).signer;
                if (graph_->acceptors().knows(s))
                    sigs |= Mask{1} << graph_->acceptors().index_of(s);
            }
            bool self_in = graph_->acceptors().knows(m.signer) &&
                           (sigs >> graph_->acceptors().index_of(m.signer)) & 1;
            out = self_in && graph_->quorums(graph_->learner_index(m.lrn)).contains(sigs);
            break;
        }
    }
    wf_[x] = out ? 1 : 0;
    return out;
}

bool Context::is_decision(int learner, const std::vector<int>& s) const {
    if (s.empty()) return false;
    const auto& st = *store_;
    const std::string& lname = graph_->learner(learner);
    std::optional<Ballot> bal;
    Mask sigs = 0;
    for (int i : s) {
        const Message& m = st.at(i);
        if (m.kind != MsgKind::TwoA || m.lrn != lname || !st.has_1a(i)) return false;
        if (bal && st.ballot_of(i) != *bal) return false;
        bal = st.ballot_of(i);
        if (!graph_->acceptors().knows(m.signer)) return false;
        sigs |= Mask{1} << graph_->acceptors().index_of(m.signer);
    }
    return graph_->quorums(learner).contains(sigs);
}

std::vector<Context::Decision> Context::find_decisions(int learner) const {
    const auto& st = *store_;
    const std::string& lname = graph_->learner(learner);
    std::map<Ballot, std::pair<Mask, std::vector<int>>> groups;
    for (int i = 0; i < st.size(); ++i) {
        const Message& m = st.at(i);
        if (m.kind != MsgKind::TwoA || m.lrn != lname || !st.has_1a(i)) continue;
        if (!graph_->acceptors().knows(m.signer)) continue;
        auto& g = groups[st.ballot_of(i)];
        g.first |= Mask{1} << graph_->acceptors().index_of(m.signer);
        g.second.push_back(i);
    }
    std::vector<Decision> out;
    for (auto& [bal, g] : groups) {
        if (!graph_->quorums(learner).contains(g.first)) continue;
        out.push_back({st.value_of(g.second.front()), bal, g.second});
    }
    return out;
}

}  // namespace hetcons
