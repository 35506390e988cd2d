#pragma once

// Stand-alone single-learner Byzantine consensus simulator used as an oracle for
// the homogeneous reduction: with all learner labels identical, the full
// protocol must produce the same decision trace this naive implementation
// does. Deliberately unoptimized and memoization-free: transitive closures,
// freshness, and burial are recomputed from scratch with plain DFS each time.

#include <deque>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "hetcons/proposer.hpp"
#include "hetcons/sim.hpp"
#include "hetcons/store.hpp"

namespace refbp {

struct Decision {
    std::uint64_t t = 0;
    hetcons::Ballot ballot;
    std::string value;
    bool operator==(const Decision& o) const = default;
};

class Sim {
public:
    explicit Sim(const hetcons::Scenario& sc)
        : sc_(sc), quorum_((static_cast<int>(sc.graph.acceptors().size()) * 2) / 3 + 1) {
        // Homogeneous quorums: use the configured threshold when uniform.
        const auto& q = sc.graph.quorums(0).minimal();
        if (!q.empty()) quorum_ = hetcons::popcount(q.front());
        for (const auto& name : sc_.graph.acceptors().names()) accs_[name];
    }

    std::vector<Decision> run() {
        for (const auto& p : sc_.proposals) {
            hetcons::Message m =
                hetcons::Proposer(p.proposer).propose(hetcons::Value{p.value}, p.time);
            store_.insert(m);
            for (const auto& a : sc_.graph.acceptors().names())
                push(p.time + link(p.proposer, a), a, m.id(), p.proposer);
        }
        while (!queue_.empty()) {
            auto [t, to, id, seq, from] = queue_.top();
            if (t > sc_.max_time) break;
            queue_.pop();
            now_ = t;
            if (crashed(from, t) || crashed(to, t)) continue;
            int idx = store_.index_of(id);
            const hetcons::Message& m = store_.at(idx);
            bool acceptor = accs_.count(to) != 0;
            if (acceptor && !byz_silent(to) && m.kind == hetcons::MsgKind::OneA &&
                m.ballot.time > t) {
                push(m.ballot.time, to, id, from);
                continue;
            }
            if (to == "L") {
                learner_deliver(t, idx);
            } else if (acceptor && !byz_silent(to)) {
                acceptor_deliver(t, to, m);
            }
        }
        return decisions_;
    }

private:
    struct Acc {
        std::set<int> known;
        std::vector<int> recently;
        std::deque<hetcons::Message> pending;
        std::optional<hetcons::Ballot> maxbal;
        std::set<hetcons::Ballot> emitted_2a;
    };

    using Item = std::tuple<std::uint64_t, std::string, hetcons::MessageId,
                            std::uint64_t, std::string>;

    std::uint64_t link(const std::string& from, const std::string& to) const {
        return sc_.latency.link(from, to);
    }
    bool crashed(const std::string& n, std::uint64_t t) const {
        auto it = sc_.roles.find(n);
        return it != sc_.roles.end() && it->second.role == hetcons::Role::Crash &&
               t >= it->second.crash_at;
    }
    bool byz_silent(const std::string& n) const {
        auto it = sc_.roles.find(n);
        return it != sc_.roles.end() && it->second.role == hetcons::Role::Byzantine;
    }

    void push(std::uint64_t t, const std::string& to, const hetcons::MessageId& id,
              const std::string& from) {
        queue_.push({t, to, id, seq_++, from});
    }
    void broadcast(std::uint64_t t, const std::string& from,
                   const hetcons::MessageId& id) {
        for (const auto& [name, acc] : accs_)
            if (name != from) push(t + link(from, name), name, id, from);
        if (from != "L") push(t + link(from, "L"), "L", id, from);
    }

    std::set<int> tran(int x) const {  // fresh DFS every call, by design
        std::set<int> out;
        std::vector<int> stack{x};
        while (!stack.empty()) {
            int i = stack.back();
            stack.pop_back();
            if (!out.insert(i).second) continue;
            for (const auto& r : store_.at(i).refs) stack.push_back(store_.index_of(r));
        }
        return out;
    }
    std::optional<int> max_1a(int x) const {
        std::optional<int> best;
        for (int i : tran(x))
            if (store_.at(i).kind == hetcons::MsgKind::OneA &&
                (!best || store_.at(i).ballot > store_.at(*best).ballot))
                best = i;
        return best;
    }
    hetcons::Ballot ballot_of(int x) const { return store_.at(*max_1a(x)).ballot; }
    std::string value_of(int x) const { return store_.at(*max_1a(x)).value.payload; }

    bool buried(int x, int y) const {
        std::set<std::string> sigs;
        for (int m : tran(y)) {
            std::set<int> tm = tran(m);
            if (!tm.count(x)) continue;
            for (int z : tm) {
                const auto& zm = store_.at(z);
                if (zm.kind != hetcons::MsgKind::TwoA || !max_1a(z)) continue;
                if (ballot_of(z) > ballot_of(x) && value_of(z) != value_of(x)) {
                    if (sc_.graph.acceptors().knows(store_.at(m).signer))
                        sigs.insert(store_.at(m).signer);
                    break;
                }
            }
        }
        return static_cast<int>(sigs.size()) >= quorum_;
    }

    bool fresh(int one_b) const {
        for (int m : tran(one_b)) {
            const auto& mm = store_.at(m);
            if (mm.kind != hetcons::MsgKind::TwoA ||
                mm.signer != store_.at(one_b).signer)
                continue;
            if (buried(m, one_b)) continue;
            if (value_of(m) != value_of(one_b)) return false;
        }
        return true;
    }

    void acceptor_deliver(std::uint64_t t, const std::string& me,
                          const hetcons::Message& m) {
        Acc& a = accs_.at(me);
        auto refs_known = [&](const hetcons::Message& msg) {
            for (const auto& r : msg.refs)
                if (!store_.contains(r) || !a.known.count(store_.index_of(r)))
                    return false;
            return true;
        };
        if (!refs_known(m)) {
            a.pending.push_back(m);
            return;
        }
        process(t, me, a, m);
        bool progress = true;
        while (progress) {
            progress = false;
            for (auto it = a.pending.begin(); it != a.pending.end(); ++it) {
                if (!refs_known(*it)) continue;
                hetcons::Message next = *it;
                a.pending.erase(it);
                process(t, me, a, next);
                progress = true;
                break;
            }
        }
    }

    void process(std::uint64_t t, const std::string& me, Acc& a,
                 const hetcons::Message& m) {
        int idx = store_.insert(m);
        if (a.known.count(idx)) return;
        broadcast(t, me, store_.id_at(idx));  // echo
        a.known.insert(idx);
        a.recently.push_back(idx);
        if (max_1a(idx)) {
            hetcons::Ballot b = ballot_of(idx);
            if (!a.maxbal || b > *a.maxbal) a.maxbal = b;
        }
        if (m.kind == hetcons::MsgKind::OneA) {
            hetcons::Message b;
            b.kind = hetcons::MsgKind::OneB;
            b.signer = me;
            for (int i : a.recently) b.refs.push_back(store_.id_at(i));
            a.recently.clear();
            process(t, me, a, b);
            return;
        }
        if (m.kind != hetcons::MsgKind::OneB) return;
        if (!a.maxbal || ballot_of(idx) != *a.maxbal) return;
        if (a.emitted_2a.count(*a.maxbal)) return;

        hetcons::Message z;
        z.kind = hetcons::MsgKind::TwoA;
        z.signer = me;
        z.lrn = "L";
        for (int i : a.recently) z.refs.push_back(store_.id_at(i));
        int zi = store_.insert(z);
        // Well-formed 2a: a quorum of fresh same-ballot 1bs, self included.
        std::set<std::string> sigs;
        for (int i : tran(zi)) {
            if (store_.at(i).kind != hetcons::MsgKind::OneB || !max_1a(i)) continue;
            if (ballot_of(i) != *a.maxbal || !fresh(i)) continue;
            if (sc_.graph.acceptors().knows(store_.at(i).signer))
                sigs.insert(store_.at(i).signer);
        }
        if (static_cast<int>(sigs.size()) < quorum_ || !sigs.count(me)) return;
        a.emitted_2a.insert(*a.maxbal);
        a.recently.clear();
        process(t, me, a, z);
    }

    void learner_deliver(std::uint64_t t, int idx) {
        if (!learner_known_.insert(idx).second) return;
        // Buffer until the closure is complete, like everyone else.
        const hetcons::Message& m = store_.at(idx);
        for (const auto& r : m.refs)
            if (!learner_known_.count(store_.index_of(r))) {
                learner_known_.erase(idx);
                learner_pending_.push_back(idx);
                return;
            }
        learner_note(t, idx);
        bool progress = true;
        while (progress) {
            progress = false;
            for (auto it = learner_pending_.begin(); it != learner_pending_.end(); ++it) {
                bool ok = true;
                for (const auto& r : store_.at(*it).refs)
                    if (!learner_known_.count(store_.index_of(r))) ok = false;
                if (!ok) continue;
                int next = *it;
                learner_pending_.erase(it);
                learner_known_.insert(next);
                learner_note(t, next);
                progress = true;
                break;
            }
        }
    }

    void learner_note(std::uint64_t t, int idx) {
        const hetcons::Message& m = store_.at(idx);
        if (m.kind != hetcons::MsgKind::TwoA || !max_1a(idx)) return;
        if (!sc_.graph.acceptors().knows(m.signer)) return;
        hetcons::Ballot b = ballot_of(idx);
        auto& sigs = by_ballot_[b];
        sigs.insert(m.signer);
        if (static_cast<int>(sigs.size()) >= quorum_ && !decided_.count(b)) {
            decided_.insert(b);
            decisions_.push_back({t, b, value_of(idx)});
        }
    }

    hetcons::Scenario sc_;
    int quorum_;
    hetcons::MessageStore store_;
    std::map<std::string, Acc> accs_;
    std::set<int> learner_known_;
    std::vector<int> learner_pending_;
    std::map<hetcons::Ballot, std::set<std::string>> by_ballot_;
    std::set<hetcons::Ballot> decided_;
    std::vector<Decision> decisions_;
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> queue_;
    std::uint64_t seq_ = 0;
    std::uint64_t now_ = 0;
};

}  // namespace refbp
