#include "hetcons/chain.hpp"

#include <algorithm>

#include "sim_internal.hpp"

namespace hetcons {

using nlohmann::ordered_json;

namespace {

std::string bytes_to_hex(const std::string& bytes) {
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(bytes.size() * 2);
    for (unsigned char c : bytes) {
        out.push_back(hex[c >> 4]);
        out.push_back(hex[c & 0xf]);
    }
    return out;
}

std::string hex_to_bytes(const std::string& hex) {
    auto nib = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        throw std::invalid_argument("bad hex");
    };
    std::string out;
    for (std::size_t i = 0; i + 1 < hex.size(); i += 2)
        out.push_back(static_cast<char>(nib(hex[i]) << 4 | nib(hex[i + 1])));
    return out;
}

// Replicates base proposals across slots when the scenario does not list
// slot-tagged proposals itself.
std::vector<Proposal> expand_proposals(const Scenario& s, bool spaced) {
    const ChainMode& cm = *s.chain;
    bool tagged = std::any_of(s.proposals.begin(), s.proposals.end(),
                              [](const Proposal& p) { return p.slot != 0; });
    if (tagged || cm.slots <= 1) return s.proposals;
    std::uint64_t lmax = s.latency.def;
    for (const auto& [k, l] : s.latency.links) lmax = std::max(lmax, l);
    std::uint64_t base_end = 0;
    for (const auto& p : s.proposals) base_end = std::max(base_end, p.time);
    std::uint64_t spacing = spaced ? base_end + 8 * lmax + 8 : 0;
    std::vector<Proposal> out;
    for (std::uint64_t slot = 0; slot < cm.slots; ++slot) {
        for (Proposal p : s.proposals) {
            p.slot = slot;
            p.time += slot * spacing;
            out.push_back(p);
        }
    }
    return out;
}

std::vector<ProofOfConsensus> build_proofs(const Trace& trace) {
    std::vector<ProofOfConsensus> out;
    if (!trace.store) return out;
    const MessageStore& st = *trace.store;
    for (const auto& d : trace.decisions) {
        ProofOfConsensus proof;
        proof.learner = d.learner;
        proof.slot = d.slot;
        proof.value = Value{d.value};
        proof.ballot = d.ballot;
        IdSet closure;
        for (const auto& hexid : d.witness) {
            MessageId id{from_hex(hexid)};
            proof.witness.push_back(id);
            closure.merge(st.tran(st.index_of(id)));
        }
        for (int i : closure.indices()) proof.messages.push_back(st.at(i).serialize());
        out.push_back(std::move(proof));
    }
    return out;
}

struct ChainAcceptorNode : detail::SimNode {
    Context* ctx;
    std::map<std::uint64_t, std::unique_ptr<Acceptor>> slots;
    std::vector<int> held;  // gated slot-s 1as awaiting the prior-slot 1a

    ChainAcceptorNode(const std::string& n, Context& c) : SimNode(n), ctx(&c) {}
    bool delay_1a() const override { return true; }

    Acceptor& state(std::uint64_t slot) {
        auto& p = slots[slot];
        if (!p) p = std::make_unique<Acceptor>(name, *ctx);
        return *p;
    }

    // Returns the prior-slot 1a id once the slot-(s-1) state has acted on it.
    std::optional<MessageId> gate(detail::Engine& e, const Message& m) const {
        const MessageStore& st = *e.store;
        for (const auto& r : m.refs) {
            if (!st.contains(r)) continue;
            const Message& prior = st.by_id(r);
            if (prior.kind == MsgKind::OneA && prior.slot + 1 == m.slot) return r;
        }
        return {};
    }

    void deliver_one(detail::Engine& e, std::uint64_t t, int idx) {
        const MessageStore& st = *e.store;
        const Message& m = st.at(idx);
        std::uint64_t slot =
            m.kind == MsgKind::OneA ? m.slot : (st.has_1a(idx) ? st.slot_of(idx) : 0);
        if (m.kind == MsgKind::OneA && m.slot > 0) {
            auto prior = gate(e, m);
            if (!prior) return;  // strategy B 1as must reference the prior slot
            auto it = slots.find(slot - 1);
            if (it == slots.end() || !it->second->knows(*prior)) {
                held.push_back(idx);
                if (e.full())
                    e.event(t, "park", {{"node", name}, {"id", st.id_at(idx).hex()}});
                return;
            }
            state(slot).admit_external(*prior);
        }
        ReceiveResult res = state(slot).receive(m);
        for (const auto& p : res.parked)
            if (e.full()) e.event(t, "park", {{"node", name}, {"id", p.hex()}});
        for (const auto& v : res.violations) e.note_violation(t, name, v);
        e.note_honest_emits(t, name, res.outbound);
        for (const auto& id : res.outbound) e.broadcast(t, name, id);
    }

    void on_deliver(detail::Engine& e, std::uint64_t t, const std::string&,
                    int idx) override {
        deliver_one(e, t, idx);
        bool progress = true;
        while (progress) {
            progress = false;
            for (std::size_t i = 0; i < held.size(); ++i) {
                int h = held[i];
                const Message& m = e.store->at(h);
                auto prior = gate(e, m);
                if (!prior) continue;
                auto it = slots.find(m.slot - 1);
                if (it == slots.end() || !it->second->knows(*prior)) continue;
                held.erase(held.begin() + static_cast<long>(i));
                deliver_one(e, t, h);
                progress = true;
                break;
            }
        }
    }
};

struct ChainLearnerNode : detail::SimNode {
    Context* ctx;
    std::map<std::uint64_t, std::unique_ptr<Learner>> slots;
    std::vector<int> held;

    ChainLearnerNode(const std::string& n, Context& c) : SimNode(n), ctx(&c) {}

    Learner& state(std::uint64_t slot) {
        auto& p = slots[slot];
        if (!p) p = std::make_unique<Learner>(name, *ctx);
        return *p;
    }

    void deliver_one(detail::Engine& e, std::uint64_t t, int idx) {
        const MessageStore& st = *e.store;
        const Message& m = st.at(idx);
        std::uint64_t slot =
            m.kind == MsgKind::OneA ? m.slot : (st.has_1a(idx) ? st.slot_of(idx) : 0);
        if (m.kind == MsgKind::OneA && m.slot > 0) {
            std::optional<MessageId> prior;
            for (const auto& r : m.refs) {
                if (!st.contains(r)) continue;
                const Message& pm = st.by_id(r);
                if (pm.kind == MsgKind::OneA && pm.slot + 1 == m.slot) prior = r;
            }
            if (!prior) return;
            auto it = slots.find(slot - 1);
            if (it == slots.end() || !it->second->knows(*prior)) {
                held.push_back(idx);
                return;
            }
            state(slot).admit_external(*prior);
        }
        auto events = state(slot).receive(m);
        for (const auto& ev : events) e.note_decision(t, ev);
    }

    void on_deliver(detail::Engine& e, std::uint64_t t, const std::string&,
                    int idx) override {
        deliver_one(e, t, idx);
        bool progress = true;
        while (progress) {
            progress = false;
            for (std::size_t i = 0; i < held.size(); ++i) {
                int h = held[i];
                const Message& m = e.store->at(h);
                std::optional<MessageId> prior;
                for (const auto& r : m.refs)
                    if (e.store->contains(r) && e.store->by_id(r).kind == MsgKind::OneA &&
                        e.store->by_id(r).slot + 1 == m.slot)
                        prior = r;
                if (!prior) continue;
                auto it = slots.find(m.slot - 1);
                if (it == slots.end() || !it->second->knows(*prior)) continue;
                held.erase(held.begin() + static_cast<long>(i));
                deliver_one(e, t, h);
                progress = true;
                break;
            }
        }
    }
};

}  // namespace

ordered_json ProofOfConsensus::to_json() const {
    ordered_json j;
    j["record"] = "proof";
    j["learner"] = learner;
    j["slot"] = slot;
    j["value"] = value.payload;
    j["ballot"] = {{"time", ballot.time}, {"tiebreak", ballot.tiebreak}};
    auto w = ordered_json::array();
    for (const auto& id : witness) w.push_back(id.hex());
    j["witness"] = w;
    auto ms = ordered_json::array();
    for (const auto& m : messages) ms.push_back(bytes_to_hex(m));
    j["messages"] = ms;
    return j;
}

bool verify_proof(const ProofOfConsensus& proof, const LearnerGraph& graph) {
    try {
        MessageStore fresh;
        for (const auto& bytes : proof.messages)
            fresh.insert(Message::deserialize(bytes));
        LearnerGraph g = condense(graph);
        Context ctx(g, fresh);
        int learner = g.learner_index(proof.learner);
        std::vector<int> witness;
        for (const auto& id : proof.witness) witness.push_back(fresh.index_of(id));
        if (!ctx.is_decision(learner, witness)) return false;
        return fresh.ballot_of(witness.front()) == proof.ballot &&
               fresh.value_of(witness.front()) == proof.value &&
               fresh.slot_of(witness.front()) == proof.slot;
    } catch (const std::exception&) {
        return false;
    }
}

ordered_json ChainResult::to_json() const {
    ordered_json j;
    j["record"] = "chain";
    auto ds = ordered_json::array();
    for (const auto& d : decisions)
        ds.push_back({{"t", d.t},
                      {"slot", d.slot},
                      {"learner", d.learner},
                      {"value", d.value},
                      {"ballot", {{"time", d.ballot.time}, {"tiebreak", d.ballot.tiebreak}}}});
    j["decisions"] = ds;
    auto ps = ordered_json::array();
    for (const auto& p : proofs) ps.push_back(p.to_json());
    j["proofs"] = ps;
    return j;
}

ChainResult run_chain(const Scenario& scenario, RecordLevel level) {
    if (!scenario.chain) throw InvalidScenario("run_chain needs scenario.chain");
    ChainResult result;
    const ChainMode cm = *scenario.chain;

    if (cm.strategy == ChainStrategy::A) {
        std::vector<Proposal> all = expand_proposals(scenario, /*spaced=*/false);
        for (std::uint64_t slot = 0; slot < cm.slots; ++slot) {
            Scenario sub = scenario;
            sub.chain.reset();
            sub.proposals.clear();
            for (const auto& p : all)
                if (p.slot == slot) sub.proposals.push_back(p);
            sub.seed = scenario.seed + slot;
            Trace tr = run(sub, level);
            for (const auto& d : tr.decisions) result.decisions.push_back(d);
            for (auto& p : build_proofs(tr)) result.proofs.push_back(std::move(p));
            result.traces.push_back(std::move(tr));
        }
        return result;
    }

    // Strategy B: one run, shared store, per-slot states, gated 1as.
    Scenario s = detail::prepare_scenario(scenario);
    s.proposals = expand_proposals(s, /*spaced=*/true);
    // Slot ballot times must strictly increase so the dominant 1a of any
    // cross-slot history is the newest slot's.
    std::map<std::uint64_t, std::pair<std::uint64_t, std::uint64_t>> span;
    for (const auto& p : s.proposals) {
        auto [it, fresh] = span.try_emplace(p.slot, p.time, p.time);
        if (!fresh) {
            it->second.first = std::min(it->second.first, p.time);
            it->second.second = std::max(it->second.second, p.time);
        }
    }
    std::uint64_t prev_max = 0;
    bool first = true;
    for (const auto& [slot, mm] : span) {
        if (!first && mm.first <= prev_max)
            throw InvalidScenario("strategy B: slot proposal times must increase");
        prev_max = mm.second;
        first = false;
    }

    detail::Engine e;
    e.init(s, level);
    for (const auto& name : s.graph.acceptors().names()) {
        RoleSpec spec;
        if (auto it = s.roles.find(name); it != s.roles.end()) spec = it->second;
        if (spec.role == Role::Byzantine) {
            e.nodes[name] = detail::make_byzantine(name, spec, e);
            for (const auto& entry : spec.byz.script) {
                int sidx = static_cast<int>(e.scripts.size());
                e.scripts.push_back({name, entry});
                e.queue.push({entry.time, name, MessageId{}, e.seq++, name, sidx});
            }
        } else {
            e.nodes[name] = std::make_unique<ChainAcceptorNode>(name, *e.ctx);
        }
    }
    for (const auto& l : s.graph.learners())
        e.nodes[l] = std::make_unique<ChainLearnerNode>(l, *e.ctx);
    detail::SlotOneAs slot_1as;
    detail::schedule_proposals(e, s, &slot_1as);
    e.run_loop();
    for (const auto& d : e.trace.decisions) result.decisions.push_back(d);
    for (auto& p : build_proofs(e.trace)) result.proofs.push_back(std::move(p));
    result.traces.push_back(std::move(e.trace));
    return result;
}

}  // namespace hetcons
