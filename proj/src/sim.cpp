#include "sim_internal.hpp"

#include <algorithm>
#include <sstream>

#include "hetcons/proposer.hpp"

namespace hetcons {

using nlohmann::ordered_json;

std::uint64_t LatencyModel::link(const std::string& from, const std::string& to) const {
    auto it = links.find({from, to});
    return it == links.end() ? def : it->second;
}

ExecutionFacts Scenario::facts() const {
    ExecutionFacts f;
    f.real_safe = graph.acceptors().full();
    f.real_live = graph.acceptors().full();
    for (const auto& [name, spec] : roles) {
        Mask bit = Mask{1} << graph.acceptors().index_of(name);
        if (spec.role == Role::Byzantine) {
            f.real_safe &= ~bit;
            f.real_live &= ~bit;
        } else if (spec.role == Role::Crash) {
            f.real_live &= ~bit;
        }
    }
    return f;
}

namespace {

const char* role_name(Role r) {
    switch (r) {
        case Role::Honest: return "honest";
        case Role::Crash: return "crash";
        case Role::Byzantine: return "byzantine";
    }
    return "?";
}

const char* byz_name(ByzKind k) {
    switch (k) {
        case ByzKind::Silent: return "silent";
        case ByzKind::Equivocate: return "equivocate";
        case ByzKind::StaleReplay: return "stale-replay";
        case ByzKind::Script: return "script";
    }
    return "?";
}

ByzKind byz_from_name(const std::string& s) {
    if (s == "silent") return ByzKind::Silent;
    if (s == "equivocate") return ByzKind::Equivocate;
    if (s == "stale-replay") return ByzKind::StaleReplay;
    if (s == "script") return ByzKind::Script;
    throw InvalidScenario("unknown byzantine strategy: " + s);
}

std::uint64_t name_hash(const std::string& s) {
    Digest d = sha256(s);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v = (v << 8) | d[i];
    return v;
}

std::uint64_t id_hash(const MessageId& id) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v = (v << 8) | id.digest[i];
    return v;
}

}  // namespace

ordered_json Scenario::to_json() const {
    ordered_json j;
    j["graph"] = graph.to_json();
    ordered_json roles_j = ordered_json::object();
    for (const auto& [name, spec] : roles) {
        ordered_json r;
        r["role"] = role_name(spec.role);
        if (spec.role == Role::Crash) r["at"] = spec.crash_at;
        if (spec.role == Role::Byzantine) {
            ordered_json st;
            st["kind"] = byz_name(spec.byz.kind);
            if (spec.byz.kind == ByzKind::Equivocate) st["forks"] = spec.byz.forks;
            if (spec.byz.kind == ByzKind::Script) {
                auto arr = ordered_json::array();
                for (const auto& e : spec.byz.script) {
                    ordered_json ej;
                    ej["time"] = e.time;
                    ej["recipient"] = e.recipient;
                    if (e.replay) ej["replay"] = *e.replay;
                    if (e.value) ej["value"] = *e.value;
                    if (e.ballot_time) ej["ballot_time"] = *e.ballot_time;
                    arr.push_back(ej);
                }
                st["script"] = arr;
            }
            r["strategy"] = st;
        }
        roles_j[name] = r;
    }
    j["roles"] = roles_j;
    auto props = ordered_json::array();
    for (const auto& p : proposals) {
        ordered_json pj;
        pj["proposer"] = p.proposer;
        pj["value"] = p.value;
        pj["time"] = p.time;
        pj["slot"] = p.slot;
        if (p.latency) pj["latency"] = *p.latency;
        props.push_back(pj);
    }
    j["proposals"] = props;
    ordered_json lat;
    lat["default"] = latency.def;
    auto links = ordered_json::array();
    for (const auto& [key, l] : latency.links)
        links.push_back({{"from", key.first}, {"to", key.second}, {"latency", l}});
    lat["links"] = links;
    j["latency"] = lat;
    j["seed"] = seed;
    j["max_time"] = max_time;
    if (chain)
        j["chain"] = {{"slots", chain->slots},
                      {"strategy", chain->strategy == ChainStrategy::A ? "A" : "B"}};
    if (schedule)
        j["schedule"] = {{"t0", schedule->t0},
                         {"period", schedule->period},
                         {"learner", schedule->learner}};
    return j;
}

Scenario Scenario::from_json(const nlohmann::json& j) {
    Scenario s;
    s.graph = LearnerGraph::from_json(j.at("graph"));
    if (j.contains("roles")) {
        for (auto& [name, r] : j.at("roles").items()) {
            RoleSpec spec;
            std::string role = r.value("role", "honest");
            if (role == "honest") {
                spec.role = Role::Honest;
            } else if (role == "crash") {
                spec.role = Role::Crash;
                spec.crash_at = r.value("at", std::uint64_t{0});
            } else if (role == "byzantine") {
                spec.role = Role::Byzantine;
                const auto& st = r.at("strategy");
                spec.byz.kind = byz_from_name(st.at("kind").get<std::string>());
                spec.byz.forks = st.value("forks", 2);
                if (st.contains("script")) {
                    for (const auto& ej : st.at("script")) {
                        ScriptEntry e;
                        e.time = ej.value("time", std::uint64_t{0});
                        e.recipient = ej.value("recipient", std::string("*"));
                        if (ej.contains("replay")) e.replay = ej.at("replay").get<int>();
                        if (ej.contains("value"))
                            e.value = ej.at("value").get<std::string>();
                        if (ej.contains("ballot_time"))
                            e.ballot_time = ej.at("ballot_time").get<std::uint64_t>();
                        spec.byz.script.push_back(e);
                    }
                }
            } else {
                throw InvalidScenario("unknown role: " + role);
            }
            s.roles[name] = spec;
        }
    }
    for (const auto& pj : j.value("proposals", nlohmann::json::array())) {
        Proposal p;
        p.proposer = pj.at("proposer").get<std::string>();
        p.value = pj.at("value").get<std::string>();
        p.time = pj.value("time", std::uint64_t{0});
        p.slot = pj.value("slot", std::uint64_t{0});
        if (pj.contains("latency")) p.latency = pj.at("latency").get<std::uint64_t>();
        s.proposals.push_back(p);
    }
    if (j.contains("latency")) {
        const auto& lat = j.at("latency");
        s.latency.def = lat.value("default", std::uint64_t{1});
        for (const auto& lj : lat.value("links", nlohmann::json::array()))
            s.latency.links[{lj.at("from").get<std::string>(),
                             lj.at("to").get<std::string>()}] =
                lj.at("latency").get<std::uint64_t>();
    }
    s.seed = j.value("seed", std::uint64_t{0});
    s.max_time = j.value("max_time", std::uint64_t{10000});
    if (j.contains("chain")) {
        ChainMode c;
        c.slots = j.at("chain").value("slots", std::uint64_t{1});
        c.strategy =
            j.at("chain").value("strategy", "A") == std::string("B") ? ChainStrategy::B
                                                                     : ChainStrategy::A;
        s.chain = c;
    }
    if (j.contains("schedule")) {
        PeriodSchedule p;
        p.t0 = j.at("schedule").at("t0").get<std::uint64_t>();
        p.period = j.at("schedule").at("period").get<std::uint64_t>();
        p.learner = j.at("schedule").at("learner").get<std::string>();
        s.schedule = p;
    }
    return s;
}

std::string Trace::to_jsonl() const {
    std::ostringstream out;
    ordered_json head;
    head["record"] = "scenario";
    head["scenario"] = scenario.to_json();
    out << head.dump() << "\n";
    for (const auto& e : events) {
        ordered_json ej;
        ej["record"] = "event";
        ej["t"] = e.t;
        ej["ev"] = e.ev;
        ej["data"] = e.data;
        out << ej.dump() << "\n";
    }
    ordered_json tail;
    tail["record"] = "end";
    tail["t"] = end_time;
    out << tail.dump() << "\n";
    return out.str();
}

Trace Trace::from_jsonl(const std::string& text) {
    Trace tr;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto j = ordered_json::parse(line);  // keep key order for re-serialization
        std::string rec = j.value("record", "");
        if (rec == "scenario") {
            tr.scenario = Scenario::from_json(j.at("scenario"));
        } else if (rec == "event") {
            TraceEvent e;
            e.t = j.at("t").get<std::uint64_t>();
            e.ev = j.at("ev").get<std::string>();
            e.data = j.value("data", ordered_json::object());
            if (e.ev == "decide") {
                TraceDecision d;
                d.t = e.t;
                d.learner = e.data.at("node").get<std::string>();
                d.slot = e.data.value("slot", std::uint64_t{0});
                d.value = e.data.at("value").get<std::string>();
                d.ballot.time = e.data.at("ballot").at("time").get<std::uint64_t>();
                d.ballot.tiebreak = e.data.at("ballot").at("tiebreak").get<std::string>();
                for (const auto& w : e.data.value("witness", nlohmann::json::array()))
                    d.witness.push_back(w.get<std::string>());
                tr.decisions.push_back(d);
            } else if (e.ev == "violation") {
                tr.violations.push_back({e.t, e.data.value("node", ""),
                                         e.data.value("kind", ""),
                                         e.data.value("detail", "")});
            }
            tr.events.push_back(std::move(e));
        } else if (rec == "end") {
            tr.end_time = j.at("t").get<std::uint64_t>();
        }
    }
    return tr;
}

namespace detail {

void Engine::init(const Scenario& scenario, RecordLevel lvl) {
    sc = &scenario;
    level = lvl;
    store = std::make_shared<MessageStore>();
    ctx = std::make_unique<Context>(scenario.graph, *store);
    trace.scenario = scenario;
    trace.store = store;
}

void Engine::event(std::uint64_t t, const char* ev, ordered_json data) {
    trace.events.push_back({t, ev, std::move(data)});
}

std::uint64_t Engine::latency(const std::string& from, const std::string& to) const {
    return sc->latency.link(from, to);
}

bool Engine::crashed_at(const std::string& node, std::uint64_t t) const {
    auto it = sc->roles.find(node);
    return it != sc->roles.end() && it->second.role == Role::Crash &&
           t >= it->second.crash_at;
}

void Engine::send(std::uint64_t t, const std::string& from, const std::string& to,
                  const MessageId& id, std::optional<std::uint64_t> override_latency) {
    std::uint64_t arrive = t + (override_latency ? *override_latency : latency(from, to));
    if (full())
        event(t, "send",
              {{"from", from}, {"to", to}, {"id", id.hex()}, {"deliver_at", arrive}});
    queue.push({arrive, to, id, seq++, from, -1});
}

void Engine::broadcast(std::uint64_t t, const std::string& from, const MessageId& id,
                       std::optional<std::uint64_t> override_latency) {
    for (const auto& [name, node] : nodes) {
        if (name == from) continue;
        send(t, from, name, id, override_latency);
    }
}

void Engine::requeue(std::uint64_t t, const QueueItem& item) {
    queue.push({t, item.to, item.id, seq++, item.from, -1});
}

void Engine::note_violation(std::uint64_t t, const std::string& node,
                            const ViolationRecord& v) {
    event(t, "violation",
          {{"node", node}, {"kind", v.kind}, {"detail", v.detail}, {"msg", v.msg.hex()}});
    trace.violations.push_back({t, node, v.kind, v.detail});
}

void Engine::note_decision(std::uint64_t t, const DecisionEvent& ev) {
    auto witness = ordered_json::array();
    TraceDecision d;
    d.t = t;
    d.learner = ev.learner;
    d.slot = ev.slot;
    d.value = ev.value.payload;
    d.ballot = ev.ballot;
    for (const auto& w : ev.witness) {
        witness.push_back(w.hex());
        d.witness.push_back(w.hex());
    }
    event(t, "decide",
          {{"node", ev.learner},
           {"slot", ev.slot},
           {"value", ev.value.payload},
           {"ballot", {{"time", ev.ballot.time}, {"tiebreak", ev.ballot.tiebreak}}},
           {"witness", witness}});
    trace.decisions.push_back(std::move(d));
}

void Engine::note_honest_emits(std::uint64_t t, const std::string& node,
                               const std::vector<MessageId>& outbound) {
    for (const auto& id : outbound) {
        const Message& m = store->by_id(id);
        if (m.signer != node) continue;
        trace.honest_emitted.push_back({node, id});
        if (full()) event(t, "emit", {{"node", node}, {"msg", m.to_json()}});
    }
}

void Engine::run_loop() {
    while (!queue.empty()) {
        QueueItem item = queue.top();
        if (item.t > sc->max_time) break;
        queue.pop();
        now = item.t;
        if (item.script >= 0) {
            auto& [node, entry] = scripts[item.script];
            nodes.at(node)->on_script(*this, now, entry);
            continue;
        }
        if (crashed_at(item.from, now) || crashed_at(item.to, now)) {
            if (full())
                event(now, "drop",
                      {{"from", item.from}, {"to", item.to}, {"id", item.id.hex()}});
            continue;
        }
        auto nit = nodes.find(item.to);
        if (nit == nodes.end()) continue;
        int idx = store->index_of(item.id);
        const Message& m = store->at(idx);
        if (nit->second->delay_1a() && m.kind == MsgKind::OneA && m.ballot.time > now) {
            requeue(m.ballot.time, item);
            continue;
        }
        if (full())
            event(now, "deliver",
                  {{"to", item.to}, {"from", item.from}, {"id", item.id.hex()}});
        nit->second->on_deliver(*this, now, item.from, idx);
    }
    trace.end_time = now;
}

namespace {

struct HonestAcceptorNode : SimNode {
    Acceptor acc;
    HonestAcceptorNode(const std::string& n, Context& ctx) : SimNode(n), acc(n, ctx) {}
    bool delay_1a() const override { return true; }
    void on_deliver(Engine& e, std::uint64_t t, const std::string&, int idx) override {
        ReceiveResult res = acc.receive(e.store->at(idx));
        for (const auto& p : res.parked)
            if (e.full()) e.event(t, "park", {{"node", name}, {"id", p.hex()}});
        for (const auto& v : res.violations) e.note_violation(t, name, v);
        e.note_honest_emits(t, name, res.outbound);
        for (const auto& id : res.outbound) e.broadcast(t, name, id);
    }
};

struct LearnerNode : SimNode {
    Learner lrn;
    LearnerNode(const std::string& n, Context& ctx) : SimNode(n), lrn(n, ctx) {}
    void on_deliver(Engine& e, std::uint64_t t, const std::string&, int idx) override {
        std::size_t nviol = lrn.violations().size();
        auto events = lrn.receive(e.store->at(idx));
        for (std::size_t i = nviol; i < lrn.violations().size(); ++i)
            e.note_violation(t, name, lrn.violations()[i]);
        for (const auto& ev : events) e.note_decision(t, ev);
    }
};

struct SilentNode : SimNode {
    using SimNode::SimNode;
    void on_deliver(Engine&, std::uint64_t, const std::string&, int) override {}
};

struct EquivocateNode : SimNode {
    std::vector<std::unique_ptr<Acceptor>> forks;
    std::uint64_t salt;
    EquivocateNode(const std::string& n, Context& ctx, int k, std::uint64_t seed)
        : SimNode(n), salt(seed ^ name_hash(n)) {
        if (k < 2) k = 2;
        for (int i = 0; i < k; ++i) forks.push_back(std::make_unique<Acceptor>(n, ctx));
    }
    std::size_t fork_of_recipient(const std::string& r) const {
        return splitmix64(name_hash(r) ^ salt) % forks.size();
    }
    std::size_t fork_of_msg(const MessageId& id) const {
        return splitmix64(id_hash(id) ^ salt) % forks.size();
    }
    void on_deliver(Engine& e, std::uint64_t t, const std::string&, int idx) override {
        // Copy: each fork's receive may insert into (and reallocate) the store.
        Message m = e.store->at(idx);
        for (std::size_t i = 0; i < forks.size(); ++i) {
            if (m.kind != MsgKind::OneA && fork_of_msg(m.id()) != i) continue;
            ReceiveResult res = forks[i]->receive(m);
            for (const auto& id : res.outbound)
                for (const auto& [rname, rnode] : e.nodes)
                    if (rname != name && fork_of_recipient(rname) == i)
                        e.send(t, name, rname, id);
        }
    }
};

struct StaleReplayNode : SimNode {
    std::vector<MessageId> log;
    std::uint64_t salt, n = 0;
    StaleReplayNode(const std::string& nm, std::uint64_t seed)
        : SimNode(nm), salt(seed ^ name_hash(nm)) {}
    void on_deliver(Engine& e, std::uint64_t t, const std::string&, int idx) override {
        if (!log.empty()) {
            const MessageId& pick = log[splitmix64(salt + n) % log.size()];
            e.broadcast(t, name, pick);
        }
        ++n;
        log.push_back(e.store->id_at(idx));
    }
};

struct ScriptNode : SimNode {
    std::vector<MessageId> log;
    using SimNode::SimNode;
    void on_deliver(Engine& e, std::uint64_t, const std::string&, int idx) override {
        log.push_back(e.store->id_at(idx));
    }
    void on_script(Engine& e, std::uint64_t t, const ScriptEntry& entry) override {
        std::optional<MessageId> id;
        if (entry.replay) {
            if (*entry.replay >= 0 && *entry.replay < static_cast<int>(log.size()))
                id = log[*entry.replay];
        } else if (entry.value) {
            Message m = make_1a(name, Value{*entry.value},
                                entry.ballot_time.value_or(t), 0);
            e.store->insert(m);
            id = m.id();
        }
        if (!id) return;
        if (entry.recipient == "*")
            e.broadcast(t, name, *id);
        else if (e.nodes.count(entry.recipient))
            e.send(t, name, entry.recipient, *id);
    }
};

}  // namespace

std::unique_ptr<SimNode> make_honest_acceptor(const std::string& name, Context& ctx) {
    return std::make_unique<HonestAcceptorNode>(name, ctx);
}
std::unique_ptr<SimNode> make_learner_node(const std::string& name, Context& ctx) {
    return std::make_unique<LearnerNode>(name, ctx);
}
std::unique_ptr<SimNode> make_byzantine(const std::string& name, const RoleSpec& spec,
                                        Engine& e) {
    switch (spec.byz.kind) {
        case ByzKind::Silent: return std::make_unique<SilentNode>(name);
        case ByzKind::Equivocate:
            return std::make_unique<EquivocateNode>(name, *e.ctx, spec.byz.forks,
                                                    e.sc->seed);
        case ByzKind::StaleReplay:
            return std::make_unique<StaleReplayNode>(name, e.sc->seed);
        case ByzKind::Script: return std::make_unique<ScriptNode>(name);
    }
    return std::make_unique<SilentNode>(name);
}

Scenario prepare_scenario(const Scenario& scenario) {
    Scenario s = scenario;
    s.graph = condense(s.graph);
    for (const auto& [name, spec] : s.roles) {
        (void)spec;
        if (!s.graph.acceptors().knows(name))
            throw InvalidScenario("role for unknown acceptor: " + name);
    }
    for (const auto& l : s.graph.learners())
        if (s.graph.acceptors().knows(l))
            throw InvalidScenario("learner id collides with acceptor id: " + l);
    try {
        auto v = check_valid(s.graph);
        if (!v.ok) throw InvalidScenario("learner graph fails validity");
    } catch (const NotCondensed&) {
        throw InvalidScenario("learner graph could not be condensed");
    }
    return s;
}

void setup_common_nodes(Engine& e, const Scenario& s) {
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
            e.nodes[name] = detail::make_honest_acceptor(name, *e.ctx);
        }
    }
}

void schedule_proposals(Engine& e, const Scenario& s, SlotOneAs* slot_1as) {
    std::vector<Proposal> props = s.proposals;
    std::stable_sort(props.begin(), props.end(), [](const Proposal& a, const Proposal& b) {
        return std::tie(a.time, a.slot, a.proposer, a.value) <
               std::tie(b.time, b.slot, b.proposer, b.value);
    });
    for (const auto& p : props) {
        std::optional<MessageId> prev;
        if (slot_1as && p.slot > 0) {
            auto pit = slot_1as->find(p.proposer);
            if (pit == slot_1as->end() || !pit->second.count(p.slot - 1))
                throw InvalidScenario("strategy B: no prior-slot 1a for proposer " +
                                      p.proposer);
            prev = pit->second.at(p.slot - 1);
        }
        Message m = Proposer(p.proposer).propose(Value{p.value}, p.time, p.slot, prev);
        e.store->insert(m);
        if (slot_1as) (*slot_1as)[p.proposer][p.slot] = m.id();
        e.event(p.time, "propose",
                {{"proposer", p.proposer},
                 {"value", p.value},
                 {"time", p.time},
                 {"slot", p.slot},
                 {"ballot", {{"time", m.ballot.time}, {"tiebreak", m.ballot.tiebreak}}},
                 {"id", m.id().hex()}});
        for (const auto& a : s.graph.acceptors().names())
            e.send(p.time, p.proposer, a, m.id(), p.latency);
    }
}

}  // namespace detail

Trace run(const Scenario& scenario, RecordLevel level) {
    Scenario s = detail::prepare_scenario(scenario);
    if (s.chain) throw InvalidScenario("chain scenarios must run through run_chain");
    detail::Engine e;
    e.init(s, level);
    detail::setup_common_nodes(e, s);
    for (const auto& l : s.graph.learners())
        e.nodes[l] = detail::make_learner_node(l, *e.ctx);
    detail::schedule_proposals(e, s, nullptr);
    e.run_loop();
    return std::move(e.trace);
}

Report verdicts(const Trace& trace, const ExecutionFacts& facts) {
    Report rep;
    LearnerGraph g = condense(trace.scenario.graph);
    rep.decisions = trace.decisions;
    rep.end_time = trace.end_time;

    // Validity: every decided value was proposed for that slot.
    std::map<std::uint64_t, std::vector<std::string>> proposed;
    for (const auto& p : trace.scenario.proposals) proposed[p.slot].push_back(p.value);
    for (const auto& d : trace.decisions) {
        const auto& vals = proposed[d.slot];
        if (std::find(vals.begin(), vals.end(), d.value) == vals.end()) {
            rep.validity_ok = false;
            rep.validity_violations.push_back({{"learner", d.learner},
                                               {"slot", d.slot},
                                               {"value", d.value},
                                               {"t", d.t}});
        }
    }

    // Agreement: entangled pairs (self-pairs included) never split values
    // within a slot.
    std::map<std::pair<std::string, std::uint64_t>, std::vector<std::string>> by_learner;
    for (const auto& d : trace.decisions) by_learner[{d.learner, d.slot}].push_back(d.value);
    for (int a = 0; a < g.learner_count(); ++a) {
        for (int b = a; b < g.learner_count(); ++b) {
            if (!g.edge(a, b).contains(facts.real_safe)) continue;
            std::map<std::uint64_t, std::vector<std::string>> slot_vals;
            for (const auto& [key, vals] : by_learner) {
                if (key.first != g.learner(a) && key.first != g.learner(b)) continue;
                auto& sv = slot_vals[key.second];
                sv.insert(sv.end(), vals.begin(), vals.end());
            }
            for (const auto& [slot, vals] : slot_vals) {
                for (const auto& v : vals) {
                    if (v != vals.front()) {
                        rep.agreement_ok = false;
                        rep.agreement_violations.push_back({{"a", g.learner(a)},
                                                            {"b", g.learner(b)},
                                                            {"slot", slot},
                                                            {"values", vals}});
                        break;
                    }
                }
            }
        }
    }

    // Termination: only claimed for schedules built by termination_schedule.
    if (trace.scenario.schedule) {
        rep.termination_checked = true;
        const auto& sch = *trace.scenario.schedule;
        std::uint64_t deadline = sch.t0 + 13 * sch.period;  // end of period 12
        bool decided = false;
        for (const auto& d : trace.decisions)
            if (d.learner == sch.learner && d.t < deadline) decided = true;
        if (!decided) {
            rep.termination_ok = false;
            rep.termination_violations.push_back(
                {{"learner", sch.learner}, {"deadline", deadline}});
        }
    }
    return rep;
}

nlohmann::ordered_json Report::to_json() const {
    ordered_json j;
    j["record"] = "report";
    j["validity"] = {{"ok", validity_ok}, {"violations", validity_violations}};
    j["agreement"] = {{"ok", agreement_ok}, {"violations", agreement_violations}};
    j["termination"] = {{"checked", termination_checked},
                        {"ok", termination_ok},
                        {"violations", termination_violations}};
    auto ds = ordered_json::array();
    for (const auto& d : decisions)
        ds.push_back({{"t", d.t},
                      {"learner", d.learner},
                      {"slot", d.slot},
                      {"value", d.value},
                      {"ballot", {{"time", d.ballot.time}, {"tiebreak", d.ballot.tiebreak}}}});
    j["decisions"] = ds;
    j["end_time"] = end_time;
    j["ok"] = ok();
    return j;
}

Scenario termination_schedule(const Scenario& base, const std::string& learner) {
    Scenario s = detail::prepare_scenario(base);
    if (!terminating(s.graph, learner, s.facts())) throw NotTerminating(learner);

    std::uint64_t lmax = s.latency.def;
    for (const auto& [key, l] : s.latency.links) lmax = std::max(lmax, l);
    for (const auto& p : s.proposals)
        if (p.latency) lmax = std::max(lmax, *p.latency);
    std::uint64_t period = 2 * lmax;
    std::uint64_t base_end = 0;
    for (const auto& p : s.proposals) base_end = std::max(base_end, p.time);
    std::uint64_t t0 = base_end + 32 * lmax;

    const std::string sched_proposer = "p:sched";
    Proposal x{sched_proposer, "value:x", t0, 0, {}};

    // Pass 1: run through the end of period 3 and read the value of the
    // highest-ballot 2a the store then holds.
    Scenario pass1 = s;
    pass1.proposals.push_back(x);
    pass1.max_time = t0 + 4 * period;
    Trace t1 = run(pass1, RecordLevel::Light);
    std::string vy = x.value;
    std::optional<Ballot> best;
    const MessageStore& st = *t1.store;
    for (int i = 0; i < st.size(); ++i) {
        if (st.at(i).kind != MsgKind::TwoA || !st.has_1a(i)) continue;
        if (!best || st.ballot_of(i) > *best) {
            best = st.ballot_of(i);
            vy = st.value_of(i).payload;
        }
    }

    Scenario out = s;
    out.proposals.push_back(x);
    out.proposals.push_back({sched_proposer, vy, t0 + 4 * period, 0, {}});
    out.proposals.push_back({sched_proposer, vy, t0 + 9 * period, 0, {}});
    out.max_time = t0 + 13 * period;
    out.schedule = PeriodSchedule{t0, period, learner};
    return out;
}

std::map<std::string, double> decision_hops(const Trace& trace) {
    std::map<std::string, double> out;
    if (trace.scenario.proposals.empty()) return out;
    double t0 = static_cast<double>(trace.scenario.proposals.front().time);
    double lat = static_cast<double>(trace.scenario.latency.def);
    for (const auto& d : trace.decisions)
        if (!out.count(d.learner)) out[d.learner] = (static_cast<double>(d.t) - t0) / lat;
    return out;
}

std::vector<std::string> check_protocol_invariants(const Trace& trace) {
    std::vector<std::string> out;
    if (!trace.store) return {"trace lacks an in-memory store"};
    LearnerGraph g = condense(trace.scenario.graph);
    MessageStore& st = *trace.store;
    Context ctx(g, st);
    ExecutionFacts facts = trace.scenario.facts();

    // Safe acceptors are never caught.
    for (int i = 0; i < st.size(); ++i) {
        Mask bad = ctx.caught(i) & facts.real_safe;
        if (bad)
            out.push_back("safe acceptor caught in message " + st.id_at(i).hex());
    }

    // Honest emissions: always well-formed 1bs, and each emission transitively
    // references the node's previous emission. 2as of one batch share a single
    // snapshot instead of chaining, so same-refs 2a pairs are exempt.
    std::map<std::string, int> prev_emit;
    for (const auto& [node, id] : trace.honest_emitted) {
        int idx = st.index_of(id);
        if (st.at(idx).kind == MsgKind::OneB && !ctx.well_formed(idx))
            out.push_back("honest 1b not well-formed: " + id.hex());
        if (auto it = prev_emit.find(node); it != prev_emit.end()) {
            const Message& cur = st.at(idx);
            const Message& prev = st.at(it->second);
            bool same_batch = cur.kind == MsgKind::TwoA &&
                              prev.kind == MsgKind::TwoA && cur.refs == prev.refs;
            if (!same_batch && !st.tran(idx).test(it->second))
                out.push_back("emission by " + node +
                              " does not reference its previous emission");
        }
        prev_emit[node] = idx;
    }

    // Global caught evidence.
    Mask caught_global = 0;
    for (int i = 0; i < st.size(); ++i) caught_global |= ctx.caught(i);

    // Quorum intersection: connected learners' 2a quorums share an uncaught
    // signer.
    std::vector<int> twoas;
    std::vector<Mask> sigs;
    std::vector<int> lrn_of;
    for (int i = 0; i < st.size(); ++i) {
        const Message& m = st.at(i);
        if (m.kind != MsgKind::TwoA || !g.has_learner(m.lrn)) continue;
        if (!ctx.well_formed(i)) continue;
        Mask mask = 0;
        for (int q : ctx.q2a(i))
            if (g.acceptors().knows(st.at(q).signer))
                mask |= Mask{1} << g.acceptors().index_of(st.at(q).signer);
        twoas.push_back(i);
        sigs.push_back(mask);
        lrn_of.push_back(g.learner_index(m.lrn));
    }
    for (std::size_t i = 0; i < twoas.size(); ++i) {
        for (std::size_t j = i; j < twoas.size(); ++j) {
            bool connected = false;
            for (Mask s : g.edge(lrn_of[i], lrn_of[j]).minimal())
                if ((s & caught_global) == 0) { connected = true; break; }
            if (!connected) continue;
            if ((sigs[i] & sigs[j] & ~caught_global) == 0)
                out.push_back("connected 2a quorums share no uncaught signer: " +
                              st.id_at(twoas[i]).hex() + " / " + st.id_at(twoas[j]).hex());
        }
    }

    // After a decision for learner a, entangled b's higher-ballot 2as carry
    // the decided value.
    for (int a = 0; a < g.learner_count(); ++a) {
        auto decisions = ctx.find_decisions(a);
        if (decisions.empty()) continue;
        for (int b = 0; b < g.learner_count(); ++b) {
            if (!g.edge(a, b).contains(facts.real_safe)) continue;
            for (const auto& d : decisions) {
                std::uint64_t dslot = st.at(d.witness.front()).kind == MsgKind::TwoA
                                          ? st.slot_of(d.witness.front())
                                          : 0;
                for (std::size_t k = 0; k < twoas.size(); ++k) {
                    if (lrn_of[k] != b) continue;
                    int i = twoas[k];
                    if (st.slot_of(i) != dslot) continue;
                    if (st.ballot_of(i) > d.ballot && !(st.value_of(i) == d.value))
                        out.push_back("post-decision 2a with different value: " +
                                      st.id_at(i).hex());
                }
            }
        }
    }
    return out;
}

nlohmann::ordered_json SweepConfig::to_json() const {
    return {{"count", count},
            {"seed", seed},
            {"max_acceptors", max_acceptors},
            {"max_learners", max_learners},
            {"max_byzantine", max_byzantine},
            {"max_crash", max_crash},
            {"max_proposals", max_proposals}};
}

SweepConfig SweepConfig::from_json(const nlohmann::json& j) {
    SweepConfig c;
    c.count = j.value("count", c.count);
    c.seed = j.value("seed", c.seed);
    c.max_acceptors = j.value("max_acceptors", c.max_acceptors);
    c.max_learners = j.value("max_learners", c.max_learners);
    c.max_byzantine = j.value("max_byzantine", c.max_byzantine);
    c.max_crash = j.value("max_crash", c.max_crash);
    c.max_proposals = j.value("max_proposals", c.max_proposals);
    return c;
}

namespace {

struct Rng {
    std::uint64_t state;
    std::uint64_t next() { return state = splitmix64(state); }
    std::uint64_t below(std::uint64_t n) { return n ? next() % n : 0; }
};

SetFamily threshold_family(int n, int k) {
    SetFamily f;
    std::vector<int> pick(k);
    for (int i = 0; i < k; ++i) pick[i] = i;
    while (true) {
        Mask m = 0;
        for (int i : pick) m |= Mask{1} << i;
        f.insert(m);
        int i = k - 1;
        while (i >= 0 && pick[i] == n - k + i) --i;
        if (i < 0) break;
        ++pick[i];
        for (int j = i + 1; j < k; ++j) pick[j] = pick[j - 1] + 1;
    }
    return f;
}

}  // namespace

Scenario make_sweep_scenario(const SweepConfig& cfg, int index) {
    for (std::uint64_t attempt = 0;; ++attempt) {
        Rng rng{splitmix64(cfg.seed ^ (static_cast<std::uint64_t>(index) * 0x10001 +
                                       attempt * 0xfeed))};
        int n_acc = 3 + static_cast<int>(rng.below(cfg.max_acceptors - 2));
        int n_lrn = 1 + static_cast<int>(rng.below(cfg.max_learners));
        std::vector<std::string> acceptors, learners;
        for (int i = 0; i < n_acc; ++i) acceptors.push_back("a" + std::to_string(i));
        for (int i = 0; i < n_lrn; ++i) learners.push_back("l" + std::to_string(i));
        LearnerGraph g(AcceptorIndex(acceptors), learners);
        for (int i = 0; i < n_lrn; ++i) {
            int k = n_acc / 2 + 1 + static_cast<int>(rng.below(2));
            if (k > n_acc) k = n_acc;
            g.set_quorums(i, threshold_family(n_acc, k));
        }
        DerivedSafeSets derived = derive_safe_sets_from_quorums(g);
        for (int a = 0; a < n_lrn; ++a)
            for (int b = a; b < n_lrn; ++b) g.set_edge(a, b, derived.edge(g, a, b));
        g = condense(g);
        if (!check_valid(g).ok) continue;  // resample deterministically

        Scenario s;
        s.graph = g;
        s.seed = rng.next();
        s.max_time = 400;
        s.latency.def = 1 + rng.below(3);

        int n_byz = static_cast<int>(rng.below(cfg.max_byzantine + 1));
        int n_crash = static_cast<int>(rng.below(cfg.max_crash + 1));
        std::vector<int> order(n_acc);
        for (int i = 0; i < n_acc; ++i) order[i] = i;
        for (int i = n_acc - 1; i > 0; --i)
            std::swap(order[i], order[rng.below(i + 1)]);
        int taken = 0;
        for (int i = 0; i < n_byz && taken < n_acc; ++i, ++taken) {
            RoleSpec spec;
            spec.role = Role::Byzantine;
            switch (rng.below(3)) {
                case 0: spec.byz.kind = ByzKind::Silent; break;
                case 1:
                    spec.byz.kind = ByzKind::Equivocate;
                    spec.byz.forks = 2 + static_cast<int>(rng.below(2));
                    break;
                default: spec.byz.kind = ByzKind::StaleReplay; break;
            }
            s.roles[acceptors[order[taken]]] = spec;
        }
        for (int i = 0; i < n_crash && taken < n_acc; ++i, ++taken) {
            RoleSpec spec;
            spec.role = Role::Crash;
            spec.crash_at = rng.below(60);
            s.roles[acceptors[order[taken]]] = spec;
        }

        int n_prop = 1 + static_cast<int>(rng.below(cfg.max_proposals));
        for (int i = 0; i < n_prop; ++i)
            s.proposals.push_back({"p" + std::to_string(i),
                                   "v" + std::to_string(rng.below(3)),
                                   rng.below(20), 0, {}});

        int n_links = static_cast<int>(rng.below(6));
        std::vector<std::string> endpoints = acceptors;
        endpoints.insert(endpoints.end(), learners.begin(), learners.end());
        for (int i = 0; i < n_links; ++i) {
            const std::string& from = endpoints[rng.below(endpoints.size())];
            const std::string& to = endpoints[rng.below(endpoints.size())];
            s.latency.links[{from, to}] = 1 + rng.below(6);
        }
        return s;
    }
}

SweepResult sweep(const SweepConfig& cfg) {
    SweepResult res;
    for (int i = 0; i < cfg.count; ++i) {
        Scenario sc = make_sweep_scenario(cfg, i);
        Trace tr = run(sc, RecordLevel::Light);
        Report rep = verdicts(tr, sc.facts());
        ++res.runs;
        if (!rep.decisions.empty()) ++res.decided_runs;
        if (!rep.validity_ok) {
            res.validity_violations +=
                static_cast<int>(rep.validity_violations.size());
            for (const auto& v : rep.validity_violations)
                res.violation_details.push_back(
                    {{"scenario", i}, {"kind", "validity"}, {"witness", v}});
        }
        if (!rep.agreement_ok) {
            res.agreement_violations +=
                static_cast<int>(rep.agreement_violations.size());
            for (const auto& v : rep.agreement_violations)
                res.violation_details.push_back(
                    {{"scenario", i}, {"kind", "agreement"}, {"witness", v}});
        }
    }
    return res;
}

nlohmann::ordered_json SweepResult::to_json() const {
    return {{"record", "sweep"},
            {"runs", runs},
            {"decided_runs", decided_runs},
            {"validity_violations", validity_violations},
            {"agreement_violations", agreement_violations},
            {"violations", violation_details}};
}

}  // namespace hetcons
