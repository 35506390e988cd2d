#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <chrono>
#include <cstdio>
#include <set>

#include "hetcons/chain.hpp"
#include "hetcons/sim.hpp"
#include "reference_bp.hpp"
#include "test_util.hpp"

using namespace hetcons;
using testutil::Rng;

namespace {

void report(int n, const char* desc, bool ok, const std::string& extra = "") {
    std::printf("CRITERION %d: %s — %s%s%s\n", n, ok ? "PASS" : "FAIL", desc,
                extra.empty() ? "" : " ", extra.c_str());
    std::fflush(stdout);
    CHECK_MESSAGE(ok, "criterion ", n, ": ", std::string(desc));
}

Scenario plain_scenario(const LearnerGraph& g, std::uint64_t latency = 1) {
    Scenario s;
    s.graph = g;
    s.proposals.push_back({"p", "v0", 0, 0, {}});
    s.latency.def = latency;
    s.max_time = 50 * latency + 50;
    return s;
}

std::vector<refbp::Decision> sim_decisions_for(const Trace& tr, const std::string& l) {
    std::vector<refbp::Decision> out;
    for (const auto& d : tr.decisions)
        if (d.learner == l) out.push_back({d.t, d.ballot, d.value});
    return out;
}

}  // namespace

TEST_CASE("criterion 1: adversarial safety sweep") {
    SweepConfig cfg;
    cfg.count = 1000;
    cfg.seed = 20260823;
    cfg.max_acceptors = 9;
    cfg.max_learners = 4;
    cfg.max_byzantine = 2;
    cfg.max_crash = 2;
    cfg.max_proposals = 3;

    auto start = std::chrono::steady_clock::now();
    SweepResult res = sweep(cfg);
    auto secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start);

    bool ok = res.runs == 1000 && res.validity_violations == 0 &&
              res.agreement_violations == 0 && res.decided_runs > 0;
    char extra[160];
    std::snprintf(extra, sizeof(extra),
                  "(%d runs, %d decided, %d validity / %d agreement violations, %.1fs)",
                  res.runs, res.decided_runs, res.validity_violations,
                  res.agreement_violations, secs.count());
    report(1, "1000-scenario sweep: zero validity/agreement violations", ok, extra);
    CHECK(secs.count() < 300.0);
}

TEST_CASE("criterion 2: termination schedule decides by period 12") {
    bool all_ok = true;
    for (const auto& name : testutil::golden_names()) {
        CAPTURE(name);
        LearnerGraph g = testutil::golden(name);
        Scenario s;
        s.graph = g;
        s.proposals.push_back({"p", "v0", 0, 0, {}});
        s.proposals.push_back({"q", "v1", 1, 0, {}});
        // One crash within every configuration's tolerance.
        s.roles[g.acceptors().names().back()] = RoleSpec{Role::Crash, 0, {}};
        const std::string target = g.learners().front();
        Scenario sched = termination_schedule(s, target);
        Trace tr = run(sched, RecordLevel::Light);
        Report rep = verdicts(tr, sched.facts());
        bool ok = rep.termination_checked && rep.termination_ok && rep.validity_ok &&
                  rep.agreement_ok;
        CHECK_MESSAGE(ok, "config ", name);
        all_ok = all_ok && ok;
    }
    report(2, "all eight example configs decide by the end of period 12", all_ok);
}

TEST_CASE("criterion 3: three-hop best-case latency") {
    int configs = 0;
    bool all_ok = true;
    for (const auto& name : testutil::golden_names()) {
        for (std::uint64_t lat : {1, 2, 4}) {
            CAPTURE(name);
            CAPTURE(lat);
            LearnerGraph g = testutil::golden(name);
            Trace tr = run(plain_scenario(g, lat), RecordLevel::Light);
            auto hops = decision_hops(tr);
            bool ok = true;
            for (const auto& l : g.learners())
                ok = ok && hops.count(l) && hops.at(l) == 3.0;
            CHECK_MESSAGE(ok, "config ", name, " latency ", lat);
            all_ok = all_ok && ok;
            ++configs;
        }
    }
    report(3, "failure-free runs decide exactly 3 hops after the 1a", all_ok,
           "(" + std::to_string(configs) + " configurations)");
}

TEST_CASE("criterion 4: homogeneous runs reduce to single-learner consensus") {
    std::vector<LearnerGraph> graphs = {testutil::golden("fully_homogeneous"),
                                        testutil::homogeneous(5, 4),
                                        testutil::homogeneous(7, 5)};
    bool all_ok = true;
    int compared = 0;
    for (const auto& g : graphs) {
        std::vector<Scenario> variants;
        variants.push_back(plain_scenario(g, 1));
        variants.push_back(plain_scenario(g, 2));
        Scenario race = plain_scenario(g, 1);
        race.proposals.push_back({"q", "v1", 0, 0, {}});
        variants.push_back(race);
        Scenario crash = plain_scenario(g, 1);
        crash.roles[g.acceptors().names().back()] = RoleSpec{Role::Crash, 0, {}};
        variants.push_back(crash);
        Scenario silent = plain_scenario(g, 1);
        silent.roles[g.acceptors().names().back()] =
            RoleSpec{Role::Byzantine, 0, {ByzKind::Silent, 2, {}}};
        variants.push_back(silent);

        for (const auto& sc : variants) {
            CAPTURE(compared);
            Trace tr = run(sc);

            // Per-ballot 2as are identical across learners modulo lrn.
            std::map<std::pair<std::string, Ballot>,
                     std::vector<const Message*>>
                batches;
            for (const auto& [node, id] : tr.honest_emitted) {
                int idx = tr.store->index_of(id);
                const Message& m = tr.store->at(idx);
                if (m.kind != MsgKind::TwoA) continue;
                batches[{m.signer, tr.store->ballot_of(idx)}].push_back(&m);
            }
            bool batch_ok = true;
            for (const auto& [key, group] : batches) {
                std::set<std::string> lrns;
                for (const Message* m : group) {
                    lrns.insert(m->lrn);
                    batch_ok = batch_ok && m->refs == group.front()->refs;
                }
                batch_ok =
                    batch_ok && lrns.size() == sc.graph.learners().size() &&
                    group.size() == sc.graph.learners().size();
            }
            CHECK(batch_ok);

            // Decision trace matches the stand-alone single-learner oracle.
            std::vector<refbp::Decision> ref = refbp::Sim(sc).run();
            bool trace_ok = !ref.empty() || tr.decisions.empty();
            for (const auto& l : sc.graph.learners())
                trace_ok = trace_ok && sim_decisions_for(tr, l) == ref;
            CHECK(trace_ok);
            all_ok = all_ok && batch_ok && trace_ok;
            ++compared;
        }
    }
    report(4, "2a batches differ only in lrn; decisions match the reference", all_ok,
           "(" + std::to_string(compared) + " scenarios)");
}

TEST_CASE("criterion 5: condensation equals brute-force closure") {
    Rng rng{505};
    bool all_ok = true;
    for (int iter = 0; iter < 500; ++iter) {
        CAPTURE(iter);
        LearnerGraph g = testutil::random_graph(rng, 5, 6);
        LearnerGraph fast = condense(g);
        LearnerGraph slow = testutil::brute_force_condense(g);
        bool ok = fast == slow && condense(fast) == fast;
        for (int a = 0; a < g.learner_count() && ok; ++a)
            for (int b = 0; b < g.learner_count() && ok; ++b)
                ok = fast.edge(a, a).subsumes(
                    fast.edge(std::min(a, b), std::max(a, b)));
        CHECK(ok);
        all_ok = all_ok && ok;
    }
    report(5, "condense == brute-force closure on 500 random graphs, idempotent, "
              "self-edges contain all edges", all_ok);
}

TEST_CASE("criterion 6: validity checker accepts the examples, rejects them perturbed") {
    bool all_ok = true;
    for (const auto& name : testutil::golden_names()) {
        CAPTURE(name);
        LearnerGraph g = testutil::golden(name);
        bool valid = check_valid(g).ok;
        CHECK(valid);

        LearnerGraph bad = g;
        for (int a = 0; a < bad.learner_count(); ++a) {
            for (int b = a; b < bad.learner_count(); ++b) {
                SetFamily shrunk;
                for (Mask m : bad.edge(a, b).minimal()) shrunk.insert(m & (m - 1));
                bad.set_edge(a, b, shrunk);
            }
        }
        bad = condense(bad);
        auto res = check_valid(bad);
        bool rejected = !res.ok && !res.witnesses.empty();
        if (rejected) {
            const auto& w = res.witnesses.front();
            rejected = (w.safe_set & w.qa & w.qb) == 0;
        }
        CHECK(rejected);
        all_ok = all_ok && valid && rejected;
    }
    report(6, "eight examples valid; each fails with a witness once safe sets "
              "shrink by one", all_ok);
}

TEST_CASE("criterion 7: decision index equals brute-force subset search") {
    Rng rng{707};
    bool all_ok = true;
    for (int iter = 0; iter < 200; ++iter) {
        CAPTURE(iter);
        LearnerGraph g = testutil::homogeneous(4, 3);
        MessageStore st;
        Context ctx(g, st);
        std::vector<MessageId> ids;
        int n = 6 + static_cast<int>(rng.below(15));  // up to 20 messages
        for (int i = 0; i < n; ++i) {
            Message m;
            std::uint64_t kind = rng.below(ids.empty() ? 1 : 4);
            if (kind == 0) {
                m = make_1a("p" + std::to_string(rng.below(2)),
                            Value{"v" + std::to_string(rng.below(3))}, 1 + rng.below(4));
            } else {
                m.kind = kind == 1 ? MsgKind::OneB : MsgKind::TwoA;
                m.signer = rng.below(6) == 0 ? "ghost"
                                             : "a" + std::to_string(1 + rng.below(4));
                if (m.kind == MsgKind::TwoA) m.lrn = rng.below(2) ? "l1" : "l2";
                std::set<std::size_t> picked;
                std::uint64_t k = 1 + rng.below(3);
                for (std::uint64_t j = 0; j < k; ++j)
                    picked.insert(static_cast<std::size_t>(rng.below(ids.size())));
                for (std::size_t p : picked) m.refs.push_back(ids[p]);
            }
            if (st.contains(m.id())) continue;
            st.insert(m);
            ids.push_back(m.id());
        }
        for (int l = 0; l < g.learner_count(); ++l) {
            auto fast = ctx.find_decisions(l);
            auto slow = testutil::brute_force_decisions(ctx, l);
            auto key = [](const Context::Decision& d) {
                auto w = d.witness;
                std::sort(w.begin(), w.end());
                return std::make_tuple(d.ballot, d.value, w);
            };
            std::set<std::tuple<Ballot, Value, std::vector<int>>> fs, ss;
            for (const auto& d : fast) fs.insert(key(d));
            for (const auto& d : slow) ss.insert(key(d));
            bool ok = fs == ss;
            CHECK(ok);
            all_ok = all_ok && ok;
        }
    }
    report(7, "find_decisions == brute-force subset search on 200 random stores",
           all_ok);
}

TEST_CASE("criterion 8: same seed, byte-identical trace") {
    bool all_ok = true;

    SweepConfig cfg;
    cfg.count = 12;
    cfg.seed = 808;
    for (int i = 0; i < cfg.count; ++i) {
        CAPTURE(i);
        Scenario sc = make_sweep_scenario(cfg, i);
        bool ok = run(sc).to_jsonl() == run(sc).to_jsonl();
        CHECK(ok);
        all_ok = all_ok && ok;
    }

    Scenario busy = plain_scenario(testutil::golden("het_learners"), 2);
    busy.proposals.push_back({"q", "v1", 3, 0, {}});
    busy.roles["e"] = RoleSpec{Role::Byzantine, 0, {ByzKind::Equivocate, 3, {}}};
    busy.roles["d"] = RoleSpec{Role::Crash, 6, {}};
    busy.seed = 99;
    bool busy_ok = run(busy).to_jsonl() == run(busy).to_jsonl();
    CHECK(busy_ok);

    Scenario chained = plain_scenario(testutil::golden("fully_homogeneous"), 1);
    chained.chain = ChainMode{3, ChainStrategy::B};
    chained.max_time = 2000;
    bool chain_ok =
        run_chain(chained).to_json().dump() == run_chain(chained).to_json().dump();
    CHECK(chain_ok);

    all_ok = all_ok && busy_ok && chain_ok;
    report(8, "replays with the same seed produce byte-identical traces", all_ok);
}

TEST_CASE("criterion 9: negative controls") {
    // Forged decision on an unproposed value must fail the validity verdict.
    Scenario s = plain_scenario(testutil::golden("fully_homogeneous"), 1);
    Trace forged;
    forged.scenario = s;
    forged.decisions.push_back(
        {5, "l1", 0, "unproposed", make_ballot(1, Value{"unproposed"}, "z", 0), {}});
    forged.end_time = 5;
    bool forged_flagged = !verdicts(forged, s.facts()).validity_ok;
    CHECK(forged_flagged);

    // Divergence between disentangled learners must pass the agreement verdict.
    Scenario d;
    d.graph = testutil::golden("failure_disagreement");
    d.proposals.push_back({"p1", "v1", 0, 0, {}});
    d.proposals.push_back({"p2", "v2", 0, 0, {}});
    Trace split;
    split.scenario = d;
    split.decisions.push_back(
        {4, "blue", 0, "v1", make_ballot(0, Value{"v1"}, "p1", 0), {}});
    split.decisions.push_back(
        {4, "red", 0, "v2", make_ballot(0, Value{"v2"}, "p2", 0), {}});
    split.end_time = 4;
    ExecutionFacts tolerant = d.facts();
    tolerant.real_safe &= ~(Mask{1} << d.graph.acceptors().index_of("a1"));
    Report rep = verdicts(split, tolerant);
    bool divergence_allowed = rep.agreement_ok && rep.validity_ok;
    CHECK(divergence_allowed);
    // Sanity: the same split is a violation when the pair is entangled.
    bool entangled_flagged = !verdicts(split, d.facts()).agreement_ok;
    CHECK(entangled_flagged);

    report(9, "forged decision fails validity; disentangled divergence passes "
              "agreement", forged_flagged && divergence_allowed && entangled_flagged);
}
