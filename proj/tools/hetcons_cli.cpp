#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "hetcons/chain.hpp"
#include "hetcons/learner_graph.hpp"
#include "hetcons/sim.hpp"

using nlohmann::ordered_json;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct Output {
    std::string path;  // empty = stdout
    std::ofstream file;
    std::ostream& stream() {
        if (path.empty()) return std::cout;
        if (!file.is_open()) {
            file.open(path);
            if (!file) throw std::runtime_error("cannot write: " + path);
        }
        return file;
    }
};

hetcons::ExecutionFacts facts_from_json(const nlohmann::json& j,
                                        const hetcons::LearnerGraph& g) {
    hetcons::ExecutionFacts f;
    f.real_safe = g.acceptors().mask_of(j.at("real_safe").get<std::vector<std::string>>());
    f.real_live = g.acceptors().mask_of(j.at("real_live").get<std::vector<std::string>>());
    return f;
}

void print_report(const hetcons::Report& rep, const std::string& format, Output& out) {
    if (format == "summary") {
        auto& os = out.stream();
        os << "validity:    " << (rep.validity_ok ? "ok" : "VIOLATED") << "\n";
        os << "agreement:   " << (rep.agreement_ok ? "ok" : "VIOLATED") << "\n";
        os << "termination: "
           << (!rep.termination_checked ? "not checked"
                                        : (rep.termination_ok ? "ok" : "VIOLATED"))
           << "\n";
        os << "decisions:   " << rep.decisions.size() << "\n";
        for (const auto& d : rep.decisions)
            os << "  t=" << d.t << " slot=" << d.slot << " " << d.learner << " -> "
               << d.value << " (ballot " << d.ballot.time << ")\n";
    } else {
        out.stream() << rep.to_json().dump() << "\n";
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Heterogeneous consensus toolkit: graph analysis, deterministic "
                 "adversarial simulation, repeated consensus"};
    app.require_subcommand(1);

    std::string format = "records";
    Output out;
    app.add_option("--format", format)->check(CLI::IsMember({"records", "summary"}));
    app.add_option("--out", out.path, "write output to file instead of stdout");

    std::string graph_path, scenario_path, trace_path, config_path, facts_path;
    std::string direction = "quorums";
    std::optional<std::uint64_t> seed_override, max_time_override;

    auto* validate = app.add_subcommand("validate-graph", "condense + validity check");
    validate->add_option("path", graph_path)->required();

    auto* cond = app.add_subcommand("condense", "emit the condensed learner graph");
    cond->add_option("path", graph_path)->required();

    auto* derive = app.add_subcommand("derive-bounds",
                                      "derive quorums from safe sets or vice versa");
    derive->add_option("path", graph_path)->required();
    derive->add_option("--direction", direction)
        ->check(CLI::IsMember({"quorums", "safe-sets"}));

    auto* runcmd = app.add_subcommand("run", "run a scenario, emit trace + report");
    runcmd->add_option("path", scenario_path)->required();
    runcmd->add_option("--seed", seed_override);
    runcmd->add_option("--max-time", max_time_override);

    auto* sweepcmd = app.add_subcommand("sweep", "randomized safety sweep");
    sweepcmd->add_option("path", config_path)->required();
    sweepcmd->add_option("--seed", seed_override);

    auto* chaincmd = app.add_subcommand("chain", "repeated consensus over slots");
    chaincmd->add_option("path", scenario_path)->required();
    chaincmd->add_option("--seed", seed_override);
    chaincmd->add_option("--max-time", max_time_override);

    auto* verdictcmd = app.add_subcommand("verdict", "recompute verdicts from a trace");
    verdictcmd->add_option("path", trace_path)->required();
    verdictcmd->add_option("--facts", facts_path,
                           "json file with real_safe / real_live acceptor lists");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (validate->parsed()) {
            hetcons::LearnerGraph g = hetcons::load_graph(graph_path);
            bool was_condensed = hetcons::is_condensed(g);
            hetcons::LearnerGraph cg = hetcons::condense(g);
            auto res = hetcons::check_valid(cg);
            ordered_json j;
            j["record"] = "validate";
            j["valid"] = res.ok;
            j["input_condensed"] = was_condensed;
            auto ws = ordered_json::array();
            for (const auto& w : res.witnesses)
                ws.push_back({{"a", w.a},
                              {"b", w.b},
                              {"safe_set", cg.acceptors().names_of(w.safe_set)},
                              {"quorum_a", cg.acceptors().names_of(w.qa)},
                              {"quorum_b", cg.acceptors().names_of(w.qb)}});
            j["witnesses"] = ws;
            if (format == "summary")
                out.stream() << (res.ok ? "valid" : "invalid") << "\n";
            else
                out.stream() << j.dump() << "\n";
            return res.ok ? 0 : 1;
        }
        if (cond->parsed()) {
            hetcons::LearnerGraph g = hetcons::load_graph(graph_path);
            out.stream() << hetcons::condense(g).to_json().dump(2) << "\n";
            return 0;
        }
        if (derive->parsed()) {
            hetcons::LearnerGraph g = hetcons::condense(hetcons::load_graph(graph_path));
            ordered_json j;
            j["record"] = "derive-bounds";
            j["direction"] = direction;
            if (direction == "quorums") {
                auto derived = hetcons::derive_quorums_from_edges(g);
                ordered_json per = ordered_json::object();
                for (int i = 0; i < g.learner_count(); ++i) {
                    auto sets = ordered_json::array();
                    for (hetcons::Mask m : derived[i].minimal())
                        sets.push_back(g.acceptors().names_of(m));
                    per[g.learner(i)] = sets;
                }
                j["quorums"] = per;
            } else {
                auto derived = hetcons::derive_safe_sets_from_quorums(g);
                auto edges = ordered_json::array();
                for (int a = 0; a < g.learner_count(); ++a) {
                    for (int b = a; b < g.learner_count(); ++b) {
                        auto sets = ordered_json::array();
                        for (hetcons::Mask m : derived.edge(g, a, b).minimal())
                            sets.push_back(g.acceptors().names_of(m));
                        edges.push_back({{"between", {g.learner(a), g.learner(b)}},
                                         {"safe_sets", sets}});
                    }
                }
                j["edges"] = edges;
                j["warnings"] = derived.warnings;
            }
            out.stream() << j.dump() << "\n";
            return 0;
        }
        if (runcmd->parsed()) {
            auto sc = hetcons::Scenario::from_json(nlohmann::json::parse(slurp(scenario_path)));
            if (seed_override) sc.seed = *seed_override;
            if (max_time_override) sc.max_time = *max_time_override;
            hetcons::Trace tr = hetcons::run(sc);
            hetcons::Report rep = hetcons::verdicts(tr, sc.facts());
            if (format == "summary") {
                print_report(rep, format, out);
            } else {
                out.stream() << tr.to_jsonl();
                out.stream() << rep.to_json().dump() << "\n";
            }
            return rep.ok() ? 0 : 1;
        }
        if (sweepcmd->parsed()) {
            auto cfg = hetcons::SweepConfig::from_json(
                nlohmann::json::parse(slurp(config_path)));
            if (seed_override) cfg.seed = *seed_override;
            auto res = hetcons::sweep(cfg);
            if (format == "summary")
                out.stream() << res.runs << " runs, " << res.decided_runs
                             << " decided, " << res.validity_violations
                             << " validity violations, " << res.agreement_violations
                             << " agreement violations\n";
            else
                out.stream() << res.to_json().dump() << "\n";
            return res.validity_violations + res.agreement_violations == 0 ? 0 : 1;
        }
        if (chaincmd->parsed()) {
            auto sc = hetcons::Scenario::from_json(nlohmann::json::parse(slurp(scenario_path)));
            if (seed_override) sc.seed = *seed_override;
            if (max_time_override) sc.max_time = *max_time_override;
            auto res = hetcons::run_chain(sc);
            bool all_verified = true;
            for (const auto& p : res.proofs)
                all_verified = all_verified && hetcons::verify_proof(p, sc.graph);
            if (format == "summary") {
                auto& os = out.stream();
                os << res.decisions.size() << " decisions, " << res.proofs.size()
                   << " proofs, " << (all_verified ? "all verified" : "VERIFY FAILED")
                   << "\n";
                for (const auto& d : res.decisions)
                    os << "  slot=" << d.slot << " " << d.learner << " -> " << d.value
                       << " at t=" << d.t << "\n";
            } else {
                ordered_json j = res.to_json();
                j["proofs_verified"] = all_verified;
                out.stream() << j.dump() << "\n";
            }
            return all_verified ? 0 : 1;
        }
        if (verdictcmd->parsed()) {
            hetcons::Trace tr = hetcons::Trace::from_jsonl(slurp(trace_path));
            hetcons::ExecutionFacts facts =
                facts_path.empty()
                    ? tr.scenario.facts()
                    : facts_from_json(nlohmann::json::parse(slurp(facts_path)),
                                      tr.scenario.graph);
            hetcons::Report rep = hetcons::verdicts(tr, facts);
            print_report(rep, format, out);
            return rep.ok() ? 0 : 1;
        }
    } catch (const std::exception& e) {
        std::cerr << ordered_json{{"error", e.what()}}.dump() << "\n";
        return 2;
    }
    return 2;
}
