#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hetcons/learner.hpp"
#include "hetcons/learner_graph.hpp"
#include "hetcons/protocol.hpp"

#include <json.hpp>

namespace hetcons {

struct InvalidScenario : std::runtime_error {
    explicit InvalidScenario(const std::string& why)
        : std::runtime_error("invalid scenario: " + why) {}
};
struct NotTerminating : std::runtime_error {
    explicit NotTerminating(const std::string& learner)
        : std::runtime_error("learner not terminating under scenario facts: " + learner) {}
};

enum class Role { Honest, Crash, Byzantine };
enum class ByzKind { Silent, Equivocate, StaleReplay, Script };

// One scripted adversary action: either replay the n-th received message or
// send a fresh self-signed 1a. recipient "*" means everyone.
struct ScriptEntry {
    std::uint64_t time = 0;
    std::string recipient = "*";
    std::optional<int> replay;
    std::optional<std::string> value;
    std::optional<std::uint64_t> ballot_time;
};

struct ByzStrategy {
    ByzKind kind = ByzKind::Silent;
    int forks = 2;  // equivocate only
    std::vector<ScriptEntry> script;
};

struct RoleSpec {
    Role role = Role::Honest;
    std::uint64_t crash_at = 0;
    ByzStrategy byz;
};

struct Proposal {
    std::string proposer;
    std::string value;
    std::uint64_t time = 0;
    std::uint64_t slot = 0;
    std::optional<std::uint64_t> latency;  // per-message delivery override
};

struct LatencyModel {
    std::uint64_t def = 1;
    std::map<std::pair<std::string, std::string>, std::uint64_t> links;
    std::uint64_t link(const std::string& from, const std::string& to) const;
};

enum class ChainStrategy { A, B };
struct ChainMode {
    std::uint64_t slots = 1;
    ChainStrategy strategy = ChainStrategy::A;
};

// Metadata stamped by termination_schedule; periods are
// [t0 + i*period, t0 + (i+1)*period) for i in 0..12.
struct PeriodSchedule {
    std::uint64_t t0 = 0;
    std::uint64_t period = 1;
    std::string learner;
};

struct Scenario {
    LearnerGraph graph;
    std::map<std::string, RoleSpec> roles;  // acceptors; absent = honest
    std::vector<Proposal> proposals;
    LatencyModel latency;
    std::uint64_t seed = 0;
    std::uint64_t max_time = 10000;
    std::optional<ChainMode> chain;
    std::optional<PeriodSchedule> schedule;

    ExecutionFacts facts() const;  // safe = not Byzantine; live = also not crashed
    nlohmann::ordered_json to_json() const;
    static Scenario from_json(const nlohmann::json& j);
};

enum class RecordLevel { Full, Light };

struct TraceEvent {
    std::uint64_t t = 0;
    std::string ev;  // propose|send|deliver|park|emit|decide|violation|drop
    nlohmann::ordered_json data;
};

struct TraceDecision {
    std::uint64_t t = 0;
    std::string learner;
    std::uint64_t slot = 0;
    std::string value;
    Ballot ballot;
    std::vector<std::string> witness;  // message id hex
};

struct TraceViolation {
    std::uint64_t t = 0;
    std::string node;
    std::string kind;
    std::string detail;
};

struct Trace {
    Scenario scenario;
    std::vector<TraceEvent> events;
    std::vector<TraceDecision> decisions;
    std::vector<TraceViolation> violations;
    std::uint64_t end_time = 0;

    // In-memory only (not serialized): the run's message store and the
    // messages honest nodes emitted, in emission order.
    std::shared_ptr<MessageStore> store;
    std::vector<std::pair<std::string, MessageId>> honest_emitted;

    std::string to_jsonl() const;
    static Trace from_jsonl(const std::string& text);
};

Trace run(const Scenario& scenario, RecordLevel level = RecordLevel::Full);

// Augments the scenario with the three-proposal schedule that guarantees a
// decision for `learner` by the end of period 12. Two passes: the final two
// proposals carry the value of the highest-ballot 2a present after period 3.
Scenario termination_schedule(const Scenario& base, const std::string& learner);

struct Report {
    bool validity_ok = true;
    bool agreement_ok = true;
    bool termination_checked = false;
    bool termination_ok = true;
    std::vector<nlohmann::ordered_json> validity_violations;
    std::vector<nlohmann::ordered_json> agreement_violations;
    std::vector<nlohmann::ordered_json> termination_violations;
    std::vector<TraceDecision> decisions;
    std::uint64_t end_time = 0;

    bool ok() const {
        return validity_ok && agreement_ok && (!termination_checked || termination_ok);
    }
    nlohmann::ordered_json to_json() const;
};

// Recomputes all verdicts from the trace log alone.
Report verdicts(const Trace& trace, const ExecutionFacts& facts);

// Deep protocol lemmas checked against the run's store (in-memory traces
// only). Returns human-readable violations; empty means all hold.
std::vector<std::string> check_protocol_invariants(const Trace& trace);

// (first decision time - proposal send time) / default latency, per learner.
// Meaningful for single-proposal, uniform-latency scenarios.
std::map<std::string, double> decision_hops(const Trace& trace);

struct SweepConfig {
    int count = 100;
    std::uint64_t seed = 0;
    int max_acceptors = 9;
    int max_learners = 4;
    int max_byzantine = 2;
    int max_crash = 2;
    int max_proposals = 3;

    nlohmann::ordered_json to_json() const;
    static SweepConfig from_json(const nlohmann::json& j);
};

struct SweepResult {
    int runs = 0;
    int decided_runs = 0;
    int validity_violations = 0;
    int agreement_violations = 0;
    std::vector<nlohmann::ordered_json> violation_details;
    nlohmann::ordered_json to_json() const;
};

Scenario make_sweep_scenario(const SweepConfig& cfg, int index);
SweepResult sweep(const SweepConfig& cfg);

}  // namespace hetcons
