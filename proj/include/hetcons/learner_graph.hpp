#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "hetcons/set_family.hpp"

#include <json.hpp>

namespace hetcons {

struct UnknownLearner : std::runtime_error {
    explicit UnknownLearner(const std::string& id)
        : std::runtime_error("unknown learner id: " + id) {}
};
struct NotCondensed : std::runtime_error {
    NotCondensed() : std::runtime_error("learner graph is not condensed") {}
};

// Which acceptors actually behaved in a given execution.
struct ExecutionFacts {
    Mask real_safe = 0;
    Mask real_live = 0;
};

// Learners labeled with quorum families; learner pairs (self-pairs included)
// labeled with safe-set families. Edge keys are unordered: stored for i <= j.
class LearnerGraph {
public:
    LearnerGraph() = default;
    LearnerGraph(AcceptorIndex acceptors, std::vector<std::string> learners);

    const AcceptorIndex& acceptors() const { return acceptors_; }
    const std::vector<std::string>& learners() const { return learners_; }
    int learner_count() const { return static_cast<int>(learners_.size()); }
    int learner_index(const std::string& id) const;  // throws UnknownLearner
    bool has_learner(const std::string& id) const;
    const std::string& learner(int i) const { return learners_.at(i); }

    const SetFamily& quorums(int learner) const { return quorums_.at(learner); }
    void set_quorums(int learner, SetFamily f) { quorums_.at(learner) = std::move(f); }

    const SetFamily& edge(int a, int b) const;
    void set_edge(int a, int b, SetFamily f);

    bool operator==(const LearnerGraph& o) const;

    nlohmann::ordered_json to_json() const;
    static LearnerGraph from_json(const nlohmann::json& j);

private:
    int tri(int a, int b) const;

    AcceptorIndex acceptors_;
    std::vector<std::string> learners_;   // sorted
    std::vector<SetFamily> quorums_;      // by learner index
    std::vector<SetFamily> edges_;        // triangular, tri(i,j) with i<=j
};

LearnerGraph load_graph(const std::string& path);
void save_graph(const LearnerGraph& g, const std::string& path);

LearnerGraph condense(const LearnerGraph& g);
bool is_condensed(const LearnerGraph& g);

struct ValidityWitness {
    std::string a, b;       // learner pair
    Mask safe_set, qa, qb;  // empty triple intersection
};
struct ValidityResult {
    bool ok = false;
    std::vector<ValidityWitness> witnesses;
};
// Requires a condensed graph; throws NotCondensed otherwise.
ValidityResult check_valid(const LearnerGraph& g);

bool entangled(const LearnerGraph& g, const std::string& a, const std::string& b,
               const ExecutionFacts& facts);
bool accurate(const LearnerGraph& g, const std::string& a, const ExecutionFacts& facts);
bool terminating(const LearnerGraph& g, const std::string& a, const ExecutionFacts& facts);

// Quorums sufficient for the given safe-set labels: unions of strict majorities,
// one per (edge of a, minimal safe set). Requires a condensed graph.
std::vector<SetFamily> derive_quorums_from_edges(const LearnerGraph& g);

struct DerivedSafeSets {
    std::vector<SetFamily> edges;        // triangular, same layout as the graph
    std::vector<std::string> warnings;   // edges with disjoint quorum pairs
    const SetFamily& edge(const LearnerGraph& g, int a, int b) const;
};
// Safe sets sufficient for the given quorums: minimal hitting sets of the
// pairwise quorum intersections.
DerivedSafeSets derive_safe_sets_from_quorums(const LearnerGraph& g);

}  // namespace hetcons
