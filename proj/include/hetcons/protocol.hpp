#pragma once

#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "hetcons/learner_graph.hpp"
#include "hetcons/store.hpp"

namespace hetcons {

// Derived protocol predicates over a condensed, valid learner graph and an
// append-only store. Everything is a pure function of (graph, store contents
// reachable from the argument), so memoization by store index is sound.
class Context {
public:
    Context(const LearnerGraph& graph, MessageStore& store);

    const LearnerGraph& graph() const { return *graph_; }
    MessageStore& store() { return *store_; }
    const MessageStore& store() const { return *store_; }

    // Acceptors provably Byzantine within tran(x): they signed two messages
    // neither of which references the other.
    Mask caught(int x);

    // Learners still connected to `learner` given the caught evidence in x.
    std::vector<int> con(int learner, int x);

    // Fresh same-ballot 1bs in tran(x) for x's learner (x must be a 2a).
    std::vector<int> q2a(int x);

    // x (a 2a) is superseded within tran(y) by a quorum that has seen
    // higher-ballot, different-value 2as for x's learner.
    bool buried(int x, int y);

    // The sender-of-x's unburied 2as in tran(x) for learners connected to
    // `learner` (x must be a 1b).
    std::vector<int> cona(int learner, int x);

    // x's value agrees with all of cona(learner, x).
    bool fresh(int learner, int x);

    bool well_formed(int x);

    bool is_decision(int learner, const std::vector<int>& s) const;

    struct Decision {
        Value value;
        Ballot ballot;
        std::vector<int> witness;  // store indices of the 2as
    };
    // All maximal decision witnesses the whole store currently supports.
    std::vector<Decision> find_decisions(int learner) const;

private:
    bool buries(int m, int x);  // tran(m) holds x and a superseding 2a

    const LearnerGraph* graph_;
    MessageStore* store_;

    std::vector<std::optional<Mask>> caught_;
    std::vector<signed char> wf_;                 // -1 unknown / 0 / 1
    std::map<std::pair<int, int>, bool> buried_;  // (x, y)
    std::map<std::pair<int, int>, bool> buries_;  // (m, x)
    std::map<std::pair<int, int>, bool> fresh_;   // (learner, x)
};

}  // namespace hetcons
