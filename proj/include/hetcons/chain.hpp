#pragma once

#include "hetcons/sim.hpp"

namespace hetcons {

// Self-contained evidence that a slot was decided: the witness 2as plus every
// message they transitively reference, in canonical serialization.
struct ProofOfConsensus {
    std::string learner;
    std::uint64_t slot = 0;
    Value value;
    Ballot ballot;
    std::vector<MessageId> witness;
    std::vector<std::string> messages;  // topological order, canonical bytes

    nlohmann::ordered_json to_json() const;
};

// Replays the proof into a fresh store and re-checks is_decision.
bool verify_proof(const ProofOfConsensus& proof, const LearnerGraph& graph);

struct ChainResult {
    std::vector<Trace> traces;  // strategy A: one per slot; B: a single trace
    std::vector<TraceDecision> decisions;
    std::vector<ProofOfConsensus> proofs;
    nlohmann::ordered_json to_json() const;
};

// Runs scenario.chain (required). Strategy A runs independent instances per
// slot; strategy B shares one store and gates slot-s 1as on the slot-(s-1) 1a.
ChainResult run_chain(const Scenario& scenario, RecordLevel level = RecordLevel::Full);

}  // namespace hetcons
