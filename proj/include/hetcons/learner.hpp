#pragma once

#include <deque>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "hetcons/acceptor.hpp"
#include "hetcons/protocol.hpp"

namespace hetcons {

struct DecisionEvent {
    std::string learner;
    std::uint64_t slot = 0;
    Value value;
    Ballot ballot;
    std::vector<MessageId> witness;
};

// One learner: buffered ref-closed receipt plus incremental decision
// detection via a per-ballot signer index (equivalent to the subset search).
class Learner {
public:
    Learner(std::string me, Context& ctx);

    std::vector<DecisionEvent> receive(const Message& m);
    void admit_external(const MessageId& id);  // chain mode gating

    bool knows(const MessageId& id) const;
    const std::vector<DecisionEvent>& decisions() const { return decisions_; }
    const std::vector<ViolationRecord>& violations() const { return violations_; }
    const std::string& me() const { return me_; }

private:
    bool refs_known(const Message& m) const;
    void process(const Message& m, std::vector<DecisionEvent>& events);

    std::string me_;
    int my_index_;
    Context* ctx_;
    IdSet known_;
    std::deque<Message> pending_;
    std::map<Ballot, std::pair<Mask, std::vector<MessageId>>> by_ballot_;
    std::set<Ballot> decided_;
    std::vector<DecisionEvent> decisions_;
    std::vector<ViolationRecord> violations_;
};

}  // namespace hetcons
