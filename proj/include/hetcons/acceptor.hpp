#pragma once

#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "hetcons/protocol.hpp"

namespace hetcons {

struct ViolationRecord {
    std::string kind;    // DuplicateBallot | MalformedMessage | InternalAssert
    std::string detail;
    MessageId msg;
};

struct ReceiveResult {
    std::vector<MessageId> outbound;  // echoes + fresh emissions, in order
    std::vector<MessageId> parked;    // buffered awaiting refs
    std::vector<ViolationRecord> violations;
};

// One acceptor: buffered ref-closed receipt, echo, 1b on every new 1a,
// per-learner 2a batch when a 1b lands at the top ballot.
class Acceptor {
public:
    Acceptor(std::string me, Context& ctx);

    ReceiveResult receive(const Message& m);

    // Chain mode only: mark a prior-slot 1a as known without reacting to it.
    void admit_external(const MessageId& id);

    bool knows(const MessageId& id) const;
    const std::vector<ViolationRecord>& violations() const { return violations_; }
    const std::string& me() const { return me_; }

private:
    bool refs_known(const Message& m) const;
    void process(const Message& m, ReceiveResult& res);
    void drain_pending(ReceiveResult& res);
    void note_known(int idx);

    std::string me_;
    Context* ctx_;
    IdSet known_;
    std::vector<int> recently_;  // recently_received, in arrival order
    std::deque<Message> pending_;
    std::optional<Ballot> max_ballot_;
    std::map<Ballot, MessageId> first_1a_by_ballot_;
    std::set<std::pair<Ballot, std::string>> emitted_2a_;  // (ballot, learner)
    std::vector<ViolationRecord> violations_;
};

}  // namespace hetcons
