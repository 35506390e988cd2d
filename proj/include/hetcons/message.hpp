#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <vector>

#include "hetcons/hash.hpp"

#include <json.hpp>

namespace hetcons {

enum class MsgKind : std::uint8_t { OneA = 1, OneB = 2, TwoA = 3 };

const char* kind_name(MsgKind k);

struct Ballot {
    std::uint64_t time = 0;
    std::string tiebreak;  // hex digest of (value, proposer, slot)

    auto operator<=>(const Ballot&) const = default;
};

struct Value {
    std::string payload;
    auto operator<=>(const Value&) const = default;
};

struct MessageId {
    Digest digest{};
    auto operator<=>(const MessageId&) const = default;
    std::string hex() const { return to_hex(digest); }
};

// Immutable protocol message. Identity is the hash of the canonical
// serialization, so equal ids mean equal content.
struct Message {
    MsgKind kind = MsgKind::OneA;
    std::string signer;
    std::vector<MessageId> refs;  // insertion order, part of the canonical form
    // 1a only:
    Value value;
    Ballot ballot;
    std::uint64_t slot = 0;
    // 2a only:
    std::string lrn;

    std::string serialize() const;                       // canonical bytes
    static Message deserialize(std::string_view bytes);  // inverse
    MessageId id() const;                                // sha256(serialize())

    nlohmann::ordered_json to_json() const;  // debug form
    bool operator==(const Message& o) const;
};

// Ballot tiebreak fixed by (value, proposer, slot), so distinct proposals at
// the same time still get distinct, totally ordered ballots.
Ballot make_ballot(std::uint64_t time, const Value& v, const std::string& proposer,
                   std::uint64_t slot);

Message make_1a(const std::string& proposer, const Value& v, std::uint64_t time,
                std::uint64_t slot = 0, std::vector<MessageId> refs = {});

}  // namespace hetcons
