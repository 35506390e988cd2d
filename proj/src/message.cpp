#include "hetcons/message.hpp"

#include <stdexcept>

namespace hetcons {

const char* kind_name(MsgKind k) {
    switch (k) {
        case MsgKind::OneA: return "1a";
        case MsgKind::OneB: return "1b";
        case MsgKind::TwoA: return "2a";
    }
    return "?";
}

namespace {

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 3; i >= 0; --i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 7; i >= 0; --i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_str(std::string& out, const std::string& s) {
    put_u32(out, static_cast<std::uint32_t>(s.size()));
    out += s;
}

struct Reader {
    std::string_view s;
    std::size_t at = 0;
    unsigned char byte() {
        if (at >= s.size()) throw std::invalid_argument("truncated message");
        return static_cast<unsigned char>(s[at++]);
    }
    std::uint32_t u32() {
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v = (v << 8) | byte();
        return v;
    }
    std::uint64_t u64() {
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v = (v << 8) | byte();
        return v;
    }
    std::string str() {
        std::uint32_t n = u32();
        if (at + n > s.size()) throw std::invalid_argument("truncated message");
        std::string out(s.substr(at, n));
        at += n;
        return out;
    }
};

}  // namespace

std::string Message::serialize() const {
    std::string out;
    out.push_back(static_cast<char>(kind));
    put_str(out, signer);
    put_u32(out, static_cast<std::uint32_t>(refs.size()));
    for (const auto& r : refs) out.append(reinterpret_cast<const char*>(r.digest.data()), 32);
    if (kind == MsgKind::OneA) {
        put_str(out, value.payload);
        put_u64(out, ballot.time);
        put_str(out, ballot.tiebreak);
        put_u64(out, slot);
    } else if (kind == MsgKind::TwoA) {
        put_str(out, lrn);
    }
    return out;
}

Message Message::deserialize(std::string_view bytes) {
    Reader r{bytes};
    Message m;
    unsigned char k = r.byte();
    if (k < 1 || k > 3) throw std::invalid_argument("bad message kind");
    m.kind = static_cast<MsgKind>(k);
    m.signer = r.str();
    std::uint32_t n = r.u32();
    m.refs.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i) {
        MessageId id;
        for (int b = 0; b < 32; ++b) id.digest[b] = r.byte();
        m.refs.push_back(id);
    }
    if (m.kind == MsgKind::OneA) {
        m.value.payload = r.str();
        m.ballot.time = r.u64();
        m.ballot.tiebreak = r.str();
        m.slot = r.u64();
    } else if (m.kind == MsgKind::TwoA) {
        m.lrn = r.str();
    }
    if (r.at != bytes.size()) throw std::invalid_argument("trailing bytes in message");
    return m;
}

MessageId Message::id() const { return MessageId{sha256(serialize())}; }

nlohmann::ordered_json Message::to_json() const {
    nlohmann::ordered_json j;
    j["kind"] = kind_name(kind);
    j["signer"] = signer;
    auto refs_j = nlohmann::ordered_json::array();
    for (const auto& r : refs) refs_j.push_back(r.hex());
    j["refs"] = refs_j;
    if (kind == MsgKind::OneA) {
        j["value"] = value.payload;
        j["ballot"] = {{"time", ballot.time}, {"tiebreak", ballot.tiebreak}};
        j["slot"] = slot;
    } else if (kind == MsgKind::TwoA) {
        j["lrn"] = lrn;
    }
    j["id"] = id().hex();
    return j;
}

bool Message::operator==(const Message& o) const { return serialize() == o.serialize(); }

Ballot make_ballot(std::uint64_t time, const Value& v, const std::string& proposer,
                   std::uint64_t slot) {
    std::string seed;
    put_str(seed, v.payload);
    put_str(seed, proposer);
    put_u64(seed, slot);
    return Ballot{time, to_hex(sha256(seed))};
}

Message make_1a(const std::string& proposer, const Value& v, std::uint64_t time,
                std::uint64_t slot, std::vector<MessageId> refs) {
    Message m;
    m.kind = MsgKind::OneA;
    m.signer = proposer;
    m.refs = std::move(refs);
    m.value = v;
    m.ballot = make_ballot(time, v, proposer, slot);
    m.slot = slot;
    return m;
}

}  // namespace hetcons
