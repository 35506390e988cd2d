#pragma once

#include <map>
#include <stdexcept>
#include <vector>

#include "hetcons/message.hpp"

namespace hetcons {

struct MissingReference : std::runtime_error {
    std::vector<MessageId> missing;
    explicit MissingReference(std::vector<MessageId> ids)
        : std::runtime_error("message references unknown ids"), missing(std::move(ids)) {}
};
struct UnknownMessage : std::runtime_error {
    UnknownMessage() : std::runtime_error("unknown message id") {}
};
struct No1aFound : std::runtime_error {
    No1aFound() : std::runtime_error("no 1a in transitive references") {}
};

// Growable bitset over store indices.
class IdSet {
public:
    void set(int i) {
        std::size_t w = static_cast<std::size_t>(i) >> 6;
        if (w >= words_.size()) words_.resize(w + 1, 0);
        words_[w] |= std::uint64_t{1} << (i & 63);
    }
    bool test(int i) const {
        std::size_t w = static_cast<std::size_t>(i) >> 6;
        return w < words_.size() && (words_[w] >> (i & 63)) & 1;
    }
    void merge(const IdSet& o) {
        if (o.words_.size() > words_.size()) words_.resize(o.words_.size(), 0);
        for (std::size_t i = 0; i < o.words_.size(); ++i) words_[i] |= o.words_[i];
    }
    std::vector<int> indices() const {
        std::vector<int> out;
        for (std::size_t w = 0; w < words_.size(); ++w) {
            std::uint64_t bits = words_[w];
            while (bits) {
                int b = __builtin_ctzll(bits);
                out.push_back(static_cast<int>(w * 64 + b));
                bits &= bits - 1;
            }
        }
        return out;
    }

private:
    std::vector<std::uint64_t> words_;
};

// Append-only message DAG, closed under refs; insertion order is topological.
// Transitive reference sets and the dominant 1a are computed at insert time.
class MessageStore {
public:
    // Throws MissingReference when any ref is absent; idempotent on re-insert.
    int insert(const Message& m);

    bool contains(const MessageId& id) const { return index_.count(id) != 0; }
    int index_of(const MessageId& id) const;  // throws UnknownMessage
    int size() const { return static_cast<int>(msgs_.size()); }

    const Message& at(int idx) const { return msgs_.at(idx); }
    const MessageId& id_at(int idx) const { return ids_.at(idx); }
    const Message& by_id(const MessageId& id) const { return msgs_.at(index_of(id)); }

    // Transitive closure of refs, including idx itself.
    const IdSet& tran(int idx) const { return tran_.at(idx); }
    std::vector<MessageId> tran_ids(const MessageId& id) const;

    // Index of the max-ballot 1a in tran(idx); throws No1aFound when absent.
    int get1a(int idx) const;
    bool has_1a(int idx) const { return get1a_.at(idx) >= 0; }
    const Ballot& ballot_of(int idx) const { return msgs_.at(get1a(idx)).ballot; }
    const Value& value_of(int idx) const { return msgs_.at(get1a(idx)).value; }
    std::uint64_t slot_of(int idx) const { return msgs_.at(get1a(idx)).slot; }

private:
    std::vector<Message> msgs_;
    std::vector<MessageId> ids_;
    std::map<MessageId, int> index_;
    std::vector<IdSet> tran_;
    std::vector<int> get1a_;  // -1 when tran holds no 1a
};

}  // namespace hetcons
