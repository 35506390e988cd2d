#include "hetcons/store.hpp"

namespace hetcons {

int MessageStore::insert(const Message& m) {
    MessageId id = m.id();
    if (auto it = index_.find(id); it != index_.end()) return it->second;

    std::vector<MessageId> missing;
    for (const auto& r : m.refs)
        if (!index_.count(r)) missing.push_back(r);
    if (!missing.empty()) throw MissingReference(std::move(missing));

    int idx = static_cast<int>(msgs_.size());
    IdSet tr;
    tr.set(idx);
    int best1a = -1;
    for (const auto& r : m.refs) {
        int ri = index_.at(r);
        tr.merge(tran_[ri]);
        int r1a = get1a_[ri];
        if (r1a < 0) continue;
        if (best1a < 0) {
            best1a = r1a;
        } else if (r1a != best1a) {
            const Ballot& a = msgs_[r1a].ballot;
            const Ballot& b = msgs_[best1a].ballot;
            // Equal ballots on distinct 1as violate the unique-ballot
            // assumption; break by smaller id so the choice is deterministic.
            if (a > b || (a == b && ids_[r1a] < ids_[best1a])) best1a = r1a;
        }
    }
    if (m.kind == MsgKind::OneA) {
        // A 1a is its own dominant 1a unless a referenced one outranks it
        // (chain mode refs a prior-slot 1a with a lower ballot).
        if (best1a < 0 || msgs_[best1a].ballot < m.ballot ||
            (msgs_[best1a].ballot == m.ballot && id < ids_[best1a]))
            best1a = idx;
    }
    msgs_.push_back(m);
    ids_.push_back(id);
    index_[id] = idx;
    tran_.push_back(std::move(tr));
    get1a_.push_back(best1a);
    return idx;
}

int MessageStore::index_of(const MessageId& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw UnknownMessage();
    return it->second;
}

std::vector<MessageId> MessageStore::tran_ids(const MessageId& id) const {
    std::vector<MessageId> out;
    for (int i : tran_.at(index_of(id)).indices()) out.push_back(ids_[i]);
    return out;
}

int MessageStore::get1a(int idx) const {
    int r = get1a_.at(idx);
    if (r < 0) throw No1aFound();
    return r;
}

}  // namespace hetcons
