#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace hetcons {

// A subset of the acceptor roster, one bit per acceptor index.
// The roster is capped at 64 acceptors, far above any configuration we run.
using Mask = std::uint64_t;

inline int popcount(Mask m) { return __builtin_popcountll(m); }

// Bidirectional map between acceptor names and bit positions.
// Names are sorted, so masks order deterministically.
class AcceptorIndex {
public:
    AcceptorIndex() = default;
    explicit AcceptorIndex(std::vector<std::string> names);

    int size() const { return static_cast<int>(names_.size()); }
    int index_of(const std::string& name) const;          // throws on unknown
    bool knows(const std::string& name) const { return pos_.count(name) != 0; }
    const std::string& name(int i) const { return names_.at(i); }
    const std::vector<std::string>& names() const { return names_; }

    Mask mask_of(const std::vector<std::string>& subset) const;
    std::vector<std::string> names_of(Mask m) const;
    Mask full() const;

    bool operator==(const AcceptorIndex& o) const { return names_ == o.names_; }

private:
    std::vector<std::string> names_;
    std::map<std::string, int> pos_;
};

// An upward-closed family of acceptor sets, stored as its minimal antichain.
// contains(S) means: some minimal member is a subset of S.
class SetFamily {
public:
    SetFamily() = default;

    static SetFamily from_minimal(std::vector<Mask> sets);

    bool empty() const { return min_.empty(); }
    const std::vector<Mask>& minimal() const { return min_; }
    bool contains(Mask s) const;

    // Adds a generator set; keeps the antichain minimal.
    // Returns true when the family actually changed.
    bool insert(Mask s);

    // Every minimal set of `other` is contained by this family,
    // i.e. this ⊇ other viewed as upward-closed families.
    bool subsumes(const SetFamily& other) const;

    // {s ∪ s' | s in a, s' in b}, minimized.
    static SetFamily cross_union(const SetFamily& a, const SetFamily& b);

    bool operator==(const SetFamily& o) const { return min_ == o.min_; }

private:
    std::vector<Mask> min_;  // sorted, pairwise incomparable
};

}  // namespace hetcons
