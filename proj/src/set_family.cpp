#include "hetcons/set_family.hpp"

#include <algorithm>

namespace hetcons {

AcceptorIndex::AcceptorIndex(std::vector<std::string> names) {
    std::sort(names.begin(), names.end());
    for (std::size_t i = 1; i < names.size(); ++i) {
        if (names[i] == names[i - 1])
            throw std::invalid_argument("duplicate acceptor id: " + names[i]);
    }
    if (names.size() > 64)
        throw std::invalid_argument("acceptor roster exceeds 64");
    names_ = std::move(names);
    for (int i = 0; i < static_cast<int>(names_.size()); ++i) pos_[names_[i]] = i;
}

int AcceptorIndex::index_of(const std::string& name) const {
    auto it = pos_.find(name);
    if (it == pos_.end()) throw std::out_of_range("unknown acceptor id: " + name);
    return it->second;
}

Mask AcceptorIndex::mask_of(const std::vector<std::string>& subset) const {
    Mask m = 0;
    for (const auto& n : subset) m |= Mask{1} << index_of(n);
    return m;
}

std::vector<std::string> AcceptorIndex::names_of(Mask m) const {
    std::vector<std::string> out;
    for (int i = 0; i < size(); ++i)
        if (m & (Mask{1} << i)) out.push_back(names_[i]);
    return out;
}

Mask AcceptorIndex::full() const {
    if (names_.empty()) return 0;
    if (names_.size() == 64) return ~Mask{0};
    return (Mask{1} << names_.size()) - 1;
}

SetFamily SetFamily::from_minimal(std::vector<Mask> sets) {
    SetFamily f;
    for (Mask s : sets) f.insert(s);
    return f;
}

bool SetFamily::contains(Mask s) const {
    for (Mask m : min_)
        if ((m & s) == m) return true;
    return false;
}

bool SetFamily::insert(Mask s) {
    // Already dominated by an existing minimal set -> no change.
    for (Mask m : min_)
        if ((m & s) == m) return false;
    // Drop existing sets that the new one undercuts.
    min_.erase(std::remove_if(min_.begin(), min_.end(),
                              [s](Mask m) { return (s & m) == s; }),
               min_.end());
    min_.insert(std::lower_bound(min_.begin(), min_.end(), s), s);
    return true;
}

bool SetFamily::subsumes(const SetFamily& other) const {
    for (Mask m : other.min_)
        if (!contains(m)) return false;
    return true;
}

SetFamily SetFamily::cross_union(const SetFamily& a, const SetFamily& b) {
    SetFamily out;
    for (Mask s : a.min_)
        for (Mask t : b.min_) out.insert(s | t);
    return out;
}

}  // namespace hetcons
