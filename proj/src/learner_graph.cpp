#include "hetcons/learner_graph.hpp"

#include <algorithm>
#include <fstream>

namespace hetcons {

LearnerGraph::LearnerGraph(AcceptorIndex acceptors, std::vector<std::string> learners)
    : acceptors_(std::move(acceptors)) {
    std::sort(learners.begin(), learners.end());
    for (std::size_t i = 1; i < learners.size(); ++i)
        if (learners[i] == learners[i - 1])
            throw std::invalid_argument("duplicate learner id: " + learners[i]);
    learners_ = std::move(learners);
    quorums_.resize(learners_.size());
    edges_.resize(learners_.size() * (learners_.size() + 1) / 2);
}

int LearnerGraph::learner_index(const std::string& id) const {
    auto it = std::lower_bound(learners_.begin(), learners_.end(), id);
    if (it == learners_.end() || *it != id) throw UnknownLearner(id);
    return static_cast<int>(it - learners_.begin());
}

bool LearnerGraph::has_learner(const std::string& id) const {
    return std::binary_search(learners_.begin(), learners_.end(), id);
}

int LearnerGraph::tri(int a, int b) const {
    if (a > b) std::swap(a, b);
    // row a in an upper-triangular layout over n learners
    int n = learner_count();
    return a * n - a * (a - 1) / 2 + (b - a);
}

const SetFamily& LearnerGraph::edge(int a, int b) const { return edges_.at(tri(a, b)); }
void LearnerGraph::set_edge(int a, int b, SetFamily f) { edges_.at(tri(a, b)) = std::move(f); }

bool LearnerGraph::operator==(const LearnerGraph& o) const {
    return acceptors_ == o.acceptors_ && learners_ == o.learners_ &&
           quorums_ == o.quorums_ && edges_ == o.edges_;
}

nlohmann::ordered_json LearnerGraph::to_json() const {
    nlohmann::ordered_json j;
    j["acceptors"] = acceptors_.names();
    j["learners"] = learners_;
    nlohmann::ordered_json q = nlohmann::ordered_json::object();
    for (int i = 0; i < learner_count(); ++i) {
        auto sets = nlohmann::ordered_json::array();
        for (Mask m : quorums_[i].minimal()) sets.push_back(acceptors_.names_of(m));
        q[learners_[i]] = sets;
    }
    j["quorums"] = q;
    auto edges = nlohmann::ordered_json::array();
    for (int a = 0; a < learner_count(); ++a) {
        for (int b = a; b < learner_count(); ++b) {
            nlohmann::ordered_json e;
            e["between"] = {learners_[a], learners_[b]};
            auto sets = nlohmann::ordered_json::array();
            for (Mask m : edge(a, b).minimal()) sets.push_back(acceptors_.names_of(m));
            e["safe_sets"] = sets;
            edges.push_back(e);
        }
    }
    j["edges"] = edges;
    return j;
}

LearnerGraph LearnerGraph::from_json(const nlohmann::json& j) {
    AcceptorIndex idx(j.at("acceptors").get<std::vector<std::string>>());
    LearnerGraph g(idx, j.at("learners").get<std::vector<std::string>>());
    for (auto& [learner, sets] : j.at("quorums").items()) {
        SetFamily f;
        for (auto& s : sets) f.insert(idx.mask_of(s.get<std::vector<std::string>>()));
        g.set_quorums(g.learner_index(learner), std::move(f));
    }
    for (auto& e : j.at("edges")) {
        auto pair = e.at("between").get<std::vector<std::string>>();
        if (pair.size() != 2) throw std::invalid_argument("edge needs two learners");
        SetFamily f;
        for (auto& s : e.at("safe_sets"))
            f.insert(idx.mask_of(s.get<std::vector<std::string>>()));
        g.set_edge(g.learner_index(pair[0]), g.learner_index(pair[1]), std::move(f));
    }
    return g;
}

LearnerGraph load_graph(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open graph file: " + path);
    nlohmann::json j;
    in >> j;
    return LearnerGraph::from_json(j);
}

void save_graph(const LearnerGraph& g, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write graph file: " + path);
    out << g.to_json().dump(2) << "\n";
}

LearnerGraph condense(const LearnerGraph& g) {
    LearnerGraph out = g;
    int n = out.learner_count();
    bool changed = true;
    while (changed) {
        changed = false;
        for (int a = 0; a < n; ++a) {
            for (int c = a; c < n; ++c) {
                SetFamily acc = out.edge(a, c);
                bool grew = false;
                for (int b = 0; b < n; ++b) {
                    SetFamily uni = SetFamily::cross_union(out.edge(a, b), out.edge(b, c));
                    for (Mask m : uni.minimal()) grew |= acc.insert(m);
                }
                if (grew) {
                    out.set_edge(a, c, std::move(acc));
                    changed = true;
                }
            }
        }
    }
    return out;
}

bool is_condensed(const LearnerGraph& g) { return condense(g) == g; }

ValidityResult check_valid(const LearnerGraph& g) {
    if (!is_condensed(g)) throw NotCondensed();
    ValidityResult r;
    r.ok = true;
    int n = g.learner_count();
    for (int a = 0; a < n; ++a) {
        for (int b = a; b < n; ++b) {
            for (Mask s : g.edge(a, b).minimal()) {
                for (Mask qa : g.quorums(a).minimal()) {
                    for (Mask qb : g.quorums(b).minimal()) {
                        if ((qa & qb & s) == 0) {
                            r.ok = false;
                            r.witnesses.push_back({g.learner(a), g.learner(b), s, qa, qb});
                        }
                    }
                }
            }
        }
    }
    return r;
}

bool entangled(const LearnerGraph& g, const std::string& a, const std::string& b,
               const ExecutionFacts& facts) {
    return g.edge(g.learner_index(a), g.learner_index(b)).contains(facts.real_safe);
}

bool accurate(const LearnerGraph& g, const std::string& a, const ExecutionFacts& facts) {
    return entangled(g, a, a, facts);
}

bool terminating(const LearnerGraph& g, const std::string& a, const ExecutionFacts& facts) {
    return g.quorums(g.learner_index(a)).contains(facts.real_live & facts.real_safe);
}

namespace {

// All minimal strict majorities (size floor(|s|/2)+1) of the bits in s.
std::vector<Mask> strict_majorities(Mask s) {
    std::vector<int> bits;
    for (int i = 0; i < 64; ++i)
        if (s & (Mask{1} << i)) bits.push_back(i);
    int k = static_cast<int>(bits.size()) / 2 + 1;
    std::vector<Mask> out;
    std::vector<int> pick(k);
    // enumerate k-subsets of bits
    for (int i = 0; i < k; ++i) pick[i] = i;
    while (true) {
        Mask m = 0;
        for (int i : pick) m |= Mask{1} << bits[i];
        out.push_back(m);
        int i = k - 1;
        while (i >= 0 && pick[i] == static_cast<int>(bits.size()) - k + i) --i;
        if (i < 0) break;
        ++pick[i];
        for (int j = i + 1; j < k; ++j) pick[j] = pick[j - 1] + 1;
    }
    return out;
}

}  // namespace

std::vector<SetFamily> derive_quorums_from_edges(const LearnerGraph& g) {
    if (!is_condensed(g)) throw NotCondensed();
    int n = g.learner_count();
    std::vector<SetFamily> out(n);
    for (int a = 0; a < n; ++a) {
        // Collect one majority family per (edge of a, minimal safe set).
        std::vector<std::vector<Mask>> choice_sets;
        for (int b = 0; b < n; ++b)
            for (Mask s : g.edge(a, b).minimal())
                choice_sets.push_back(strict_majorities(s));
        if (choice_sets.empty()) continue;  // no constraints -> empty family
        SetFamily fam = SetFamily::from_minimal({0});
        for (const auto& choices : choice_sets) {
            SetFamily next;
            for (Mask u : fam.minimal())
                for (Mask c : choices) next.insert(u | c);
            fam = std::move(next);
        }
        out[a] = std::move(fam);
    }
    return out;
}

const SetFamily& DerivedSafeSets::edge(const LearnerGraph& g, int a, int b) const {
    if (a > b) std::swap(a, b);
    int n = g.learner_count();
    return edges.at(a * n - a * (a - 1) / 2 + (b - a));
}

DerivedSafeSets derive_safe_sets_from_quorums(const LearnerGraph& g) {
    int n = g.learner_count();
    DerivedSafeSets out;
    out.edges.resize(n * (n + 1) / 2);
    int e = 0;
    for (int a = 0; a < n; ++a) {
        for (int b = a; b < n; ++b, ++e) {
            std::vector<Mask> intersections;
            bool disjoint = false;
            for (Mask qa : g.quorums(a).minimal()) {
                for (Mask qb : g.quorums(b).minimal()) {
                    Mask i = qa & qb;
                    if (i == 0) disjoint = true;
                    intersections.push_back(i);
                }
            }
            if (disjoint || intersections.empty()) {
                if (disjoint)
                    out.warnings.push_back("disjoint quorum pair on edge (" +
                                           g.learner(a) + ", " + g.learner(b) + ")");
                continue;  // empty family
            }
            SetFamily fam = SetFamily::from_minimal({0});
            for (Mask inter : intersections) {
                SetFamily next;
                for (Mask u : fam.minimal()) {
                    if (u & inter) {  // already hit
                        next.insert(u);
                        continue;
                    }
                    for (int i = 0; i < 64; ++i)
                        if (inter & (Mask{1} << i)) next.insert(u | (Mask{1} << i));
                }
                fam = std::move(next);
            }
            out.edges[e] = std::move(fam);
        }
    }
    return out;
}

}  // namespace hetcons
