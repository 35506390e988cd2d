#pragma once

#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "hetcons/hash.hpp"
#include "hetcons/learner_graph.hpp"
#include "hetcons/protocol.hpp"

namespace testutil {

inline std::string data_path(const std::string& rel) {
    return std::string(HETCONS_DATA_DIR) + "/" + rel;
}

inline hetcons::LearnerGraph golden(const std::string& name) {
    return hetcons::load_graph(data_path("graphs/" + name + ".json"));
}

inline const std::vector<std::string>& golden_names() {
    static const std::vector<std::string> names = {
        "fully_homogeneous",
        "het_failures",
        "het_acceptors",
        "het_failures_acceptors",
        "het_learners",
        "het_learners_failures",
        "het_learners_acceptors",
        "het_learners_failures_acceptors",
    };
    return names;
}

struct Rng {
    std::uint64_t state;
    std::uint64_t next() { return state = hetcons::splitmix64(state); }
    std::uint64_t below(std::uint64_t n) { return n ? next() % n : 0; }
};

// All k-subsets of {0..n-1} as a family.
inline hetcons::SetFamily threshold(int n, int k) {
    hetcons::SetFamily f;
    std::vector<int> pick(k);
    std::iota(pick.begin(), pick.end(), 0);
    while (true) {
        hetcons::Mask m = 0;
        for (int i : pick) m |= hetcons::Mask{1} << i;
        f.insert(m);
        int i = k - 1;
        while (i >= 0 && pick[i] == n - k + i) --i;
        if (i < 0) break;
        ++pick[i];
        for (int j = i + 1; j < k; ++j) pick[j] = pick[j - 1] + 1;
    }
    return f;
}

// n acceptors a1..an, two learners, every quorum family and edge = any k.
inline hetcons::LearnerGraph homogeneous(int n, int k) {
    std::vector<std::string> acc;
    for (int i = 1; i <= n; ++i) acc.push_back("a" + std::to_string(i));
    hetcons::LearnerGraph g(hetcons::AcceptorIndex(acc), {"l1", "l2"});
    hetcons::SetFamily f = threshold(n, k);
    for (int i = 0; i < 2; ++i) g.set_quorums(i, f);
    for (int a = 0; a < 2; ++a)
        for (int b = a; b < 2; ++b) g.set_edge(a, b, f);
    return g;
}

// Explicit upward-closed family over n acceptors: membership of every subset.
inline std::vector<bool> explicit_family(const hetcons::SetFamily& f, int n) {
    std::vector<bool> in(std::size_t{1} << n, false);
    for (hetcons::Mask s = 0; s < (hetcons::Mask{1} << n); ++s) in[s] = f.contains(s);
    return in;
}

// Reference condensation: explicit upward-closed edge families, union rule
// applied to every member pair until fixpoint.
inline hetcons::LearnerGraph brute_force_condense(const hetcons::LearnerGraph& g) {
    int n = g.acceptors().size();
    int L = g.learner_count();
    std::size_t total = std::size_t{1} << n;
    auto key = [L](int a, int b) { return a * L + b; };
    std::vector<std::vector<bool>> in(static_cast<std::size_t>(L) * L);
    for (int a = 0; a < L; ++a)
        for (int b = 0; b < L; ++b)
            in[key(a, b)] = explicit_family(g.edge(std::min(a, b), std::max(a, b)), n);

    bool changed = true;
    while (changed) {
        changed = false;
        for (int a = 0; a < L; ++a) {
            for (int c = 0; c < L; ++c) {
                for (int b = 0; b < L; ++b) {
                    const auto& ab = in[key(a, b)];
                    const auto& bc = in[key(b, c)];
                    auto& ac = in[key(a, c)];
                    for (std::size_t s = 0; s < total; ++s) {
                        if (!ab[s]) continue;
                        for (std::size_t t = 0; t < total; ++t) {
                            if (!bc[t]) continue;
                            std::size_t u = s | t;
                            if (!ac[u]) {
                                ac[u] = true;
                                changed = true;
                            }
                        }
                    }
                }
            }
        }
    }

    hetcons::LearnerGraph out = g;
    for (int a = 0; a < L; ++a) {
        for (int b = a; b < L; ++b) {
            const auto& fam = in[key(a, b)];
            hetcons::SetFamily f;
            for (std::size_t s = 0; s < total; ++s) {
                if (!fam[s]) continue;
                bool minimal = true;
                for (int bit = 0; bit < n && minimal; ++bit)
                    if ((s >> bit) & 1 && fam[s & ~(std::size_t{1} << bit)]) minimal = false;
                if (minimal) f.insert(static_cast<hetcons::Mask>(s));
            }
            out.set_edge(a, b, f);
        }
    }
    return out;
}

// Random graph with arbitrary (possibly invalid) quorum and edge families.
inline hetcons::LearnerGraph random_graph(Rng& rng, int max_learners, int max_acceptors) {
    int n = 2 + static_cast<int>(rng.below(max_acceptors - 1));
    int L = 1 + static_cast<int>(rng.below(max_learners));
    std::vector<std::string> acc, lrn;
    for (int i = 0; i < n; ++i) acc.push_back("a" + std::to_string(i));
    for (int i = 0; i < L; ++i) lrn.push_back("l" + std::to_string(i));
    hetcons::LearnerGraph g(hetcons::AcceptorIndex(acc), lrn);
    auto random_family = [&] {
        hetcons::SetFamily f;
        int count = 1 + static_cast<int>(rng.below(4));
        for (int i = 0; i < count; ++i) {
            hetcons::Mask m = rng.below(hetcons::Mask{1} << n);
            if (m == 0) m = 1;
            f.insert(m);
        }
        return f;
    };
    for (int i = 0; i < L; ++i) g.set_quorums(i, random_family());
    for (int a = 0; a < L; ++a)
        for (int b = a; b < L; ++b) g.set_edge(a, b, random_family());
    return g;
}

// Reference decision search: every subset of the learner's candidate 2as,
// keeping the maximal subsets is_decision accepts.
inline std::vector<hetcons::Context::Decision> brute_force_decisions(
    hetcons::Context& ctx, int learner) {
    const auto& st = ctx.store();
    const std::string& lname = ctx.graph().learner(learner);
    std::vector<int> twoas;
    for (int i = 0; i < st.size(); ++i)
        if (st.at(i).kind == hetcons::MsgKind::TwoA && st.at(i).lrn == lname &&
            st.has_1a(i) && ctx.graph().acceptors().knows(st.at(i).signer))
            twoas.push_back(i);
    std::size_t k = twoas.size();
    std::vector<std::uint64_t> passing;
    for (std::uint64_t bits = 1; bits < (std::uint64_t{1} << k); ++bits) {
        std::vector<int> subset;
        for (std::size_t i = 0; i < k; ++i)
            if ((bits >> i) & 1) subset.push_back(twoas[i]);
        if (ctx.is_decision(learner, subset)) passing.push_back(bits);
    }
    std::vector<hetcons::Context::Decision> out;
    for (std::uint64_t bits : passing) {
        bool maximal = true;
        for (std::uint64_t other : passing)
            if (other != bits && (other & bits) == bits) { maximal = false; break; }
        if (!maximal) continue;
        hetcons::Context::Decision d;
        for (std::size_t i = 0; i < k; ++i)
            if ((bits >> i) & 1) d.witness.push_back(twoas[i]);
        d.value = st.value_of(d.witness.front());
        d.ballot = st.ballot_of(d.witness.front());
        out.push_back(std::move(d));
    }
    return out;
}

}  // namespace testutil
