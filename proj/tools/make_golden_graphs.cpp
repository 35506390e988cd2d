// Regenerates the golden learner-graph files in data/graphs/.
// Usage: make_golden_graphs <output-dir>
#include <iostream>
#include <numeric>

#include "hetcons/learner_graph.hpp"

using namespace hetcons;

namespace {

std::vector<std::string> prefixed(const std::string& p, int n) {
    std::vector<std::string> out;
    for (int i = 1; i <= n; ++i) out.push_back(p + std::to_string(i));
    return out;
}

std::vector<std::string> concat(std::vector<std::string> a,
                                const std::vector<std::string>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

// All k-subsets of the named acceptors, as a family.
SetFamily k_of(const AcceptorIndex& idx, const std::vector<std::string>& names, int k) {
    SetFamily f;
    int n = static_cast<int>(names.size());
    std::vector<int> pick(k);
    std::iota(pick.begin(), pick.end(), 0);
    while (true) {
        std::vector<std::string> sub;
        for (int i : pick) sub.push_back(names[i]);
        f.insert(idx.mask_of(sub));
        int i = k - 1;
        while (i >= 0 && pick[i] == n - k + i) --i;
        if (i < 0) break;
        ++pick[i];
        for (int j = i + 1; j < k; ++j) pick[j] = pick[j - 1] + 1;
    }
    return f;
}

// Unions of one set from each family.
SetFamily cross(const SetFamily& a, const SetFamily& b) {
    return SetFamily::cross_union(a, b);
}

SetFamily merge(const SetFamily& a, const SetFamily& b) {
    SetFamily out = a;
    for (Mask m : b.minimal()) out.insert(m);
    return out;
}

void set_all_edges(LearnerGraph& g, const SetFamily& f) {
    for (int a = 0; a < g.learner_count(); ++a)
        for (int b = a; b < g.learner_count(); ++b) g.set_edge(a, b, f);
}

LearnerGraph fully_homogeneous() {
    auto acc = prefixed("a", 4);
    LearnerGraph g(AcceptorIndex(acc), {"l1", "l2"});
    SetFamily any3 = k_of(g.acceptors(), acc, 3);
    for (int i = 0; i < 2; ++i) g.set_quorums(i, any3);
    set_all_edges(g, any3);
    return g;
}

LearnerGraph het_failures() {
    auto acc = prefixed("a", 6);
    LearnerGraph g(AcceptorIndex(acc), {"l1", "l2"});
    for (int i = 0; i < 2; ++i) g.set_quorums(i, k_of(g.acceptors(), acc, 4));
    set_all_edges(g, k_of(g.acceptors(), acc, 5));
    return g;
}

LearnerGraph het_acceptors() {
    auto blue = prefixed("b", 3), red = prefixed("r", 3);
    LearnerGraph g(AcceptorIndex(concat(blue, red)), {"l1", "l2"});
    SetFamily fam;
    for (const auto& r : red) fam.insert(g.acceptors().mask_of(concat(blue, {r})));
    for (const auto& b : blue) fam.insert(g.acceptors().mask_of(concat(red, {b})));
    for (int i = 0; i < 2; ++i) g.set_quorums(i, fam);
    set_all_edges(g, fam);
    return g;
}

LearnerGraph het_failures_acceptors() {
    auto x = prefixed("x", 4), y = prefixed("y", 4);
    LearnerGraph g(AcceptorIndex(concat(x, y)), {"l1", "l2"});
    SetFamily fam = cross(k_of(g.acceptors(), x, 3), k_of(g.acceptors(), y, 2));
    for (int i = 0; i < 2; ++i) g.set_quorums(i, fam);
    set_all_edges(g, fam);
    return g;
}

LearnerGraph het_learners() {
    std::vector<std::string> acc = {"a", "b", "c", "d", "e"};
    LearnerGraph g(AcceptorIndex(acc), {"blue1", "blue2", "red1", "red2"});
    std::vector<std::string> blue_roster = {"a", "b", "c", "d"};
    std::vector<std::string> red_roster = {"b", "c", "d", "e"};
    SetFamily qb = k_of(g.acceptors(), blue_roster, 3);
    SetFamily qr = k_of(g.acceptors(), red_roster, 3);
    SetFamily bridge;
    bridge.insert(g.acceptors().mask_of({"b", "c", "d"}));
    for (const auto& l : {"blue1", "blue2"}) g.set_quorums(g.learner_index(l), qb);
    for (const auto& l : {"red1", "red2"}) g.set_quorums(g.learner_index(l), qr);
    for (int a = 0; a < 4; ++a) {
        for (int b = a; b < 4; ++b) {
            bool ab = g.learner(a).starts_with("blue");
            bool bb = g.learner(b).starts_with("blue");
            g.set_edge(a, b, ab && bb ? qb : (!ab && !bb ? qr : bridge));
        }
    }
    return g;
}

LearnerGraph het_learners_failures() {
    auto acc = prefixed("a", 12);
    LearnerGraph g(AcceptorIndex(acc), {"blue1", "blue2", "red1", "red2"});
    for (const auto& l : {"blue1", "blue2"})
        g.set_quorums(g.learner_index(l), k_of(g.acceptors(), acc, 8));
    for (const auto& l : {"red1", "red2"})
        g.set_quorums(g.learner_index(l), k_of(g.acceptors(), acc, 7));
    SetFamily any9 = k_of(g.acceptors(), acc, 9);
    SetFamily any11 = k_of(g.acceptors(), acc, 11);
    for (int a = 0; a < 4; ++a) {
        for (int b = a; b < 4; ++b) {
            bool bb = g.learner(a).starts_with("blue") && g.learner(b).starts_with("blue");
            g.set_edge(a, b, bb ? any9 : any11);
        }
    }
    return g;
}

LearnerGraph het_learners_acceptors() {
    auto blue = prefixed("b", 4), red = prefixed("r", 4);
    auto all = concat(blue, red);
    LearnerGraph g(AcceptorIndex(all), {"blue1", "blue2", "red1", "red2"});
    SetFamily qb = cross(k_of(g.acceptors(), blue, 3), k_of(g.acceptors(), red, 2));
    SetFamily qr = cross(k_of(g.acceptors(), blue, 2), k_of(g.acceptors(), red, 3));
    SetFamily any7 = k_of(g.acceptors(), all, 7);
    for (const auto& l : {"blue1", "blue2"}) g.set_quorums(g.learner_index(l), qb);
    for (const auto& l : {"red1", "red2"}) g.set_quorums(g.learner_index(l), qr);
    for (int a = 0; a < 4; ++a) {
        for (int b = a; b < 4; ++b) {
            bool ab = g.learner(a).starts_with("blue");
            bool bb = g.learner(b).starts_with("blue");
            if (ab && bb)
                g.set_edge(a, b, merge(any7, qb));
            else if (!ab && !bb)
                g.set_edge(a, b, merge(any7, qr));
            else
                g.set_edge(a, b, any7);
        }
    }
    return g;
}

LearnerGraph het_learners_failures_acceptors() {
    auto blue = prefixed("b", 3), black = prefixed("k", 3), red = prefixed("r", 3);
    auto all = concat(concat(blue, black), red);
    LearnerGraph g(AcceptorIndex(all), {"blue1", "blue2", "red1", "red2"});
    SetFamily qb = cross(k_of(g.acceptors(), blue, 2), k_of(g.acceptors(), black, 2));
    SetFamily qr = cross(k_of(g.acceptors(), red, 2), k_of(g.acceptors(), black, 2));
    SetFamily blue_edge =
        cross(k_of(g.acceptors(), blue, 3), k_of(g.acceptors(), black, 2));
    SetFamily red_edge =
        cross(k_of(g.acceptors(), red, 3), k_of(g.acceptors(), black, 2));
    SetFamily all9 = k_of(g.acceptors(), all, 9);
    for (const auto& l : {"blue1", "blue2"}) g.set_quorums(g.learner_index(l), qb);
    for (const auto& l : {"red1", "red2"}) g.set_quorums(g.learner_index(l), qr);
    for (int a = 0; a < 4; ++a) {
        for (int b = a; b < 4; ++b) {
            bool ab = g.learner(a).starts_with("blue");
            bool bb = g.learner(b).starts_with("blue");
            if (ab && bb)
                g.set_edge(a, b, blue_edge);
            else if (!ab && !bb)
                g.set_edge(a, b, red_edge);
            else
                g.set_edge(a, b, all9);
        }
    }
    return g;
}

LearnerGraph failure_disagreement() {
    auto acc = prefixed("a", 5);
    LearnerGraph g(AcceptorIndex(acc), {"blue", "red"});
    g.set_quorums(g.learner_index("blue"), k_of(g.acceptors(), acc, 4));
    g.set_quorums(g.learner_index("red"), k_of(g.acceptors(), acc, 3));
    SetFamily all5 = k_of(g.acceptors(), acc, 5);
    int bl = g.learner_index("blue"), rd = g.learner_index("red");
    g.set_edge(bl, bl, k_of(g.acceptors(), acc, 4));
    g.set_edge(rd, rd, all5);
    g.set_edge(bl, rd, all5);
    return g;
}

}  // namespace

int main(int argc, char** argv) {
    std::string dir = argc > 1 ? argv[1] : "data/graphs";
    struct Entry {
        const char* file;
        LearnerGraph (*make)();
    };
    const Entry entries[] = {
        {"fully_homogeneous.json", fully_homogeneous},
        {"het_failures.json", het_failures},
        {"het_acceptors.json", het_acceptors},
        {"het_failures_acceptors.json", het_failures_acceptors},
        {"het_learners.json", het_learners},
        {"het_learners_failures.json", het_learners_failures},
        {"het_learners_acceptors.json", het_learners_acceptors},
        {"het_learners_failures_acceptors.json", het_learners_failures_acceptors},
        {"failure_disagreement.json", failure_disagreement},
    };
    for (const auto& e : entries) {
        LearnerGraph g = condense(e.make());
        auto res = check_valid(g);
        std::cout << e.file << ": " << (res.ok ? "valid" : "INVALID") << "\n";
        save_graph(g, dir + "/" + std::string(e.file));
    }
    return 0;
}
