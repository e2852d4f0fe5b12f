#pragma once

#include <algorithm>
#include <chrono>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "kpm/core.hpp"
#include "kpm/errors.hpp"
#include "kpm/family.hpp"

namespace kpm {

// Caps for the exhaustive searches. Exhaustion is an explicit outcome, never
// folded into "no solution".
struct OracleBudget {
    long long max_nodes = 20'000'000;
    double max_seconds = 30.0;
};

namespace detail {

class BudgetClock {
public:
    explicit BudgetClock(const OracleBudget& b)
        : budget_(b), start_(std::chrono::steady_clock::now()) {
        if (b.max_nodes <= 0 || b.max_seconds <= 0) throw InvalidInput("budget caps must be positive");
    }

    // One search-tree node. False once the budget is gone.
    bool tick() {
        if (exhausted_) return false;
        if (++nodes_ > budget_.max_nodes) {
            exhausted_ = true;
            return false;
        }
        if ((nodes_ & 1023) == 0) {
            std::chrono::duration<double> d = std::chrono::steady_clock::now() - start_;
            if (d.count() > budget_.max_seconds) exhausted_ = true;
        }
        return !exhausted_;
    }

    bool exhausted() const { return exhausted_; }
    long long nodes() const { return nodes_; }

private:
    OracleBudget budget_;
    std::chrono::steady_clock::time_point start_;
    long long nodes_ = 0;
    bool exhausted_ = false;
};

// Edges through each class-0 position, in edge order.
inline std::vector<std::vector<const CrossingTuple*>> edges_by_first_class(const KPartiteHypergraph& h) {
    std::vector<std::vector<const CrossingTuple*>> by_pos(static_cast<std::size_t>(h.position_bound(0)));
    for (const auto& e : h.edges()) by_pos[static_cast<std::size_t>(e.at(0))].push_back(&e);
    return by_pos;
}

}  // namespace detail

struct MatchingOracleResult {
    int size = 0;
    Matching witness;
    bool exact = false;  // proved optimal; false means the budget ran out
    long long nodes = 0;
};

// Exhaustive maximum matching. Branches on the smallest not-yet-decided
// class-0 vertex: one branch per edge through it, plus a skip branch. Upper
// bound at each node is current size + the smallest free-vertex count over
// the classes.
inline MatchingOracleResult max_matching_exact(const KPartiteHypergraph& h, const OracleBudget& budget = {}) {
    detail::BudgetClock clock(budget);
    auto by_pos = detail::edges_by_first_class(h);
    std::vector<int> order = h.alive_positions(0);

    Matching best = detail::greedy_matching(h);
    int ub_cap = h.min_class_size();

    Matching cur;
    VertexMask used(h.position_bounds());
    std::vector<int> free_in_class(static_cast<std::size_t>(h.k()));
    for (int c = 0; c < h.k(); ++c) free_in_class[static_cast<std::size_t>(c)] = h.class_size(c);

    auto recurse = [&](auto&& self, std::size_t idx) -> void {
        if (!clock.tick()) return;
        if (static_cast<int>(best.size()) >= ub_cap) return;
        int remaining_first = 0;
        for (std::size_t i = idx; i < order.size(); ++i)
            remaining_first += !used.test({0, order[i]});
        int ub = remaining_first;
        for (int c = 1; c < h.k(); ++c) ub = std::min(ub, free_in_class[static_cast<std::size_t>(c)]);
        if (cur.size() + ub <= best.size()) return;
        if (idx == order.size()) {
            if (cur.size() > best.size()) best = cur;
            return;
        }
        VertexRef v{0, order[idx]};
        if (used.test(v)) {
            self(self, idx + 1);
            return;
        }
        for (const CrossingTuple* e : by_pos[static_cast<std::size_t>(v.pos)]) {
            if (used.intersects(*e)) continue;
            used.add_tuple(*e);
            for (int c = 0; c < h.k(); ++c) --free_in_class[static_cast<std::size_t>(c)];
            cur.add(*e);
            self(self, idx + 1);
            cur.remove(*e);
            for (int c = 0; c < h.k(); ++c) ++free_in_class[static_cast<std::size_t>(c)];
            used.remove_tuple(*e);
            if (clock.exhausted()) return;
        }
        self(self, idx + 1);
    };
    recurse(recurse, 0);

    return {best.size(), std::move(best), !clock.exhausted(), clock.nodes()};
}

struct RainbowOracleResult {
    int size = 0;
    RainbowMatching witness;
    bool exact = false;
    long long nodes = 0;
};

// Exhaustive maximum rainbow matching: colours in index order, one branch per
// usable edge of that colour plus a skip branch.
inline RainbowOracleResult max_rainbow_matching_exact(const Family& fam, const OracleBudget& budget = {}) {
    detail::BudgetClock clock(budget);
    int t = fam.size();

    // Greedy seed, colours ascending.
    RainbowMatching best;
    {
        VertexMask used(fam.position_bounds());
        for (int j = 0; j < t; ++j) {
            for (const auto& e : fam.member(j).edges()) {
                if (!used.intersects(e)) {
                    best.add(fam.label(j), e);
                    used.add_tuple(e);
                    break;
                }
            }
        }
    }

    int ub_cap = std::min(t, fam.min_class_size());
    RainbowMatching cur;
    VertexMask used(fam.position_bounds());
    std::vector<int> free_in_class(static_cast<std::size_t>(fam.k()));
    for (int c = 0; c < fam.k(); ++c) free_in_class[static_cast<std::size_t>(c)] = fam.class_size(c);

    auto recurse = [&](auto&& self, int j) -> void {
        if (!clock.tick()) return;
        if (best.size() >= ub_cap) return;
        int ub = t - j;
        for (int c = 0; c < fam.k(); ++c) ub = std::min(ub, free_in_class[static_cast<std::size_t>(c)]);
        if (cur.size() + ub <= best.size()) return;
        if (j == t) {
            if (cur.size() > best.size()) best = cur;
            return;
        }
        for (const auto& e : fam.member(j).edges()) {
            if (used.intersects(e)) continue;
            used.add_tuple(e);
            for (int c = 0; c < fam.k(); ++c) --free_in_class[static_cast<std::size_t>(c)];
            cur.add(fam.label(j), e);
            self(self, j + 1);
            cur.remove_colour(fam.label(j));
            for (int c = 0; c < fam.k(); ++c) ++free_in_class[static_cast<std::size_t>(c)];
            used.remove_tuple(e);
            if (clock.exhausted()) return;
        }
        self(self, j + 1);
    };
    recurse(recurse, 0);

    return {best.size(), std::move(best), !clock.exhausted(), clock.nodes()};
}

struct DominatingSetResult {
    enum class Kind { found, none_within_cap, unknown };
    Kind kind = Kind::unknown;
    std::vector<VertexRef> witness;  // minimum-size dominating set when found
    long long nodes = 0;
};

// Minimum dominating set, up to size_cap. Every dominating set hits each
// edge, so branching on the vertices of the first uncovered edge is complete.
// Iterative deepening makes the first hit a minimum.
inline DominatingSetResult min_dominating_set_exact(const KPartiteHypergraph& h, int size_cap,
                                                    const OracleBudget& budget = {}) {
    if (size_cap < 0) throw InvalidInput("size cap must be non-negative");
    detail::BudgetClock clock(budget);

    std::vector<VertexRef> chosen;
    VertexMask mask(h.position_bounds());

    auto first_uncovered = [&]() -> const CrossingTuple* {
        for (const auto& e : h.edges())
            if (!mask.intersects(e)) return &e;
        return nullptr;
    };

    std::vector<VertexRef> found;
    auto dfs = [&](auto&& self, int slack) -> bool {
        if (!clock.tick()) return false;
        const CrossingTuple* e = first_uncovered();
        if (e == nullptr) {
            found = chosen;
            return true;
        }
        if (slack == 0) return false;
        for (auto v : e->vertices()) {
            chosen.push_back(v);
            mask.add(v);
            bool ok = self(self, slack - 1);
            mask.remove(v);
            chosen.pop_back();
            if (ok) return true;
            if (clock.exhausted()) return false;
        }
        return false;
    };

    for (int s = 0; s <= size_cap; ++s) {
        if (dfs(dfs, s)) {
            std::sort(found.begin(), found.end());
            return {DominatingSetResult::Kind::found, std::move(found), clock.nodes()};
        }
        if (clock.exhausted()) return {DominatingSetResult::Kind::unknown, {}, clock.nodes()};
    }
    return {DominatingSetResult::Kind::none_within_cap, {}, clock.nodes()};
}

enum class BoundCheck { fact_1_5, thm_main, thm_1_7 };

inline std::string to_string(BoundCheck c) {
    switch (c) {
        case BoundCheck::fact_1_5: return "fact_1_5";
        case BoundCheck::thm_main: return "thm_main";
        case BoundCheck::thm_1_7: return "thm_1_7";
    }
    return "?";
}

struct VerifyReport {
    std::string check;
    int bound = 0;
    std::optional<int> nu;  // empty when the oracle ran out of budget
    std::string status;     // pass | fail | below_threshold | hypothesis_unmet | inconclusive
    Matching witness;
    std::string note;
};

// Compares the oracle matching number against one of the three lower bounds.
// The two asymptotic bounds only fail softly at small n; the unconditional
// one fails hard.
inline VerifyReport verify_theorem_bound(const KPartiteHypergraph& h, const DegreeProfile& profile,
                                         BoundCheck which, const OracleBudget& budget = {}) {
    VerifyReport rep;
    rep.check = to_string(which);
    int n = h.min_class_size();
    int q = profile.total();
    switch (which) {
        case BoundCheck::fact_1_5: rep.bound = std::max(std::min(n - h.k() + 2, q), 0); break;
        case BoundCheck::thm_main: rep.bound = std::max(std::min(n - 1, q), 0); break;
        case BoundCheck::thm_1_7: rep.bound = std::min(n, q); break;
    }

    int bad = first_class_below_profile(h, profile);
    if (bad >= 0) {
        rep.status = "hypothesis_unmet";
        rep.note = "codegree into class " + std::to_string(bad) + " is below the profile";
        return rep;
    }

    auto oracle = max_matching_exact(h, budget);
    rep.witness = oracle.witness;
    if (!oracle.exact) {
        rep.status = "inconclusive";
        rep.note = "oracle budget exhausted, best found " + std::to_string(oracle.size);
        return rep;
    }
    rep.nu = oracle.size;
    if (oracle.size >= rep.bound) {
        rep.status = "pass";
    } else if (which == BoundCheck::fact_1_5) {
        rep.status = "fail";
    } else {
        rep.status = "below_threshold";
        rep.note = "bound asserted only for large n";
    }
    return rep;
}

}  // namespace kpm
