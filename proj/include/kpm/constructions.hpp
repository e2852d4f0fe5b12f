#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "kpm/core.hpp"
#include "kpm/errors.hpp"
#include "kpm/io.hpp"
#include "kpm/rational.hpp"
#include "kpm/rng.hpp"

namespace kpm {

// Generator output: the graph plus the side-record the CLI writes next to it.
struct ConstructionResult {
    KPartiteHypergraph graph;
    std::string construction;
    io::json parameters;
    std::vector<std::vector<int>> a_sets;  // per class, the planted positions
};

namespace detail {

inline std::vector<std::vector<int>> prefix_sets(int k, const std::vector<int>& sizes) {
    std::vector<std::vector<int>> out(static_cast<std::size_t>(k));
    for (int c = 0; c < k; ++c)
        for (int p = 0; p < sizes[static_cast<std::size_t>(c)]; ++p) out[static_cast<std::size_t>(c)].push_back(p);
    return out;
}

template <class Pred>
std::vector<CrossingTuple> tuples_where(int k, int n, Pred&& keep) {
    std::vector<CrossingTuple> out;
    std::vector<int> slots(static_cast<std::size_t>(k), 0);
    if (n <= 0) return out;
    while (true) {
        if (keep(slots)) out.push_back(CrossingTuple::full(slots));
        int i = k;
        while (i > 0) {
            --i;
            if (++slots[static_cast<std::size_t>(i)] < n) break;
            slots[static_cast<std::size_t>(i)] = 0;
            if (i == 0) return out;
        }
    }
}

}  // namespace detail

inline ConstructionResult complete_graph(int k, int n) {
    if (k < 2) throw InvalidInput("k must be at least 2");
    if (n < 1) throw InvalidInput("n must be positive");
    auto edges = detail::tuples_where(k, n, [](const std::vector<int>&) { return true; });
    KPartiteHypergraph h(k, std::vector<int>(static_cast<std::size_t>(k), n), std::move(edges));
    io::json params;
    params["k"] = k;
    params["n"] = n;
    return {std::move(h), "complete", std::move(params), {}};
}

// Planted sets A_i = first |A_i| positions; edges are the crossing tuples with
// an even number of vertices inside ∪A_i. Valid size vectors keep every |A_i|
// within one of n/2 and the total odd, which blocks perfect matchings.
inline ConstructionResult divisibility_barrier(int k, int n, std::optional<std::vector<int>> sizes) {
    if (k < 2) throw InvalidInput("k must be at least 2");
    if (n < 1) throw InvalidInput("n must be positive");
    std::vector<int> s;
    if (sizes) {
        s = *sizes;
        if (static_cast<int>(s.size()) != k) throw InvalidInput("need one A-set size per class");
        int sum = 0;
        for (int v : s) {
            if (v < 0 || v > n) throw InvalidInput("A-set size out of range");
            if (2 * v < n - 2 || 2 * v > n + 2) throw InvalidInput("A-set sizes must be within one of n/2");
            sum += v;
        }
        if (sum % 2 == 0) throw InvalidInput("A-set sizes must have odd total");
    } else {
        // Balanced default: all floor(n/2), with |A_0| nudged by one when the
        // total comes out even (down for even n, up for odd n, staying in
        // range either way).
        s.assign(static_cast<std::size_t>(k), n / 2);
        int sum = k * (n / 2);
        if (sum % 2 == 0) s[0] += (n % 2 == 0) ? -1 : 1;
        if (s[0] < 0) throw InvalidInput("no valid A-set sizes for these parameters");
    }
    auto edges = detail::tuples_where(k, n, [&](const std::vector<int>& slots) {
        int inside = 0;
        for (int c = 0; c < k; ++c) inside += slots[static_cast<std::size_t>(c)] < s[static_cast<std::size_t>(c)];
        return inside % 2 == 0;
    });
    KPartiteHypergraph h(k, std::vector<int>(static_cast<std::size_t>(k), n), std::move(edges));
    io::json params;
    params["k"] = k;
    params["n"] = n;
    params["sizes"] = s;
    return {std::move(h), "divisibility_barrier", std::move(params), detail::prefix_sets(k, s)};
}

// Edges are the crossing tuples meeting ∪A_i, so every class-i codegree is at
// least a_i while no matching can exceed |∪A_i| edges beyond n.
inline ConstructionResult space_barrier(int k, int n, const DegreeProfile& a) {
    if (k < 2) throw InvalidInput("k must be at least 2");
    if (n < 1) throw InvalidInput("n must be positive");
    if (a.k() != k) throw InvalidInput("profile arity must equal k");
    for (int c = 0; c < k; ++c)
        if (a.at(c) > n) throw InvalidInput("profile entries must not exceed n");
    auto edges = detail::tuples_where(k, n, [&](const std::vector<int>& slots) {
        for (int c = 0; c < k; ++c)
            if (slots[static_cast<std::size_t>(c)] < a.at(c)) return true;
        return false;
    });
    KPartiteHypergraph h(k, std::vector<int>(static_cast<std::size_t>(k), n), std::move(edges));
    io::json params;
    params["k"] = k;
    params["n"] = n;
    params["profile"] = a.entries();
    return {std::move(h), "space_barrier", std::move(params), detail::prefix_sets(k, a.entries())};
}

// Space-barrier backbone plus Bernoulli(density) extras. One generator draw is
// consumed per non-backbone tuple, scanned in lexicographic order, so the edge
// set is a pure function of (k, n, a, density, seed).
inline ConstructionResult random_instance(int k, int n, const DegreeProfile& a, const Rational& density,
                                          std::uint64_t seed) {
    if (k < 2) throw InvalidInput("k must be at least 2");
    if (n < 1) throw InvalidInput("n must be positive");
    if (a.k() != k) throw InvalidInput("profile arity must equal k");
    for (int c = 0; c < k; ++c)
        if (a.at(c) > n) throw InvalidInput("profile entries must not exceed n");
    if (density < Rational(0) || density > Rational(1)) throw InvalidInput("density must be in [0,1]");
    SplitMix64 rng(seed);
    auto edges = detail::tuples_where(k, n, [&](const std::vector<int>& slots) {
        for (int c = 0; c < k; ++c)
            if (slots[static_cast<std::size_t>(c)] < a.at(c)) return true;
        return rng.bernoulli(density);
    });
    KPartiteHypergraph h(k, std::vector<int>(static_cast<std::size_t>(k), n), std::move(edges));
    io::json params;
    params["k"] = k;
    params["n"] = n;
    params["profile"] = a.entries();
    params["density"] = density.str();
    params["seed"] = seed;
    return {std::move(h), "random", std::move(params), detail::prefix_sets(k, a.entries())};
}

namespace detail {

// Lex-greedy maximal matching: repeatedly the smallest edge disjoint from the
// current one.
inline Matching greedy_matching(const KPartiteHypergraph& h) {
    Matching m;
    VertexMask used(h.position_bounds());
    for (const auto& e : h.edges()) {
        if (!used.intersects(e)) {
            m.add(e);
            used.add_tuple(e);
        }
    }
    return m;
}

}  // namespace detail

// Augmentation matcher: grows a matching to exactly min{n-k+2, Q} edges, where
// Q is the profile total and n the smallest class size. Below that target an
// improving move always exists once the codegrees meet the profile: either a
// free edge, or one removal plus two disjoint additions. Move search is
// lexicographic (additions first), so runs are reproducible.
inline Matching fact_1_5_matching(const KPartiteHypergraph& h, const DegreeProfile& profile) {
    int bad = first_class_below_profile(h, profile);
    if (bad >= 0)
        throw HypothesisUnmet("codegree into class " + std::to_string(bad) + " is below the profile");
    int n = h.min_class_size();
    int target = std::min(n - h.k() + 2, profile.total());
    if (target < 0) target = 0;

    Matching m = detail::greedy_matching(h);
    long long cap = static_cast<long long>(n) * std::max(profile.total(), 1) + 1;
    for (long long iter = 0; m.size() < target; ++iter) {
        if (iter >= cap)
            throw InvariantViolation("augmentation stalled at " + std::to_string(m.size()) + " of " +
                                     std::to_string(target) + " edges");
        VertexMask used(h.position_bounds());
        for (const auto& e : m.edges) used.add_tuple(e);

        bool moved = false;
        for (const auto& e : h.edges()) {
            if (!used.intersects(e)) {
                m.add(e);
                moved = true;
                break;
            }
        }
        if (moved) continue;

        // No free edge: scan (removal, addition, addition) triples in lex
        // order and take the first that trades one edge for two.
        for (std::size_t ri = 0; ri < m.edges.size() && !moved; ++ri) {
            CrossingTuple r = m.edges[static_cast<std::size_t>(ri)];
            used.remove_tuple(r);
            std::vector<CrossingTuple> candidates;
            for (const auto& e : h.edges())
                if (!used.intersects(e) && !(e == r)) candidates.push_back(e);
            for (std::size_t i = 0; i < candidates.size() && !moved; ++i) {
                for (std::size_t j = i + 1; j < candidates.size(); ++j) {
                    if (candidates[i].disjoint_from(candidates[j])) {
                        m.remove(r);
                        m.add(candidates[i]);
                        m.add(candidates[j]);
                        moved = true;
                        break;
                    }
                }
            }
            if (!moved) used.add_tuple(r);
        }
        if (!moved)
            throw InvariantViolation("no improving move below target: matching " + std::to_string(m.size()) +
                                     " of " + std::to_string(target));
    }
    // Exactly the target, even when the greedy start overshoots.
    while (m.size() > target) m.edges.pop_back();
    return m;
}

}  // namespace kpm
