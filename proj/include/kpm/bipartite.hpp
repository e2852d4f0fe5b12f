#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "kpm/errors.hpp"
#include "kpm/rational.hpp"
#include "kpm/rng.hpp"

namespace kpm {

// Left-indexed adjacency, each list sorted ascending. Immutable.
struct BipartiteGraph {
    int left_size = 0;
    int right_size = 0;
    std::vector<std::vector<int>> adj;

    BipartiteGraph(int lefts, int rights, std::vector<std::vector<int>> adjacency)
        : left_size(lefts), right_size(rights), adj(std::move(adjacency)) {
        if (lefts < 0 || rights < 0) throw InvalidInput("side sizes must be non-negative");
        if (static_cast<int>(adj.size()) != lefts) throw InvalidInput("adjacency must have one list per left vertex");
        for (auto& list : adj) {
            std::sort(list.begin(), list.end());
            if (std::adjacent_find(list.begin(), list.end()) != list.end())
                throw InvalidInput("duplicate bipartite edge");
            for (int r : list)
                if (r < 0 || r >= rights) throw InvalidInput("right index out of range");
        }
    }

    int left_degree(int u) const { return static_cast<int>(adj[static_cast<std::size_t>(u)].size()); }
};

struct BipMatching {
    std::vector<int> left_to_right;  // -1 where unmatched
    std::vector<int> right_to_left;
    int size = 0;

    bool saturates_left() const { return size == static_cast<int>(left_to_right.size()); }
};

// Augmenting-path (Kuhn) maximum matching. Left vertices are processed in
// ascending order and adjacency is scanned ascending, so the result is a pure
// function of the graph. `right_alive`, when given, masks off right vertices.
inline BipMatching max_bip_matching(const BipartiteGraph& g, const std::vector<char>* right_alive = nullptr) {
    BipMatching m;
    m.left_to_right.assign(static_cast<std::size_t>(g.left_size), -1);
    m.right_to_left.assign(static_cast<std::size_t>(g.right_size), -1);
    std::vector<char> visited(static_cast<std::size_t>(g.right_size), 0);

    auto usable = [&](int r) { return right_alive == nullptr || (*right_alive)[static_cast<std::size_t>(r)] != 0; };

    auto augment = [&](auto&& self, int u) -> bool {
        for (int r : g.adj[static_cast<std::size_t>(u)]) {
            if (!usable(r) || visited[static_cast<std::size_t>(r)]) continue;
            visited[static_cast<std::size_t>(r)] = 1;
            int owner = m.right_to_left[static_cast<std::size_t>(r)];
            if (owner < 0 || self(self, owner)) {
                m.left_to_right[static_cast<std::size_t>(u)] = r;
                m.right_to_left[static_cast<std::size_t>(r)] = u;
                return true;
            }
        }
        return false;
    };

    for (int u = 0; u < g.left_size; ++u) {
        std::fill(visited.begin(), visited.end(), 0);
        m.size += augment(augment, u);
    }
    return m;
}

// None iff some matching saturates the left side. Otherwise the canonical
// violator: every left vertex reachable from an unmatched left vertex by an
// alternating path. That set S always has |N(S)| < |S|.
inline std::optional<std::vector<int>> hall_violator(const BipartiteGraph& g,
                                                     const std::vector<char>* right_alive = nullptr) {
    BipMatching m = max_bip_matching(g, right_alive);
    if (m.saturates_left()) return std::nullopt;

    auto usable = [&](int r) { return right_alive == nullptr || (*right_alive)[static_cast<std::size_t>(r)] != 0; };

    std::vector<char> left_seen(static_cast<std::size_t>(g.left_size), 0);
    std::vector<char> right_seen(static_cast<std::size_t>(g.right_size), 0);
    std::vector<int> stack;
    for (int u = 0; u < g.left_size; ++u) {
        if (m.left_to_right[static_cast<std::size_t>(u)] < 0) {
            left_seen[static_cast<std::size_t>(u)] = 1;
            stack.push_back(u);
        }
    }
    while (!stack.empty()) {
        int u = stack.back();
        stack.pop_back();
        for (int r : g.adj[static_cast<std::size_t>(u)]) {
            if (!usable(r) || right_seen[static_cast<std::size_t>(r)]) continue;
            right_seen[static_cast<std::size_t>(r)] = 1;
            int owner = m.right_to_left[static_cast<std::size_t>(r)];
            if (owner >= 0 && !left_seen[static_cast<std::size_t>(owner)]) {
                left_seen[static_cast<std::size_t>(owner)] = 1;
                stack.push_back(owner);
            }
        }
    }
    std::vector<int> violator;
    for (int u = 0; u < g.left_size; ++u)
        if (left_seen[static_cast<std::size_t>(u)]) violator.push_back(u);
    return violator;
}

struct Core24 {
    std::vector<int> x;        // left subset, |x| ≥ (1-2μ)q
    std::vector<int> b_prime;  // right subset of size ⌊q/2⌋
};

struct RobustWitness {
    // Each tested right-deletion set together with a left-saturating matching
    // of the graph minus it.
    std::vector<std::pair<std::vector<int>, BipMatching>> tested;
};

struct Dichotomy24 {
    bool robust = false;
    RobustWitness witness;  // set when robust
    Core24 core;            // set when not
};

namespace detail {

inline std::vector<char> right_mask_without(int right_size, const std::vector<int>& removed) {
    std::vector<char> mask(static_cast<std::size_t>(right_size), 1);
    for (int r : removed) {
        if (r < 0 || r >= right_size) throw InvalidInput("removed right index out of range");
        mask[static_cast<std::size_t>(r)] = 0;
    }
    return mask;
}

// Builds the highly-matchable core from a saturation failure on G minus Y.
// X is the canonical violator there; B' collects, ascending, the first ⌊q/2⌋
// vertices of N(X) in the full graph having at most q/5 non-neighbours in X.
inline Core24 core_from_violation(const BipartiteGraph& g, int q, const Rational& mu,
                                  const std::vector<char>& right_mask) {
    auto violator = hall_violator(g, &right_mask);
    if (!violator) throw InvariantViolation("core requested but the left side saturates");
    Core24 core;
    core.x = *violator;

    // |X| ≥ (1-2μ)q, exactly.
    long long lhs = static_cast<long long>(core.x.size()) * mu.den();
    long long rhs = static_cast<long long>(q) * (mu.den() - 2 * mu.num());
    if (lhs < rhs) {
        std::string dump = "core |X| = " + std::to_string(core.x.size()) + " below (1-2mu)q with q = " +
                           std::to_string(q) + ", mu = " + mu.str() + ", X =";
        for (int u : core.x) dump += " " + std::to_string(u);
        throw InvariantViolation(dump);
    }

    std::vector<char> in_x(static_cast<std::size_t>(g.left_size), 0);
    for (int u : core.x) in_x[static_cast<std::size_t>(u)] = 1;
    std::vector<int> nbrs_in_x(static_cast<std::size_t>(g.right_size), 0);
    std::vector<char> in_nx(static_cast<std::size_t>(g.right_size), 0);
    for (int u : core.x)
        for (int r : g.adj[static_cast<std::size_t>(u)]) {
            ++nbrs_in_x[static_cast<std::size_t>(r)];
            in_nx[static_cast<std::size_t>(r)] = 1;
        }

    int want = q / 2;
    for (int r = 0; r < g.right_size && static_cast<int>(core.b_prime.size()) < want; ++r) {
        if (!in_nx[static_cast<std::size_t>(r)]) continue;
        long long non_nbrs = static_cast<long long>(core.x.size()) - nbrs_in_x[static_cast<std::size_t>(r)];
        if (5 * non_nbrs <= q) core.b_prime.push_back(r);
    }
    if (static_cast<int>(core.b_prime.size()) < want)
        throw InvariantViolation("only " + std::to_string(core.b_prime.size()) + " admissible right vertices for B' of " +
                                 std::to_string(want));

    // Sampled form of the core guarantee: random ⌊q/2⌋-subsets of X match
    // perfectly into B'.
    SplitMix64 rng(0x243F6A8885A308D3ull);  // fixed so reruns agree
    std::vector<char> b_mask(static_cast<std::size_t>(g.right_size), 0);
    for (int r : core.b_prime) b_mask[static_cast<std::size_t>(r)] = 1;
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<int> pool = core.x;
        std::vector<int> sample;
        for (int i = 0; i < want; ++i) {
            std::size_t pick = static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(pool.size())));
            sample.push_back(pool[pick]);
            pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(pick));
        }
        std::sort(sample.begin(), sample.end());
        std::vector<std::vector<int>> sub_adj;
        sub_adj.reserve(sample.size());
        for (int u : sample) {
            std::vector<int> row;
            for (int r : g.adj[static_cast<std::size_t>(u)])
                if (b_mask[static_cast<std::size_t>(r)]) row.push_back(r);
            sub_adj.push_back(std::move(row));
        }
        BipartiteGraph sub(want, g.right_size, std::move(sub_adj));
        if (max_bip_matching(sub).size != want) {
            std::string dump = "sampled A' fails to match into B'; A' =";
            for (int u : sample) dump += " " + std::to_string(u);
            dump += "; B' =";
            for (int r : core.b_prime) dump += " " + std::to_string(r);
            throw InvariantViolation(dump);
        }
    }
    return core;
}

}  // namespace detail

struct SaturateOrCore {
    bool saturated = false;
    BipMatching matching;  // on G minus the removed rights, when saturated
    Core24 core;           // otherwise
};

// The single-Y form the assembly pipeline uses: saturate the left side of
// G minus the given right set, or fall back to the core construction.
inline SaturateOrCore saturate_or_core(const BipartiteGraph& g, int q, const Rational& mu,
                                       const std::vector<int>& removed_right) {
    if (q <= 0) throw InvalidInput("q must be positive");
    auto mask = detail::right_mask_without(g.right_size, removed_right);
    BipMatching m = max_bip_matching(g, &mask);
    if (m.saturates_left()) return {true, std::move(m), {}};
    return {false, {}, detail::core_from_violation(g, q, mu, mask)};
}

// Robustness dichotomy. Hypotheses: |left| ≤ (1+μ)q and left degrees
// ≥ (1-μ)q. The universal Y-quantifier is narrowed to a concrete family:
// Y = ∅, then greedy adversarial deletions (each step removes the right
// vertex whose loss hurts the max matching most, ties to the smallest index)
// up to ⌊μq⌋ of them. Saturation across all tested Y returns the tested
// family as the witness; the first failure yields the core.
inline Dichotomy24 dichotomy_24(const BipartiteGraph& g, int q, const Rational& mu) {
    if (q <= 0) throw InvalidInput("q must be positive");
    if (mu < Rational(0) || mu > Rational(1, 50)) throw InvalidInput("mu must lie in [0, 1/50]");

    // (1+μ)q and (1-μ)q compared exactly: v·den vs q·(den±num).
    if (static_cast<long long>(g.left_size) * mu.den() > static_cast<long long>(q) * (mu.den() + mu.num()))
        throw HypothesisUnmet("left side larger than (1+mu)q");
    for (int u = 0; u < g.left_size; ++u)
        if (static_cast<long long>(g.left_degree(u)) * mu.den() < static_cast<long long>(q) * (mu.den() - mu.num()))
            throw HypothesisUnmet("left vertex " + std::to_string(u) + " has degree below (1-mu)q");

    long long cap = static_cast<long long>(q) * mu.num() / mu.den();  // ⌊μq⌋
    Dichotomy24 out;
    std::vector<int> removed;
    std::vector<char> mask(static_cast<std::size_t>(g.right_size), 1);
    while (true) {
        BipMatching m = max_bip_matching(g, &mask);
        if (!m.saturates_left()) {
            out.robust = false;
            out.core = detail::core_from_violation(g, q, mu, mask);
            return out;
        }
        out.witness.tested.emplace_back(removed, std::move(m));
        if (static_cast<long long>(removed.size()) >= cap) break;
        int best_r = -1;
        int best_size = -1;
        for (int r = 0; r < g.right_size; ++r) {
            if (!mask[static_cast<std::size_t>(r)]) continue;
            mask[static_cast<std::size_t>(r)] = 0;
            int s = max_bip_matching(g, &mask).size;
            mask[static_cast<std::size_t>(r)] = 1;
            if (best_r < 0 || s < best_size) {
                best_r = r;
                best_size = s;
            }
        }
        if (best_r < 0) break;  // no right vertices left to delete
        mask[static_cast<std::size_t>(best_r)] = 0;
        removed.push_back(best_r);
    }
    out.robust = true;
    return out;
}

}  // namespace kpm
