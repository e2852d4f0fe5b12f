#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "kpm/bipartite.hpp"
#include "kpm/core.hpp"
#include "kpm/errors.hpp"
#include "kpm/family.hpp"
#include "kpm/oracles.hpp"
#include "kpm/rational.hpp"

namespace kpm {

// guaranteed: hypotheses are checked up front and a failed construction step
// is a defect, reported as InvariantViolation with state attached.
// best_effort: threshold checks on class sizes (and colour counts where
// noted) are skipped and a failed step returns the best partial result.
enum class Mode { guaranteed, best_effort };

inline std::string to_string(Mode m) { return m == Mode::guaranteed ? "guaranteed" : "best_effort"; }

struct RainbowConfig {
    Mode mode = Mode::best_effort;
    OracleBudget budget{};
    std::optional<Rational> epsilon;  // stability slack; call sites choose the default
    std::optional<Rational> eta;      // default 1/(200k)
    std::optional<Rational> mu;       // default 1/50
    Rational pokrovskiy_capacity{1};  // best_effort class-size divisor for the induction entry check
    long long multiplicity_budget = 4'000'000;
};

inline Rational eta_default(int k) { return {1, 200ll * k}; }
inline Rational mu_default() { return {1, 50}; }

inline Rational config_eta(const RainbowConfig& cfg, int k) { return cfg.eta ? *cfg.eta : eta_default(k); }
inline Rational config_mu(const RainbowConfig& cfg) { return cfg.mu ? *cfg.mu : mu_default(); }

// value·den ≥ scale·(den + mult·num), i.e. value ≥ (1 + mult·r)·scale.
inline bool at_least_one_plus(long long value, const Rational& r, long long mult, long long scale) {
    return value * r.den() >= scale * (r.den() + mult * r.num());
}
inline bool at_most_one_plus(long long value, const Rational& r, long long mult, long long scale) {
    return value * r.den() <= scale * (r.den() + mult * r.num());
}
// value ≥ (1 − mult·r)·scale.
inline bool at_least_one_minus(long long value, const Rational& r, long long mult, long long scale) {
    return value * r.den() >= scale * (r.den() - mult * r.num());
}

inline int multiplicity(const Family& fam, const CrossingTuple& e) {
    if (e.k() != fam.k() || !e.is_full()) throw InvalidInput("multiplicity needs a full crossing tuple");
    for (int c = 0; c < fam.k(); ++c)
        if (e.at(c) < 0 || e.at(c) >= fam.position_bound(c)) throw InvalidInput("tuple position out of range");
    int count = 0;
    for (int j = 0; j < fam.size(); ++j) count += fam.member(j).has_edge(e);
    return count;
}

// Minimum multiplicity over every crossing tuple of the shared (alive) vertex
// set. Refuses instead of silently grinding when the tuple count exceeds the
// budget; callers with big instances must rely on a declared bound.
inline int min_multiplicity(const Family& fam, long long tuple_budget = 4'000'000) {
    long long total = fam.member(0).count_crossing_tuples(-1);
    if (total > tuple_budget)
        throw InvalidInput("multiplicity enumeration over " + std::to_string(total) +
                           " tuples exceeds the budget; declare a multiplicity bound instead");
    int best = fam.size();
    fam.member(0).for_each_crossing_tuple(-1, [&](const CrossingTuple& e) {
        if (best == 0) return;
        int count = 0;
        for (int j = 0; j < fam.size() && count < best; ++j) count += fam.member(j).has_edge(e);
        best = std::min(best, count);
    });
    return best;
}

struct MatchingSearch {
    enum class Status { found, not_found, unknown };
    Status status = Status::unknown;
    Matching matching;  // meaningful when found
};

// Decision form of maximum matching: greedy first, exact search as fallback.
// not_found is a certificate; unknown means the budget ran out first.
inline MatchingSearch matching_of_size_at_least(const KPartiteHypergraph& h, int target,
                                                const OracleBudget& budget = {}) {
    if (target <= 0) return {MatchingSearch::Status::found, {}};
    if (target > h.min_class_size()) return {MatchingSearch::Status::not_found, {}};
    Matching greedy = detail::greedy_matching(h);
    if (greedy.size() >= target) return {MatchingSearch::Status::found, std::move(greedy)};
    auto oracle = max_matching_exact(h, budget);
    if (oracle.size >= target) return {MatchingSearch::Status::found, std::move(oracle.witness)};
    if (oracle.exact) return {MatchingSearch::Status::not_found, {}};
    return {MatchingSearch::Status::unknown, {}};
}

namespace detail {

inline long long ipow(long long base, int exp) {
    long long v = 1;
    for (int i = 0; i < exp; ++i) v *= base;
    return v;
}

inline bool dominates(const KPartiteHypergraph& h, const std::vector<VertexRef>& set) {
    VertexMask mask(h.position_bounds());
    for (auto v : set) mask.add(v);
    for (const auto& e : h.edges())
        if (!mask.intersects(e)) return false;
    return true;
}

// Vertex set of a lex-greedy maximal matching, then a single forward deletion
// pass keeping the set dominating. Deterministic and usually close to minimal.
inline std::vector<VertexRef> small_dominating_set(const KPartiteHypergraph& h) {
    std::vector<VertexRef> set = greedy_matching(h).vertex_set();
    std::size_t i = 0;
    while (i < set.size()) {
        std::vector<VertexRef> without = set;
        without.erase(without.begin() + static_cast<std::ptrdiff_t>(i));
        if (dominates(h, without)) {
            set = std::move(without);
        } else {
            ++i;
        }
    }
    return set;
}

}  // namespace detail

// The high-degree part of a dominating set: vertices covering at least half
// of all possible completions. In guaranteed mode the size thresholds are
// verified and the outcome is certified to keep at least (1-2μ)Q of D.
inline std::vector<VertexRef> high_degree_core(const KPartiteHypergraph& h, const std::vector<VertexRef>& dom,
                                               const DegreeProfile& profile, const Rational& mu,
                                               Mode mode = Mode::best_effort) {
    if (!detail::dominates(h, dom)) throw InvalidInput("the given set does not dominate the graph");
    long long total = profile.total();
    long long n = h.max_class_size();
    if (mode == Mode::guaranteed) {
        if (!at_least_one_plus(n, mu, 1, 5 * total)) throw HypothesisUnmet("class size below 5(1+mu)Q");
        if (!at_most_one_plus(static_cast<long long>(dom.size()), mu, 1, total))
            throw HypothesisUnmet("dominating set larger than (1+mu)Q");
    }
    long long threshold = detail::ipow(n, h.k() - 1);  // degree ≥ threshold/2, kept exact via doubling
    std::vector<VertexRef> core;
    for (auto v : dom) {
        if (!h.alive(v)) throw InvalidInput("dominating set uses a missing vertex");
        if (2 * h.vertex_degree(v) >= threshold) core.push_back(v);
    }
    std::sort(core.begin(), core.end());
    if (mode == Mode::guaranteed &&
        !(static_cast<long long>(core.size()) * mu.den() >= total * (mu.den() - 2 * mu.num()))) {
        throw InvariantViolation("high-degree core kept only " + std::to_string(core.size()) + " of " +
                                 std::to_string(dom.size()) + " vertices, below (1-2mu)Q with Q = " +
                                 std::to_string(total));
    }
    return core;
}

struct RainbowRunResult {
    RainbowMatching matching;
    int target = 0;
    bool reached_target = false;
    std::vector<int> missing_colours;  // requested colours the matching lacks
    std::string note;
};

namespace detail {

// One pass of colour-ascending, edge-lex greedy extension. Afterwards no
// unused colour has an edge disjoint from the matching, i.e. the rainbow
// matching is maximal.
inline void greedy_extend(const Family& fam, RainbowMatching& m, VertexMask& used) {
    for (int j = 0; j < fam.size(); ++j) {
        if (m.has_colour(fam.label(j))) continue;
        for (const auto& e : fam.member(j).edges()) {
            if (!used.intersects(e)) {
                m.add(fam.label(j), e);
                used.add_tuple(e);
                break;
            }
        }
    }
}

inline std::string dump_rainbow(const RainbowMatching& m) {
    std::string s;
    for (const auto& r : m.edges) s += " " + std::to_string(r.colour) + ":" + r.edge.str();
    return s.empty() ? " (empty)" : s;
}

}  // namespace detail

// Grows a rainbow matching to size m+Q, then exchanges edges until every
// requested colour is represented. The growth step mirrors the counting
// argument: below the target, either a fresh tuple extends the matching
// directly, or a one-for-one swap through an unused colour applies, or some
// matching edge is hit by two of the reserved class-avoiding tuples and a
// two-for-one swap applies.
inline RainbowRunResult almost_perfect_rainbow(const Family& fam, const DegreeProfile& profile, int m,
                                               const std::vector<int>& colours_required,
                                               const RainbowConfig& cfg = {}) {
    if (profile.k() != fam.k()) throw InvalidInput("profile arity must match the family");
    if (m < 0) throw InvalidInput("multiplicity bound must be non-negative");
    const int t = fam.size();
    const int total = profile.total();
    const int target = m + total;

    std::vector<int> required = colours_required;
    std::sort(required.begin(), required.end());
    required.erase(std::unique(required.begin(), required.end()), required.end());
    for (int c : required)
        if (fam.index_of(c) < 0) throw InvalidInput("required colour " + std::to_string(c) + " is not in the family");

    for (int j = 0; j < t; ++j) {
        int bad = first_class_below_profile(fam.member(j), profile);
        if (bad >= 0)
            throw HypothesisUnmet("member " + std::to_string(fam.label(j)) + " has codegree into class " +
                                  std::to_string(bad) + " below the profile");
    }
    if (m > 0) {
        if (fam.declared_m) {
            if (*fam.declared_m < m) throw HypothesisUnmet("declared multiplicity below m");
        } else if (min_multiplicity(fam, cfg.multiplicity_budget) < m) {
            throw HypothesisUnmet("family multiplicity below m");
        }
    }
    if (cfg.mode == Mode::guaranteed) {
        if (fam.min_class_size() < target + fam.k() - 1) throw HypothesisUnmet("class sizes below m+Q+k-1");
        if (t < target + fam.k() - 1) throw HypothesisUnmet("fewer than m+Q+k-1 colours");
        if (static_cast<long long>(required.size()) * fam.k() > total)
            throw HypothesisUnmet("more than Q/k required colours");
    }

    const int k = fam.k();
    RainbowRunResult out;
    out.target = target;
    RainbowMatching M;
    VertexMask used(fam.position_bounds());
    detail::greedy_extend(fam, M, used);

    auto fail_step = [&](const std::string& what) -> bool {
        if (cfg.mode == Mode::guaranteed)
            throw InvariantViolation(what + "; matching:" + detail::dump_rainbow(M));
        out.note = what;
        return false;  // caller stops growing
    };

    long long guard = static_cast<long long>(target + 1) * (t + 1) + 8;
    while (M.size() < target) {
        if (--guard < 0) throw InvariantViolation("augmentation failed to make progress");
        detail::greedy_extend(fam, M, used);
        if (M.size() >= target) break;

        std::vector<int> unused;  // member indices, ascending
        for (int j = 0; j < t; ++j)
            if (!M.has_colour(fam.label(j))) unused.push_back(j);

        // Reserved tuples: one per class to avoid, pairwise disjoint, clear of
        // the matching; then a full tuple clear of everything.
        std::vector<CrossingTuple> reserved;
        VertexMask sel = used;
        bool ok = true;
        for (int i = 0; i < k && ok; ++i) {
            auto ti = smallest_free_tuple(fam.member(0), i, sel);
            if (!ti) {
                ok = fail_step("no class-" + std::to_string(i) + " avoiding tuple is available");
                break;
            }
            reserved.push_back(*ti);
            sel.add_tuple(*ti);
        }
        if (!ok) break;
        auto f_opt = smallest_free_tuple(fam.member(0), -1, sel);
        if (!f_opt) {
            fail_step("no free full tuple is available");
            break;
        }
        CrossingTuple f = *f_opt;

        std::vector<char> in_f(static_cast<std::size_t>(t), 0);  // colours that accept f
        for (int j = 0; j < t; ++j) in_f[static_cast<std::size_t>(j)] = fam.member(j).has_edge(f);

        bool advanced = false;

        // Unused colour accepting f: maximality should prevent this, but the
        // matching has just been rebuilt by swaps, so take the free win.
        for (int j : unused) {
            if (in_f[static_cast<std::size_t>(j)]) {
                M.add(fam.label(j), f);
                used.add_tuple(f);
                advanced = true;
                break;
            }
        }
        if (advanced) continue;

        // One-for-one: a reserved tuple completes to an edge of an unused
        // colour at a vertex whose matching edge can be recoloured onto f.
        for (int i = 0; i < k && !advanced; ++i) {
            for (int j : unused) {
                if (advanced) break;
                for (int pos : fam.member(j).neighbourhood(reserved[static_cast<std::size_t>(i)])) {
                    VertexRef v{i, pos};
                    CrossingTuple cand = reserved[static_cast<std::size_t>(i)].with(v);
                    if (!M.covers(v)) {
                        M.add(fam.label(j), cand);
                        used.add_tuple(cand);
                        advanced = true;
                        break;
                    }
                    auto hit = M.edge_through(v);
                    int hit_idx = fam.index_of(hit->colour);
                    if (in_f[static_cast<std::size_t>(hit_idx)]) {
                        M.remove_colour(hit->colour);
                        used.remove_tuple(hit->edge);
                        M.add(hit->colour, f);
                        used.add_tuple(f);
                        M.add(fam.label(j), cand);
                        used.add_tuple(cand);
                        advanced = true;
                        break;
                    }
                }
            }
        }
        if (advanced) continue;

        // Two-for-one: drop an edge hit by two reserved tuples, add both
        // completions in two distinct unused colours.
        if (static_cast<int>(unused.size()) < k) {
            fail_step("fewer unused colours than classes");
            break;
        }
        for (const auto& r : M.edges) {
            int idx = fam.index_of(r.colour);
            if (in_f[static_cast<std::size_t>(idx)]) continue;  // only edges whose colour rejects f
            std::vector<int> hits;
            for (int i = 0; i < k; ++i) {
                CrossingTuple cand = reserved[static_cast<std::size_t>(i)].with({i, r.edge.at(i)});
                if (fam.member(static_cast<std::size_t>(unused[static_cast<std::size_t>(i)])).has_edge(cand))
                    hits.push_back(i);
            }
            if (hits.size() >= 2) {
                int i = hits[0], i2 = hits[1];
                CrossingTuple e1 = reserved[static_cast<std::size_t>(i)].with({i, r.edge.at(i)});
                CrossingTuple e2 = reserved[static_cast<std::size_t>(i2)].with({i2, r.edge.at(i2)});
                M.remove_colour(r.colour);
                used.remove_tuple(r.edge);
                M.add(fam.label(unused[static_cast<std::size_t>(i)]), e1);
                used.add_tuple(e1);
                M.add(fam.label(unused[static_cast<std::size_t>(i2)]), e2);
                used.add_tuple(e2);
                advanced = true;
                break;
            }
        }
        if (advanced) continue;

        fail_step("no augmenting exchange exists below the target");
        break;
    }

    // Colour exchange: swap requested-but-absent colours in, one at a time,
    // through the class with the largest profile entry.
    if (M.size() >= target) {
        long long exchange_guard = static_cast<long long>(required.size()) + 1;
        while (true) {
            int want = -1;
            for (int c : required) {
                if (!M.has_colour(c)) {
                    want = c;
                    break;
                }
            }
            if (want < 0) break;
            if (--exchange_guard < 0) throw InvariantViolation("colour exchange failed to make progress");
            int istar = profile.argmax();
            VertexMask mask(fam.position_bounds());
            for (const auto& r : M.edges) mask.add_tuple(r.edge);
            auto f_opt = smallest_free_tuple(fam.member(0), istar, mask);
            if (!f_opt) {
                fail_step("no free tuple for the colour exchange");
                break;
            }
            int member = fam.index_of(want);
            bool swapped = false;
            for (int pos : fam.member(member).neighbourhood(*f_opt)) {
                VertexRef v{istar, pos};
                CrossingTuple e = f_opt->with(v);
                std::optional<RainbowEdge> evict;
                if (!M.covers(v)) {
                    // Evict the smallest colour outside the requested set.
                    for (const auto& r : M.edges) {
                        if (!std::binary_search(required.begin(), required.end(), r.colour)) {
                            evict = r;
                            break;
                        }
                    }
                } else {
                    auto hit = M.edge_through(v);
                    if (std::binary_search(required.begin(), required.end(), hit->colour)) continue;
                    evict = hit;
                }
                if (!evict) continue;
                M.remove_colour(evict->colour);
                M.add(want, e);
                swapped = true;
                break;
            }
            if (!swapped) {
                fail_step("colour " + std::to_string(want) + " cannot be exchanged in");
                break;
            }
        }
    }

    // The contract is exactly m+Q edges; greedy growth can overshoot, so drop
    // the highest colours outside the requested set back down to the target.
    if (M.size() > target) {
        std::vector<int> droppable;
        for (const auto& r : M.edges)
            if (!std::binary_search(required.begin(), required.end(), r.colour)) droppable.push_back(r.colour);
        while (M.size() > target && !droppable.empty()) {
            M.remove_colour(droppable.back());
            droppable.pop_back();
        }
    }

    out.matching = M;
    out.reached_target = M.size() >= target;
    for (int c : required)
        if (!M.has_colour(c)) out.missing_colours.push_back(c);
    if (cfg.mode == Mode::guaranteed && (!out.reached_target || !out.missing_colours.empty()))
        throw InvariantViolation("guaranteed run ended below target; matching:" + detail::dump_rainbow(M));
    auto check = validate_rainbow(fam, out.matching);
    if (!check.ok) throw InvariantViolation("rainbow matching invalid: " + check.violation);
    return out;
}

struct DominatedColour {
    int colour = 0;
    std::vector<VertexRef> dom_set;
    bool certified = true;  // false when an exhausted search stood in for a proof
};

struct StabilityOutcome {
    enum class Kind { perfect_rainbow, dominated_colours, inconclusive };
    Kind kind = Kind::inconclusive;
    RainbowMatching rainbow;                  // perfect_rainbow
    std::vector<DominatedColour> dominated;   // dominated_colours
    std::string note;
};

// Either a perfect rainbow matching, or most colours own a small dominating
// set. The constructive branch makes one reverse pass, reserving for each
// colour a large matching, a high-degree vertex, or an edge, and one forward
// pass assembling the matching; the dominated branch tests each colour
// directly with a minimalized greedy dominating set and an exact search as
// the backstop.
inline StabilityOutcome rainbow_or_dominating(const Family& fam, const DegreeProfile& profile,
                                              const Rational& epsilon, const RainbowConfig& cfg = {}) {
    if (profile.k() != fam.k()) throw InvalidInput("profile arity must match the family");
    if (!epsilon.is_positive() || epsilon >= Rational(1)) throw InvalidInput("epsilon must lie in (0,1)");
    const int t = fam.size();
    const int k = fam.k();
    const long long total = profile.total();

    for (int j = 0; j < t; ++j) {
        int bad = first_class_below_profile(fam.member(j), profile);
        if (bad >= 0)
            throw HypothesisUnmet("member " + std::to_string(fam.label(j)) + " has codegree into class " +
                                  std::to_string(bad) + " below the profile");
    }
    if (cfg.mode == Mode::guaranteed) {
        if (!at_most_one_plus(t, epsilon, 1, total)) throw HypothesisUnmet("more than (1+eps)Q colours");
        // n ≥ 8k³Q/eps, as integers: n·num ≥ 8k³Q·den.
        if (static_cast<long long>(fam.min_class_size()) * epsilon.num() <
            8ll * k * k * k * total * epsilon.den())
            throw HypothesisUnmet("class size below 8k^3*Q/eps");
    }

    const long long nmax = fam.max_class_size();
    const long long deg_unit = detail::ipow(nmax, k - 2);
    bool uncertain = false;
    std::string notes;

    // Reverse pass. One record per colour, processed t..1.
    struct Step {
        int kind = -1;  // 0 big matching, 1 high-degree vertex, 2 reserved edge
        VertexRef vertex;
        CrossingTuple edge;
    };
    std::vector<Step> steps(static_cast<std::size_t>(t));
    std::vector<VertexRef> removed;
    bool constructive = true;
    for (int j = t; j >= 1 && constructive; --j) {
        KPartiteHypergraph hj = fam.member(j - 1).induced(removed);
        auto found = matching_of_size_at_least(hj, k * j, cfg.budget);
        if (found.status == MatchingSearch::Status::unknown) {
            uncertain = true;
            notes += "matching size " + std::to_string(k * j) + " undecided for colour " +
                     std::to_string(fam.label(j - 1)) + "; ";
        }
        if (found.status == MatchingSearch::Status::found) {
            steps[static_cast<std::size_t>(j - 1)].kind = 0;
            continue;
        }
        long long need = static_cast<long long>(k) * j * deg_unit;
        VertexRef hit{-1, -1};
        for (int c = 0; c < k && hit.cls < 0; ++c)
            for (int p : hj.alive_positions(c)) {
                if (hj.vertex_degree({c, p}) >= need) {
                    hit = {c, p};
                    break;
                }
            }
        if (hit.cls >= 0) {
            steps[static_cast<std::size_t>(j - 1)] = {1, hit, {}};
            removed.push_back(hit);
            continue;
        }
        if (!hj.edges().empty()) {
            const CrossingTuple& e = hj.edges().front();
            steps[static_cast<std::size_t>(j - 1)] = {2, {}, e};
            for (auto v : e.vertices()) removed.push_back(v);
            continue;
        }
        constructive = false;  // colour j has nothing usable; its complement dominates
    }

    RainbowMatching M;
    if (constructive) {
        // Forward pass. For reserved edges the reverse pass already removed
        // their vertices from every later colour's graph, so disjointness is
        // structural; the other two cases pick the smallest compatible edge.
        bool okay = true;
        std::vector<VertexRef> removed_ahead;  // vertices reserved by colours > j
        std::vector<std::vector<VertexRef>> removed_at(static_cast<std::size_t>(t));
        for (int j = t; j >= 1; --j) {
            const Step& st = steps[static_cast<std::size_t>(j - 1)];
            if (st.kind == 1) removed_at[static_cast<std::size_t>(j - 1)] = {st.vertex};
            if (st.kind == 2) removed_at[static_cast<std::size_t>(j - 1)] = st.edge.vertices();
        }
        VertexMask used(fam.position_bounds());
        for (int j = 1; j <= t && okay; ++j) {
            // Rebuild this colour's allowed vertex set: everything reserved by
            // colours strictly above j is out of bounds, except its own step.
            removed_ahead.clear();
            for (int jj = j + 1; jj <= t; ++jj)
                for (auto v : removed_at[static_cast<std::size_t>(jj - 1)]) removed_ahead.push_back(v);
            KPartiteHypergraph hj = fam.member(j - 1).induced(removed_ahead);
            const Step& st = steps[static_cast<std::size_t>(j - 1)];
            if (st.kind == 2) {
                if (used.intersects(st.edge)) {
                    okay = false;
                    break;
                }
                M.add(fam.label(j - 1), st.edge);
                used.add_tuple(st.edge);
                continue;
            }
            bool placed = false;
            for (const auto& e : hj.edges()) {
                if (!used.intersects(e)) {
                    M.add(fam.label(j - 1), e);
                    used.add_tuple(e);
                    placed = true;
                    break;
                }
            }
            okay = placed;
        }
        if (okay && M.size() == t) {
            auto check = validate_rainbow(fam, M);
            if (!check.ok) throw InvariantViolation("assembled rainbow invalid: " + check.violation);
            StabilityOutcome out;
            out.kind = StabilityOutcome::Kind::perfect_rainbow;
            out.rainbow = std::move(M);
            out.note = notes;
            return out;
        }
        if (cfg.mode == Mode::guaranteed && !uncertain)
            throw InvariantViolation("forward assembly failed despite a complete reverse pass; partial:" +
                                     detail::dump_rainbow(M));
        notes += "constructive assembly fell short; ";
    }

    // Dominated branch: per colour, a small dominating set or a certificate
    // that none exists under the size cap.
    // Cap ⌊(1+2k·eps)·Q⌋ in exact arithmetic.
    long long cap = total * (epsilon.den() + 2 * k * epsilon.num()) / epsilon.den();
    std::vector<DominatedColour> dominated;
    for (int j = 0; j < t; ++j) {
        const auto& hj = fam.member(j);
        if (hj.edges().empty()) {
            dominated.push_back({fam.label(j), {}, true});
            continue;
        }
        auto greedy_set = detail::small_dominating_set(hj);
        if (static_cast<long long>(greedy_set.size()) <= cap) {
            dominated.push_back({fam.label(j), std::move(greedy_set), true});
            continue;
        }
        auto exact = min_dominating_set_exact(hj, static_cast<int>(cap), cfg.budget);
        if (exact.kind == DominatingSetResult::Kind::found) {
            dominated.push_back({fam.label(j), std::move(exact.witness), true});
        } else if (exact.kind == DominatingSetResult::Kind::unknown) {
            uncertain = true;
            notes += "dominating set undecided for colour " + std::to_string(fam.label(j)) + "; ";
        }
    }
    for (const auto& d : dominated) {
        if (!detail::dominates(fam.member(fam.index_of(d.colour)), d.dom_set))
            throw InvariantViolation("claimed dominating set fails for colour " + std::to_string(d.colour));
    }
    // |C| ≥ (1-eps)·Q.
    if (at_least_one_minus(static_cast<long long>(dominated.size()), epsilon, 1, total)) {
        StabilityOutcome out;
        out.kind = StabilityOutcome::Kind::dominated_colours;
        out.dominated = std::move(dominated);
        out.note = notes;
        return out;
    }
    if (cfg.mode == Mode::guaranteed && !uncertain)
        throw InvariantViolation("neither a perfect rainbow nor enough dominated colours; dominated count " +
                                 std::to_string(dominated.size()));
    StabilityOutcome out;
    out.kind = StabilityOutcome::Kind::inconclusive;
    out.note = notes + "dominated colours " + std::to_string(dominated.size()) + " below (1-eps)Q";
    return out;
}

namespace detail {

inline std::vector<int> flatten_offsets(const std::vector<int>& bounds) {
    std::vector<int> off(bounds.size() + 1, 0);
    for (std::size_t i = 0; i < bounds.size(); ++i) off[i + 1] = off[i] + bounds[i];
    return off;
}

}  // namespace detail

// Rainbow matching of size m+Q when the colour count barely exceeds Q.
// Two regimes: with ⌊Q/2⌋ ≥ k-1 the stability dichotomy either hands over a
// perfect rainbow or dominating sets whose high-degree cores feed an
// auxiliary colour/vertex bipartite graph; saturation there lets a set-aside
// matching on the leftover colours be completed greedily, and a saturation
// failure yields a highly-matchable core Z that is first excluded, then
// matched back edge by edge. With ⌊Q/2⌋ < k-1 the dominating sets themselves
// steer a direct greedy construction.
inline RainbowRunResult rainbow_m_plus_q(const Family& fam, const DegreeProfile& profile, int m,
                                         const RainbowConfig& cfg = {}) {
    if (profile.k() != fam.k()) throw InvalidInput("profile arity must match the family");
    if (m < 0) throw InvalidInput("multiplicity bound must be non-negative");
    const int t = fam.size();
    const int k = fam.k();
    const int total = profile.total();
    const int target = m + total;
    const Rational eta = config_eta(cfg, k);
    const Rational mu = config_mu(cfg);

    // The colour-count window holds in both modes; only the class-size floor
    // is a large-n threshold.
    if (t < target) throw HypothesisUnmet("fewer colours than m+Q");
    if (!at_most_one_plus(t, eta, 1, total)) throw HypothesisUnmet("more than (1+eta)Q colours");
    if (cfg.mode == Mode::guaranteed) {
        long long k4 = detail::ipow(k, 4);
        long long k6 = detail::ipow(k, 6);
        long long floor_n = std::max(1600 * k4 * total, 100 * k6);
        if (fam.min_class_size() < floor_n) throw HypothesisUnmet("class size below max(1600k^4 Q, 100k^6)");
    }
    for (int j = 0; j < t; ++j) {
        int bad = first_class_below_profile(fam.member(j), profile);
        if (bad >= 0)
            throw HypothesisUnmet("member " + std::to_string(fam.label(j)) + " has codegree into class " +
                                  std::to_string(bad) + " below the profile");
    }

    RainbowRunResult out;
    out.target = target;

    auto finish = [&](RainbowMatching M, std::string note) {
        // Trim to the lowest-coloured target edges; extra colours are a bonus
        // the contract does not ask for.
        while (M.size() > target) M.edges.pop_back();
        auto check = validate_rainbow(fam, M);
        if (!check.ok) throw InvariantViolation("rainbow matching invalid: " + check.violation);
        out.matching = std::move(M);
        out.reached_target = out.matching.size() >= target;
        out.note = std::move(note);
        if (cfg.mode == Mode::guaranteed && !out.reached_target)
            throw InvariantViolation("guaranteed run ended below target; " + out.note);
        return out;
    };
    auto give_up = [&](RainbowMatching M, const std::string& why) {
        if (cfg.mode == Mode::guaranteed)
            throw InvariantViolation(why + "; matching:" + detail::dump_rainbow(M));
        out.matching = std::move(M);
        out.reached_target = out.matching.size() >= target;
        out.note = why;
        return out;
    };

    if (total / 2 >= k - 1) {
        auto stab = rainbow_or_dominating(fam, profile, eta, cfg);
        if (stab.kind == StabilityOutcome::Kind::perfect_rainbow)
            return finish(std::move(stab.rainbow), "perfect rainbow from the stability pass");
        if (stab.kind == StabilityOutcome::Kind::inconclusive)
            return give_up({}, "stability pass inconclusive: " + stab.note);

        // Dominated colours A, their high-degree cores, and the auxiliary
        // bipartite graph on A × V.
        Rational mu_core(2ll * k * eta.num(), eta.den());  // dominating sets are (1+2k·eta)Q large
        std::vector<int> a_members;
        for (const auto& d : stab.dominated) a_members.push_back(fam.index_of(d.colour));
        std::sort(a_members.begin(), a_members.end());

        const auto& bounds = fam.position_bounds();
        auto offsets = detail::flatten_offsets(bounds);
        int v_total = offsets.back();
        long long nmax = fam.max_class_size();
        long long deg_half = detail::ipow(nmax, k - 1);  // compare 2·deg against this

        std::vector<std::vector<int>> adj;
        adj.reserve(a_members.size());
        for (std::size_t row = 0; row < a_members.size(); ++row) {
            const auto& hj = fam.member(a_members[row]);
            std::vector<int> line;
            for (int c = 0; c < k; ++c)
                for (int p : hj.alive_positions(c))
                    if (2 * hj.vertex_degree({c, p}) >= deg_half) line.push_back(offsets[static_cast<std::size_t>(c)] + p);
            adj.push_back(std::move(line));
        }
        BipartiteGraph G(static_cast<int>(a_members.size()), v_total, std::move(adj));

        // Cores certify the left degrees the saturation argument needs.
        for (const auto& d : stab.dominated)
            high_degree_core(fam.member(fam.index_of(d.colour)), d.dom_set, profile, mu_core, cfg.mode);

        // Set-aside rainbow on the colours outside A, kept clear of class
        // i*, which has enough slack to absorb all their completions.
        int istar = profile.argmax();
        std::vector<int> outside;
        for (int j = 0; j < t; ++j)
            if (!std::binary_search(a_members.begin(), a_members.end(), j)) outside.push_back(j);
        if (cfg.mode == Mode::guaranteed && static_cast<int>(outside.size()) > profile.at(istar))
            throw InvariantViolation("set-aside needs " + std::to_string(outside.size()) +
                                     " completions but the largest profile entry is " +
                                     std::to_string(profile.at(istar)));
        RainbowMatching set_aside;
        VertexMask used(bounds);
        for (int j : outside) {
            auto f = smallest_free_tuple(fam.member(j), istar, used);
            bool placed = false;
            if (f) {
                for (int pos : fam.member(j).neighbourhood(*f)) {
                    if (!used.test({istar, pos})) {
                        CrossingTuple e = f->with({istar, pos});
                        set_aside.add(fam.label(j), e);
                        used.add_tuple(e);
                        placed = true;
                        break;
                    }
                }
            }
            if (!placed) return give_up(std::move(set_aside), "set-aside colour " + std::to_string(fam.label(j)) +
                                                                  " has no free completion");
        }

        std::vector<int> y_flat;
        for (auto v : set_aside.vertex_set()) y_flat.push_back(offsets[static_cast<std::size_t>(v.cls)] + v.pos);
        SaturateOrCore split;
        try {
            split = saturate_or_core(G, total, mu, y_flat);
        } catch (const HypothesisUnmet& e) {
            // The auxiliary graph misses the degree floor only when the core
            // certification above was too weak, which the entry checks rule
            // out in guaranteed mode.
            if (cfg.mode == Mode::guaranteed)
                throw InvariantViolation(std::string("auxiliary graph rejected: ") + e.what());
            return give_up(std::move(set_aside), std::string("auxiliary graph rejected: ") + e.what());
        }

        if (split.saturated) {
            // Each colour of A gets its matched vertex, then a completing
            // edge from the full graph, all pairwise disjoint and clear of
            // the other matched vertices.
            RainbowMatching M = set_aside;
            VertexMask used2(bounds);
            for (const auto& r : M.edges) used2.add_tuple(r.edge);
            std::vector<char> is_anchor(static_cast<std::size_t>(v_total), 0);
            for (std::size_t row = 0; row < a_members.size(); ++row)
                is_anchor[static_cast<std::size_t>(split.matching.left_to_right[row])] = 1;
            for (std::size_t row = 0; row < a_members.size(); ++row) {
                int member = a_members[row];
                int flat = split.matching.left_to_right[row];
                int cls = 0;
                while (offsets[static_cast<std::size_t>(cls + 1)] <= flat) ++cls;
                VertexRef x{cls, flat - offsets[static_cast<std::size_t>(cls)]};
                bool placed = false;
                for (const auto& e : fam.member(member).edges()) {
                    if (!e.contains(x) || used2.intersects(e)) continue;
                    bool clean = true;
                    for (auto v : e.vertices()) {
                        int vf = offsets[static_cast<std::size_t>(v.cls)] + v.pos;
                        if (vf != flat && is_anchor[static_cast<std::size_t>(vf)]) {
                            clean = false;
                            break;
                        }
                    }
                    if (!clean) continue;
                    M.add(fam.label(member), e);
                    used2.add_tuple(e);
                    placed = true;
                    break;
                }
                if (!placed)
                    return give_up(std::move(M), "no completing edge for colour " +
                                                     std::to_string(fam.label(member)) + " at its matched vertex");
            }
            return finish(std::move(M), "saturated auxiliary graph, greedy completion");
        }

        // Core branch: exclude Z, rebuild the profile on the rest, run the
        // colour-controlled engine, then match the unused colours into Z.
        const auto& core = split.core;
        int s = static_cast<int>(core.b_prime.size());
        std::vector<VertexRef> z_refs;
        std::vector<int> z_count(static_cast<std::size_t>(k), 0);
        for (int flat : core.b_prime) {
            int cls = 0;
            while (offsets[static_cast<std::size_t>(cls + 1)] <= flat) ++cls;
            VertexRef v{cls, flat - offsets[static_cast<std::size_t>(cls)]};
            z_refs.push_back(v);
            ++z_count[static_cast<std::size_t>(v.cls)];
        }
        Family restricted = fam.induced(z_refs);

        // a'_i = a_i - |Z ∩ V_i|, floored at zero with the deficit taken from
        // other classes so the total stays Q - s.
        std::vector<int> a2(static_cast<std::size_t>(k));
        int deficit = 0;
        for (int c = 0; c < k; ++c) {
            int v = profile.at(c) - z_count[static_cast<std::size_t>(c)];
            if (v < 0) {
                deficit += -v;
                v = 0;
            }
            a2[static_cast<std::size_t>(c)] = v;
        }
        for (int c = 0; c < k && deficit > 0; ++c) {
            int take = std::min(a2[static_cast<std::size_t>(c)], deficit);
            a2[static_cast<std::size_t>(c)] -= take;
            deficit -= take;
        }
        DegreeProfile prof2(a2);
        if (prof2.total() != total - s)
            throw InvariantViolation("restricted profile total " + std::to_string(prof2.total()) +
                                     " does not equal Q-s = " + std::to_string(total - s));

        // Colours that must appear: everything outside the violator X.
        std::vector<char> in_x_row(a_members.size(), 0);
        for (int row : core.x) in_x_row[static_cast<std::size_t>(row)] = 1;
        std::vector<int> required;
        for (int j = 0; j < t; ++j) {
            auto it = std::lower_bound(a_members.begin(), a_members.end(), j);
            bool in_x = it != a_members.end() && *it == j &&
                        in_x_row[static_cast<std::size_t>(it - a_members.begin())];
            if (!in_x) required.push_back(fam.label(j));
        }

        RainbowRunResult inner;
        try {
            inner = almost_perfect_rainbow(restricted, prof2, m, required, cfg);
        } catch (const HypothesisUnmet& e) {
            if (cfg.mode == Mode::guaranteed)
                throw InvariantViolation(std::string("restricted engine rejected its input: ") + e.what());
            return give_up({}, std::string("restricted engine rejected its input: ") + e.what());
        }
        if (!inner.reached_target || !inner.missing_colours.empty())
            return give_up(std::move(inner.matching), "restricted engine fell short: " + inner.note);
        RainbowMatching M = inner.matching;

        // Unused colours all lie inside X; the first s of them match
        // perfectly into Z by the core guarantee.
        std::vector<int> unused_rows;
        for (std::size_t row = 0; row < a_members.size(); ++row)
            if (!M.has_colour(fam.label(a_members[row]))) unused_rows.push_back(static_cast<int>(row));
        for (int j = 0; j < t; ++j) {
            bool row_known = std::binary_search(a_members.begin(), a_members.end(), j);
            if (!row_known && !M.has_colour(fam.label(j)))
                return give_up(std::move(M), "colour " + std::to_string(fam.label(j)) +
                                                 " is unused yet outside the auxiliary left class");
        }
        for (int row : unused_rows)
            if (!in_x_row[static_cast<std::size_t>(row)])
                throw InvariantViolation("unused colour escaped the violator set");
        if (static_cast<int>(unused_rows.size()) < s)
            return give_up(std::move(M), "fewer unused colours than core size");
        unused_rows.resize(static_cast<std::size_t>(s));

        std::vector<char> z_mask(static_cast<std::size_t>(v_total), 0);
        for (int flat : core.b_prime) z_mask[static_cast<std::size_t>(flat)] = 1;
        std::vector<std::vector<int>> sub_adj;
        for (int row : unused_rows) {
            std::vector<int> line;
            for (int flat : G.adj[static_cast<std::size_t>(row)])
                if (z_mask[static_cast<std::size_t>(flat)]) line.push_back(flat);
            sub_adj.push_back(std::move(line));
        }
        BipartiteGraph sub(s, v_total, std::move(sub_adj));
        BipMatching mg = max_bip_matching(sub);
        if (mg.size != s)
            return give_up(std::move(M), "core matching into Z fell short at " + std::to_string(mg.size) + " of " +
                                             std::to_string(s));

        if (M.size() + s != target)
            throw InvariantViolation("size accounting broken: " + std::to_string(M.size()) + " + " +
                                     std::to_string(s) + " != " + std::to_string(target));

        // Extend through Z, drawing edges from the unrestricted graphs.
        VertexMask used3(bounds);
        for (const auto& r : M.edges) used3.add_tuple(r.edge);
        std::vector<char> is_anchor(static_cast<std::size_t>(v_total), 0);
        for (int i = 0; i < s; ++i) is_anchor[static_cast<std::size_t>(mg.left_to_right[i])] = 1;
        for (int i = 0; i < s; ++i) {
            int member = a_members[static_cast<std::size_t>(unused_rows[static_cast<std::size_t>(i)])];
            int flat = mg.left_to_right[i];
            int cls = 0;
            while (offsets[static_cast<std::size_t>(cls + 1)] <= flat) ++cls;
            VertexRef x{cls, flat - offsets[static_cast<std::size_t>(cls)]};
            bool placed = false;
            for (const auto& e : fam.member(member).edges()) {
                if (!e.contains(x) || used3.intersects(e)) continue;
                bool clean = true;
                for (auto v : e.vertices()) {
                    int vf = offsets[static_cast<std::size_t>(v.cls)] + v.pos;
                    if (vf != flat && is_anchor[static_cast<std::size_t>(vf)]) {
                        clean = false;
                        break;
                    }
                }
                if (!clean) continue;
                M.add(fam.label(member), e);
                used3.add_tuple(e);
                placed = true;
                break;
            }
            if (!placed)
                return give_up(std::move(M), "no completing edge into the core for colour " +
                                                 std::to_string(fam.label(member)));
        }
        return finish(std::move(M), "core exclusion plus matched completion");
    }

    // Small-Q regime: the window forces m = 0 and t = Q; dominating sets for
    // every colour steer a direct greedy build where each edge takes at most
    // one vertex from the union of those sets.
    if (m != 0 || t != total) {
        if (cfg.mode == Mode::guaranteed)
            throw InvariantViolation("small-Q regime reached with m > 0 or t != Q despite the window check");
        return give_up({}, "small-Q regime needs m = 0 and t = Q");
    }
    Rational eps(1, 3ll * k * std::max(total, 1));
    auto stab = rainbow_or_dominating(fam, profile, eps, cfg);
    if (stab.kind == StabilityOutcome::Kind::perfect_rainbow)
        return finish(std::move(stab.rainbow), "perfect rainbow from the stability pass");
    if (stab.kind == StabilityOutcome::Kind::inconclusive)
        return give_up({}, "stability pass inconclusive: " + stab.note);
    if (static_cast<int>(stab.dominated.size()) != t) {
        if (cfg.mode == Mode::guaranteed)
            throw InvariantViolation("small-Q regime expects every colour dominated, got " +
                                     std::to_string(stab.dominated.size()) + " of " + std::to_string(t));
        return give_up({}, "not every colour is dominated");
    }

    VertexMask x_mask(fam.position_bounds());
    std::vector<int> x_in_class(static_cast<std::size_t>(k), 0);
    for (const auto& d : stab.dominated)
        for (auto v : d.dom_set) {
            if (!x_mask.test(v)) {
                x_mask.add(v);
                ++x_in_class[static_cast<std::size_t>(v.cls)];
            }
        }

    RainbowMatching M;
    VertexMask used(fam.position_bounds());
    std::vector<int> used_in_x(static_cast<std::size_t>(k), 0);
    for (int j = 0; j < t; ++j) {
        int cls = -1;
        for (int c = 0; c < k; ++c) {
            if (used_in_x[static_cast<std::size_t>(c)] < profile.at(c)) {
                cls = c;
                break;
            }
        }
        if (cls < 0)
            return give_up(std::move(M), "no class has spare quota for colour " + std::to_string(fam.label(j)));
        // Tuple clear of both the matching and the dominating union.
        VertexMask blocked = used;
        for (int c = 0; c < k; ++c)
            for (int p = 0; p < fam.position_bound(c); ++p)
                if (x_mask.test({c, p})) blocked.add({c, p});
        auto f = smallest_free_tuple(fam.member(j), cls, blocked);
        if (!f)
            return give_up(std::move(M), "no free tuple outside the dominating union for colour " +
                                             std::to_string(fam.label(j)));
        bool placed = false;
        for (int pos : fam.member(j).neighbourhood(*f)) {
            VertexRef u{cls, pos};
            if (used.test(u)) continue;
            CrossingTuple e = f->with(u);
            M.add(fam.label(j), e);
            used.add_tuple(e);
            if (x_mask.test(u)) ++used_in_x[static_cast<std::size_t>(u.cls)];
            placed = true;
            break;
        }
        if (!placed)
            return give_up(std::move(M), "no completion for colour " + std::to_string(fam.label(j)));
    }
    return finish(std::move(M), "dominating-steered greedy build");
}

// Perfect rainbow matching by induction on the colour count: either the last
// colour's graph has a matching big enough that one edge survives the
// recursion untouched, or a small dominating set forces some vertex to
// complete many reserved tuples, and deleting that vertex recurses cleanly.
inline RainbowRunResult pokrovskiy_rainbow(const Family& fam, const DegreeProfile& profile,
                                           const RainbowConfig& cfg = {}) {
    if (profile.k() != fam.k()) throw InvalidInput("profile arity must match the family");
    const int t = fam.size();
    const int k = fam.k();
    const long long total = profile.total();

    if (t > total) throw HypothesisUnmet("more colours than the profile total");
    long long n = fam.min_class_size();
    if (cfg.mode == Mode::guaranteed) {
        long long k10 = detail::ipow(k, 10);
        if (total * k10 > n) throw HypothesisUnmet("profile total above n/k^10");
    } else {
        const Rational& capd = cfg.pokrovskiy_capacity;
        if (total * capd.num() > n * capd.den()) throw HypothesisUnmet("profile total above the configured capacity");
    }
    for (int j = 0; j < t; ++j) {
        int bad = first_class_below_profile(fam.member(j), profile);
        if (bad >= 0)
            throw HypothesisUnmet("member " + std::to_string(fam.label(j)) + " has codegree into class " +
                                  std::to_string(bad) + " below the profile");
    }

    RainbowRunResult out;
    out.target = t;

    // First failed construction step; best_effort records it and keeps the
    // partial matching, guaranteed treats it as a defect.
    std::string failed;
    auto step_fail = [&](const std::string& why) {
        if (cfg.mode == Mode::guaranteed) throw InvariantViolation(why);
        if (failed.empty()) failed = why;
    };

    auto recurse_without_last = [&](auto&& self, const Family& f, const DegreeProfile& prof,
                                    const std::vector<VertexRef>& deleted) -> RainbowMatching {
        const int tt = f.size();
        if (tt <= 1) return {};
        std::vector<int> keep(static_cast<std::size_t>(tt - 1));
        for (int j = 0; j + 1 < tt; ++j) keep[static_cast<std::size_t>(j)] = j;
        Family sub = f.subfamily(keep);
        if (!deleted.empty()) sub = sub.induced(deleted);
        return self(self, sub, prof);
    };

    auto solve = [&](auto&& self, const Family& f, const DegreeProfile& prof) -> RainbowMatching {
        const int tt = f.size();
        const auto& last = f.member(tt - 1);
        Matching big = detail::greedy_matching(last);
        int need = k * tt - k + 1;

        if (big.size() >= need) {
            auto recurse = [&](const auto& s) { return recurse_without_last(s, f, prof, {}); };
            RainbowMatching inner = recurse(self);
            VertexMask used(f.position_bounds());
            for (const auto& r : inner.edges) used.add_tuple(r.edge);
            for (const auto& e : big.edges) {
                if (!used.intersects(e)) {
                    inner.add(f.label(tt - 1), e);
                    return inner;
                }
            }
            // k(tt-1)+1 disjoint edges cannot all meet a recursion that uses
            // at most k(tt-1) vertices, so a blocked partial is the only way
            // here.
            step_fail("a matching of size k(t-1)+1 left no edge untouched");
            return inner;
        }

        // Small-matching case. Its vertex set dominates the last colour, so
        // every completion of a reserved tuple lands inside it.
        VertexMask dom_mask(f.position_bounds());
        for (const auto& e : big.edges) dom_mask.add_tuple(e);
        int istar = prof.argmax();
        if (prof.at(istar) <= 0) {
            step_fail("largest profile entry is zero in the deletion case");
            return recurse_without_last(self, f, prof, {});
        }

        // Reserved tuples: zip the sorted free positions of each class.
        std::vector<std::vector<int>> avail(static_cast<std::size_t>(k));
        long long feasible = -1;
        for (int c = 0; c < k; ++c) {
            if (c == istar) continue;
            for (int p : f.alive_positions(c))
                if (!dom_mask.test({c, p})) avail[static_cast<std::size_t>(c)].push_back(p);
            long long have = static_cast<long long>(avail[static_cast<std::size_t>(c)].size());
            feasible = feasible < 0 ? have : std::min(feasible, have);
        }
        long long want = static_cast<long long>(detail::ipow(k, 5)) * tt;
        if (cfg.mode == Mode::guaranteed && feasible < want)
            throw InvariantViolation("cannot host k^5*t reserved tuples: " + std::to_string(feasible) +
                                     " available");
        long long count = std::min(want, std::max(feasible, 0ll));
        if (count == 0) {
            step_fail("no reserved tuples fit outside the dominating set");
            return recurse_without_last(self, f, prof, {});
        }

        std::vector<CrossingTuple> reserved;
        reserved.reserve(static_cast<std::size_t>(count));
        for (long long r = 0; r < count; ++r) {
            CrossingTuple tup(k);
            for (int c = 0; c < k; ++c)
                if (c != istar) tup.set(c, avail[static_cast<std::size_t>(c)][static_cast<std::size_t>(r)]);
            reserved.push_back(std::move(tup));
        }

        // The vertex completing the most reserved tuples; in guaranteed mode
        // it must complete at least k^2·t of them.
        int best_pos = -1;
        long long best_cnt = -1;
        for (int p : f.alive_positions(istar)) {
            long long cnt = 0;
            for (const auto& tup : reserved) cnt += last.has_edge(tup.with({istar, p}));
            if (cnt > best_cnt) {
                best_cnt = cnt;
                best_pos = p;
            }
        }
        long long need_cnt = static_cast<long long>(k) * k * tt;
        if (cfg.mode == Mode::guaranteed && best_cnt < need_cnt)
            throw InvariantViolation("no vertex completes k^2*t reserved tuples; best " + std::to_string(best_cnt));
        if (best_pos < 0 || best_cnt <= 0) {
            step_fail("no vertex completes any reserved tuple");
            return recurse_without_last(self, f, prof, {});
        }
        VertexRef v{istar, best_pos};

        std::vector<int> a2 = prof.entries();
        a2[static_cast<std::size_t>(istar)] -= 1;
        RainbowMatching inner = recurse_without_last(self, f, DegreeProfile(a2), {v});
        VertexMask used(f.position_bounds());
        for (const auto& r : inner.edges) used.add_tuple(r.edge);
        for (const auto& tup : reserved) {
            if (used.intersects(tup)) continue;
            CrossingTuple e = tup.with(v);
            if (last.has_edge(e)) {
                inner.add(f.label(tt - 1), e);
                return inner;
            }
        }
        step_fail("every reserved completion of the chosen vertex is blocked");
        return inner;
    };

    RainbowMatching M = solve(solve, fam, profile);
    auto check = validate_rainbow(fam, M);
    if (!check.ok) throw InvariantViolation("rainbow matching invalid: " + check.violation);
    out.matching = std::move(M);
    out.reached_target = out.matching.size() >= t;
    out.note = failed;
    if (cfg.mode == Mode::guaranteed && !out.reached_target)
        throw InvariantViolation("guaranteed induction ended below t");
    return out;
}

}  // namespace kpm
