#pragma once

#include <algorithm>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "kpm/bipartite.hpp"
#include "kpm/constructions.hpp"
#include "kpm/core.hpp"
#include "kpm/errors.hpp"
#include "kpm/family.hpp"
#include "kpm/rainbow.hpp"
#include "kpm/rational.hpp"

namespace kpm {

namespace detail {

// Rebuilds the graph with classes listed in a new order; perm[s] is the
// original class shown at slot s.
inline KPartiteHypergraph permute_classes(const KPartiteHypergraph& h, const std::vector<int>& perm) {
    const int k = h.k();
    std::vector<int> bounds(static_cast<std::size_t>(k));
    std::vector<std::vector<char>> alive(static_cast<std::size_t>(k));
    for (int s = 0; s < k; ++s) {
        bounds[static_cast<std::size_t>(s)] = h.position_bound(perm[static_cast<std::size_t>(s)]);
        alive[static_cast<std::size_t>(s)] = h.alive_masks()[static_cast<std::size_t>(perm[static_cast<std::size_t>(s)])];
    }
    std::vector<CrossingTuple> edges;
    edges.reserve(h.edges().size());
    for (const auto& e : h.edges()) {
        CrossingTuple t(k);
        for (int s = 0; s < k; ++s) t.set(s, e.at(perm[static_cast<std::size_t>(s)]));
        edges.push_back(std::move(t));
    }
    return {k, std::move(bounds), std::move(alive), std::move(edges)};
}

// k-arity tuple with slot 0 absent, slots 1.. taken from a (k-1)-arity tuple.
inline CrossingTuple lift_link_tuple(const CrossingTuple& g) {
    CrossingTuple t(g.k() + 1);
    for (int c = 0; c < g.k(); ++c)
        if (g.has(c)) t.set(c + 1, g.at(c));
    return t;
}

}  // namespace detail

// How many vertices of U host the tuple f in their link. The bound
// |U| - (n - a1) is asserted, so an overstated a1 surfaces here.
inline int link_membership_count(const KPartiteHypergraph& h, const std::vector<int>& u_positions,
                                 const CrossingTuple& f, int a1) {
    if (f.k() != h.k() || f.avoided_class() != 0) throw InvalidInput("tuple must avoid exactly class 0");
    h.degree(f);  // range/liveness validation
    std::vector<int> u = u_positions;
    std::sort(u.begin(), u.end());
    if (std::adjacent_find(u.begin(), u.end()) != u.end()) throw InvalidInput("duplicate vertex in U");
    int count = 0;
    for (int pos : u) {
        if (pos < 0 || pos >= h.position_bound(0) || !h.alive({0, pos}))
            throw InvalidInput("U contains a vertex outside class 0");
        count += h.has_edge(f.with({0, pos}));
    }
    long long floor_v = static_cast<long long>(u.size()) - (h.class_size(0) - a1);
    if (count < floor_v)
        throw InvariantViolation("link membership count " + std::to_string(count) + " fell below |U|-(n-a1) = " +
                                 std::to_string(floor_v) + "; the class-0 codegree bound is overstated");
    return count;
}

enum class LinkFilter { wide, tight };

// The vertices of class 0 whose links contain many edges of M, where M is a
// perfect matching of the complete graph on the other classes. The wide form
// demands (1+eps)kq edges and is available for a wide range of q; the tight
// form demands n-a1+(k-1)q and needs q below sqrt(n/(k+1)).
inline std::vector<int> well_linked_set(const KPartiteHypergraph& h, const DegreeProfile& profile,
                                        const std::vector<CrossingTuple>& m_edges, LinkFilter variant,
                                        const Rational& eps, Mode mode = Mode::best_effort) {
    const int k = h.k();
    const int n = h.class_size(0);
    if (profile.k() != k) throw InvalidInput("profile arity must match the graph");
    if (static_cast<int>(m_edges.size()) != h.min_class_size())
        throw InvalidInput("M must be a perfect matching of the complete graph on classes 1..k-1");
    std::vector<std::vector<char>> seen(static_cast<std::size_t>(k));
    for (int c = 1; c < k; ++c) seen[static_cast<std::size_t>(c)].assign(static_cast<std::size_t>(h.position_bound(c)), 0);
    for (const auto& f : m_edges) {
        if (f.k() != k || f.avoided_class() != 0) throw InvalidInput("M edges must avoid exactly class 0");
        for (int c = 1; c < k; ++c) {
            int p = f.at(c);
            if (p < 0 || p >= h.position_bound(c) || !h.alive({c, p}))
                throw InvalidInput("M edge leaves the vertex classes");
            if (seen[static_cast<std::size_t>(c)][static_cast<std::size_t>(p)]) throw InvalidInput("M edges overlap");
            seen[static_cast<std::size_t>(c)][static_cast<std::size_t>(p)] = 1;
        }
    }

    const long long q = profile.tail_sum();
    const int a1 = profile.at(0);
    if (mode == Mode::guaranteed) {
        for (int c = 0; c + 1 < k; ++c)
            if (profile.at(c) < profile.at(c + 1)) throw HypothesisUnmet("profile entries must be non-increasing");
        if (profile.total() <= n - k) throw HypothesisUnmet("profile total must exceed n-k");
        if (variant == LinkFilter::wide) {
            if (!eps.is_positive() || eps >= Rational(1)) throw InvalidInput("eps must lie in (0,1)");
            // 2k/eps ≤ q ≤ eps·n/8k.
            if (2ll * k * eps.den() > q * eps.num()) throw HypothesisUnmet("q below 2k/eps");
            if (q * 8 * k * eps.den() > static_cast<long long>(n) * eps.num())
                throw HypothesisUnmet("q above eps*n/8k");
        } else {
            if (q * q * (k + 1) > n) throw HypothesisUnmet("q above sqrt(n/(k+1))");
        }
    }

    std::vector<int> out;
    for (int p = 0; p < h.position_bound(0); ++p) {
        if (!h.alive({0, p})) continue;
        long long cnt = 0;
        for (const auto& f : m_edges) cnt += h.has_edge(f.with({0, p}));
        bool keep;
        if (variant == LinkFilter::wide) {
            keep = cnt * eps.den() >= (eps.den() + eps.num()) * k * q;  // cnt ≥ (1+eps)kq
        } else {
            keep = cnt >= n - a1 + static_cast<long long>(k - 1) * q;
        }
        if (keep) out.push_back(p);
    }
    if (mode == Mode::guaranteed) {
        if (variant == LinkFilter::wide) {
            // |U| ≥ n - (1+eps)q.
            if (static_cast<long long>(out.size()) * eps.den() <
                static_cast<long long>(n) * eps.den() - (eps.den() + eps.num()) * q)
                throw InvariantViolation("well-linked set of size " + std::to_string(out.size()) +
                                         " fell below n-(1+eps)q");
        } else if (static_cast<int>(out.size()) < a1) {
            throw InvariantViolation("well-linked set of size " + std::to_string(out.size()) +
                                     " fell below a1 = " + std::to_string(a1));
        }
    }
    return out;
}

struct DriverConfig {
    Mode regime = Mode::best_effort;
    std::optional<std::string> branch_override;  // "fact_1_5", "large_q", "small_q"
    OracleBudget budget{};
};

struct DriverReport {
    Mode regime = Mode::best_effort;
    std::string branch;
    bool branch_overridden = false;
    std::vector<int> class_order;    // slot s of the working orientation is original class class_order[s]
    std::vector<int> profile_used;   // reduced profile in the working orientation
    int n = 0;
    int q_value = 0;
    int target = 0;
    int x_size = 0;
    int y_size = 0;
    int z_size = 0;
    int rainbow_size = 0;
    bool hall_saturated = false;
    std::vector<std::string> trace;
    Matching matching;  // original class order
    std::string status;  // "success" or "shortfall"
};

// The whole pipeline: reduce the largest codegree bound until the profile
// total fits in a class, serve small totals with the local-search matching,
// and otherwise split the first class into a well-linked part X and a
// remainder Y, extract a rainbow matching from the links over Y (or over an
// explicit q-subset when q is small), embed it into a perfect matching M* of
// the complete graph on the other classes, and close with a Hall matching on
// the auxiliary bipartite graph (X ∪ Z) × M*.
inline DriverReport run_pipeline(const KPartiteHypergraph& h, const DegreeProfile& profile,
                                 const DriverConfig& cfg = {}) {
    const int k = h.k();
    if (profile.k() != k) throw InvalidInput("profile arity must match the graph");
    if (!h.fully_alive()) throw InvalidInput("the pipeline expects a graph without removed vertices");
    if (h.min_class_size() != h.max_class_size())
        throw HypothesisUnmet("the pipeline expects equal class sizes");
    const int n = h.min_class_size();
    for (int c = 0; c < k; ++c)
        if (h.min_codegree_into(c) < profile.at(c))
            throw HypothesisUnmet("computed codegree into class " + std::to_string(c) +
                                  " is below the profile");

    DriverReport rep;
    rep.regime = cfg.regime;
    rep.n = n;

    // Reduce the largest entry until the total fits in one class.
    std::vector<int> reduced = profile.entries();
    long long excess = std::accumulate(reduced.begin(), reduced.end(), 0ll) - n;
    while (excess > 0) {
        std::size_t im = 0;
        for (std::size_t i = 1; i < reduced.size(); ++i)
            if (reduced[i] > reduced[im]) im = i;
        int cut = static_cast<int>(std::min<long long>(excess, reduced[im]));
        reduced[im] -= cut;
        excess -= cut;
        rep.trace.push_back("reduced class " + std::to_string(im) + " bound by " + std::to_string(cut));
    }
    DegreeProfile prof0(reduced);
    const int total = prof0.total();
    rep.target = total;

    auto finish = [&](Matching m, bool saturated) -> DriverReport {
        auto check = validate_matching(h, m);
        if (!check.ok) throw InvariantViolation("assembled matching invalid: " + check.violation);
        rep.hall_saturated = saturated;
        rep.matching = std::move(m);
        rep.status = rep.matching.size() >= rep.target ? "success" : "shortfall";
        if (cfg.regime == Mode::guaranteed && rep.status != "success")
            throw InvariantViolation("guaranteed run ended at " + std::to_string(rep.matching.size()) +
                                     " of " + std::to_string(rep.target));
        return rep;
    };

    std::string branch;
    if (cfg.branch_override) {
        branch = *cfg.branch_override;
        rep.branch_overridden = true;
        if (branch != "fact_1_5" && branch != "large_q" && branch != "small_q")
            throw InvalidInput("unknown branch override " + branch);
    } else if (total <= n - k + 2) {
        branch = "fact_1_5";
    } else {
        // Tail sum after sorting, i.e. everything outside the largest entry.
        std::vector<int> sorted_desc = reduced;
        std::sort(sorted_desc.begin(), sorted_desc.end(), std::greater<>());
        long long tail = std::accumulate(sorted_desc.begin() + 1, sorted_desc.end(), 0ll);
        branch = tail >= 400ll * k * k ? "large_q" : "small_q";
    }
    rep.branch = branch;

    if (branch == "fact_1_5") {
        rep.class_order.resize(static_cast<std::size_t>(k));
        std::iota(rep.class_order.begin(), rep.class_order.end(), 0);
        rep.profile_used = reduced;
        rep.q_value = prof0.tail_sum();
        Matching m = fact_1_5_matching(h, prof0);
        rep.trace.push_back("local search produced " + std::to_string(m.size()) + " edges");
        return finish(std::move(m), false);
    }

    // Working orientation: classes in non-increasing profile order.
    std::vector<int> perm(static_cast<std::size_t>(k));
    std::iota(perm.begin(), perm.end(), 0);
    std::stable_sort(perm.begin(), perm.end(),
                     [&](int a, int b) { return reduced[static_cast<std::size_t>(a)] > reduced[static_cast<std::size_t>(b)]; });
    std::vector<int> ps(static_cast<std::size_t>(k));
    for (int s = 0; s < k; ++s) ps[static_cast<std::size_t>(s)] = reduced[static_cast<std::size_t>(perm[static_cast<std::size_t>(s)])];
    KPartiteHypergraph hs = detail::permute_classes(h, perm);
    DegreeProfile prof(ps);
    rep.class_order = perm;
    rep.profile_used = ps;
    const int a1 = prof.at(0);
    const int q = prof.tail_sum();
    rep.q_value = q;

    const Rational eps(1, 200ll * k);
    if (cfg.regime == Mode::guaranteed) {
        if (static_cast<long long>(q) * 1600 * k * k * k * k > n)
            throw HypothesisUnmet("q above n/1600k^4");
        if (n < 100ll * detail::ipow(k, 6)) throw HypothesisUnmet("class size below 100k^6");
    }

    // Lex perfect matching of the complete graph on classes 1..k-1.
    std::vector<CrossingTuple> diag;
    diag.reserve(static_cast<std::size_t>(n));
    for (int p = 0; p < n; ++p) {
        CrossingTuple t(k);
        for (int c = 1; c < k; ++c) t.set(c, p);
        diag.push_back(std::move(t));
    }

    std::vector<int> x_pos;
    std::vector<int> z_pos;                 // class-0 positions carrying the rainbow
    std::vector<CrossingTuple> psi;         // lifted rainbow edge per z_pos entry
    int m_links = 0;

    auto give_up = [&](const std::string& why) -> DriverReport {
        if (cfg.regime == Mode::guaranteed) throw InvariantViolation(why);
        rep.trace.push_back(why);
        return finish({}, false);
    };

    if (branch == "large_q") {
        std::vector<int> u_set = well_linked_set(hs, prof, diag, LinkFilter::wide, eps, cfg.regime);
        if (static_cast<int>(u_set.size()) > a1) u_set.resize(static_cast<std::size_t>(a1));
        x_pos = u_set;
        std::vector<char> in_x(static_cast<std::size_t>(n), 0);
        for (int p : x_pos) in_x[static_cast<std::size_t>(p)] = 1;
        std::vector<int> y_pos;
        for (int p = 0; p < n; ++p)
            if (!in_x[static_cast<std::size_t>(p)]) y_pos.push_back(p);
        rep.x_size = static_cast<int>(x_pos.size());
        rep.y_size = static_cast<int>(y_pos.size());
        m_links = static_cast<int>(y_pos.size()) - (n - a1);
        if (m_links < 0) throw InvariantViolation("negative link multiplicity despite |X| <= a1");
        rep.trace.push_back("X " + std::to_string(x_pos.size()) + ", Y " + std::to_string(y_pos.size()) +
                            ", m " + std::to_string(m_links) + ", q " + std::to_string(q));

        if (y_pos.empty()) return give_up("the well-linked set swallowed the whole class");

        // Every tuple avoiding class 0 appears in at least m of the links
        // over Y; spot-check a few before declaring it.
        for (std::size_t i = 0; i < diag.size() && i < 8; ++i)
            link_membership_count(hs, y_pos, diag[i], a1);

        std::vector<KPartiteHypergraph> links;
        links.reserve(y_pos.size());
        for (int p : y_pos) links.push_back(hs.link_graph({0, p}));
        Family fam(std::move(links));
        fam.declared_m = m_links;
        std::vector<int> link_prof(static_cast<std::size_t>(k - 1));
        for (int c = 1; c < k; ++c) link_prof[static_cast<std::size_t>(c - 1)] = prof.at(c);

        RainbowConfig rcfg;
        rcfg.mode = cfg.regime;
        rcfg.budget = cfg.budget;
        RainbowRunResult rr;
        try {
            rr = rainbow_m_plus_q(fam, DegreeProfile(link_prof), m_links, rcfg);
        } catch (const HypothesisUnmet& e) {
            return give_up(std::string("link family rejected: ") + e.what());
        }
        rep.rainbow_size = rr.matching.size();
        if (!rr.reached_target)
            rep.trace.push_back("rainbow stage fell short at " + std::to_string(rr.matching.size()) + " of " +
                                std::to_string(m_links + q) + ": " + rr.note);
        for (const auto& r : rr.matching.edges) {
            z_pos.push_back(y_pos[static_cast<std::size_t>(r.colour)]);
            psi.push_back(detail::lift_link_tuple(r.edge));
        }
    } else {
        std::vector<int> u_set = well_linked_set(hs, prof, diag, LinkFilter::tight, eps, cfg.regime);
        if (static_cast<int>(u_set.size()) > a1) u_set.resize(static_cast<std::size_t>(a1));
        x_pos = u_set;
        if (static_cast<int>(x_pos.size()) < a1)
            rep.trace.push_back("well-linked set holds " + std::to_string(x_pos.size()) + " of a1 = " +
                                std::to_string(a1));
        std::vector<char> in_x(static_cast<std::size_t>(n), 0);
        for (int p : x_pos) in_x[static_cast<std::size_t>(p)] = 1;
        std::vector<int> z_candidates;
        for (int p = 0; p < n && static_cast<int>(z_candidates.size()) < q; ++p)
            if (!in_x[static_cast<std::size_t>(p)]) z_candidates.push_back(p);
        rep.x_size = static_cast<int>(x_pos.size());
        rep.y_size = n - rep.x_size;
        if (static_cast<int>(z_candidates.size()) < q)
            return give_up("fewer than q vertices remain outside the well-linked set");

        if (q > 0) {
            std::vector<KPartiteHypergraph> links;
            links.reserve(z_candidates.size());
            for (int p : z_candidates) links.push_back(hs.link_graph({0, p}));
            Family fam(std::move(links));
            std::vector<int> link_prof(static_cast<std::size_t>(k - 1));
            for (int c = 1; c < k; ++c) link_prof[static_cast<std::size_t>(c - 1)] = prof.at(c);

            RainbowConfig rcfg;
            rcfg.mode = cfg.regime;
            rcfg.budget = cfg.budget;
            RainbowRunResult rr;
            try {
                rr = rainbow_m_plus_q(fam, DegreeProfile(link_prof), 0, rcfg);
            } catch (const HypothesisUnmet& e) {
                return give_up(std::string("link family rejected: ") + e.what());
            }
            rep.rainbow_size = rr.matching.size();
            if (!rr.reached_target)
                rep.trace.push_back("rainbow stage fell short at " + std::to_string(rr.matching.size()) +
                                    " of " + std::to_string(q) + ": " + rr.note);
            for (const auto& r : rr.matching.edges) {
                z_pos.push_back(z_candidates[static_cast<std::size_t>(r.colour)]);
                psi.push_back(detail::lift_link_tuple(r.edge));
            }
        }
    }
    rep.z_size = static_cast<int>(z_pos.size());

    // Size accounting: with full stages, |X| + |Z| is exactly the target.
    if (rep.rainbow_size == (branch == "large_q" ? m_links + q : q) &&
        static_cast<int>(x_pos.size()) == a1 && rep.x_size + rep.z_size != total)
        throw InvariantViolation("size accounting broken: " + std::to_string(rep.x_size) + " + " +
                                 std::to_string(rep.z_size) + " != " + std::to_string(total));

    // M* on classes 1..k-1: the rainbow edges, the untouched part of the
    // diagonal, and a lex zip of whatever positions remain.
    std::vector<std::vector<char>> used(static_cast<std::size_t>(k));
    for (int c = 1; c < k; ++c) used[static_cast<std::size_t>(c)].assign(static_cast<std::size_t>(n), 0);
    std::vector<CrossingTuple> m_star = psi;
    for (const auto& f : psi)
        for (int c = 1; c < k; ++c) used[static_cast<std::size_t>(c)][static_cast<std::size_t>(f.at(c))] = 1;
    for (const auto& f : diag) {
        bool hit = false;
        for (int c = 1; c < k && !hit; ++c) hit = used[static_cast<std::size_t>(c)][static_cast<std::size_t>(f.at(c))];
        if (!hit) {
            m_star.push_back(f);
            for (int c = 1; c < k; ++c) used[static_cast<std::size_t>(c)][static_cast<std::size_t>(f.at(c))] = 1;
        }
    }
    {
        std::vector<std::vector<int>> free(static_cast<std::size_t>(k));
        for (int c = 1; c < k; ++c)
            for (int p = 0; p < n; ++p)
                if (!used[static_cast<std::size_t>(c)][static_cast<std::size_t>(p)])
                    free[static_cast<std::size_t>(c)].push_back(p);
        for (std::size_t i = 0; i < free[1].size(); ++i) {
            CrossingTuple t(k);
            for (int c = 1; c < k; ++c) t.set(c, free[static_cast<std::size_t>(c)][i]);
            m_star.push_back(std::move(t));
        }
    }
    std::sort(m_star.begin(), m_star.end());
    if (static_cast<int>(m_star.size()) != n)
        throw InvariantViolation("completion produced " + std::to_string(m_star.size()) + " edges instead of n");

    // Auxiliary bipartite graph (X ∪ Z) × M*.
    std::vector<int> u_star = x_pos;
    u_star.insert(u_star.end(), z_pos.begin(), z_pos.end());
    std::sort(u_star.begin(), u_star.end());
    if (std::adjacent_find(u_star.begin(), u_star.end()) != u_star.end())
        throw InvariantViolation("X and Z overlap");
    std::vector<std::vector<int>> adj(u_star.size());
    for (std::size_t i = 0; i < u_star.size(); ++i)
        for (int j = 0; j < n; ++j)
            if (hs.has_edge(m_star[static_cast<std::size_t>(j)].with({0, u_star[i]}))) adj[i].push_back(j);
    BipartiteGraph B(static_cast<int>(u_star.size()), n, std::move(adj));

    // Hall diagnostics, mirroring the three cases of the saturation argument.
    {
        std::vector<char> in_x(static_cast<std::size_t>(n), 0);
        for (int p : x_pos) in_x[static_cast<std::size_t>(p)] = 1;
        int big = n - a1 + 1;
        if (static_cast<int>(u_star.size()) >= big && big > 0) {
            std::vector<char> hit(static_cast<std::size_t>(n), 0);
            for (int i = 0; i < big; ++i)
                for (int j : B.adj[static_cast<std::size_t>(i)]) hit[static_cast<std::size_t>(j)] = 1;
            long long cover = std::count(hit.begin(), hit.end(), char(1));
            if (cover != n) {
                std::string msg = "a set of size n-a1+1 misses " + std::to_string(n - cover) + " right vertices";
                if (cfg.regime == Mode::guaranteed) throw InvariantViolation(msg);
                rep.trace.push_back(msg);
            }
        }
        long long floor_x = n - a1;
        bool wide_slack_ok =
            branch != "large_q" || (eps.den() + eps.num()) * q >= static_cast<long long>(n - a1) * eps.den();
        if (!wide_slack_ok) {
            std::string msg = "(1+eps)q falls below n-a1, so the X-degree case cannot close";
            if (cfg.regime == Mode::guaranteed) throw InvariantViolation(msg);
            rep.trace.push_back(msg);
        }
        for (std::size_t i = 0; i < u_star.size(); ++i) {
            if (!in_x[static_cast<std::size_t>(u_star[i])]) continue;
            long long deg = static_cast<long long>(B.adj[i].size());
            bool ok = branch == "large_q" ? deg * eps.den() >= (eps.den() + eps.num()) * q && deg >= floor_x
                                          : deg >= floor_x;
            if (!ok) {
                std::string msg = "vertex " + std::to_string(u_star[i]) + " of X has auxiliary degree " +
                                  std::to_string(deg) + " below its floor";
                if (cfg.regime == Mode::guaranteed) throw InvariantViolation(msg);
                rep.trace.push_back(msg);
                break;
            }
        }
        std::vector<char> psi_hit(static_cast<std::size_t>(n), 0);
        for (std::size_t zi = 0; zi < z_pos.size(); ++zi) {
            auto it = std::lower_bound(m_star.begin(), m_star.end(), psi[zi]);
            bool ok = it != m_star.end() && *it == psi[zi];
            int idx = ok ? static_cast<int>(it - m_star.begin()) : -1;
            if (ok) {
                if (psi_hit[static_cast<std::size_t>(idx)]) ok = false;
                else psi_hit[static_cast<std::size_t>(idx)] = 1;
            }
            if (ok && !hs.has_edge(psi[zi].with({0, z_pos[zi]}))) ok = false;
            if (!ok) {
                std::string msg = "rainbow assignment for vertex " + std::to_string(z_pos[zi]) +
                                  " is not an injective edge into M*";
                if (cfg.regime == Mode::guaranteed) throw InvariantViolation(msg);
                rep.trace.push_back(msg);
                break;
            }
        }
    }

    BipMatching mb = max_bip_matching(B);
    bool saturated = mb.size == static_cast<int>(u_star.size());
    if (!saturated) {
        std::string msg = "auxiliary graph saturation failed at " + std::to_string(mb.size) + " of " +
                          std::to_string(u_star.size());
        if (cfg.regime == Mode::guaranteed) throw InvariantViolation(msg);
        rep.trace.push_back(msg);
    }

    Matching assembled;
    for (std::size_t i = 0; i < u_star.size(); ++i) {
        int j = mb.left_to_right[i];
        if (j < 0) continue;
        CrossingTuple e_sorted = m_star[static_cast<std::size_t>(j)].with({0, u_star[i]});
        CrossingTuple e(k);
        for (int s = 0; s < k; ++s) e.set(rep.class_order[static_cast<std::size_t>(s)], e_sorted.at(s));
        assembled.add(e);
    }
    return finish(std::move(assembled), saturated);
}

}  // namespace kpm
