#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <set>
#include <vector>

#include "kpm/constructions.hpp"
#include "kpm/core.hpp"
#include "kpm/errors.hpp"
#include "kpm/family.hpp"
#include "kpm/io.hpp"
#include "kpm/rational.hpp"

using namespace kpm;

namespace {

CrossingTuple tuple3(int a, int b, int c) {
    CrossingTuple t(3);
    if (a >= 0) t.set(0, a);
    if (b >= 0) t.set(1, b);
    if (c >= 0) t.set(2, c);
    return t;
}

// Codegree recomputed the slow way: enumerate every crossing (k-1)-tuple
// avoiding cls over the full position grid and count completions per tuple.
int naive_min_codegree(const KPartiteHypergraph& h, int cls) {
    std::vector<int> other;
    for (int c = 0; c < h.k(); ++c)
        if (c != cls) other.push_back(c);
    std::vector<int> slot(other.size(), 0);
    bool any = false;
    int best = h.class_size(cls);
    while (true) {
        bool valid = true;
        for (std::size_t i = 0; i < other.size(); ++i)
            if (!h.alive({other[i], slot[i]})) valid = false;
        if (valid) {
            any = true;
            int cnt = 0;
            for (int p = 0; p < h.position_bound(cls); ++p) {
                if (!h.alive({cls, p})) continue;
                CrossingTuple t(h.k());
                t.set(cls, p);
                for (std::size_t i = 0; i < other.size(); ++i) t.set(other[i], slot[i]);
                cnt += h.has_edge(t);
            }
            best = std::min(best, cnt);
        }
        std::size_t i = 0;
        while (i < other.size()) {
            if (++slot[i] < h.position_bound(other[i])) break;
            slot[i] = 0;
            ++i;
        }
        if (i == other.size()) break;
    }
    return any ? best : h.class_size(cls);
}

}  // namespace

TEST_CASE("crossing tuple construction and class arithmetic", "[core]") {
    CrossingTuple t = tuple3(1, -1, 0);
    REQUIRE(t.k() == 3);
    REQUIRE(t.size() == 2);
    REQUIRE_FALSE(t.is_full());
    REQUIRE(t.avoided_class() == 1);
    REQUIRE(t.at(0) == 1);
    REQUIRE(t.at(1) == CrossingTuple::kAbsent);

    CrossingTuple full = t.with({1, 1});
    REQUIRE(full.is_full());
    REQUIRE(full.avoided_class() == -1);
    REQUIRE(full.without_class(1).str() == t.str());

    CrossingTuple link = full.strip_first_class();
    REQUIRE(link.k() == 2);
    REQUIRE(link.at(0) == 1);
    REQUIRE(link.at(1) == 0);

    auto vs = full.vertices();
    REQUIRE(vs.size() == 3);
    REQUIRE(vs[0] == VertexRef{0, 1});
}

TEST_CASE("degree profile totals and argmax", "[core]") {
    DegreeProfile a({2, 5, 3});
    REQUIRE(a.total() == 10);
    REQUIRE(a.tail_sum() == 8);
    REQUIRE(a.argmax() == 1);
    REQUIRE(a.at(2) == 3);
    REQUIRE_THROWS_AS(DegreeProfile({1, -1}), InvalidInput);
}

TEST_CASE("hypergraph accessors agree with naive recomputation", "[core]") {
    auto res = random_instance(3, 4, DegreeProfile({1, 1, 0}), Rational(1, 2), 7);
    const auto& h = res.graph;
    REQUIRE(h.edge_count() == 47);
    for (int c = 0; c < 3; ++c) REQUIRE(h.min_codegree_into(c) == naive_min_codegree(h, c));

    // degree() counts completions of one fixed pair.
    CrossingTuple pair = tuple3(0, 0, -1);
    int cnt = 0;
    for (int p = 0; p < 4; ++p) cnt += h.has_edge(pair.with({2, p}));
    REQUIRE(h.degree(pair) == cnt);
    REQUIRE(static_cast<int>(h.neighbourhood(pair).size()) == cnt);
}

TEST_CASE("induced subgraph removes vertices and filters edges", "[core]") {
    auto res = complete_graph(3, 3);
    auto sub = res.graph.induced({{0, 0}, {2, 1}});
    REQUIRE_FALSE(sub.alive({0, 0}));
    REQUIRE(sub.alive({0, 1}));
    REQUIRE(sub.class_size(0) == 2);
    REQUIRE(sub.edge_count() == 2 * 3 * 2);
    REQUIRE_FALSE(sub.fully_alive());
    REQUIRE(res.graph.fully_alive());
    for (const auto& e : sub.edges()) {
        REQUIRE(e.at(0) != 0);
        REQUIRE(e.at(2) != 1);
    }
}

TEST_CASE("link graph inherits codegrees from the host", "[core]") {
    auto res = random_instance(3, 4, DegreeProfile({0, 2, 1}), Rational(1, 3), 11);
    const auto& h = res.graph;
    for (int p = 0; p < 4; ++p) {
        auto link = h.link_graph({0, p});
        REQUIRE(link.k() == 2);
        long long edges = 0;
        for (const auto& e : h.edges()) edges += e.at(0) == p;
        REQUIRE(static_cast<long long>(link.edge_count()) == edges);
        for (int c = 0; c + 1 < 3; ++c) REQUIRE(link.min_codegree_into(c) >= h.min_codegree_into(c + 1));
    }
}

TEST_CASE("matching validation rejects overlaps and foreign edges", "[core]") {
    auto res = complete_graph(3, 3);
    Matching m;
    m.add(tuple3(0, 0, 0));
    m.add(tuple3(1, 1, 1));
    REQUIRE(validate_matching(res.graph, m).ok);

    Matching overlap = m;
    overlap.add(tuple3(2, 1, 2));
    REQUIRE_FALSE(validate_matching(res.graph, overlap).ok);

    auto barrier = space_barrier(3, 3, DegreeProfile({1, 0, 0}));
    Matching foreign;
    foreign.add(tuple3(2, 2, 2));
    REQUIRE_FALSE(validate_matching(barrier.graph, foreign).ok);
}

TEST_CASE("vertex mask add and intersect", "[core]") {
    VertexMask mask(std::vector<int>{2, 2, 2});
    REQUIRE_FALSE(mask.test({0, 1}));
    mask.add_tuple(tuple3(0, 1, -1));
    REQUIRE(mask.test({0, 0}));
    REQUIRE(mask.test({1, 1}));
    REQUIRE_FALSE(mask.test({2, 0}));
    REQUIRE(mask.intersects(tuple3(0, 0, 0)));
    REQUIRE_FALSE(mask.intersects(tuple3(-1, 0, 0)));
    mask.remove({0, 0});
    REQUIRE_FALSE(mask.intersects(tuple3(0, 0, 0)));
}

TEST_CASE("instance serialization round-trips byte-identically", "[core]") {
    auto res = random_instance(3, 4, DegreeProfile({1, 1, 0}), Rational(1, 2), 7);
    auto j = io::graph_to_json(res.graph);
    auto back = io::graph_from_json(j);
    REQUIRE(io::canonical_instance(back) == io::canonical_instance(res.graph));
    REQUIRE(io::instance_id(res.graph) == "101606539080e6b8");

    // The id ignores edge listing order.
    auto edges = res.graph.edges();
    std::reverse(edges.begin(), edges.end());
    KPartiteHypergraph shuffled(3, {4, 4, 4}, std::move(edges));
    REQUIRE(io::instance_id(shuffled) == "101606539080e6b8");
}

TEST_CASE("family copies share labels and report codegree profiles", "[core]") {
    auto base = complete_graph(3, 3);
    Family fam = identical_family(base.graph, 3);
    REQUIRE(fam.size() == 3);
    REQUIRE(fam.k() == 3);
    REQUIRE(fam.label(1) == 1);
    REQUIRE(fam.index_of(2) == 2);
    auto prof = fam.min_codegree_profile();
    for (int c = 0; c < 3; ++c) REQUIRE(prof.at(c) == 3);

    auto sub = fam.subfamily({0, 2});
    REQUIRE(sub.size() == 2);
    REQUIRE(sub.label(1) == 2);
}

TEST_CASE("rainbow matching bookkeeping and validation", "[core]") {
    auto base = complete_graph(3, 3);
    Family fam = identical_family(base.graph, 3);
    RainbowMatching rm;
    rm.add(1, tuple3(0, 0, 0));
    rm.add(0, tuple3(1, 1, 1));
    REQUIRE(rm.size() == 2);
    REQUIRE(rm.has_colour(0));
    REQUIRE(rm.edges[0].colour == 0);  // kept sorted by colour
    REQUIRE(validate_rainbow(fam, rm).ok);

    RainbowMatching repeat = rm;
    repeat.add(1, tuple3(2, 2, 2));
    REQUIRE_FALSE(validate_rainbow(fam, repeat).ok);

    RainbowMatching overlap = rm;
    overlap.add(2, tuple3(2, 1, 2));
    REQUIRE_FALSE(validate_rainbow(fam, overlap).ok);

    REQUIRE(rm.covers(VertexRef{0, 0}));
    REQUIRE_FALSE(rm.covers(VertexRef{2, 2}));
    REQUIRE(rm.edge_of(1)->str() == tuple3(0, 0, 0).str());
    Matching plain = rm.plain();
    REQUIRE(plain.size() == 2);
}

TEST_CASE("rationals compare exactly and parse both forms", "[core]") {
    REQUIRE(Rational::parse("2/4") == Rational(1, 2));
    REQUIRE(Rational::parse("3") == Rational(3));
    REQUIRE(Rational(1, 3) < Rational(1, 2));
    REQUIRE_THROWS_AS(Rational::parse("x"), std::invalid_argument);
    REQUIRE_THROWS_AS(Rational(1, 0), std::invalid_argument);
    REQUIRE(Rational(2, 4).num() == 1);
    REQUIRE(Rational(2, 4).den() == 2);
}
