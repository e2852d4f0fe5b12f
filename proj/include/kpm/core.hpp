#pragma once

#include <algorithm>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "kpm/errors.hpp"

namespace kpm {

// One vertex of a k-partite vertex set: class index and position within the
// class, both 0-based. Total order is (cls, pos).
struct VertexRef {
    int cls = 0;
    int pos = 0;
    auto operator<=>(const VertexRef&) const = default;
};

inline std::string to_string(VertexRef v) {
    return "(" + std::to_string(v.cls) + ":" + std::to_string(v.pos) + ")";
}

// A crossing tuple: at most one position per class, absent classes hold -1.
// Full tuples (edges) have every slot set; the (k-1)-tuples the degree
// machinery works with leave exactly one slot absent. Lexicographic order on
// the slot vector is the canonical order used everywhere a choice is made.
class CrossingTuple {
public:
    static constexpr int kAbsent = -1;

    CrossingTuple() = default;
    explicit CrossingTuple(int k) : slots_(static_cast<std::size_t>(k), kAbsent) {}

    static CrossingTuple full(std::vector<int> positions) {
        CrossingTuple t;
        t.slots_ = std::move(positions);
        for (int p : t.slots_)
            if (p < 0) throw InvalidInput("full tuple has a negative position");
        return t;
    }

    int k() const { return static_cast<int>(slots_.size()); }
    bool has(int cls) const { return slots_[static_cast<std::size_t>(cls)] >= 0; }
    int at(int cls) const { return slots_[static_cast<std::size_t>(cls)]; }
    void set(int cls, int pos) { slots_[static_cast<std::size_t>(cls)] = pos; }
    void unset(int cls) { slots_[static_cast<std::size_t>(cls)] = kAbsent; }

    int size() const {
        int n = 0;
        for (int p : slots_) n += (p >= 0);
        return n;
    }
    bool is_full() const { return size() == k(); }

    // For (k-1)-tuples: the one class with no position.
    int avoided_class() const {
        int found = -1;
        for (int c = 0; c < k(); ++c) {
            if (!has(c)) {
                if (found >= 0) return -1;
                found = c;
            }
        }
        return found;
    }

    bool contains(VertexRef v) const { return v.cls >= 0 && v.cls < k() && at(v.cls) == v.pos; }

    bool disjoint_from(const CrossingTuple& o) const {
        for (int c = 0; c < k(); ++c)
            if (has(c) && o.has(c) && at(c) == o.at(c)) return false;
        return true;
    }

    CrossingTuple with(VertexRef v) const {
        CrossingTuple t = *this;
        t.set(v.cls, v.pos);
        return t;
    }

    CrossingTuple without_class(int cls) const {
        CrossingTuple t = *this;
        t.unset(cls);
        return t;
    }

    // Drops class 0 and shifts the remaining classes down by one.
    CrossingTuple strip_first_class() const {
        CrossingTuple t;
        t.slots_.assign(slots_.begin() + 1, slots_.end());
        return t;
    }

    std::vector<VertexRef> vertices() const {
        std::vector<VertexRef> out;
        for (int c = 0; c < k(); ++c)
            if (has(c)) out.push_back({c, at(c)});
        return out;
    }

    const std::vector<int>& slots() const { return slots_; }

    std::string str() const {
        std::string s = "[";
        for (int c = 0; c < k(); ++c) {
            if (c) s += ",";
            s += has(c) ? std::to_string(at(c)) : std::string("_");
        }
        return s + "]";
    }

    auto operator<=>(const CrossingTuple&) const = default;

private:
    std::vector<int> slots_;
};

struct TupleHash {
    std::size_t operator()(const CrossingTuple& t) const {
        std::uint64_t h = 1469598103934665603ull;
        for (int p : t.slots()) {
            h ^= static_cast<std::uint64_t>(p) + 0x9E3779B97F4A7C15ull;
            h *= 1099511628211ull;
        }
        return static_cast<std::size_t>(h);
    }
};

// Per-class degree requirements a_1..a_k (0-based internally). total() is the
// sum over every class; tail_sum() leaves out class 0, which is the quantity
// the final assembly pipeline budgets around.
class DegreeProfile {
public:
    DegreeProfile() = default;
    explicit DegreeProfile(std::vector<int> entries) : a_(std::move(entries)) {
        for (int v : a_)
            if (v < 0) throw InvalidInput("degree profile entries must be non-negative");
    }

    int k() const { return static_cast<int>(a_.size()); }
    int at(int i) const { return a_[static_cast<std::size_t>(i)]; }
    const std::vector<int>& entries() const { return a_; }

    int total() const {
        int s = 0;
        for (int v : a_) s += v;
        return s;
    }
    int tail_sum() const {
        int s = 0;
        for (std::size_t i = 1; i < a_.size(); ++i) s += a_[i];
        return s;
    }

    // Largest entry, smallest class index among ties.
    int argmax() const {
        int best = 0;
        for (int i = 1; i < k(); ++i)
            if (a_[static_cast<std::size_t>(i)] > a_[static_cast<std::size_t>(best)]) best = i;
        return best;
    }

    bool operator==(const DegreeProfile&) const = default;

private:
    std::vector<int> a_;
};

// A set of pairwise-disjoint full crossing tuples, kept sorted.
struct Matching {
    std::vector<CrossingTuple> edges;

    int size() const { return static_cast<int>(edges.size()); }

    void add(const CrossingTuple& e) {
        edges.insert(std::lower_bound(edges.begin(), edges.end(), e), e);
    }
    void remove(const CrossingTuple& e) {
        auto it = std::lower_bound(edges.begin(), edges.end(), e);
        if (it != edges.end() && *it == e) edges.erase(it);
    }

    bool covers(VertexRef v) const {
        for (const auto& e : edges)
            if (e.contains(v)) return true;
        return false;
    }

    // Edge through v, if any.
    std::optional<CrossingTuple> edge_through(VertexRef v) const {
        for (const auto& e : edges)
            if (e.contains(v)) return e;
        return std::nullopt;
    }

    std::vector<VertexRef> vertex_set() const {
        std::vector<VertexRef> out;
        for (const auto& e : edges)
            for (auto v : e.vertices()) out.push_back(v);
        std::sort(out.begin(), out.end());
        return out;
    }
};

class KPartiteHypergraph;

// Per-class occupancy bitmap sized to a graph's position bounds. The workhorse
// for "disjoint from everything chosen so far" tests.
class VertexMask {
public:
    explicit VertexMask(const std::vector<int>& bounds) {
        bits_.reserve(bounds.size());
        counts_.assign(bounds.size(), 0);
        for (int b : bounds) bits_.emplace_back(static_cast<std::size_t>(b), 0);
    }

    bool test(VertexRef v) const { return bits_[static_cast<std::size_t>(v.cls)][static_cast<std::size_t>(v.pos)] != 0; }
    void add(VertexRef v) {
        auto& cell = bits_[static_cast<std::size_t>(v.cls)][static_cast<std::size_t>(v.pos)];
        if (!cell) { cell = 1; ++counts_[static_cast<std::size_t>(v.cls)]; }
    }
    void remove(VertexRef v) {
        auto& cell = bits_[static_cast<std::size_t>(v.cls)][static_cast<std::size_t>(v.pos)];
        if (cell) { cell = 0; --counts_[static_cast<std::size_t>(v.cls)]; }
    }
    void add_tuple(const CrossingTuple& t) {
        for (int c = 0; c < t.k(); ++c)
            if (t.has(c)) add({c, t.at(c)});
    }
    void remove_tuple(const CrossingTuple& t) {
        for (int c = 0; c < t.k(); ++c)
            if (t.has(c)) remove({c, t.at(c)});
    }
    bool intersects(const CrossingTuple& t) const {
        for (int c = 0; c < t.k(); ++c)
            if (t.has(c) && test({c, t.at(c)})) return true;
        return false;
    }
    int count_in_class(int cls) const { return counts_[static_cast<std::size_t>(cls)]; }

private:
    std::vector<std::vector<char>> bits_;
    std::vector<int> counts_;
};

// k-partite k-uniform hypergraph on classes V_0..V_{k-1}. Edges are full
// crossing tuples. Immutable after construction; induced() and link_graph()
// return new graphs. Removed vertices are tracked with per-class alive masks,
// positions are never renumbered.
class KPartiteHypergraph {
public:
    KPartiteHypergraph(int k, std::vector<int> class_sizes, std::vector<CrossingTuple> edges)
        : KPartiteHypergraph(k, class_sizes, all_alive(class_sizes), std::move(edges)) {}

    KPartiteHypergraph(int k, std::vector<int> class_sizes, std::vector<std::vector<char>> alive_in,
                       std::vector<CrossingTuple> edges)
        : k_(k), bounds_(std::move(class_sizes)), alive_(std::move(alive_in)), edges_(std::move(edges)) {
        if (k_ < 2) throw InvalidInput("k must be at least 2");
        if (static_cast<int>(bounds_.size()) != k_) throw InvalidInput("class_sizes length must equal k");
        for (int b : bounds_)
            if (b < 0) throw InvalidInput("class sizes must be non-negative");
        if (static_cast<int>(alive_.size()) != k_) throw InvalidInput("alive mask shape mismatch");
        alive_count_.assign(static_cast<std::size_t>(k_), 0);
        for (int c = 0; c < k_; ++c) {
            if (static_cast<int>(alive_[static_cast<std::size_t>(c)].size()) != bounds_[static_cast<std::size_t>(c)])
                throw InvalidInput("alive mask shape mismatch");
            for (char a : alive_[static_cast<std::size_t>(c)]) alive_count_[static_cast<std::size_t>(c)] += (a != 0);
        }
        std::sort(edges_.begin(), edges_.end());
        edge_set_.reserve(edges_.size() * 2);
        for (const auto& e : edges_) {
            if (e.k() != k_ || !e.is_full()) throw InvalidInput("edge is not a full crossing tuple: " + e.str());
            for (int c = 0; c < k_; ++c) {
                if (e.at(c) >= bounds_[static_cast<std::size_t>(c)])
                    throw InvalidInput("edge position out of range: " + e.str());
                if (!alive(c, e.at(c))) throw InvalidInput("edge uses a removed vertex: " + e.str());
            }
            if (!edge_set_.insert(e).second) throw InvalidInput("duplicate edge: " + e.str());
        }
        build_index();
    }

    int k() const { return k_; }
    const std::vector<int>& position_bounds() const { return bounds_; }
    int position_bound(int cls) const { return bounds_[static_cast<std::size_t>(cls)]; }
    int class_size(int cls) const { return alive_count_[static_cast<std::size_t>(cls)]; }

    int min_class_size() const {
        int m = std::numeric_limits<int>::max();
        for (int c = 0; c < k_; ++c) m = std::min(m, class_size(c));
        return m;
    }
    int max_class_size() const {
        int m = 0;
        for (int c = 0; c < k_; ++c) m = std::max(m, class_size(c));
        return m;
    }

    bool alive(int cls, int pos) const { return alive_[static_cast<std::size_t>(cls)][static_cast<std::size_t>(pos)] != 0; }
    bool alive(VertexRef v) const {
        return v.cls >= 0 && v.cls < k_ && v.pos >= 0 && v.pos < position_bound(v.cls) && alive(v.cls, v.pos);
    }
    const std::vector<std::vector<char>>& alive_masks() const { return alive_; }

    std::vector<int> alive_positions(int cls) const {
        std::vector<int> out;
        out.reserve(static_cast<std::size_t>(class_size(cls)));
        for (int p = 0; p < position_bound(cls); ++p)
            if (alive(cls, p)) out.push_back(p);
        return out;
    }

    const std::vector<CrossingTuple>& edges() const { return edges_; }
    std::size_t edge_count() const { return edges_.size(); }
    bool has_edge(const CrossingTuple& e) const { return edge_set_.contains(e); }

    // Completions of a crossing (k-1)-tuple in its avoided class, ascending.
    std::span<const int> neighbourhood(const CrossingTuple& s) const {
        int c = check_subtuple(s);
        const auto& index = nbr_[static_cast<std::size_t>(c)];
        auto it = index.find(s);
        if (it == index.end()) return {};
        return {it->second.data(), it->second.size()};
    }

    int degree(const CrossingTuple& s) const { return static_cast<int>(neighbourhood(s).size()); }

    // Minimum degree over every crossing (k-1)-tuple avoiding `cls`. When no
    // such tuple exists (an empty class elsewhere) the minimum is vacuous and
    // the largest conceivable degree, class_size(cls), is returned.
    int min_codegree_into(int cls) const {
        check_class(cls);
        long long total = count_crossing_tuples(cls);
        if (total == 0) return class_size(cls);
        const auto& index = nbr_[static_cast<std::size_t>(cls)];
        if (static_cast<long long>(index.size()) < total) return 0;
        int best = std::numeric_limits<int>::max();
        for (const auto& [s, completions] : index) best = std::min(best, static_cast<int>(completions.size()));
        return best;
    }

    long long vertex_degree(VertexRef v) const {
        if (!alive(v)) throw InvalidInput("vertex_degree of a missing vertex " + to_string(v));
        long long d = 0;
        for (const auto& e : edges_) d += e.contains(v);
        return d;
    }

    // Link of a class-0 vertex: the (k-1)-partite graph on classes 1..k-1
    // (shifted down by one) whose edges complete v to an edge here.
    KPartiteHypergraph link_graph(VertexRef v) const {
        if (v.cls != 0) throw InvalidInput("link_graph expects a class-0 vertex, got " + to_string(v));
        if (!alive(v)) throw InvalidInput("link_graph of a missing vertex " + to_string(v));
        std::vector<int> bounds(bounds_.begin() + 1, bounds_.end());
        std::vector<std::vector<char>> alive(alive_.begin() + 1, alive_.end());
        std::vector<CrossingTuple> links;
        for (const auto& e : edges_)
            if (e.at(0) == v.pos) links.push_back(e.strip_first_class());
        return {k_ - 1, std::move(bounds), std::move(alive), std::move(links)};
    }

    // Same class index space, listed vertices removed, edges filtered.
    KPartiteHypergraph induced(const std::vector<VertexRef>& removed) const {
        auto alive = alive_;
        for (auto v : removed) {
            if (v.cls < 0 || v.cls >= k_ || v.pos < 0 || v.pos >= position_bound(v.cls))
                throw InvalidInput("induced: vertex out of range " + to_string(v));
            alive[static_cast<std::size_t>(v.cls)][static_cast<std::size_t>(v.pos)] = 0;
        }
        std::vector<CrossingTuple> kept;
        kept.reserve(edges_.size());
        for (const auto& e : edges_) {
            bool ok = true;
            for (int c = 0; c < k_ && ok; ++c)
                ok = alive[static_cast<std::size_t>(c)][static_cast<std::size_t>(e.at(c))] != 0;
            if (ok) kept.push_back(e);
        }
        return {k_, bounds_, std::move(alive), std::move(kept)};
    }

    bool fully_alive() const {
        for (int c = 0; c < k_; ++c)
            if (class_size(c) != position_bound(c)) return false;
        return true;
    }

    // Visits every alive crossing tuple that avoids `avoided_cls` (-1 for full
    // tuples) in lexicographic order.
    template <class F>
    void for_each_crossing_tuple(int avoided_cls, F&& fn) const {
        std::vector<int> classes;
        std::vector<std::vector<int>> choices;
        for (int c = 0; c < k_; ++c) {
            if (c == avoided_cls) continue;
            classes.push_back(c);
            choices.push_back(alive_positions(c));
            if (choices.back().empty()) return;
        }
        CrossingTuple t(k_);
        std::vector<std::size_t> idx(classes.size(), 0);
        while (true) {
            for (std::size_t i = 0; i < classes.size(); ++i)
                t.set(classes[i], choices[i][idx[i]]);
            fn(static_cast<const CrossingTuple&>(t));
            std::size_t i = classes.size();
            while (i > 0) {
                --i;
                if (++idx[i] < choices[i].size()) break;
                idx[i] = 0;
                if (i == 0) return;
            }
        }
    }

    long long count_crossing_tuples(int avoided_cls) const {
        long long total = 1;
        for (int c = 0; c < k_; ++c) {
            if (c == avoided_cls) continue;
            total *= class_size(c);
            if (total == 0) return 0;
        }
        return total;
    }

private:
    static std::vector<std::vector<char>> all_alive(const std::vector<int>& bounds) {
        std::vector<std::vector<char>> m;
        m.reserve(bounds.size());
        for (int b : bounds) m.emplace_back(static_cast<std::size_t>(std::max(b, 0)), 1);
        return m;
    }

    void check_class(int cls) const {
        if (cls < 0 || cls >= k_) throw InvalidInput("class index out of range: " + std::to_string(cls));
    }

    int check_subtuple(const CrossingTuple& s) const {
        if (s.k() != k_ || s.size() != k_ - 1)
            throw InvalidInput("degree queries need a crossing (k-1)-tuple, got " + s.str());
        for (int c = 0; c < k_; ++c) {
            if (!s.has(c)) continue;
            if (s.at(c) >= position_bound(c) || !alive(c, s.at(c)))
                throw InvalidInput("tuple uses a missing vertex: " + s.str());
        }
        return s.avoided_class();
    }

    void build_index() {
        nbr_.assign(static_cast<std::size_t>(k_), {});
        for (const auto& e : edges_) {
            for (int c = 0; c < k_; ++c)
                nbr_[static_cast<std::size_t>(c)][e.without_class(c)].push_back(e.at(c));
        }
        // Edge order is lexicographic, which does not sort completions for
        // every key; normalize so neighbourhood() is ascending.
        for (auto& index : nbr_)
            for (auto& [s, completions] : index) std::sort(completions.begin(), completions.end());
    }

    int k_;
    std::vector<int> bounds_;
    std::vector<std::vector<char>> alive_;
    std::vector<int> alive_count_;
    std::vector<CrossingTuple> edges_;
    std::unordered_set<CrossingTuple, TupleHash> edge_set_;
    std::vector<std::unordered_map<CrossingTuple, std::vector<int>, TupleHash>> nbr_;
};

struct ValidationResult {
    bool ok = true;
    std::string violation;
};

// Checks edge membership first, then pairwise disjointness, each in
// lexicographic order, and reports the first failure.
inline ValidationResult validate_matching(const KPartiteHypergraph& h, const Matching& m) {
    std::vector<CrossingTuple> edges = m.edges;
    std::sort(edges.begin(), edges.end());
    for (const auto& e : edges) {
        if (e.k() != h.k() || !e.is_full()) return {false, "tuple " + e.str() + " is not a full crossing tuple"};
        for (int c = 0; c < h.k(); ++c)
            if (e.at(c) < 0 || e.at(c) >= h.position_bound(c) || !h.alive(c, e.at(c)))
                return {false, "tuple " + e.str() + " uses a missing vertex"};
        if (!h.has_edge(e)) return {false, "tuple " + e.str() + " is not an edge"};
    }
    for (std::size_t i = 0; i < edges.size(); ++i)
        for (std::size_t j = i + 1; j < edges.size(); ++j)
            if (!edges[i].disjoint_from(edges[j]))
                return {false, "tuples " + edges[i].str() + " and " + edges[j].str() + " intersect"};
    return {};
}

// Lexicographically smallest full (or class-avoiding) crossing tuple of alive
// vertices not touching `used`. With a product structure this is just the
// smallest free position per class.
inline std::optional<CrossingTuple> smallest_free_tuple(const KPartiteHypergraph& h, int avoided_cls,
                                                        const VertexMask& used) {
    CrossingTuple t(h.k());
    for (int c = 0; c < h.k(); ++c) {
        if (c == avoided_cls) continue;
        int chosen = -1;
        for (int p = 0; p < h.position_bound(c); ++p) {
            if (h.alive(c, p) && !used.test({c, p})) {
                chosen = p;
                break;
            }
        }
        if (chosen < 0) return std::nullopt;
        t.set(c, chosen);
    }
    return t;
}

// First failing class of a per-member codegree requirement, or -1.
inline int first_class_below_profile(const KPartiteHypergraph& h, const DegreeProfile& profile) {
    if (profile.k() != h.k()) throw InvalidInput("profile arity does not match graph");
    for (int c = 0; c < h.k(); ++c)
        if (h.min_codegree_into(c) < profile.at(c)) return c;
    return -1;
}

}  // namespace kpm
