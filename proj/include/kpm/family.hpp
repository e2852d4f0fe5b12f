#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "kpm/core.hpp"
#include "kpm/errors.hpp"

namespace kpm {

// An ordered family H_0..H_{t-1} of k-partite graphs on one shared vertex set
// (same bounds, same alive masks). Members double as colours. Subfamilies and
// induced copies keep the original colour labels so results from a restricted
// family read back directly against the input.
class Family {
public:
    explicit Family(std::vector<KPartiteHypergraph> members) : members_(std::move(members)) {
        labels_.resize(members_.size());
        for (std::size_t i = 0; i < labels_.size(); ++i) labels_[i] = static_cast<int>(i);
        validate();
    }

    Family(std::vector<KPartiteHypergraph> members, std::vector<int> labels)
        : members_(std::move(members)), labels_(std::move(labels)) {
        validate();
    }

    int k() const { return members_.front().k(); }
    int size() const { return static_cast<int>(members_.size()); }

    const KPartiteHypergraph& member(int idx) const { return members_[static_cast<std::size_t>(idx)]; }
    int label(int idx) const { return labels_[static_cast<std::size_t>(idx)]; }
    const std::vector<int>& labels() const { return labels_; }

    int index_of(int label) const {
        for (std::size_t i = 0; i < labels_.size(); ++i)
            if (labels_[i] == label) return static_cast<int>(i);
        return -1;
    }

    const std::vector<int>& position_bounds() const { return members_.front().position_bounds(); }
    int position_bound(int cls) const { return members_.front().position_bound(cls); }
    int class_size(int cls) const { return members_.front().class_size(cls); }
    int min_class_size() const { return members_.front().min_class_size(); }
    int max_class_size() const { return members_.front().max_class_size(); }
    bool alive(VertexRef v) const { return members_.front().alive(v); }
    std::vector<int> alive_positions(int cls) const { return members_.front().alive_positions(cls); }

    // Restriction keeps the declared multiplicity bound: every surviving
    // tuple keeps its member count. Dropping members does not, so subfamilies
    // start over.
    Family induced(const std::vector<VertexRef>& removed) const {
        std::vector<KPartiteHypergraph> out;
        out.reserve(members_.size());
        for (const auto& h : members_) out.push_back(h.induced(removed));
        Family f{std::move(out), labels_};
        f.declared_m = declared_m;
        return f;
    }

    Family subfamily(const std::vector<int>& indices) const {
        std::vector<KPartiteHypergraph> out;
        std::vector<int> labs;
        out.reserve(indices.size());
        labs.reserve(indices.size());
        for (int i : indices) {
            if (i < 0 || i >= size()) throw InvalidInput("subfamily index out of range");
            out.push_back(members_[static_cast<std::size_t>(i)]);
            labs.push_back(labels_[static_cast<std::size_t>(i)]);
        }
        return {std::move(out), std::move(labs)};
    }

    // Caller-asserted lower bound on the multiplicity of every crossing
    // tuple, for instances too big to enumerate.
    std::optional<int> declared_m;

    // Per class, the worst codegree over the whole family. The largest profile
    // every member satisfies simultaneously.
    DegreeProfile min_codegree_profile() const {
        std::vector<int> a(static_cast<std::size_t>(k()), 0);
        for (int c = 0; c < k(); ++c) {
            int best = members_.front().min_codegree_into(c);
            for (std::size_t j = 1; j < members_.size(); ++j)
                best = std::min(best, members_[j].min_codegree_into(c));
            a[static_cast<std::size_t>(c)] = best;
        }
        return DegreeProfile(std::move(a));
    }

private:
    void validate() const {
        if (members_.empty()) throw InvalidInput("family must have at least one member");
        if (labels_.size() != members_.size()) throw InvalidInput("family label count mismatch");
        const auto& first = members_.front();
        for (const auto& h : members_) {
            if (h.k() != first.k()) throw InvalidInput("family members disagree on k");
            if (h.position_bounds() != first.position_bounds())
                throw InvalidInput("family members disagree on class sizes");
            if (h.alive_masks() != first.alive_masks())
                throw InvalidInput("family members disagree on removed vertices");
        }
        std::vector<int> sorted = labels_;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
            throw InvalidInput("family colour labels must be distinct");
    }

    std::vector<KPartiteHypergraph> members_;
    std::vector<int> labels_;
};

inline Family identical_family(const KPartiteHypergraph& h, int t) {
    if (t < 1) throw InvalidInput("family size must be positive");
    return Family(std::vector<KPartiteHypergraph>(static_cast<std::size_t>(t), h));
}

struct RainbowEdge {
    int colour = 0;  // external label, not a position in some subfamily
    CrossingTuple edge;
    auto operator<=>(const RainbowEdge&) const = default;
};

// Pairwise-disjoint edges with pairwise-distinct colours, kept sorted by
// colour label.
struct RainbowMatching {
    std::vector<RainbowEdge> edges;

    int size() const { return static_cast<int>(edges.size()); }

    bool has_colour(int colour) const {
        return std::any_of(edges.begin(), edges.end(), [&](const RainbowEdge& r) { return r.colour == colour; });
    }

    std::optional<CrossingTuple> edge_of(int colour) const {
        for (const auto& r : edges)
            if (r.colour == colour) return r.edge;
        return std::nullopt;
    }

    void add(int colour, const CrossingTuple& e) {
        RainbowEdge r{colour, e};
        edges.insert(std::lower_bound(edges.begin(), edges.end(), r), r);
    }
    void remove_colour(int colour) {
        std::erase_if(edges, [&](const RainbowEdge& r) { return r.colour == colour; });
    }

    std::vector<int> colours() const {
        std::vector<int> out;
        out.reserve(edges.size());
        for (const auto& r : edges) out.push_back(r.colour);
        return out;
    }

    bool covers(VertexRef v) const {
        for (const auto& r : edges)
            if (r.edge.contains(v)) return true;
        return false;
    }

    std::optional<RainbowEdge> edge_through(VertexRef v) const {
        for (const auto& r : edges)
            if (r.edge.contains(v)) return r;
        return std::nullopt;
    }

    std::vector<VertexRef> vertex_set() const {
        std::vector<VertexRef> out;
        for (const auto& r : edges)
            for (auto v : r.edge.vertices()) out.push_back(v);
        std::sort(out.begin(), out.end());
        return out;
    }

    Matching plain() const {
        Matching m;
        for (const auto& r : edges) m.add(r.edge);
        return m;
    }
};

// Colour membership first (in colour order), then pairwise disjointness.
inline ValidationResult validate_rainbow(const Family& fam, const RainbowMatching& rm) {
    for (std::size_t i = 0; i + 1 < rm.edges.size(); ++i)
        if (rm.edges[i].colour == rm.edges[i + 1].colour)
            return {false, "colour " + std::to_string(rm.edges[i].colour) + " used twice"};
    for (const auto& r : rm.edges) {
        int idx = fam.index_of(r.colour);
        if (idx < 0) return {false, "colour " + std::to_string(r.colour) + " is not in the family"};
        if (!fam.member(idx).has_edge(r.edge))
            return {false, "tuple " + r.edge.str() + " is not an edge of colour " + std::to_string(r.colour)};
    }
    for (std::size_t i = 0; i < rm.edges.size(); ++i)
        for (std::size_t j = i + 1; j < rm.edges.size(); ++j)
            if (!rm.edges[i].edge.disjoint_from(rm.edges[j].edge))
                return {false, "tuples " + rm.edges[i].edge.str() + " and " + rm.edges[j].edge.str() + " intersect"};
    return {};
}

}  // namespace kpm
