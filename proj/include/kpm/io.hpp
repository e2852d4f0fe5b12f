#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "kpm/core.hpp"
#include "kpm/errors.hpp"
#include "kpm/family.hpp"

namespace kpm::io {

using json = nlohmann::ordered_json;

// Serialized graphs never carry alive masks: removal is an in-memory notion.
inline void require_fully_alive(const KPartiteHypergraph& h) {
    if (!h.fully_alive()) throw InvalidInput("cannot serialize a graph with removed vertices");
}

inline json graph_to_json(const KPartiteHypergraph& h) {
    require_fully_alive(h);
    json j;
    j["k"] = h.k();
    j["class_sizes"] = h.position_bounds();
    json edges = json::array();
    for (const auto& e : h.edges()) edges.push_back(e.slots());
    j["edges"] = std::move(edges);
    return j;
}

// The canonical form: fixed key order, lexicographically sorted edges, compact
// separators, no trailing whitespace. Equal graphs serialize to equal bytes.
inline std::string canonical_instance(const KPartiteHypergraph& h) { return graph_to_json(h).dump(); }

inline std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

// Content-derived identifier: hash of the canonical serialization.
inline std::string instance_id(const KPartiteHypergraph& h) {
    static const char* digits = "0123456789abcdef";
    std::uint64_t v = fnv1a64(canonical_instance(h));
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[v & 0xf];
        v >>= 4;
    }
    return out;
}

inline std::vector<CrossingTuple> edges_from_json(const json& arr, int k) {
    if (!arr.is_array()) throw InvalidInput("edges must be an array");
    std::vector<CrossingTuple> edges;
    edges.reserve(arr.size());
    for (const auto& row : arr) {
        if (!row.is_array() || static_cast<int>(row.size()) != k)
            throw InvalidInput("each edge must list exactly k positions");
        std::vector<int> slots;
        slots.reserve(row.size());
        for (const auto& cell : row) {
            if (!cell.is_number_integer()) throw InvalidInput("edge positions must be integers");
            slots.push_back(cell.get<int>());
        }
        edges.push_back(CrossingTuple::full(std::move(slots)));
    }
    return edges;
}

inline KPartiteHypergraph graph_from_json(const json& j) {
    if (!j.is_object()) throw InvalidInput("instance must be a JSON object");
    if (!j.contains("k") || !j.contains("class_sizes") || !j.contains("edges"))
        throw InvalidInput("instance needs keys k, class_sizes, edges");
    if (!j["k"].is_number_integer()) throw InvalidInput("k must be an integer");
    int k = j["k"].get<int>();
    if (!j["class_sizes"].is_array()) throw InvalidInput("class_sizes must be an array");
    std::vector<int> sizes;
    for (const auto& cell : j["class_sizes"]) {
        if (!cell.is_number_integer()) throw InvalidInput("class sizes must be integers");
        sizes.push_back(cell.get<int>());
    }
    return {k, std::move(sizes), edges_from_json(j["edges"], k)};
}

inline json family_to_json(const Family& fam) {
    for (int j = 0; j < fam.size(); ++j) require_fully_alive(fam.member(j));
    json out;
    out["k"] = fam.k();
    out["class_sizes"] = fam.position_bounds();
    json members = json::array();
    for (int j = 0; j < fam.size(); ++j) {
        json edges = json::array();
        for (const auto& e : fam.member(j).edges()) edges.push_back(e.slots());
        members.push_back(std::move(edges));
    }
    out["members"] = std::move(members);
    return out;
}

inline Family family_from_json(const json& j) {
    if (!j.is_object()) throw InvalidInput("family must be a JSON object");
    if (!j.contains("k") || !j.contains("class_sizes") || !j.contains("members"))
        throw InvalidInput("family needs keys k, class_sizes, members");
    if (!j["k"].is_number_integer()) throw InvalidInput("k must be an integer");
    int k = j["k"].get<int>();
    std::vector<int> sizes;
    if (!j["class_sizes"].is_array()) throw InvalidInput("class_sizes must be an array");
    for (const auto& cell : j["class_sizes"]) {
        if (!cell.is_number_integer()) throw InvalidInput("class sizes must be integers");
        sizes.push_back(cell.get<int>());
    }
    if (!j["members"].is_array() || j["members"].empty())
        throw InvalidInput("members must be a non-empty array of edge lists");
    std::vector<KPartiteHypergraph> members;
    for (const auto& edge_list : j["members"])
        members.emplace_back(k, sizes, edges_from_json(edge_list, k));
    return Family(std::move(members));
}

inline json matching_to_json(const Matching& m) {
    json out = json::array();
    for (const auto& e : m.edges) out.push_back(e.slots());
    return out;
}

inline json rainbow_to_json(const RainbowMatching& rm) {
    json out = json::array();
    for (const auto& r : rm.edges) {
        json row;
        row["colour"] = r.colour;
        row["edge"] = r.edge.slots();
        out.push_back(std::move(row));
    }
    return out;
}

inline std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidInput("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw InvalidInput("cannot write " + path);
    out << content;
    if (!out) throw InvalidInput("write failed for " + path);
}

inline json parse_json(const std::string& text, const std::string& what) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw InvalidInput(what + " is not valid JSON");
    return j;
}

inline KPartiteHypergraph load_instance(const std::string& path) {
    return graph_from_json(parse_json(read_text(path), path));
}

inline Family load_family(const std::string& path) {
    return family_from_json(parse_json(read_text(path), path));
}

inline void write_instance(const std::string& path, const KPartiteHypergraph& h) {
    write_text(path, canonical_instance(h));
}

}  // namespace kpm::io
