#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kpm/constructions.hpp"
#include "kpm/core.hpp"
#include "kpm/driver.hpp"
#include "kpm/errors.hpp"
#include "kpm/family.hpp"
#include "kpm/io.hpp"
#include "kpm/oracles.hpp"
#include "kpm/rainbow.hpp"
#include "kpm/sweep.hpp"

namespace {

using kpm::io::json;

constexpr const char* kVersionLine = "kpm 0.1.0 (format version 1)";

// Exit map: 0 success/pass, 1 malformed input, 2 fail/shortfall/unmet, 3 inconclusive.
constexpr int kOk = 0;
constexpr int kBadInput = 1;
constexpr int kFail = 2;
constexpr int kInconclusive = 3;

std::vector<int> parse_int_list(const std::string& text) {
    std::vector<int> out;
    std::string cur;
    for (char ch : text + ",") {
        if (ch == ',') {
            if (!cur.empty()) out.push_back(std::stoi(cur));
            cur.clear();
        } else {
            cur += ch;
        }
    }
    return out;
}

kpm::Mode parse_mode(const std::string& text) {
    if (text == "guaranteed") return kpm::Mode::guaranteed;
    if (text == "best_effort") return kpm::Mode::best_effort;
    throw kpm::InvalidInput("mode must be guaranteed or best_effort");
}

kpm::DegreeProfile profile_or_computed(const std::string& flag, const kpm::KPartiteHypergraph& h) {
    if (!flag.empty()) return kpm::DegreeProfile(parse_int_list(flag));
    std::vector<int> a(static_cast<std::size_t>(h.k()));
    for (int c = 0; c < h.k(); ++c) a[static_cast<std::size_t>(c)] = h.min_codegree_into(c);
    return kpm::DegreeProfile(a);
}

kpm::DegreeProfile family_profile_or_computed(const std::string& flag, const kpm::Family& fam) {
    if (!flag.empty()) return kpm::DegreeProfile(parse_int_list(flag));
    return fam.min_codegree_profile();
}

json vertex_list_json(const std::vector<kpm::VertexRef>& set) {
    json arr = json::array();
    for (auto v : set) arr.push_back(json::array({v.cls, v.pos}));
    return arr;
}

json rainbow_run_json(const kpm::RainbowRunResult& rr) {
    json j;
    j["target"] = rr.target;
    j["size"] = rr.matching.size();
    j["reached_target"] = rr.reached_target;
    j["matching"] = kpm::io::rainbow_to_json(rr.matching);
    if (!rr.missing_colours.empty()) j["missing_colours"] = rr.missing_colours;
    if (!rr.note.empty()) j["note"] = rr.note;
    return j;
}

json driver_report_json(const kpm::DriverReport& rep) {
    json j;
    j["regime"] = kpm::to_string(rep.regime);
    j["branch"] = rep.branch;
    if (rep.branch_overridden) j["branch_overridden"] = true;
    j["class_order"] = rep.class_order;
    j["profile_used"] = rep.profile_used;
    j["n"] = rep.n;
    j["q"] = rep.q_value;
    j["target"] = rep.target;
    j["stage"] = {{"x_size", rep.x_size},
                  {"y_size", rep.y_size},
                  {"z_size", rep.z_size},
                  {"rainbow_size", rep.rainbow_size},
                  {"hall_saturated", rep.hall_saturated}};
    j["trace"] = rep.trace;
    j["size"] = rep.matching.size();
    j["matching"] = kpm::io::matching_to_json(rep.matching);
    j["status"] = rep.status;
    return j;
}

void emit(const json& j) { std::cout << j.dump() << "\n"; }

struct GenArgs {
    std::string construction;
    int k = 3;
    int n = 2;
    std::string sizes;
    std::string profile;
    std::string density = "1/2";
    std::uint64_t seed = 0;
    std::string out;
};

int cmd_gen(const GenArgs& a) {
    kpm::ConstructionResult res = [&] {
        if (a.construction == "complete") return kpm::complete_graph(a.k, a.n);
        if (a.construction == "divisibility") {
            std::optional<std::vector<int>> sizes;
            if (!a.sizes.empty()) sizes = parse_int_list(a.sizes);
            return kpm::divisibility_barrier(a.k, a.n, sizes);
        }
        if (a.construction == "space") {
            if (a.profile.empty()) throw kpm::InvalidInput("space needs --profile");
            return kpm::space_barrier(a.k, a.n, kpm::DegreeProfile(parse_int_list(a.profile)));
        }
        if (a.construction == "random") {
            if (a.profile.empty()) throw kpm::InvalidInput("random needs --profile");
            return kpm::random_instance(a.k, a.n, kpm::DegreeProfile(parse_int_list(a.profile)),
                                        kpm::Rational::parse(a.density), a.seed);
        }
        throw kpm::InvalidInput("construction must be complete, divisibility, space, or random");
    }();
    kpm::io::write_instance(a.out, res.graph);
    json meta;
    meta["construction"] = res.construction;
    meta["parameters"] = res.parameters;
    meta["A_sets"] = res.a_sets;
    kpm::io::write_text(a.out + ".meta.json", meta.dump(2) + "\n");
    json j;
    j["instance_id"] = kpm::io::instance_id(res.graph);
    j["out"] = a.out;
    j["edges"] = res.graph.edge_count();
    emit(j);
    return kOk;
}

struct SolveArgs {
    std::string instance;
    std::string algorithm;
    std::string profile;
    std::string mode = "best_effort";
    std::string check;
    std::string branch;
    long long budget_nodes = kpm::OracleBudget{}.max_nodes;
    double budget_seconds = kpm::OracleBudget{}.max_seconds;
};

int cmd_solve(const SolveArgs& a) {
    kpm::KPartiteHypergraph h = kpm::io::load_instance(a.instance);
    kpm::DegreeProfile prof = profile_or_computed(a.profile, h);
    kpm::OracleBudget budget{a.budget_nodes, a.budget_seconds};

    if (a.algorithm == "oracle") {
        if (!a.check.empty()) {
            kpm::BoundCheck which;
            if (a.check == "fact_1_5") which = kpm::BoundCheck::fact_1_5;
            else if (a.check == "thm_main") which = kpm::BoundCheck::thm_main;
            else if (a.check == "thm_1_7") which = kpm::BoundCheck::thm_1_7;
            else throw kpm::InvalidInput("check must be fact_1_5, thm_main, or thm_1_7");
            kpm::VerifyReport rep = kpm::verify_theorem_bound(h, prof, which, budget);
            json j = kpm::verify_report_to_json(rep);
            j["witness"] = kpm::io::matching_to_json(rep.witness);
            emit(j);
            if (rep.status == "fail") return kFail;
            if (rep.status == "inconclusive") return kInconclusive;
            if (rep.status == "hypothesis_unmet") return kFail;
            return kOk;
        }
        auto res = kpm::max_matching_exact(h, budget);
        json j;
        j["instance_id"] = kpm::io::instance_id(h);
        j["size"] = res.size;
        j["exact"] = res.exact;
        j["nodes"] = res.nodes;
        j["matching"] = kpm::io::matching_to_json(res.witness);
        emit(j);
        return res.exact ? kOk : kInconclusive;
    }
    if (a.algorithm == "fact15") {
        kpm::Matching m = kpm::fact_1_5_matching(h, prof);
        int n = h.min_class_size();
        int target = std::max(0, std::min(n - h.k() + 2, prof.total()));
        json j;
        j["instance_id"] = kpm::io::instance_id(h);
        j["target"] = target;
        j["size"] = m.size();
        j["matching"] = kpm::io::matching_to_json(m);
        emit(j);
        return m.size() >= target ? kOk : kFail;
    }
    if (a.algorithm == "thm17") {
        kpm::DriverConfig cfg;
        cfg.regime = parse_mode(a.mode);
        cfg.budget = budget;
        if (!a.branch.empty()) cfg.branch_override = a.branch;
        kpm::DriverReport rep = kpm::run_pipeline(h, prof, cfg);
        emit(driver_report_json(rep));
        return rep.status == "success" ? kOk : kFail;
    }
    throw kpm::InvalidInput("algorithm must be oracle, fact15, or thm17");
}

struct RainbowArgs {
    std::string family;
    std::string instance;
    int colours = 0;
    std::string algorithm;
    std::string profile;
    int m = 0;
    std::string require_colours;
    std::string epsilon;
    std::string mode = "best_effort";
    std::string capacity = "1";
    std::optional<int> declared_m;
    long long budget_nodes = kpm::OracleBudget{}.max_nodes;
    double budget_seconds = kpm::OracleBudget{}.max_seconds;
};

int cmd_rainbow(const RainbowArgs& a) {
    kpm::Family fam = [&] {
        if (!a.family.empty()) return kpm::io::load_family(a.family);
        if (a.instance.empty()) throw kpm::InvalidInput("need --family or --instance with --colours");
        if (a.colours < 1) throw kpm::InvalidInput("--colours must be positive");
        return kpm::identical_family(kpm::io::load_instance(a.instance), a.colours);
    }();
    if (a.declared_m) fam.declared_m = a.declared_m;
    kpm::DegreeProfile prof = family_profile_or_computed(a.profile, fam);
    kpm::RainbowConfig cfg;
    cfg.mode = parse_mode(a.mode);
    cfg.budget = {a.budget_nodes, a.budget_seconds};
    cfg.pokrovskiy_capacity = kpm::Rational::parse(a.capacity);

    if (a.algorithm == "oracle") {
        auto res = kpm::max_rainbow_matching_exact(fam, cfg.budget);
        json j;
        j["size"] = res.size;
        j["exact"] = res.exact;
        j["nodes"] = res.nodes;
        j["matching"] = kpm::io::rainbow_to_json(res.witness);
        emit(j);
        return res.exact ? kOk : kInconclusive;
    }
    if (a.algorithm == "lemma21") {
        std::vector<int> req = a.require_colours.empty() ? std::vector<int>{} : parse_int_list(a.require_colours);
        auto rr = kpm::almost_perfect_rainbow(fam, prof, a.m, req, cfg);
        emit(rainbow_run_json(rr));
        return rr.reached_target && rr.missing_colours.empty() ? kOk : kFail;
    }
    if (a.algorithm == "lemma25") {
        auto rr = kpm::rainbow_m_plus_q(fam, prof, a.m, cfg);
        emit(rainbow_run_json(rr));
        return rr.reached_target ? kOk : kFail;
    }
    if (a.algorithm == "pokrovskiy") {
        auto rr = kpm::pokrovskiy_rainbow(fam, prof, cfg);
        emit(rainbow_run_json(rr));
        return rr.reached_target ? kOk : kFail;
    }
    if (a.algorithm == "lemma22") {
        kpm::Rational eps = a.epsilon.empty() ? kpm::eta_default(fam.k()) : kpm::Rational::parse(a.epsilon);
        auto out = kpm::rainbow_or_dominating(fam, prof, eps, cfg);
        json j;
        if (out.kind == kpm::StabilityOutcome::Kind::perfect_rainbow) {
            j["outcome"] = "perfect_rainbow";
            j["matching"] = kpm::io::rainbow_to_json(out.rainbow);
        } else if (out.kind == kpm::StabilityOutcome::Kind::dominated_colours) {
            j["outcome"] = "dominated_colours";
            json arr = json::array();
            for (const auto& d : out.dominated) {
                json row;
                row["colour"] = d.colour;
                row["dominating_set"] = vertex_list_json(d.dom_set);
                row["certified"] = d.certified;
                arr.push_back(std::move(row));
            }
            j["dominated"] = std::move(arr);
        } else {
            j["outcome"] = "inconclusive";
        }
        if (!out.note.empty()) j["note"] = out.note;
        emit(j);
        return out.kind == kpm::StabilityOutcome::Kind::inconclusive ? kInconclusive : kOk;
    }
    throw kpm::InvalidInput("algorithm must be oracle, lemma21, lemma25, pokrovskiy, or lemma22");
}

void append_generated_jobs(std::vector<kpm::SweepJob>& jobs, const json& entry) {
    std::string cons = entry.at("construction").get<std::string>();
    int k = entry.at("k").get<int>();
    int n = entry.at("n").get<int>();
    if (cons == "complete") {
        jobs.push_back({"complete(k=" + std::to_string(k) + ",n=" + std::to_string(n) + ")",
                        kpm::complete_graph(k, n).graph});
        return;
    }
    if (cons == "divisibility") {
        std::optional<std::vector<int>> sizes;
        if (entry.contains("sizes")) sizes = entry.at("sizes").get<std::vector<int>>();
        auto res = kpm::divisibility_barrier(k, n, sizes);
        jobs.push_back({"divisibility(k=" + std::to_string(k) + ",n=" + std::to_string(n) + ")",
                        std::move(res.graph)});
        return;
    }
    if (cons == "space") {
        kpm::DegreeProfile prof(entry.at("profile").get<std::vector<int>>());
        auto res = kpm::space_barrier(k, n, prof);
        jobs.push_back({"space(k=" + std::to_string(k) + ",n=" + std::to_string(n) + ")",
                        std::move(res.graph)});
        return;
    }
    if (cons == "random") {
        kpm::DegreeProfile prof(entry.at("profile").get<std::vector<int>>());
        kpm::Rational density = kpm::Rational::parse(
            entry.contains("density") ? entry.at("density").get<std::string>() : std::string("1/2"));
        std::vector<std::uint64_t> seeds;
        if (entry.contains("seeds"))
            for (const auto& s : entry.at("seeds")) seeds.push_back(s.get<std::uint64_t>());
        if (entry.contains("seed_base")) {
            auto base = entry.at("seed_base").get<std::uint64_t>();
            auto count = entry.at("seed_count").get<std::uint64_t>();
            for (std::uint64_t i = 0; i < count; ++i) seeds.push_back(base + i);
        }
        if (seeds.empty()) seeds.push_back(0);
        for (auto s : seeds) {
            auto res = kpm::random_instance(k, n, prof, density, s);
            jobs.push_back({"random(k=" + std::to_string(k) + ",n=" + std::to_string(n) +
                                ",seed=" + std::to_string(s) + ")",
                            std::move(res.graph)});
        }
        return;
    }
    throw kpm::InvalidInput("unknown construction in sweep spec: " + cons);
}

void append_exhaustive_jobs(std::vector<kpm::SweepJob>& jobs, const json& grid) {
    int k = grid.at("k").get<int>();
    int n = grid.at("n").get<int>();
    kpm::KPartiteHypergraph full = kpm::complete_graph(k, n).graph;
    const auto& tuples = full.edges();
    if (tuples.size() > 20) throw kpm::InvalidInput("exhaustive grid too large: 2^" + std::to_string(tuples.size()));
    std::uint64_t limit = 1ull << tuples.size();
    std::vector<int> bounds(static_cast<std::size_t>(k), n);
    for (std::uint64_t mask = 0; mask < limit; ++mask) {
        std::vector<kpm::CrossingTuple> edges;
        for (std::size_t i = 0; i < tuples.size(); ++i)
            if (mask >> i & 1) edges.push_back(tuples[i]);
        jobs.push_back({"exhaustive(k=" + std::to_string(k) + ",n=" + std::to_string(n) + ")#" +
                            std::to_string(mask),
                        kpm::KPartiteHypergraph(k, bounds, std::move(edges))});
    }
}

struct SweepArgs {
    std::string spec;
    int workers = 1;
    std::string out;
    long long budget_nodes = kpm::OracleBudget{}.max_nodes;
    double budget_seconds = kpm::OracleBudget{}.max_seconds;
};

int cmd_sweep(const SweepArgs& a) {
    json spec = kpm::io::parse_json(kpm::io::read_text(a.spec), "sweep spec");
    if (!spec.contains("instances") || !spec.at("instances").is_array())
        throw kpm::InvalidInput("sweep spec needs an instances array");
    std::vector<kpm::SweepJob> jobs;
    for (const auto& entry : spec.at("instances")) {
        if (entry.contains("path")) {
            std::string path = entry.at("path").get<std::string>();
            jobs.push_back({path, kpm::io::load_instance(path)});
        } else if (entry.contains("exhaustive")) {
            append_exhaustive_jobs(jobs, entry.at("exhaustive"));
        } else if (entry.contains("construction")) {
            append_generated_jobs(jobs, entry);
        } else {
            throw kpm::InvalidInput("sweep entry needs path, exhaustive, or construction");
        }
    }
    auto outcome = kpm::run_verification_sweep(jobs, a.workers, {a.budget_nodes, a.budget_seconds});
    kpm::io::write_text(a.out + ".jsonl", kpm::sweep_jsonl(outcome.rows));
    kpm::io::write_text(a.out + ".csv", kpm::sweep_csv(outcome.rows));
    json j;
    j["rows"] = outcome.rows.size();
    j["hard_fail"] = outcome.hard_fail;
    j["jsonl"] = a.out + ".jsonl";
    j["csv"] = a.out + ".csv";
    emit(j);
    return outcome.hard_fail ? kFail : kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"matchings, rainbow matchings, and codegree bounds in k-partite k-graphs"};
    app.set_version_flag("--version", kVersionLine);
    app.require_subcommand(1);

    GenArgs ga;
    auto* gen = app.add_subcommand("gen", "write a constructed instance and its metadata side-record");
    gen->add_option("--construction", ga.construction, "complete | divisibility | space | random")->required();
    gen->add_option("--k", ga.k, "number of vertex classes")->required();
    gen->add_option("--n", ga.n, "class size")->required();
    gen->add_option("--sizes", ga.sizes, "divisibility: comma-separated |A_i| overrides");
    gen->add_option("--profile", ga.profile, "space/random: comma-separated codegree targets");
    gen->add_option("--density", ga.density, "random: extra-edge probability as p/q");
    gen->add_option("--seed", ga.seed, "random: generator seed");
    gen->add_option("--out", ga.out, "output path for the instance JSON")->required();

    SolveArgs sa;
    auto* solve = app.add_subcommand("solve", "matching algorithms and bound checks on one instance");
    solve->add_option("--instance", sa.instance, "instance JSON path")->required();
    solve->add_option("--algorithm", sa.algorithm, "oracle | fact15 | thm17")->required();
    solve->add_option("--profile", sa.profile, "comma-separated codegree profile; computed when omitted");
    solve->add_option("--mode", sa.mode, "guaranteed | best_effort");
    solve->add_option("--check", sa.check, "oracle: verify fact_1_5 | thm_main | thm_1_7");
    solve->add_option("--branch", sa.branch, "thm17: force fact_1_5 | large_q | small_q");
    solve->add_option("--budget-nodes", sa.budget_nodes, "oracle node budget");
    solve->add_option("--budget-seconds", sa.budget_seconds, "oracle time budget");

    RainbowArgs ra;
    auto* rainbow = app.add_subcommand("rainbow", "rainbow matching algorithms on a family");
    rainbow->add_option("--family", ra.family, "family JSON path");
    rainbow->add_option("--instance", ra.instance, "instance JSON path, copied --colours times");
    rainbow->add_option("--colours", ra.colours, "number of identical copies with --instance");
    rainbow->add_option("--algorithm", ra.algorithm, "oracle | lemma21 | lemma25 | pokrovskiy | lemma22")
        ->required();
    rainbow->add_option("--profile", ra.profile, "comma-separated codegree profile; computed when omitted");
    rainbow->add_option("--m", ra.m, "multiplicity bound m");
    rainbow->add_option("--require-colours", ra.require_colours, "lemma21: colours that must appear");
    rainbow->add_option("--epsilon", ra.epsilon, "lemma22: slack as p/q; default 1/(200k)");
    rainbow->add_option("--mode", ra.mode, "guaranteed | best_effort");
    rainbow->add_option("--capacity", ra.capacity, "pokrovskiy best-effort: require Q <= n/capacity");
    rainbow->add_option("--declared-m", ra.declared_m, "assert the family multiplicity instead of enumerating");
    rainbow->add_option("--budget-nodes", ra.budget_nodes, "oracle node budget");
    rainbow->add_option("--budget-seconds", ra.budget_seconds, "oracle time budget");

    SweepArgs wa;
    auto* sweep = app.add_subcommand("sweep", "bound verification over a grid of instances");
    sweep->add_option("--spec", wa.spec, "sweep spec JSON path")->required();
    sweep->add_option("--workers", wa.workers, "worker thread count");
    sweep->add_option("--out", wa.out, "output prefix for .jsonl and .csv")->required();
    sweep->add_option("--budget-nodes", wa.budget_nodes, "oracle node budget per instance");
    sweep->add_option("--budget-seconds", wa.budget_seconds, "oracle time budget per instance");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) return cmd_gen(ga);
        if (solve->parsed()) return cmd_solve(sa);
        if (rainbow->parsed()) return cmd_rainbow(ra);
        if (sweep->parsed()) return cmd_sweep(wa);
    } catch (const kpm::InvalidInput& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kBadInput;
    } catch (const kpm::HypothesisUnmet& e) {
        std::cerr << "hypothesis unmet: " << e.what() << "\n";
        return kFail;
    } catch (const kpm::InvariantViolation& e) {
        std::cerr << "invariant violation: " << e.what() << "\n";
        return kFail;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kBadInput;
    }
    return kBadInput;
}
