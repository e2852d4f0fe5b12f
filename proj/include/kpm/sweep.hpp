#pragma once

#include <atomic>
#include <algorithm>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "kpm/core.hpp"
#include "kpm/io.hpp"
#include "kpm/oracles.hpp"

namespace kpm {

struct SweepJob {
    std::string source;  // construction description or file path, for the report
    KPartiteHypergraph graph;
};

struct SweepRow {
    std::string instance_id;
    std::string source;
    int n = 0;
    int k = 0;
    int q_total = 0;       // total of the computed codegree profile
    std::optional<int> nu;
    VerifyReport fact;     // unconditional bound, hard pass/fail
    VerifyReport main_check;  // asymptotic bound, soft below-threshold
    std::string error;     // non-empty when the row failed to evaluate
};

struct SweepOutcome {
    std::vector<SweepRow> rows;
    bool hard_fail = false;
};

// Evaluates one instance: computed codegrees as the profile, one oracle-backed
// report per bound.
inline SweepRow evaluate_sweep_job(const SweepJob& job, const OracleBudget& budget) {
    SweepRow row;
    row.source = job.source;
    try {
        const auto& h = job.graph;
        row.instance_id = io::instance_id(h);
        row.n = h.min_class_size();
        row.k = h.k();
        std::vector<int> prof(static_cast<std::size_t>(h.k()));
        for (int c = 0; c < h.k(); ++c) prof[static_cast<std::size_t>(c)] = h.min_codegree_into(c);
        DegreeProfile profile(prof);
        row.q_total = profile.total();
        row.fact = verify_theorem_bound(h, profile, BoundCheck::fact_1_5, budget);
        row.main_check = verify_theorem_bound(h, profile, BoundCheck::thm_main, budget);
        row.nu = row.main_check.nu ? row.main_check.nu : row.fact.nu;
    } catch (const std::exception& e) {
        row.error = e.what();
    }
    return row;
}

// Fixed-size worker pool over the job list. Row order is re-established by
// sorting on (instance id, source), so the output is identical for any
// worker count.
inline SweepOutcome run_verification_sweep(const std::vector<SweepJob>& jobs, int workers,
                                           const OracleBudget& budget = {}) {
    SweepOutcome out;
    out.rows.resize(jobs.size());
    int nw = std::max(1, std::min<int>(workers, static_cast<int>(jobs.size() ? jobs.size() : 1)));
    std::atomic<std::size_t> next{0};
    auto work = [&]() {
        while (true) {
            std::size_t i = next.fetch_add(1);
            if (i >= jobs.size()) break;
            out.rows[i] = evaluate_sweep_job(jobs[i], budget);
        }
    };
    if (nw == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(nw));
        for (int w = 0; w < nw; ++w) pool.emplace_back(work);
        for (auto& th : pool) th.join();
    }
    std::sort(out.rows.begin(), out.rows.end(), [](const SweepRow& a, const SweepRow& b) {
        if (a.instance_id != b.instance_id) return a.instance_id < b.instance_id;
        return a.source < b.source;
    });
    for (const auto& r : out.rows)
        if (r.fact.status == "fail" || !r.error.empty()) out.hard_fail = true;
    return out;
}

inline io::json verify_report_to_json(const VerifyReport& rep) {
    io::json j;
    j["check"] = rep.check;
    j["bound"] = rep.bound;
    if (rep.nu) j["nu"] = *rep.nu; else j["nu"] = nullptr;
    j["status"] = rep.status;
    if (!rep.note.empty()) j["note"] = rep.note;
    return j;
}

inline std::string sweep_jsonl(const std::vector<SweepRow>& rows) {
    std::string out;
    for (const auto& r : rows) {
        io::json j;
        j["instance_id"] = r.instance_id;
        j["source"] = r.source;
        if (!r.error.empty()) {
            j["error"] = r.error;
            out += j.dump() + "\n";
            continue;
        }
        j["n"] = r.n;
        j["k"] = r.k;
        j["q"] = r.q_total;
        if (r.nu) j["nu"] = *r.nu; else j["nu"] = nullptr;
        j["checks"] = io::json::array({verify_report_to_json(r.fact), verify_report_to_json(r.main_check)});
        out += j.dump() + "\n";
    }
    return out;
}

inline std::string sweep_csv(const std::vector<SweepRow>& rows) {
    std::string out = "instance_id,n,k,Q,nu,bound,status\n";
    for (const auto& r : rows) {
        if (!r.error.empty()) {
            out += r.instance_id + ",,,,,," + "error\n";
            continue;
        }
        out += r.instance_id + "," + std::to_string(r.n) + "," + std::to_string(r.k) + "," +
               std::to_string(r.q_total) + "," + (r.nu ? std::to_string(*r.nu) : std::string()) + "," +
               std::to_string(r.main_check.bound) + "," + r.main_check.status + "\n";
    }
    return out;
}

}  // namespace kpm
