// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.
// Usage: acceptance [criterion numbers...]   (default: all)

#include <chrono>
#include <cstdio>
#include <cstring>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ecdl/ensemble.hpp"
#include "ecdl/evaluation.hpp"
#include "ecdl/normal.hpp"
#include "ecdl/parallel.hpp"
#include "ecdl/simulation.hpp"
#include "test_support.hpp"

using namespace ecdl;
using ecdl::testing::random_matrix;
using ecdl::testing::random_vector;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
    std::string fingerprint;  // raw bytes of every numeric output, for the rerun check
};

void append(std::string& bytes, const Vector& v) {
    bytes.append(reinterpret_cast<const char*>(v.data()), sizeof(double) * static_cast<std::size_t>(v.size()));
}

void append(std::string& bytes, double x) { bytes.append(reinterpret_cast<const char*>(&x), sizeof x); }

std::string fmt(double x, int digits = 4) {
    std::ostringstream out;
    out.precision(digits);
    out << x;
    return out.str();
}

std::vector<char> support_mask(Index p, const std::vector<Index>& support) {
    std::vector<char> mask(static_cast<std::size_t>(p), 0);
    for (const Index j : support) mask[j] = 1;
    return mask;
}

const unsigned kWorkers = default_workers();

// 1. Debiased estimates equal least squares when lambda is negligible and n > p.
Outcome ols_equivalence() {
    DlConfig config;
    config.solver.lambda_rule = FixedLambda{1e-8};
    config.nodewise_lambda = FixedLambda{1e-8};
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const Matrix x = random_matrix(100, 10, 1000 + seed);
        const Vector w = random_vector(10, 2000 + seed);
        const Vector y = x * w + random_vector(100, 3000 + seed);
        const auto dl = desparsified_lasso(x, y, config);
        worst = std::max(worst, (dl.w_hat - ecdl::testing::ols(x, y)).cwiseAbs().maxCoeff());
    }
    return {worst < 1e-4, "max |w_dl - w_ols| = " + fmt(worst) + " (tol 1e-4)", {}};
}

// 2. Pooled null p-values are uniform.
Outcome null_calibration() {
    std::vector<double> pooled;
    pooled.reserve(20000);
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        const Matrix x = random_matrix(100, 20, 10000 + seed);
        const Vector y = random_vector(100, 20000 + seed);
        const auto dl = desparsified_lasso(x, y, DlConfig{});
        pooled.insert(pooled.end(), dl.p_values.data(), dl.p_values.data() + 20);
    }
    const double ks = ecdl::testing::ks_uniform(pooled);
    return {ks < 0.05, "KS distance to U(0,1) = " + fmt(ks) + " over 20000 p-values (tol 0.05)", {}};
}

// 3. Twice-the-median aggregation is a valid p-value.
Outcome aggregation_validity() {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Matrix values(25, 10000);
    for (Index t = 0; t < 10000; ++t)
        for (Index b = 0; b < 25; ++b) values(b, t) = 1.0 - u(rng);
    const Vector agg = aggregate_pvalues(values);
    bool pass = true;
    std::string detail;
    for (const double alpha : {0.01, 0.05, 0.1}) {
        const double level = (agg.array() <= alpha).cast<double>().mean();
        pass = pass && level <= alpha;
        detail += "P(agg <= " + fmt(alpha) + ") = " + fmt(level) + "; ";
    }
    return {pass, detail, {}};
}

// 4. Constrained Ward reproduces exhaustive greedy merging on chains.
Outcome ward_oracle() {
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<Index> width(2, 12);
    std::uniform_int_distribution<Index> depth(1, 6);
    int matched = 0;
    for (int instance = 0; instance < 100; ++instance) {
        const Index p = width(rng);
        const Matrix x = random_matrix(depth(rng), p, rng());
        std::vector<WardMerge> merges;
        ward_cluster(x, grid_connectivity({p}), 1, &merges);
        const auto oracle = ecdl::testing::exhaustive_ward(x, 1, [](Index a, Index b) { return std::abs(a - b) == 1; });
        bool same = merges.size() == oracle.size();
        for (std::size_t k = 0; same && k < merges.size(); ++k)
            same = merges[k].kept == oracle[k].kept && merges[k].removed == oracle[k].removed;
        matched += same ? 1 : 0;
    }
    return {matched == 100, std::to_string(matched) + "/100 merge sequences identical", {}};
}

// 5. AR(1) design: raw DL misses the support, CDL recovers its clusters.
Outcome one_d_contrast() {
    Outcome out;
    double dl_rate = 0.0, cdl_rate = 0.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Sim1DSpec spec;
        spec.seed = seed;
        const auto sim = generate_1d(spec);
        const auto& x = sim.model.design;
        const auto& y = sim.model.response;

        DlConfig dl_config;
        dl_config.workers = kWorkers;
        const auto dl = desparsified_lasso(x, y, dl_config);
        Index dl_hits = 0;
        for (const Index j : sim.truth.support) dl_hits += dl.p_values[j] < 0.05 ? 1 : 0;
        dl_rate += static_cast<double>(dl_hits) / 50.0;

        CdlConfig config;
        config.n_clusters = 200;
        config.seed = 100 + seed;
        config.dl.workers = kWorkers;
        const auto cdl = cdl_infer(x, y, grid_connectivity({spec.p}), config);
        // A support cluster has a majority of its members in the support.
        std::vector<Index> members(200, 0), in_support(200, 0);
        for (Index j = 0; j < spec.p; ++j) {
            ++members[cdl.labeling.labels[j]];
            if (sim.truth.w_star[j] != 0.0) ++in_support[cdl.labeling.labels[j]];
        }
        Index clusters = 0, hits = 0;
        for (Index c = 0; c < 200; ++c) {
            if (2 * in_support[c] <= members[c]) continue;
            ++clusters;
            hits += cdl.cluster_result.p_values[c] < 0.05 ? 1 : 0;
        }
        cdl_rate += static_cast<double>(hits) / static_cast<double>(clusters);
        append(out.fingerprint, dl.p_values);
        append(out.fingerprint, cdl.p_values);
    }
    dl_rate /= 10.0;
    cdl_rate /= 10.0;
    out.pass = dl_rate < 0.10 && cdl_rate >= 0.90;
    out.detail = "DL flags " + fmt(100 * dl_rate) + "% of support (< 10%), CDL flags " + fmt(100 * cdl_rate) +
                 "% of support clusters (>= 90%), mean of 10 seeds";
    return out;
}

Sim3DSpec desk_spec(std::uint64_t seed) {
    Sim3DSpec spec;
    spec.edge_length = 20;
    spec.n = 200;
    spec.roi_width = 4;
    spec.neutral_margin = 5;
    spec.target_snr = 3.0;
    spec.seed = seed;
    return spec;
}

// 6. Desk-scale 3-D: ECDL controls FWER and beats CDL on recall at 90% precision.
Outcome desk_fwer_recall() {
    Outcome out;
    const Index clusters = 100;
    const double alpha = 0.05;
    const double z_cut = bonferroni_z_threshold(alpha, clusters);
    const auto graph = grid_connectivity({20, 20, 20});
    std::vector<DetectionReport> reports;
    int ecdl_wins = 0;
    double ecdl_recall_sum = 0.0, cdl_recall_sum = 0.0;
    for (std::uint64_t rep = 0; rep < 30; ++rep) {
        const auto sim = generate_3d(desk_spec(500 + rep));
        const auto support = support_mask(8000, sim.truth.support);
        CdlConfig config;
        config.n_clusters = clusters;
        config.seed = 7000 + 100 * rep;
        const auto ecdl = ecdl_infer(sim.model.design, sim.model.response, graph, config, 10, kWorkers);
        const auto cdl = cdl_infer(sim.model.design, sim.model.response, graph, config);

        reports.push_back(detect(ecdl.consensus_z, support, sim.truth.neutral_mask, z_cut));
        const double ecdl_recall =
            precision_recall(ecdl.consensus_z.cwiseAbs(), support, sim.truth.neutral_mask).recall_at_precision(0.9);
        const double cdl_recall =
            precision_recall(cdl.z_scores.cwiseAbs(), support, sim.truth.neutral_mask).recall_at_precision(0.9);
        ecdl_wins += ecdl_recall > cdl_recall ? 1 : 0;
        ecdl_recall_sum += ecdl_recall;
        cdl_recall_sum += cdl_recall;
        append(out.fingerprint, ecdl.aggregated_p);
        append(out.fingerprint, ecdl.consensus_z);
        append(out.fingerprint, cdl.z_scores);
    }
    const auto fwer = fwer_estimate(reports);
    out.pass = fwer.estimate <= 0.05 && ecdl_wins >= 24;
    out.detail = "ECDL FWER " + fmt(fwer.estimate) + " (<= 0.05, |z| > " + fmt(z_cut) + "); ECDL recall@90% > CDL in " +
                 std::to_string(ecdl_wins) + "/30 (>= 24); mean recall ECDL " + fmt(ecdl_recall_sum / 30) + ", CDL " +
                 fmt(cdl_recall_sum / 30);
    return out;
}

// 7. Repeated analyses of one data set: ECDL maps agree more than CDL maps.
Outcome desk_stability() {
    Outcome out;
    const auto sim = generate_3d(desk_spec(900));
    const auto graph = grid_connectivity({20, 20, 20});
    std::vector<Vector> cdl_maps, ecdl_maps;
    for (std::uint64_t run = 0; run < 25; ++run) {
        CdlConfig config;
        config.n_clusters = 100;
        config.seed = 1000 * (run + 1);
        cdl_maps.push_back(cdl_infer(sim.model.design, sim.model.response, graph, config).z_scores);
        ecdl_maps.push_back(ecdl_infer(sim.model.design, sim.model.response, graph, config, 10, kWorkers).consensus_z);
        append(out.fingerprint, cdl_maps.back());
        append(out.fingerprint, ecdl_maps.back());
    }
    const auto cdl = stability_suite(cdl_maps, 3.0);
    const auto ecdl = stability_suite(ecdl_maps, 3.0);
    out.pass = ecdl.jaccard.median > cdl.jaccard.median && ecdl.correlation.median > cdl.correlation.median;
    out.detail = "median Jaccard ECDL " + fmt(ecdl.jaccard.median) + " vs CDL " + fmt(cdl.jaccard.median) +
                 "; median correlation ECDL " + fmt(ecdl.correlation.median) + " vs CDL " +
                 fmt(cdl.correlation.median);
    append(out.fingerprint, ecdl.jaccard.median);
    append(out.fingerprint, cdl.jaccard.median);
    return out;
}

// 8. Full-size ECDL run.
Outcome full_scale_runtime() {
    Sim3DSpec spec;
    spec.n = 400;
    const auto sim = generate_3d(spec);
    CdlConfig config;
    config.n_clusters = 500;
    const auto start = Clock::now();
    const auto result = ecdl_infer(sim.model.design, sim.model.response, grid_connectivity({50, 50, 50}), config, 25,
                                   kWorkers);
    const double seconds = std::chrono::duration<double>(Clock::now() - start).count();
    const bool finite = result.aggregated_p.allFinite() && result.consensus_z.allFinite();
    return {seconds < 600.0 && finite,
            "ecdl_infer n=400 p=125000 C=500 B=25 took " + fmt(seconds) + " s on " + std::to_string(kWorkers) +
                " worker(s) (< 600 s)",
            {}};
}

}  // namespace

int main(int argc, char** argv) {
    std::set<int> selected;
    for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
    auto wanted = [&](int k) { return selected.empty() || selected.count(k) > 0; };

    struct Criterion {
        int id;
        const char* name;
        double limit_seconds;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria{
        {1, "ols-equivalence", 10, ols_equivalence},
        {2, "null-calibration", 120, null_calibration},
        {3, "aggregation-validity", 10, aggregation_validity},
        {4, "constrained-ward-oracle", 30, ward_oracle},
        {5, "ar1-dl-vs-cdl", 900, one_d_contrast},
        {6, "desk-3d-fwer-recall", 7200, desk_fwer_recall},
        {7, "desk-3d-stability", 7200, desk_stability},
        {8, "full-scale-runtime", 600, full_scale_runtime},
    };

    int failures = 0;
    std::vector<std::pair<int, std::string>> fingerprints;
    auto report = [&](int id, const char* name, bool pass, const std::string& detail) {
        std::cout << (pass ? "PASS" : "FAIL") << "  criterion " << id << " " << name << ": " << detail << std::endl;
        failures += pass ? 0 : 1;
    };

    for (const auto& c : criteria) {
        if (!wanted(c.id)) continue;
        const auto start = Clock::now();
        Outcome outcome;
        try {
            outcome = c.run();
        } catch (const std::exception& e) {
            outcome = {false, std::string("threw: ") + e.what(), {}};
        }
        const double seconds = std::chrono::duration<double>(Clock::now() - start).count();
        const bool in_time = seconds < c.limit_seconds;
        report(c.id, c.name, outcome.pass && in_time,
               outcome.detail + " [" + fmt(seconds) + " s, limit " + fmt(c.limit_seconds) + " s]");
        if (c.id >= 5 && c.id <= 7) fingerprints.emplace_back(c.id, std::move(outcome.fingerprint));
    }

    if (wanted(9)) {
        const auto start = Clock::now();
        bool identical = !fingerprints.empty();
        std::string detail;
        for (const auto& [id, bytes] : fingerprints) {
            std::string again;
            try {
                again = criteria[static_cast<std::size_t>(id - 1)].run().fingerprint;
            } catch (const std::exception&) {
            }
            const bool same = !bytes.empty() && again == bytes;
            identical = identical && same;
            detail += "criterion " + std::to_string(id) + " rerun " + (same ? "identical" : "DIFFERS") + " (" +
                      std::to_string(bytes.size()) + " bytes); ";
        }
        if (fingerprints.empty()) detail = "criteria 5-7 were not run";
        const double seconds = std::chrono::duration<double>(Clock::now() - start).count();
        report(9, "determinism", identical, detail + "[" + fmt(seconds) + " s]");
    }

    std::cout << (failures == 0 ? "all selected criteria passed" : std::to_string(failures) + " criterion(s) failed")
              << std::endl;
    return failures == 0 ? 0 : 1;
}
