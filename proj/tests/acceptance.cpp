// Acceptance suite: one numbered criterion per run (or all with no args).
// Prints one PASS/FAIL line per criterion and exits nonzero on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "mdm/datagen.hpp"
#include "mdm/experiments.hpp"
#include "mdm/grouping.hpp"
#include "mdm/limit.hpp"
#include "mdm/parallel.hpp"
#include "mdm/predict.hpp"
#include "mdm/represent.hpp"
#include "mdm/solver.hpp"
#include "oracles.hpp"

using namespace mdm;

namespace {

struct Checker {
    bool ok = true;
    std::string detail;

    void expect(bool condition, const std::string& what) {
        if (!condition) {
            ok = false;
            if (!detail.empty()) detail += "; ";
            detail += what;
        }
    }
};

double mean(const std::vector<double>& xs) {
    return xs.empty() ? 0.0 : std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
}

// --- Criterion 1: worked-example fidelity --------------------------------

bool criterion_worked_examples(std::string& detail) {
    Checker c;
    const auto start = std::chrono::steady_clock::now();

    c.expect(!check_mdm(fixtures::rum_not_mdm_n3()).has_value(), "n=3 cycle accepted");
    c.expect(check_rum(fixtures::rum_not_mdm_n3()), "n=3 cycle rejected by the ranking LP");

    c.expect(check_rum(fixtures::rum_not_mdm_n4()), "RUM-side n=4 table rejected");
    c.expect(!check_mdm(fixtures::rum_not_mdm_n4()).has_value(), "RUM-side n=4 table accepted");
    c.expect(check_mdm(fixtures::mdm_not_rum_n4()).has_value(), "order-side n=4 table rejected");
    c.expect(!check_rum(fixtures::mdm_not_rum_n4()), "order-side n=4 table accepted by RUM");

    auto x = fixtures::nonconvex_x();
    auto y = fixtures::nonconvex_y();
    c.expect(check_mdm(x).has_value(), "endpoint x rejected");
    c.expect(check_mdm(y).has_value(), "endpoint y rejected");
    c.expect(!check_mdm(fixtures::mix(x, y, 0.4)).has_value(), "mixture accepted");

    auto grouped = fixtures::group_required();
    c.expect(!check_gmdm(grouped, Grouping::single_group(4)).has_value(),
             "group table accepted at K=1");
    Grouping two;
    two.assignment = {0, 1, 2, 1, 2};
    two.num_groups = 2;
    c.expect(check_gmdm(grouped, two).has_value(), "group table rejected at {{1,3},{2,4}}");

    auto p = fixtures::apu_p();
    auto q = fixtures::apu_q();
    const Grouping one = Grouping::single_group(3);
    c.expect(check_gmdm(p, one).has_value(), "single-group endpoint p rejected");
    c.expect(check_gmdm(q, one).has_value(), "single-group endpoint q rejected");
    c.expect(!check_gmdm(fixtures::mix(p, q, 0.6), one).has_value(),
             "single-group mixture accepted");

    const double sec =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    c.expect(sec < 1.0, "worked examples took " + std::to_string(sec) + "s (budget 1s)");
    detail = c.detail;
    return c.ok;
}

// --- Criterion 2: limit oracle --------------------------------------------

bool criterion_limit_oracle(std::string& detail) {
    Checker c;
    const int instances = 200;
    std::vector<double> gap(instances, 0.0);
    parallel_for(static_cast<std::size_t>(instances), [&](std::size_t k) {
        std::mt19937_64 rng(split_seed(2024, k));
        const int n = 3 + static_cast<int>(rng() % 4);        // up to 6 products
        const int m = 2 + static_cast<int>(rng() % 4);        // up to 5 assortments
        auto data = fixtures::random_dataset(n, m, split_seed(2024, 1000 + k), 2,
                                             std::min(4, n));
        LimitOptions opts;
        opts.method = LimitMethod::Milp;
        opts.threads = 1;
        const double via_search = limit_mdm(data, {}, opts).loss;
        const double via_enum = limit_ranking_enum(data, {}, 1).loss;
        gap[k] = std::abs(via_search - via_enum);
    });
    for (int k = 0; k < instances; ++k) {
        c.expect(gap[k] <= 1e-6,
                 "instance " + std::to_string(k) + " differs by " + std::to_string(gap[k]));
        if (!c.ok) break;
    }

    const double infeasible_loss = limit_mdm(fixtures::kemeny_infeasible()).loss;
    c.expect(std::abs(infeasible_loss - 2.0 / 9) <= 1e-6,
             "reduction instance loss " + std::to_string(infeasible_loss) + " != 2/9");
    const double feasible_loss = limit_mdm(fixtures::kemeny_feasible()).loss;
    c.expect(feasible_loss <= 1e-9, "feasible reduction instance has positive loss");
    detail = c.detail;
    return c.ok;
}

// --- Criterion 3: prediction soundness ------------------------------------

bool criterion_prediction_soundness(std::string& detail) {
    Checker c;
    ExperimentSpec spec;
    spec.base.n = 7;
    spec.base.seed = 7331;
    spec.replications = 34; // 34 instances per collection size, 102 total
    auto rows = run_prediction(spec, {5, 10, 20});
    int covered = 0;
    for (const auto& row : rows) covered += row.covered ? 1 : 0;
    c.expect(covered == static_cast<int>(rows.size()),
             std::to_string(rows.size() - covered) + " of " + std::to_string(rows.size()) +
                 " true revenues escaped the interval");

    // Interval nesting along nested data subsets of one instance family.
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        GeneratorConfig cfg;
        cfg.n = 7;
        cfg.m = 20;
        cfg.seed = split_seed(555, seed);
        auto collection = gen_collection(cfg);
        std::mt19937_64 rng(split_seed(cfg.seed, 42));
        std::uniform_real_distribution<double> rate_dist(0.5, 2.0);
        std::vector<double> rates(7);
        for (double& r : rates) r = rate_dist(rng);
        MdmInstance inst = gen_mdm(7, collection, rates, Grouping::singletons(7), cfg.seed);

        std::vector<int> A;
        {
            std::mt19937_64 arng(split_seed(cfg.seed, 5));
            for (int attempt = 0; attempt < 1000 && A.empty(); ++attempt) {
                std::vector<int> ids = {1, 2, 3, 4, 5, 6, 7};
                std::shuffle(ids.begin(), ids.end(), arng);
                ids.resize(3);
                std::sort(ids.begin(), ids.end());
                bool fresh = true;
                for (const auto& s : collection) fresh = fresh && s != ids;
                if (fresh) A = ids;
            }
        }
        if (A.empty()) continue;
        std::vector<double> revenues(8, 1.0);
        revenues[0] = 0.0;

        double prev_lower = -1e100, prev_upper = 1e100;
        for (int count : {5, 10, 20}) {
            PredictionQuery q;
            q.dataset = inst.dataset.prefix(count);
            q.new_assortment = A;
            q.revenues = revenues;
            PredictionResult res = predict_interval(q);
            c.expect(res.lower >= prev_lower - 1e-6 && res.upper <= prev_upper + 1e-6,
                     "interval widened when extending the collection (seed " +
                         std::to_string(seed) + ")");
            prev_lower = res.lower;
            prev_upper = res.upper;
        }
    }
    detail = c.detail;
    return c.ok;
}

// --- Criterion 4: method equivalence --------------------------------------

bool criterion_method_equivalence(std::string& detail) {
    Checker c;
    int done = 0;
    for (std::uint64_t seed = 0; done < 100; ++seed) {
        const bool nested = seed % 2 == 0;
        GeneratorConfig cfg;
        cfg.n = 7;
        cfg.m = 4 + seed % 3;
        cfg.seed = split_seed(888, seed);
        cfg.collection = nested ? CollectionKind::Nested : CollectionKind::Laminar;
        auto collection = gen_collection(cfg);
        std::vector<double> rates;
        for (int i = 0; i < 7; ++i) rates.push_back(0.7 + 0.35 * i);
        MdmInstance inst = gen_mdm(7, collection, rates, Grouping::singletons(7), cfg.seed);

        // Pick an unseen assortment that keeps the extended family structured,
        // so all three methods are applicable: use a subset of the smallest set
        // plus, alternately, an arbitrary fresh subset for the nested/general case.
        std::vector<int> A;
        std::mt19937_64 rng(split_seed(cfg.seed, 91));
        for (int attempt = 0; attempt < 2000 && A.empty(); ++attempt) {
            std::vector<int> ids(7);
            std::iota(ids.begin(), ids.end(), 1);
            std::shuffle(ids.begin(), ids.end(), rng);
            ids.resize(2 + attempt % 2);
            std::sort(ids.begin(), ids.end());
            bool fresh = true;
            for (const auto& s : collection) fresh = fresh && s != ids;
            if (!fresh) continue;
            auto extended = collection;
            extended.push_back(ids);
            if (collection_structure(extended) == CollectionStructure::General) continue;
            A = ids;
        }
        if (A.empty()) continue;

        std::vector<double> revenues(8, 0.0);
        std::uniform_real_distribution<double> unif(0.5, 2.0);
        for (int i = 1; i <= 7; ++i) revenues[i] = unif(rng);

        PredictionQuery q;
        q.dataset = inst.dataset;
        q.new_assortment = A;
        q.revenues = revenues;

        q.method = PredictMethod::StructuredLp;
        PredictionResult structured = predict_interval(q);
        q.method = PredictMethod::GeneralMilp;
        PredictionResult milp = predict_interval(q);
        c.expect(std::abs(structured.lower - milp.lower) <= 1e-6 &&
                     std::abs(structured.upper - milp.upper) <= 1e-6,
                 "structured vs MILP mismatch at seed " + std::to_string(seed));
        if (nested) {
            q.method = PredictMethod::NestedEnum;
            PredictionResult enumd = predict_nested_enum(q);
            c.expect(std::abs(enumd.lower - milp.lower) <= 1e-6 &&
                         std::abs(enumd.upper - milp.upper) <= 1e-6,
                     "nested enumeration vs MILP mismatch at seed " + std::to_string(seed));
        }
        ++done;
        if (!c.ok) break;
    }
    c.expect(done >= 100, "only " + std::to_string(done) + " structured instances were built");
    detail = c.detail;
    return c.ok;
}

// --- Criterion 5: representational-power trend -----------------------------

bool criterion_rep_power_trend(std::string& detail) {
    Checker c;
    ExperimentSpec spec;
    spec.base.n = 7;
    spec.base.m = 20;
    spec.base.seed = 11001;
    spec.replications = 100;
    auto rows = run_rep_power(spec, {0.25, 0.5, 0.75, 1.0});
    c.expect(rows[0].mdm_fraction >= 0.5,
             "alpha=0.25 acceptance " + std::to_string(rows[0].mdm_fraction) + " < 0.5");
    for (std::size_t k = 1; k < rows.size(); ++k) {
        c.expect(rows[k].mdm_fraction <= rows[k - 1].mdm_fraction + 1e-12,
                 "acceptance fraction increased from alpha=" + std::to_string(rows[k - 1].alpha) +
                     " to " + std::to_string(rows[k].alpha));
    }
    for (const auto& row : rows) {
        c.expect(row.mnl_fraction <= 0.02,
                 "perturbed data accepted as exact MNL at alpha=" + std::to_string(row.alpha));
    }
    std::printf("  rep-power fractions:");
    for (const auto& row : rows) std::printf(" %.2f@%.2f", row.mdm_fraction, row.alpha);
    std::printf("\n");
    detail = c.detail;
    return c.ok;
}

// --- Criterion 6: constructive round trip ----------------------------------

bool criterion_round_trip(std::string& detail) {
    Checker c;
    std::vector<double> worst(100, 0.0);
    parallel_for(100, [&](std::size_t k) {
        GeneratorConfig cfg;
        cfg.n = 4 + static_cast<int>(k % 3);
        cfg.m = 4 + static_cast<int>(k % 5);
        cfg.seed = split_seed(31415, k);
        auto collection = gen_collection(cfg);
        std::vector<double> rates;
        for (int i = 0; i < cfg.n; ++i) rates.push_back(0.6 + 0.45 * i);
        MdmInstance inst =
            gen_mdm(cfg.n, collection, rates, Grouping::singletons(cfg.n), cfg.seed);

        auto cert = check_mdm(inst.dataset);
        if (!cert) {
            worst[k] = 1.0;
            return;
        }
        MarginalSpec spec = synthesize_marginals(inst.dataset, *cert);
        double err = 0.0;
        for (int s = 0; s < inst.dataset.num_assortments(); ++s) {
            auto probs = solve_mdm_assortment(spec, inst.dataset.assortment(s));
            for (std::size_t idx = 0; idx < probs.size(); ++idx) {
                err = std::max(err, std::abs(probs[idx] - inst.dataset.probs()[s][idx]));
            }
        }
        worst[k] = err;
    });
    for (int k = 0; k < 100; ++k) {
        c.expect(worst[k] <= 1e-6,
                 "round-trip error " + std::to_string(worst[k]) + " at instance " +
                     std::to_string(k));
        if (!c.ok) break;
    }
    detail = c.detail;
    return c.ok;
}

// --- Criterion 7: limit comparison trend -----------------------------------

bool criterion_limit_comparison(std::string& detail) {
    Checker c;
    ExperimentSpec spec;
    spec.base.n = 7;
    spec.base.seed = 2718;
    spec.replications = 100;
    auto rows = run_limit_compare(spec, {20});
    std::vector<double> mdm, mnl;
    for (const auto& row : rows) {
        mdm.push_back(row.mdm_loss);
        mnl.push_back(row.mnl_loss);
    }
    const double mean_mdm = mean(mdm);
    const double mean_mnl = mean(mnl);
    std::printf("  mean L1 limit: order-consistent %.4f vs logit fit %.4f\n", mean_mdm, mean_mnl);
    c.expect(mean_mdm < mean_mnl, "nonparametric limit did not beat the logit fit");

    // Small-n side report: ranking-distribution limit vs the order limit.
    ExperimentSpec small = spec;
    small.base.n = 5;
    small.replications = 30;
    auto small_rows = run_limit_compare(small, {10});
    std::vector<double> rum, mdm_small;
    for (const auto& row : small_rows) {
        rum.push_back(row.rum_loss);
        mdm_small.push_back(row.mdm_loss);
    }
    std::printf("  n=5 report: ranking-distribution %.4f vs order-consistent %.4f (not asserted)\n",
                mean(rum), mean(mdm_small));
    detail = c.detail;
    return c.ok;
}

// --- Criterion 8: grouping recovery ----------------------------------------

bool criterion_grouping_recovery(std::string& detail) {
    Checker c;
    ExperimentSpec spec;
    spec.base.n = 7;
    spec.base.seed = 1618;
    spec.base.max_size = 3;
    spec.replications = 30;
    auto rows = run_grouping_recovery(spec, {20, 100});
    std::vector<double> at20, at100;
    for (const auto& row : rows) {
        (row.m == 20 ? at20 : at100).push_back(row.v_measure);
    }
    const double mean20 = mean(at20);
    const double mean100 = mean(at100);
    std::printf("  grouping v-measure: %.3f at m=20, %.3f at m=100\n", mean20, mean100);
    c.expect(mean100 >= mean20 - 1e-12, "accuracy dropped when adding assortments");
    c.expect(mean100 >= 0.8, "v-measure at m=100 is " + std::to_string(mean100));
    detail = c.detail;
    return c.ok;
}

// --- Criterion 9: grouped prediction narrows intervals ----------------------

bool criterion_grouping_narrows(std::string& detail) {
    Checker c;
    ExperimentSpec spec;
    spec.base.n = 6;
    spec.base.m = 8;
    spec.base.seed = 4242;
    spec.replications = 30;
    auto rows = run_grouping_effect(spec);
    int narrower = 0, strict = 0;
    for (const auto& row : rows) {
        if (row.width_grouped <= row.width_plain + 1e-6) ++narrower;
        if (row.width_grouped < row.width_plain - 1e-6) ++strict;
    }
    std::printf("  grouped interval narrower on %d/%d (strictly on %d)\n", narrower,
                static_cast<int>(rows.size()), strict);
    c.expect(narrower == static_cast<int>(rows.size()), "a grouped interval was wider");
    c.expect(strict * 5 >= static_cast<int>(rows.size()) * 4,
             "strict narrowing on fewer than 80% of instances");
    double mean_plain = 0.0, mean_grouped = 0.0;
    for (const auto& row : rows) {
        mean_plain += row.width_plain;
        mean_grouped += row.width_grouped;
    }
    c.expect(mean_grouped <= mean_plain, "mean width did not shrink");
    detail = c.detail;
    return c.ok;
}

// --- Criterion 10: solver unit oracles --------------------------------------

bool criterion_solver_oracles(std::string& detail) {
    Checker c;
    std::mt19937_64 rng(20240901);
    for (int trial = 0; trial < 500 && c.ok; ++trial) {
        LinearProgram lp = oracles::random_bounded_lp(rng, 4, 1 + trial % 6);
        oracles::Outcome want = oracles::vertex_enumeration(lp);
        SolveResult got = solve_lp(lp);
        if (want.feasible) {
            c.expect(got.status == SolveStatus::Optimal &&
                         std::abs(got.value - want.value) <= 1e-6,
                     "LP " + std::to_string(trial) + " disagrees with vertex enumeration");
        } else {
            c.expect(got.status == SolveStatus::Infeasible,
                     "LP " + std::to_string(trial) + " should be infeasible");
        }
    }

    std::mt19937_64 mip_rng(77001);
    for (int trial = 0; trial < 200 && c.ok; ++trial) {
        MixedIntegerProgram mip = oracles::random_small_mip(mip_rng, trial);
        oracles::Outcome want = oracles::enumerate_mip(mip);
        auto got = solve_milp(mip);
        if (want.feasible) {
            c.expect(got.status == SolveStatus::Optimal &&
                         std::abs(got.value - want.value) <= 1e-6,
                     "MIP " + std::to_string(trial) + " disagrees with enumeration");
        } else {
            c.expect(got.status == SolveStatus::Infeasible,
                     "MIP " + std::to_string(trial) + " should be infeasible");
        }
    }

    // Likelihood gradient against central differences.
    auto data = fixtures::random_dataset(5, 6, 55);
    std::mt19937_64 grng(5);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    std::vector<double> nu(6, 0.0);
    for (int i = 1; i <= 5; ++i) nu[i] = unif(grng);
    auto grad = mnl_log_likelihood_gradient(data, nu);
    const double h = 1e-6;
    for (int i = 1; i <= 5; ++i) {
        auto hi = nu, lo = nu;
        hi[i] += h;
        lo[i] -= h;
        const double fd = (mnl_log_likelihood(data, hi) - mnl_log_likelihood(data, lo)) / (2 * h);
        c.expect(std::abs(grad[i] - fd) <= 1e-5, "gradient component " + std::to_string(i));
    }
    detail = c.detail;
    return c.ok;
}

struct Criterion {
    int number;
    const char* name;
    std::function<bool(std::string&)> run;
};

} // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> criteria = {
        {1, "worked-example fidelity", criterion_worked_examples},
        {2, "limit oracle equality", criterion_limit_oracle},
        {3, "prediction soundness", criterion_prediction_soundness},
        {4, "prediction method equivalence", criterion_method_equivalence},
        {5, "representational-power trend", criterion_rep_power_trend},
        {6, "constructive round trip", criterion_round_trip},
        {7, "limit comparison trend", criterion_limit_comparison},
        {8, "grouping recovery", criterion_grouping_recovery},
        {9, "grouped prediction narrowing", criterion_grouping_narrows},
        {10, "solver unit oracles", criterion_solver_oracles},
    };

    int requested = 0;
    if (argc > 1) requested = std::atoi(argv[1]);

    bool all_ok = true;
    for (const auto& criterion : criteria) {
        if (requested != 0 && criterion.number != requested) continue;
        const auto start = std::chrono::steady_clock::now();
        std::string detail;
        bool ok = false;
        try {
            ok = criterion.run(detail);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        const double sec =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("%s criterion %d (%s) [%.1fs]%s%s\n", ok ? "PASS" : "FAIL", criterion.number,
                    criterion.name, sec, detail.empty() ? "" : " -- ", detail.c_str());
        all_ok = all_ok && ok;
    }
    return all_ok ? 0 : 1;
}
