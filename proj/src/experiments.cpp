#include "mdm/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <numeric>
#include <random>
#include <sstream>

#include "mdm/grouping.hpp"
#include "mdm/limit.hpp"
#include "mdm/parallel.hpp"
#include "mdm/predict.hpp"
#include "mdm/represent.hpp"

namespace mdm {

namespace {

double elapsed_ms(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
        .count();
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

// Uniform-on-the-simplex rows, the Experiment-4 style data.
ChoiceDataset gen_uniform(int n, const std::vector<std::vector<int>>& collection,
                          std::uint64_t seed) {
    std::vector<std::vector<double>> probs;
    for (std::size_t s = 0; s < collection.size(); ++s) {
        std::mt19937_64 rng(split_seed(seed, 7000 + s));
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        std::vector<double> row(collection[s].size());
        double sum = 0.0;
        for (double& p : row) {
            p = unif(rng) + 1e-9;
            sum += p;
        }
        for (double& p : row) p /= sum;
        probs.push_back(std::move(row));
    }
    return ChoiceDataset(n, collection, std::move(probs));
}

// A random assortment disjoint from the collection's sets (as a set).
std::vector<int> held_out_assortment(int n, const std::vector<std::vector<int>>& collection,
                                     std::uint64_t seed, int min_size, int max_size) {
    std::mt19937_64 rng(split_seed(seed, 8123));
    std::uniform_int_distribution<int> size_dist(min_size, std::min(max_size, n));
    for (int attempt = 0; attempt < 10000; ++attempt) {
        std::vector<int> ids(n);
        std::iota(ids.begin(), ids.end(), 1);
        std::shuffle(ids.begin(), ids.end(), rng);
        ids.resize(size_dist(rng));
        std::sort(ids.begin(), ids.end());
        if (std::find(collection.begin(), collection.end(), ids) == collection.end()) return ids;
    }
    throw Error(ErrorCode::InfeasibleConfig, "could not find an unseen assortment");
}

std::vector<double> random_revenues(int n, std::uint64_t seed) {
    std::mt19937_64 rng(split_seed(seed, 9311));
    std::uniform_real_distribution<double> unif(1.0, 2.0);
    std::vector<double> r(n + 1, 0.0);
    for (int i = 1; i <= n; ++i) r[i] = unif(rng);
    return r;
}

double true_expected_revenue(const MarginalSpec& spec, const std::vector<int>& A,
                             const std::vector<double>& revenues) {
    const std::vector<double> probs = solve_mdm_assortment(spec, A);
    double rev = 0.0;
    for (std::size_t k = 0; k < A.size(); ++k) rev += revenues[A[k]] * probs[k];
    return rev;
}

} // namespace

std::vector<RepPowerRow> run_rep_power(const ExperimentSpec& spec,
                                       const std::vector<double>& alphas) {
    std::vector<RepPowerRow> rows;
    for (double alpha : alphas) {
        struct Cell {
            bool mdm = false, mnl = false, regular = false;
            double ms = 0.0;
        };
        std::vector<Cell> cells(spec.replications);
        parallel_for(
            static_cast<std::size_t>(spec.replications),
            [&](std::size_t rep) {
                GeneratorConfig cfg = spec.base;
                cfg.seed = split_seed(spec.base.seed, 100 + rep);
                auto collection = gen_collection(cfg);
                ChoiceDataset clean = gen_mnl_random(cfg.n, collection, cfg.seed);
                ChoiceDataset noisy = perturb(clean, alpha, 0.01, cfg.seed);
                const auto start = std::chrono::steady_clock::now();
                cells[rep].mdm = check_mdm(noisy).has_value();
                cells[rep].ms = elapsed_ms(start);
                cells[rep].mnl = check_mnl(noisy).has_value();
                cells[rep].regular = check_regular(noisy);
            },
            spec.threads);
        RepPowerRow row{alpha, spec.replications, 0.0, 0.0, 0.0, 0.0};
        for (const Cell& c : cells) {
            row.mdm_fraction += c.mdm ? 1.0 : 0.0;
            row.mnl_fraction += c.mnl ? 1.0 : 0.0;
            row.regular_fraction += c.regular ? 1.0 : 0.0;
            row.mean_check_ms += c.ms;
        }
        row.mdm_fraction /= spec.replications;
        row.mnl_fraction /= spec.replications;
        row.regular_fraction /= spec.replications;
        row.mean_check_ms /= spec.replications;
        rows.push_back(row);
    }
    return rows;
}

std::vector<RepVsRumRow> run_rep_vs_rum(const ExperimentSpec& spec, const std::vector<int>& m_grid,
                                        double alpha) {
    std::vector<RepVsRumRow> rows;
    for (int m : m_grid) {
        struct Cell {
            bool mdm = false, rum = false;
            double mdm_ms = 0.0, rum_ms = 0.0;
        };
        std::vector<Cell> cells(spec.replications);
        parallel_for(
            static_cast<std::size_t>(spec.replications),
            [&](std::size_t rep) {
                GeneratorConfig cfg = spec.base;
                cfg.m = m;
                cfg.seed = split_seed(spec.base.seed, 200 + rep);
                auto collection = gen_collection(cfg);
                ChoiceDataset noisy =
                    perturb(gen_mnl_random(cfg.n, collection, cfg.seed), alpha, 0.01, cfg.seed);
                auto t0 = std::chrono::steady_clock::now();
                cells[rep].mdm = check_mdm(noisy).has_value();
                cells[rep].mdm_ms = elapsed_ms(t0);
                auto t1 = std::chrono::steady_clock::now();
                cells[rep].rum = check_rum(noisy);
                cells[rep].rum_ms = elapsed_ms(t1);
            },
            spec.threads);
        RepVsRumRow row{m, alpha, spec.replications, 0.0, 0.0, 0.0, 0.0};
        for (const Cell& c : cells) {
            row.mdm_fraction += c.mdm ? 1.0 : 0.0;
            row.rum_fraction += c.rum ? 1.0 : 0.0;
            row.mdm_ms += c.mdm_ms;
            row.rum_ms += c.rum_ms;
        }
        row.mdm_fraction /= spec.replications;
        row.rum_fraction /= spec.replications;
        row.mdm_ms /= spec.replications;
        row.rum_ms /= spec.replications;
        rows.push_back(row);
    }
    return rows;
}

std::vector<PredictionRow> run_prediction(const ExperimentSpec& spec,
                                          const std::vector<int>& m_grid) {
    std::vector<PredictionRow> rows(m_grid.size() * spec.replications);
    std::vector<std::pair<int, int>> tasks;
    for (std::size_t g = 0; g < m_grid.size(); ++g) {
        for (int rep = 0; rep < spec.replications; ++rep) {
            tasks.push_back({static_cast<int>(g), rep});
        }
    }
    parallel_for(
        tasks.size(),
        [&](std::size_t k) {
            const auto [g, rep] = tasks[k];
            GeneratorConfig cfg = spec.base;
            cfg.m = m_grid[g];
            cfg.seed = split_seed(spec.base.seed, 300 + 1000 * g + rep);
            auto collection = gen_collection(cfg);

            // Non-identical exponential marginals: one rate per product.
            std::mt19937_64 rng(split_seed(cfg.seed, 42));
            std::uniform_real_distribution<double> rate_dist(0.5, 2.0);
            std::vector<double> rates(cfg.n);
            for (double& r : rates) r = rate_dist(rng);
            MdmInstance inst =
                gen_mdm(cfg.n, collection, rates, Grouping::singletons(cfg.n), cfg.seed);

            const auto A = held_out_assortment(cfg.n, collection, cfg.seed, 2, 3);
            const auto revenues = random_revenues(cfg.n, cfg.seed);

            PredictionQuery q;
            q.dataset = inst.dataset;
            q.new_assortment = A;
            q.revenues = revenues;
            PredictionResult res = predict_interval(q);

            PredictionRow row;
            row.m = m_grid[g];
            row.rep = rep;
            row.lower = res.lower;
            row.upper = res.upper;
            row.width = res.upper - res.lower;
            row.true_revenue = true_expected_revenue(inst.spec, A, revenues);
            row.covered = row.true_revenue >= res.lower - 1e-6 && row.true_revenue <= res.upper + 1e-6;

            MnlFit mnl = fit_mnl_mle(inst.dataset);
            double denom = 0.0;
            for (int i : A) denom += std::exp(mnl.nu[i]);
            double pred = 0.0;
            for (int i : A) pred += revenues[i] * std::exp(mnl.nu[i]) / denom;
            row.mnl_prediction = pred;
            row.mnl_inside = pred >= res.lower - 1e-9 && pred <= res.upper + 1e-9;
            rows[k] = row;
        },
        spec.threads);
    return rows;
}

std::vector<LimitCompareRow> run_limit_compare(const ExperimentSpec& spec,
                                               const std::vector<int>& m_grid) {
    std::vector<LimitCompareRow> rows(m_grid.size() * spec.replications);
    std::vector<std::pair<int, int>> tasks;
    for (std::size_t g = 0; g < m_grid.size(); ++g) {
        for (int rep = 0; rep < spec.replications; ++rep) {
            tasks.push_back({static_cast<int>(g), rep});
        }
    }
    parallel_for(
        tasks.size(),
        [&](std::size_t k) {
            const auto [g, rep] = tasks[k];
            GeneratorConfig cfg = spec.base;
            cfg.m = m_grid[g];
            cfg.seed = split_seed(spec.base.seed, 400 + 1000 * g + rep);
            auto collection = gen_collection(cfg);
            ChoiceDataset data = gen_uniform(cfg.n, collection, cfg.seed);

            LimitCompareRow row;
            row.m = m_grid[g];
            row.rep = rep;
            row.mdm_loss = limit_mdm(data, {}, LimitOptions{LimitMethod::Auto, 5040, 1}).loss;
            row.mnl_loss = fit_mnl_mle(data).loss;
            row.rum_loss = cfg.n <= 6 ? limit_rum(data).loss : -1.0;
            rows[k] = row;
        },
        spec.threads);
    return rows;
}

std::vector<GroupingEffectRow> run_grouping_effect(const ExperimentSpec& spec) {
    std::vector<GroupingEffectRow> rows(spec.replications);
    parallel_for(
        static_cast<std::size_t>(spec.replications),
        [&](std::size_t rep) {
            GeneratorConfig cfg = spec.base;
            cfg.seed = split_seed(spec.base.seed, 500 + rep);
            auto collection = gen_collection(cfg);
            // One shared marginal with distinct utilities: an APU ground truth.
            MdmInstance inst = gen_mdm(cfg.n, collection, {1.0}, Grouping::single_group(cfg.n),
                                       cfg.seed);
            const auto A = held_out_assortment(cfg.n, collection, cfg.seed, 2, 3);
            const auto revenues = random_revenues(cfg.n, cfg.seed);

            PredictionQuery q;
            q.dataset = inst.dataset;
            q.new_assortment = A;
            q.revenues = revenues;
            PredictionResult plain = predict_interval(q);

            q.grouping = Grouping::single_group(cfg.n);
            PredictionResult grouped = predict_interval_gmdm(q);

            rows[rep] = GroupingEffectRow{static_cast<int>(rep), plain.upper - plain.lower,
                                          grouped.upper - grouped.lower};
        },
        spec.threads);
    return rows;
}

std::vector<GroupingRecoveryRow> run_grouping_recovery(const ExperimentSpec& spec,
                                                       const std::vector<int>& m_grid) {
    std::vector<GroupingRecoveryRow> rows(m_grid.size() * spec.replications);
    std::vector<std::pair<int, int>> tasks;
    for (std::size_t g = 0; g < m_grid.size(); ++g) {
        for (int rep = 0; rep < spec.replications; ++rep) {
            tasks.push_back({static_cast<int>(g), rep});
        }
    }
    parallel_for(
        tasks.size(),
        [&](std::size_t k) {
            const auto [g, rep] = tasks[k];
            GeneratorConfig cfg = spec.base;
            cfg.m = m_grid[g];
            cfg.seed = split_seed(spec.base.seed, 600 + 1000 * g + rep);
            auto collection = gen_collection(cfg);

            // Balanced random two-group truth; narrow vs wide uniform
            // marginals give observable rank flips across assortments.
            std::mt19937_64 rng(split_seed(cfg.seed, 77));
            std::vector<int> order(cfg.n);
            std::iota(order.begin(), order.end(), 1);
            std::shuffle(order.begin(), order.end(), rng);
            Grouping truth;
            truth.assignment.assign(cfg.n + 1, 0);
            truth.num_groups = 2;
            for (int idx = 0; idx < cfg.n; ++idx) {
                truth.assignment[order[idx]] = idx < cfg.n / 2 ? 1 : 2;
            }
            std::vector<Marginal> families;
            for (double w : cfg.group_widths) families.push_back(uniform_marginal(w));
            MdmInstance inst = gen_mdm(cfg.n, collection, families, truth, cfg.seed);

            GroupingResult found =
                identify_grouping(inst.dataset, std::min(4, cfg.n), 1, cfg.seed);
            rows[k] = GroupingRecoveryRow{m_grid[g], rep,
                                          grouping_accuracy(found.grouping, truth)};
        },
        spec.threads);
    return rows;
}

std::string run_experiment_csv(const ExperimentSpec& spec) {
    std::ostringstream out;
    switch (spec.id) {
        case ExperimentId::RepPower: {
            out << "alpha,reps,mdm_fraction,mnl_fraction,regular_fraction,mean_check_ms\n";
            for (const auto& r : run_rep_power(spec)) {
                out << format_double(r.alpha) << ',' << r.reps << ','
                    << format_double(r.mdm_fraction) << ',' << format_double(r.mnl_fraction) << ','
                    << format_double(r.regular_fraction) << ',' << format_double(r.mean_check_ms)
                    << '\n';
            }
            break;
        }
        case ExperimentId::RepVsRum: {
            out << "m,alpha,reps,mdm_fraction,rum_fraction,mdm_ms,rum_ms\n";
            for (const auto& r : run_rep_vs_rum(spec)) {
                out << r.m << ',' << format_double(r.alpha) << ',' << r.reps << ','
                    << format_double(r.mdm_fraction) << ',' << format_double(r.rum_fraction) << ','
                    << format_double(r.mdm_ms) << ',' << format_double(r.rum_ms) << '\n';
            }
            break;
        }
        case ExperimentId::Prediction: {
            out << "m,rep,lower,upper,true_revenue,covered,mnl_prediction,mnl_inside\n";
            for (const auto& r : run_prediction(spec)) {
                out << r.m << ',' << r.rep << ',' << format_double(r.lower) << ','
                    << format_double(r.upper) << ',' << format_double(r.true_revenue) << ','
                    << (r.covered ? 1 : 0) << ',' << format_double(r.mnl_prediction) << ','
                    << (r.mnl_inside ? 1 : 0) << '\n';
            }
            break;
        }
        case ExperimentId::LimitCompare: {
            out << "m,rep,mdm_loss,mnl_loss,rum_loss\n";
            for (const auto& r : run_limit_compare(spec)) {
                out << r.m << ',' << r.rep << ',' << format_double(r.mdm_loss) << ','
                    << format_double(r.mnl_loss) << ','
                    << (r.rum_loss < 0 ? std::string("NA") : format_double(r.rum_loss)) << '\n';
            }
            break;
        }
        case ExperimentId::GroupingEffect: {
            out << "rep,width_plain,width_grouped\n";
            for (const auto& r : run_grouping_effect(spec)) {
                out << r.rep << ',' << format_double(r.width_plain) << ','
                    << format_double(r.width_grouped) << '\n';
            }
            break;
        }
        case ExperimentId::GroupingRecovery: {
            out << "m,rep,v_measure\n";
            for (const auto& r : run_grouping_recovery(spec)) {
                out << r.m << ',' << r.rep << ',' << format_double(r.v_measure) << '\n';
            }
            break;
        }
    }
    return out.str();
}

const char* to_string(ExperimentId id) {
    switch (id) {
        case ExperimentId::RepPower: return "rep_power";
        case ExperimentId::RepVsRum: return "rep_vs_rum";
        case ExperimentId::Prediction: return "prediction";
        case ExperimentId::LimitCompare: return "limit_compare";
        case ExperimentId::GroupingEffect: return "grouping_effect";
        case ExperimentId::GroupingRecovery: return "grouping_recovery";
    }
    return "rep_power";
}

bool experiment_id_from_string(const std::string& name, ExperimentId& out) {
    for (ExperimentId id : {ExperimentId::RepPower, ExperimentId::RepVsRum, ExperimentId::Prediction,
                            ExperimentId::LimitCompare, ExperimentId::GroupingEffect,
                            ExperimentId::GroupingRecovery}) {
        if (name == to_string(id)) {
            out = id;
            return true;
        }
    }
    return false;
}

} // namespace mdm
