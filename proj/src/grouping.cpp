#include "mdm/grouping.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include "mdm/datagen.hpp"
#include "mdm/detail/relations.hpp"
#include "mdm/parallel.hpp"
#include "mdm/represent.hpp"
#include "mdm/solver.hpp"

namespace mdm {

double pairwise_distance(const ChoiceDataset& data, int i, int j) {
    require_valid(data);
    if (i == j) return 0.0;
    const int m = data.num_assortments();
    const double eps = 1.0 / (2.0 * m + 1.0);

    // One lambda variable per forced-equality class; strict edges come
    // transitively reduced, which keeps the LP small at large |S|.
    detail::RelationClasses classes = detail::build_classes(data);
    if (classes.cyclic) {
        throw Error(ErrorCode::DataNotRepresentable,
                    "the grouping tool expects MDM-representable data");
    }

    LinearProgram lp;
    std::vector<int> class_lam(classes.num_classes);
    for (int c = 0; c < classes.num_classes; ++c) class_lam[c] = lp.add_var(0.0, 1.0);
    std::vector<int> lam(m);
    for (int s = 0; s < m; ++s) lam[s] = class_lam[classes.class_of[s]];
    const int nu_i = lp.add_var(-kInf, kInf);
    const int nu_j = lp.add_var(-kInf, kInf);

    for (const auto& [c1, c2] : classes.strict) {
        lp.add_row({{class_lam[c1], 1.0}, {class_lam[c2], -1.0}}, Relation::Ge, eps);
    }

    // Cross-product tuples in both orientations; the objective accumulates
    // negative parts of strict-pair slacks and absolute equality violations.
    // Strict tuples carry the same margin as the hard order rows, so a tied
    // boundary assignment cannot mask a genuine conflict.
    auto z_diff = [&](int s, int nu_a, int t, int nu_b) {
        return std::vector<std::pair<int, double>>{
            {lam[s], 1.0}, {nu_a, -1.0}, {lam[t], -1.0}, {nu_b, 1.0}};
    };
    for (int s = 0; s < m; ++s) {
        const int pos_is = data.position(i, s);
        if (pos_is < 0) continue;
        const double p_is = data.probs()[s][pos_is];
        for (int t = 0; t < m; ++t) {
            const int pos_jt = data.position(j, t);
            if (pos_jt < 0) continue;
            const double p_jt = data.probs()[t][pos_jt];
            switch (classify_pair(p_is, p_jt)) {
                case ProbRelation::Less: {
                    // Wants z_{i,s} >= z_{j,t} + eps; y covers the deficit.
                    const int y = lp.add_var(0.0, kInf, 1.0);
                    auto row = z_diff(s, nu_i, t, nu_j);
                    row.push_back({y, 1.0});
                    lp.add_row(std::move(row), Relation::Ge, eps);
                    break;
                }
                case ProbRelation::Greater: {
                    const int y = lp.add_var(0.0, kInf, 1.0);
                    auto row = z_diff(t, nu_j, s, nu_i);
                    row.push_back({y, 1.0});
                    lp.add_row(std::move(row), Relation::Ge, eps);
                    break;
                }
                case ProbRelation::EqualNonzero: {
                    const int z = lp.add_var(0.0, kInf, 1.0);
                    auto pos_row = z_diff(s, nu_i, t, nu_j);
                    pos_row.push_back({z, 1.0});
                    lp.add_row(std::move(pos_row), Relation::Ge, 0.0);
                    auto neg_row = z_diff(s, nu_i, t, nu_j);
                    neg_row.push_back({z, -1.0});
                    lp.add_row(std::move(neg_row), Relation::Le, 0.0);
                    break;
                }
                case ProbRelation::EqualZero: break;
            }
        }
    }

    SolveResult r = solve_lp(lp);
    if (r.status != SolveStatus::Optimal) {
        throw Error(ErrorCode::DataNotRepresentable,
                    "grouping distance LP infeasible; is the data MDM-representable?");
    }
    return std::max(0.0, r.value);
}

DistanceMatrix compute_distance_matrix(const ChoiceDataset& data, int threads) {
    require_valid(data);
    if (!check_mdm(data)) {
        throw Error(ErrorCode::DataNotRepresentable,
                    "the grouping tool expects MDM-representable data");
    }
    const int n = data.n_products();
    DistanceMatrix dist;
    dist.n = n;
    dist.values.assign(static_cast<std::size_t>(n) * n, 0.0);

    std::vector<std::pair<int, int>> tasks;
    for (int i = 1; i <= n; ++i) {
        for (int j = i + 1; j <= n; ++j) tasks.push_back({i, j});
    }
    parallel_for(
        tasks.size(),
        [&](std::size_t k) {
            const auto [i, j] = tasks[k];
            const double d = pairwise_distance(data, i, j);
            dist.at(i, j) = d;
            dist.at(j, i) = d;
        },
        threads);
    return dist;
}

namespace {

std::vector<int> assign_to_medoids(const DistanceMatrix& dist, const std::vector<int>& medoids) {
    std::vector<int> medoid_of(dist.n + 1, 0);
    for (int i = 1; i <= dist.n; ++i) {
        int best = medoids[0];
        for (int mcand : medoids) {
            if (dist.at(i, mcand) < dist.at(i, best)) best = mcand;
        }
        medoid_of[i] = best;
    }
    return medoid_of;
}

double total_cost(const DistanceMatrix& dist, const std::vector<int>& medoids) {
    double cost = 0.0;
    for (int i = 1; i <= dist.n; ++i) {
        double best = kInf;
        for (int mcand : medoids) best = std::min(best, dist.at(i, mcand));
        cost += best;
    }
    return cost;
}

// Swap phase: replace one medoid by one non-medoid while it improves.
void pam_swap(const DistanceMatrix& dist, std::vector<int>& medoids) {
    bool improved = true;
    double cost = total_cost(dist, medoids);
    while (improved) {
        improved = false;
        for (std::size_t a = 0; a < medoids.size(); ++a) {
            for (int cand = 1; cand <= dist.n; ++cand) {
                if (std::find(medoids.begin(), medoids.end(), cand) != medoids.end()) continue;
                std::vector<int> trial = medoids;
                trial[a] = cand;
                const double c = total_cost(dist, trial);
                if (c < cost - 1e-12) {
                    medoids = trial;
                    cost = c;
                    improved = true;
                }
            }
        }
    }
}

} // namespace

std::vector<int> k_medoids(const DistanceMatrix& dist, int k, std::uint64_t seed) {
    const int n = dist.n;
    k = std::min(k, n);

    // Greedy build phase.
    std::vector<int> medoids;
    for (int step = 0; step < k; ++step) {
        int best = -1;
        double best_cost = kInf;
        for (int cand = 1; cand <= n; ++cand) {
            if (std::find(medoids.begin(), medoids.end(), cand) != medoids.end()) continue;
            medoids.push_back(cand);
            const double c = total_cost(dist, medoids);
            medoids.pop_back();
            if (c < best_cost) {
                best_cost = c;
                best = cand;
            }
        }
        medoids.push_back(best);
    }
    pam_swap(dist, medoids);
    double best_cost = total_cost(dist, medoids);

    std::vector<int> all(n);
    std::iota(all.begin(), all.end(), 1);
    for (int restart = 1; restart < 10; ++restart) {
        std::mt19937_64 rng(split_seed(seed, static_cast<std::uint64_t>(restart)));
        std::vector<int> trial = all;
        std::shuffle(trial.begin(), trial.end(), rng);
        trial.resize(k);
        pam_swap(dist, trial);
        const double c = total_cost(dist, trial);
        if (c < best_cost - 1e-12) {
            best_cost = c;
            medoids = trial;
        }
    }
    return assign_to_medoids(dist, medoids);
}

double clustering_inertia(const DistanceMatrix& dist, const std::vector<int>& medoid_of) {
    double cost = 0.0;
    for (int i = 1; i <= dist.n; ++i) cost += dist.at(i, medoid_of[i]);
    return cost;
}

GroupingResult identify_grouping(const ChoiceDataset& data, int k_max, int threads,
                                 std::uint64_t seed) {
    const int n = data.n_products();
    if (k_max < 1 || k_max > n) {
        throw Error(ErrorCode::InvalidGrouping, "k_max must lie in [1, n]");
    }
    DistanceMatrix dist = compute_distance_matrix(data, threads);

    GroupingResult out;
    std::vector<std::vector<int>> assignments(k_max + 1);
    for (int k = 1; k <= k_max; ++k) {
        assignments[k] = k_medoids(dist, k, seed);
        out.inertia.push_back(clustering_inertia(dist, assignments[k]));
    }

    // Elbow: the largest discrete second difference of the inertia curve;
    // a flat curve collapses to one group.
    int chosen = k_max;
    if (out.inertia[0] <= 1e-9) {
        chosen = 1;
    } else if (k_max >= 3) {
        double best = -kInf;
        for (int k = 2; k <= k_max - 1; ++k) {
            const double dd = out.inertia[k - 2] - 2.0 * out.inertia[k - 1] + out.inertia[k];
            if (dd > best + 1e-12) {
                best = dd;
                chosen = k;
            }
        }
    }

    const auto& medoid_of = assignments[chosen];
    std::map<int, int> relabel;
    Grouping g;
    g.assignment.assign(n + 1, 0);
    for (int i = 1; i <= n; ++i) {
        auto [it, fresh] = relabel.insert({medoid_of[i], static_cast<int>(relabel.size()) + 1});
        g.assignment[i] = it->second;
        (void)fresh;
    }
    g.num_groups = static_cast<int>(relabel.size());
    out.grouping = std::move(g);
    return out;
}

double grouping_accuracy(const Grouping& predicted, const Grouping& truth) {
    const int n = truth.n_products();
    if (predicted.n_products() != n) {
        throw Error(ErrorCode::InvalidGrouping, "groupings cover different universes");
    }
    // Contingency table between truth classes (C) and predicted clusters (K).
    std::map<std::pair<int, int>, double> joint;
    std::map<int, double> c_count, k_count;
    for (int i = 1; i <= n; ++i) {
        joint[{truth.group_of(i), predicted.group_of(i)}] += 1.0;
        c_count[truth.group_of(i)] += 1.0;
        k_count[predicted.group_of(i)] += 1.0;
    }
    const double total = n;
    auto entropy = [&](const std::map<int, double>& counts) {
        double h = 0.0;
        for (const auto& [label, c] : counts) {
            const double p = c / total;
            if (p > 0.0) h -= p * std::log(p);
        }
        return h;
    };
    const double h_c = entropy(c_count);
    const double h_k = entropy(k_count);
    double h_c_given_k = 0.0, h_k_given_c = 0.0;
    for (const auto& [ck, cnt] : joint) {
        const double p = cnt / total;
        h_c_given_k -= p * std::log(cnt / k_count[ck.second]);
        h_k_given_c -= p * std::log(cnt / c_count[ck.first]);
    }
    const double homogeneity = h_c <= 1e-12 ? 1.0 : 1.0 - h_c_given_k / h_c;
    const double completeness = h_k <= 1e-12 ? 1.0 : 1.0 - h_k_given_c / h_k;
    if (homogeneity + completeness <= 1e-12) return 0.0;
    return 2.0 * homogeneity * completeness / (homogeneity + completeness);
}

} // namespace mdm
