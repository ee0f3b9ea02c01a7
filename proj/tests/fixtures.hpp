#pragma once

// Worked-example datasets shared by the unit and acceptance suites.

#include <random>
#include <vector>

#include "mdm/core.hpp"
#include "mdm/datagen.hpp"

namespace fixtures {

using mdm::ChoiceDataset;

// n=3 over {1,2,3},{1,2},{1,3},{2,3}: consistent with a ranking distribution
// but not with any assortment disutility order.
inline ChoiceDataset rum_not_mdm_n3() {
    return ChoiceDataset(3,
                         {{1, 2, 3}, {1, 2}, {1, 3}, {2, 3}},
                         {{1.0 / 3, 1.0 / 3, 1.0 / 3},
                          {5.0 / 9, 4.0 / 9},
                          {4.0 / 9, 5.0 / 9},
                          {5.0 / 9, 4.0 / 9}});
}

// n=4 pair: the first is ranking-representable but order-inconsistent, the
// second is order-consistent but violates the Block-Marschak inequality.
inline ChoiceDataset rum_not_mdm_n4() {
    return ChoiceDataset(4,
                         {{1, 2, 3, 4}, {1, 2, 3}, {1, 2, 4}, {1, 2}},
                         {{3.0 / 20, 3.0 / 20, 7.0 / 20, 7.0 / 20},
                          {7.0 / 20, 2.0 / 8, 2.0 / 5},
                          {2.0 / 8, 7.0 / 20, 2.0 / 5},
                          {0.5, 0.5}});
}

inline ChoiceDataset mdm_not_rum_n4() {
    return ChoiceDataset(4,
                         {{1, 2, 3, 4}, {1, 2, 3}, {1, 2, 4}, {1, 2}},
                         {{0.1, 0.2, 0.2, 0.5},
                          {0.2, 0.25, 0.55},
                          {0.2, 0.25, 0.55},
                          {0.25, 0.75}});
}

// The non-convexity pair over A={1,2}, B={1,3}, C={2,3}; both endpoints are
// representable while their 0.4/0.6 mixture is not.
inline ChoiceDataset nonconvex_x() {
    return ChoiceDataset(3, {{1, 2}, {1, 3}, {2, 3}},
                         {{0.3, 0.7}, {0.9, 0.1}, {0.8, 0.2}});
}

inline ChoiceDataset nonconvex_y() {
    return ChoiceDataset(3, {{1, 2}, {1, 3}, {2, 3}},
                         {{0.75, 0.25}, {0.1, 0.9}, {0.2, 0.8}});
}

inline ChoiceDataset mix(const ChoiceDataset& a, const ChoiceDataset& b, double wa) {
    std::vector<std::vector<double>> probs = a.probs();
    for (std::size_t s = 0; s < probs.size(); ++s) {
        for (std::size_t k = 0; k < probs[s].size(); ++k) {
            probs[s][k] = wa * probs[s][k] + (1.0 - wa) * b.probs()[s][k];
        }
    }
    return a.with_probs(std::move(probs));
}

// Two assortments that no single shared marginal can explain, while the
// grouping {{1,3},{2,4}} can.
inline ChoiceDataset group_required() {
    return ChoiceDataset(4, {{1, 2, 3}, {1, 2, 4}},
                         {{0.28, 0.40, 0.32}, {0.25, 0.20, 0.55}});
}

// Single-group non-convexity pair over A={1,2,3}, B={1,2}, C={1,3}.
inline ChoiceDataset apu_p() {
    return ChoiceDataset(3, {{1, 2, 3}, {1, 2}, {1, 3}},
                         {{0.1, 0.2, 0.7}, {0.4, 0.6}, {0.25, 0.75}});
}

inline ChoiceDataset apu_q() {
    return ChoiceDataset(3, {{1, 2, 3}, {1, 2}, {1, 3}},
                         {{0.6, 0.3, 0.1}, {0.65, 0.35}, {0.8, 0.2}});
}

// Kemeny-reduction instances on n=6, m=3; the first admits a consistent
// order (zero loss), the second has optimal loss 2/9.
inline ChoiceDataset kemeny_feasible() {
    return ChoiceDataset(6, {{1, 2, 4}, {1, 3, 5}, {2, 3, 6}},
                         {{1.0 / 9, 1.0 / 9, 7.0 / 9},
                          {2.0 / 9, 1.0 / 9, 6.0 / 9},
                          {2.0 / 9, 2.0 / 9, 5.0 / 9}});
}

inline ChoiceDataset kemeny_infeasible() {
    return ChoiceDataset(6, {{1, 2, 4}, {1, 3, 5}, {2, 3, 6}},
                         {{1.0 / 9, 2.0 / 9, 6.0 / 9},
                          {2.0 / 9, 1.0 / 9, 6.0 / 9},
                          {1.0 / 9, 2.0 / 9, 6.0 / 9}});
}

// Random dataset with independent rows (not representable in general).
inline ChoiceDataset random_dataset(int n, int m, std::uint64_t seed, int min_size = 2,
                                    int max_size = 3) {
    mdm::GeneratorConfig cfg;
    cfg.n = n;
    cfg.m = m;
    cfg.min_size = min_size;
    cfg.max_size = max_size;
    cfg.seed = seed;
    auto collection = mdm::gen_collection(cfg);
    std::vector<std::vector<double>> probs;
    std::mt19937_64 rng(mdm::split_seed(seed, 991));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (const auto& s : collection) {
        std::vector<double> row(s.size());
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

} // namespace fixtures
