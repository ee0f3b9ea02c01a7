#pragma once

#include <vector>

#include "mdm/core.hpp"

namespace mdm {

struct DistanceMatrix {
    int n = 0;
    std::vector<double> values; // row-major n*n, symmetric, zero diagonal

    double at(int i, int j) const { return values[(i - 1) * n + (j - 1)]; }
    double& at(int i, int j) { return values[(i - 1) * n + (j - 1)]; }
};

// LP-measured violation of the grouped-representability conditions when
// products i and j share a marginal: negative parts of the strict cross-pair
// slacks plus absolute equality-pair violations, subject to the MDM lambda
// constraints. Requires representable data.
double pairwise_distance(const ChoiceDataset& data, int i, int j);

// All n(n-1)/2 pairwise LPs; they are independent, so the batch runs in
// parallel (threads = 1 for the serial reference path).
DistanceMatrix compute_distance_matrix(const ChoiceDataset& data, int threads = 0);

struct GroupingResult {
    Grouping grouping;
    std::vector<double> inertia; // inertia[k-1] = total medoid distance with k clusters
};

// Distance matrix + K-medoids (PAM) for K = 1..k_max, picking K by the
// largest second difference of the inertia curve.
GroupingResult identify_grouping(const ChoiceDataset& data, int k_max, int threads = 0,
                                 std::uint64_t seed = 0);

// PAM on a precomputed matrix: greedy build, swap to a local optimum,
// 10 seeded restarts.
std::vector<int> k_medoids(const DistanceMatrix& dist, int k, std::uint64_t seed = 0);
double clustering_inertia(const DistanceMatrix& dist, const std::vector<int>& medoid_of);

// V-measure: harmonic mean of homogeneity and completeness.
double grouping_accuracy(const Grouping& predicted, const Grouping& truth);

} // namespace mdm
