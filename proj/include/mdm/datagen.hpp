#pragma once

#include <cstdint>
#include <vector>

#include "mdm/core.hpp"
#include "mdm/represent.hpp"

namespace mdm {

// SplitMix64 used to derive independent per-assortment / per-cell streams
// from one master seed.
std::uint64_t split_seed(std::uint64_t seed, std::uint64_t index);

enum class CollectionKind { Random, Nested, Laminar };

struct GeneratorConfig {
    int n = 7;
    int m = 20; // collection size
    CollectionKind collection = CollectionKind::Random;
    int min_size = 2;
    int max_size = 3;           // used by Random: sizes drawn uniformly in [min,max]
    double inclusion_prob = 0.0; // Random alternative: Bernoulli membership when > 0
    std::uint64_t seed = 0;
    double alpha = 0.0; // perturbation fraction
    double sigma = 0.0; // perturbation noise scale
    // Exponential rate per group for gen_mdm instances.
    std::vector<double> group_rates = {1.0, 4.0};
    // Uniform-marginal half widths per group for recovery experiments.
    std::vector<double> group_widths = {0.5, 2.5};
};

// Distinct random assortments of size >= 2; Nested builds a chain, Laminar a
// subtree family. Throws Error{InfeasibleConfig} when m distinct sets cannot
// exist.
std::vector<std::vector<int>> gen_collection(const GeneratorConfig& config);

// p_{i,S} = exp(nu_i) / sum_{j in S} exp(nu_j).
ChoiceDataset gen_mnl(int n, const std::vector<std::vector<int>>& collection,
                      const std::vector<double>& nu);

// Standard-normal utilities, then gen_mnl.
ChoiceDataset gen_mnl_random(int n, const std::vector<std::vector<int>>& collection,
                             std::uint64_t seed);

enum class DistinctVariant {
    PowersOfTwo, // x_k = 2^k: all subset sums distinct
    Product,     // x_1 = 2, x_{k+1} = x_k * sum(x_1..x_k): all p_{i,S} distinct
};

// Utilities nu_i = ln x_i for the requested integer construction.
std::vector<double> gen_mnl_distinct(int n, DistinctVariant variant);

// Multiplicative Gaussian noise on a Bernoulli(alpha) mask, clamped to [0,1]
// and renormalized per assortment.
ChoiceDataset perturb(const ChoiceDataset& data, double alpha, double sigma,
                      std::uint64_t seed);

// Forward MDM solve: bisection on t for sum_{i in S} max(0, 1 - F_i(t - nu_i)) = 1,
// returning the choice probabilities for S.
std::vector<double> solve_mdm_assortment(const MarginalSpec& spec, const std::vector<int>& S);

struct MdmInstance {
    ChoiceDataset dataset;
    Grouping grouping;
    MarginalSpec spec;
};

// Ground-truth G-MDM instance: uniform utilities, one marginal prototype per
// group, probabilities from the forward solver per assortment.
MdmInstance gen_mdm(int n, const std::vector<std::vector<int>>& collection,
                    const std::vector<Marginal>& group_marginals, const Grouping& grouping,
                    std::uint64_t seed);

// Exponential-family convenience overload (one rate per group).
MdmInstance gen_mdm(int n, const std::vector<std::vector<int>>& collection,
                    const std::vector<double>& group_rates, const Grouping& grouping,
                    std::uint64_t seed);

// Centered uniform CDF on [-half_width, half_width]; narrow = low-variance
// utilities, wide = heavy spread. Pairs of different widths produce rank
// flips across assortments, the observable grouping signal.
Marginal uniform_marginal(double half_width);

// Number of discordant pairs among commonly ranked elements; partial
// rankings allowed.
int kendall_tau(const std::vector<int>& a, const std::vector<int>& b);

} // namespace mdm
