#pragma once

#include <cstdint>
#include <vector>

#include "mdm/core.hpp"

namespace mdm {

enum class LimitMethod { Auto, Milp, RankingEnum, StructuredLp };

struct LimitResult {
    double loss = 0.0;
    std::vector<std::vector<double>> fitted_probs; // same shape as the dataset rows
    std::vector<double> lambda;                    // per assortment index
    LimitMethod method = LimitMethod::Milp;
};

struct LimitOptions {
    LimitMethod method = LimitMethod::Auto;
    // Auto uses the ranking enumeration while |S|! stays at or below this.
    std::int64_t ranking_cap = 5040;
    int threads = 0; // 1 = serial reference, 0 = all cores
};

// Smallest weighted-L1 distance between the data and any MDM-consistent
// assignment (up to closure), with the fitted probabilities and a consistent
// lambda. Zero iff the data is representable.
LimitResult limit_mdm(const ChoiceDataset& data, const LossSpec& loss = {},
                      const LimitOptions& opts = {});

// G-MDM limit over a grouping; singleton groups reduce to limit_mdm.
LimitResult limit_gmdm(const ChoiceDataset& data, const Grouping& grouping,
                       const LossSpec& loss = {}, const LimitOptions& opts = {});

// Enumerates every total order of the assortments, solving one monotone
// fitting LP per order. Refuses |S| > 7.
LimitResult limit_ranking_enum(const ChoiceDataset& data, const LossSpec& loss = {},
                               int threads = 0);

// Strictly representable assignment within delta of the optimal loss:
// maximizes the strictness margin subject to loss <= L + delta and the
// strict/equal pattern of the optimal lambda. Output passes check_mdm.
struct DeltaOptimal {
    std::vector<std::vector<double>> probs;
    double margin = 0.0;
    double loss = 0.0;
};
DeltaOptimal recover_delta_optimal(const ChoiceDataset& data, const LimitResult& limit,
                                   double delta);

struct MnlFit {
    std::vector<double> nu; // per product, index 0 unused, nu[n] pinned to 0
    std::vector<std::vector<double>> fitted_probs;
    double log_likelihood = 0.0;
    double loss = 0.0; // weighted L1 against the data
};

// Weighted MNL maximum likelihood by gradient ascent with backtracking line
// search; gradient norm <= 1e-7 at exit or Error{NonConvergence}.
MnlFit fit_mnl_mle(const ChoiceDataset& data, int max_iters = 50'000);

// Weighted log-likelihood and its gradient at nu (index 0 unused).
double mnl_log_likelihood(const ChoiceDataset& data, const std::vector<double>& nu);
std::vector<double> mnl_log_likelihood_gradient(const ChoiceDataset& data,
                                                const std::vector<double>& nu);

// L1-best fit over distributions on all n! rankings. Refuses n > 6.
LimitResult limit_rum(const ChoiceDataset& data, const LossSpec& loss = {});

const char* to_string(LimitMethod m);
std::string to_json(const LimitResult& r, const ChoiceDataset& data);

} // namespace mdm
