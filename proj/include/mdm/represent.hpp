#pragma once

#include <optional>
#include <variant>
#include <vector>

#include "mdm/core.hpp"

namespace mdm {

// Strictly increasing piecewise-linear CDF given by breakpoints with finite
// support endpoints. F = 0 left of the first breakpoint, 1 right of the last.
struct PiecewiseLinearCdf {
    std::vector<double> x;
    std::vector<double> f; // nondecreasing, f.front() == 0, f.back() == 1

    double eval(double v) const;
    double support_left() const { return x.front(); }
    double support_right() const { return x.back(); }
};

// Exponential CDF 1 - exp(-rate*v) on [0, inf); kept in closed form so MNL
// ground truths are exact.
struct ExponentialCdf {
    double rate = 1.0;
    double eval(double v) const;
};

struct Marginal {
    std::variant<PiecewiseLinearCdf, ExponentialCdf> cdf;

    double eval(double v) const;
    double support_left() const;
    // +inf for the exponential family.
    double support_right() const;
};

// An explicit MDM instance: one marginal and one deterministic utility per
// product (index 0 unused).
struct MarginalSpec {
    std::vector<Marginal> marginals;
    std::vector<double> nu;

    int n_products() const { return static_cast<int>(nu.size()) - 1; }
};

enum class CheckEngine { Graph, Lp };

// Theorem-style representability check: Some(lambda, epsilon) iff a
// disutility function over assortments is consistent with every observed
// strict/equal probability relation. The LP engine maximizes the strictness
// margin; the graph engine merges equality classes and topologically sorts
// the strict edges. Both must agree on feasibility.
std::optional<MdmCertificate> check_mdm(const ChoiceDataset& data,
                                        CheckEngine engine = CheckEngine::Graph);

std::optional<GmdmCertificate> check_gmdm(const ChoiceDataset& data, const Grouping& grouping);

// p_{i,S} >= p_{i,T} for all i in S, S subset of T, within tolerance.
bool check_regular(const ChoiceDataset& data);

// Some(nu) iff positive weights exp(nu) reproduce every observed probability
// exactly (tolerance 1e-7).
std::optional<std::vector<double>> check_mnl(const ChoiceDataset& data);

// Feasibility of a distribution over all n! rankings reproducing the data.
// Refuses n > 7.
bool check_rum(const ChoiceDataset& data);

// Verifies a certificate against the dataset relations.
bool certificate_valid(const ChoiceDataset& data, const MdmCertificate& cert);

// Constructive half of the characterization: piecewise-linear marginals
// through (lambda(S), 1 - p_{i,S}) with free tail slope delta = 1 and all
// nu_i = 0. Feeding the result back through the assortment solver reproduces
// the data.
MarginalSpec synthesize_marginals(const ChoiceDataset& data, const MdmCertificate& cert);

std::string to_json(const MarginalSpec& spec);
MarginalSpec marginal_spec_from_json(const std::string& text);

} // namespace mdm
