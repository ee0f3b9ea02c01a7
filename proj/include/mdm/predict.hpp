#pragma once

#include <optional>
#include <vector>

#include "mdm/core.hpp"

namespace mdm {

enum class PredictMethod { Auto, GeneralMilp, NestedEnum, StructuredLp };

struct PredictionQuery {
    ChoiceDataset dataset;
    std::vector<int> new_assortment;    // sorted product ids, not in the collection
    std::vector<double> revenues;       // per product, index 0 unused
    std::optional<Grouping> grouping;   // present = G-MDM prediction
    PredictMethod method = PredictMethod::Auto;
};

struct PredictionResult {
    double lower = 0.0;
    double upper = 0.0;
    std::vector<double> argmin_probs; // aligned to the new assortment
    std::vector<double> argmax_probs;
    PredictMethod method = PredictMethod::GeneralMilp; // method actually used
};

// Worst-case / best-case expected revenue over all MDM models consistent
// with the data. Dispatches to the structured LP when the extended
// collection is nested or laminar, to the nested enumeration when only the
// data collection is nested, and to the general MILP otherwise.
PredictionResult predict_interval(const PredictionQuery& query);

// The |S|+1 position LPs for a nested collection, exposed for
// cross-validation against the general MILP.
PredictionResult predict_nested_enum(const PredictionQuery& query);

// G-MDM variant over a product grouping; with singleton groups this matches
// predict_interval.
PredictionResult predict_interval_gmdm(const PredictionQuery& query);

const char* to_string(PredictMethod m);
std::string to_json(const PredictionResult& r, const std::vector<int>& assortment);

} // namespace mdm
