#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mdm/core.hpp"
#include "mdm/datagen.hpp"

namespace mdm {

enum class ExperimentId {
    RepPower,
    RepVsRum,
    Prediction,
    LimitCompare,
    GroupingEffect,
    GroupingRecovery,
};

struct ExperimentSpec {
    ExperimentId id = ExperimentId::RepPower;
    GeneratorConfig base;   // n, sizes, seed
    int replications = 100;
    int threads = 0;        // 1 = serial reference
};

// Per-cell results; each experiment exposes its raw rows so tests can
// assert on them and the CLI can render CSV.

struct RepPowerRow {
    double alpha;
    int reps;
    double mdm_fraction;
    double mnl_fraction;
    double regular_fraction;
    double mean_check_ms;
};
std::vector<RepPowerRow> run_rep_power(const ExperimentSpec& spec,
                                       const std::vector<double>& alphas = {0.25, 0.5, 0.75, 1.0});

struct RepVsRumRow {
    int m;
    double alpha;
    int reps;
    double mdm_fraction;
    double rum_fraction;
    double mdm_ms;
    double rum_ms;
};
std::vector<RepVsRumRow> run_rep_vs_rum(const ExperimentSpec& spec,
                                        const std::vector<int>& m_grid = {2, 3, 5, 10},
                                        double alpha = 0.5);

struct PredictionRow {
    int m;
    int rep;
    double lower, upper;
    double true_revenue;
    bool covered;
    double width;
    double mnl_prediction;
    bool mnl_inside;
};
std::vector<PredictionRow> run_prediction(const ExperimentSpec& spec,
                                          const std::vector<int>& m_grid = {5, 10, 20});

struct LimitCompareRow {
    int m;
    int rep;
    double mdm_loss;
    double mnl_loss;
    double rum_loss; // negative when skipped (n > 6)
};
std::vector<LimitCompareRow> run_limit_compare(const ExperimentSpec& spec,
                                               const std::vector<int>& m_grid = {5, 10, 20});

struct GroupingEffectRow {
    int rep;
    double width_plain;   // singleton groups (plain MDM)
    double width_grouped; // one shared group (APU)
};
std::vector<GroupingEffectRow> run_grouping_effect(const ExperimentSpec& spec);

struct GroupingRecoveryRow {
    int m;
    int rep;
    double v_measure;
};
std::vector<GroupingRecoveryRow> run_grouping_recovery(
    const ExperimentSpec& spec, const std::vector<int>& m_grid = {20, 60, 80, 100});

// Dispatch by id, rendering the canonical CSV (deterministic under seed).
std::string run_experiment_csv(const ExperimentSpec& spec);

const char* to_string(ExperimentId id);
bool experiment_id_from_string(const std::string& name, ExperimentId& out);

} // namespace mdm
