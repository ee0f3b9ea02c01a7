#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace mdm {

// Probabilities closer than this are treated as equal when extracting the
// strict/equal relations of the characterization.
inline constexpr double kProbEqualTol = 1e-9;
// A probability at or below this is treated as exactly zero.
inline constexpr double kProbZeroTol = 1e-12;
// Row sums must match 1 within this tolerance.
inline constexpr double kRowSumTol = 1e-9;

enum class ErrorCode {
    InvalidDataset,
    InvalidGrouping,
    TooManyProducts,
    CollectionTooLarge,
    DataNotRepresentable,
    NotNested,
    SolverFailure,
    CycleLimitExceeded,
    NodeLimitExceeded,
    NonConvergence,
    BisectionBracketFailure,
    InfeasibleConfig,
    OverflowRisk,
    CertificateInvalid,
    Io,
    Parse,
};

struct Error : std::runtime_error {
    Error(ErrorCode c, const std::string& msg) : std::runtime_error(msg), code(c) {}
    ErrorCode code;
};

// Choice data over a universe {1..n}: an ordered list of assortments
// (sorted product-id sets) with one probability per product of each
// assortment, plus optional per-assortment weights.
class ChoiceDataset {
public:
    ChoiceDataset() = default;
    ChoiceDataset(int n_products, std::vector<std::vector<int>> assortments,
                  std::vector<std::vector<double>> probs,
                  std::vector<double> weights = {});

    int n_products() const { return n_; }
    int num_assortments() const { return static_cast<int>(assortments_.size()); }
    const std::vector<std::vector<int>>& assortments() const { return assortments_; }
    const std::vector<int>& assortment(int s) const { return assortments_[s]; }
    const std::vector<std::vector<double>>& probs() const { return probs_; }
    double weight(int s) const { return weights_.empty() ? 1.0 : weights_[s]; }
    const std::vector<double>& weights_raw() const { return weights_; }

    bool contains(int s, int product) const;
    // Probability of `product` in assortment index `s`; throws if product not offered.
    double prob(int product, int s) const;
    // Position of `product` within assortment `s`, or -1.
    int position(int product, int s) const;

    ChoiceDataset with_probs(std::vector<std::vector<double>> probs) const;
    // Restriction to a prefix of the assortment list.
    ChoiceDataset prefix(int count) const;

private:
    int n_ = 0;
    std::vector<std::vector<int>> assortments_; // each sorted ascending
    std::vector<std::vector<double>> probs_;    // aligned to assortments_
    std::vector<double> weights_;               // empty = all 1.0
};

struct Grouping {
    std::vector<int> assignment; // product id (1-based) -> group id in 1..K, index 0 unused
    int num_groups = 0;

    static Grouping singletons(int n);
    static Grouping single_group(int n);
    int group_of(int product) const { return assignment[product]; }
    int n_products() const { return static_cast<int>(assignment.size()) - 1; }
};

struct MdmCertificate {
    std::vector<double> lambda; // per assortment index
    double epsilon = 0.0;
};

struct GmdmCertificate {
    std::vector<double> lambda; // per assortment index
    std::vector<double> nu;     // per product, index 0 unused
    double epsilon = 0.0;
};

enum class LossKind { WeightedL1 };

struct LossSpec {
    LossKind kind = LossKind::WeightedL1;
};

// Sum_S w_S sum_i |p_{i,S} - x_{i,S}| with x given per assortment row.
double weighted_l1_loss(const ChoiceDataset& data, const std::vector<std::vector<double>>& fitted);

enum class ViolationKind {
    NormalizationViolation,
    DuplicateAssortment,
    AssortmentTooSmall,
    ProductOutOfRange,
    ProbOutOfRange,
    NegativeWeight,
    ShapeMismatch,
};

struct Violation {
    ViolationKind kind;
    int assortment_index = -1; // -1 when not tied to a single assortment
    std::string message;
};

std::vector<Violation> validate(const ChoiceDataset& data);
void require_valid(const ChoiceDataset& data);
void require_valid(const Grouping& grouping, int n_products);

struct ComparablePair {
    int product;
    int s; // assortment index
    int t; // assortment index, s < t
};

// All (i,S,T) with i in S∩T, each unordered assortment pair emitted once.
std::vector<ComparablePair> comparable_pairs(const ChoiceDataset& data);

enum class CollectionStructure { Nested, Laminar, General };

CollectionStructure collection_structure(const ChoiceDataset& data);
CollectionStructure collection_structure(const std::vector<std::vector<int>>& assortments);

const char* to_string(CollectionStructure s);

// Relation of two observed probabilities under the core tolerances.
enum class ProbRelation { Less, Greater, EqualNonzero, EqualZero };
ProbRelation classify_pair(double p_a, double p_b);

// JSON (de)serialization of the canonical dataset schema, and CSV
// transaction import (transactions + assortment sidecar).
std::string to_json(const ChoiceDataset& data);
ChoiceDataset dataset_from_json(const std::string& text);
ChoiceDataset load_dataset(const std::string& path);
std::string to_json(const MdmCertificate& cert, const ChoiceDataset& data);
std::string to_json(const GmdmCertificate& cert, const ChoiceDataset& data);
std::string to_json(const Grouping& grouping);
Grouping grouping_from_json(const std::string& text);
ChoiceDataset dataset_from_transactions_csv(const std::string& transactions_path,
                                            const std::string& sidecar_path);

} // namespace mdm
