#include "mdm/core.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

namespace mdm {

using nlohmann::json;

ChoiceDataset::ChoiceDataset(int n_products, std::vector<std::vector<int>> assortments,
                             std::vector<std::vector<double>> probs, std::vector<double> weights)
    : n_(n_products),
      assortments_(std::move(assortments)),
      probs_(std::move(probs)),
      weights_(std::move(weights)) {
    for (auto& s : assortments_) {
        std::sort(s.begin(), s.end());
    }
}

bool ChoiceDataset::contains(int s, int product) const {
    const auto& a = assortments_[s];
    return std::binary_search(a.begin(), a.end(), product);
}

int ChoiceDataset::position(int product, int s) const {
    const auto& a = assortments_[s];
    auto it = std::lower_bound(a.begin(), a.end(), product);
    if (it == a.end() || *it != product) return -1;
    return static_cast<int>(it - a.begin());
}

double ChoiceDataset::prob(int product, int s) const {
    int pos = position(product, s);
    if (pos < 0) {
        throw Error(ErrorCode::InvalidDataset,
                    "probability requested for a product outside the assortment");
    }
    return probs_[s][pos];
}

ChoiceDataset ChoiceDataset::with_probs(std::vector<std::vector<double>> probs) const {
    ChoiceDataset out = *this;
    out.probs_ = std::move(probs);
    return out;
}

ChoiceDataset ChoiceDataset::prefix(int count) const {
    ChoiceDataset out;
    out.n_ = n_;
    out.assortments_.assign(assortments_.begin(), assortments_.begin() + count);
    out.probs_.assign(probs_.begin(), probs_.begin() + count);
    if (!weights_.empty()) out.weights_.assign(weights_.begin(), weights_.begin() + count);
    return out;
}

Grouping Grouping::singletons(int n) {
    Grouping g;
    g.assignment.resize(n + 1);
    for (int i = 1; i <= n; ++i) g.assignment[i] = i;
    g.num_groups = n;
    return g;
}

Grouping Grouping::single_group(int n) {
    Grouping g;
    g.assignment.assign(n + 1, 1);
    g.assignment[0] = 0;
    g.num_groups = 1;
    return g;
}

double weighted_l1_loss(const ChoiceDataset& data, const std::vector<std::vector<double>>& fitted) {
    double loss = 0.0;
    for (int s = 0; s < data.num_assortments(); ++s) {
        double row = 0.0;
        for (std::size_t k = 0; k < data.probs()[s].size(); ++k) {
            row += std::abs(data.probs()[s][k] - fitted[s][k]);
        }
        loss += data.weight(s) * row;
    }
    return loss;
}

std::vector<Violation> validate(const ChoiceDataset& data) {
    std::vector<Violation> out;
    const int m = data.num_assortments();
    if (data.n_products() < 1) {
        out.push_back({ViolationKind::ProductOutOfRange, -1, "n_products must be positive"});
    }
    if (static_cast<int>(data.probs().size()) != m) {
        out.push_back({ViolationKind::ShapeMismatch, -1, "probs rows do not match assortments"});
        return out;
    }
    if (!data.weights_raw().empty() && static_cast<int>(data.weights_raw().size()) != m) {
        out.push_back({ViolationKind::ShapeMismatch, -1, "weights do not match assortments"});
    }
    std::set<std::vector<int>> seen;
    for (int s = 0; s < m; ++s) {
        const auto& a = data.assortment(s);
        std::ostringstream tag;
        tag << "assortment " << s;
        if (a.size() < 2) {
            out.push_back({ViolationKind::AssortmentTooSmall, s, tag.str() + " has fewer than 2 products"});
        }
        bool ids_ok = true;
        for (std::size_t k = 0; k < a.size(); ++k) {
            if (a[k] < 1 || a[k] > data.n_products() || (k > 0 && a[k] == a[k - 1])) {
                ids_ok = false;
            }
        }
        if (!ids_ok) {
            out.push_back({ViolationKind::ProductOutOfRange, s, tag.str() + " has invalid product ids"});
        }
        if (!seen.insert(a).second) {
            out.push_back({ViolationKind::DuplicateAssortment, s, tag.str() + " duplicates an earlier product set"});
        }
        if (data.probs()[s].size() != a.size()) {
            out.push_back({ViolationKind::ShapeMismatch, s, tag.str() + " probability row has wrong length"});
            continue;
        }
        double sum = 0.0;
        bool range_ok = true;
        for (double p : data.probs()[s]) {
            if (p < -kProbZeroTol || p > 1.0 + kRowSumTol || std::isnan(p)) range_ok = false;
            sum += p;
        }
        if (!range_ok) {
            out.push_back({ViolationKind::ProbOutOfRange, s, tag.str() + " has probabilities outside [0,1]"});
        }
        if (std::abs(sum - 1.0) > kRowSumTol) {
            std::ostringstream msg;
            msg << tag.str() << " probabilities sum to " << sum;
            out.push_back({ViolationKind::NormalizationViolation, s, msg.str()});
        }
        if (!data.weights_raw().empty() && data.weights_raw()[s] < 0.0) {
            out.push_back({ViolationKind::NegativeWeight, s, tag.str() + " has a negative weight"});
        }
    }
    return out;
}

void require_valid(const ChoiceDataset& data) {
    auto violations = validate(data);
    if (!violations.empty()) {
        throw Error(ErrorCode::InvalidDataset, "invalid dataset: " + violations.front().message);
    }
}

void require_valid(const Grouping& grouping, int n_products) {
    if (grouping.n_products() != n_products) {
        throw Error(ErrorCode::InvalidGrouping, "grouping size does not match the dataset");
    }
    std::vector<bool> used(grouping.num_groups + 1, false);
    for (int i = 1; i <= n_products; ++i) {
        int g = grouping.assignment[i];
        if (g < 1 || g > grouping.num_groups) {
            throw Error(ErrorCode::InvalidGrouping, "group id out of range");
        }
        used[g] = true;
    }
    for (int g = 1; g <= grouping.num_groups; ++g) {
        if (!used[g]) throw Error(ErrorCode::InvalidGrouping, "group ids are not contiguous");
    }
}

std::vector<ComparablePair> comparable_pairs(const ChoiceDataset& data) {
    std::vector<ComparablePair> out;
    const int m = data.num_assortments();
    for (int s = 0; s < m; ++s) {
        for (int t = s + 1; t < m; ++t) {
            const auto& a = data.assortment(s);
            const auto& b = data.assortment(t);
            std::size_t i = 0, j = 0;
            while (i < a.size() && j < b.size()) {
                if (a[i] < b[j]) {
                    ++i;
                } else if (a[i] > b[j]) {
                    ++j;
                } else {
                    out.push_back({a[i], s, t});
                    ++i;
                    ++j;
                }
            }
        }
    }
    return out;
}

namespace {

bool is_subset(const std::vector<int>& a, const std::vector<int>& b) {
    return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

bool is_disjoint(const std::vector<int>& a, const std::vector<int>& b) {
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] < b[j]) ++i;
        else if (a[i] > b[j]) ++j;
        else return false;
    }
    return true;
}

} // namespace

CollectionStructure collection_structure(const std::vector<std::vector<int>>& assortments) {
    bool nested = true;
    bool laminar = true;
    for (std::size_t s = 0; s < assortments.size() && laminar; ++s) {
        for (std::size_t t = s + 1; t < assortments.size() && laminar; ++t) {
            bool comparable = is_subset(assortments[s], assortments[t]) ||
                              is_subset(assortments[t], assortments[s]);
            if (!comparable) {
                nested = false;
                if (!is_disjoint(assortments[s], assortments[t])) laminar = false;
            }
        }
    }
    if (nested) return CollectionStructure::Nested;
    if (laminar) return CollectionStructure::Laminar;
    return CollectionStructure::General;
}

CollectionStructure collection_structure(const ChoiceDataset& data) {
    return collection_structure(data.assortments());
}

const char* to_string(CollectionStructure s) {
    switch (s) {
        case CollectionStructure::Nested: return "nested";
        case CollectionStructure::Laminar: return "laminar";
        default: return "general";
    }
}

ProbRelation classify_pair(double p_a, double p_b) {
    if (std::abs(p_a - p_b) <= kProbEqualTol) {
        return (p_a <= kProbZeroTol && p_b <= kProbZeroTol) ? ProbRelation::EqualZero
                                                            : ProbRelation::EqualNonzero;
    }
    return p_a < p_b ? ProbRelation::Less : ProbRelation::Greater;
}

std::string to_json(const ChoiceDataset& data) {
    json j;
    j["n"] = data.n_products();
    j["assortments"] = data.assortments();
    j["probs"] = data.probs();
    if (!data.weights_raw().empty()) j["weights"] = data.weights_raw();
    return j.dump(2);
}

ChoiceDataset dataset_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::Parse, std::string("dataset JSON parse error: ") + e.what());
    }
    try {
        int n = j.at("n").get<int>();
        auto assortments = j.at("assortments").get<std::vector<std::vector<int>>>();
        auto probs = j.at("probs").get<std::vector<std::vector<double>>>();
        std::vector<double> weights;
        if (j.contains("weights") && !j["weights"].is_null()) {
            weights = j["weights"].get<std::vector<double>>();
        }
        return ChoiceDataset(n, std::move(assortments), std::move(probs), std::move(weights));
    } catch (const json::exception& e) {
        throw Error(ErrorCode::Parse, std::string("dataset JSON schema error: ") + e.what());
    }
}

ChoiceDataset load_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return dataset_from_json(buf.str());
}

std::string to_json(const MdmCertificate& cert, const ChoiceDataset& data) {
    json lam;
    for (int s = 0; s < data.num_assortments(); ++s) {
        lam.push_back(cert.lambda[s]);
    }
    json j;
    j["lambda"] = lam;
    j["epsilon"] = cert.epsilon;
    return j.dump(2);
}

std::string to_json(const GmdmCertificate& cert, const ChoiceDataset& data) {
    json j;
    json lam;
    for (int s = 0; s < data.num_assortments(); ++s) lam.push_back(cert.lambda[s]);
    j["lambda"] = lam;
    j["nu"] = std::vector<double>(cert.nu.begin() + 1, cert.nu.end());
    j["epsilon"] = cert.epsilon;
    return j.dump(2);
}

std::string to_json(const Grouping& grouping) {
    json j;
    j["k"] = grouping.num_groups;
    j["assignment"] = std::vector<int>(grouping.assignment.begin() + 1, grouping.assignment.end());
    return j.dump(2);
}

Grouping grouping_from_json(const std::string& text) {
    try {
        json j = json::parse(text);
        Grouping g;
        auto assignment = j.at("assignment").get<std::vector<int>>();
        g.assignment.resize(assignment.size() + 1);
        g.assignment[0] = 0;
        std::copy(assignment.begin(), assignment.end(), g.assignment.begin() + 1);
        g.num_groups = j.contains("k") ? j["k"].get<int>()
                                       : *std::max_element(assignment.begin(), assignment.end());
        return g;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::Parse, std::string("grouping JSON error: ") + e.what());
    }
}

ChoiceDataset dataset_from_transactions_csv(const std::string& transactions_path,
                                            const std::string& sidecar_path) {
    std::ifstream side(sidecar_path);
    if (!side) throw Error(ErrorCode::Io, "cannot open " + sidecar_path);
    json sj;
    try {
        side >> sj;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::Parse, std::string("sidecar JSON error: ") + e.what());
    }

    std::map<int, std::vector<int>> sets;
    int n = 0;
    for (auto& [key, value] : sj.items()) {
        auto products = value.get<std::vector<int>>();
        std::sort(products.begin(), products.end());
        for (int p : products) n = std::max(n, p);
        sets[std::stoi(key)] = std::move(products);
    }

    std::ifstream in(transactions_path);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + transactions_path);
    std::map<int, std::map<int, std::int64_t>> counts;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto comma = line.find(',');
        if (comma == std::string::npos) {
            throw Error(ErrorCode::Parse, "transaction line missing comma: " + line);
        }
        std::string head = line.substr(0, comma);
        if (first && head == "assortment_id") { // optional header
            first = false;
            continue;
        }
        first = false;
        int assortment_id, product;
        try {
            assortment_id = std::stoi(head);
            product = std::stoi(line.substr(comma + 1));
        } catch (const std::exception&) {
            throw Error(ErrorCode::Parse, "bad transaction line: " + line);
        }
        counts[assortment_id][product] += 1;
    }

    std::vector<std::vector<int>> assortments;
    std::vector<std::vector<double>> probs;
    std::vector<double> weights;
    for (const auto& [id, per_product] : counts) {
        auto it = sets.find(id);
        if (it == sets.end()) {
            throw Error(ErrorCode::Parse, "assortment id missing from sidecar: " + std::to_string(id));
        }
        const auto& products = it->second;
        double total = 0.0;
        for (const auto& [p, c] : per_product) {
            if (!std::binary_search(products.begin(), products.end(), p)) {
                throw Error(ErrorCode::Parse, "transaction chooses a product outside its assortment");
            }
            total += static_cast<double>(c);
        }
        std::vector<double> row(products.size(), 0.0);
        for (std::size_t k = 0; k < products.size(); ++k) {
            auto cit = per_product.find(products[k]);
            if (cit != per_product.end()) row[k] = static_cast<double>(cit->second) / total;
        }
        assortments.push_back(products);
        probs.push_back(std::move(row));
        weights.push_back(total);
    }
    return ChoiceDataset(n, std::move(assortments), std::move(probs), std::move(weights));
}

} // namespace mdm
