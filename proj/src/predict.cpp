#include "mdm/predict.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <json.hpp>

#include "mdm/detail/relations.hpp"
#include "mdm/represent.hpp"
#include "mdm/solver.hpp"

namespace mdm {

namespace {

void validate_query(const PredictionQuery& q) {
    require_valid(q.dataset);
    if (q.new_assortment.size() < 2) {
        throw Error(ErrorCode::InvalidDataset, "the new assortment needs at least 2 products");
    }
    for (int i : q.new_assortment) {
        if (i < 1 || i > q.dataset.n_products()) {
            throw Error(ErrorCode::InvalidDataset, "new assortment product id out of range");
        }
    }
    for (const auto& s : q.dataset.assortments()) {
        if (s == q.new_assortment) {
            throw Error(ErrorCode::InvalidDataset, "the new assortment already has observed data");
        }
    }
    if (static_cast<int>(q.revenues.size()) != q.dataset.n_products() + 1) {
        throw Error(ErrorCode::InvalidDataset, "need one revenue entry per product");
    }
}

bool is_subset(const std::vector<int>& a, const std::vector<int>& b) {
    return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

struct MinMax {
    SolveResult lo, hi;
};

// Solves min and max of r.x over the same constraint set.
MinMax solve_both(LinearProgram lp, const std::vector<int>& xvar,
                  const PredictionQuery& q) {
    for (std::size_t k = 0; k < q.new_assortment.size(); ++k) {
        lp.objective[xvar[k]] = q.revenues[q.new_assortment[k]];
    }
    MinMax out;
    out.lo = solve_lp(lp);
    for (double& c : lp.objective) c = -c;
    out.hi = solve_lp(lp);
    out.hi.value = -out.hi.value;
    return out;
}

PredictionResult structured_lp(const PredictionQuery& q) {
    const auto& A = q.new_assortment;
    LinearProgram lp;
    std::vector<int> x(A.size());
    for (std::size_t k = 0; k < A.size(); ++k) x[k] = lp.add_var(0.0, 1.0);
    for (int s = 0; s < q.dataset.num_assortments(); ++s) {
        const auto& S = q.dataset.assortment(s);
        const bool s_in_a = is_subset(S, A);
        const bool a_in_s = is_subset(A, S);
        if (!s_in_a && !a_in_s) continue;
        for (std::size_t k = 0; k < A.size(); ++k) {
            const int pos = q.dataset.position(A[k], s);
            if (pos < 0) continue;
            const double p = q.dataset.probs()[s][pos];
            if (s_in_a) lp.add_row({{x[k], 1.0}}, Relation::Le, p);
            if (a_in_s) lp.add_row({{x[k], 1.0}}, Relation::Ge, p);
        }
    }
    std::vector<std::pair<int, double>> sum;
    for (int xk : x) sum.push_back({xk, 1.0});
    lp.add_row(std::move(sum), Relation::Eq, 1.0);

    MinMax mm = solve_both(lp, x, q);
    if (mm.lo.status != SolveStatus::Optimal || mm.hi.status != SolveStatus::Optimal) {
        throw Error(ErrorCode::SolverFailure, "structured prediction LP did not solve");
    }
    PredictionResult res;
    res.method = PredictMethod::StructuredLp;
    res.lower = mm.lo.value;
    res.upper = mm.hi.value;
    for (std::size_t k = 0; k < A.size(); ++k) {
        res.argmin_probs.push_back(mm.lo.solution[x[k]]);
        res.argmax_probs.push_back(mm.hi.solution[x[k]]);
    }
    return res;
}

PredictionResult general_milp(const PredictionQuery& q) {
    const auto& data = q.dataset;
    const auto& A = q.new_assortment;
    const int m = data.num_assortments();
    const double eps = 1.0 / (2.0 * m + 1.0);

    detail::RelationClasses classes = detail::build_classes(data);
    if (classes.cyclic) {
        throw Error(ErrorCode::DataNotRepresentable, "choice data is not MDM-representable");
    }
    const int nc = classes.num_classes;

    // Representative probability of product i within a lambda class is well
    // defined: a shared product with different probabilities would force the
    // two assortments apart.
    LinearProgram lp;
    std::vector<int> x(A.size());
    for (std::size_t k = 0; k < A.size(); ++k) x[k] = lp.add_var(0.0, 1.0);
    std::vector<int> lam(nc);
    for (int c = 0; c < nc; ++c) lam[c] = lp.add_var(0.0, 1.0);
    const int lam_a = lp.add_var(0.0, 1.0);

    for (const auto& [c1, c2] : classes.strict) {
        lp.add_row({{lam[c1], 1.0}, {lam[c2], -1.0}}, Relation::Ge, eps);
    }
    std::vector<std::pair<int, double>> sum;
    for (int xk : x) sum.push_back({xk, 1.0});
    lp.add_row(std::move(sum), Relation::Eq, 1.0);

    MixedIntegerProgram mip;
    std::vector<signed char> overlap(nc, 0);
    std::vector<std::vector<std::pair<int, double>>> class_probs(nc); // (k, p_{A[k],class})
    for (int s = 0; s < m; ++s) {
        const int c = classes.class_of[s];
        for (std::size_t k = 0; k < A.size(); ++k) {
            const int pos = data.position(A[k], s);
            if (pos < 0) continue;
            overlap[c] = 1;
            auto& cp = class_probs[c];
            const double p = data.probs()[s][pos];
            bool present = false;
            for (auto& [kk, pp] : cp) present = present || kk == static_cast<int>(k);
            if (!present) cp.push_back({static_cast<int>(k), p});
        }
    }

    lp.rows.reserve(lp.rows.size() + 8 * static_cast<std::size_t>(nc));
    for (int c = 0; c < nc; ++c) {
        if (!overlap[c]) continue;
        const int d_as = lp.add_var(0.0, 1.0); // 1 iff lambda_A < lambda_c
        const int d_sa = lp.add_var(0.0, 1.0); // 1 iff lambda_c < lambda_A
        mip.binaries.push_back(d_as);
        mip.binaries.push_back(d_sa);
        // -d_as <= lambda_A - lambda_c <= 1 - (1+eps) d_as
        lp.add_row({{lam_a, 1.0}, {lam[c], -1.0}, {d_as, 1.0}}, Relation::Ge, 0.0);
        lp.add_row({{lam_a, 1.0}, {lam[c], -1.0}, {d_as, 1.0 + eps}}, Relation::Le, 1.0);
        lp.add_row({{lam[c], 1.0}, {lam_a, -1.0}, {d_sa, 1.0}}, Relation::Ge, 0.0);
        lp.add_row({{lam[c], 1.0}, {lam_a, -1.0}, {d_sa, 1.0 + eps}}, Relation::Le, 1.0);
        for (const auto& [k, p] : class_probs[c]) {
            // d_as - 1 <= x_k - p <= 1 - d_sa, and |x_k - p| <= d_as + d_sa.
            lp.add_row({{x[k], 1.0}, {d_as, -1.0}}, Relation::Ge, p - 1.0);
            lp.add_row({{x[k], 1.0}, {d_sa, 1.0}}, Relation::Le, p + 1.0);
            lp.add_row({{x[k], 1.0}, {d_as, 1.0}, {d_sa, 1.0}}, Relation::Ge, p);
            lp.add_row({{x[k], 1.0}, {d_as, -1.0}, {d_sa, -1.0}}, Relation::Le, p);
        }
    }

    mip.lp = std::move(lp);
    for (std::size_t k = 0; k < A.size(); ++k) {
        mip.lp.objective[x[k]] = q.revenues[A[k]];
    }
    SolveResult lo = solve_milp(mip);
    for (double& c : mip.lp.objective) c = -c;
    SolveResult hi = solve_milp(mip);
    if (lo.status != SolveStatus::Optimal || hi.status != SolveStatus::Optimal) {
        throw Error(ErrorCode::SolverFailure, "prediction MILP did not solve");
    }
    PredictionResult res;
    res.method = PredictMethod::GeneralMilp;
    res.lower = lo.value;
    res.upper = -hi.value;
    for (std::size_t k = 0; k < A.size(); ++k) {
        res.argmin_probs.push_back(lo.solution[x[k]]);
        res.argmax_probs.push_back(hi.solution[x[k]]);
    }
    return res;
}

} // namespace

PredictionResult predict_nested_enum(const PredictionQuery& q) {
    validate_query(q);
    const auto& data = q.dataset;
    const auto& A = q.new_assortment;
    const int m = data.num_assortments();

    // Order the collection as a chain S_1 subset ... subset S_m.
    std::vector<int> order(m);
    for (int s = 0; s < m; ++s) order[s] = s;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return data.assortment(a).size() < data.assortment(b).size();
    });
    for (int k = 0; k + 1 < m; ++k) {
        if (!is_subset(data.assortment(order[k]), data.assortment(order[k + 1]))) {
            throw Error(ErrorCode::NotNested, "the collection is not a nested chain");
        }
    }

    PredictionResult res;
    res.method = PredictMethod::NestedEnum;
    res.lower = kInf;
    res.upper = -kInf;
    // Position k: lambda_A sits between lambda_{S_k} and lambda_{S_{k+1}}
    // (sentinels p_{i,S_0} = 1 and p_{i,S_{m+1}} = 0 are vacuous bounds).
    for (int k = 0; k <= m; ++k) {
        LinearProgram lp;
        std::vector<int> x(A.size());
        for (std::size_t j = 0; j < A.size(); ++j) x[j] = lp.add_var(0.0, 1.0);
        if (k >= 1) {
            const int s = order[k - 1];
            for (std::size_t j = 0; j < A.size(); ++j) {
                const int pos = data.position(A[j], s);
                if (pos >= 0) lp.add_row({{x[j], 1.0}}, Relation::Le, data.probs()[s][pos]);
            }
        }
        for (int later = k; later < m; ++later) {
            const int s = order[later];
            for (std::size_t j = 0; j < A.size(); ++j) {
                const int pos = data.position(A[j], s);
                if (pos >= 0) lp.add_row({{x[j], 1.0}}, Relation::Ge, data.probs()[s][pos]);
            }
        }
        std::vector<std::pair<int, double>> sum;
        for (int xj : x) sum.push_back({xj, 1.0});
        lp.add_row(std::move(sum), Relation::Eq, 1.0);

        MinMax mm = solve_both(lp, x, q);
        if (mm.lo.status == SolveStatus::Optimal && mm.lo.value < res.lower) {
            res.lower = mm.lo.value;
            res.argmin_probs.clear();
            for (int xj : x) res.argmin_probs.push_back(mm.lo.solution[xj]);
        }
        if (mm.hi.status == SolveStatus::Optimal && mm.hi.value > res.upper) {
            res.upper = mm.hi.value;
            res.argmax_probs.clear();
            for (int xj : x) res.argmax_probs.push_back(mm.hi.solution[xj]);
        }
    }
    if (res.argmin_probs.empty() || res.argmax_probs.empty()) {
        throw Error(ErrorCode::SolverFailure, "every nested position was infeasible");
    }
    return res;
}

PredictionResult predict_interval(const PredictionQuery& q) {
    validate_query(q);
    if (!check_mdm(q.dataset)) {
        throw Error(ErrorCode::DataNotRepresentable, "choice data is not MDM-representable");
    }

    auto extended = q.dataset.assortments();
    extended.push_back(q.new_assortment);
    const CollectionStructure ext = collection_structure(extended);
    const CollectionStructure base = collection_structure(q.dataset);

    PredictMethod method = q.method;
    if (method == PredictMethod::Auto) {
        if (ext != CollectionStructure::General) {
            method = PredictMethod::StructuredLp;
        } else if (base == CollectionStructure::Nested) {
            method = PredictMethod::NestedEnum;
        } else {
            method = PredictMethod::GeneralMilp;
        }
    }
    switch (method) {
        case PredictMethod::StructuredLp: return structured_lp(q);
        case PredictMethod::NestedEnum: return predict_nested_enum(q);
        default: return general_milp(q);
    }
}

PredictionResult predict_interval_gmdm(const PredictionQuery& q) {
    validate_query(q);
    if (!q.grouping) {
        throw Error(ErrorCode::InvalidGrouping, "G-MDM prediction needs a grouping");
    }
    const Grouping& grouping = *q.grouping;
    require_valid(grouping, q.dataset.n_products());
    if (!check_gmdm(q.dataset, grouping)) {
        throw Error(ErrorCode::DataNotRepresentable, "choice data is not G-MDM-representable");
    }

    const auto& data = q.dataset;
    const auto& A = q.new_assortment;
    const int m = data.num_assortments();
    const int n = data.n_products();
    const double eps = 1.0 / (2.0 * n * m + 1.0);

    LinearProgram lp;
    std::vector<int> x(A.size());
    for (std::size_t k = 0; k < A.size(); ++k) x[k] = lp.add_var(0.0, 1.0);
    std::vector<int> lam(m);
    for (int s = 0; s < m; ++s) lam[s] = lp.add_var(-kInf, kInf);
    const int lam_a = lp.add_var(-kInf, kInf);
    std::vector<int> nu(n + 1, -1);
    for (int i = 1; i <= n; ++i) nu[i] = lp.add_var(-kInf, kInf);

    // z_{i,S} = lambda_S - nu_i stays in [0,1] across the extended collection.
    auto z_bounds = [&](int lam_var, int product) {
        lp.add_row({{lam_var, 1.0}, {nu[product], -1.0}}, Relation::Ge, 0.0);
        lp.add_row({{lam_var, 1.0}, {nu[product], -1.0}}, Relation::Le, 1.0);
    };
    for (int s = 0; s < m; ++s) {
        for (int i : data.assortment(s)) z_bounds(lam[s], i);
    }
    for (int i : A) z_bounds(lam_a, i);

    struct Item {
        int product;
        int lam_var;
        double p;      // observed probability; ignored when x_var >= 0
        int x_var;     // -1 for observed items
    };
    std::vector<Item> items;
    for (int s = 0; s < m; ++s) {
        for (int i : data.assortment(s)) items.push_back({i, lam[s], data.prob(i, s), -1});
    }
    for (std::size_t k = 0; k < A.size(); ++k) {
        items.push_back({A[k], lam_a, 0.0, x[k]});
    }

    MixedIntegerProgram mip;
    for (std::size_t a = 0; a < items.size(); ++a) {
        for (std::size_t b = a + 1; b < items.size(); ++b) {
            const Item& u = items[a];
            const Item& v = items[b];
            if (grouping.group_of(u.product) != grouping.group_of(v.product)) continue;

            if (u.x_var < 0 && v.x_var < 0) {
                // Both observed: the pinned x values force the pattern, so the
                // z relation can be added outright.
                switch (classify_pair(u.p, v.p)) {
                    case ProbRelation::Less: // z_u > z_v
                        lp.add_row({{u.lam_var, 1.0}, {nu[u.product], -1.0},
                                    {v.lam_var, -1.0}, {nu[v.product], 1.0}},
                                   Relation::Ge, eps);
                        continue;
                    case ProbRelation::Greater:
                        lp.add_row({{v.lam_var, 1.0}, {nu[v.product], -1.0},
                                    {u.lam_var, -1.0}, {nu[u.product], 1.0}},
                                   Relation::Ge, eps);
                        continue;
                    case ProbRelation::EqualZero:
                        continue; // no constraint in either direction
                    case ProbRelation::EqualNonzero:
                        break; // the closure admits three patterns; keep binaries
                }
            }

            const int d_uv = lp.add_var(0.0, 1.0); // 1 iff z_u < z_v
            const int d_vu = lp.add_var(0.0, 1.0);
            mip.binaries.push_back(d_uv);
            mip.binaries.push_back(d_vu);
            // -d <= z_u - z_v <= 1 - (1+eps) d and the mirror.
            lp.add_row({{u.lam_var, 1.0}, {nu[u.product], -1.0},
                        {v.lam_var, -1.0}, {nu[v.product], 1.0}, {d_uv, 1.0}},
                       Relation::Ge, 0.0);
            lp.add_row({{u.lam_var, 1.0}, {nu[u.product], -1.0},
                        {v.lam_var, -1.0}, {nu[v.product], 1.0}, {d_uv, 1.0 + eps}},
                       Relation::Le, 1.0);
            lp.add_row({{v.lam_var, 1.0}, {nu[v.product], -1.0},
                        {u.lam_var, -1.0}, {nu[u.product], 1.0}, {d_vu, 1.0}},
                       Relation::Ge, 0.0);
            lp.add_row({{v.lam_var, 1.0}, {nu[v.product], -1.0},
                        {u.lam_var, -1.0}, {nu[u.product], 1.0}, {d_vu, 1.0 + eps}},
                       Relation::Le, 1.0);
            // d_uv - 1 <= x_u - x_v <= 1 - d_vu and |x_u - x_v| <= d_uv + d_vu,
            // with observed values substituted as constants.
            auto x_diff_rows = [&](double const_part, std::vector<std::pair<int, double>> vars) {
                auto with = [&](std::vector<std::pair<int, double>> extra, Relation rel, double rhs) {
                    for (auto& e : vars) extra.push_back(e);
                    lp.add_row(std::move(extra), rel, rhs);
                };
                with({{d_uv, -1.0}}, Relation::Ge, -1.0 - const_part);
                with({{d_vu, 1.0}}, Relation::Le, 1.0 - const_part);
                with({{d_uv, 1.0}, {d_vu, 1.0}}, Relation::Ge, -const_part);
                with({{d_uv, -1.0}, {d_vu, -1.0}}, Relation::Le, -const_part);
            };
            std::vector<std::pair<int, double>> vars;
            double const_part = 0.0;
            if (u.x_var >= 0) vars.push_back({u.x_var, 1.0});
            else const_part += u.p;
            if (v.x_var >= 0) vars.push_back({v.x_var, -1.0});
            else const_part -= v.p;
            x_diff_rows(const_part, std::move(vars));
        }
    }

    std::vector<std::pair<int, double>> sum;
    for (int xk : x) sum.push_back({xk, 1.0});
    lp.add_row(std::move(sum), Relation::Eq, 1.0);

    mip.lp = std::move(lp);
    for (std::size_t k = 0; k < A.size(); ++k) {
        mip.lp.objective[x[k]] = q.revenues[A[k]];
    }
    SolveResult lo = solve_milp(mip);
    for (double& c : mip.lp.objective) c = -c;
    SolveResult hi = solve_milp(mip);
    if (lo.status != SolveStatus::Optimal || hi.status != SolveStatus::Optimal) {
        throw Error(ErrorCode::SolverFailure, "G-MDM prediction MILP did not solve");
    }
    PredictionResult res;
    res.method = PredictMethod::GeneralMilp;
    res.lower = lo.value;
    res.upper = -hi.value;
    for (std::size_t k = 0; k < A.size(); ++k) {
        res.argmin_probs.push_back(lo.solution[x[k]]);
        res.argmax_probs.push_back(hi.solution[x[k]]);
    }
    return res;
}

const char* to_string(PredictMethod m) {
    switch (m) {
        case PredictMethod::Auto: return "auto";
        case PredictMethod::GeneralMilp: return "milp";
        case PredictMethod::NestedEnum: return "nested";
        case PredictMethod::StructuredLp: return "structured";
    }
    return "milp";
}

std::string to_json(const PredictionResult& r, const std::vector<int>& assortment) {
    nlohmann::json j;
    j["lower"] = r.lower;
    j["upper"] = r.upper;
    nlohmann::json lo = nlohmann::json::object(), hi = nlohmann::json::object();
    for (std::size_t k = 0; k < assortment.size(); ++k) {
        lo[std::to_string(assortment[k])] = r.argmin_probs[k];
        hi[std::to_string(assortment[k])] = r.argmax_probs[k];
    }
    j["argmin"] = std::move(lo);
    j["argmax"] = std::move(hi);
    j["method"] = to_string(r.method);
    return j.dump(2);
}

} // namespace mdm
