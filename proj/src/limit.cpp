#include "mdm/limit.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <queue>
#include <set>

#include <json.hpp>

#include "mdm/parallel.hpp"
#include "mdm/represent.hpp"
#include "mdm/solver.hpp"

namespace mdm {

namespace {

struct FitLp {
    LinearProgram base;              // x and |x - p| variables, simplex and loss rows
    std::vector<std::vector<int>> x; // x variable per (assortment, position)
};

FitLp build_fit_lp(const ChoiceDataset& data) {
    FitLp fit;
    LinearProgram& lp = fit.base;
    const int m = data.num_assortments();
    fit.x.resize(m);
    for (int s = 0; s < m; ++s) {
        const auto& row = data.probs()[s];
        const double w = data.weight(s);
        std::vector<std::pair<int, double>> sum;
        for (std::size_t k = 0; k < row.size(); ++k) {
            const int xv = lp.add_var(0.0, 1.0);
            const int zv = lp.add_var(0.0, kInf, w); // z >= |x - p|
            fit.x[s].push_back(xv);
            lp.add_row({{zv, 1.0}, {xv, -1.0}}, Relation::Ge, -row[k]);
            lp.add_row({{zv, 1.0}, {xv, 1.0}}, Relation::Ge, row[k]);
            sum.push_back({xv, 1.0});
        }
        lp.add_row(std::move(sum), Relation::Eq, 1.0);
    }
    return fit;
}

std::vector<std::vector<double>> extract_fitted(const ChoiceDataset& data, const FitLp& fit,
                                                const std::vector<double>& solution) {
    std::vector<std::vector<double>> fitted(data.num_assortments());
    for (int s = 0; s < data.num_assortments(); ++s) {
        for (int xv : fit.x[s]) fitted[s].push_back(solution[xv]);
    }
    return fitted;
}

// Monotone-fit LP for one total order of the assortments: x_{i,S} >= x_{i,T}
// whenever T precedes S, for every shared product.
double solve_order_lp(const ChoiceDataset& data, const FitLp& fit,
                      const std::vector<int>& position, std::vector<double>* solution) {
    LinearProgram lp = fit.base;
    const int m = data.num_assortments();
    for (int s = 0; s < m; ++s) {
        for (int t = s + 1; t < m; ++t) {
            int late = s, early = t;
            if (position[late] < position[early]) std::swap(late, early);
            for (std::size_t k = 0; k < data.assortment(late).size(); ++k) {
                const int i = data.assortment(late)[k];
                const int pos = data.position(i, early);
                if (pos < 0) continue;
                lp.add_row({{fit.x[late][k], 1.0}, {fit.x[early][pos], -1.0}}, Relation::Ge, 0.0);
            }
        }
    }
    SolveResult r = solve_lp(lp);
    if (r.status != SolveStatus::Optimal) {
        throw Error(ErrorCode::SolverFailure, "order-restricted fitting LP did not solve");
    }
    if (solution) *solution = std::move(r.solution);
    return r.value;
}

// Later position = larger probabilities = smaller disutility.
std::vector<double> lambda_from_positions(const std::vector<int>& position) {
    const int m = static_cast<int>(position.size());
    std::vector<double> lambda(m);
    for (int s = 0; s < m; ++s) {
        lambda[s] = static_cast<double>(m - position[s]) / (m + 1);
    }
    return lambda;
}

struct Candidate {
    double loss = kInf;
    std::vector<double> solution;       // over the fit-LP variables
    std::vector<double> lambda;         // per assortment
};

// Copeland-style starting order plus adjacent-swap descent. Every evaluated
// order is MDM-consistent, so its value is a valid upper bound.
Candidate order_heuristic(const ChoiceDataset& data, const FitLp& fit) {
    const int m = data.num_assortments();
    std::vector<double> score(m, 0.0);
    for (int s = 0; s < m; ++s) {
        for (int t = s + 1; t < m; ++t) {
            double net = 0.0;
            for (int i : data.assortment(s)) {
                const int pos = data.position(i, t);
                if (pos < 0) continue;
                const double d = data.prob(i, s) - data.probs()[t][pos];
                if (d > kProbEqualTol) net += 1.0;
                if (d < -kProbEqualTol) net -= 1.0;
            }
            if (net > 0) {
                score[s] += 1.0;
                score[t] -= 1.0;
            } else if (net < 0) {
                score[s] -= 1.0;
                score[t] += 1.0;
            }
        }
    }
    std::vector<int> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return score[a] < score[b] || (score[a] == score[b] && a < b);
    });

    Candidate best;
    std::vector<int> position(m);
    auto eval = [&](std::vector<double>* sol) {
        for (int k = 0; k < m; ++k) position[order[k]] = k;
        return solve_order_lp(data, fit, position, sol);
    };
    std::vector<double> sol;
    best.loss = eval(&sol);
    best.solution = sol;
    best.lambda = lambda_from_positions(position);

    bool improved = true;
    int passes = 0;
    while (improved && ++passes <= 4 && m > 1) {
        improved = false;
        for (int k = 0; k + 1 < m; ++k) {
            std::swap(order[k], order[k + 1]);
            const double loss = eval(&sol);
            if (loss < best.loss - 1e-12) {
                best.loss = loss;
                best.solution = sol;
                best.lambda = lambda_from_positions(position);
                improved = true;
            } else {
                std::swap(order[k], order[k + 1]);
            }
        }
    }
    return best;
}

// ---------------------------------------------------------------------------
// Exact search over relation patterns.
//
// Items carry a latent scalar (lambda_S for MDM, lambda_S - nu_i for G-MDM).
// Every comparable item pair takes a relation in {LT, EQ, GT} on the latent
// scalars, inducing weak monotone rows on the fitted probabilities (smaller
// scalar = larger probability). Branch and bound over relations; a node is
// accepted when the relaxed point induces a globally realizable pattern.
// ---------------------------------------------------------------------------

enum Rel : signed char { kUndecided = -1, kLt = 0, kEq = 1, kGt = 2 };

struct ItemPair {
    int a, b;
    std::vector<std::pair<int, int>> couples; // (x var on the a side, x var on the b side)
};

// realizable(rel, witness): full assignments; witness = lambda per assortment.
// consistent(rel): partial assignments, used to prune early.
struct PatternOracle {
    std::function<bool(const std::vector<signed char>&, std::vector<double>*)> realizable;
    std::function<bool(const std::vector<signed char>&)> consistent;
};

Candidate order_search(const FitLp& fit, const std::vector<ItemPair>& pairs,
                       const PatternOracle& oracle, const Candidate& incumbent,
                       std::int64_t node_limit = 1'000'000) {
    Candidate best = incumbent;

    auto build = [&](const std::vector<signed char>& rel) {
        LinearProgram lp = fit.base;
        for (std::size_t d = 0; d < pairs.size(); ++d) {
            if (rel[d] == kUndecided) continue;
            for (const auto& [va, vb] : pairs[d].couples) {
                switch (rel[d]) {
                    case kLt: lp.add_row({{va, 1.0}, {vb, -1.0}}, Relation::Ge, 0.0); break;
                    case kGt: lp.add_row({{va, 1.0}, {vb, -1.0}}, Relation::Le, 0.0); break;
                    default: lp.add_row({{va, 1.0}, {vb, -1.0}}, Relation::Eq, 0.0); break;
                }
            }
        }
        return lp;
    };

    // The single relation compatible with the relaxed point, or kUndecided
    // when the point mixes directions and the pair must be branched.
    auto classify = [](const ItemPair& pair, const std::vector<double>& x) -> signed char {
        bool ge = true, le = true, strict = false;
        for (const auto& [va, vb] : pair.couples) {
            const double d = x[va] - x[vb];
            if (d > 1e-9) {
                le = false;
                strict = true;
            } else if (d < -1e-9) {
                ge = false;
                strict = true;
            }
        }
        if (!ge && !le) return kUndecided;
        if (!strict) return kEq;
        return ge ? kLt : kGt;
    };

    struct Node {
        double bound;
        std::vector<signed char> rel;
        bool operator<(const Node& o) const { return bound > o.bound; }
    };
    std::priority_queue<Node> open;
    open.push(Node{0.0, std::vector<signed char>(pairs.size(), kUndecided)});

    std::int64_t nodes = 0;
    while (!open.empty()) {
        Node node = open.top();
        open.pop();
        if (node.bound >= best.loss - 1e-9) continue;
        if (++nodes > node_limit) {
            throw Error(ErrorCode::SolverFailure, "relation search node limit reached");
        }
        if (!oracle.consistent(node.rel)) continue;

        SolveResult r = solve_lp(build(node.rel));
        if (r.status != SolveStatus::Optimal || r.value >= best.loss - 1e-9) continue;

        int branch = -1;
        std::vector<signed char> completion = node.rel;
        for (std::size_t d = 0; d < pairs.size() && branch < 0; ++d) {
            if (node.rel[d] != kUndecided) continue;
            const signed char c = classify(pairs[d], r.solution);
            if (c == kUndecided) branch = static_cast<int>(d);
            else completion[d] = c;
        }
        if (branch < 0) {
            std::vector<double> lambda;
            if (oracle.realizable(completion, &lambda)) {
                best.loss = r.value;
                best.solution = r.solution;
                best.lambda = std::move(lambda);
                continue;
            }
            // Point-induced completion fails realizability; keep splitting.
            for (std::size_t d = 0; d < pairs.size(); ++d) {
                if (node.rel[d] == kUndecided) {
                    branch = static_cast<int>(d);
                    break;
                }
            }
            if (branch < 0) continue; // fully decided and unrealizable
        }
        for (signed char c : {kLt, kEq, kGt}) {
            Node child{r.value, node.rel};
            child.rel[branch] = c;
            open.push(std::move(child));
        }
    }
    return best;
}

// Realizability of assortment-level relation patterns: union equalities,
// then the strict digraph must be acyclic. Witness lambda by chain depth.
struct MdmOracle {
    int m;
    const std::vector<ItemPair>& pairs;

    bool check(const std::vector<signed char>& rel, bool full, std::vector<double>* witness) const {
        std::vector<int> parent(m);
        std::iota(parent.begin(), parent.end(), 0);
        std::function<int(int)> find = [&](int a) {
            while (parent[a] != a) a = parent[a] = parent[parent[a]];
            return a;
        };
        for (std::size_t d = 0; d < pairs.size(); ++d) {
            if (rel[d] == kEq) parent[find(pairs[d].a)] = find(pairs[d].b);
        }
        // LT means latent(a) < latent(b).
        std::vector<std::pair<int, int>> edges;
        for (std::size_t d = 0; d < pairs.size(); ++d) {
            if (rel[d] == kUndecided || rel[d] == kEq) continue;
            int lo = find(pairs[d].a), hi = find(pairs[d].b);
            if (rel[d] == kGt) std::swap(lo, hi);
            if (lo == hi) return false;
            edges.push_back({lo, hi});
        }
        std::vector<std::vector<int>> succ(m);
        std::vector<int> indeg(m, 0);
        std::set<std::pair<int, int>> dedup(edges.begin(), edges.end());
        for (const auto& [lo, hi] : dedup) {
            succ[lo].push_back(hi);
            ++indeg[hi];
        }
        std::vector<int> order;
        for (int c = 0; c < m; ++c) {
            if (find(c) == c && indeg[c] == 0) order.push_back(c);
        }
        std::size_t head = 0;
        int classes = 0;
        for (int c = 0; c < m; ++c) classes += find(c) == c ? 1 : 0;
        while (head < order.size()) {
            for (int b : succ[order[head]]) {
                if (--indeg[b] == 0) order.push_back(b);
            }
            ++head;
        }
        if (static_cast<int>(order.size()) != classes) return false;
        if (full && witness) {
            std::vector<double> depth(m, 0.0);
            for (auto it = order.rbegin(); it != order.rend(); ++it) {
                for (int b : succ[*it]) depth[*it] = std::max(depth[*it], depth[b] + 1.0);
            }
            witness->assign(m, 0.0);
            const double eps = 1.0 / (2.0 * m + 1.0);
            for (int s = 0; s < m; ++s) {
                // depth = longest upward chain, so deeper classes sit lower.
                (*witness)[s] = 1.0 - eps * depth[find(s)];
            }
        }
        return true;
    }
};

} // namespace

LimitResult limit_ranking_enum(const ChoiceDataset& data, const LossSpec&, int threads) {
    require_valid(data);
    const int m = data.num_assortments();
    if (m > 7) {
        throw Error(ErrorCode::CollectionTooLarge, "ranking enumeration is capped at 7 assortments");
    }
    FitLp fit = build_fit_lp(data);

    std::vector<int> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::vector<std::vector<int>> orders;
    do {
        orders.push_back(order);
    } while (std::next_permutation(order.begin(), order.end()));

    struct PerOrder {
        double loss;
        std::vector<double> solution;
    };
    std::vector<PerOrder> results(orders.size());
    parallel_for(
        orders.size(),
        [&](std::size_t k) {
            std::vector<int> position(m);
            for (int p = 0; p < m; ++p) position[orders[k][p]] = p;
            results[k].loss = solve_order_lp(data, fit, position, &results[k].solution);
        },
        threads);

    std::size_t best = 0;
    for (std::size_t k = 1; k < results.size(); ++k) {
        if (results[k].loss < results[best].loss - 1e-12) best = k;
    }
    std::vector<int> position(m);
    for (int p = 0; p < m; ++p) position[orders[best][p]] = p;

    LimitResult out;
    out.method = LimitMethod::RankingEnum;
    out.loss = results[best].loss;
    out.fitted_probs = extract_fitted(data, fit, results[best].solution);
    out.lambda = lambda_from_positions(position);
    return out;
}

namespace {

LimitResult limit_mdm_structured(const ChoiceDataset& data) {
    const int m = data.num_assortments();
    FitLp fit = build_fit_lp(data);
    LinearProgram lp = fit.base;
    for (int s = 0; s < m; ++s) {
        for (int t = 0; t < m; ++t) {
            if (s == t) continue;
            const auto& small = data.assortment(s);
            const auto& big = data.assortment(t);
            if (small.size() >= big.size() ||
                !std::includes(big.begin(), big.end(), small.begin(), small.end())) {
                continue;
            }
            // S subset of T: x_{i,S} >= x_{i,T}.
            for (std::size_t k = 0; k < small.size(); ++k) {
                const int pos = data.position(small[k], t);
                lp.add_row({{fit.x[s][k], 1.0}, {fit.x[t][pos], -1.0}}, Relation::Ge, 0.0);
            }
        }
    }
    SolveResult r = solve_lp(lp);
    if (r.status != SolveStatus::Optimal) {
        throw Error(ErrorCode::SolverFailure, "structured limit LP did not solve");
    }
    LimitResult out;
    out.method = LimitMethod::StructuredLp;
    out.loss = r.value;
    out.fitted_probs = extract_fitted(data, fit, r.solution);
    // Any lambda nondecreasing along inclusion works for the witness.
    out.lambda.assign(m, 0.0);
    for (int s = 0; s < m; ++s) {
        out.lambda[s] = static_cast<double>(data.assortment(s).size()) / (data.n_products() + 1);
    }
    return out;
}

LimitResult limit_mdm_search(const ChoiceDataset& data) {
    const int m = data.num_assortments();
    FitLp fit = build_fit_lp(data);

    std::vector<ItemPair> pairs;
    for (int s = 0; s < m; ++s) {
        for (int t = s + 1; t < m; ++t) {
            ItemPair pair{s, t, {}};
            for (std::size_t k = 0; k < data.assortment(s).size(); ++k) {
                const int pos = data.position(data.assortment(s)[k], t);
                if (pos >= 0) pair.couples.push_back({fit.x[s][k], fit.x[t][pos]});
            }
            if (!pair.couples.empty()) pairs.push_back(std::move(pair));
        }
    }

    Candidate incumbent;
    if (auto cert = check_mdm(data)) {
        incumbent.loss = 0.0;
        incumbent.solution.assign(fit.base.num_vars, 0.0);
        for (int s = 0; s < m; ++s) {
            for (std::size_t k = 0; k < fit.x[s].size(); ++k) {
                incumbent.solution[fit.x[s][k]] = data.probs()[s][k];
            }
        }
        incumbent.lambda = cert->lambda;
    } else {
        incumbent = order_heuristic(data, fit);
    }

    MdmOracle oracle_impl{m, pairs};
    PatternOracle oracle;
    oracle.realizable = [&](const std::vector<signed char>& rel, std::vector<double>* w) {
        return oracle_impl.check(rel, true, w);
    };
    oracle.consistent = [&](const std::vector<signed char>& rel) {
        return oracle_impl.check(rel, false, nullptr);
    };

    Candidate best = order_search(fit, pairs, oracle, incumbent);
    LimitResult out;
    out.method = LimitMethod::Milp;
    out.loss = best.loss;
    if (best.solution.empty()) {
        throw Error(ErrorCode::SolverFailure, "limit search returned no solution");
    }
    out.fitted_probs = extract_fitted(data, fit, best.solution);
    out.lambda = best.lambda;
    return out;
}

} // namespace

LimitResult limit_mdm(const ChoiceDataset& data, const LossSpec&, const LimitOptions& opts) {
    require_valid(data);
    const int m = data.num_assortments();

    LimitMethod method = opts.method;
    if (method == LimitMethod::Auto) {
        if (collection_structure(data) != CollectionStructure::General) {
            method = LimitMethod::StructuredLp;
        } else {
            std::int64_t fact = 1;
            for (int k = 2; k <= m && fact <= opts.ranking_cap; ++k) fact *= k;
            method = (m <= 7 && fact <= opts.ranking_cap) ? LimitMethod::RankingEnum
                                                          : LimitMethod::Milp;
        }
    }
    switch (method) {
        case LimitMethod::StructuredLp:
            if (collection_structure(data) == CollectionStructure::General) {
                throw Error(ErrorCode::SolverFailure,
                            "structured limit needs a nested or laminar collection");
            }
            return limit_mdm_structured(data);
        case LimitMethod::RankingEnum:
            return limit_ranking_enum(data, {}, opts.threads);
        default:
            return limit_mdm_search(data);
    }
}

LimitResult limit_gmdm(const ChoiceDataset& data, const Grouping& grouping, const LossSpec&,
                       const LimitOptions&) {
    require_valid(data);
    require_valid(grouping, data.n_products());
    const int m = data.num_assortments();
    const int n = data.n_products();
    const double eps = 1.0 / (2.0 * n * m + 1.0);

    FitLp fit = build_fit_lp(data);

    struct Item {
        int product, s, xvar;
    };
    std::vector<Item> items;
    for (int s = 0; s < m; ++s) {
        for (std::size_t k = 0; k < data.assortment(s).size(); ++k) {
            items.push_back({data.assortment(s)[k], s, fit.x[s][k]});
        }
    }
    std::vector<ItemPair> pairs;
    std::vector<std::pair<int, int>> pair_items;
    for (std::size_t a = 0; a < items.size(); ++a) {
        for (std::size_t b = a + 1; b < items.size(); ++b) {
            if (grouping.group_of(items[a].product) != grouping.group_of(items[b].product)) continue;
            pairs.push_back(ItemPair{static_cast<int>(a), static_cast<int>(b),
                                     {{items[a].xvar, items[b].xvar}}});
            pair_items.push_back({static_cast<int>(a), static_cast<int>(b)});
        }
    }

    // Realizability: latent z_{i,S} = lambda_S - nu_i must reproduce the
    // relation pattern, checked by a small LP.
    auto realize = [&](const std::vector<signed char>& rel, bool full,
                       std::vector<double>* witness) {
        LinearProgram lp;
        std::vector<int> lam(m), nu(n + 1, -1);
        for (int s = 0; s < m; ++s) lam[s] = lp.add_var(-kInf, kInf);
        for (int i = 1; i <= n; ++i) nu[i] = lp.add_var(-kInf, kInf);
        for (const auto& it : items) {
            lp.add_row({{lam[it.s], 1.0}, {nu[it.product], -1.0}}, Relation::Ge, 0.0);
            lp.add_row({{lam[it.s], 1.0}, {nu[it.product], -1.0}}, Relation::Le, 1.0);
        }
        for (std::size_t d = 0; d < rel.size(); ++d) {
            if (rel[d] == kUndecided) continue;
            const Item& u = items[pair_items[d].first];
            const Item& v = items[pair_items[d].second];
            std::vector<std::pair<int, double>> diff = {{lam[u.s], 1.0}, {nu[u.product], -1.0},
                                                        {lam[v.s], -1.0}, {nu[v.product], 1.0}};
            if (rel[d] == kEq) {
                lp.add_row(std::move(diff), Relation::Eq, 0.0);
            } else if (rel[d] == kLt) {
                lp.add_row(std::move(diff), Relation::Le, -eps);
            } else {
                lp.add_row(std::move(diff), Relation::Ge, eps);
            }
        }
        SolveResult r = solve_lp(lp);
        if (r.status != SolveStatus::Optimal) return false;
        if (full && witness) {
            witness->assign(m, 0.0);
            for (int s = 0; s < m; ++s) (*witness)[s] = r.solution[lam[s]];
        }
        return true;
    };

    PatternOracle oracle;
    oracle.realizable = [&](const std::vector<signed char>& rel, std::vector<double>* w) {
        return realize(rel, true, w);
    };
    oracle.consistent = [&](const std::vector<signed char>& rel) {
        return realize(rel, false, nullptr);
    };

    Candidate incumbent;
    if (auto cert = check_gmdm(data, grouping)) {
        incumbent.loss = 0.0;
        incumbent.solution.assign(fit.base.num_vars, 0.0);
        for (int s = 0; s < m; ++s) {
            for (std::size_t k = 0; k < fit.x[s].size(); ++k) {
                incumbent.solution[fit.x[s][k]] = data.probs()[s][k];
            }
        }
        incumbent.lambda = cert->lambda;
    }

    Candidate best = order_search(fit, pairs, oracle, incumbent);
    if (best.solution.empty()) {
        throw Error(ErrorCode::SolverFailure, "G-MDM limit search returned no solution");
    }
    LimitResult out;
    out.method = LimitMethod::Milp;
    out.loss = best.loss;
    out.fitted_probs = extract_fitted(data, fit, best.solution);
    out.lambda = best.lambda;
    return out;
}

DeltaOptimal recover_delta_optimal(const ChoiceDataset& data, const LimitResult& limit,
                                   double delta) {
    require_valid(data);
    if (delta <= 0.0) throw Error(ErrorCode::SolverFailure, "delta must be positive");
    if (limit.lambda.size() != static_cast<std::size_t>(data.num_assortments())) {
        throw Error(ErrorCode::SolverFailure, "limit result carries no lambda");
    }
    const int m = data.num_assortments();
    FitLp fit = build_fit_lp(data);
    LinearProgram lp = fit.base;
    // Budget row: the z variables upper-bound the loss.
    std::vector<std::pair<int, double>> budget;
    for (int j = 0; j < lp.num_vars; ++j) {
        if (lp.objective[j] != 0.0) budget.push_back({j, lp.objective[j]});
        lp.objective[j] = 0.0;
    }
    lp.add_row(std::move(budget), Relation::Le, limit.loss + delta);
    const int margin = lp.add_var(0.0, 1.0, -1.0); // maximize the strictness margin

    for (int s = 0; s < m; ++s) {
        for (int t = s + 1; t < m; ++t) {
            int lo = s, hi = t; // latent order: lambda[lo] < lambda[hi]
            if (limit.lambda[lo] > limit.lambda[hi]) std::swap(lo, hi);
            const bool equal = std::abs(limit.lambda[s] - limit.lambda[t]) <= 1e-7;
            for (std::size_t k = 0; k < data.assortment(lo).size(); ++k) {
                const int pos = data.position(data.assortment(lo)[k], hi);
                if (pos < 0) continue;
                const int xa = fit.x[lo][k];
                const int xb = fit.x[hi][pos];
                if (equal) {
                    lp.add_row({{xa, 1.0}, {xb, -1.0}}, Relation::Eq, 0.0);
                } else {
                    lp.add_row({{xa, 1.0}, {xb, -1.0}, {margin, -1.0}}, Relation::Ge, 0.0);
                }
            }
        }
    }
    SolveResult r = solve_lp(lp);
    if (r.status != SolveStatus::Optimal) {
        throw Error(ErrorCode::SolverFailure, "delta-optimal recovery LP did not solve");
    }
    DeltaOptimal out;
    out.margin = r.solution[margin];
    out.probs = extract_fitted(data, fit, r.solution);
    out.loss = weighted_l1_loss(data, out.probs);
    return out;
}

double mnl_log_likelihood(const ChoiceDataset& data, const std::vector<double>& nu) {
    double ll = 0.0;
    for (int s = 0; s < data.num_assortments(); ++s) {
        double lse = 0.0;
        for (int j : data.assortment(s)) lse += std::exp(nu[j]);
        lse = std::log(lse);
        double inner = 0.0;
        for (std::size_t k = 0; k < data.assortment(s).size(); ++k) {
            inner += data.probs()[s][k] * nu[data.assortment(s)[k]];
        }
        ll += data.weight(s) * (inner - lse);
    }
    return ll;
}

std::vector<double> mnl_log_likelihood_gradient(const ChoiceDataset& data,
                                                const std::vector<double>& nu) {
    std::vector<double> grad(nu.size(), 0.0);
    for (int s = 0; s < data.num_assortments(); ++s) {
        double denom = 0.0;
        for (int j : data.assortment(s)) denom += std::exp(nu[j]);
        for (std::size_t k = 0; k < data.assortment(s).size(); ++k) {
            const int i = data.assortment(s)[k];
            grad[i] += data.weight(s) * (data.probs()[s][k] - std::exp(nu[i]) / denom);
        }
    }
    return grad;
}

MnlFit fit_mnl_mle(const ChoiceDataset& data, int max_iters) {
    require_valid(data);
    const int n = data.n_products();
    std::vector<double> nu(n + 1, 0.0);

    double ll = mnl_log_likelihood(data, nu);
    int iter = 0;
    for (; iter < max_iters; ++iter) {
        std::vector<double> grad = mnl_log_likelihood_gradient(data, nu);
        grad[n] = 0.0; // nu_n pinned to zero
        double norm2 = 0.0;
        for (int i = 1; i <= n; ++i) norm2 += grad[i] * grad[i];
        if (std::sqrt(norm2) <= 1e-7) break;

        double step = 1.0;
        bool moved = false;
        for (int half = 0; half < 60; ++half) {
            std::vector<double> trial = nu;
            for (int i = 1; i <= n; ++i) trial[i] += step * grad[i];
            const double trial_ll = mnl_log_likelihood(data, trial);
            if (trial_ll >= ll + 1e-4 * step * norm2) {
                nu = std::move(trial);
                ll = trial_ll;
                moved = true;
                break;
            }
            step *= 0.5;
        }
        if (!moved) break;
    }
    std::vector<double> grad = mnl_log_likelihood_gradient(data, nu);
    grad[n] = 0.0;
    double norm2 = 0.0;
    for (int i = 1; i <= n; ++i) norm2 += grad[i] * grad[i];
    if (std::sqrt(norm2) > 1e-7) {
        throw Error(ErrorCode::NonConvergence, "MNL likelihood ascent did not converge");
    }

    MnlFit fit;
    fit.nu = nu;
    fit.log_likelihood = ll;
    for (int s = 0; s < data.num_assortments(); ++s) {
        double denom = 0.0;
        for (int j : data.assortment(s)) denom += std::exp(nu[j]);
        std::vector<double> row;
        for (int i : data.assortment(s)) row.push_back(std::exp(nu[i]) / denom);
        fit.fitted_probs.push_back(std::move(row));
    }
    fit.loss = weighted_l1_loss(data, fit.fitted_probs);
    return fit;
}

LimitResult limit_rum(const ChoiceDataset& data, const LossSpec&) {
    require_valid(data);
    const int n = data.n_products();
    if (n > 6) {
        throw Error(ErrorCode::TooManyProducts, "RUM limit enumerates n! rankings; n must be <= 6");
    }
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 1);
    std::vector<std::vector<int>> rankings;
    do {
        rankings.push_back(perm);
    } while (std::next_permutation(perm.begin(), perm.end()));

    LinearProgram lp;
    const int cols = static_cast<int>(rankings.size());
    std::vector<int> pvar(cols);
    for (int c = 0; c < cols; ++c) pvar[c] = lp.add_var(0.0, kInf);

    const int m = data.num_assortments();
    // x_{i,S} = sum_sigma P_sigma [sigma picks i from S]; z >= |x - p|.
    std::vector<std::vector<int>> zvar(m);
    std::vector<std::vector<std::vector<std::pair<int, double>>>> hit(m);
    for (int s = 0; s < m; ++s) {
        zvar[s].resize(data.assortment(s).size());
        hit[s].resize(data.assortment(s).size());
        for (std::size_t k = 0; k < data.assortment(s).size(); ++k) {
            zvar[s][k] = lp.add_var(0.0, kInf, data.weight(s));
        }
    }
    for (int c = 0; c < cols; ++c) {
        for (int s = 0; s < m; ++s) {
            for (int ranked : rankings[c]) {
                const int pos = data.position(ranked, s);
                if (pos >= 0) {
                    hit[s][pos].push_back({pvar[c], 1.0});
                    break;
                }
            }
        }
    }
    for (int s = 0; s < m; ++s) {
        for (std::size_t k = 0; k < data.assortment(s).size(); ++k) {
            const double p = data.probs()[s][k];
            auto pos_row = hit[s][k];
            pos_row.push_back({zvar[s][k], 1.0});
            lp.add_row(std::move(pos_row), Relation::Ge, p);
            auto neg_row = hit[s][k];
            neg_row.push_back({zvar[s][k], -1.0});
            lp.add_row(std::move(neg_row), Relation::Le, p);
        }
    }
    std::vector<std::pair<int, double>> total;
    for (int c = 0; c < cols; ++c) total.push_back({pvar[c], 1.0});
    lp.add_row(std::move(total), Relation::Eq, 1.0);

    SolveResult r = solve_lp(lp);
    if (r.status != SolveStatus::Optimal) {
        throw Error(ErrorCode::SolverFailure, "RUM limit LP did not solve");
    }
    LimitResult out;
    out.method = LimitMethod::RankingEnum;
    out.loss = r.value;
    out.fitted_probs.resize(m);
    for (int s = 0; s < m; ++s) {
        for (std::size_t k = 0; k < data.assortment(s).size(); ++k) {
            double x = 0.0;
            for (const auto& [var, coef] : hit[s][k]) x += coef * r.solution[var];
            out.fitted_probs[s].push_back(x);
        }
    }
    return out;
}

const char* to_string(LimitMethod m) {
    switch (m) {
        case LimitMethod::Auto: return "auto";
        case LimitMethod::Milp: return "milp";
        case LimitMethod::RankingEnum: return "enum";
        case LimitMethod::StructuredLp: return "structured";
    }
    return "milp";
}

std::string to_json(const LimitResult& r, const ChoiceDataset& data) {
    nlohmann::json j;
    j["loss"] = r.loss;
    nlohmann::json fitted = nlohmann::json::array();
    for (const auto& row : r.fitted_probs) fitted.push_back(row);
    j["fitted"] = std::move(fitted);
    j["lambda"] = r.lambda;
    j["method"] = to_string(r.method);
    (void)data;
    return j.dump(2);
}

} // namespace mdm
