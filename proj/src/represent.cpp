#include "mdm/represent.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include <json.hpp>

#include "mdm/datagen.hpp"
#include "mdm/detail/relations.hpp"
#include "mdm/solver.hpp"

namespace mdm {

using nlohmann::json;

double PiecewiseLinearCdf::eval(double v) const {
    if (v <= x.front()) return f.front();
    if (v >= x.back()) return f.back();
    auto it = std::upper_bound(x.begin(), x.end(), v);
    std::size_t k = static_cast<std::size_t>(it - x.begin());
    const double t = (v - x[k - 1]) / (x[k] - x[k - 1]);
    return f[k - 1] + t * (f[k] - f[k - 1]);
}

double ExponentialCdf::eval(double v) const {
    return v <= 0.0 ? 0.0 : 1.0 - std::exp(-rate * v);
}

double Marginal::eval(double v) const {
    return std::visit([&](const auto& c) { return c.eval(v); }, cdf);
}

double Marginal::support_left() const {
    if (auto* pw = std::get_if<PiecewiseLinearCdf>(&cdf)) return pw->support_left();
    return 0.0;
}

double Marginal::support_right() const {
    if (auto* pw = std::get_if<PiecewiseLinearCdf>(&cdf)) return pw->support_right();
    return kInf;
}

namespace detail {

AssortmentRelations extract_relations(const ChoiceDataset& data) {
    AssortmentRelations out;
    std::set<std::pair<int, int>> strict, equal;
    for (const auto& [i, s, t] : comparable_pairs(data)) {
        switch (classify_pair(data.prob(i, s), data.prob(i, t))) {
            case ProbRelation::Less: strict.insert({s, t}); break;          // lambda_s > lambda_t
            case ProbRelation::Greater: strict.insert({t, s}); break;
            case ProbRelation::EqualNonzero: equal.insert({s, t}); break;
            case ProbRelation::EqualZero: break;
        }
    }
    out.strict.assign(strict.begin(), strict.end());
    out.equal.assign(equal.begin(), equal.end());
    return out;
}

namespace {

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int a) {
        while (parent[a] != a) a = parent[a] = parent[parent[a]];
        return a;
    }
    void unite(int a, int b) { parent[find(a)] = find(b); }
};

} // namespace

RelationClasses build_classes(const ChoiceDataset& data) {
    const int m = data.num_assortments();
    AssortmentRelations rel = extract_relations(data);

    UnionFind uf(m);
    for (const auto& [s, t] : rel.equal) uf.unite(s, t);

    RelationClasses out;
    out.class_of.assign(m, -1);
    std::vector<int> root_to_class;
    for (int s = 0; s < m; ++s) {
        const int r = uf.find(s);
        auto it = std::find(root_to_class.begin(), root_to_class.end(), r);
        if (it == root_to_class.end()) {
            root_to_class.push_back(r);
            out.class_of[s] = static_cast<int>(root_to_class.size()) - 1;
        } else {
            out.class_of[s] = static_cast<int>(it - root_to_class.begin());
        }
    }
    out.num_classes = static_cast<int>(root_to_class.size());

    std::set<std::pair<int, int>> edges;
    for (const auto& [s, t] : rel.strict) {
        const int cs = out.class_of[s], ct = out.class_of[t];
        if (cs == ct) {
            out.cyclic = true;
            return out;
        }
        edges.insert({cs, ct});
    }

    // Kahn's algorithm; depth = longest chain below each class so the
    // lambda assignment can honor every strict edge with a fixed margin.
    std::vector<std::vector<int>> succ(out.num_classes);
    std::vector<int> indegree(out.num_classes, 0);
    for (const auto& [a, b] : edges) {
        succ[a].push_back(b);
        ++indegree[b];
    }
    std::vector<int> order;
    for (int c = 0; c < out.num_classes; ++c) {
        if (indegree[c] == 0) order.push_back(c);
    }
    for (std::size_t head = 0; head < order.size(); ++head) {
        for (int b : succ[order[head]]) {
            if (--indegree[b] == 0) order.push_back(b);
        }
    }
    if (static_cast<int>(order.size()) != out.num_classes) {
        out.cyclic = true;
        return out;
    }
    out.topo_depth.assign(out.num_classes, 0);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        for (int b : succ[*it]) {
            out.topo_depth[*it] = std::max(out.topo_depth[*it], out.topo_depth[b] + 1);
        }
    }

    // Transitive reduction keeps downstream LP row counts small.
    std::set<std::pair<int, int>> reduced;
    for (const auto& [a, b] : edges) {
        bool implied = false;
        for (int mid : succ[a]) {
            if (mid == b) continue;
            // reachable(mid, b)?
            std::vector<int> stack{mid};
            std::vector<bool> seen(out.num_classes, false);
            while (!stack.empty() && !implied) {
                int v = stack.back();
                stack.pop_back();
                if (v == b) implied = true;
                if (implied || seen[v]) continue;
                seen[v] = true;
                for (int w : succ[v]) stack.push_back(w);
            }
            if (implied) break;
        }
        if (!implied) reduced.insert({a, b});
    }
    out.strict.assign(reduced.begin(), reduced.end());
    return out;
}

} // namespace detail

namespace {

std::optional<MdmCertificate> check_mdm_graph(const ChoiceDataset& data) {
    detail::RelationClasses classes = detail::build_classes(data);
    if (classes.cyclic) return std::nullopt;
    const int m = data.num_assortments();
    MdmCertificate cert;
    cert.epsilon = 1.0 / (2.0 * m + 1.0);
    cert.lambda.resize(m);
    for (int s = 0; s < m; ++s) {
        cert.lambda[s] = cert.epsilon * classes.topo_depth[classes.class_of[s]];
    }
    return cert;
}

std::optional<MdmCertificate> check_mdm_lp(const ChoiceDataset& data) {
    const int m = data.num_assortments();
    detail::AssortmentRelations rel = detail::extract_relations(data);

    LinearProgram lp;
    std::vector<int> lam(m);
    for (int s = 0; s < m; ++s) lam[s] = lp.add_var(0.0, 1.0);
    const int eps = lp.add_var(-1.0, 1.0, -1.0); // maximize epsilon
    for (const auto& [s, t] : rel.strict) {
        lp.add_row({{lam[s], 1.0}, {lam[t], -1.0}, {eps, -1.0}}, Relation::Ge, 0.0);
    }
    for (const auto& [s, t] : rel.equal) {
        lp.add_row({{lam[s], 1.0}, {lam[t], -1.0}}, Relation::Eq, 0.0);
    }
    SolveResult r = solve_lp(lp);
    if (r.status != SolveStatus::Optimal || r.value >= -kProbEqualTol) return std::nullopt;
    MdmCertificate cert;
    cert.epsilon = -r.value;
    cert.lambda.assign(r.solution.begin(), r.solution.begin() + m);
    return cert;
}

} // namespace

std::optional<MdmCertificate> check_mdm(const ChoiceDataset& data, CheckEngine engine) {
    require_valid(data);
    return engine == CheckEngine::Graph ? check_mdm_graph(data) : check_mdm_lp(data);
}

bool certificate_valid(const ChoiceDataset& data, const MdmCertificate& cert) {
    if (!(cert.epsilon > 0.0)) return false;
    if (cert.lambda.size() != static_cast<std::size_t>(data.num_assortments())) return false;
    for (const auto& [i, s, t] : comparable_pairs(data)) {
        const double ls = cert.lambda[s], lt = cert.lambda[t];
        switch (classify_pair(data.prob(i, s), data.prob(i, t))) {
            case ProbRelation::Less:
                if (!(ls >= lt + cert.epsilon - 1e-12)) return false;
                break;
            case ProbRelation::Greater:
                if (!(lt >= ls + cert.epsilon - 1e-12)) return false;
                break;
            case ProbRelation::EqualNonzero:
                if (std::abs(ls - lt) > 1e-9) return false;
                break;
            case ProbRelation::EqualZero: break;
        }
    }
    return true;
}

std::optional<GmdmCertificate> check_gmdm(const ChoiceDataset& data, const Grouping& grouping) {
    require_valid(data);
    require_valid(grouping, data.n_products());
    const int m = data.num_assortments();
    const int n = data.n_products();

    LinearProgram lp;
    std::vector<int> lam(m), nu(n + 1, -1);
    for (int s = 0; s < m; ++s) lam[s] = lp.add_var(-kInf, kInf);
    for (int i = 1; i <= n; ++i) nu[i] = lp.add_var(-kInf, kInf);
    const int eps = lp.add_var(-1.0, 1.0, -1.0);

    // Keep every lambda_S - nu_i in [0,1]; the margin bound 1/(2n|S|) then
    // always leaves room when the data is representable.
    for (int s = 0; s < m; ++s) {
        for (int i : data.assortment(s)) {
            lp.add_row({{lam[s], 1.0}, {nu[i], -1.0}}, Relation::Ge, 0.0);
            lp.add_row({{lam[s], 1.0}, {nu[i], -1.0}}, Relation::Le, 1.0);
        }
    }

    struct Item {
        int product, s;
        double p;
    };
    std::vector<Item> items;
    for (int s = 0; s < m; ++s) {
        for (int i : data.assortment(s)) items.push_back({i, s, data.prob(i, s)});
    }
    for (std::size_t a = 0; a < items.size(); ++a) {
        for (std::size_t b = a + 1; b < items.size(); ++b) {
            if (grouping.group_of(items[a].product) != grouping.group_of(items[b].product)) continue;
            const auto& A = items[a];
            const auto& B = items[b];
            // z_a = lambda_{S_a} - nu_{i_a}; larger probability means smaller z.
            switch (classify_pair(A.p, B.p)) {
                case ProbRelation::Less:
                    lp.add_row({{lam[A.s], 1.0}, {nu[A.product], -1.0},
                                {lam[B.s], -1.0}, {nu[B.product], 1.0}, {eps, -1.0}},
                               Relation::Ge, 0.0);
                    break;
                case ProbRelation::Greater:
                    lp.add_row({{lam[B.s], 1.0}, {nu[B.product], -1.0},
                                {lam[A.s], -1.0}, {nu[A.product], 1.0}, {eps, -1.0}},
                               Relation::Ge, 0.0);
                    break;
                case ProbRelation::EqualNonzero:
                    lp.add_row({{lam[A.s], 1.0}, {nu[A.product], -1.0},
                                {lam[B.s], -1.0}, {nu[B.product], 1.0}},
                               Relation::Eq, 0.0);
                    break;
                case ProbRelation::EqualZero: break;
            }
        }
    }

    SolveResult r = solve_lp(lp);
    if (r.status != SolveStatus::Optimal || r.value >= -kProbEqualTol) return std::nullopt;
    GmdmCertificate cert;
    cert.epsilon = -r.value;
    cert.lambda.resize(m);
    for (int s = 0; s < m; ++s) cert.lambda[s] = r.solution[lam[s]];
    cert.nu.assign(n + 1, 0.0);
    for (int i = 1; i <= n; ++i) cert.nu[i] = r.solution[nu[i]];
    return cert;
}

bool check_regular(const ChoiceDataset& data) {
    require_valid(data);
    const int m = data.num_assortments();
    for (int s = 0; s < m; ++s) {
        for (int t = 0; t < m; ++t) {
            if (s == t) continue;
            const auto& small = data.assortment(s);
            const auto& big = data.assortment(t);
            if (!std::includes(big.begin(), big.end(), small.begin(), small.end())) continue;
            for (int i : small) {
                if (classify_pair(data.prob(i, s), data.prob(i, t)) == ProbRelation::Less) {
                    return false;
                }
            }
        }
    }
    return true;
}

std::optional<std::vector<double>> check_mnl(const ChoiceDataset& data) {
    require_valid(data);
    const int n = data.n_products();
    for (int s = 0; s < data.num_assortments(); ++s) {
        for (double p : data.probs()[s]) {
            if (p <= kProbZeroTol) return std::nullopt; // MNL has full support
        }
    }

    // Positive weights w_i = exp(nu_i) satisfy p_{i,S} * sum_{j in S} w_j = w_i,
    // which is linear in w. Maximize the smallest weight to certify positivity.
    LinearProgram lp;
    std::vector<int> w(n + 1);
    for (int i = 1; i <= n; ++i) w[i] = lp.add_var(0.0, static_cast<double>(n));
    const int t = lp.add_var(0.0, 1.0, -1.0);
    std::vector<std::pair<int, double>> norm;
    for (int i = 1; i <= n; ++i) {
        lp.add_row({{w[i], 1.0}, {t, -1.0}}, Relation::Ge, 0.0);
        norm.push_back({w[i], 1.0});
    }
    lp.add_row(std::move(norm), Relation::Eq, static_cast<double>(n));
    for (int s = 0; s < data.num_assortments(); ++s) {
        for (int i : data.assortment(s)) {
            std::vector<std::pair<int, double>> row;
            for (int j : data.assortment(s)) {
                row.push_back({w[j], j == i ? data.prob(i, s) - 1.0 : data.prob(i, s)});
            }
            lp.add_row(std::move(row), Relation::Eq, 0.0);
        }
    }
    SolveResult r = solve_lp(lp);
    if (r.status != SolveStatus::Optimal || -r.value <= kProbEqualTol) return std::nullopt;

    std::vector<double> nu(n + 1, 0.0);
    for (int i = 1; i <= n; ++i) nu[i] = std::log(r.solution[w[i]]);
    // The LP works at solver tolerance; re-verify at the stricter contract.
    for (int s = 0; s < data.num_assortments(); ++s) {
        double denom = 0.0;
        for (int j : data.assortment(s)) denom += r.solution[w[j]];
        for (int i : data.assortment(s)) {
            if (std::abs(r.solution[w[i]] / denom - data.prob(i, s)) > 1e-7) return std::nullopt;
        }
    }
    return nu;
}

bool check_rum(const ChoiceDataset& data) {
    require_valid(data);
    const int n = data.n_products();
    if (n > 7) {
        throw Error(ErrorCode::TooManyProducts, "RUM check enumerates n! rankings; n must be <= 7");
    }

    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 1);
    std::vector<std::vector<int>> rankings;
    do {
        rankings.push_back(perm);
    } while (std::next_permutation(perm.begin(), perm.end()));

    LinearProgram lp;
    const int cols = static_cast<int>(rankings.size());
    for (int c = 0; c < cols; ++c) lp.add_var(0.0, kInf);

    const int m = data.num_assortments();
    std::vector<std::vector<std::pair<int, double>>> rows;
    std::vector<double> rhs;
    for (int s = 0; s < m; ++s) {
        for (std::size_t k = 0; k < data.assortment(s).size(); ++k) {
            rows.emplace_back();
            rhs.push_back(data.probs()[s][k]);
        }
    }
    std::vector<int> row_base(m, 0);
    for (int s = 1; s < m; ++s) {
        row_base[s] = row_base[s - 1] + static_cast<int>(data.assortment(s - 1).size());
    }
    for (int c = 0; c < cols; ++c) {
        const auto& sigma = rankings[c];
        for (int s = 0; s < m; ++s) {
            for (int ranked : sigma) {
                const int pos = data.position(ranked, s);
                if (pos >= 0) {
                    rows[row_base[s] + pos].push_back({c, 1.0});
                    break;
                }
            }
        }
    }
    for (std::size_t r = 0; r < rows.size(); ++r) {
        lp.add_row(std::move(rows[r]), Relation::Eq, rhs[r]);
    }
    std::vector<std::pair<int, double>> total;
    for (int c = 0; c < cols; ++c) total.push_back({c, 1.0});
    lp.add_row(std::move(total), Relation::Eq, 1.0);

    return solve_lp(lp).status == SolveStatus::Optimal;
}

MarginalSpec synthesize_marginals(const ChoiceDataset& data, const MdmCertificate& cert) {
    require_valid(data);
    if (!certificate_valid(data, cert)) {
        throw Error(ErrorCode::CertificateInvalid, "certificate does not verify against the dataset");
    }
    const int n = data.n_products();
    const double delta = 1.0; // free tail slope

    MarginalSpec spec;
    spec.nu.assign(n + 1, 0.0);
    spec.marginals.resize(n + 1);
    spec.marginals[0].cdf = PiecewiseLinearCdf{{0.0, 1.0}, {0.0, 1.0}};

    for (int i = 1; i <= n; ++i) {
        struct Point {
            double lambda, p;
        };
        std::vector<Point> positive;
        double first_zero_lambda = kInf;
        for (int s = 0; s < data.num_assortments(); ++s) {
            const int pos = data.position(i, s);
            if (pos < 0) continue;
            const double p = data.probs()[s][pos];
            if (p <= kProbZeroTol) {
                first_zero_lambda = std::min(first_zero_lambda, cert.lambda[s]);
            } else {
                positive.push_back({cert.lambda[s], p});
            }
        }
        PiecewiseLinearCdf cdf;
        if (positive.empty() && !std::isfinite(first_zero_lambda)) {
            cdf.x = {0.0, 1.0};
            cdf.f = {0.0, 1.0};
            spec.marginals[i].cdf = std::move(cdf);
            continue;
        }
        std::sort(positive.begin(), positive.end(),
                  [](const Point& a, const Point& b) { return a.lambda < b.lambda; });
        // Equal lambdas carry equal probabilities; keep one point per lambda.
        std::vector<Point> pts;
        for (const auto& pt : positive) {
            if (!pts.empty() && std::abs(pts.back().lambda - pt.lambda) <= 1e-12) continue;
            pts.push_back(pt);
        }
        if (pts.empty()) {
            // Product never chosen: the CDF saturates at the first zero assortment.
            cdf.x = {first_zero_lambda - delta, first_zero_lambda};
            cdf.f = {0.0, 1.0};
            spec.marginals[i].cdf = std::move(cdf);
            continue;
        }
        if (pts.front().p < 1.0 - kProbZeroTol) {
            cdf.x.push_back(pts.front().lambda - delta);
            cdf.f.push_back(0.0);
        }
        for (const auto& pt : pts) {
            cdf.x.push_back(pt.lambda);
            cdf.f.push_back(1.0 - pt.p);
        }
        if (std::isfinite(first_zero_lambda)) {
            cdf.x.push_back(first_zero_lambda);
        } else {
            cdf.x.push_back(pts.back().lambda + delta);
        }
        cdf.f.push_back(1.0);
        spec.marginals[i].cdf = std::move(cdf);
    }
    return spec;
}

std::string to_json(const MarginalSpec& spec) {
    json j;
    j["nu"] = std::vector<double>(spec.nu.begin() + 1, spec.nu.end());
    json margs = json::array();
    for (std::size_t i = 1; i < spec.marginals.size(); ++i) {
        const auto& m = spec.marginals[i];
        json mj;
        if (auto* pw = std::get_if<PiecewiseLinearCdf>(&m.cdf)) {
            mj["kind"] = "piecewise";
            mj["x"] = pw->x;
            mj["f"] = pw->f;
        } else {
            mj["kind"] = "exponential";
            mj["rate"] = std::get<ExponentialCdf>(m.cdf).rate;
        }
        margs.push_back(std::move(mj));
    }
    j["marginals"] = std::move(margs);
    return j.dump(2);
}

MarginalSpec marginal_spec_from_json(const std::string& text) {
    try {
        json j = json::parse(text);
        MarginalSpec spec;
        auto nu = j.at("nu").get<std::vector<double>>();
        spec.nu.assign(nu.size() + 1, 0.0);
        std::copy(nu.begin(), nu.end(), spec.nu.begin() + 1);
        spec.marginals.resize(nu.size() + 1);
        spec.marginals[0].cdf = PiecewiseLinearCdf{{0.0, 1.0}, {0.0, 1.0}};
        int i = 1;
        for (const auto& mj : j.at("marginals")) {
            if (mj.at("kind") == "exponential") {
                spec.marginals[i].cdf = ExponentialCdf{mj.at("rate").get<double>()};
            } else {
                spec.marginals[i].cdf = PiecewiseLinearCdf{
                    mj.at("x").get<std::vector<double>>(), mj.at("f").get<std::vector<double>>()};
            }
            ++i;
        }
        return spec;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::Parse, std::string("marginal spec JSON error: ") + e.what());
    }
}

} // namespace mdm
