#include "mdm/solver.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

#include "mdm/core.hpp"

namespace mdm {

int LinearProgram::add_var(double lo, double hi, double obj) {
    lower.push_back(lo);
    upper.push_back(hi);
    objective.push_back(obj);
    return num_vars++;
}

void LinearProgram::add_row(std::vector<std::pair<int, double>> coeffs, Relation rel, double rhs) {
    rows.push_back(Row{std::move(coeffs), rel, rhs});
}

namespace {

constexpr double kPivotTol = 1e-9;
constexpr double kCostTol = 1e-9;

// How each original variable maps into standard-form columns.
struct VarMap {
    int col = -1;      // primary column
    int neg_col = -1;  // second column when split as x = y+ - y-
    double shift = 0.0;
    double sign = 1.0;
};

// min c.y s.t. Ay = b, y >= 0, b >= 0, with a marked initial basis column
// per row (slack where possible, artificial otherwise).
struct Standard {
    int rows = 0;
    int cols = 0;           // structural + slack columns
    std::vector<double> a;  // row-major rows x cols
    std::vector<double> b;
    std::vector<double> c;
    double obj_shift = 0.0;
    std::vector<int> slack_basis; // per row: column index usable as basis, or -1

    double& at(int r, int j) { return a[static_cast<std::size_t>(r) * cols + j]; }
    double at(int r, int j) const { return a[static_cast<std::size_t>(r) * cols + j]; }
};

struct Translated {
    Standard form;
    std::vector<VarMap> vars;
    bool inconsistent_bounds = false;
};

Translated translate(const LinearProgram& lp) {
    Translated t;
    t.vars.resize(lp.num_vars);

    int next = 0;
    for (int j = 0; j < lp.num_vars; ++j) {
        const double lo = lp.lower[j], hi = lp.upper[j];
        if (lo > hi + kFeasTol) {
            t.inconsistent_bounds = true;
            return t;
        }
        VarMap& vm = t.vars[j];
        if (std::isfinite(lo)) {
            vm.col = next++;
            vm.shift = lo;
            vm.sign = 1.0;
        } else if (std::isfinite(hi)) {
            vm.col = next++;
            vm.shift = hi;
            vm.sign = -1.0; // x = hi - y
        } else {
            vm.col = next++;
            vm.neg_col = next++;
        }
    }

    // Upper-bound rows for variables with both bounds finite.
    std::vector<int> upper_rows;
    for (int j = 0; j < lp.num_vars; ++j) {
        if (std::isfinite(lp.lower[j]) && std::isfinite(lp.upper[j]) &&
            lp.upper[j] - lp.lower[j] < kInf) {
            upper_rows.push_back(j);
        }
    }

    const int m = static_cast<int>(lp.rows.size()) + static_cast<int>(upper_rows.size());
    int num_slacks = 0;
    for (const auto& row : lp.rows) {
        if (row.rel != Relation::Eq) ++num_slacks;
    }
    num_slacks += static_cast<int>(upper_rows.size());

    Standard& s = t.form;
    s.rows = m;
    s.cols = next + num_slacks;
    s.a.assign(static_cast<std::size_t>(s.rows) * s.cols, 0.0);
    s.b.assign(s.rows, 0.0);
    s.c.assign(s.cols, 0.0);
    s.slack_basis.assign(s.rows, -1);

    for (int j = 0; j < lp.num_vars; ++j) {
        const VarMap& vm = t.vars[j];
        s.c[vm.col] += lp.objective[j] * vm.sign;
        if (vm.neg_col >= 0) s.c[vm.neg_col] -= lp.objective[j];
        s.obj_shift += lp.objective[j] * vm.shift;
    }

    int slack = next;
    int r = 0;
    auto emit = [&](const LinearProgram::Row& row) {
        double rhs = row.rhs;
        for (const auto& [j, coef] : row.coeffs) {
            const VarMap& vm = t.vars[j];
            s.at(r, vm.col) += coef * vm.sign;
            if (vm.neg_col >= 0) s.at(r, vm.neg_col) -= coef;
            rhs -= coef * vm.shift;
        }
        double slack_sign = 0.0;
        if (row.rel == Relation::Le) slack_sign = 1.0;
        if (row.rel == Relation::Ge) slack_sign = -1.0;
        if (slack_sign != 0.0) s.at(r, slack) = slack_sign;
        s.b[r] = rhs;
        // Flip so b >= 0, and also flip Ge rows with b == 0 so the surplus
        // column can start basic instead of an artificial.
        if (rhs < 0.0 || (rhs == 0.0 && slack_sign < 0.0)) {
            s.b[r] = -rhs;
            for (int j = 0; j < s.cols; ++j) s.at(r, j) = -s.at(r, j);
            slack_sign = -slack_sign;
        }
        if (slack_sign > 0.0) s.slack_basis[r] = slack;
        if (row.rel != Relation::Eq) ++slack;
        ++r;
    };
    for (const auto& row : lp.rows) emit(row);
    for (int j : upper_rows) {
        LinearProgram::Row row;
        row.coeffs = {{j, 1.0}};
        row.rel = Relation::Le;
        row.rhs = lp.upper[j];
        emit(row);
    }
    return t;
}

struct Tableau {
    int m = 0, n = 0;       // n includes artificial columns at the end
    int structural = 0;     // columns that are not artificial
    std::vector<double> a;  // (m+1) x (n+1); last row = costs, last col = rhs
    std::vector<int> basis;

    double& at(int r, int j) { return a[static_cast<std::size_t>(r) * (n + 1) + j]; }
    double at(int r, int j) const { return a[static_cast<std::size_t>(r) * (n + 1) + j]; }
};

void pivot(Tableau& t, int pr, int pc) {
    const int w = t.n + 1;
    double* prow = &t.a[static_cast<std::size_t>(pr) * w];
    const double inv = 1.0 / prow[pc];
    for (int j = 0; j <= t.n; ++j) prow[j] *= inv;
    prow[pc] = 1.0;
    for (int r = 0; r <= t.m; ++r) {
        if (r == pr) continue;
        double* row = &t.a[static_cast<std::size_t>(r) * w];
        const double f = row[pc];
        if (f == 0.0) continue;
        for (int j = 0; j <= t.n; ++j) row[j] -= f * prow[j];
        row[pc] = 0.0;
    }
    t.basis[pr] = pc;
}

// Simplex on the tableau's cost row over columns [0, limit_col).
// Returns false when unbounded.
bool run_simplex(Tableau& t, int limit_col, std::int64_t& iters, std::int64_t cap) {
    const std::int64_t degenerate_cap = 10LL * (t.m + t.n);
    std::int64_t degenerate_run = 0;
    while (true) {
        if (++iters > cap) {
            throw Error(ErrorCode::CycleLimitExceeded, "simplex iteration limit reached");
        }
        const bool bland = degenerate_run > degenerate_cap;
        int pc = -1;
        double best = -kCostTol;
        for (int j = 0; j < limit_col; ++j) {
            const double cj = t.at(t.m, j);
            if (cj < -kCostTol) {
                if (bland) {
                    pc = j;
                    break;
                }
                if (cj < best) {
                    best = cj;
                    pc = j;
                }
            }
        }
        if (pc < 0) return true;

        int pr = -1;
        double best_ratio = kInf;
        for (int r = 0; r < t.m; ++r) {
            const double arc = t.at(r, pc);
            if (arc > kPivotTol) {
                const double ratio = t.at(r, t.n) / arc;
                if (ratio < best_ratio - 1e-12 ||
                    (ratio < best_ratio + 1e-12 && (pr < 0 || t.basis[r] < t.basis[pr]))) {
                    best_ratio = std::min(best_ratio, ratio);
                    pr = r;
                }
            }
        }
        if (pr < 0) return false;

        degenerate_run = best_ratio < 1e-10 ? degenerate_run + 1 : 0;
        pivot(t, pr, pc);
    }
}

} // namespace

SolveResult solve_lp(const LinearProgram& lp, const SimplexOptions& opts) {
    Translated tr = translate(lp);
    if (tr.inconsistent_bounds) return SolveResult{SolveStatus::Infeasible, 0.0, {}};
    Standard& s = tr.form;

    int num_artificial = 0;
    for (int r = 0; r < s.rows; ++r) {
        if (s.slack_basis[r] < 0) ++num_artificial;
    }

    Tableau t;
    t.m = s.rows;
    t.structural = s.cols;
    t.n = s.cols + num_artificial;
    t.a.assign(static_cast<std::size_t>(t.m + 1) * (t.n + 1), 0.0);
    t.basis.resize(t.m);
    int art = s.cols;
    for (int r = 0; r < t.m; ++r) {
        for (int j = 0; j < s.cols; ++j) t.at(r, j) = s.at(r, j);
        t.at(r, t.n) = s.b[r];
        if (s.slack_basis[r] >= 0) {
            t.basis[r] = s.slack_basis[r];
        } else {
            t.at(r, art) = 1.0;
            t.basis[r] = art++;
        }
    }

    std::int64_t iters = 0;
    if (num_artificial > 0) {
        // Phase 1: minimize the sum of artificials, reduced against the
        // mixed slack/artificial starting basis.
        for (int j = 0; j < t.n; ++j) {
            double reduced = j >= s.cols ? 1.0 : 0.0;
            for (int r = 0; r < t.m; ++r) {
                if (t.basis[r] >= s.cols) reduced -= t.at(r, j);
            }
            t.at(t.m, j) = reduced;
        }
        double obj = 0.0;
        for (int r = 0; r < t.m; ++r) {
            if (t.basis[r] >= s.cols) obj += t.at(r, t.n);
        }
        t.at(t.m, t.n) = -obj;

        if (!run_simplex(t, t.n, iters, opts.iteration_limit)) {
            throw Error(ErrorCode::SolverFailure, "phase-1 unbounded");
        }
        if (-t.at(t.m, t.n) > kFeasTol) {
            return SolveResult{SolveStatus::Infeasible, 0.0, {}};
        }
        // Kick leftover artificials out of the basis where possible.
        for (int r = 0; r < t.m; ++r) {
            if (t.basis[r] >= s.cols) {
                int pc = -1;
                for (int j = 0; j < s.cols; ++j) {
                    if (std::abs(t.at(r, j)) > kPivotTol) {
                        pc = j;
                        break;
                    }
                }
                if (pc >= 0) pivot(t, r, pc);
            }
        }
    }

    // Phase 2 costs, reduced against the current basis.
    for (int j = 0; j <= t.n; ++j) t.at(t.m, j) = j < s.cols ? s.c[j] : 0.0;
    t.at(t.m, t.n) = 0.0;
    for (int r = 0; r < t.m; ++r) {
        const double cb = t.basis[r] < s.cols ? s.c[t.basis[r]] : 0.0;
        if (cb != 0.0) {
            for (int j = 0; j <= t.n; ++j) t.at(t.m, j) -= cb * t.at(r, j);
        }
    }
    // Bar nonbasic artificial columns from re-entering.
    if (!run_simplex(t, s.cols, iters, opts.iteration_limit)) {
        return SolveResult{SolveStatus::Unbounded, -kInf, {}};
    }

    std::vector<double> y(s.cols, 0.0);
    for (int r = 0; r < t.m; ++r) {
        if (t.basis[r] < s.cols) y[t.basis[r]] = t.at(r, t.n);
    }
    SolveResult res;
    res.status = SolveStatus::Optimal;
    res.solution.resize(lp.num_vars);
    for (int j = 0; j < lp.num_vars; ++j) {
        const VarMap& vm = tr.vars[j];
        double v = vm.shift + vm.sign * y[vm.col];
        if (vm.neg_col >= 0) v -= y[vm.neg_col];
        res.solution[j] = v;
    }
    double value = s.obj_shift;
    for (int j = 0; j < s.cols; ++j) value += s.c[j] * y[j];
    res.value = value;
    return res;
}

namespace {

struct BnbNode {
    double bound;
    std::vector<double> fixed_lower;
    std::vector<double> fixed_upper;
    bool operator<(const BnbNode& other) const { return bound > other.bound; } // min-heap
};

int most_fractional(const std::vector<int>& binaries, const std::vector<double>& x) {
    int pick = -1;
    double best = kIntTol;
    for (int j : binaries) {
        const double frac = std::abs(x[j] - std::round(x[j]));
        if (frac > best) {
            best = frac;
            pick = j;
        }
    }
    return pick;
}

} // namespace

SolveResult solve_milp(const MixedIntegerProgram& mip, const MilpOptions& opts) {
    for (int j : mip.binaries) {
        if (j < 0 || j >= mip.lp.num_vars) {
            throw Error(ErrorCode::SolverFailure, "binary index out of range");
        }
    }
    LinearProgram relax = mip.lp;
    for (int j : mip.binaries) {
        relax.lower[j] = std::max(relax.lower[j], 0.0);
        relax.upper[j] = std::min(relax.upper[j], 1.0);
    }

    SolveResult incumbent;
    incumbent.status = SolveStatus::Infeasible;
    double incumbent_value = kInf;

    auto try_incumbent = [&](const SolveResult& r) {
        if (r.status == SolveStatus::Optimal && r.value < incumbent_value - 1e-12) {
            incumbent = r;
            incumbent_value = r.value;
        }
    };

    // Optional warm start: fix the hinted pattern and solve the restriction.
    if (!opts.binary_hint.empty()) {
        LinearProgram fixed = relax;
        for (std::size_t k = 0; k < mip.binaries.size() && k < opts.binary_hint.size(); ++k) {
            const int j = mip.binaries[k];
            const double v = std::round(opts.binary_hint[k]);
            fixed.lower[j] = v;
            fixed.upper[j] = v;
        }
        try_incumbent(solve_lp(fixed, opts.lp));
    }

    std::priority_queue<BnbNode> open;
    {
        SolveResult root = solve_lp(relax, opts.lp);
        if (root.status == SolveStatus::Infeasible) return incumbent;
        if (root.status == SolveStatus::Unbounded) {
            throw Error(ErrorCode::SolverFailure, "unbounded relaxation");
        }
        const int j = most_fractional(mip.binaries, root.solution);
        if (j < 0) {
            try_incumbent(root);
            return incumbent;
        }
        open.push(BnbNode{root.value, relax.lower, relax.upper});
    }

    std::int64_t nodes = 0;
    while (!open.empty()) {
        BnbNode node = open.top();
        open.pop();
        if (node.bound >= incumbent_value - 1e-9) continue;
        if (++nodes > opts.node_limit) {
            throw Error(ErrorCode::NodeLimitExceeded, "branch-and-bound node limit reached");
        }

        LinearProgram sub = relax;
        sub.lower = node.fixed_lower;
        sub.upper = node.fixed_upper;
        SolveResult r = solve_lp(sub, opts.lp);
        if (r.status != SolveStatus::Optimal || r.value >= incumbent_value - 1e-9) continue;

        const int j = most_fractional(mip.binaries, r.solution);
        if (j < 0) {
            try_incumbent(r);
            continue;
        }
        for (int v = 0; v <= 1; ++v) {
            BnbNode child{r.value, node.fixed_lower, node.fixed_upper};
            child.fixed_lower[j] = v;
            child.fixed_upper[j] = v;
            open.push(std::move(child));
        }
    }
    return incumbent;
}

DisjunctiveResult solve_disjunctive(const LinearProgram& base,
                                    const std::vector<Disjunction>& disjunctions,
                                    const DisjunctiveOptions& opts) {
    const int nd = static_cast<int>(disjunctions.size());

    struct Node {
        double bound;
        std::vector<signed char> choice; // -1 undecided
        bool operator<(const Node& o) const { return bound > o.bound; }
    };

    auto build = [&](const std::vector<signed char>& choice) {
        LinearProgram lp = base;
        for (int d = 0; d < nd; ++d) {
            if (choice[d] >= 0) {
                for (const auto& row : disjunctions[d].alt[choice[d]]) lp.rows.push_back(row);
            }
        }
        return lp;
    };

    auto row_satisfied = [&](const LinearProgram::Row& row, const std::vector<double>& x) {
        double lhs = 0.0;
        for (const auto& [j, c] : row.coeffs) lhs += c * x[j];
        switch (row.rel) {
            case Relation::Le: return lhs <= row.rhs + kFeasTol;
            case Relation::Ge: return lhs >= row.rhs - kFeasTol;
            default: return std::abs(lhs - row.rhs) <= kFeasTol;
        }
    };
    auto alt_satisfied = [&](const Disjunction& dis, int a, const std::vector<double>& x) {
        if (!dis.allowed[a]) return false;
        for (const auto& row : dis.alt[a]) {
            if (!row_satisfied(row, x)) return false;
        }
        return true;
    };

    DisjunctiveResult best;
    best.status = SolveStatus::Infeasible;
    double best_value = opts.incumbent_value;

    std::priority_queue<Node> open;
    open.push(Node{-kInf, std::vector<signed char>(nd, -1)});

    std::int64_t nodes = 0;
    while (!open.empty()) {
        Node node = open.top();
        open.pop();
        if (node.bound >= best_value - 1e-9) continue;
        if (++nodes > opts.node_limit) {
            throw Error(ErrorCode::NodeLimitExceeded, "disjunctive search node limit reached");
        }

        SolveResult r = solve_lp(build(node.choice), opts.lp);
        if (r.status == SolveStatus::Unbounded) {
            throw Error(ErrorCode::SolverFailure, "unbounded disjunctive relaxation");
        }
        if (r.status != SolveStatus::Optimal || r.value >= best_value - 1e-9) continue;

        // Branch on an undecided disjunction that the relaxed point violates
        // outright; if there is none, the point solves this whole subtree.
        int branch = -1;
        for (int d = 0; d < nd; ++d) {
            if (node.choice[d] >= 0) continue;
            bool any = false;
            for (int a = 0; a < 3 && !any; ++a) any = alt_satisfied(disjunctions[d], a, r.solution);
            if (!any) {
                branch = d;
                break;
            }
        }
        if (branch < 0) {
            best.status = SolveStatus::Optimal;
            best.value = r.value;
            best.solution = r.solution;
            best.choices.assign(nd, 0);
            for (int d = 0; d < nd; ++d) {
                if (node.choice[d] >= 0) {
                    best.choices[d] = node.choice[d];
                } else {
                    for (int a = 0; a < 3; ++a) {
                        if (alt_satisfied(disjunctions[d], a, r.solution)) {
                            best.choices[d] = a;
                            break;
                        }
                    }
                }
            }
            best_value = r.value;
            continue;
        }
        for (int a = 0; a < 3; ++a) {
            if (!disjunctions[branch].allowed[a]) continue;
            Node child{r.value, node.choice};
            child.choice[branch] = static_cast<signed char>(a);
            open.push(std::move(child));
        }
    }
    return best;
}

} // namespace mdm
