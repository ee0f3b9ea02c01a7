#pragma once

// Independent solver oracles shared by the unit and acceptance suites.

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "mdm/solver.hpp"

namespace oracles {

using mdm::LinearProgram;
using mdm::Relation;

struct Outcome {
    bool feasible = false;
    double value = 0.0;
};

inline bool solve_square(std::vector<std::vector<double>> a, std::vector<double> b,
                         std::vector<double>& x) {
    const int n = static_cast<int>(b.size());
    x.assign(n, 0.0);
    for (int col = 0; col < n; ++col) {
        int pivot = -1;
        double best = 1e-9;
        for (int r = col; r < n; ++r) {
            if (std::abs(a[r][col]) > best) {
                best = std::abs(a[r][col]);
                pivot = r;
            }
        }
        if (pivot < 0) return false;
        std::swap(a[col], a[pivot]);
        std::swap(b[col], b[pivot]);
        for (int r = 0; r < n; ++r) {
            if (r == col) continue;
            const double f = a[r][col] / a[col][col];
            for (int c = col; c < n; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    for (int r = 0; r < n; ++r) x[r] = b[r] / a[r][r];
    return true;
}

// Vertex enumeration for LPs whose variables all carry finite bounds: every
// vertex solves some n_vars-subset of {rows, bounds} at equality.
inline Outcome vertex_enumeration(const LinearProgram& lp) {
    struct Hyperplane {
        std::vector<double> a;
        double b;
    };
    std::vector<Hyperplane> planes;
    for (const auto& row : lp.rows) {
        Hyperplane h{std::vector<double>(lp.num_vars, 0.0), row.rhs};
        for (const auto& [j, c] : row.coeffs) h.a[j] += c;
        planes.push_back(std::move(h));
    }
    for (int j = 0; j < lp.num_vars; ++j) {
        Hyperplane lo{std::vector<double>(lp.num_vars, 0.0), lp.lower[j]};
        lo.a[j] = 1.0;
        planes.push_back(std::move(lo));
        Hyperplane hi{std::vector<double>(lp.num_vars, 0.0), lp.upper[j]};
        hi.a[j] = 1.0;
        planes.push_back(std::move(hi));
    }

    auto feasible = [&](const std::vector<double>& x) {
        for (int j = 0; j < lp.num_vars; ++j) {
            if (x[j] < lp.lower[j] - 1e-7 || x[j] > lp.upper[j] + 1e-7) return false;
        }
        for (const auto& row : lp.rows) {
            double lhs = 0.0;
            for (const auto& [j, c] : row.coeffs) lhs += c * x[j];
            if (row.rel == Relation::Le && lhs > row.rhs + 1e-7) return false;
            if (row.rel == Relation::Ge && lhs < row.rhs - 1e-7) return false;
            if (row.rel == Relation::Eq && std::abs(lhs - row.rhs) > 1e-7) return false;
        }
        return true;
    };

    Outcome out;
    const int n = lp.num_vars;
    std::vector<int> idx(n);
    std::function<void(int, int)> rec = [&](int start, int depth) {
        if (depth == n) {
            std::vector<std::vector<double>> a(n);
            std::vector<double> b(n);
            for (int r = 0; r < n; ++r) {
                a[r] = planes[idx[r]].a;
                b[r] = planes[idx[r]].b;
            }
            std::vector<double> x;
            if (!solve_square(a, b, x)) return;
            if (!feasible(x)) return;
            double v = 0.0;
            for (int j = 0; j < n; ++j) v += lp.objective[j] * x[j];
            if (!out.feasible || v < out.value) {
                out.feasible = true;
                out.value = v;
            }
            return;
        }
        for (int p = start; p < static_cast<int>(planes.size()); ++p) {
            idx[depth] = p;
            rec(p + 1, depth + 1);
        }
    };
    rec(0, 0);
    return out;
}

inline LinearProgram random_bounded_lp(std::mt19937_64& rng, int n_vars, int n_rows) {
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    std::uniform_int_distribution<int> rel_dist(0, 2);
    LinearProgram lp;
    for (int j = 0; j < n_vars; ++j) lp.add_var(-2.0, 3.0, coef(rng));
    for (int r = 0; r < n_rows; ++r) {
        std::vector<std::pair<int, double>> row;
        for (int j = 0; j < n_vars; ++j) {
            const double c = coef(rng);
            if (std::abs(c) > 0.3) row.push_back({j, c});
        }
        if (row.empty()) row.push_back({0, 1.0});
        const Relation rel = static_cast<Relation>(rel_dist(rng) % 2);
        lp.add_row(std::move(row), r % 5 == 4 ? Relation::Eq : rel, coef(rng) * 2.0);
    }
    return lp;
}

inline mdm::MixedIntegerProgram random_small_mip(std::mt19937_64& rng, int trial) {
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    mdm::MixedIntegerProgram mip;
    for (int j = 0; j < 3; ++j) mip.lp.add_var(0.0, 2.0, coef(rng));
    for (int j = 0; j < 6; ++j) mip.binaries.push_back(mip.lp.add_var(0.0, 1.0, coef(rng)));
    const int rows = 2 + trial % 4;
    for (int r = 0; r < rows; ++r) {
        std::vector<std::pair<int, double>> row;
        for (int j = 0; j < mip.lp.num_vars; ++j) {
            const double c = coef(rng);
            if (std::abs(c) > 0.4) row.push_back({j, c});
        }
        if (row.empty()) row.push_back({0, 1.0});
        mip.lp.add_row(std::move(row), Relation::Le, 1.0 + coef(rng));
    }
    return mip;
}

// Exhaustive enumeration over the 2^6 binary patterns.
inline Outcome enumerate_mip(const mdm::MixedIntegerProgram& mip) {
    Outcome out;
    for (int mask = 0; mask < (1 << mip.binaries.size()); ++mask) {
        LinearProgram fixed = mip.lp;
        for (std::size_t b = 0; b < mip.binaries.size(); ++b) {
            const double v = (mask >> b) & 1;
            fixed.lower[mip.binaries[b]] = v;
            fixed.upper[mip.binaries[b]] = v;
        }
        auto r = mdm::solve_lp(fixed);
        if (r.status == mdm::SolveStatus::Optimal) {
            if (!out.feasible || r.value < out.value) {
                out.feasible = true;
                out.value = r.value;
            }
        }
    }
    return out;
}

} // namespace oracles
