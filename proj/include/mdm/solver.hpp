#pragma once

#include <cstdint>
#include <limits>
#include <vector>

namespace mdm {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
// Constraint/feasibility tolerance of the embedded solver.
inline constexpr double kFeasTol = 1e-7;
// A binary is integral when within this distance of 0 or 1.
inline constexpr double kIntTol = 1e-6;

enum class Relation { Le, Eq, Ge };

struct LinearProgram {
    struct Row {
        std::vector<std::pair<int, double>> coeffs; // (variable, coefficient)
        Relation rel = Relation::Le;
        double rhs = 0.0;
    };

    int num_vars = 0;
    std::vector<double> objective; // minimize c.x
    std::vector<Row> rows;
    std::vector<double> lower; // -inf allowed
    std::vector<double> upper; // +inf allowed

    // Adds a variable with the given bounds and objective coefficient,
    // returning its index.
    int add_var(double lo, double hi, double obj = 0.0);
    void add_row(std::vector<std::pair<int, double>> coeffs, Relation rel, double rhs);
};

struct MixedIntegerProgram {
    LinearProgram lp;
    std::vector<int> binaries; // variable indices restricted to {0,1}
};

enum class SolveStatus { Optimal, Infeasible, Unbounded };

struct SolveResult {
    SolveStatus status = SolveStatus::Infeasible;
    double value = 0.0;
    std::vector<double> solution;
};

struct SimplexOptions {
    std::int64_t iteration_limit = 1'000'000;
};

// Two-phase dense primal simplex. Dantzig pricing with a Bland fallback
// after 10*(m+n) degenerate pivots. Throws Error{CycleLimitExceeded} at the
// iteration cap.
SolveResult solve_lp(const LinearProgram& lp, const SimplexOptions& opts = {});

struct MilpOptions {
    std::int64_t node_limit = 1'000'000;
    SimplexOptions lp;
    // Optional starting point for the binaries; used to seed the incumbent.
    std::vector<double> binary_hint;
};

// Best-first branch and bound on the LP relaxation, branching on the most
// fractional binary. Exact for the binary restriction. Throws
// Error{NodeLimitExceeded} at the node cap.
SolveResult solve_milp(const MixedIntegerProgram& mip, const MilpOptions& opts = {});

// Branch and bound over three-way disjunctions. Each disjunction
// contributes exactly one of its row groups (some groups may be marked
// impossible by leaving them empty AND setting `allowed` false).
struct Disjunction {
    // Row groups for the three alternatives, e.g. {<, =, >}.
    std::vector<LinearProgram::Row> alt[3];
    bool allowed[3] = {true, true, true};
};

struct DisjunctiveOptions {
    std::int64_t node_limit = 1'000'000;
    SimplexOptions lp;
    double incumbent_value = kInf; // optional known feasible value
};

struct DisjunctiveResult {
    SolveStatus status = SolveStatus::Infeasible;
    double value = 0.0;
    std::vector<double> solution;
    std::vector<int> choices; // chosen alternative per disjunction
};

// Minimizes base.objective subject to base plus one alternative from every
// disjunction; exact over all alternative selections.
DisjunctiveResult solve_disjunctive(const LinearProgram& base,
                                    const std::vector<Disjunction>& disjunctions,
                                    const DisjunctiveOptions& opts = {});

} // namespace mdm
