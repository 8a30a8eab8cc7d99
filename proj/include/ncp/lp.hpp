#pragma once

#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace ncp::lp {

class LpError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Term {
    int var;
    double coeff;
};

enum class Rel { kLe, kGe, kEq };

struct Row {
    std::vector<Term> terms;
    Rel rel;
    double rhs;
    std::string name;
};

/// A mixed-integer linear program in minimize form. Lower bounds must be
/// finite (everything here is naturally >= 0).
struct Problem {
    std::vector<double> objective;
    std::vector<double> lower, upper;
    std::vector<bool> integral;
    std::vector<std::string> var_names;
    std::vector<Row> rows;

    int num_vars() const { return static_cast<int>(objective.size()); }
    int add_var(std::string name, double lo, double hi, double obj, bool is_int) {
        var_names.push_back(std::move(name));
        lower.push_back(lo);
        upper.push_back(hi);
        objective.push_back(obj);
        integral.push_back(is_int);
        return num_vars() - 1;
    }
    void add_row(Row r) { rows.push_back(std::move(r)); }
};

enum class LpStatus { kOptimal, kInfeasible, kUnbounded, kIterLimit };

struct LpResult {
    LpStatus status;
    double obj = 0;
    std::vector<double> x;
};

/// Bounded-variable primal simplex on a dense tableau. Dantzig pricing with a
/// Bland fallback after a degenerate stall, which rules out cycling. Only the
/// rows listed in active_rows constrain the solve; lo/hi override the
/// problem's variable bounds (used by branching).
LpResult solve_lp(const Problem& p, const std::vector<int>& active_rows,
                  const std::vector<double>& lo, const std::vector<double>& hi);
LpResult solve_lp(const Problem& p);

enum class MilpStatus { kOptimal, kFeasible, kInfeasible, kBudget };

struct MilpOptions {
    long budget_ms = 30000;
    /// Solutions costing this much or more are uninteresting: the search
    /// prunes against it and may finish with "nothing below the cutoff",
    /// reported as infeasible.
    double cutoff = kInf;
    /// Branching class per variable (smaller first); default all zero.
    std::vector<int> branch_priority;
    /// Rows enforced lazily: left out of the LP until an optimum violates
    /// them. Sound because dropping rows relaxes, and every accepted
    /// incumbent is checked against all of them.
    std::vector<int> lazy_rows;
    /// Known-feasible starting points (checked, then used as incumbents).
    std::vector<std::vector<double>> warm_starts;
    /// Separation oracle: given an LP optimum, returns valid rows it
    /// violates (empty when none). Generated rows join the problem for the
    /// rest of the search.
    std::function<std::vector<Row>(const std::vector<double>&)> separate;
};

struct MilpResult {
    MilpStatus status = MilpStatus::kInfeasible;
    double obj = 0;
    std::vector<double> x;
    double bound = -kInf;  // proved lower bound on the optimum
    long nodes = 0;
};

/// Depth-first branch and bound over the integral variables.
MilpResult solve_milp(const Problem& p, const MilpOptions& opt = {});

/// True iff x satisfies every row and bound of p (integrality too), within
/// tolerance.
bool feasible(const Problem& p, const std::vector<double>& x, double tol = 1e-6);

}  // namespace ncp::lp
