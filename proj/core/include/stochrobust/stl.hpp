#pragma once

#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "stochrobust/expr.hpp"
#include "stochrobust/signal.hpp"
#include "stochrobust/trajectory.hpp"

namespace stochrobust {

// Robustness of the true literal: a large finite sentinel so min/max
// arithmetic stays total.
inline constexpr double top_robustness = 1e300;

enum class FormulaKind { true_lit, atomic, negation, conjunction, disjunction,
                         until, eventually, always };

struct FormulaNode;
using FormulaPtr = std::shared_ptr<const FormulaNode>;

struct FormulaNode {
    FormulaKind kind;
    ExprPtr signal;          // atomic: secondary signal y, sense y >= 0
    ExprPtr lo, hi;          // temporal interval bounds (may reference parameters)
    std::vector<FormulaPtr> kids;
};

// STL formula; F and G stay primitive nodes (not desugared through until).
// Atomic predicates and interval bounds may reference named parameters that
// are fixed by instantiate() before monitoring.
struct Formula {
    FormulaPtr root;

    bool valid() const { return root != nullptr; }
};

struct RobustnessValue {
    double value = 0.0;
    bool satisfied = false;        // value > 0
    bool undefined_at_zero = false;  // boolean semantics undecided when value == 0
};

// Grammar: T | <expr> CMP <expr> | !f | f & f | f | f | f -> f |
//          f U[a,b] f | F[a,b] f | G[a,b] f, CMP in {<,<=,>,>=}.
// X >= 300 is sugar for the secondary signal X-300 >= 0. T, F, G and U are
// reserved words inside formulas.
Formula parse_formula(std::string_view text);

std::string render_formula(const Formula& f);

// Replace parameter names (in atomics and interval bounds) by values and fold
// the bounds to literals; validates 0 <= a < b on every fully numeric interval.
Formula instantiate(const Formula& f, const std::map<std::string, double>& params);

// All identifiers referenced by atomics and bounds (variables and parameters).
std::vector<std::string> referenced_names(const Formula& f);

// Required trace horizon: nesting sum of interval upper bounds. Requires
// numeric bounds.
double time_depth(const Formula& f);

// Efficient monitor: per-node signal computation with sliding-window extrema.
RobustnessValue robustness(const Formula& f, const Trajectory& tr);

// Reference evaluator: direct recursion over candidate time points with full
// window rescans and no incremental state. Slow; meant for validation.
RobustnessValue robustness_oracle(const Formula& f, const Trajectory& tr);

RobustnessValue robustness_value(double v);

}  // namespace stochrobust
