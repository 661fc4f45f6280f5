#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "stochrobust/lex.hpp"

namespace stochrobust {

// Arithmetic expressions over named variables and parameters, used for rate
// laws, hybrid flows/hazards and STL secondary signals. Comparisons evaluate
// to 1.0/0.0; ind(e) passes its argument through so indicator intent is
// explicit in model text (e.g. kp*ind(g1==free)).

struct ExprNode;
using ExprPtr = std::shared_ptr<const ExprNode>;

enum class ExprKind { constant, name, unary_minus, binary, compare, call };
enum class CmpOp { eq, ne, lt, le, gt, ge };

struct ExprNode {
    ExprKind kind;
    double value = 0.0;          // constant
    std::string name;            // name / call
    char op = 0;                 // binary: + - * / ^
    CmpOp cmp = CmpOp::eq;       // compare
    std::vector<ExprPtr> args;

    static ExprPtr constant(double v);
    static ExprPtr make_name(std::string n);
    static ExprPtr unary(ExprPtr a);
    static ExprPtr binary(char op, ExprPtr a, ExprPtr b);
    static ExprPtr compare(CmpOp c, ExprPtr a, ExprPtr b);
    static ExprPtr call(std::string fn, std::vector<ExprPtr> args);
};

// Parse a full string as one expression (comparison precedence lowest).
ExprPtr parse_expression(std::string_view text);
// Parse an expression from an existing token stream; stops before any token
// that cannot continue the expression.
ExprPtr parse_expression(TokenStream& ts);

std::string render_expr(const ExprPtr& e);

// Collect every identifier referenced (variables, parameters, labels).
void collect_names(const ExprPtr& e, std::vector<std::string>& out);

// Return a copy with the given names replaced by numeric constants.
ExprPtr substitute(const ExprPtr& e, const std::map<std::string, double>& values);

// Structural equality (used by round-trip checks).
bool expr_equal(const ExprPtr& a, const ExprPtr& b);

// --- compiled form -----------------------------------------------------

// Name resolution outcome for one identifier.
struct Slot {
    enum class Kind { state, aux, param, label } kind;
    uint32_t index = 0;
};

// Maps an identifier to a slot. Label resolution is attempted only for the
// right-hand side of ==/!= against an aux (discrete) variable; `aux_index`
// then carries the variable whose domain should be searched.
using NameResolver = std::function<bool(const std::string& name, Slot& out)>;
using LabelResolver = std::function<bool(uint32_t aux_index, const std::string& label, uint32_t& out)>;

struct EvalContext {
    std::span<const double> state;   // species counts / continuous variables / trace row
    std::span<const double> aux;     // discrete variables as domain indices
    std::span<const double> params;
};

class CompiledExpr {
public:
    CompiledExpr() = default;
    double eval(const EvalContext& ctx) const;
    bool empty() const { return code_.empty(); }

private:
    enum class Op : uint8_t {
        push_const, push_state, push_aux, push_param,
        add, sub, mul, div, pow_, neg,
        cmp_eq, cmp_ne, cmp_lt, cmp_le, cmp_gt, cmp_ge,
        fn_exp, fn_log, fn_sqrt, fn_abs, fn_min, fn_max,
    };
    struct Instr {
        Op op;
        uint32_t idx = 0;
        double c = 0.0;
    };
    std::vector<Instr> code_;

    friend CompiledExpr compile_expr(const ExprPtr&, const NameResolver&, const LabelResolver&);
};

// Compile against a resolver; throws ModelError naming any unresolved
// identifier. `labels` may be null when the context has no discrete domains.
CompiledExpr compile_expr(const ExprPtr& e, const NameResolver& resolve,
                          const LabelResolver& labels = nullptr);

}  // namespace stochrobust
