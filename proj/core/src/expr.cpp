#include "stochrobust/expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>

namespace stochrobust {

// --- tokenizer ----------------------------------------------------------

std::vector<Token> tokenize(std::string_view src) {
    std::vector<Token> out;
    int line = 1, col = 1;
    size_t i = 0;
    auto advance = [&](size_t n) {
        for (size_t k = 0; k < n; ++k) {
            if (i + k < src.size() && src[i + k] == '\n') { ++line; col = 1; }
            else ++col;
        }
        i += n;
    };
    while (i < src.size()) {
        char c = src[i];
        if (c == '#') {  // comment to end of line
            while (i < src.size() && src[i] != '\n') advance(1);
            continue;
        }
        if (std::isspace(static_cast<unsigned char>(c))) { advance(1); continue; }
        Token t;
        t.line = line;
        t.col = col;
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            size_t j = i;
            while (j < src.size() &&
                   (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_'))
                ++j;
            t.kind = TokKind::ident;
            t.text = std::string(src.substr(i, j - i));
            advance(j - i);
        } else if (std::isdigit(static_cast<unsigned char>(c)) ||
                   (c == '.' && i + 1 < src.size() &&
                    std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
            size_t j = i;
            while (j < src.size() && (std::isdigit(static_cast<unsigned char>(src[j])) || src[j] == '.'))
                ++j;
            if (j < src.size() && (src[j] == 'e' || src[j] == 'E')) {
                size_t k = j + 1;
                if (k < src.size() && (src[k] == '+' || src[k] == '-')) ++k;
                if (k < src.size() && std::isdigit(static_cast<unsigned char>(src[k]))) {
                    ++k;
                    while (k < src.size() && std::isdigit(static_cast<unsigned char>(src[k]))) ++k;
                    j = k;
                }
            }
            t.kind = TokKind::number;
            t.text = std::string(src.substr(i, j - i));
            char* end = nullptr;
            t.number = std::strtod(t.text.c_str(), &end);
            if (end != t.text.c_str() + t.text.size())
                throw ParseError("malformed number '" + t.text + "'", line, col);
            advance(j - i);
        } else {
            static constexpr std::string_view two[] = {"->", "==", "!=", "<=", ">="};
            std::string_view rest = src.substr(i);
            t.kind = TokKind::punct;
            t.text = std::string(1, c);
            for (auto p : two) {
                if (rest.substr(0, 2) == p) { t.text = std::string(p); break; }
            }
            advance(t.text.size());
        }
        out.push_back(std::move(t));
    }
    Token eof;
    eof.kind = TokKind::eof;
    eof.line = line;
    eof.col = col;
    out.push_back(eof);
    return out;
}

// --- AST constructors ---------------------------------------------------

ExprPtr ExprNode::constant(double v) {
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprKind::constant;
    n->value = v;
    return n;
}
ExprPtr ExprNode::make_name(std::string s) {
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprKind::name;
    n->name = std::move(s);
    return n;
}
ExprPtr ExprNode::unary(ExprPtr a) {
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprKind::unary_minus;
    n->args = {std::move(a)};
    return n;
}
ExprPtr ExprNode::binary(char op, ExprPtr a, ExprPtr b) {
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprKind::binary;
    n->op = op;
    n->args = {std::move(a), std::move(b)};
    return n;
}
ExprPtr ExprNode::compare(CmpOp c, ExprPtr a, ExprPtr b) {
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprKind::compare;
    n->cmp = c;
    n->args = {std::move(a), std::move(b)};
    return n;
}
ExprPtr ExprNode::call(std::string fn, std::vector<ExprPtr> args) {
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprKind::call;
    n->name = std::move(fn);
    n->args = std::move(args);
    return n;
}

// --- parser -------------------------------------------------------------

namespace {

ExprPtr parse_cmp(TokenStream& ts);

ExprPtr parse_primary(TokenStream& ts) {
    const Token& t = ts.peek();
    if (t.kind == TokKind::number) return ExprNode::constant(ts.next().number);
    if (t.kind == TokKind::ident) {
        std::string name = ts.next().text;
        if (ts.accept("(")) {
            std::vector<ExprPtr> args;
            if (!ts.peek().is(")")) {
                args.push_back(parse_cmp(ts));
                while (ts.accept(",")) args.push_back(parse_cmp(ts));
            }
            ts.expect(")");
            return ExprNode::call(std::move(name), std::move(args));
        }
        return ExprNode::make_name(std::move(name));
    }
    if (ts.accept("(")) {
        ExprPtr e = parse_cmp(ts);
        ts.expect(")");
        return e;
    }
    ts.fail("expected expression");
}

ExprPtr parse_unary(TokenStream& ts);

ExprPtr parse_power(TokenStream& ts) {
    ExprPtr base = parse_primary(ts);
    if (ts.accept("^")) return ExprNode::binary('^', std::move(base), parse_unary(ts));
    return base;
}

ExprPtr parse_unary(TokenStream& ts) {
    if (ts.accept("-")) return ExprNode::unary(parse_unary(ts));
    if (ts.accept("+")) return parse_unary(ts);
    return parse_power(ts);
}

ExprPtr parse_term(TokenStream& ts) {
    ExprPtr lhs = parse_unary(ts);
    while (true) {
        if (ts.accept("*")) lhs = ExprNode::binary('*', std::move(lhs), parse_unary(ts));
        else if (ts.accept("/")) lhs = ExprNode::binary('/', std::move(lhs), parse_unary(ts));
        else return lhs;
    }
}

ExprPtr parse_sum(TokenStream& ts) {
    ExprPtr lhs = parse_term(ts);
    while (true) {
        // never consume '->': it belongs to the enclosing grammar
        if (ts.peek().is("-") ) { ts.next(); lhs = ExprNode::binary('-', std::move(lhs), parse_term(ts)); }
        else if (ts.accept("+")) lhs = ExprNode::binary('+', std::move(lhs), parse_term(ts));
        else return lhs;
    }
}

ExprPtr parse_cmp(TokenStream& ts) {
    ExprPtr lhs = parse_sum(ts);
    const Token& t = ts.peek();
    CmpOp op;
    if (t.is("==")) op = CmpOp::eq;
    else if (t.is("!=")) op = CmpOp::ne;
    else if (t.is("<=")) op = CmpOp::le;
    else if (t.is(">=")) op = CmpOp::ge;
    else if (t.is("<")) op = CmpOp::lt;
    else if (t.is(">")) op = CmpOp::gt;
    else return lhs;
    ts.next();
    return ExprNode::compare(op, std::move(lhs), parse_sum(ts));
}

}  // namespace

ExprPtr parse_expression(TokenStream& ts) { return parse_cmp(ts); }

ExprPtr parse_expression(std::string_view text) {
    TokenStream ts(tokenize(text));
    ExprPtr e = parse_cmp(ts);
    if (!ts.at_end()) ts.fail("unexpected trailing input in expression");
    return e;
}

// --- rendering ----------------------------------------------------------

namespace {

const char* cmp_str(CmpOp c) {
    switch (c) {
        case CmpOp::eq: return "==";
        case CmpOp::ne: return "!=";
        case CmpOp::lt: return "<";
        case CmpOp::le: return "<=";
        case CmpOp::gt: return ">";
        case CmpOp::ge: return ">=";
    }
    return "?";
}

std::string render_number(double v) {
    char buf[40];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, p);
}

int precedence(const ExprNode& n) {
    switch (n.kind) {
        case ExprKind::compare: return 0;
        case ExprKind::binary: return n.op == '+' || n.op == '-' ? 1 : (n.op == '^' ? 3 : 2);
        case ExprKind::unary_minus: return 2;
        default: return 4;
    }
}

void render_rec(const ExprPtr& e, int parent_prec, std::string& out) {
    int prec = precedence(*e);
    bool paren = prec < parent_prec;
    if (paren) out += '(';
    switch (e->kind) {
        case ExprKind::constant:
            if (e->value < 0) { out += '('; out += render_number(e->value); out += ')'; }
            else out += render_number(e->value);
            break;
        case ExprKind::name:
            out += e->name;
            break;
        case ExprKind::unary_minus:
            out += '-';
            render_rec(e->args[0], prec + 1, out);
            break;
        case ExprKind::binary:
            render_rec(e->args[0], prec, out);
            out += e->op;
            render_rec(e->args[1], prec + 1, out);
            break;
        case ExprKind::compare:
            render_rec(e->args[0], 1, out);
            out += cmp_str(e->cmp);
            render_rec(e->args[1], 1, out);
            break;
        case ExprKind::call:
            out += e->name;
            out += '(';
            for (size_t i = 0; i < e->args.size(); ++i) {
                if (i) out += ',';
                render_rec(e->args[i], 0, out);
            }
            out += ')';
            break;
    }
    if (paren) out += ')';
}

}  // namespace

std::string render_expr(const ExprPtr& e) {
    std::string out;
    render_rec(e, 0, out);
    return out;
}

void collect_names(const ExprPtr& e, std::vector<std::string>& out) {
    if (e->kind == ExprKind::name) out.push_back(e->name);
    for (const auto& a : e->args) collect_names(a, out);
}

ExprPtr substitute(const ExprPtr& e, const std::map<std::string, double>& values) {
    if (e->kind == ExprKind::name) {
        auto it = values.find(e->name);
        if (it != values.end()) return ExprNode::constant(it->second);
        return e;
    }
    if (e->args.empty()) return e;
    auto n = std::make_shared<ExprNode>(*e);
    for (auto& a : n->args) a = substitute(a, values);
    return n;
}

bool expr_equal(const ExprPtr& a, const ExprPtr& b) {
    if (a->kind != b->kind || a->args.size() != b->args.size()) return false;
    switch (a->kind) {
        case ExprKind::constant:
            if (a->value != b->value) return false;
            break;
        case ExprKind::name:
        case ExprKind::call:
            if (a->name != b->name) return false;
            break;
        case ExprKind::binary:
            if (a->op != b->op) return false;
            break;
        case ExprKind::compare:
            if (a->cmp != b->cmp) return false;
            break;
        default:
            break;
    }
    for (size_t i = 0; i < a->args.size(); ++i)
        if (!expr_equal(a->args[i], b->args[i])) return false;
    return true;
}

// --- compilation and evaluation ------------------------------------------

CompiledExpr compile_expr(const ExprPtr& e, const NameResolver& resolve,
                          const LabelResolver& labels) {
    CompiledExpr ce;
    using I = CompiledExpr;
    struct Builder {
        std::vector<CompiledExpr::Instr>& code;
        const NameResolver& resolve;
        const LabelResolver& labels;

        void emit_name(const std::string& name) {
            Slot s;
            if (!resolve || !resolve(name, s))
                throw ModelError("reference to undeclared name '" + name + "'");
            switch (s.kind) {
                case Slot::Kind::state: code.push_back({I::Op::push_state, s.index, 0}); break;
                case Slot::Kind::aux: code.push_back({I::Op::push_aux, s.index, 0}); break;
                case Slot::Kind::param: code.push_back({I::Op::push_param, s.index, 0}); break;
                case Slot::Kind::label:
                    throw ModelError("label '" + name + "' used outside ==/!= comparison");
            }
        }

        // Compile a comparison operand, allowing domain labels when the other
        // side resolved to a discrete (aux) variable.
        bool try_label(const ExprPtr& side, uint32_t aux_index) {
            if (side->kind != ExprKind::name || !labels) return false;
            Slot probe;
            if (resolve && resolve(side->name, probe)) return false;  // a real name wins
            uint32_t li;
            if (!labels(aux_index, side->name, li)) return false;
            code.push_back({I::Op::push_const, 0, static_cast<double>(li)});
            return true;
        }

        void visit(const ExprPtr& e) {
            switch (e->kind) {
                case ExprKind::constant:
                    code.push_back({I::Op::push_const, 0, e->value});
                    break;
                case ExprKind::name:
                    emit_name(e->name);
                    break;
                case ExprKind::unary_minus:
                    visit(e->args[0]);
                    code.push_back({I::Op::neg, 0, 0});
                    break;
                case ExprKind::binary: {
                    visit(e->args[0]);
                    visit(e->args[1]);
                    I::Op op = e->op == '+'   ? I::Op::add
                               : e->op == '-' ? I::Op::sub
                               : e->op == '*' ? I::Op::mul
                               : e->op == '/' ? I::Op::div
                                              : I::Op::pow_;
                    code.push_back({op, 0, 0});
                    break;
                }
                case ExprKind::compare: {
                    // g == label / label == g need label resolution against the
                    // discrete side's domain
                    const ExprPtr& lhs = e->args[0];
                    const ExprPtr& rhs = e->args[1];
                    bool lhs_done = false, rhs_done = false;
                    if ((e->cmp == CmpOp::eq || e->cmp == CmpOp::ne) && labels) {
                        Slot ls, rs;
                        bool l_aux = lhs->kind == ExprKind::name && resolve(lhs->name, ls) &&
                                     ls.kind == Slot::Kind::aux;
                        bool r_aux = rhs->kind == ExprKind::name && resolve(rhs->name, rs) &&
                                     rs.kind == Slot::Kind::aux;
                        if (l_aux) {
                            visit(lhs);
                            lhs_done = true;
                            rhs_done = try_label(rhs, ls.index);
                        } else if (r_aux) {
                            lhs_done = try_label(lhs, rs.index);
                            if (lhs_done) { visit(rhs); rhs_done = true; }
                        }
                    }
                    if (!lhs_done) visit(lhs);
                    if (!rhs_done) visit(rhs);
                    I::Op op;
                    switch (e->cmp) {
                        case CmpOp::eq: op = I::Op::cmp_eq; break;
                        case CmpOp::ne: op = I::Op::cmp_ne; break;
                        case CmpOp::lt: op = I::Op::cmp_lt; break;
                        case CmpOp::le: op = I::Op::cmp_le; break;
                        case CmpOp::gt: op = I::Op::cmp_gt; break;
                        case CmpOp::ge: op = I::Op::cmp_ge; break;
                    }
                    code.push_back({op, 0, 0});
                    break;
                }
                case ExprKind::call: {
                    const std::string& fn = e->name;
                    auto need = [&](size_t n) {
                        if (e->args.size() != n)
                            throw ModelError("function '" + fn + "' expects " +
                                             std::to_string(n) + " argument(s)");
                    };
                    if (fn == "ind") { need(1); visit(e->args[0]); return; }
                    if (fn == "exp") { need(1); visit(e->args[0]); code.push_back({I::Op::fn_exp, 0, 0}); return; }
                    if (fn == "log") { need(1); visit(e->args[0]); code.push_back({I::Op::fn_log, 0, 0}); return; }
                    if (fn == "sqrt") { need(1); visit(e->args[0]); code.push_back({I::Op::fn_sqrt, 0, 0}); return; }
                    if (fn == "abs") { need(1); visit(e->args[0]); code.push_back({I::Op::fn_abs, 0, 0}); return; }
                    if (fn == "min") { need(2); visit(e->args[0]); visit(e->args[1]); code.push_back({I::Op::fn_min, 0, 0}); return; }
                    if (fn == "max") { need(2); visit(e->args[0]); visit(e->args[1]); code.push_back({I::Op::fn_max, 0, 0}); return; }
                    if (fn == "pow") { need(2); visit(e->args[0]); visit(e->args[1]); code.push_back({I::Op::pow_, 0, 0}); return; }
                    throw ModelError("unknown function '" + fn + "'");
                }
            }
        }
    };
    Builder b{ce.code_, resolve, labels};
    b.visit(e);
    return ce;
}

double CompiledExpr::eval(const EvalContext& ctx) const {
    double stack[48];
    int sp = 0;
    for (const Instr& in : code_) {
        switch (in.op) {
            case Op::push_const: stack[sp++] = in.c; break;
            case Op::push_state: stack[sp++] = ctx.state[in.idx]; break;
            case Op::push_aux: stack[sp++] = ctx.aux[in.idx]; break;
            case Op::push_param: stack[sp++] = ctx.params[in.idx]; break;
            case Op::add: --sp; stack[sp - 1] += stack[sp]; break;
            case Op::sub: --sp; stack[sp - 1] -= stack[sp]; break;
            case Op::mul: --sp; stack[sp - 1] *= stack[sp]; break;
            case Op::div: --sp; stack[sp - 1] /= stack[sp]; break;
            case Op::pow_: --sp; stack[sp - 1] = std::pow(stack[sp - 1], stack[sp]); break;
            case Op::neg: stack[sp - 1] = -stack[sp - 1]; break;
            case Op::cmp_eq: --sp; stack[sp - 1] = stack[sp - 1] == stack[sp] ? 1.0 : 0.0; break;
            case Op::cmp_ne: --sp; stack[sp - 1] = stack[sp - 1] != stack[sp] ? 1.0 : 0.0; break;
            case Op::cmp_lt: --sp; stack[sp - 1] = stack[sp - 1] < stack[sp] ? 1.0 : 0.0; break;
            case Op::cmp_le: --sp; stack[sp - 1] = stack[sp - 1] <= stack[sp] ? 1.0 : 0.0; break;
            case Op::cmp_gt: --sp; stack[sp - 1] = stack[sp - 1] > stack[sp] ? 1.0 : 0.0; break;
            case Op::cmp_ge: --sp; stack[sp - 1] = stack[sp - 1] >= stack[sp] ? 1.0 : 0.0; break;
            case Op::fn_exp: stack[sp - 1] = std::exp(stack[sp - 1]); break;
            case Op::fn_log: stack[sp - 1] = std::log(stack[sp - 1]); break;
            case Op::fn_sqrt: stack[sp - 1] = std::sqrt(stack[sp - 1]); break;
            case Op::fn_abs: stack[sp - 1] = std::fabs(stack[sp - 1]); break;
            case Op::fn_min: --sp; stack[sp - 1] = std::min(stack[sp - 1], stack[sp]); break;
            case Op::fn_max: --sp; stack[sp - 1] = std::max(stack[sp - 1], stack[sp]); break;
        }
    }
    return sp > 0 ? stack[sp - 1] : 0.0;
}

}  // namespace stochrobust
