#include "stochrobust/stl.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <set>

namespace stochrobust {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::shared_ptr<FormulaNode> mut_node(FormulaKind k) {
    auto n = std::make_shared<FormulaNode>();
    n->kind = k;
    return n;
}

// --- parser ---------------------------------------------------------------

struct FormulaParser {
    TokenStream& ts;

    FormulaPtr parse() {
        FormulaPtr f = implication();
        if (!ts.at_end()) ts.fail("unexpected trailing input in formula");
        return f;
    }

    FormulaPtr implication() {
        FormulaPtr lhs = disjunction();
        if (ts.accept("->")) {
            // a -> b  ==  !a | b
            auto neg = mut_node(FormulaKind::negation);
            neg->kids = {lhs};
            auto disj = mut_node(FormulaKind::disjunction);
            disj->kids = {neg, implication()};
            return disj;
        }
        return lhs;
    }

    FormulaPtr disjunction() {
        FormulaPtr lhs = conjunction();
        while (ts.accept("|")) {
            auto n = mut_node(FormulaKind::disjunction);
            n->kids = {lhs, conjunction()};
            lhs = n;
        }
        return lhs;
    }

    FormulaPtr conjunction() {
        FormulaPtr lhs = until_level();
        while (ts.accept("&")) {
            auto n = mut_node(FormulaKind::conjunction);
            n->kids = {lhs, until_level()};
            lhs = n;
        }
        return lhs;
    }

    FormulaPtr until_level() {
        FormulaPtr lhs = unary();
        if (ts.peek().is_ident("U")) {
            ts.next();
            auto n = mut_node(FormulaKind::until);
            bounds(*n);
            n->kids = {lhs, until_level()};
            return n;
        }
        return lhs;
    }

    void bounds(FormulaNode& n) {
        ts.expect("[");
        n.lo = parse_expression(ts);
        ts.expect(",");
        n.hi = parse_expression(ts);
        ts.expect("]");
        // validate immediately when both bounds are literal
        if (n.lo->kind == ExprKind::constant && n.hi->kind == ExprKind::constant) {
            if (!(n.lo->value >= 0) || !(n.lo->value < n.hi->value))
                throw ParseError("temporal interval must satisfy 0 <= a < b");
        }
    }

    FormulaPtr unary() {
        const Token& t = ts.peek();
        if (t.is("!")) {
            ts.next();
            auto n = mut_node(FormulaKind::negation);
            n->kids = {unary()};
            return n;
        }
        if (t.is_ident("F") || t.is_ident("G")) {
            bool ev = t.is_ident("F");
            ts.next();
            auto n = mut_node(ev ? FormulaKind::eventually : FormulaKind::always);
            bounds(*n);
            n->kids = {unary()};
            return n;
        }
        if (t.is_ident("T")) {
            ts.next();
            return mut_node(FormulaKind::true_lit);
        }
        if (t.is("(")) {
            ts.next();
            FormulaPtr f = implication();
            ts.expect(")");
            return f;
        }
        return atomic();
    }

    FormulaPtr atomic() {
        ExprPtr lhs = parse_expression(ts);
        const Token& t = ts.peek();
        CmpOp op;
        if (t.is(">=")) op = CmpOp::ge;
        else if (t.is(">")) op = CmpOp::gt;
        else if (t.is("<=")) op = CmpOp::le;
        else if (t.is("<")) op = CmpOp::lt;
        else ts.fail("expected a comparison (<, <=, >, >=) in atomic predicate");
        ts.next();
        ExprPtr rhs = parse_expression(ts);
        // secondary signal y with sense y >= 0
        auto is_zero = [](const ExprPtr& e) {
            return e->kind == ExprKind::constant && e->value == 0.0;
        };
        ExprPtr y;
        if (op == CmpOp::ge || op == CmpOp::gt)
            y = is_zero(rhs) ? lhs : ExprNode::binary('-', lhs, rhs);
        else
            y = is_zero(lhs) ? rhs : ExprNode::binary('-', rhs, lhs);
        auto n = mut_node(FormulaKind::atomic);
        n->signal = y;
        return n;
    }
};

// --- bound evaluation / validation ------------------------------------------

double bound_value(const ExprPtr& e, const char* what) {
    try {
        CompiledExpr ce = compile_expr(e, [](const std::string&, Slot&) { return false; });
        return ce.eval(EvalContext{});
    } catch (const ModelError& err) {
        throw MonitorError(std::string("formula ") + what +
                           " is not numeric: " + err.what());
    }
}

void check_interval(const FormulaNode& n) {
    double lo = bound_value(n.lo, "interval bound");
    double hi = bound_value(n.hi, "interval bound");
    if (!(lo >= 0) || !(lo < hi))
        throw MonitorError("temporal interval must satisfy 0 <= a < b, got [" +
                           std::to_string(lo) + "," + std::to_string(hi) + "]");
}

double depth_rec(const FormulaPtr& f) {
    switch (f->kind) {
        case FormulaKind::true_lit:
        case FormulaKind::atomic:
            return 0.0;
        case FormulaKind::negation:
            return depth_rec(f->kids[0]);
        case FormulaKind::conjunction:
        case FormulaKind::disjunction:
            return std::max(depth_rec(f->kids[0]), depth_rec(f->kids[1]));
        case FormulaKind::eventually:
        case FormulaKind::always:
            check_interval(*f);
            return bound_value(f->hi, "interval bound") + depth_rec(f->kids[0]);
        case FormulaKind::until:
            check_interval(*f);
            return bound_value(f->hi, "interval bound") +
                   std::max(depth_rec(f->kids[0]), depth_rec(f->kids[1]));
    }
    return 0.0;
}

}  // namespace

Formula parse_formula(std::string_view text) {
    TokenStream ts(tokenize(text));
    FormulaParser p{ts};
    return Formula{p.parse()};
}

// --- rendering -----------------------------------------------------------------

namespace {

void render_rec(const FormulaPtr& f, std::string& out) {
    switch (f->kind) {
        case FormulaKind::true_lit:
            out += "T";
            break;
        case FormulaKind::atomic:
            out += render_expr(f->signal) + " >= 0";
            break;
        case FormulaKind::negation:
            out += "!(";
            render_rec(f->kids[0], out);
            out += ")";
            break;
        case FormulaKind::conjunction:
        case FormulaKind::disjunction:
            out += "(";
            render_rec(f->kids[0], out);
            out += f->kind == FormulaKind::conjunction ? " & " : " | ";
            render_rec(f->kids[1], out);
            out += ")";
            break;
        case FormulaKind::eventually:
        case FormulaKind::always:
            out += f->kind == FormulaKind::eventually ? "F[" : "G[";
            out += render_expr(f->lo) + "," + render_expr(f->hi) + "] (";
            render_rec(f->kids[0], out);
            out += ")";
            break;
        case FormulaKind::until:
            out += "(";
            render_rec(f->kids[0], out);
            out += ") U[" + render_expr(f->lo) + "," + render_expr(f->hi) + "] (";
            render_rec(f->kids[1], out);
            out += ")";
            break;
    }
}

}  // namespace

std::string render_formula(const Formula& f) {
    std::string out;
    render_rec(f.root, out);
    return out;
}

Formula instantiate(const Formula& f, const std::map<std::string, double>& params) {
    std::function<FormulaPtr(const FormulaPtr&)> rec = [&](const FormulaPtr& n) -> FormulaPtr {
        auto m = std::make_shared<FormulaNode>(*n);
        if (m->signal) m->signal = substitute(m->signal, params);
        auto fold = [&](ExprPtr& e) {
            if (!e) return;
            e = substitute(e, params);
            std::vector<std::string> names;
            collect_names(e, names);
            if (names.empty() && e->kind != ExprKind::constant)
                e = ExprNode::constant(bound_value(e, "interval bound"));
        };
        fold(m->lo);
        fold(m->hi);
        for (auto& k : m->kids) k = rec(k);
        if ((m->kind == FormulaKind::until || m->kind == FormulaKind::eventually ||
             m->kind == FormulaKind::always) &&
            m->lo->kind == ExprKind::constant && m->hi->kind == ExprKind::constant) {
            if (!(m->lo->value >= 0) || !(m->lo->value < m->hi->value))
                throw MonitorError("temporal interval must satisfy 0 <= a < b after instantiation");
        }
        return m;
    };
    return Formula{rec(f.root)};
}

std::vector<std::string> referenced_names(const Formula& f) {
    std::set<std::string> acc;
    std::function<void(const FormulaPtr&)> rec = [&](const FormulaPtr& n) {
        std::vector<std::string> names;
        if (n->signal) collect_names(n->signal, names);
        if (n->lo) collect_names(n->lo, names);
        if (n->hi) collect_names(n->hi, names);
        acc.insert(names.begin(), names.end());
        for (const auto& k : n->kids) rec(k);
    };
    rec(f.root);
    return {acc.begin(), acc.end()};
}

double time_depth(const Formula& f) { return depth_rec(f.root); }

RobustnessValue robustness_value(double v) {
    return RobustnessValue{v, v > 0.0, v == 0.0};
}

// --- shared atomic-signal construction -------------------------------------

namespace {

CompiledExpr compile_atomic(const ExprPtr& y, const Trajectory& tr) {
    NameResolver resolver = [&tr](const std::string& n, Slot& out) {
        if (auto c = tr.column(n)) {
            out = {Slot::Kind::state, *c};
            return true;
        }
        return false;
    };
    try {
        return compile_expr(y, resolver);
    } catch (const ModelError& e) {
        throw MonitorError(std::string(e.what()) + " in atomic predicate '" +
                           render_expr(y) + " >= 0'");
    }
}

Signal atomic_signal(const ExprPtr& y, const Trajectory& tr, bool compress) {
    CompiledExpr ce = compile_atomic(y, tr);
    Signal s;
    s.interp = tr.interp;
    s.end = tr.horizon;
    s.t.reserve(tr.rows());
    s.v.reserve(tr.rows());
    for (size_t r = 0; r < tr.rows(); ++r) {
        double val = ce.eval(EvalContext{tr.row(r), {}, {}});
        if (compress && tr.interp == Interp::step && !s.v.empty() && s.v.back() == val)
            continue;
        s.t.push_back(tr.times[r]);
        s.v.push_back(val);
    }
    return s;
}

Signal constant_signal(double v, const Trajectory& tr) {
    Signal s;
    s.interp = tr.interp;
    s.end = tr.horizon;
    s.t = {0.0};
    s.v = {v};
    return s;
}

// --- efficient monitor ---------------------------------------------------------

Signal monitor_rec(const FormulaPtr& f, const Trajectory& tr) {
    switch (f->kind) {
        case FormulaKind::true_lit:
            return constant_signal(top_robustness, tr);
        case FormulaKind::atomic:
            return atomic_signal(f->signal, tr, true);
        case FormulaKind::negation:
            return negate(monitor_rec(f->kids[0], tr));
        case FormulaKind::conjunction:
            return pointwise_min(monitor_rec(f->kids[0], tr), monitor_rec(f->kids[1], tr));
        case FormulaKind::disjunction:
            return pointwise_max(monitor_rec(f->kids[0], tr), monitor_rec(f->kids[1], tr));
        case FormulaKind::eventually:
            return window_max(monitor_rec(f->kids[0], tr), f->lo->value, f->hi->value);
        case FormulaKind::always:
            return window_min(monitor_rec(f->kids[0], tr), f->lo->value, f->hi->value);
        case FormulaKind::until:
            return until_signal(monitor_rec(f->kids[0], tr), monitor_rec(f->kids[1], tr),
                                f->lo->value, f->hi->value);
    }
    throw MonitorError("corrupt formula");
}

void check_horizon(const Formula& f, const Trajectory& tr) {
    double depth = time_depth(f);
    if (depth > tr.horizon)
        throw MonitorError("formula requires horizon " + std::to_string(depth) +
                           " but the trajectory ends at " + std::to_string(tr.horizon));
}

}  // namespace

RobustnessValue robustness(const Formula& f, const Trajectory& tr) {
    if (!f.valid()) throw MonitorError("empty formula");
    check_horizon(f, tr);
    Signal s = monitor_rec(f.root, tr);
    return robustness_value(s.v.front());
}

// --- reference oracle ------------------------------------------------------------
//
// Same semantics, computed the expensive way: merged grids are evaluated
// point by point through value_at, every window is rescanned from scratch,
// and running minima are recomputed per candidate. Kept free of the deque /
// sweep machinery above on purpose.

namespace {

struct OracleEval {
    const Trajectory& tr;

    Signal eval(const FormulaPtr& f) {
        switch (f->kind) {
            case FormulaKind::true_lit:
                return constant_signal(top_robustness, tr);
            case FormulaKind::atomic:
                return atomic_signal(f->signal, tr, false);
            case FormulaKind::negation: {
                Signal s = eval(f->kids[0]);
                for (auto& x : s.v) x = -x;
                return s;
            }
            case FormulaKind::conjunction:
                return combine(eval(f->kids[0]), eval(f->kids[1]), true);
            case FormulaKind::disjunction:
                return combine(eval(f->kids[0]), eval(f->kids[1]), false);
            case FormulaKind::eventually:
                return window(eval(f->kids[0]), f->lo->value, f->hi->value, true);
            case FormulaKind::always:
                return window(eval(f->kids[0]), f->lo->value, f->hi->value, false);
            case FormulaKind::until:
                return until(eval(f->kids[0]), eval(f->kids[1]), f->lo->value, f->hi->value);
        }
        throw MonitorError("corrupt formula");
    }

    static std::vector<double> merged_grid(const Signal& a, const Signal& b, double end) {
        std::vector<double> g;
        g.push_back(0.0);
        for (double t : a.t)
            if (t > 0 && t <= end) g.push_back(t);
        for (double t : b.t)
            if (t > 0 && t <= end) g.push_back(t);
        std::sort(g.begin(), g.end());
        g.erase(std::unique(g.begin(), g.end()), g.end());
        return g;
    }

    Signal combine(const Signal& a, const Signal& b, bool want_min) {
        Signal out;
        out.interp = a.interp;
        out.end = std::min(a.end, b.end);
        auto op = [&](double x, double y) { return want_min ? std::min(x, y) : std::max(x, y); };
        std::vector<double> grid = merged_grid(a, b, out.end);
        double pt = 0, pa = 0, pb = 0;
        bool first = true;
        for (double t : grid) {
            double va = a.value_at(t), vb = b.value_at(t);
            if (!first && a.interp == Interp::linear) {
                double d0 = pa - pb, d1 = va - vb;
                if ((d0 > 0 && d1 < 0) || (d0 < 0 && d1 > 0)) {
                    double w = d0 / (d0 - d1);
                    double tc = pt + w * (t - pt);
                    if (tc > pt && tc < t)
                        out.push(tc, op(pa + w * (va - pa), pb + w * (vb - pb)));
                }
            }
            out.push(t, op(va, vb));
            pt = t; pa = va; pb = vb;
            first = false;
        }
        return out;
    }

    // extremum of s over [q+a, q+b] by full scan
    double scan_window(const Signal& s, double q, double a, double b, bool want_max) const {
        double best = want_max ? -kInf : kInf;
        auto take = [&](double v) { best = want_max ? std::max(best, v) : std::min(best, v); };
        if (s.interp == Interp::step) {
            // every segment intersecting the closed window contributes its value
            for (size_t i = 0; i < s.t.size(); ++i) {
                double seg_start = s.t[i];
                double seg_end = i + 1 < s.t.size() ? s.t[i + 1] : kInf;
                if (seg_start <= q + b && seg_end > q + a) take(s.v[i]);
            }
        } else {
            take(s.value_at(q + a));
            take(s.value_at(q + b));
            for (size_t i = 0; i < s.t.size(); ++i)
                if (s.t[i] > q + a && s.t[i] < q + b) take(s.v[i]);
        }
        return best;
    }

    Signal window(const Signal& s, double a, double b, bool want_max) {
        Signal out;
        out.interp = s.interp;
        out.end = s.end - b;
        if (out.end < 0) throw MonitorError("window exceeds signal domain");
        std::vector<double> grid;
        grid.push_back(0.0);
        for (double t : s.t) {
            for (double q : {t - a, t - b})
                if (q > 0 && q <= out.end) grid.push_back(q);
        }
        std::sort(grid.begin(), grid.end());
        grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
        if (s.interp == Interp::step) {
            for (double q : grid) out.push(q, scan_window(s, q, a, b, want_max));
            return out;
        }
        // linear: values at grid points are exact; insert the vertices of
        // max(f(q+a), f(q+b), M) between neighbours so the shape is complete
        for (size_t gi = 0; gi < grid.size(); ++gi) {
            double q1 = grid[gi];
            if (gi > 0) {
                double q0 = grid[gi - 1];
                double fa0 = s.value_at(q0 + a), fa1 = s.value_at(q1 + a);
                double fb0 = s.value_at(q0 + b), fb1 = s.value_at(q1 + b);
                // breakpoints interior to the window for every q in (q0, q1)
                double M = want_max ? -kInf : kInf;
                for (double t : s.t)
                    if (t > q1 + a && t < q0 + b)
                        M = want_max ? std::max(M, s.value_at(t)) : std::min(M, s.value_at(t));
                std::vector<double> cand;
                auto cross = [&](double p0, double p1, double r0, double r1) {
                    double d0 = p0 - r0, d1 = p1 - r1;
                    if ((d0 > 0 && d1 < 0) || (d0 < 0 && d1 > 0)) {
                        double tc = q0 + (q1 - q0) * d0 / (d0 - d1);
                        if (tc > q0 && tc < q1) cand.push_back(tc);
                    }
                };
                cross(fa0, fa1, fb0, fb1);
                if (std::isfinite(M)) {
                    cross(fa0, fa1, M, M);
                    cross(fb0, fb1, M, M);
                }
                std::sort(cand.begin(), cand.end());
                for (double qc : cand) out.push(qc, scan_window(s, qc, a, b, want_max));
            }
            out.push(q1, scan_window(s, q1, a, b, want_max));
        }
        return out;
    }

    // min of s over [q, t'] by full scan
    double running_min(const Signal& s, double q, double tp) const {
        double m = std::min(s.value_at(q), s.value_at(tp));
        if (s.interp == Interp::step) {
            for (size_t i = 0; i < s.t.size(); ++i) {
                double seg_start = s.t[i];
                double seg_end = i + 1 < s.t.size() ? s.t[i + 1] : kInf;
                if (seg_start <= tp && seg_end > q) m = std::min(m, s.v[i]);
            }
        } else {
            for (size_t i = 0; i < s.t.size(); ++i)
                if (s.t[i] > q && s.t[i] < tp) m = std::min(m, s.v[i]);
        }
        return m;
    }

    double until_at(const Signal& s1, const Signal& s2, double q, double a, double b) const {
        double best = -kInf;
        if (s1.interp == Interp::step) {
            std::vector<double> cand = {q + a, q + b};
            for (double t : s1.t)
                if (t > q + a && t <= q + b) cand.push_back(t);
            for (double t : s2.t)
                if (t > q + a && t <= q + b) cand.push_back(t);
            for (double tp : cand)
                best = std::max(best, std::min(s2.value_at(tp), running_min(s1, q, tp)));
            return best;
        }
        // linear: walk merged sub-pieces of [q+a, q+b]
        std::vector<double> cuts = {q + a, q + b};
        for (double t : s1.t)
            if (t > q + a && t < q + b) cuts.push_back(t);
        for (double t : s2.t)
            if (t > q + a && t < q + b) cuts.push_back(t);
        std::sort(cuts.begin(), cuts.end());
        cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
        for (size_t i = 0; i + 1 <= cuts.size(); ++i) {
            double u = cuts[i];
            double w = i + 1 < cuts.size() ? cuts[i + 1] : u;
            double m0 = running_min(s1, q, u);
            double p0 = s1.value_at(u), p1 = s1.value_at(w);
            double r0 = s2.value_at(u), r1 = s2.value_at(w);
            double dt = w - u;
            struct Piece { double lo, hi, mlo, mhi; };
            std::vector<Piece> pieces;
            if (dt <= 0 || p1 >= p0) {
                double mc = std::min(m0, p0);
                pieces.push_back({u, w, mc, mc});
            } else if (p0 <= m0) {
                pieces.push_back({u, w, p0, p1});
            } else if (p1 >= m0) {
                pieces.push_back({u, w, m0, m0});
            } else {
                double tk = u + dt * (p0 - m0) / (p0 - p1);
                tk = std::clamp(tk, u, w);
                pieces.push_back({u, tk, m0, m0});
                pieces.push_back({tk, w, m0, p1});
            }
            auto rat = [&](double tt) { return dt == 0 ? r0 : r0 + (tt - u) / dt * (r1 - r0); };
            for (const auto& pc : pieces) {
                auto mlat = [&](double tt) {
                    return pc.hi == pc.lo ? pc.mlo
                                          : pc.mlo + (tt - pc.lo) / (pc.hi - pc.lo) * (pc.mhi - pc.mlo);
                };
                std::vector<double> pts = {pc.lo, pc.hi};
                double d0 = rat(pc.lo) - pc.mlo, d1 = rat(pc.hi) - pc.mhi;
                if ((d0 > 0 && d1 < 0) || (d0 < 0 && d1 > 0))
                    pts.push_back(pc.lo + (pc.hi - pc.lo) * d0 / (d0 - d1));
                for (double tt : pts)
                    best = std::max(best, std::min(rat(tt), mlat(tt)));
            }
        }
        return best;
    }

    Signal until(const Signal& s1, const Signal& s2, double a, double b) {
        Signal out;
        out.interp = s1.interp;
        out.end = std::min(s1.end, s2.end) - b;
        if (out.end < 0) throw MonitorError("window exceeds signal domain");
        std::vector<double> grid;
        grid.push_back(0.0);
        for (const Signal* s : {&s1, &s2})
            for (double t : s->t)
                for (double q : {t, t - a, t - b})
                    if (q > 0 && q <= out.end) grid.push_back(q);
        std::sort(grid.begin(), grid.end());
        grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
        for (double q : grid) out.push(q, until_at(s1, s2, q, a, b));
        return out;
    }
};

}  // namespace

RobustnessValue robustness_oracle(const Formula& f, const Trajectory& tr) {
    if (!f.valid()) throw MonitorError("empty formula");
    check_horizon(f, tr);
    OracleEval ev{tr};
    Signal s = ev.eval(f.root);
    return robustness_value(s.v.front());
}

}  // namespace stochrobust
