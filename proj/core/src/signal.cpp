#include "stochrobust/signal.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

namespace stochrobust {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

double Signal::value_at(double q) const {
    auto it = std::upper_bound(t.begin(), t.end(), q);
    size_t i = it == t.begin() ? 0 : static_cast<size_t>(it - t.begin()) - 1;
    if (interp == Interp::step || i + 1 >= t.size() || q <= t[i]) return v[i];
    double w = (q - t[i]) / (t[i + 1] - t[i]);
    return v[i] + w * (v[i + 1] - v[i]);
}

void Signal::push(double time, double val) {
    if (!t.empty() && t.back() == time) {
        v.back() = val;
        return;
    }
    t.push_back(time);
    v.push_back(val);
}

Signal negate(const Signal& s) {
    Signal out = s;
    for (double& x : out.v) x = -x;
    return out;
}

// --- pointwise ops -----------------------------------------------------------

namespace {

template <typename Op>
Signal pointwise(const Signal& a, const Signal& b, Op op) {
    Signal out;
    out.interp = a.interp;
    out.end = std::min(a.end, b.end);
    size_t ia = 0, ib = 0;
    // merged breakpoint sweep
    double prev_t = 0.0, prev_fa = 0.0, prev_fb = 0.0;
    bool first = true;
    auto emit = [&](double tt) {
        if (tt > out.end && !out.t.empty()) return;
        double fa = a.value_at(tt);
        double fb = b.value_at(tt);
        if (a.interp == Interp::linear && !first) {
            // insert the crossing when the order of a and b flips inside
            double d0 = prev_fa - prev_fb, d1 = fa - fb;
            if ((d0 > 0 && d1 < 0) || (d0 < 0 && d1 > 0)) {
                double w = d0 / (d0 - d1);
                double tc = prev_t + w * (tt - prev_t);
                if (tc > prev_t && tc < tt) {
                    double va = prev_fa + w * (fa - prev_fa);
                    double vb = prev_fb + w * (fb - prev_fb);
                    out.push(tc, op(va, vb));
                }
            }
        }
        out.push(tt, op(fa, fb));
        prev_t = tt;
        prev_fa = fa;
        prev_fb = fb;
        first = false;
    };
    emit(0.0);
    while (ia < a.t.size() || ib < b.t.size()) {
        double ta = ia < a.t.size() ? a.t[ia] : kInf;
        double tb = ib < b.t.size() ? b.t[ib] : kInf;
        double tt = std::min(ta, tb);
        if (ta == tt) ++ia;
        if (tb == tt) ++ib;
        if (tt > out.end) break;
        if (tt > 0.0) emit(tt);
    }
    return out;
}

}  // namespace

Signal pointwise_min(const Signal& a, const Signal& b) {
    return pointwise(a, b, [](double x, double y) { return std::min(x, y); });
}

Signal pointwise_max(const Signal& a, const Signal& b) {
    return pointwise(a, b, [](double x, double y) { return std::max(x, y); });
}

// --- shift --------------------------------------------------------------------

Signal shift(const Signal& s, double a) {
    if (a == 0.0) return s;
    if (a > s.end) throw MonitorError("shift exceeds signal domain");
    Signal out;
    out.interp = s.interp;
    out.end = s.end - a;
    out.push(0.0, s.value_at(a));
    for (size_t i = 0; i < s.t.size(); ++i)
        if (s.t[i] > a) out.push(s.t[i] - a, s.v[i]);
    return out;
}

// --- sliding-window extremum ----------------------------------------------------

namespace {

// Monotonic deque over (value, index); front holds the current max.
class MaxDeque {
public:
    void push(double val, size_t idx) {
        while (!dq_.empty() && dq_.back().first <= val) dq_.pop_back();
        dq_.emplace_back(val, idx);
    }
    void expire(size_t idx) {  // drop entries with index <= idx
        while (!dq_.empty() && dq_.front().second <= idx) dq_.pop_front();
    }
    bool empty() const { return dq_.empty(); }
    double max() const { return dq_.front().first; }

private:
    std::deque<std::pair<double, size_t>> dq_;
};

// Step case. Segment i covers [t[i], t[i+1]) (the last one closed to end);
// it intersects the closed window [q+a, q+b] for q in [t[i]-b, t[i+1]-a).
Signal window_max_step(const Signal& s, double a, double b) {
    Signal out;
    out.interp = Interp::step;
    out.end = s.end - b;
    const size_t m = s.t.size();
    MaxDeque dq;
    size_t enter = 0;  // next segment to enter
    size_t leave = 0;  // next segment to leave (only segments < m-1 ever leave)
    auto process_until = [&](double q) {
        // apply every event with time <= q
        while (true) {
            double te = enter < m ? s.t[enter] - b : kInf;
            double tl = leave + 1 < m ? s.t[leave + 1] - a : kInf;
            if (te > q && tl > q) break;
            if (te <= tl) {
                dq.push(s.v[enter], enter);
                ++enter;
            } else {
                dq.expire(leave);
                ++leave;
            }
        }
    };
    process_until(0.0);
    out.push(0.0, dq.max());
    while (true) {
        double te = enter < m ? s.t[enter] - b : kInf;
        double tl = leave + 1 < m ? s.t[leave + 1] - a : kInf;
        double q = std::min(te, tl);
        if (q > out.end) break;
        process_until(q);
        double val = dq.max();
        if (q <= 0.0) {
            out.v[0] = val;  // events collapsing at the domain start
        } else if (out.v.back() != val) {
            out.push(q, val);
        }
    }
    return out;
}

// Linear case: z(q) = max(f(q+a), f(q+b), M(q)) with M the max over
// breakpoints strictly inside the window. Between two consecutive sweep
// events the three components are two lines and a constant, so the exact
// output is their upper envelope.
Signal window_max_linear(const Signal& s, double a, double b) {
    Signal out;
    out.interp = Interp::linear;
    out.end = s.end - b;
    const size_t m = s.t.size();
    MaxDeque dq;
    size_t enter = 0, leave = 0;
    auto process_until = [&](double q) {
        while (true) {
            double te = enter < m ? s.t[enter] - b : kInf;
            double tl = leave < m ? s.t[leave] - a : kInf;
            if (te > q && tl > q) break;
            if (te <= tl) {
                dq.push(s.v[enter], enter);
                ++enter;
            } else {
                dq.expire(leave);
                ++leave;
            }
        }
    };
    process_until(0.0);
    double q0 = 0.0;
    double fa0 = s.value_at(a), fb0 = s.value_at(b);
    out.push(0.0, std::max({fa0, fb0, dq.empty() ? -kInf : dq.max()}));
    while (q0 < out.end) {
        double te = enter < m ? s.t[enter] - b : kInf;
        double tl = leave < m ? s.t[leave] - a : kInf;
        double q1 = std::min({te, tl, out.end});
        if (q1 <= q0) {
            process_until(q0);
            if (te > out.end && tl > out.end) break;
            continue;
        }
        double M = dq.empty() ? -kInf : dq.max();
        double fa1 = s.value_at(q1 + a), fb1 = s.value_at(q1 + b);
        // upper envelope of La, Lb and M over [q0, q1]
        double dt = q1 - q0;
        double cands[8];
        size_t nc = 0;
        cands[nc++] = q1;
        auto cross = [&](double p0, double p1, double r0, double r1) {
            double d0 = p0 - r0, d1 = p1 - r1;
            if ((d0 > 0 && d1 < 0) || (d0 < 0 && d1 > 0)) {
                double tc = q0 + dt * d0 / (d0 - d1);
                if (tc > q0 && tc < q1) cands[nc++] = tc;
            }
        };
        cross(fa0, fa1, fb0, fb1);
        if (std::isfinite(M)) {
            cross(fa0, fa1, M, M);
            cross(fb0, fb1, M, M);
        }
        std::sort(cands, cands + nc);
        for (size_t i = 0; i < nc; ++i) {
            double q = cands[i];
            double w = (q - q0) / dt;
            double la = fa0 + w * (fa1 - fa0);
            double lb = fb0 + w * (fb1 - fb0);
            out.push(q, std::max({la, lb, M}));
        }
        q0 = q1;
        fa0 = fa1;
        fb0 = fb1;
        process_until(q1);
    }
    return out;
}

}  // namespace

Signal window_max(const Signal& s, double a, double b) {
    if (a < 0 || b < a) throw MonitorError("invalid window");
    if (b > s.end) throw MonitorError("window exceeds signal domain");
    if (a == b) return shift(s, a);
    return s.interp == Interp::step ? window_max_step(s, a, b) : window_max_linear(s, a, b);
}

Signal window_min(const Signal& s, double a, double b) {
    return negate(window_max(negate(s), a, b));
}

// --- until ----------------------------------------------------------------------

namespace {

// max_{t' in [q, q+c]} min(s2(t'), min_{[q, t']} s1) for one q.
double until_window_step(const Signal& s1, const Signal& s2, double q, double c) {
    double best = -kInf;
    double m = kInf;  // running min of s1 over [q, t']
    size_t i1 = static_cast<size_t>(std::upper_bound(s1.t.begin(), s1.t.end(), q) - s1.t.begin());
    size_t i2 = static_cast<size_t>(std::upper_bound(s2.t.begin(), s2.t.end(), q) - s2.t.begin());
    double p = s1.value_at(q), r = s2.value_at(q);
    while (true) {
        m = std::min(m, p);
        best = std::max(best, std::min(r, m));
        double t1 = i1 < s1.t.size() ? s1.t[i1] : kInf;
        double t2 = i2 < s2.t.size() ? s2.t[i2] : kInf;
        double w = std::min(t1, t2);
        if (w > q + c) break;
        if (t1 == w) p = s1.v[i1++];
        if (t2 == w) r = s2.v[i2++];
    }
    return best;
}

double until_window_linear(const Signal& s1, const Signal& s2, double q, double c) {
    double best = -kInf;
    double m = kInf;
    size_t i1 = static_cast<size_t>(std::upper_bound(s1.t.begin(), s1.t.end(), q) - s1.t.begin());
    size_t i2 = static_cast<size_t>(std::upper_bound(s2.t.begin(), s2.t.end(), q) - s2.t.begin());
    double u = q;
    double p0 = s1.value_at(q), r0 = s2.value_at(q);
    while (true) {
        double t1 = i1 < s1.t.size() ? s1.t[i1] : kInf;
        double t2 = i2 < s2.t.size() ? s2.t[i2] : kInf;
        double w = std::min({t1, t2, q + c});
        double dt = w - u;
        double p1 = s1.value_at(w), r1 = s2.value_at(w);
        if (dt > 0) {
            auto pat = [&](double tt) { return p0 + (tt - u) / dt * (p1 - p0); };
            auto rat = [&](double tt) { return r0 + (tt - u) / dt * (r1 - r0); };
            // running-min pieces of min(m, s1) within [u, w]: linear on each
            struct Piece { double lo, hi, mlo, mhi; };
            Piece pieces[2];
            int np = 0;
            if (p1 >= p0) {  // rising: running min froze at min(m, p0)
                double mc = std::min(m, p0);
                pieces[np++] = {u, w, mc, mc};
            } else if (p0 <= m) {
                pieces[np++] = {u, w, p0, p1};
            } else if (p1 >= m) {
                pieces[np++] = {u, w, m, m};
            } else {  // kink where the falling s1 crosses the held minimum
                double tk = u + dt * (p0 - m) / (p0 - p1);
                tk = std::clamp(tk, u, w);
                pieces[np++] = {u, tk, m, m};
                pieces[np++] = {tk, w, m, p1};
            }
            for (int k = 0; k < np; ++k) {
                const Piece& pc = pieces[k];
                auto mlat = [&](double tt) {
                    return pc.hi == pc.lo
                               ? pc.mlo
                               : pc.mlo + (tt - pc.lo) / (pc.hi - pc.lo) * (pc.mhi - pc.mlo);
                };
                double cands[3] = {pc.lo, pc.hi, pc.hi};
                double d0 = rat(pc.lo) - pc.mlo, d1 = rat(pc.hi) - pc.mhi;
                if ((d0 > 0 && d1 < 0) || (d0 < 0 && d1 > 0))
                    cands[2] = pc.lo + (pc.hi - pc.lo) * d0 / (d0 - d1);
                for (double tt : cands)
                    best = std::max(best, std::min(rat(tt), mlat(tt)));
            }
            m = std::min(m, std::min(p0, p1));
        } else {
            m = std::min(m, p0);
            best = std::max(best, std::min(r0, m));
        }
        if (w >= q + c) break;
        u = w;
        p0 = p1;
        r0 = r1;
        if (t1 == w) ++i1;
        if (t2 == w) ++i2;
    }
    return best;
}

double until_window_value(const Signal& s1, const Signal& s2, double q, double c) {
    return s1.interp == Interp::step ? until_window_step(s1, s2, q, c)
                                     : until_window_linear(s1, s2, q, c);
}

// U[0,c] as a signal, evaluated on the union of both input grids and their
// -c shifts.
Signal until0(const Signal& s1, const Signal& s2, double c) {
    Signal out;
    out.interp = s1.interp;
    out.end = std::min(s1.end, s2.end) - c;
    std::vector<double> grid;
    grid.push_back(0.0);
    for (double tt : s1.t) {
        if (tt > 0 && tt <= out.end) grid.push_back(tt);
        if (tt - c > 0 && tt - c <= out.end) grid.push_back(tt - c);
    }
    for (double tt : s2.t) {
        if (tt > 0 && tt <= out.end) grid.push_back(tt);
        if (tt - c > 0 && tt - c <= out.end) grid.push_back(tt - c);
    }
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    for (double q : grid) out.push(q, until_window_value(s1, s2, q, c));
    return out;
}

}  // namespace

Signal until_signal(const Signal& s1, const Signal& s2, double a, double b) {
    if (a < 0 || b <= a) throw MonitorError("invalid until interval");
    double E = std::min(s1.end, s2.end);
    if (b > E) throw MonitorError("window exceeds signal domain");
    Signal core = until0(s1, s2, b - a);
    Signal right = a > 0 ? shift(core, a) : std::move(core);
    // min over [t, t+a] of s1, folded in so the held prefix is honored
    Signal left = a > 0 ? window_min(s1, 0.0, a) : s1;
    return pointwise_min(left, right);
}

}  // namespace stochrobust
