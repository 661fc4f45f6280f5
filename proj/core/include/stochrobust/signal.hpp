#pragma once

#include <vector>

#include "stochrobust/trajectory.hpp"

namespace stochrobust {

// Robustness signal over [0, end]: breakpoints (t, v) with t strictly
// increasing, t.front() == 0, held constant after the last breakpoint.
// Step signals are right-continuous (value v[i] on [t[i], t[i+1])); linear
// signals interpolate between breakpoints. All monitor operations below are
// exact on these representations (until on linear signals interpolates
// between the candidate grid points; see until_signal).
struct Signal {
    std::vector<double> t;
    std::vector<double> v;
    double end = 0.0;
    Interp interp = Interp::step;

    size_t size() const { return t.size(); }
    double value_at(double q) const;
    void push(double time, double val);  // dedupes equal times (keeps latest)
};

Signal negate(const Signal& s);
Signal pointwise_min(const Signal& a, const Signal& b);
Signal pointwise_max(const Signal& a, const Signal& b);

// z(t) = extremum of s over [t+a, t+b], domain [0, s.end - b]. Requires
// 0 <= a <= b <= s.end; a == b degenerates to shift.
Signal window_max(const Signal& s, double a, double b);
Signal window_min(const Signal& s, double a, double b);

// z(t) = s(t + a), domain [0, s.end - a].
Signal shift(const Signal& s, double a);

// Quantitative until over [a, b]:
//   z(t) = max_{t' in [t+a, t+b]} min(s2(t'), min_{t'' in [t, t']} s1(t'')).
Signal until_signal(const Signal& s1, const Signal& s2, double a, double b);

}  // namespace stochrobust
