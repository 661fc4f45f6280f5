#include "stochrobust/sim.hpp"

#include <atomic>
#include <cmath>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace stochrobust {

Trajectory ssa_simulate(const ReactionNetwork& net, double t_end, RngStream rng) {
    if (!(t_end > 0)) throw std::invalid_argument("t_end must be positive");
    Trajectory tr;
    tr.variables = net.variable_names();
    tr.interp = Interp::step;
    tr.horizon = t_end;
    std::vector<double> state = net.initial_state();
    const size_t m = net.reactions.size();
    std::vector<double> prop(m);
    tr.times.reserve(1024);
    tr.values.reserve(1024 * state.size());
    tr.append(0.0, state);
    double t = 0.0;
    while (true) {
        double a0 = 0.0;
        for (size_t j = 0; j < m; ++j) {
            prop[j] = net.propensity(j, state);
            a0 += prop[j];
        }
        if (a0 <= 0.0) break;  // absorbing
        double tn = t + rng.exponential(a0);
        if (tn > t_end) break;
        double u = rng.uniform() * a0;
        size_t j = 0;
        double acc = prop[0];
        while (j + 1 < m && u >= acc) acc += prop[++j];
        for (auto [i, d] : net.reactions[j].update) state[i] += d;
        if (tn == tr.times.back()) {
            // simultaneous events at fp resolution merge into one row
            std::copy(state.begin(), state.end(),
                      tr.values.end() - static_cast<ptrdiff_t>(state.size()));
        } else {
            tr.append(tn, state);
        }
        t = tn;
    }
    return tr;
}

namespace {

struct Rk4Scratch {
    std::vector<double> k1, k2, k3, k4, tmp, xout;
    explicit Rk4Scratch(size_t n) : k1(n), k2(n), k3(n), k4(n), tmp(n), xout(n) {}
};

double total_hazard(const HybridModel& m, std::span<const double> x, std::span<const double> g) {
    double s = 0.0;
    for (size_t k = 0; k < m.jumps.size(); ++k) s += m.hazard(k, x, g);
    return s;
}

// One RK4 step of size h for the flow, with the total hazard integrated along
// the same stages. Writes the end state to sc.xout and returns the hazard
// increment.
double rk4_step(const HybridModel& m, std::span<const double> x, std::span<const double> g,
                double h, Rk4Scratch& sc) {
    const size_t n = x.size();
    m.eval_flows(x, g, sc.k1);
    double h1 = total_hazard(m, x, g);
    for (size_t i = 0; i < n; ++i) sc.tmp[i] = x[i] + 0.5 * h * sc.k1[i];
    m.eval_flows(sc.tmp, g, sc.k2);
    double h2 = total_hazard(m, sc.tmp, g);
    for (size_t i = 0; i < n; ++i) sc.tmp[i] = x[i] + 0.5 * h * sc.k2[i];
    m.eval_flows(sc.tmp, g, sc.k3);
    double h3 = total_hazard(m, sc.tmp, g);
    for (size_t i = 0; i < n; ++i) sc.tmp[i] = x[i] + h * sc.k3[i];
    m.eval_flows(sc.tmp, g, sc.k4);
    double h4 = total_hazard(m, sc.tmp, g);
    for (size_t i = 0; i < n; ++i)
        sc.xout[i] = x[i] + h / 6.0 * (sc.k1[i] + 2 * sc.k2[i] + 2 * sc.k3[i] + sc.k4[i]);
    return h / 6.0 * (h1 + 2 * h2 + 2 * h3 + h4);
}

}  // namespace

Trajectory pdmp_simulate(const HybridModel& m, double t_end, RngStream rng, double step) {
    if (!(t_end > 0)) throw std::invalid_argument("t_end must be positive");
    if (!(step > 0)) throw std::invalid_argument("step must be positive");
    if (step > t_end) throw std::invalid_argument("step exceeds t_end");

    Trajectory tr;
    tr.variables = m.variable_names();
    tr.interp = Interp::linear;
    tr.horizon = t_end;

    std::vector<double> x = m.initial_continuous();
    std::vector<double> g = m.initial_discrete();
    Rk4Scratch sc(x.size());
    tr.times.reserve(static_cast<size_t>(t_end / step) + 16);
    tr.values.reserve((static_cast<size_t>(t_end / step) + 16) * x.size());
    tr.append(0.0, x);

    double t = 0.0;
    double lam = 0.0;                      // hazard integral since the last jump
    double xi = rng.exponential(1.0);      // next crossing level
    for (uint64_t k = 1;; ++k) {
        double target = static_cast<double>(k) * step;
        if (target >= t_end || t_end - target < 1e-9 * step) target = t_end;
        while (t < target) {
            double h = target - t;
            double dlam = rk4_step(m, x, g, h, sc);
            if (lam + dlam >= xi && dlam > 0.0) {
                // bracket the crossing: linear interpolation, then bisection
                double lo = 0.0, hi = h;
                double guess = h * (xi - lam) / dlam;
                if (guess > 0.0 && guess < h) {
                    double dl = rk4_step(m, x, g, guess, sc);
                    if (lam + dl >= xi) hi = guess;
                    else lo = guess;
                }
                while (hi - lo > 1e-6 * h) {
                    double mid = 0.5 * (lo + hi);
                    double dl = rk4_step(m, x, g, mid, sc);
                    if (lam + dl >= xi) hi = mid;
                    else lo = mid;
                }
                rk4_step(m, x, g, hi, sc);
                x = sc.xout;
                t += hi;
                if (t != tr.times.back()) tr.append(t, x);
                tr.event_times.push_back(t);
                // fire one jump chosen by instantaneous hazards
                double tot = total_hazard(m, x, g);
                double u = rng.uniform() * tot;
                double acc = 0.0;
                size_t chosen = m.jumps.size() - 1;
                for (size_t j = 0; j < m.jumps.size(); ++j) {
                    acc += m.hazard(j, x, g);
                    if (u < acc) { chosen = j; break; }
                }
                for (auto [d, l] : m.jumps[chosen].resets) g[d] = l;
                lam = 0.0;
                xi = rng.exponential(1.0);
                continue;
            }
            lam += dlam;
            x = sc.xout;
            t = target;
        }
        if (t != tr.times.back()) tr.append(t, x);
        if (target >= t_end) break;
    }
    return tr;
}

Trajectory simulate(const Model& m, const SimConfig& cfg, RngStream rng) {
    if (const auto* net = std::get_if<ReactionNetwork>(&m))
        return ssa_simulate(*net, cfg.t_end, rng);
    return pdmp_simulate(std::get<HybridModel>(m), cfg.t_end, rng, cfg.rk4_step);
}

void for_each_run(const Model& m, const SimConfig& cfg, int n, uint64_t master_seed,
                  const std::function<void(int, Trajectory&&)>& fn) {
    if (n < 1) throw std::invalid_argument("run count must be >= 1");
    int jobs = cfg.jobs > 0 ? cfg.jobs
                            : static_cast<int>(std::thread::hardware_concurrency());
    jobs = std::max(1, std::min(jobs, n));
    if (jobs == 1) {
        for (int i = 0; i < n; ++i) fn(i, simulate(m, cfg, RngStream(master_seed, i)));
        return;
    }
    std::atomic<int> next{0};
    std::atomic<bool> failed{false};
    std::string error_msg;
    std::mutex error_mutex;
    auto worker = [&]() {
        while (!failed.load(std::memory_order_relaxed)) {
            int i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i, simulate(m, cfg, RngStream(master_seed, i)));
            } catch (const std::exception& e) {
                std::scoped_lock lk(error_mutex);
                if (error_msg.empty())
                    error_msg = "run " + std::to_string(i) + ": " + e.what();
                failed.store(true);
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (int w = 0; w < jobs; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (!error_msg.empty()) throw Error(error_msg);
}

std::vector<Trajectory> sample_ensemble(const Model& m, const SimConfig& cfg, int n,
                                        uint64_t master_seed) {
    std::vector<Trajectory> out(n);
    for_each_run(m, cfg, n, master_seed,
                 [&](int i, Trajectory&& tr) { out[i] = std::move(tr); });
    return out;
}

}  // namespace stochrobust
