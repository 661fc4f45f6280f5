#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "stochrobust/model.hpp"
#include "stochrobust/rng.hpp"
#include "stochrobust/trajectory.hpp"

namespace stochrobust {

struct SimConfig {
    double t_end = 0.0;
    double rk4_step = 1.0;  // PDMP integrator step
    int jobs = 0;            // 0 = hardware concurrency
};

// Gillespie direct method. Records the state after every event; absorbing
// states hold until t_end.
Trajectory ssa_simulate(const ReactionNetwork& net, double t_end, RngStream rng);

// Fixed-step RK4 on the mode flows with the total hazard integrated alongside;
// a jump fires when the integral crosses a standard-exponential draw (crossing
// bracketed by linear interpolation, then bisected to 1e-6 of the step).
// Output is sampled on the step grid plus jump instants, linear interpolation.
Trajectory pdmp_simulate(const HybridModel& m, double t_end, RngStream rng, double step);

Trajectory simulate(const Model& m, const SimConfig& cfg, RngStream rng);

// Run i of n uses RngStream(master_seed, i); identical results for any worker
// count. The callback receives runs in arbitrary order from worker threads and
// must be safe for concurrent invocations on distinct run indices.
void for_each_run(const Model& m, const SimConfig& cfg, int n, uint64_t master_seed,
                  const std::function<void(int, Trajectory&&)>& fn);

std::vector<Trajectory> sample_ensemble(const Model& m, const SimConfig& cfg, int n,
                                        uint64_t master_seed);

}  // namespace stochrobust
