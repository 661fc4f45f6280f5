#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stochrobust/errors.hpp"

namespace stochrobust {

enum class Interp { step, linear };

// Timestamped multi-variable signal. `times` is strictly increasing and starts
// at 0; the signal is defined up to `horizon` by holding the last row. Step
// trajectories come from SSA (integer counts), linear ones from the PDMP
// integrator.
struct Trajectory {
    std::vector<std::string> variables;
    std::vector<double> times;
    std::vector<double> values;  // row-major, times.size() x variables.size()
    Interp interp = Interp::step;
    double horizon = 0.0;
    std::vector<double> event_times;  // PDMP jump instants (diagnostics)

    size_t rows() const { return times.size(); }
    size_t cols() const { return variables.size(); }
    double value(size_t row, size_t col) const { return values[row * cols() + col]; }
    std::span<const double> row(size_t r) const { return {values.data() + r * cols(), cols()}; }

    std::optional<uint32_t> column(std::string_view name) const;

    // Value of one variable at time t (step hold or linear interpolation,
    // constant extension past the last sample).
    double value_at(double t, uint32_t col) const;

    void append(double t, std::span<const double> row);
};

// CSV with header "t,<var1>,<var2>,..." one row per sample point.
std::string trajectory_to_csv(const Trajectory& tr);
Trajectory trajectory_from_csv(std::string_view csv, Interp interp, double horizon);

}  // namespace stochrobust
