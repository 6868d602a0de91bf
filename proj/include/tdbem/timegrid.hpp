#pragma once

#include "tdbem/geometry.hpp"

#include <cmath>
#include <stdexcept>

namespace tdbem {

/// Uniform time grid t_n = n*dt, n = 0..n_steps (units with c=1).
struct TimeGrid {
    double dt = 0.0;
    int n_steps = 0;

    TimeGrid() = default;
    TimeGrid(double dt_, int n_steps_) : dt(dt_), n_steps(n_steps_) {
        if (dt <= 0) throw std::invalid_argument("dt must be positive");
        if (n_steps < 0) throw std::invalid_argument("n_steps must be >= 0");
    }
    static TimeGrid from_horizon(double dt_, double T) {
        return TimeGrid(dt_, int(std::lround(T / dt_)));
    }

    double time(int n) const { return n * dt; }
    double horizon() const { return n_steps * dt; }
};

enum class TemporalBasis {
    PiecewiseConstant,   // gamma^n, indicator of [t_{n-1}, t_n)
    PiecewiseLinearHat,  // beta^n, hat at t_n, vanishing at t=0
};

/// dt / h_min^beta, the grading-aware CFL-type diagnostic.
double cfl_ratio(const TimeGrid& grid, const Mesh& mesh);

/// ceil(diam(Gamma)/dt); lag matrices vanish beyond this index.
int lag_cutoff(const TimeGrid& grid, const Mesh& mesh);

}  // namespace tdbem
