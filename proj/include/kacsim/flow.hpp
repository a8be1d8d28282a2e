#pragma once

#include <cstddef>
#include <vector>

#include "kacsim/vec3.hpp"

namespace kacsim {

// Time-stamped velocity snapshots of one realization. Velocities are
// piecewise constant between collision events, so a snapshot taken at the
// last event time <= t is the exact state at t.
struct EmpiricalFlow {
    std::vector<double> times;                 // strictly increasing
    std::vector<std::vector<Vec3>> snapshots;  // one N-vector per time

    std::size_t n_particles() const { return snapshots.empty() ? 0 : snapshots.front().size(); }

    // Index of the snapshot at time t (within tol); throws if absent.
    std::size_t index_of_time(double t, double tol = 1e-9) const;

    const std::vector<Vec3>& at_time(double t, double tol = 1e-9) const {
        return snapshots[index_of_time(t, tol)];
    }
};

}  // namespace kacsim
