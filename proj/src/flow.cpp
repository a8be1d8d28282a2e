#include "kacsim/flow.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace kacsim {

std::size_t EmpiricalFlow::index_of_time(double t, double tol) const {
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (std::abs(times[i] - t) <= tol) return i;
    }
    throw std::invalid_argument("flow: no snapshot at t = " + std::to_string(t));
}

}  // namespace kacsim
