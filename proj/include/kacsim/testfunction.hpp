#pragma once

#include <functional>
#include <string>

#include "kacsim/collision.hpp"
#include "kacsim/vec3.hpp"

namespace kacsim {

// Smooth test function with value and gradient evaluators. hessian_bound is
// the sup norm of the second derivative matrix (informational; bound checks
// scale by it).
//
// ring_average, when present, returns the average of value over the circle
//   { c + s (cos a * e1 + sin a * e2) : a in [0, 2pi) }
// in closed form. The weak-operator quadrature spends nearly all of its time
// in these averages, so the stock functions provide them analytically; a
// trapezoid fallback handles anything else.
struct TestFunction {
    std::string name;
    std::function<double(const Vec3&)> value;
    std::function<Vec3(const Vec3&)> gradient;
    double hessian_bound = 0.0;
    std::function<double(const Vec3& c, double s, const DeflectionFrame&)> ring_average;
};

namespace test_functions {

TestFunction constant();
TestFunction component(int axis);  // v[axis]
TestFunction quadratic();          // |v|^2
TestFunction quartic();            // |v|^4 (not bounded; moment benchmarks only)
TestFunction gaussian_bump(const Vec3& center, double width = 1.0);  // exp(-|v-c|^2/w^2)

}  // namespace test_functions

}  // namespace kacsim
