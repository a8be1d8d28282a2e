#include "kacsim/testfunction.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace kacsim {
namespace test_functions {

namespace {
constexpr double kPi = std::numbers::pi;

// exp(shift) * I0(kappa) without overflow: switches to the uniform asymptotic
// expansion of I0 once exp(kappa) would dominate the scale.
double exp_bessel_i0(double shift, double kappa) {
    if (kappa < 600.0) return std::exp(shift) * std::cyl_bessel_i(0.0, kappa);
    const double inv = 1.0 / kappa;
    const double series = 1.0 + inv * (0.125 + inv * (0.0703125 + inv * 0.0732421875));
    return std::exp(shift + kappa) / std::sqrt(2.0 * kPi * kappa) * series;
}
}  // namespace

TestFunction constant() {
    TestFunction f;
    f.name = "const";
    f.value = [](const Vec3&) { return 1.0; };
    f.gradient = [](const Vec3&) { return Vec3{}; };
    f.hessian_bound = 0.0;
    f.ring_average = [](const Vec3&, double, const DeflectionFrame&) { return 1.0; };
    return f;
}

TestFunction component(int axis) {
    if (axis < 0 || axis > 2) throw std::invalid_argument("component: axis must be 0, 1 or 2");
    TestFunction f;
    f.name = "v" + std::to_string(axis);
    auto pick = [axis](const Vec3& v) { return axis == 0 ? v.x : (axis == 1 ? v.y : v.z); };
    f.value = pick;
    f.gradient = [axis](const Vec3&) {
        Vec3 g{};
        (axis == 0 ? g.x : (axis == 1 ? g.y : g.z)) = 1.0;
        return g;
    };
    f.hessian_bound = 0.0;
    f.ring_average = [pick](const Vec3& c, double, const DeflectionFrame&) { return pick(c); };
    return f;
}

TestFunction quadratic() {
    TestFunction f;
    f.name = "v2";
    f.value = [](const Vec3& v) { return norm2(v); };
    f.gradient = [](const Vec3& v) { return 2.0 * v; };
    f.hessian_bound = 2.0;
    f.ring_average = [](const Vec3& c, double s, const DeflectionFrame&) {
        return norm2(c) + s * s;
    };
    return f;
}

TestFunction quartic() {
    TestFunction f;
    f.name = "v4";
    f.value = [](const Vec3& v) {
        const double r2 = norm2(v);
        return r2 * r2;
    };
    f.gradient = [](const Vec3& v) { return (4.0 * norm2(v)) * v; };
    f.hessian_bound = 0.0;  // unbounded on R^3
    f.ring_average = [](const Vec3& c, double s, const DeflectionFrame& fr) {
        // avg |c + s u|^4 = (|c|^2 + s^2)^2 + 2 s^2 |c_perp|^2
        const double base = norm2(c) + s * s;
        const double cperp2 = dot(c, fr.e1) * dot(c, fr.e1) + dot(c, fr.e2) * dot(c, fr.e2);
        return base * base + 2.0 * s * s * cperp2;
    };
    return f;
}

TestFunction gaussian_bump(const Vec3& center, double width) {
    if (!(width > 0.0)) throw std::invalid_argument("gaussian_bump: width must be positive");
    TestFunction f;
    f.name = "bump";
    const double inv_w2 = 1.0 / (width * width);
    f.value = [center, inv_w2](const Vec3& v) { return std::exp(-norm2(v - center) * inv_w2); };
    f.gradient = [center, inv_w2](const Vec3& v) {
        return (-2.0 * inv_w2 * std::exp(-norm2(v - center) * inv_w2)) * (v - center);
    };
    f.hessian_bound = 2.0 * inv_w2;
    f.ring_average = [center, inv_w2](const Vec3& c, double s, const DeflectionFrame& fr) {
        // avg exp(-|c + s u - a|^2/w^2) = exp(-(|q|^2+s^2)/w^2) I0(2 s |q_perp|/w^2)
        const Vec3 q = c - center;
        const double qperp = std::hypot(dot(q, fr.e1), dot(q, fr.e2));
        const double kappa = 2.0 * s * qperp * inv_w2;
        return exp_bessel_i0(-(norm2(q) + s * s) * inv_w2, kappa);
    };
    return f;
}

}  // namespace test_functions
}  // namespace kacsim
