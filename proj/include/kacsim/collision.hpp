#pragma once

#include <cmath>
#include <stdexcept>
#include <utility>

#include "kacsim/vec3.hpp"

namespace kacsim {

// Right-handed orthonormal triad (axis, e1, e2) with axis pointing along the
// relative velocity. Deflection directions are parametrized in this frame.
struct DeflectionFrame {
    Vec3 axis;
    Vec3 e1;
    Vec3 e2;
};

// Post-collision pair for scattering direction sigma (|sigma| = 1):
//   v'  = (v+v*)/2 + |v-v*| sigma / 2
//   v'* = (v+v*)/2 - |v-v*| sigma / 2
// Momentum is conserved exactly as written; kinetic energy is conserved
// because |sigma| = 1. v == v_star is legal and returns the pair unchanged.
inline std::pair<Vec3, Vec3> post_collide(const Vec3& v, const Vec3& v_star, const Vec3& sigma) {
    const Vec3 center = 0.5 * (v + v_star);
    const Vec3 half_jump = 0.5 * norm(v - v_star) * sigma;
    return {center + half_jump, center - half_jump};
}

// Deterministic frame for a nonzero direction z. The in-plane basis is seeded
// from the coordinate axis with the smallest |component| of z/|z| (ties break
// toward x before y before z), so equal inputs always yield equal frames and
// the frame depends only on the direction of z, not its length.
inline DeflectionFrame build_frame(const Vec3& z) {
    const double n2 = norm2(z);
    if (!(n2 > 0.0)) throw std::invalid_argument("build_frame: zero direction");
    const Vec3 axis = z / std::sqrt(n2);

    const double ax = std::abs(axis.x), ay = std::abs(axis.y), az = std::abs(axis.z);
    Vec3 seed{1.0, 0.0, 0.0};
    if (ay < ax || az < ax) seed = (ay <= az) ? Vec3{0.0, 1.0, 0.0} : Vec3{0.0, 0.0, 1.0};

    Vec3 e1 = seed - dot(seed, axis) * axis;
    e1 = e1 / norm(e1);
    const Vec3 e2 = cross(axis, e1);
    return {axis, e1, e2};
}

// sigma = axis cos(theta) + (e1 cos(phi) + e2 sin(phi)) sin(theta), so that
// acos(sigma . axis) recovers theta.
inline Vec3 sigma_from_angles(const DeflectionFrame& f, double theta, double phi) {
    const double st = std::sin(theta);
    return std::cos(theta) * f.axis + (st * std::cos(phi)) * f.e1 + (st * std::sin(phi)) * f.e2;
}

// Exact per-collision displacement |v' - v| = |v'* - v*| = sin(theta/2)|v - v*|.
inline double deflection_distance(const Vec3& v, const Vec3& v_star, double theta) {
    return std::sin(0.5 * theta) * norm(v - v_star);
}

}  // namespace kacsim
