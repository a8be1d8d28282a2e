#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "kacsim/collision.hpp"
#include "kacsim/rng.hpp"

using namespace kacsim;

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kEps = std::numeric_limits<double>::epsilon();

Vec3 random_vec(Rng& rng, double scale) { return scale * rng.normal3(); }
}  // namespace

TEST_CASE("post_collide: head-on pair deflected to the y axis") {
    const Vec3 v{1, 0, 0}, vs{-1, 0, 0}, sigma{0, 1, 0};
    const auto [vp, vq] = post_collide(v, vs, sigma);
    CHECK(vp == Vec3{0, 1, 0});
    CHECK(vq == Vec3{0, -1, 0});
    CHECK(norm2(vp) + norm2(vq) == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("post_collide: sigma along z is the identity, antipodal swaps") {
    Rng rng(42);
    for (int it = 0; it < 100; ++it) {
        const Vec3 v = random_vec(rng, 2.0);
        const Vec3 vs = random_vec(rng, 2.0);
        const Vec3 z = v - vs;
        if (norm2(z) == 0.0) continue;
        const Vec3 sigma = z / norm(z);

        const auto [vp, vq] = post_collide(v, vs, sigma);
        CHECK(norm(vp - v) <= 1e-14 * (1.0 + norm(v)));
        CHECK(norm(vq - vs) <= 1e-14 * (1.0 + norm(vs)));

        const auto [wp, wq] = post_collide(v, vs, -1.0 * sigma);
        CHECK(norm(wp - vs) <= 1e-14 * (1.0 + norm(vs)));
        CHECK(norm(wq - v) <= 1e-14 * (1.0 + norm(v)));
    }
}

TEST_CASE("post_collide: coincident velocities are a fixed point") {
    const Vec3 v{0.3, -1.2, 0.7};
    const auto [vp, vq] = post_collide(v, v, Vec3{0, 0, 1});
    CHECK(vp == v);
    CHECK(vq == v);
}

TEST_CASE("conservation per collision: momentum to 4 ulp, energy to 1e-12") {
    Rng rng(7);
    for (int it = 0; it < 2000; ++it) {
        const Vec3 v = random_vec(rng, 3.0);
        const Vec3 vs = random_vec(rng, 3.0);
        const Vec3 z = v - vs;
        if (norm2(z) == 0.0) continue;
        const double theta = kPi * rng.uniform();
        const double phi = 2.0 * kPi * rng.uniform();
        const Vec3 sigma = sigma_from_angles(build_frame(z), theta, phi);
        const auto [vp, vq] = post_collide(v, vs, sigma);

        const Vec3 before = v + vs;
        const Vec3 after = vp + vq;
        CHECK(std::abs(after.x - before.x) <= 4.0 * kEps * (std::abs(vp.x) + std::abs(vq.x)) + 1e-300);
        CHECK(std::abs(after.y - before.y) <= 4.0 * kEps * (std::abs(vp.y) + std::abs(vq.y)) + 1e-300);
        CHECK(std::abs(after.z - before.z) <= 4.0 * kEps * (std::abs(vp.z) + std::abs(vq.z)) + 1e-300);

        const double e_before = norm2(v) + norm2(vs);
        const double e_after = norm2(vp) + norm2(vq);
        CHECK(std::abs(e_after - e_before) <= 1e-12 * e_before);

        // displacement bound |v'-v| + |v'*-v*| <= theta |v-v*|
        CHECK(norm(vp - v) + norm(vq - vs) <= theta * norm(z) + 1e-12);

        // |v'-v| equals the closed-form deflection distance
        CHECK(norm(vp - v) ==
              doctest::Approx(deflection_distance(v, vs, theta)).epsilon(1e-12));
    }
}

TEST_CASE("build_frame: fixed output for the z axis, scale invariance, rejection") {
    const DeflectionFrame f = build_frame(Vec3{0, 0, 2});
    CHECK(f.axis == Vec3{0, 0, 1});
    CHECK(f.e1 == Vec3{1, 0, 0});
    CHECK(f.e2 == Vec3{0, 1, 0});

    Rng rng(3);
    for (int it = 0; it < 500; ++it) {
        const Vec3 z = random_vec(rng, 1.5);
        if (norm2(z) == 0.0) continue;
        const DeflectionFrame a = build_frame(z);
        const DeflectionFrame b = build_frame(2.0 * z);
        CHECK(a.axis == b.axis);
        CHECK(a.e1 == b.e1);
        CHECK(a.e2 == b.e2);

        // orthonormality within 1e-12
        CHECK(std::abs(norm(a.axis) - 1.0) <= 1e-12);
        CHECK(std::abs(norm(a.e1) - 1.0) <= 1e-12);
        CHECK(std::abs(norm(a.e2) - 1.0) <= 1e-12);
        CHECK(std::abs(dot(a.axis, a.e1)) <= 1e-12);
        CHECK(std::abs(dot(a.axis, a.e2)) <= 1e-12);
        CHECK(std::abs(dot(a.e1, a.e2)) <= 1e-12);
        // right-handed
        CHECK(norm(cross(a.e1, a.e2) - a.axis) <= 1e-12);
    }

    CHECK_THROWS_AS(build_frame(Vec3{0, 0, 0}), std::invalid_argument);
}

TEST_CASE("sigma_from_angles: basis cases and angle recovery") {
    const DeflectionFrame f = build_frame(Vec3{0.3, -0.4, 1.1});
    CHECK(norm(sigma_from_angles(f, 0.0, 1.234) - f.axis) <= 1e-15);
    CHECK(norm(sigma_from_angles(f, 0.5 * kPi, 0.0) - f.e1) <= 1e-15);

    Rng rng(11);
    for (int it = 0; it < 10000; ++it) {
        const Vec3 z = random_vec(rng, 1.0);
        if (norm2(z) == 0.0) continue;
        const DeflectionFrame frame = build_frame(z);
        const double theta = kPi * rng.uniform();
        const double phi = 2.0 * kPi * rng.uniform();
        const Vec3 sigma = sigma_from_angles(frame, theta, phi);
        CHECK(std::abs(norm(sigma) - 1.0) <= 1e-13);
        const double rec = std::acos(std::clamp(dot(sigma, frame.axis), -1.0, 1.0));
        CHECK(std::abs(rec - theta) <= 1e-10);
    }
}

TEST_CASE("deflection_distance endpoints") {
    const Vec3 v{1, 0, 0}, vs{-1, 0, 0};
    CHECK(deflection_distance(v, vs, kPi) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(deflection_distance(v, vs, 0.0) == 0.0);
}
