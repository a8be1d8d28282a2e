#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "kacsim/engine.hpp"
#include "kacsim/rng.hpp"
#include "kacsim/weakform.hpp"
#include "stat_helpers.hpp"

using namespace kacsim;

namespace {

constexpr double kPi = std::numbers::pi;

Kernel make_kernel(double gamma, double nu, double eps) {
    KernelSpec spec;
    spec.gamma = gamma;
    spec.nu = nu;
    spec.eps = eps;
    return Kernel(spec);
}

TestFunction drop_ring_average(TestFunction f) {
    f.ring_average = nullptr;
    return f;
}

}  // namespace

TEST_CASE("test functions: gradients match centered finite differences") {
    Rng rng(2);
    const std::vector<TestFunction> funcs = {
        test_functions::component(1), test_functions::quadratic(), test_functions::quartic(),
        test_functions::gaussian_bump(Vec3{0.5, -0.3, 1.0})};
    const double h = 1e-6;
    for (const TestFunction& f : funcs) {
        for (int it = 0; it < 100; ++it) {
            const Vec3 x = 1.5 * rng.normal3();
            const Vec3 g = f.gradient(x);
            const Vec3 fd{
                (f.value(x + Vec3{h, 0, 0}) - f.value(x - Vec3{h, 0, 0})) / (2 * h),
                (f.value(x + Vec3{0, h, 0}) - f.value(x - Vec3{0, h, 0})) / (2 * h),
                (f.value(x + Vec3{0, 0, h}) - f.value(x - Vec3{0, 0, h})) / (2 * h)};
            CHECK(norm(g - fd) <= 1e-6 * (1.0 + norm(g)));
        }
    }
}

TEST_CASE("closed-form ring averages agree with the trapezoid fallback") {
    Rng rng(9);
    const std::vector<TestFunction> funcs = {
        test_functions::constant(), test_functions::component(0), test_functions::quadratic(),
        test_functions::quartic(), test_functions::gaussian_bump(Vec3{0.4, 0.2, -0.7})};
    const Kernel kernel = make_kernel(-1.0, 0.25, 0.05);
    for (const TestFunction& f : funcs) {
        REQUIRE(f.ring_average);
        const TestFunction plain = drop_ring_average(f);
        for (int it = 0; it < 50; ++it) {
            const Vec3 v = rng.normal3();
            const Vec3 vs = rng.normal3();
            if (norm2(v - vs) == 0.0) continue;
            const double a = a_bar(f, v, vs, kernel);
            const double b = a_bar(plain, v, vs, kernel);
            CHECK(a == doctest::Approx(b).epsilon(1e-9));
        }
    }
}

TEST_CASE("a_bar on linear phi: quadrature equals the drift compensator closed form") {
    // For phi = v.e the phi-averaged jump integral reduces to the exact drift
    // b_eps alpha(|z|) (v* - v).e; the two quadrature paths (graded panels
    // here, adaptive-plus-series in b_regularized) must agree.
    Rng rng(13);
    const Kernel kernel = make_kernel(-1.0, 0.25, 0.05);
    for (int axis = 0; axis < 3; ++axis) {
        const TestFunction phi = test_functions::component(axis);
        for (int it = 0; it < 30; ++it) {
            const Vec3 v = rng.normal3();
            const Vec3 vs = rng.normal3();
            const Vec3 z = v - vs;
            if (norm2(z) == 0.0) continue;
            const double want =
                kernel.b_eps() * kernel.alpha(norm(z)) * dot(vs - v, phi.gradient(v));
            const double got = a_bar(phi, v, vs, kernel);
            CHECK(got == doctest::Approx(want).epsilon(1e-8));
        }
    }

    // same identity at eps = 0 against the unregularized b
    const Kernel bare = make_kernel(-1.0, 0.25, 0.0);
    const TestFunction phi = test_functions::component(0);
    const Vec3 v{0.9, -0.2, 0.4}, vs{-0.3, 0.6, 0.1};
    const double r = norm(v - vs);
    const double want = bare.b() * std::pow(r, -1.0) * (vs.x - v.x);
    CHECK(a_bar(phi, v, vs, bare) == doctest::Approx(want).epsilon(1e-7));
}

TEST_CASE("a_bar on |v|^2 against a stratified Monte Carlo sphere oracle") {
    const Kernel kernel = make_kernel(-1.0, 0.25, 0.0);
    const TestFunction phi = test_functions::quadratic();
    const Vec3 v{1, 0, 0}, vs{-1, 0, 0};
    const Vec3 z = v - vs;
    const double r = norm(z);
    const DeflectionFrame frame = build_frame(z);
    const Vec3 grad = phi.gradient(v);

    // MC of the compensated integrand over (theta, phi), stratified in theta;
    // batch means give the standard error.
    Rng rng(101);
    const int batches = 10;
    const std::size_t per_batch = 1'000'000;
    std::vector<double> batch_vals(batches);
    for (int bdx = 0; bdx < batches; ++bdx) {
        double acc = 0.0;
        for (std::size_t m = 0; m < per_batch; ++m) {
            const double theta =
                kPi * (static_cast<double>(m) + rng.uniform()) / static_cast<double>(per_batch);
            const double ph = 2.0 * kPi * rng.uniform();
            const Vec3 vp = post_collide(v, vs, sigma_from_angles(frame, theta, ph)).first;
            const double compensated = phi.value(vp) - phi.value(v) - dot(vp - v, grad);
            acc += compensated * std::pow(theta, -1.25);
        }
        batch_vals[static_cast<std::size_t>(bdx)] =
            acc * (kPi / static_cast<double>(per_batch)) * 2.0 * kPi;
    }
    const double jump_part = testutil::mean(batch_vals);
    const double se = testutil::sd(batch_vals) / std::sqrt(static_cast<double>(batches));
    const double mc =
        std::pow(r, -1.0) * jump_part - kernel.b() * std::pow(r, -1.0) * dot(v - vs, grad);

    const double got = a_bar(phi, v, vs, kernel);
    CHECK(std::abs(got - mc) <= 5.0 * std::pow(r, -1.0) * se + 1e-6);
}

TEST_CASE("a_bar scaling: quadratic phi scales as |z|^(2+gamma) under pair dilation") {
    const Kernel kernel = make_kernel(-1.0, 0.25, 0.0);
    const TestFunction phi = test_functions::quadratic();
    const Vec3 v{0.7, 0.1, -0.2}, vs{-0.4, 0.5, 0.3};
    const double a1 = a_bar(phi, v, vs, kernel);
    const double a2 = a_bar(phi, 2.0 * v, 2.0 * vs, kernel);
    CHECK(a2 / a1 == doctest::Approx(std::pow(2.0, 2.0 + kernel.spec().gamma)).epsilon(1e-4));
}

TEST_CASE("a_sym: collision invariants vanish at 1e-10 scaled absolute") {
    Rng rng(19);
    const std::vector<TestFunction> invariants = {
        test_functions::constant(), test_functions::component(0), test_functions::component(1),
        test_functions::component(2), test_functions::quadratic()};
    for (double gamma : {-0.5, -1.0, -1.5}) {
        const Kernel kernel = make_kernel(gamma, 0.25, 0.0);
        for (double r : {0.5, 1.0, 2.0}) {
            Vec3 dir = rng.normal3();
            dir = dir / norm(dir);
            const Vec3 v = 0.4 * rng.normal3();
            const Vec3 vs = v - r * dir;
            const double scale = std::pow(r, 2.0 + gamma);
            for (const TestFunction& phi : invariants) {
                CHECK(std::abs(a_sym(phi, v, vs, kernel)) <= 1e-10 * scale);
            }
        }
    }
}

TEST_CASE("a_sym: symmetric in its pair arguments") {
    Rng rng(29);
    const Kernel kernel = make_kernel(-1.0, 0.25, 0.05);
    const TestFunction bump = test_functions::gaussian_bump(Vec3{0.3, 0.3, 0.0});
    for (int it = 0; it < 50; ++it) {
        const Vec3 v = rng.normal3();
        const Vec3 vs = rng.normal3();
        if (norm2(v - vs) == 0.0) continue;
        const double ab = a_sym(bump, v, vs, kernel);
        const double ba = a_sym(bump, vs, v, kernel);
        CHECK(ab == doctest::Approx(ba).epsilon(1e-12));
        CHECK(a_sym(test_functions::quadratic(), v, vs, kernel) ==
              a_sym(test_functions::quadratic(), vs, v, kernel));
    }
}

TEST_CASE("a_sym: |A phi| / |z|^(2+gamma) stays bounded into the singular regime") {
    Rng rng(41);
    const Kernel kernel = make_kernel(-1.0, 0.25, 0.0);
    const TestFunction bump = test_functions::gaussian_bump(Vec3{0.0, 0.0, 0.0});
    const double cap = 4.0 * bump.hessian_bound * kernel.b();
    for (int it = 0; it < 1000; ++it) {
        const double r = std::pow(10.0, -3.0 + 4.0 * rng.uniform());  // 1e-3 .. 10
        Vec3 dir = rng.normal3();
        dir = dir / norm(dir);
        const Vec3 v = 0.5 * rng.normal3();
        const Vec3 vs = v - r * dir;
        const double ratio = std::abs(a_sym(bump, v, vs, kernel)) / std::pow(r, 2.0 + kernel.spec().gamma);
        CHECK(std::isfinite(ratio));
        CHECK(ratio <= cap);
    }
}

TEST_CASE("a_bar/a_sym: coincident pairs are zero with eps > 0 and rejected at eps = 0") {
    const Vec3 v{0.4, 0.4, 0.4};
    const Kernel reg = make_kernel(-1.0, 0.25, 0.05);
    CHECK(a_bar(test_functions::quadratic(), v, v, reg) == 0.0);
    CHECK(a_sym(test_functions::quadratic(), v, v, reg) == 0.0);
    const Kernel bare = make_kernel(-1.0, 0.25, 0.0);
    CHECK_THROWS_AS(a_bar(test_functions::quadratic(), v, v, bare), std::invalid_argument);
}

namespace {

std::vector<EmpiricalFlow> small_flows(int n, int replicas, double t_final, std::uint64_t seed,
                                       const KernelSpec& spec) {
    EngineConfig cfg;
    cfg.n_particles = n;
    cfg.kernel = spec;
    cfg.t_final = t_final;
    cfg.seed = seed;
    for (int i = 0; i <= 8; ++i) cfg.snapshot_times.push_back(t_final * i / 8.0);
    std::vector<RunResult> runs = run_replicas(cfg, replicas);
    std::vector<EmpiricalFlow> flows;
    flows.reserve(runs.size());
    for (RunResult& r : runs) flows.push_back(std::move(r.flow));
    return flows;
}

}  // namespace

TEST_CASE("weak_residual: constant phi gives exactly zero") {
    KernelSpec spec;
    spec.eps = 0.1;
    const Kernel kernel(spec);
    auto flows = small_flows(32, 1, 0.5, 7, spec);
    CHECK(weak_residual(flows[0], test_functions::constant(), kernel, 0.5) == 0.0);
}

TEST_CASE("weak_residual: phi = |v|^2 is conserved to rounding") {
    KernelSpec spec;
    spec.eps = 0.1;
    const Kernel kernel(spec);
    auto flows = small_flows(64, 1, 0.5, 11, spec);
    CHECK(std::abs(weak_residual(flows[0], test_functions::quadratic(), kernel, 0.5)) <= 1e-9);
}

TEST_CASE("weak_residual: guards") {
    KernelSpec spec;
    spec.eps = 0.1;
    const Kernel kernel(spec);
    EmpiricalFlow one;
    one.times = {0.0};
    one.snapshots = {{Vec3{1, 0, 0}, Vec3{-1, 0, 0}}};
    CHECK_THROWS_AS(weak_residual(one, test_functions::quadratic(), kernel, 0.0),
                    std::invalid_argument);

    auto flows = small_flows(32, 1, 0.5, 7, spec);
    CHECK_THROWS_AS(weak_residual(flows[0], test_functions::quadratic(), kernel, 0.5, 16),
                    std::invalid_argument);
}

TEST_CASE("martingale residual: constant phi exactly zero, |v|^2 within 3 sigma") {
    KernelSpec spec;
    spec.gamma = -1.0;
    spec.nu = 0.25;
    spec.eps = 0.1;
    const Kernel kernel(spec);
    auto flows = small_flows(64, 48, 1.0, 1234, spec);

    const ResidualReport zero =
        martingale_residual(flows, test_functions::constant(), kernel, 0.0, 1.0);
    CHECK(zero.value == 0.0);

    const ResidualReport quad =
        martingale_residual(flows, test_functions::quadratic(), kernel, 0.25, 1.0);
    CHECK(std::abs(quad.value) <= 3.0 * quad.std_error + 0.05);

    // past-measurable weight w = phi1(V_{s1}), s1 < s
    const TestFunction bump = test_functions::gaussian_bump(Vec3{0, 0, 0});
    const PastWeight w = [&](const EmpiricalFlow& flow, double) {
        return bump.value(flow.at_time(0.125)[0]);
    };
    const ResidualReport weighted =
        martingale_residual(flows, test_functions::quadratic(), kernel, 0.25, 1.0, w);
    CHECK(std::abs(weighted.value) <= 3.0 * weighted.std_error + 0.05);

    CHECK_THROWS_AS(martingale_residual(flows, test_functions::quadratic(), kernel, 1.0, 0.25),
                    std::invalid_argument);
}
