#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "kacsim/collision.hpp"
#include "kacsim/engine.hpp"
#include "stat_helpers.hpp"

using namespace kacsim;

namespace {

EngineConfig base_config() {
    EngineConfig cfg;
    cfg.n_particles = 128;
    cfg.kernel.gamma = -1.0;
    cfg.kernel.nu = 0.25;
    cfg.kernel.eps = 0.1;
    cfg.t_final = 1.0;
    cfg.seed = 7;
    return cfg;
}

bool flows_equal(const EmpiricalFlow& a, const EmpiricalFlow& b) {
    if (a.times != b.times || a.snapshots.size() != b.snapshots.size()) return false;
    for (std::size_t i = 0; i < a.snapshots.size(); ++i)
        if (a.snapshots[i] != b.snapshots[i]) return false;
    return true;
}

}  // namespace

TEST_CASE("config validation") {
    EngineConfig cfg = base_config();
    cfg.n_particles = 1;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = base_config();
    cfg.kernel.eps = 0.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = base_config();
    cfg.snapshot_times = {0.0, 2.0};  // beyond t_final
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = base_config();
    cfg.snapshot_times = {0.5, 0.5};
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("normalized initial conditions: mean 0 and m2 = 3 exactly") {
    Rng rng(5);
    for (auto kind : {InitialCondition::Kind::standard_gaussian, InitialCondition::Kind::two_bump,
                      InitialCondition::Kind::isotropic_mixture}) {
        InitialCondition init;
        init.kind = kind;
        const std::vector<Vec3> v = draw_initial(init, 4096, rng);
        Vec3 mean{};
        double m2 = 0.0;
        for (const Vec3& u : v) {
            mean += u;
            m2 += norm2(u);
        }
        mean = mean / 4096.0;
        m2 /= 4096.0;
        CHECK(norm(mean) <= 1e-13);
        CHECK(m2 == doctest::Approx(3.0).epsilon(1e-13));
    }
}

TEST_CASE("two-bump initial condition is bimodal along x") {
    Rng rng(6);
    InitialCondition init;
    init.kind = InitialCondition::Kind::two_bump;
    init.separation = 4.0;
    const std::vector<Vec3> v = draw_initial(init, 8192, rng);
    int left = 0, right = 0, core = 0;
    for (const Vec3& u : v) {
        if (u.x > 0.5) ++right;
        if (u.x < -0.5) ++left;
        if (std::abs(u.x) < 0.1) ++core;
    }
    CHECK(left > 2000);
    CHECK(right > 2000);
    CHECK(core < 600);  // trough between the bumps
}

TEST_CASE("total_proposal_rate: formula cases") {
    // gamma = 0 with a flat angular density of mass m gives Lambda = N m / 2.
    EngineConfig cfg = base_config();
    cfg.kernel.gamma = 0.0;
    cfg.kernel.beta_form = BetaForm::cutoff_uniform;
    cfg.kernel.beta_const = 0.25;
    cfg.kernel.eps = 1.0;  // cap inactive: 1/eps = 1 >= beta_const
    const double mass = angular_mass_regularized(cfg.kernel);
    CHECK(total_proposal_rate(cfg) ==
          doctest::Approx(0.5 * cfg.n_particles * mass).epsilon(1e-12));

    // doubling N doubles Lambda
    EngineConfig big = cfg;
    big.n_particles *= 2;
    CHECK(total_proposal_rate(big) == doctest::Approx(2.0 * total_proposal_rate(cfg)).epsilon(1e-12));

    // N=2 ordered-pair intensity: Lambda = eps^gamma * angular_mass
    EngineConfig two = base_config();
    two.n_particles = 2;
    const Kernel kernel(two.kernel);
    CHECK(total_proposal_rate(two) ==
          doctest::Approx(kernel.alpha_sup() * kernel.angular_mass_eps()).epsilon(1e-12));
}

TEST_CASE("t_final = 0 yields the initial snapshot only") {
    EngineConfig cfg = base_config();
    cfg.t_final = 0.0;
    cfg.snapshot_times = {0.0};
    const RunResult r = run(cfg);
    REQUIRE(r.flow.times.size() == 1);
    CHECK(r.flow.times[0] == 0.0);
    CHECK(r.n_collisions == 0);
    CHECK(r.audit[0].energy_err == 0.0);
}

TEST_CASE("determinism: same seed, same bytes; replicas reproducible in isolation") {
    EngineConfig cfg = base_config();
    cfg.snapshot_times = {0.0, 0.5, 1.0};
    const RunResult a = run(cfg);
    const RunResult b = run(cfg);
    CHECK(flows_equal(a.flow, b.flow));
    CHECK(a.n_proposals == b.n_proposals);

    const std::vector<RunResult> reps = run_replicas(cfg, 3);
    EngineConfig solo = cfg;
    solo.seed = derive_seed(cfg.seed, 1);
    CHECK(flows_equal(run(solo).flow, reps[1].flow));
}

TEST_CASE("conservation along a run with ~1e5 collisions") {
    EngineConfig cfg = base_config();
    cfg.n_particles = 512;
    cfg.kernel.eps = 0.2;  // higher acceptance, more collisions per proposal
    cfg.t_final = 4.0;
    cfg.snapshot_times = {0.0, 1.0, 2.0, 3.0, 4.0};
    const RunResult r = run(cfg);
    CHECK(r.n_collisions > 10'000);
    for (const ConservationAudit& a : r.audit) {
        CHECK(a.momentum_err <= 1e-9);
        CHECK(a.energy_err <= 1e-9);
    }
}

TEST_CASE("proposal counts are Poisson(Lambda T): dispersion within 3 sigma") {
    EngineConfig cfg = base_config();
    cfg.n_particles = 64;
    cfg.t_final = 0.5;
    cfg.snapshot_times = {0.0, 0.5};
    const double lambda = total_proposal_rate(cfg);
    const int reps = 200;
    std::vector<double> counts;
    for (const RunResult& r : run_replicas(cfg, reps))
        counts.push_back(static_cast<double>(r.n_proposals));

    const double m = testutil::mean(counts);
    const double expect = lambda * cfg.t_final;
    CHECK(std::abs(m - expect) <= 3.0 * std::sqrt(expect / reps));

    const double dispersion = testutil::variance(counts) / m;
    CHECK(std::abs(dispersion - 1.0) <= 3.0 * std::sqrt(2.0 / (reps - 1)));
}

TEST_CASE("thinning self-consistency: accepted fraction matches the snapshot estimate") {
    // Maxwellian start is stationary, so the time-average acceptance equals
    // the ensemble average of (1 + |z|^2/eps^2)^(gamma/2) over pairs.
    EngineConfig cfg = base_config();
    cfg.n_particles = 256;
    cfg.kernel.eps = 0.1;
    cfg.t_final = 2.0;
    cfg.snapshot_times = {0.0, 1.0, 2.0};
    const std::vector<RunResult> reps = run_replicas(cfg, 16);

    double predicted = 0.0;
    std::size_t n_pairs = 0;
    std::uint64_t proposals = 0, accepted = 0;
    const double eps2 = cfg.kernel.eps * cfg.kernel.eps;
    for (const RunResult& r : reps) {
        proposals += r.n_proposals;
        accepted += r.n_collisions;
        for (const auto& snap : r.flow.snapshots) {
            for (std::size_t i = 0; i < snap.size(); ++i) {
                for (std::size_t j = i + 1; j < snap.size(); ++j) {
                    predicted += std::pow(1.0 + norm2(snap[i] - snap[j]) / eps2,
                                          0.5 * cfg.kernel.gamma);
                    ++n_pairs;
                }
            }
        }
    }
    predicted /= static_cast<double>(n_pairs);
    const double observed = static_cast<double>(accepted) / static_cast<double>(proposals);
    const double se = std::sqrt(predicted * (1.0 - predicted) / static_cast<double>(proposals));
    CHECK(std::abs(observed - predicted) <= 3.0 * se + 0.01 * predicted);
}

TEST_CASE("gamma = 0 accepts every proposal") {
    EngineConfig cfg = base_config();
    cfg.kernel.gamma = 0.0;
    cfg.t_final = 0.5;
    const RunResult r = run(cfg);
    CHECK(r.n_proposals == r.n_collisions);
}

TEST_CASE("event log replays to the same final state; displacements obey sin(theta/2)|z|") {
    EngineConfig cfg = base_config();
    cfg.n_particles = 32;
    cfg.t_final = 0.5;
    cfg.record_events = true;
    cfg.snapshot_times = {0.0, 0.5};
    const RunResult r = run(cfg);
    REQUIRE(r.events.size() == r.n_proposals);

    std::vector<Vec3> state = r.flow.snapshots.front();
    for (const EventRecord& ev : r.events) {
        if (!ev.accepted) continue;
        Vec3& vi = state[static_cast<std::size_t>(ev.i)];
        Vec3& vj = state[static_cast<std::size_t>(ev.j)];
        const Vec3 z = vi - vj;
        if (norm2(z) == 0.0) continue;
        const Vec3 sigma = sigma_from_angles(build_frame(z), ev.theta, ev.phi);
        const auto [vp, vq] = post_collide(vi, vj, sigma);
        CHECK(norm(vp - vi) ==
              doctest::Approx(deflection_distance(vi, vj, ev.theta)).epsilon(1e-12));
        vi = vp;
        vj = vq;
    }
    CHECK(state == r.flow.snapshots.back());
}

TEST_CASE("exchangeability: particle 1 and particle N/2 have the same |v| law at t=T") {
    EngineConfig cfg = base_config();
    cfg.n_particles = 64;
    cfg.kernel.eps = 0.2;
    cfg.t_final = 1.0;
    cfg.init.kind = InitialCondition::Kind::two_bump;
    cfg.snapshot_times = {0.0, 1.0};
    const std::vector<RunResult> reps = run_replicas(cfg, 256);
    std::vector<double> first, middle;
    for (const RunResult& r : reps) {
        const auto& snap = r.flow.snapshots.back();
        first.push_back(norm(snap[0]));
        middle.push_back(norm(snap[snap.size() / 2]));
    }
    CHECK(testutil::ks_two_sample_pvalue(first, middle) > 0.01);
}

TEST_CASE("replica independence: cross-replica m4 correlation consistent with zero") {
    EngineConfig cfg = base_config();
    cfg.n_particles = 64;
    cfg.t_final = 1.0;
    cfg.snapshot_times = {0.0, 1.0};
    const int reps = 128;
    const std::vector<RunResult> runs = run_replicas(cfg, reps);
    std::vector<double> m4(static_cast<std::size_t>(reps));
    for (int k = 0; k < reps; ++k) {
        double acc = 0.0;
        for (const Vec3& v : runs[static_cast<std::size_t>(k)].flow.snapshots.back())
            acc += norm2(v) * norm2(v);
        m4[static_cast<std::size_t>(k)] = acc / cfg.n_particles;
    }
    // lag-1 correlation across the replica index ordering
    std::vector<double> a(m4.begin(), m4.end() - 1), b(m4.begin() + 1, m4.end());
    const double ma = testutil::mean(a), mb = testutil::mean(b);
    double cov = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) cov += (a[i] - ma) * (b[i] - mb);
    cov /= static_cast<double>(a.size() - 1);
    const double corr = cov / (testutil::sd(a) * testutil::sd(b));
    CHECK(std::abs(corr) <= 3.0 / std::sqrt(static_cast<double>(reps)));
}

TEST_CASE("step: acceptance probability is 1 at gamma = 0 and for coincident pairs") {
    EngineConfig cfg = base_config();
    const Kernel kernel(cfg.kernel);
    Rng rng(99);
    SystemState state;
    state.v = {Vec3{0.5, 0, 0}, Vec3{0.5, 0, 0}};  // coincident pair
    state.momentum0 = {1.0, 0, 0};
    state.energy0 = 0.5;
    const double lambda = total_proposal_rate(2, kernel);
    for (int it = 0; it < 50; ++it) {
        const EventRecord ev = step(state, kernel, lambda, rng);
        CHECK(ev.accepted);  // alpha_eps(0)/eps^gamma = 1
        CHECK(state.v[0] == Vec3{0.5, 0, 0});
    }
    CHECK(state.n_collisions == 50);
}
