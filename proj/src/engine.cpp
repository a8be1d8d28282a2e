#include "kacsim/engine.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <thread>

#include "kacsim/collision.hpp"
#include "kacsim/parallel.hpp"

namespace kacsim {

namespace {

constexpr double kPi = std::numbers::pi;

// Neumaier compensated sums for the conservation audit; the hot loop never
// pays for this, it runs only at snapshot times.
struct CompensatedSums {
    Vec3 momentum{};
    double energy = 0.0;
};

CompensatedSums audited_sums(const std::vector<Vec3>& v) {
    double sx = 0, cx = 0, sy = 0, cy = 0, sz = 0, cz = 0, se = 0, ce = 0;
    auto add = [](double& s, double& c, double x) {
        const double t = s + x;
        if (std::abs(s) >= std::abs(x))
            c += (s - t) + x;
        else
            c += (x - t) + s;
        s = t;
    };
    for (const Vec3& u : v) {
        add(sx, cx, u.x);
        add(sy, cy, u.y);
        add(sz, cz, u.z);
        add(se, ce, norm2(u));
    }
    return {{sx + cx, sy + cy, sz + cz}, se + ce};
}

std::vector<Vec3> read_sample_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("initial condition: cannot open " + path);
    std::vector<Vec3> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        Vec3 v;
        if (!(ss >> v.x >> v.y >> v.z))
            throw std::invalid_argument("initial condition: malformed row in " + path);
        out.push_back(v);
    }
    return out;
}

}  // namespace

void EngineConfig::validate() const {
    kernel.validate();
    if (n_particles < 2) throw std::invalid_argument("engine: at least 2 particles required");
    if (!(kernel.eps > 0.0))
        throw std::invalid_argument(
            "engine: eps > 0 required; the unregularized jump rate is unbounded");
    if (!(t_final >= 0.0)) throw std::invalid_argument("engine: t_final must be nonnegative");
    double prev = -1.0;
    for (double s : snapshot_times) {
        if (!(s >= 0.0) || s > t_final)
            throw std::invalid_argument("engine: snapshot times must lie in [0, t_final]");
        if (!(s > prev)) throw std::invalid_argument("engine: snapshot times must increase");
        prev = s;
    }
    if (init.kind == InitialCondition::Kind::two_bump && !(init.mix > 0.0 && init.mix < 1.0))
        throw std::invalid_argument("engine: two_bump mix must lie in (0,1)");
}

std::vector<Vec3> draw_initial(const InitialCondition& init, int n, Rng& rng) {
    std::vector<Vec3> v(static_cast<std::size_t>(n));
    switch (init.kind) {
        case InitialCondition::Kind::standard_gaussian:
            for (auto& u : v) u = rng.normal3();
            break;
        case InitialCondition::Kind::two_bump: {
            const double half = 0.5 * init.separation;
            for (auto& u : v) {
                const double c = rng.uniform() < init.mix ? half : -half;
                u = rng.normal3() + Vec3{c, 0.0, 0.0};
            }
            break;
        }
        case InitialCondition::Kind::isotropic_mixture: {
            // Component std-devs with unit mean variance before normalization.
            const double a = 2.0 / (1.0 + init.scale_ratio);
            const double b = a * init.scale_ratio;
            const double sd_narrow = std::sqrt(a);
            const double sd_wide = std::sqrt(b);
            for (auto& u : v) {
                const double sd = rng.uniform() < init.weight ? sd_narrow : sd_wide;
                u = sd * rng.normal3();
            }
            break;
        }
        case InitialCondition::Kind::custom_samples: {
            const std::vector<Vec3> pool = read_sample_file(init.path);
            if (pool.size() < static_cast<std::size_t>(n))
                throw std::invalid_argument("initial condition: sample file smaller than N");
            for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = pool[static_cast<std::size_t>(i)];
            break;
        }
    }
    if (init.normalize) normalize_sample(v);
    return v;
}

void normalize_sample(std::vector<Vec3>& v) {
    const double n = static_cast<double>(v.size());
    Vec3 mean{};
    for (const Vec3& u : v) mean += u;
    mean = mean / n;
    double sum2 = 0.0;
    for (Vec3& u : v) {
        u -= mean;
        sum2 += norm2(u);
    }
    if (!(sum2 > 0.0))
        throw std::invalid_argument("initial condition: degenerate sample, cannot normalize");
    const double scale = std::sqrt(3.0 * n / sum2);
    for (Vec3& u : v) u *= scale;
}

SystemState make_state(const EngineConfig& config, Rng& rng) {
    SystemState state;
    state.v = draw_initial(config.init, config.n_particles, rng);
    const CompensatedSums sums = audited_sums(state.v);
    state.momentum0 = sums.momentum;
    state.energy0 = sums.energy;
    return state;
}

double total_proposal_rate(int n_particles, const Kernel& kernel) {
    return 0.5 * n_particles * kernel.alpha_sup() * kernel.angular_mass_eps();
}

double total_proposal_rate(const EngineConfig& config) {
    config.validate();
    return total_proposal_rate(config.n_particles, Kernel(config.kernel));
}

namespace {

// Collision proposal at the already-advanced clock. Draw order is fixed
// (pair, theta, phi, acceptance) so trajectories are reproducible from the
// seed alone.
EventRecord propose(SystemState& state, const Kernel& kernel, Rng& rng) {
    const int n = static_cast<int>(state.v.size());
    const int i = static_cast<int>(rng.index(static_cast<std::uint64_t>(n)));
    int j = static_cast<int>(rng.index(static_cast<std::uint64_t>(n - 1)));
    if (j >= i) ++j;

    const double theta = kernel.sample_theta(rng.uniform_pos());
    const double phi = 2.0 * kPi * rng.uniform();
    const double u = rng.uniform();

    EventRecord ev{state.t, i, j, theta, phi, false};
    ++state.n_proposals;

    Vec3& vi = state.v[static_cast<std::size_t>(i)];
    Vec3& vj = state.v[static_cast<std::size_t>(j)];
    const Vec3 z = vi - vj;
    const double r2 = norm2(z);

    // alpha_eps(|z|) / eps^gamma = (1 + |z|^2/eps^2)^(gamma/2), equals 1 at
    // coincidence and for gamma = 0.
    const double eps = kernel.spec().eps;
    const double p = std::pow(1.0 + r2 / (eps * eps), 0.5 * kernel.spec().gamma);
    if (u >= p) return ev;

    ev.accepted = true;
    ++state.n_collisions;
    if (r2 > 0.0) {
        const DeflectionFrame frame = build_frame(z);
        const Vec3 sigma = sigma_from_angles(frame, theta, phi);
        const auto [vp, vq] = post_collide(vi, vj, sigma);
        vi = vp;
        vj = vq;
        if (!is_finite(vi) || !is_finite(vj)) {
            std::ostringstream msg;
            msg << "engine: non-finite velocity after event t=" << ev.t << " i=" << ev.i
                << " j=" << ev.j << " theta=" << ev.theta << " phi=" << ev.phi;
            throw EngineError(msg.str());
        }
    }
    // Coincident pair: the collision map is the identity, nothing to do.
    return ev;
}

ConservationAudit audit_state(const SystemState& state) {
    const CompensatedSums sums = audited_sums(state.v);
    const double scale = std::sqrt(state.energy0);
    return {state.t, norm(sums.momentum - state.momentum0) / scale,
            std::abs(sums.energy - state.energy0) / state.energy0};
}

constexpr double kDriftTolerance = 1e-9;

void check_audit(const ConservationAudit& a) {
    if (a.momentum_err > kDriftTolerance || a.energy_err > kDriftTolerance) {
        std::ostringstream msg;
        msg << "engine: conservation drift exceeded 1e-9 at t=" << a.t
            << " (momentum " << a.momentum_err << ", energy " << a.energy_err << ")";
        throw EngineError(msg.str());
    }
}

}  // namespace

EventRecord step(SystemState& state, const Kernel& kernel, double lambda, Rng& rng) {
    state.t += rng.exponential(lambda);
    return propose(state, kernel, rng);
}

RunResult run(const EngineConfig& config) {
    config.validate();
    const Kernel kernel(config.kernel);
    Rng rng(config.seed);

    SystemState state = make_state(config, rng);
    std::vector<double> snaps = config.snapshot_times;
    if (snaps.empty()) {
        snaps.push_back(0.0);
        if (config.t_final > 0.0) snaps.push_back(config.t_final);
    }

    RunResult result;
    result.lambda = total_proposal_rate(config.n_particles, kernel);
    result.flow.times.reserve(snaps.size());
    result.flow.snapshots.reserve(snaps.size());

    std::size_t next_snap = 0;
    auto emit_until = [&](double horizon) {
        // Snapshots strictly before the next event time: the state between
        // events is exactly the state at those times.
        while (next_snap < snaps.size() && snaps[next_snap] < horizon) {
            result.flow.times.push_back(snaps[next_snap]);
            result.flow.snapshots.push_back(state.v);
            ConservationAudit a = audit_state(state);
            a.t = snaps[next_snap];
            check_audit(a);
            result.audit.push_back(a);
            ++next_snap;
        }
    };

    while (true) {
        const double dt = rng.exponential(result.lambda);
        const double t_next = state.t + dt;
        emit_until(std::min(t_next, std::nextafter(config.t_final,
                                                   std::numeric_limits<double>::infinity())));
        if (t_next > config.t_final) {
            state.t = config.t_final;
            break;
        }
        state.t = t_next;
        EventRecord ev = propose(state, kernel, rng);
        if (config.record_events) result.events.push_back(ev);
    }
    emit_until(std::nextafter(config.t_final, std::numeric_limits<double>::infinity()));

    result.n_proposals = state.n_proposals;
    result.n_collisions = state.n_collisions;
    return result;
}

std::vector<RunResult> run_replicas(const EngineConfig& config, int n_replicas) {
    if (n_replicas < 1) throw std::invalid_argument("run_replicas: n_replicas must be >= 1");
    config.validate();

    std::vector<RunResult> results(static_cast<std::size_t>(n_replicas));
    std::vector<std::string> errors(static_cast<std::size_t>(n_replicas));

    const unsigned workers =
        std::min<unsigned>(worker_count(), static_cast<unsigned>(n_replicas));
    auto work = [&](unsigned w) {
        for (int k = static_cast<int>(w); k < n_replicas; k += static_cast<int>(workers)) {
            EngineConfig cfg = config;
            cfg.seed = derive_seed(config.seed, static_cast<std::uint64_t>(k));
            try {
                results[static_cast<std::size_t>(k)] = run(cfg);
            } catch (const std::exception& e) {
                errors[static_cast<std::size_t>(k)] = e.what();
            }
        }
    };
    if (workers <= 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
        for (auto& t : pool) t.join();
    }

    std::string report;
    for (std::size_t k = 0; k < errors.size(); ++k) {
        if (!errors[k].empty())
            report += "replica " + std::to_string(k) + ": " + errors[k] + "\n";
    }
    if (!report.empty()) throw EngineError("run_replicas failures:\n" + report);
    return results;
}

}  // namespace kacsim
