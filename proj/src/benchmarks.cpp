#include "kacsim/benchmarks.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "kacsim/weakform.hpp"

namespace kacsim {

namespace {
constexpr double kPi = std::numbers::pi;

// 4-point Gauss-Hermite (weight e^{-x^2}); exact for polynomials to degree 7,
// enough for the quartic moment flux.
constexpr int kGhN = 4;
constexpr double kGhNode[kGhN] = {-1.6506801238857846, -0.5246476232752903,
                                  0.5246476232752903, 1.6506801238857846};
constexpr double kGhWeight[kGhN] = {0.0813128354472452, 0.8049140900055128,
                                    0.8049140900055128, 0.0813128354472452};

// E[ A phi4 (V, V*) ] for V ~ N(0, s1 I), V* ~ N(0, s2 I), independent.
double m4_flux_component(const Kernel& kernel, const TestFunction& phi4, double s1, double s2) {
    const double c1 = std::sqrt(2.0 * s1);
    const double c2 = std::sqrt(2.0 * s2);
    double acc = 0.0;
    int idx[6];
    for (int flat = 0; flat < kGhN * kGhN * kGhN * kGhN * kGhN * kGhN; ++flat) {
        int rem = flat;
        double w = 1.0;
        for (int d = 0; d < 6; ++d) {
            idx[d] = rem % kGhN;
            rem /= kGhN;
            w *= kGhWeight[idx[d]];
        }
        const Vec3 v{c1 * kGhNode[idx[0]], c1 * kGhNode[idx[1]], c1 * kGhNode[idx[2]]};
        const Vec3 vs{c2 * kGhNode[idx[3]], c2 * kGhNode[idx[4]], c2 * kGhNode[idx[5]]};
        acc += w * a_sym(phi4, v, vs, kernel);
    }
    return acc / (kPi * kPi * kPi);
}

// d/dt m4 on an isotropic two-scale Gaussian mixture with m2 = 3.
double m4_flux_mixture(const Kernel& kernel, const TestFunction& phi4, double var_a,
                       double var_b) {
    const double w = 0.5;
    return w * w * m4_flux_component(kernel, phi4, var_a, var_a) +
           2.0 * w * (1.0 - w) * m4_flux_component(kernel, phi4, var_a, var_b) +
           (1.0 - w) * (1.0 - w) * m4_flux_component(kernel, phi4, var_b, var_b);
}

double mixture_m4(double var_a, double var_b) {
    return 15.0 * 0.5 * (var_a * var_a + var_b * var_b);
}

}  // namespace

double equilibrium_density(const Vec3& v) {
    return std::pow(2.0 * kPi, -1.5) * std::exp(-0.5 * norm2(v));
}

double gaussian_entropy() { return 1.5 * std::log(2.0 * kPi * std::numbers::e); }

double gaussian_fisher() { return 3.0; }

double maxwell_m4_relaxation_rate(const KernelSpec& spec) {
    if (spec.gamma != 0.0)
        throw std::invalid_argument("maxwell_m4_relaxation_rate: requires gamma = 0");
    const Kernel kernel(spec);
    const TestFunction phi4 = test_functions::quartic();

    // Two mixture members with m2 = 3 but different m4; the rate must agree,
    // which certifies that the moment flux is linear in m4 (exact closure).
    const double d1 = m4_flux_mixture(kernel, phi4, 0.6, 1.4);
    const double d2 = m4_flux_mixture(kernel, phi4, 0.8, 1.2);
    const double lambda1 = -d1 / (mixture_m4(0.6, 1.4) - 15.0);
    const double lambda2 = -d2 / (mixture_m4(0.8, 1.2) - 15.0);
    if (!(lambda1 > 0.0))
        throw std::runtime_error("maxwell_m4_relaxation_rate: nonpositive rate");
    if (std::abs(lambda1 - lambda2) > 1e-3 * lambda1)
        throw std::runtime_error("maxwell_m4_relaxation_rate: moment closure check failed");
    return 0.5 * (lambda1 + lambda2);
}

double fit_exponential_rate(const std::vector<double>& times, const std::vector<double>& values,
                            double level, double amplitude_floor) {
    if (times.size() != values.size())
        throw std::invalid_argument("fit_exponential_rate: size mismatch");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    for (std::size_t i = 0; i < times.size(); ++i) {
        const double amp = values[i] - level;
        if (!(amp >= amplitude_floor)) continue;
        const double x = times[i];
        const double y = std::log(amp);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++m;
    }
    if (m < 3)
        throw std::invalid_argument("fit_exponential_rate: fewer than 3 usable points");
    const double denom = m * sxx - sx * sx;
    if (!(std::abs(denom) > 0.0))
        throw std::invalid_argument("fit_exponential_rate: degenerate time grid");
    const double slope = (m * sxy - sx * sy) / denom;
    return -slope;
}

EpsilonScheduleReport epsilon_schedule_study(const EngineConfig& base,
                                             const std::vector<double>& eps_list, int n_replicas,
                                             double t_eval) {
    if (eps_list.empty()) throw std::invalid_argument("epsilon_schedule_study: empty eps list");
    for (std::size_t i = 0; i < eps_list.size(); ++i) {
        if (!(eps_list[i] > 0.0))
            throw std::invalid_argument("epsilon_schedule_study: eps values must be positive");
        if (i > 0 && !(eps_list[i] < eps_list[i - 1]))
            throw std::invalid_argument("epsilon_schedule_study: eps list must decrease");
    }
    if (n_replicas < 2) throw std::invalid_argument("epsilon_schedule_study: need >= 2 replicas");

    EpsilonScheduleReport report;
    report.t_eval = t_eval;
    report.n_replicas = n_replicas;

    // Matched coupling: replica k uses the same derived seed at every eps.
    std::vector<std::vector<std::vector<Vec3>>> marginals;  // [eps][replica]
    for (double eps : eps_list) {
        EngineConfig cfg = base;
        cfg.kernel.eps = eps;
        cfg.t_final = t_eval;
        cfg.snapshot_times = {0.0, t_eval};
        std::vector<RunResult> runs = run_replicas(cfg, n_replicas);
        std::vector<std::vector<Vec3>> snaps;
        snaps.reserve(runs.size());
        for (RunResult& r : runs) snaps.push_back(std::move(r.flow.snapshots.back()));
        marginals.push_back(std::move(snaps));
    }

    for (std::size_t m = 0; m + 1 < eps_list.size(); ++m) {
        std::vector<double> dists;
        dists.reserve(static_cast<std::size_t>(n_replicas));
        for (int k = 0; k < n_replicas; ++k) {
            const EstimatorReport w2 =
                w2_distance(marginals[m][static_cast<std::size_t>(k)],
                            marginals[m + 1][static_cast<std::size_t>(k)],
                            W2Method::exact_assignment);
            dists.push_back(w2.value);
        }
        double mean = 0.0;
        for (double d : dists) mean += d;
        mean /= static_cast<double>(dists.size());
        double var = 0.0;
        for (double d : dists) var += (d - mean) * (d - mean);
        var /= static_cast<double>(dists.size() - 1);
        report.steps.push_back({eps_list[m], eps_list[m + 1], mean,
                                std::sqrt(var / static_cast<double>(dists.size()))});
    }
    return report;
}

}  // namespace kacsim
