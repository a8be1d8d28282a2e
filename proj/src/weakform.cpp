#include "kacsim/weakform.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "kacsim/collision.hpp"
#include "kacsim/parallel.hpp"

namespace kacsim {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kFallbackRingNodes = 24;

double ring_average(const TestFunction& phi, const Vec3& c, double s, const DeflectionFrame& fr) {
    if (phi.ring_average) return phi.ring_average(c, s, fr);
    double acc = 0.0;
    for (int k = 0; k < kFallbackRingNodes; ++k) {
        const double a = 2.0 * kPi * (k + 0.5) / kFallbackRingNodes;
        acc += phi.value(c + (s * std::cos(a)) * fr.e1 + (s * std::sin(a)) * fr.e2);
    }
    return acc / kFallbackRingNodes;
}

}  // namespace

double a_bar(const TestFunction& phi, const Vec3& v, const Vec3& v_star, const Kernel& kernel) {
    const Vec3 z = v - v_star;
    const double r2 = norm2(z);
    if (!(r2 > 0.0)) {
        if (kernel.spec().eps > 0.0) return 0.0;  // identity collision, zero rate weight
        throw std::invalid_argument("a_bar: coincident velocities with eps = 0");
    }
    const double r = std::sqrt(r2);
    const DeflectionFrame frame = build_frame(z);
    const double phi_v = phi.value(v);

    const PanelRule& rule = kernel.theta_rule();  // weights carry beta ^ eps^-1
    const std::vector<double>& ct = kernel.theta_cos();
    const std::vector<double>& st = kernel.theta_sin();
    double acc = 0.0;
    for (std::size_t k = 0; k < rule.x.size(); ++k) {
        const Vec3 c = v - (0.5 * (1.0 - ct[k])) * z;
        const double s = 0.5 * st[k] * r;
        acc += rule.w[k] * (ring_average(phi, c, s, frame) - phi_v);
    }

    const double alpha = kernel.spec().eps > 0.0 ? kernel.alpha(r) : std::pow(r, kernel.spec().gamma);
    return alpha * 2.0 * kPi * acc;
}

double a_sym(const TestFunction& phi, const Vec3& v, const Vec3& v_star, const Kernel& kernel) {
    const Vec3 z = v - v_star;
    const double r2 = norm2(z);
    if (!(r2 > 0.0)) {
        if (kernel.spec().eps > 0.0) return 0.0;
        throw std::invalid_argument("a_sym: coincident velocities with eps = 0");
    }
    const double r = std::sqrt(r2);
    const DeflectionFrame frame = build_frame(z);
    const double phi_v = phi.value(v);
    const double phi_vs = phi.value(v_star);

    // Both rings live in the plane orthogonal to z, so one frame serves both
    // orders of the pair.
    const PanelRule& rule = kernel.theta_rule();
    const std::vector<double>& ct = kernel.theta_cos();
    const std::vector<double>& st = kernel.theta_sin();
    double acc = 0.0;
    for (std::size_t k = 0; k < rule.x.size(); ++k) {
        const Vec3 offset = (0.5 * (1.0 - ct[k])) * z;
        const double s = 0.5 * st[k] * r;
        // one commutative addition per node, so swapping the pair arguments
        // reproduces the value bit for bit
        const double term_v = ring_average(phi, v - offset, s, frame) - phi_v;
        const double term_vs = ring_average(phi, v_star + offset, s, frame) - phi_vs;
        acc += rule.w[k] * (term_v + term_vs);
    }

    const double alpha = kernel.spec().eps > 0.0 ? kernel.alpha(r) : std::pow(r, kernel.spec().gamma);
    return 0.5 * alpha * 2.0 * kPi * acc;
}

double pair_average_a(const std::vector<Vec3>& snapshot, const TestFunction& phi,
                      const Kernel& kernel) {
    const std::size_t n = snapshot.size();
    if (n < 2) throw std::invalid_argument("pair_average_a: need at least 2 particles");
    // a_sym shares the frame and both ring averages across the two pair
    // orders, so the triangle sum beats summing a_bar over ordered pairs.
    const double total = parallel_sum(n, [&](std::size_t lo, std::size_t hi) {
        double acc = 0.0;
        for (std::size_t i = lo; i < hi; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                acc += 2.0 * a_sym(phi, snapshot[i], snapshot[j], kernel);
            }
        }
        return acc;
    });
    return total / (static_cast<double>(n) * static_cast<double>(n - 1));
}

double weak_residual(const EmpiricalFlow& flow, const TestFunction& phi, const Kernel& kernel,
                     double t, std::size_t pair_cap) {
    if (flow.times.size() < 2) throw std::invalid_argument("weak_residual: need >= 2 snapshots");
    if (flow.n_particles() > pair_cap)
        throw std::invalid_argument("weak_residual: N exceeds the O(N^2) pair-sum cap");
    const std::size_t it = flow.index_of_time(t);

    auto mean_phi = [&](const std::vector<Vec3>& snap) {
        double acc = 0.0;
        for (const Vec3& u : snap) acc += phi.value(u);
        return acc / static_cast<double>(snap.size());
    };

    double integral = 0.0;
    double prev_rate = pair_average_a(flow.snapshots[0], phi, kernel);
    for (std::size_t k = 1; k <= it; ++k) {
        const double rate = pair_average_a(flow.snapshots[k], phi, kernel);
        integral += 0.5 * (rate + prev_rate) * (flow.times[k] - flow.times[k - 1]);
        prev_rate = rate;
    }

    return mean_phi(flow.snapshots[it]) - mean_phi(flow.snapshots[0]) - integral;
}

ResidualReport martingale_residual(const std::vector<EmpiricalFlow>& flows,
                                   const TestFunction& phi, const Kernel& kernel, double s,
                                   double t, const PastWeight& weight) {
    if (flows.size() < 2) throw std::invalid_argument("martingale_residual: need >= 2 replicas");
    if (!(s < t)) throw std::invalid_argument("martingale_residual: require s < t");

    std::vector<double> terms;
    terms.reserve(flows.size());
    for (const EmpiricalFlow& flow : flows) {
        const std::size_t is = flow.index_of_time(s);
        const std::size_t it = flow.index_of_time(t);
        const std::size_t n = flow.n_particles();

        // <mu_u, Abar phi(V^0_u, .)>: empirical-measure average along the
        // tracked particle; the diagonal term is identically zero.
        auto compensator = [&](std::size_t iu) {
            const std::vector<Vec3>& snap = flow.snapshots[iu];
            double acc = 0.0;
            for (std::size_t j = 1; j < n; ++j) acc += a_bar(phi, snap[0], snap[j], kernel);
            return acc / static_cast<double>(n);
        };

        double integral = 0.0;
        double prev = compensator(is);
        for (std::size_t k = is + 1; k <= it; ++k) {
            const double cur = compensator(k);
            integral += 0.5 * (cur + prev) * (flow.times[k] - flow.times[k - 1]);
            prev = cur;
        }

        const double increment =
            phi.value(flow.snapshots[it][0]) - phi.value(flow.snapshots[is][0]) - integral;
        const double w = weight ? weight(flow, s) : 1.0;
        terms.push_back(w * increment);
    }

    ResidualReport report;
    report.n_replicas = static_cast<int>(terms.size());
    double mean = 0.0;
    for (double x : terms) mean += x;
    mean /= static_cast<double>(terms.size());
    double var = 0.0;
    for (double x : terms) var += (x - mean) * (x - mean);
    var /= static_cast<double>(terms.size() - 1);
    report.value = mean;
    report.std_error = std::sqrt(var / static_cast<double>(terms.size()));
    return report;
}

}  // namespace kacsim
