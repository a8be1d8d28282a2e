#include "kacsim/kernel.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "kacsim/collision.hpp"

namespace kacsim {

namespace {

constexpr double kPi = std::numbers::pi;

// integral_0^x (1 - cos t) t^(-1-nu) dt for x <= 0.7, by the alternating
// series of 1 - cos t; converges to machine precision in a few terms.
double one_minus_cos_power_series(double x, double nu) {
    double term_pow = std::pow(x, 2.0 - nu);  // x^(2m - nu), m = 1
    double fact = 2.0;                        // (2m)!
    double sum = 0.0;
    double sign = 1.0;
    const double x2 = x * x;
    for (int m = 1; m <= 9; ++m) {
        sum += sign * term_pow / (fact * (2.0 * m - nu));
        sign = -sign;
        term_pow *= x2;
        fact *= (2.0 * m + 1.0) * (2.0 * m + 2.0);
    }
    return sum;
}

// x - sin x with the cancellation at small x handled by series.
double x_minus_sin(double x) {
    if (x >= 0.5) return x - std::sin(x);
    const double x2 = x * x;
    double term = x * x2 / 6.0;  // x^3/3!
    double sum = 0.0;
    double sign = 1.0;
    for (int m = 1; m <= 8; ++m) {
        sum += sign * term;
        sign = -sign;
        term *= x2 / ((2.0 * m + 2.0) * (2.0 * m + 3.0));
    }
    return sum;
}

// integral_a^b (1 - cos t) t^(-1-nu) dt with a > 0.
double one_minus_cos_power_tail(double a, double b, double nu) {
    constexpr double kSplit = 0.5;
    double result = 0.0;
    if (a < kSplit && b > kSplit) {
        result += one_minus_cos_power_series(kSplit, nu) - one_minus_cos_power_series(a, nu);
        a = kSplit;
    } else if (b <= kSplit) {
        return one_minus_cos_power_series(b, nu) - one_minus_cos_power_series(a, nu);
    }
    result += integrate_adaptive(
        [nu](double t) { return (1.0 - std::cos(t)) * std::pow(t, -1.0 - nu); }, a, b, 1e-13);
    return result;
}

// theta below which the cap beta ^ eps^-1 is active (power_law only).
double cap_angle(const KernelSpec& spec) {
    return std::min(std::pow(spec.eps, 1.0 / (1.0 + spec.nu)), kPi);
}

// integral_0^x (1 - cos t) (beta ^ eps^-1)(t) dt
double capped_one_minus_cos_head(const KernelSpec& spec, double x) {
    if (spec.beta_form == BetaForm::cutoff_uniform) {
        const double bc =
            spec.eps > 0.0 ? std::min(spec.beta_const, 1.0 / spec.eps) : spec.beta_const;
        return bc * x_minus_sin(x);
    }
    if (!(spec.eps > 0.0)) {
        return x <= 0.5 ? one_minus_cos_power_series(x, spec.nu)
                        : one_minus_cos_power_series(0.5, spec.nu) +
                              one_minus_cos_power_tail(0.5, x, spec.nu);
    }
    const double tc = cap_angle(spec);
    if (x <= tc) return x_minus_sin(x) / spec.eps;
    return x_minus_sin(tc) / spec.eps + one_minus_cos_power_tail(tc, x, spec.nu);
}

}  // namespace

void KernelSpec::validate() const {
    if (!(gamma > -2.0) || !(gamma <= 0.0))
        throw std::invalid_argument(
            "kernel: gamma = " + std::to_string(gamma) +
            " outside (-2, 0]; moderately soft potentials require gamma in (-2, 0), and gamma = 0 "
            "(Maxwell molecules) is allowed for benchmarks only");
    if (!(nu > 0.0) || !(nu < 1.0))
        throw std::invalid_argument("kernel: nu = " + std::to_string(nu) +
                                    " outside (0, 1), the angular singularity range");
    if (!(eps >= 0.0))
        throw std::invalid_argument("kernel: eps must be nonnegative");
    if (!(beta_const > 0.0))
        throw std::invalid_argument("kernel: beta_const must be positive");
}

KernelSpec KernelSpec::from_inverse_power_law(double s, double eps) {
    if (!(s > 2.0)) throw std::invalid_argument("kernel: force exponent s must exceed 2");
    KernelSpec spec;
    spec.gamma = (s - 5.0) / (s - 1.0);
    spec.nu = 2.0 / (s - 1.0);
    spec.eps = eps;
    spec.beta_form = BetaForm::power_law;
    spec.validate();
    return spec;
}

double compute_b(const KernelSpec& spec) {
    spec.validate();
    if (spec.beta_form == BetaForm::cutoff_uniform) {
        // pi * beta_const * integral_0^pi (1 - cos) = beta_const * pi^2
        return spec.beta_const * kPi * kPi;
    }
    constexpr double kDelta = 0.5;
    const double head = one_minus_cos_power_series(kDelta, spec.nu);
    const double tail = integrate_adaptive(
        [nu = spec.nu](double t) { return (1.0 - std::cos(t)) * std::pow(t, -1.0 - nu); }, kDelta,
        kPi, 1e-13);
    return kPi * (head + tail);
}

double b_regularized(const KernelSpec& spec) {
    spec.validate();
    if (!(spec.eps > 0.0))
        throw std::invalid_argument("kernel: b_regularized requires eps > 0");
    const double cap = 1.0 / spec.eps;
    if (spec.beta_form == BetaForm::cutoff_uniform) {
        return std::min(spec.beta_const, cap) * kPi * kPi;
    }
    const double tc = cap_angle(spec);
    double value = cap * x_minus_sin(tc);
    if (tc < kPi) value += one_minus_cos_power_tail(tc, kPi, spec.nu);
    return kPi * value;
}

double angular_mass_regularized(const KernelSpec& spec) {
    spec.validate();
    if (spec.beta_form == BetaForm::cutoff_uniform) {
        const double cap = spec.eps > 0.0 ? 1.0 / spec.eps : spec.beta_const;
        return 2.0 * kPi * std::min(spec.beta_const, cap) * kPi;
    }
    if (!(spec.eps > 0.0))
        throw std::invalid_argument("kernel: the uncapped angular mass diverges; eps > 0 required");
    const double tc = cap_angle(spec);
    double mass = tc / spec.eps;
    if (tc < kPi)
        mass += (std::pow(tc, -spec.nu) - std::pow(kPi, -spec.nu)) / spec.nu;
    return 2.0 * kPi * mass;
}

double alpha_eps(const KernelSpec& spec, double r) {
    return std::pow(spec.eps * spec.eps + r * r, 0.5 * spec.gamma);
}

double sample_theta(const KernelSpec& spec, double u) {
    if (spec.beta_form == BetaForm::cutoff_uniform) {
        const double cap = spec.eps > 0.0 ? 1.0 / spec.eps : spec.beta_const;
        (void)cap;  // constant density: the cap only rescales the mass
        return u * kPi;
    }
    if (!(spec.eps > 0.0))
        throw std::invalid_argument("kernel: sample_theta requires eps > 0 for power_law");
    const double tc = cap_angle(spec);
    const double m_flat = tc / spec.eps;
    const double m_tail = tc < kPi ? (std::pow(tc, -spec.nu) - std::pow(kPi, -spec.nu)) / spec.nu : 0.0;
    const double t = u * (m_flat + m_tail);
    if (t <= m_flat) return t * spec.eps;
    // invert (tc^-nu - theta^-nu)/nu = t - m_flat on (tc, pi]
    return std::pow(std::pow(tc, -spec.nu) - spec.nu * (t - m_flat), -1.0 / spec.nu);
}

double theta_cdf(const KernelSpec& spec, double theta) {
    if (theta <= 0.0) return 0.0;
    if (theta >= kPi) return 1.0;
    if (spec.beta_form == BetaForm::cutoff_uniform) return theta / kPi;
    const double tc = cap_angle(spec);
    const double m_flat = tc / spec.eps;
    const double m_tail = tc < kPi ? (std::pow(tc, -spec.nu) - std::pow(kPi, -spec.nu)) / spec.nu : 0.0;
    double mass_below;
    if (theta <= tc) {
        mass_below = theta / spec.eps;
    } else {
        mass_below = m_flat + (std::pow(tc, -spec.nu) - std::pow(theta, -spec.nu)) / spec.nu;
    }
    return mass_below / (m_flat + m_tail);
}

double kernel_second_moment(const KernelSpec& spec, const Vec3& v, const Vec3& v_star) {
    spec.validate();
    const Vec3 z = v - v_star;
    const double r = norm(z);
    if (!(r > 0.0))
        throw std::invalid_argument("kernel_second_moment: coincident velocities");
    const DeflectionFrame frame = build_frame(z);

    constexpr int kPhiNodes = 16;
    auto phi_integral = [&](double theta) {
        double acc = 0.0;
        for (int k = 0; k < kPhiNodes; ++k) {
            const double phi = 2.0 * kPi * (k + 0.5) / kPhiNodes;
            const Vec3 vp = post_collide(v, v_star, sigma_from_angles(frame, theta, phi)).first;
            acc += norm2(vp - v);
        }
        return acc * (2.0 * kPi / kPhiNodes);
    };

    const double cap = spec.eps > 0.0 ? 1.0 / spec.eps : std::numeric_limits<double>::infinity();
    auto beta_capped = [&](double theta) {
        const double beta = spec.beta_form == BetaForm::cutoff_uniform
                                ? spec.beta_const
                                : std::pow(theta, -1.0 - spec.nu);
        return std::min(beta, cap);
    };

    constexpr double kDelta = 1e-3;
    const double body = integrate_adaptive(
        [&](double theta) { return phi_integral(theta) * beta_capped(theta); }, kDelta, kPi, 1e-9);

    // [0, delta) sliver: |v'-v|^2 phi-averages to (1-cos theta)/2 |z|^2 exactly.
    const double sliver = kPi * r * r * capped_one_minus_cos_head(spec, kDelta);

    const double alpha = spec.eps > 0.0 ? alpha_eps(spec, r) : std::pow(r, spec.gamma);
    return alpha * (body + sliver);
}

Vec3 kernel_first_moment(const KernelSpec& spec, const Vec3& v, const Vec3& v_star) {
    spec.validate();
    const Vec3 z = v - v_star;
    const double r = norm(z);
    if (!(r > 0.0))
        throw std::invalid_argument("kernel_first_moment: coincident velocities");
    const DeflectionFrame frame = build_frame(z);

    const double cap = spec.eps > 0.0 ? 1.0 / spec.eps : std::numeric_limits<double>::infinity();
    auto beta_capped = [&](double theta) {
        const double beta = spec.beta_form == BetaForm::cutoff_uniform
                                ? spec.beta_const
                                : std::pow(theta, -1.0 - spec.nu);
        return std::min(beta, cap);
    };

    // phi-average of (v' - v) numerically per component; the transverse part
    // cancels under the trapezoid rule, leaving the axis-aligned drift.
    constexpr int kPhiNodes = 16;
    auto phi_integral = [&](double theta) {
        Vec3 acc{};
        for (int k = 0; k < kPhiNodes; ++k) {
            const double phi = 2.0 * kPi * (k + 0.5) / kPhiNodes;
            const Vec3 vp = post_collide(v, v_star, sigma_from_angles(frame, theta, phi)).first;
            acc += vp - v;
        }
        return acc * (2.0 * kPi / kPhiNodes);
    };

    constexpr double kDelta = 1e-3;
    const PanelRule rule = graded_panels(kDelta, kPi, 24, 16);
    Vec3 body{};
    for (std::size_t k = 0; k < rule.x.size(); ++k) {
        body += (rule.w[k] * beta_capped(rule.x[k])) * phi_integral(rule.x[k]);
    }

    const Vec3 sliver_vec = (kPi * capped_one_minus_cos_head(spec, kDelta)) * (v_star - v);

    const double alpha = spec.eps > 0.0 ? alpha_eps(spec, r) : std::pow(r, spec.gamma);
    return alpha * (body + sliver_vec);
}

Kernel::Kernel(const KernelSpec& spec) : spec_(spec) {
    spec_.validate();
    b_ = compute_b(spec_);
    if (spec_.eps > 0.0) {
        b_eps_ = b_regularized(spec_);
        angular_mass_ = angular_mass_regularized(spec_);
    } else if (spec_.beta_form == BetaForm::cutoff_uniform) {
        b_eps_ = b_;
        angular_mass_ = angular_mass_regularized(spec_);
    } else {
        b_eps_ = b_;
        angular_mass_ = std::numeric_limits<double>::infinity();
    }
    alpha_sup_ = std::pow(spec_.eps, spec_.gamma);  // = 1 when gamma = 0

    // Weak-form theta rule. The capped region is entire (the integrands
    // behave like theta^2 there), so plain panels suffice; a panel edge sits
    // exactly on the cap angle where beta ^ eps^-1 has a kink, and the
    // power-law tail gets geometrically graded panels.
    if (spec_.beta_form == BetaForm::cutoff_uniform) {
        theta_rule_ = panels_from_edges({0.0, 0.5 * kPi, kPi}, 8);
    } else if (spec_.eps > 0.0) {
        const double tc = std::min(std::pow(spec_.eps, 1.0 / (1.0 + spec_.nu)), kPi);
        if (tc >= kPi) {
            theta_rule_ = panels_from_edges({0.0, 0.5 * kPi, kPi}, 8);
        } else {
            std::vector<double> edges{0.0, tc};
            const int tail_panels = 4;
            const double ratio = std::pow(kPi / tc, 1.0 / tail_panels);
            for (int p = 1; p < tail_panels; ++p) edges.push_back(tc * std::pow(ratio, p));
            edges.push_back(kPi);
            theta_rule_ = panels_from_edges(edges, 8);
        }
    } else {
        theta_rule_ = graded_panels(1e-5, kPi, 10, 8);
    }
    theta_cos_.resize(theta_rule_.x.size());
    theta_sin_.resize(theta_rule_.x.size());
    for (std::size_t k = 0; k < theta_rule_.x.size(); ++k) {
        theta_rule_.w[k] *= beta_capped(theta_rule_.x[k]);
        theta_cos_[k] = std::cos(theta_rule_.x[k]);
        theta_sin_[k] = std::sin(theta_rule_.x[k]);
    }
}

double Kernel::beta(double theta) const {
    return spec_.beta_form == BetaForm::cutoff_uniform ? spec_.beta_const
                                                       : std::pow(theta, -1.0 - spec_.nu);
}

double Kernel::beta_capped(double theta) const {
    if (!(spec_.eps > 0.0)) return beta(theta);
    return std::min(beta(theta), 1.0 / spec_.eps);
}

}  // namespace kacsim
