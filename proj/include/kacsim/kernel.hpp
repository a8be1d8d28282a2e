#pragma once

#include <memory>

#include "kacsim/quadrature.hpp"
#include "kacsim/vec3.hpp"

namespace kacsim {

enum class BetaForm {
    power_law,       // beta(theta) = theta^(-1-nu), the singular physical form
    cutoff_uniform,  // beta(theta) = beta_const, Maxwell benchmark form
};

// Cross section B(z, sigma) sin(theta) = alpha(|z|) beta(theta), with
// alpha(r) = (eps^2 + r^2)^(gamma/2) once the regularization is on (eps > 0)
// and alpha(r) = r^gamma when eps = 0.
//
// Moderately soft potentials mean gamma in (-2, 0); gamma = 0 (Maxwell
// molecules) is accepted for benchmark use. The same eps caps the angular
// density at eps^-1 and mollifies the relative-speed factor; the two knobs
// are deliberately tied together.
struct KernelSpec {
    double gamma = -1.0;
    double nu = 0.25;
    double eps = 0.05;
    BetaForm beta_form = BetaForm::power_law;
    double beta_const = 0.07957747154594767;  // 1/(4 pi), cutoff_uniform strength

    // Throws std::invalid_argument naming the violated physical constraint.
    void validate() const;

    // Inverse-power-law force 1/r^s: gamma = (s-5)/(s-1), nu = 2/(s-1).
    static KernelSpec from_inverse_power_law(double s, double eps);
};

// b = pi * integral_0^pi (1 - cos theta) beta(theta) dtheta, to 1e-10 relative.
// The theta -> 0 endpoint is integrated analytically via the series of
// 1 - cos theta; adaptive quadrature covers the rest.
double compute_b(const KernelSpec& spec);

// b_eps, same integral with beta capped at eps^-1. Requires eps > 0.
double b_regularized(const KernelSpec& spec);

// 2 pi * integral_0^pi (beta ^ eps^-1) dtheta; finite total angular mass of
// the capped kernel (closed form for both beta families).
double angular_mass_regularized(const KernelSpec& spec);

// alpha(r) = (eps^2 + r^2)^(gamma/2); bounded by eps^gamma since gamma <= 0.
double alpha_eps(const KernelSpec& spec, double r);

// Exact inverse-CDF sample of theta with density proportional to
// (beta ^ eps^-1) on (0, pi], u in (0, 1]. No rejection step.
double sample_theta(const KernelSpec& spec, double u);

// CDF of the law sampled by sample_theta (verification surface).
double theta_cdf(const KernelSpec& spec, double theta);

// integral_{S^2} |v' - v|^2 B(v - v_star, sigma) dsigma, evaluated by product
// quadrature in (theta, phi) through the actual collision map. For eps = 0
// this equals b |v - v_star|^(gamma+2) and serves as a kernel identity check.
double kernel_second_moment(const KernelSpec& spec, const Vec3& v, const Vec3& v_star);

// Principal value of integral_{S^2} (v' - v) B(v - v_star, sigma) dsigma,
// evaluated with the closed-form phi average; equals
// b |v - v_star|^gamma (v_star - v) for eps = 0.
Vec3 kernel_first_moment(const KernelSpec& spec, const Vec3& v, const Vec3& v_star);

// Immutable spec plus cached derived constants, shareable across workers.
class Kernel {
public:
    explicit Kernel(const KernelSpec& spec);

    const KernelSpec& spec() const { return spec_; }
    double b() const { return b_; }
    double b_eps() const { return b_eps_; }
    double alpha_sup() const { return alpha_sup_; }
    double angular_mass_eps() const { return angular_mass_; }

    double beta(double theta) const;
    double beta_capped(double theta) const;
    double alpha(double r) const { return alpha_eps(spec_, r); }
    double sample_theta(double u) const { return kacsim::sample_theta(spec_, u); }

    // Fixed theta rule for weak-form quadrature; weights carry the capped
    // angular density. Graded toward theta = 0 where beta is singular, with a
    // panel edge on the cap angle where the capped density has a kink.
    const PanelRule& theta_rule() const { return theta_rule_; }
    // cos/sin at the rule nodes, precomputed for the pair-sum hot loop
    const std::vector<double>& theta_cos() const { return theta_cos_; }
    const std::vector<double>& theta_sin() const { return theta_sin_; }

private:
    KernelSpec spec_;
    double b_ = 0.0;
    double b_eps_ = 0.0;
    double alpha_sup_ = 0.0;
    double angular_mass_ = 0.0;
    PanelRule theta_rule_;
    std::vector<double> theta_cos_;
    std::vector<double> theta_sin_;
};

}  // namespace kacsim
