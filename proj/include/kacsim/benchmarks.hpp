#pragma once

#include <vector>

#include "kacsim/engine.hpp"
#include "kacsim/estimators.hpp"

namespace kacsim {

// Closed-form and semi-analytic references used as quantitative ground truth.

// Unit-temperature Maxwellian (2 pi)^(-3/2) exp(-|v|^2/2); the equilibrium
// consistent with mean 0 and m2 = 3.
double equilibrium_density(const Vec3& v);

// Differential entropy of the unit Gaussian: (3/2) ln(2 pi e) ~ 4.2568.
double gaussian_entropy();

// Fisher information of the unit Gaussian: 3.
double gaussian_fisher();

// Relaxation rate lambda with d/dt E|v|^4 = -lambda (E|v|^4 - 15) for Maxwell
// molecules (gamma = 0) under the configured angular kernel, normalized to
// mean 0, m2 = 3. Derived by evaluating the |v|^4 collision average over
// isotropic Gaussian scale-mixture states (the moment closure is exact for
// Maxwell molecules, which is asserted by evaluating two distinct mixtures).
double maxwell_m4_relaxation_rate(const KernelSpec& spec);

// Least-squares exponential rate: fits ln(y - level) linearly in t over the
// points with y - level >= amplitude_floor; returns the decay rate.
double fit_exponential_rate(const std::vector<double>& times, const std::vector<double>& values,
                            double level, double amplitude_floor);

struct EpsilonStep {
    double eps_coarse = 0.0;
    double eps_fine = 0.0;
    double w2_mean = 0.0;
    double w2_std_error = 0.0;
};

struct EpsilonScheduleReport {
    double t_eval = 0.0;
    int n_replicas = 0;
    std::vector<EpsilonStep> steps;  // successive pairs down the eps list
};

// Matched-seed runs across a decreasing eps list; reports the exact W2
// between successive eps-marginals at t_eval, averaged over replicas with a
// replica std_error. A vanishing regularization bias shows up as decreasing
// distances down the schedule. Per-run failures surface via run_replicas.
EpsilonScheduleReport epsilon_schedule_study(const EngineConfig& base,
                                             const std::vector<double>& eps_list, int n_replicas,
                                             double t_eval);

}  // namespace kacsim
