#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "kacsim/flow.hpp"
#include "kacsim/kernel.hpp"
#include "kacsim/testfunction.hpp"

namespace kacsim {

// Weak collision operators tested against C^2 functions.
//
// The compensated operator is evaluated in its phi-averaged form: averaging
// the linear Taylor term over the azimuth reproduces the gradient compensator
// exactly, so the two cancel and
//     Abar phi(v, v*) = alpha(|z|) int_0^pi [RingAvg(theta) - 2 pi phi(v)]
//                                  (beta ^ eps^-1)(theta) dtheta,
// whose integrand is O(theta^(1-nu)): absolutely convergent, no principal
// value needed. The kernel's eps enters both the angular cap and alpha, so
// with eps > 0 these are the operators whose compensated jumps make the
// simulated particle system a martingale.

// Abar phi(v, v_star); rejects coincident inputs when eps = 0.
double a_bar(const TestFunction& phi, const Vec3& v, const Vec3& v_star, const Kernel& kernel);

// A phi = (Abar phi(v,v*) + Abar phi(v*,v)) / 2, symmetric by construction;
// vanishes on collision invariants {1, v_k, |v|^2}.
double a_sym(const TestFunction& phi, const Vec3& v, const Vec3& v_star, const Kernel& kernel);

// (1/(N(N-1))) sum_{i != j} Abar phi(v_i, v_j) over one snapshot; equals the
// same sum of A phi by symmetry of the pair set. Parallel with a fixed
// reduction order.
double pair_average_a(const std::vector<Vec3>& snapshot, const TestFunction& phi,
                      const Kernel& kernel);

// <mu_t, phi> - <mu_0, phi> - int_0^t <mu_s (x) mu_s, A phi> ds with the time
// integral by trapezoid over the stored snapshot grid and the i = j diagonal
// excluded. Expects t on the snapshot grid and at least two snapshots.
double weak_residual(const EmpiricalFlow& flow, const TestFunction& phi, const Kernel& kernel,
                     double t, std::size_t pair_cap = 4096);

struct ResidualReport {
    double value = 0.0;
    double std_error = 0.0;
    int n_replicas = 0;
};

// Past-measurable weight: receives the flow and may inspect times <= s only.
using PastWeight = std::function<double(const EmpiricalFlow& flow, double s)>;

// Replica estimate of E[ w(past<=s) (M^phi_t - M^phi_s) ] along the tracked
// particle (index 0), where M^phi compensates phi(V_t) by the empirical-
// measure average of Abar phi. Requires s < t, both on the snapshot grid.
ResidualReport martingale_residual(const std::vector<EmpiricalFlow>& flows,
                                   const TestFunction& phi, const Kernel& kernel, double s,
                                   double t, const PastWeight& weight = {});

}  // namespace kacsim
