#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "kacsim/flow.hpp"
#include "kacsim/testfunction.hpp"
#include "kacsim/vec3.hpp"

namespace kacsim {

// One estimated observable: value, uncertainty, and the parameters that
// produced it (echoed so runs are auditable).
struct EstimatorReport {
    std::string name;
    double value = 0.0;
    double std_error = 0.0;
    std::int64_t n_samples = 0;
    std::map<std::string, double> parameters;
};

struct Moments {
    Vec3 mean;
    double m2 = 0.0;
    double m4 = 0.0;
};

Moments moments(const std::vector<Vec3>& sample);

// Kozachenko-Leonenko k-NN differential entropy of the 3-d marginal.
// Coincident points are deterministically jittered (seeded, magnitude
// 1e-12 x sample scale) and the count reported under parameters["jittered"].
EstimatorReport entropy_knn(const std::vector<Vec3>& sample, int k = 4,
                            std::uint64_t jitter_seed = 0);

enum class FisherMethod {
    knn_score,   // local uniform-ball score regression on k-NN neighborhoods
    kde_plugin,  // grid quadrature of |grad f|^2/f for a Gaussian KDE f
};

struct FisherParams {
    int k = 32;              // knn_score neighborhood size
    double bandwidth = 0.0;  // kde_plugin; 0 = Silverman n^(-1/7) rule
    int grid_cap = 192;      // kde_plugin nodes per axis before "grid overflow"
    int bootstrap = 12;      // kde_plugin bootstrap resamples for std_error
    int folds = 8;           // knn_score disjoint-fold std_error
    std::uint64_t seed = 0;  // resampling stream
};

// Estimate of I_1 = int |grad f|^2 / f of the sampled marginal.
//
// kde_plugin bins the sample on a tensor grid, applies separable Gaussian
// value/derivative filters (so the gradient is the exact KDE gradient, not a
// finite difference), integrates |grad f|^2/f, and applies the small-
// bandwidth de-smoothing correction I <- I (1 + b_eff^2 I / 3), exact to
// O(b^4) on Gaussians. std_error by bootstrap.
//
// knn_score fits the local score on each k-NN ball from the mean offset of
// two disjoint half-neighborhoods and averages their cross product, which
// cancels the quadratic noise bias; std_error from disjoint folds.
EstimatorReport fisher_estimate(const std::vector<Vec3>& sample, FisherMethod method,
                                const FisherParams& params = {});

// (2/(n(n-1))) sum_{i<j} |v_i - v_j|^a for a in (-2,0); exactly coincident
// pairs are excluded and counted under parameters["coincident_pairs"].
EstimatorReport pairwise_singular_moment(const std::vector<Vec3>& sample, double a);

enum class W2Method {
    exact_assignment,  // optimal matching (Jonker-Volgenant), n <= 4096
    sliced,            // random 1-d projections, calibrated by sqrt(3)
};

EstimatorReport w2_distance(const std::vector<Vec3>& sample_a, const std::vector<Vec3>& sample_b,
                            W2Method method, int n_projections = 128, std::uint64_t seed = 0);

// Across-replica estimate of Cov(phi(V^1_t), phi(V^2_t)); the O(1/N) decay of
// this covariance is the two-particle face of chaos. Jackknife std_error.
EstimatorReport chaos_covariance(const std::vector<EmpiricalFlow>& flows, const TestFunction& phi,
                                 double t);

}  // namespace kacsim
