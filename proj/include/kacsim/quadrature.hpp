#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace kacsim {

struct QuadratureError : std::runtime_error {
    double achieved_error;
    QuadratureError(const std::string& what, double err)
        : std::runtime_error(what + " (achieved error estimate " + std::to_string(err) + ")"),
          achieved_error(err) {}
};

// Adaptive Simpson on [a,b]. Throws QuadratureError when the recursion depth
// is exhausted before the tolerance is met.
double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double rel_tol = 1e-12, double abs_tol = 0.0, int max_depth = 60);

// Fixed Gauss-Legendre node/weight table on [-1,1].
struct GaussLegendre {
    std::vector<double> nodes;
    std::vector<double> weights;
};
const GaussLegendre& gauss_legendre(int order);  // order in {4, 8, 16}

// Quadrature nodes on (eta, b] made of geometrically graded panels, each
// carrying a Gauss-Legendre rule. Suited to integrands that behave like a
// power of the variable near zero.
struct PanelRule {
    std::vector<double> x;
    std::vector<double> w;
};
PanelRule graded_panels(double eta, double b, int panels, int order);

// One Gauss-Legendre panel per consecutive pair of edges.
PanelRule panels_from_edges(const std::vector<double>& edges, int order);

}  // namespace kacsim
