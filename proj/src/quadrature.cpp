#include "kacsim/quadrature.hpp"

#include <cmath>

namespace kacsim {

namespace {

struct SimpsonPanel {
    double a, b, fa, fm, fb, whole;
};

double simpson(double a, double b, double fa, double fm, double fb) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive(const std::function<double(double)>& f, const SimpsonPanel& p, double tol,
                int depth, double& err_acc) {
    const double m = 0.5 * (p.a + p.b);
    const double lm = 0.5 * (p.a + m);
    const double rm = 0.5 * (m + p.b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = simpson(p.a, m, p.fa, flm, p.fm);
    const double right = simpson(m, p.b, p.fm, frm, p.fb);
    const double delta = left + right - p.whole;
    if (depth <= 0) {
        err_acc += std::abs(delta);
        return left + right + delta / 15.0;
    }
    if (std::abs(delta) <= 15.0 * tol) {
        err_acc += std::abs(delta) / 15.0;
        return left + right + delta / 15.0;
    }
    return adaptive(f, {p.a, m, p.fa, flm, p.fm, left}, 0.5 * tol, depth - 1, err_acc) +
           adaptive(f, {m, p.b, p.fm, frm, p.fb, right}, 0.5 * tol, depth - 1, err_acc);
}

}  // namespace

double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double rel_tol, double abs_tol, int max_depth) {
    if (a == b) return 0.0;
    const double fa = f(a);
    const double fb = f(b);
    const double fm = f(0.5 * (a + b));
    const double whole = simpson(a, b, fa, fm, fb);
    double tol = std::max(abs_tol, rel_tol * std::abs(whole));
    if (tol == 0.0) tol = 1e-300;
    double err_acc = 0.0;
    const double result = adaptive(f, {a, b, fa, fm, fb, whole}, tol, max_depth, err_acc);
    const double bound = std::max(abs_tol, rel_tol * std::abs(result)) * 4.0 + 1e-300;
    if (!(err_acc <= bound) || !std::isfinite(result)) {
        throw QuadratureError("adaptive quadrature did not converge", err_acc);
    }
    return result;
}

const GaussLegendre& gauss_legendre(int order) {
    static const GaussLegendre g4{
        {-0.8611363115940526, -0.3399810435848563, 0.3399810435848563, 0.8611363115940526},
        {0.3478548451374538, 0.6521451548625461, 0.6521451548625461, 0.3478548451374538}};
    static const GaussLegendre g8{
        {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290, -0.1834346424956498,
         0.1834346424956498, 0.5255324099163290, 0.7966664774136267, 0.9602898564975363},
        {0.1012285362903763, 0.2223810344533745, 0.3137066458778873, 0.3626837833783620,
         0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763}};
    static const GaussLegendre g16{
        {-0.9894009349916499, -0.9445750230732326, -0.8656312023878318, -0.7554044083550030,
         -0.6178762444026438, -0.4580167776572274, -0.2816035507792589, -0.0950125098376374,
         0.0950125098376374, 0.2816035507792589, 0.4580167776572274, 0.6178762444026438,
         0.7554044083550030, 0.8656312023878318, 0.9445750230732326, 0.9894009349916499},
        {0.0271524594117541, 0.0622535239386479, 0.0951585116824928, 0.1246289712555339,
         0.1495959888165767, 0.1691565193950025, 0.1826034150449236, 0.1894506104550685,
         0.1894506104550685, 0.1826034150449236, 0.1691565193950025, 0.1495959888165767,
         0.1246289712555339, 0.0951585116824928, 0.0622535239386479, 0.0271524594117541}};
    switch (order) {
        case 4: return g4;
        case 8: return g8;
        case 16: return g16;
        default: throw std::invalid_argument("gauss_legendre: unsupported order");
    }
}

PanelRule panels_from_edges(const std::vector<double>& edges, int order) {
    if (edges.size() < 2) throw std::invalid_argument("panels_from_edges: need >= 2 edges");
    const GaussLegendre& gl = gauss_legendre(order);
    PanelRule rule;
    for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
        if (!(edges[p + 1] > edges[p]))
            throw std::invalid_argument("panels_from_edges: edges must increase");
        const double c = 0.5 * (edges[p] + edges[p + 1]);
        const double h = 0.5 * (edges[p + 1] - edges[p]);
        for (std::size_t k = 0; k < gl.nodes.size(); ++k) {
            rule.x.push_back(c + h * gl.nodes[k]);
            rule.w.push_back(h * gl.weights[k]);
        }
    }
    return rule;
}

PanelRule graded_panels(double eta, double b, int panels, int order) {
    if (!(eta > 0.0) || !(b > eta) || panels < 1)
        throw std::invalid_argument("graded_panels: bad panel layout");
    const GaussLegendre& gl = gauss_legendre(order);
    PanelRule rule;
    rule.x.reserve(static_cast<std::size_t>(panels) * gl.nodes.size());
    rule.w.reserve(rule.x.capacity());
    const double ratio = std::pow(b / eta, 1.0 / panels);
    double lo = eta;
    for (int p = 0; p < panels; ++p) {
        const double hi = (p + 1 == panels) ? b : lo * ratio;
        const double c = 0.5 * (lo + hi);
        const double h = 0.5 * (hi - lo);
        for (std::size_t k = 0; k < gl.nodes.size(); ++k) {
            rule.x.push_back(c + h * gl.nodes[k]);
            rule.w.push_back(h * gl.weights[k]);
        }
        lo = hi;
    }
    return rule;
}

}  // namespace kacsim
