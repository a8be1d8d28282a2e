#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "kacsim/benchmarks.hpp"
#include "kacsim/collision.hpp"
#include "kacsim/engine.hpp"
#include "kacsim/estimators.hpp"
#include "kacsim/io.hpp"
#include "kacsim/weakform.hpp"

namespace py = pybind11;
using namespace kacsim;

namespace {

std::vector<Vec3> to_vec3s(const py::array_t<double, py::array::c_style | py::array::forcecast>& arr) {
    if (arr.ndim() != 2 || arr.shape(1) != 3)
        throw std::invalid_argument("expected an (n, 3) array of velocities");
    const auto r = arr.unchecked<2>();
    std::vector<Vec3> out(static_cast<std::size_t>(r.shape(0)));
    for (py::ssize_t i = 0; i < r.shape(0); ++i)
        out[static_cast<std::size_t>(i)] = {r(i, 0), r(i, 1), r(i, 2)};
    return out;
}

py::array_t<double> from_vec3s(const std::vector<Vec3>& v) {
    py::array_t<double> arr({static_cast<py::ssize_t>(v.size()), py::ssize_t{3}});
    auto w = arr.mutable_unchecked<2>();
    for (std::size_t i = 0; i < v.size(); ++i) {
        w(static_cast<py::ssize_t>(i), 0) = v[i].x;
        w(static_cast<py::ssize_t>(i), 1) = v[i].y;
        w(static_cast<py::ssize_t>(i), 2) = v[i].z;
    }
    return arr;
}

Vec3 to_vec3(const std::array<double, 3>& a) { return {a[0], a[1], a[2]}; }

py::dict report_to_dict(const EstimatorReport& r) {
    py::dict d;
    d["name"] = r.name;
    d["value"] = r.value;
    d["std_error"] = r.std_error;
    d["n_samples"] = r.n_samples;
    py::dict params;
    for (const auto& [k, v] : r.parameters) params[py::str(k)] = v;
    d["parameters"] = params;
    return d;
}

TestFunction phi_by_name(const std::string& name, const std::array<double, 3>& center) {
    if (name == "quadratic") return test_functions::quadratic();
    if (name == "quartic") return test_functions::quartic();
    if (name == "constant") return test_functions::constant();
    if (name == "bump") return test_functions::gaussian_bump(to_vec3(center));
    if (name.size() == 2 && name[0] == 'v') return test_functions::component(name[1] - '0');
    throw std::invalid_argument("unknown test function '" + name + "'");
}

FisherMethod fisher_by_name(const std::string& name) {
    if (name == "kde_plugin") return FisherMethod::kde_plugin;
    if (name == "knn_score") return FisherMethod::knn_score;
    throw std::invalid_argument("fisher method must be kde_plugin or knn_score");
}

InitialCondition::Kind init_by_name(const std::string& name) {
    if (name == "standard_gaussian") return InitialCondition::Kind::standard_gaussian;
    if (name == "two_bump") return InitialCondition::Kind::two_bump;
    if (name == "isotropic_mixture") return InitialCondition::Kind::isotropic_mixture;
    if (name == "custom_samples") return InitialCondition::Kind::custom_samples;
    throw std::invalid_argument("unknown initial condition '" + name + "'");
}

}  // namespace

PYBIND11_MODULE(_kacsim, m) {
    m.doc() = "Event-driven Kac N-particle simulator: collision kernel, engine, estimators";

    py::class_<KernelSpec>(m, "KernelSpec")
        .def(py::init([](double gamma, double nu, double eps, const std::string& beta_form,
                         double beta_const) {
                 KernelSpec spec;
                 spec.gamma = gamma;
                 spec.nu = nu;
                 spec.eps = eps;
                 spec.beta_form =
                     beta_form == "cutoff_uniform" ? BetaForm::cutoff_uniform : BetaForm::power_law;
                 spec.beta_const = beta_const;
                 spec.validate();
                 return spec;
             }),
             py::arg("gamma") = -1.0, py::arg("nu") = 0.25, py::arg("eps") = 0.05,
             py::arg("beta_form") = "power_law", py::arg("beta_const") = 0.07957747154594767)
        .def_readonly("gamma", &KernelSpec::gamma)
        .def_readonly("nu", &KernelSpec::nu)
        .def_readonly("eps", &KernelSpec::eps)
        .def_static("from_inverse_power_law", &KernelSpec::from_inverse_power_law, py::arg("s"),
                    py::arg("eps"));

    m.def("compute_b", &compute_b, py::arg("spec"));
    m.def("b_regularized", &b_regularized, py::arg("spec"));
    m.def("angular_mass_regularized", &angular_mass_regularized, py::arg("spec"));
    m.def("alpha_eps", &alpha_eps, py::arg("spec"), py::arg("r"));
    m.def(
        "sample_theta",
        [](const KernelSpec& spec, py::array_t<double> u) {
            auto r = u.unchecked<1>();
            py::array_t<double> out(std::vector<py::ssize_t>{r.shape(0)});
            auto w = out.mutable_unchecked<1>();
            for (py::ssize_t i = 0; i < r.shape(0); ++i) w(i) = sample_theta(spec, r(i));
            return out;
        },
        py::arg("spec"), py::arg("u"), "exact inverse-CDF deflection angles from uniforms");
    m.def("theta_cdf", &theta_cdf, py::arg("spec"), py::arg("theta"));
    m.def("kernel_second_moment",
          [](const KernelSpec& spec, const std::array<double, 3>& v,
             const std::array<double, 3>& vs) {
              return kernel_second_moment(spec, to_vec3(v), to_vec3(vs));
          });

    m.def(
        "post_collide",
        [](const std::array<double, 3>& v, const std::array<double, 3>& vs,
           const std::array<double, 3>& sigma) {
            const auto [a, b] = post_collide(to_vec3(v), to_vec3(vs), to_vec3(sigma));
            return py::make_tuple(std::array<double, 3>{a.x, a.y, a.z},
                                  std::array<double, 3>{b.x, b.y, b.z});
        },
        py::arg("v"), py::arg("v_star"), py::arg("sigma"));
    m.def("deflection_distance",
          [](const std::array<double, 3>& v, const std::array<double, 3>& vs, double theta) {
              return deflection_distance(to_vec3(v), to_vec3(vs), theta);
          });

    m.def(
        "a_bar",
        [](const std::string& phi, const std::array<double, 3>& v,
           const std::array<double, 3>& vs, const KernelSpec& spec,
           const std::array<double, 3>& center) {
            return a_bar(phi_by_name(phi, center), to_vec3(v), to_vec3(vs), Kernel(spec));
        },
        py::arg("phi"), py::arg("v"), py::arg("v_star"), py::arg("spec"),
        py::arg("center") = std::array<double, 3>{0, 0, 0});
    m.def(
        "a_sym",
        [](const std::string& phi, const std::array<double, 3>& v,
           const std::array<double, 3>& vs, const KernelSpec& spec,
           const std::array<double, 3>& center) {
            return a_sym(phi_by_name(phi, center), to_vec3(v), to_vec3(vs), Kernel(spec));
        },
        py::arg("phi"), py::arg("v"), py::arg("v_star"), py::arg("spec"),
        py::arg("center") = std::array<double, 3>{0, 0, 0});

    m.def(
        "simulate",
        [](const KernelSpec& spec, int n, double t_final, std::uint64_t seed,
           const std::vector<double>& snapshot_times, const std::string& init, double separation,
           double scale_ratio, bool normalize) {
            EngineConfig cfg;
            cfg.kernel = spec;
            cfg.n_particles = n;
            cfg.t_final = t_final;
            cfg.seed = seed;
            cfg.snapshot_times = snapshot_times;
            cfg.init.kind = init_by_name(init);
            cfg.init.separation = separation;
            cfg.init.scale_ratio = scale_ratio;
            cfg.init.normalize = normalize;
            RunResult r;
            {
                py::gil_scoped_release release;
                r = run(cfg);
            }
            py::dict out;
            out["times"] = r.flow.times;
            py::list snaps;
            for (const auto& s : r.flow.snapshots) snaps.append(from_vec3s(s));
            out["snapshots"] = snaps;
            out["n_proposals"] = r.n_proposals;
            out["n_collisions"] = r.n_collisions;
            out["lambda"] = r.lambda;
            py::list audit;
            for (const auto& a : r.audit)
                audit.append(py::make_tuple(a.t, a.momentum_err, a.energy_err));
            out["audit"] = audit;
            return out;
        },
        py::arg("spec"), py::arg("n") = 1024, py::arg("t_final") = 1.0, py::arg("seed") = 1,
        py::arg("snapshot_times") = std::vector<double>{}, py::arg("init") = "standard_gaussian",
        py::arg("separation") = 2.0, py::arg("scale_ratio") = 3.0, py::arg("normalize") = true);

    m.def("total_proposal_rate",
          [](const KernelSpec& spec, int n) { return total_proposal_rate(n, Kernel(spec)); });

    m.def(
        "moments",
        [](const py::array_t<double>& arr) {
            const Moments mo = moments(to_vec3s(arr));
            py::dict d;
            d["mean"] = std::array<double, 3>{mo.mean.x, mo.mean.y, mo.mean.z};
            d["m2"] = mo.m2;
            d["m4"] = mo.m4;
            return d;
        },
        py::arg("sample"));
    m.def(
        "entropy_knn",
        [](const py::array_t<double>& arr, int k) { return report_to_dict(entropy_knn(to_vec3s(arr), k)); },
        py::arg("sample"), py::arg("k") = 4);
    m.def(
        "fisher_estimate",
        [](const py::array_t<double>& arr, const std::string& method, int k, double bandwidth) {
            FisherParams params;
            params.k = k;
            params.bandwidth = bandwidth;
            return report_to_dict(fisher_estimate(to_vec3s(arr), fisher_by_name(method), params));
        },
        py::arg("sample"), py::arg("method") = "kde_plugin", py::arg("k") = 32,
        py::arg("bandwidth") = 0.0);
    m.def(
        "pairwise_singular_moment",
        [](const py::array_t<double>& arr, double a) {
            return report_to_dict(pairwise_singular_moment(to_vec3s(arr), a));
        },
        py::arg("sample"), py::arg("a") = -1.0);
    m.def(
        "w2_distance",
        [](const py::array_t<double>& a, const py::array_t<double>& b, const std::string& method,
           int n_projections, std::uint64_t seed) {
            const W2Method mm =
                method == "exact_assignment" ? W2Method::exact_assignment : W2Method::sliced;
            return report_to_dict(w2_distance(to_vec3s(a), to_vec3s(b), mm, n_projections, seed));
        },
        py::arg("sample_a"), py::arg("sample_b"), py::arg("method") = "exact_assignment",
        py::arg("n_projections") = 128, py::arg("seed") = 0);

    m.def(
        "equilibrium_density",
        [](const py::array_t<double>& arr) {
            const std::vector<Vec3> pts = to_vec3s(arr);
            py::array_t<double> out(std::vector<py::ssize_t>{static_cast<py::ssize_t>(pts.size())});
            auto w = out.mutable_unchecked<1>();
            for (std::size_t i = 0; i < pts.size(); ++i)
                w(static_cast<py::ssize_t>(i)) = equilibrium_density(pts[i]);
            return out;
        },
        py::arg("v"));
    m.def("gaussian_entropy", &gaussian_entropy);
    m.def("gaussian_fisher", &gaussian_fisher);
    m.def("maxwell_m4_relaxation_rate", &maxwell_m4_relaxation_rate, py::arg("spec"));
}
