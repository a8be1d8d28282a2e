// kacsim: event-driven Kac-system simulator and verification suites.
//
// Subcommands: simulate, verify-kernel, verify-weakform, benchmark,
// chaos-study. Verification subcommands exit nonzero when a tolerance is
// breached, so the whole surface is CI-runnable.

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include "kacsim/benchmarks.hpp"
#include "kacsim/engine.hpp"
#include "kacsim/estimators.hpp"
#include "kacsim/io.hpp"
#include "kacsim/weakform.hpp"

namespace fs = std::filesystem;
using namespace kacsim;

namespace {

std::vector<double> parse_csv_doubles(const std::string& csv) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
    return out;
}

std::vector<int> parse_csv_ints(const std::string& csv) {
    std::vector<int> out;
    std::stringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(std::stoi(tok));
    return out;
}

std::string default_outdir() {
    if (const char* env = std::getenv("KACSIM_OUTDIR")) return env;
    return "kacsim_out";
}

TestFunction make_phi(const std::string& name, const Vec3& center) {
    if (name == "quadratic") return test_functions::quadratic();
    if (name == "quartic") return test_functions::quartic();
    if (name == "bump") return test_functions::gaussian_bump(center);
    if (name.rfind("v", 0) == 0 && name.size() == 2)
        return test_functions::component(name[1] - '0');
    throw std::invalid_argument("unknown test function '" + name + "'");
}

struct SimulateFlags {
    std::string config_path;
    std::string outdir;
    std::string snapshot_csv;
    int snapshots = 0;
    bool save_snapshots = false;
    bool record_events = false;
};

void attach_config_flags(CLI::App* cmd, RunConfig& config, SimulateFlags& flags) {
    cmd->add_option("--config", flags.config_path, "JSON config file; flags override it");
    cmd->add_option("--gamma", config.engine.kernel.gamma, "velocity exponent in (-2, 0]");
    cmd->add_option("--nu", config.engine.kernel.nu, "angular singularity exponent in (0, 1)");
    cmd->add_option("--eps", config.engine.kernel.eps, "regularization parameter (> 0)");
    std::map<std::string, BetaForm> beta_map{{"power_law", BetaForm::power_law},
                                             {"cutoff_uniform", BetaForm::cutoff_uniform}};
    cmd->add_option("--beta-form", config.engine.kernel.beta_form, "angular density family")
        ->transform(CLI::CheckedTransformer(beta_map, CLI::ignore_case));
    cmd->add_option("--beta-const", config.engine.kernel.beta_const,
                    "cutoff_uniform angular density value");
    cmd->add_option("--n", config.engine.n_particles, "number of particles");
    cmd->add_option("--t-final", config.engine.t_final, "simulated time horizon");
    cmd->add_option("--seed", config.engine.seed, "master seed");
    cmd->add_option("--snapshots", flags.snapshots, "count of evenly spaced snapshot times");
    cmd->add_option("--snapshot-times", flags.snapshot_csv, "comma-separated snapshot times");
    std::map<std::string, InitialCondition::Kind> init_map{
        {"standard_gaussian", InitialCondition::Kind::standard_gaussian},
        {"two_bump", InitialCondition::Kind::two_bump},
        {"isotropic_mixture", InitialCondition::Kind::isotropic_mixture},
        {"custom_samples", InitialCondition::Kind::custom_samples}};
    cmd->add_option("--init", config.engine.init.kind, "initial condition")
        ->transform(CLI::CheckedTransformer(init_map, CLI::ignore_case));
    cmd->add_option("--separation", config.engine.init.separation, "two_bump separation");
    cmd->add_option("--mix", config.engine.init.mix, "two_bump mixture weight");
    cmd->add_option("--scale-ratio", config.engine.init.scale_ratio,
                    "isotropic_mixture variance ratio");
    cmd->add_option("--samples", config.engine.init.path, "custom sample file");
    cmd->add_flag("--no-normalize", [&config](std::int64_t) { config.engine.init.normalize = false; },
                  "skip the mean-0 / m2=3 normalization");
    cmd->add_option("--replicas", config.replicas, "independent replica count");
    cmd->add_option("--out", flags.outdir, "output directory (default $KACSIM_OUTDIR)");
    cmd->add_flag("--save-snapshots", flags.save_snapshots, "write per-replica snapshot files");
    cmd->add_flag("--events", flags.record_events, "write per-replica event logs");
    std::map<std::string, FisherMethod> fisher_map{{"kde_plugin", FisherMethod::kde_plugin},
                                                   {"knn_score", FisherMethod::knn_score}};
    cmd->add_option("--fisher-method", config.estimators.fisher_method, "Fisher estimator")
        ->transform(CLI::CheckedTransformer(fisher_map, CLI::ignore_case));
    cmd->add_option("--entropy-k", config.estimators.entropy_k, "entropy k-NN order");
    cmd->add_option("--score-k", config.estimators.score_k, "score regression neighborhood");
    cmd->add_option("--pairwise-a", config.estimators.pairwise_a, "singular moment exponent");
    cmd->add_flag("--w2-ref", config.estimators.with_w2_ref,
                  "report W2 against a Maxwellian reference sample");
    cmd->add_flag("--no-entropy", [&config](std::int64_t) { config.estimators.with_entropy = false; },
                  "skip the entropy estimator");
    cmd->add_flag("--no-fisher", [&config](std::int64_t) { config.estimators.with_fisher = false; },
                  "skip the Fisher estimator");
}

RunConfig resolve_config(CLI::App* cmd, RunConfig flag_config, const SimulateFlags& flags) {
    RunConfig config = flag_config;
    if (!flags.config_path.empty()) {
        config = load_config_file(flags.config_path);
        // flags that were actually passed override file values
        for (const CLI::Option* opt : cmd->get_options()) {
            (void)opt;
        }
        // CLI11 already wrote parsed flag values into flag_config; merge the
        // ones the user touched by re-reading counts.
        auto touched = [&](const std::string& name) {
            const CLI::Option* opt = cmd->get_option_no_throw(name);
            return opt != nullptr && opt->count() > 0;
        };
        if (touched("--gamma")) config.engine.kernel.gamma = flag_config.engine.kernel.gamma;
        if (touched("--nu")) config.engine.kernel.nu = flag_config.engine.kernel.nu;
        if (touched("--eps")) config.engine.kernel.eps = flag_config.engine.kernel.eps;
        if (touched("--beta-form"))
            config.engine.kernel.beta_form = flag_config.engine.kernel.beta_form;
        if (touched("--beta-const"))
            config.engine.kernel.beta_const = flag_config.engine.kernel.beta_const;
        if (touched("--n")) config.engine.n_particles = flag_config.engine.n_particles;
        if (touched("--t-final")) config.engine.t_final = flag_config.engine.t_final;
        if (touched("--seed")) config.engine.seed = flag_config.engine.seed;
        if (touched("--init")) config.engine.init = flag_config.engine.init;
        if (touched("--separation"))
            config.engine.init.separation = flag_config.engine.init.separation;
        if (touched("--mix")) config.engine.init.mix = flag_config.engine.init.mix;
        if (touched("--scale-ratio"))
            config.engine.init.scale_ratio = flag_config.engine.init.scale_ratio;
        if (touched("--samples")) config.engine.init.path = flag_config.engine.init.path;
        if (touched("--replicas")) config.replicas = flag_config.replicas;
        if (touched("--fisher-method"))
            config.estimators.fisher_method = flag_config.estimators.fisher_method;
        if (touched("--entropy-k")) config.estimators.entropy_k = flag_config.estimators.entropy_k;
        if (touched("--score-k")) config.estimators.score_k = flag_config.estimators.score_k;
        if (touched("--pairwise-a"))
            config.estimators.pairwise_a = flag_config.estimators.pairwise_a;
        if (touched("--w2-ref")) config.estimators.with_w2_ref = true;
        if (touched("--no-entropy")) config.estimators.with_entropy = false;
        if (touched("--no-fisher")) config.estimators.with_fisher = false;
        if (touched("--no-normalize")) config.engine.init.normalize = false;
    }
    if (!flags.snapshot_csv.empty()) {
        config.engine.snapshot_times = parse_csv_doubles(flags.snapshot_csv);
    } else if (flags.snapshots > 1) {
        config.engine.snapshot_times.clear();
        for (int i = 0; i < flags.snapshots; ++i)
            config.engine.snapshot_times.push_back(config.engine.t_final * i /
                                                   (flags.snapshots - 1));
    } else if (config.engine.snapshot_times.empty()) {
        config.engine.snapshot_times = {0.0};
        if (config.engine.t_final > 0.0)
            config.engine.snapshot_times.push_back(config.engine.t_final);
    }
    config.engine.record_events = flags.record_events;
    config.save_snapshots = flags.save_snapshots;
    config.outdir = !flags.outdir.empty() ? flags.outdir : default_outdir();
    config.validate();
    return config;
}

int cmd_simulate(CLI::App* cmd, const RunConfig& flag_config, const SimulateFlags& flags) {
    const RunConfig config = resolve_config(cmd, flag_config, flags);
    const std::string hash = config_hash(config);
    const Kernel kernel(config.engine.kernel);

    fs::create_directories(config.outdir);
    {
        std::ofstream cfg_out(fs::path(config.outdir) / "config.json");
        cfg_out << config_to_json(config).dump(2) << "\n";
    }

    std::vector<RunResult> runs = run_replicas(config.engine, config.replicas);
    std::vector<EmpiricalFlow> flows;
    flows.reserve(runs.size());
    for (RunResult& r : runs) flows.push_back(r.flow);

    DiagnosticsHeader header;
    header.config_hash = hash;
    header.seed = config.engine.seed;
    header.n_particles = config.engine.n_particles;
    header.replicas = config.replicas;
    header.kernel = config.engine.kernel;
    header.b = kernel.b();
    header.b_eps = kernel.b_eps();
    header.lambda = total_proposal_rate(config.engine.n_particles, kernel);

    const auto records = build_diagnostics(flows, config.estimators, config.engine.seed);
    emit_diagnostics(records, header, (fs::path(config.outdir) / "diagnostics.txt").string());

    if (config.save_snapshots) {
        for (std::size_t r = 0; r < runs.size(); ++r) {
            for (std::size_t it = 0; it < flows[r].times.size(); ++it) {
                char name[64];
                std::snprintf(name, sizeof name, "snap_r%03zu_%03zu.txt", r, it);
                SnapshotFile snap;
                snap.t = flows[r].times[it];
                snap.seed = derive_seed(config.engine.seed, r);
                snap.config_hash = hash;
                snap.velocities = flows[r].snapshots[it];
                write_snapshot(snap, (fs::path(config.outdir) / name).string());
            }
        }
    }
    if (config.engine.record_events) {
        for (std::size_t r = 0; r < runs.size(); ++r) {
            char name[64];
            std::snprintf(name, sizeof name, "events_r%03zu.txt", r);
            write_events(runs[r].events, hash, (fs::path(config.outdir) / name).string());
        }
    }

    std::uint64_t proposals = 0, collisions = 0;
    for (const RunResult& r : runs) {
        proposals += r.n_proposals;
        collisions += r.n_collisions;
    }
    std::cout << "config_hash=" << hash << " b=" << format_double(header.b)
              << " b_eps=" << format_double(header.b_eps)
              << " lambda=" << format_double(header.lambda) << "\n";
    std::cout << "replicas=" << config.replicas << " proposals=" << proposals
              << " collisions=" << collisions << "\n";
    std::cout << "wrote " << config.outdir << "/diagnostics.txt\n";
    return 0;
}

int cmd_verify_kernel(const std::vector<double>& gammas, const std::vector<double>& zs, double nu,
                      double tol, double inv_tol) {
    Rng rng(2024);
    int failures = 0;
    std::printf("%-8s %-6s %-12s %-12s %-12s  %s\n", "gamma", "|z|", "est4(rel)", "est3(rel)",
                "inv(max)", "status");
    for (double gamma : gammas) {
        KernelSpec spec;
        spec.gamma = gamma;
        spec.nu = nu;
        spec.eps = 0.0;
        const double b = compute_b(spec);
        const Kernel kernel(spec);
        const std::vector<TestFunction> invariants = {
            test_functions::constant(), test_functions::component(0),
            test_functions::component(1), test_functions::component(2),
            test_functions::quadratic()};
        for (double r : zs) {
            Vec3 dir = rng.normal3();
            dir = dir / norm(dir);
            const Vec3 v = 0.3 * rng.normal3();
            const Vec3 vs = v - r * dir;

            const double second = kernel_second_moment(spec, v, vs);
            const double second_ref = b * std::pow(r, gamma + 2.0);
            const double est4_rel = std::abs(second - second_ref) / second_ref;

            const Vec3 first = kernel_first_moment(spec, v, vs);
            const Vec3 first_ref = (b * std::pow(r, gamma)) * (vs - v);
            const double est3_rel = norm(first - first_ref) / norm(first_ref);

            double inv_max = 0.0;
            for (const TestFunction& phi : invariants)
                inv_max = std::max(inv_max, std::abs(a_sym(phi, v, vs, kernel)) /
                                                std::pow(r, 2.0 + gamma));

            const bool ok = est4_rel <= tol && est3_rel <= tol && inv_max <= inv_tol;
            if (!ok) ++failures;
            std::printf("%-8g %-6g %-12.3e %-12.3e %-12.3e  %s\n", gamma, r, est4_rel, est3_rel,
                        inv_max, ok ? "pass" : "FAIL");
        }
    }
    return failures == 0 ? 0 : 1;
}

struct FlowBundle {
    RunConfig config;
    EmpiricalFlow flow;
};

FlowBundle load_flow_dir(const std::string& dir) {
    FlowBundle bundle;
    bundle.config = load_config_file((fs::path(dir) / "config.json").string());
    std::vector<std::string> snaps;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const std::string name = entry.path().filename().string();
        if (name.rfind("snap_r000_", 0) == 0) snaps.push_back(entry.path().string());
    }
    std::sort(snaps.begin(), snaps.end());
    if (snaps.size() < 2)
        throw std::invalid_argument("flow dir " + dir + " has fewer than 2 replica-0 snapshots");
    for (const std::string& path : snaps) {
        const SnapshotFile snap = read_snapshot(path);
        bundle.flow.times.push_back(snap.t);
        bundle.flow.snapshots.push_back(snap.velocities);
    }
    return bundle;
}

int cmd_verify_weakform(const std::vector<std::string>& dirs, const std::string& phi_name,
                        const Vec3& center, double t_opt) {
    const TestFunction phi = make_phi(phi_name, center);
    std::vector<std::pair<std::size_t, double>> results;  // (N, |residual|)
    for (const std::string& dir : dirs) {
        const FlowBundle bundle = load_flow_dir(dir);
        const Kernel kernel(bundle.config.engine.kernel);
        const double t = t_opt > 0.0 ? t_opt : bundle.flow.times.back();
        const double res = weak_residual(bundle.flow, phi, kernel, t,
                                         bundle.config.estimators.pairwise_cap);
        results.push_back({bundle.flow.n_particles(), std::abs(res)});
        std::printf("flow %-28s N=%-6zu t=%g residual=%.6e\n", dir.c_str(),
                    bundle.flow.n_particles(), t, res);
    }
    int failures = 0;
    for (std::size_t i = 1; i < results.size(); ++i) {
        if (results[i].first > results[i - 1].first && results[i].second > results[i - 1].second) {
            std::printf("FAIL: |residual| grew from N=%zu to N=%zu\n", results[i - 1].first,
                        results[i].first);
            ++failures;
        }
    }
    return failures == 0 ? 0 : 1;
}

int cmd_benchmark_maxwell(int n, int replicas, double t_final, double tol) {
    KernelSpec spec;
    spec.gamma = 0.0;
    spec.nu = 0.25;
    spec.eps = 0.05;
    spec.beta_form = BetaForm::cutoff_uniform;
    spec.beta_const = 1.0 / (4.0 * std::numbers::pi);
    const double lambda = maxwell_m4_relaxation_rate(spec);

    EngineConfig cfg;
    cfg.n_particles = n;
    cfg.kernel = spec;
    cfg.t_final = t_final;
    cfg.seed = 4242;
    cfg.init.kind = InitialCondition::Kind::isotropic_mixture;
    cfg.init.scale_ratio = 3.0;
    const int snaps = 25;
    for (int i = 0; i < snaps; ++i) cfg.snapshot_times.push_back(t_final * i / (snaps - 1));

    const std::vector<RunResult> runs = run_replicas(cfg, replicas);
    std::vector<double> m4(cfg.snapshot_times.size(), 0.0);
    for (const RunResult& r : runs)
        for (std::size_t i = 0; i < m4.size(); ++i) {
            double acc = 0.0;
            for (const Vec3& v : r.flow.snapshots[i]) acc += norm2(v) * norm2(v);
            m4[i] += acc / n / static_cast<double>(replicas);
        }
    const double fitted = fit_exponential_rate(cfg.snapshot_times, m4, 15.0, 0.3);
    const double rel = std::abs(fitted - lambda) / lambda;
    std::printf("maxwell m4 rate: quadrature=%.6f fitted=%.6f rel=%.4f tol=%.4f  %s\n", lambda,
                fitted, rel, tol, rel <= tol ? "pass" : "FAIL");
    return rel <= tol ? 0 : 1;
}

int cmd_benchmark_equilibrium() {
    int failures = 0;
    const double at_zero = equilibrium_density(Vec3{0, 0, 0});
    const bool ok0 = std::abs(at_zero - 0.06349363593424097) < 1e-12;
    std::printf("equilibrium density(0)=%.8f  %s\n", at_zero, ok0 ? "pass" : "FAIL");
    failures += ok0 ? 0 : 1;

    Rng rng(31337);
    std::vector<Vec3> sample(100000);
    for (Vec3& v : sample) v = rng.normal3();
    const EstimatorReport h = entropy_knn(sample, 4);
    const bool okh = std::abs(h.value - gaussian_entropy()) <= 0.01 * gaussian_entropy();
    std::printf("entropy at equilibrium: %.5f vs %.5f  %s\n", h.value, gaussian_entropy(),
                okh ? "pass" : "FAIL");
    failures += okh ? 0 : 1;

    const EstimatorReport fi = fisher_estimate(sample, FisherMethod::kde_plugin, {});
    const bool okf = std::abs(fi.value - gaussian_fisher()) <= 0.05 * gaussian_fisher();
    std::printf("fisher at equilibrium: %.5f vs %.5f  %s\n", fi.value, gaussian_fisher(),
                okf ? "pass" : "FAIL");
    failures += okf ? 0 : 1;
    return failures == 0 ? 0 : 1;
}

int cmd_benchmark_schedule(int n, int replicas, const std::vector<double>& eps_list,
                           double t_eval) {
    EngineConfig cfg;
    cfg.n_particles = n;
    cfg.kernel.gamma = -1.0;
    cfg.kernel.nu = 0.25;
    cfg.seed = 2718;
    cfg.init.kind = InitialCondition::Kind::two_bump;
    const EpsilonScheduleReport rep = epsilon_schedule_study(cfg, eps_list, replicas, t_eval);
    int failures = 0;
    for (std::size_t i = 0; i < rep.steps.size(); ++i) {
        const EpsilonStep& s = rep.steps[i];
        std::printf("W2(f_%g, f_%g) at t=%g: %.5f +- %.5f\n", s.eps_coarse, s.eps_fine, t_eval,
                    s.w2_mean, s.w2_std_error);
        if (i > 0) {
            const EpsilonStep& prev = rep.steps[i - 1];
            const double slack = 2.0 * (prev.w2_std_error + s.w2_std_error);
            if (!(s.w2_mean <= prev.w2_mean + slack)) {
                std::printf("FAIL: schedule distance is not decreasing\n");
                ++failures;
            }
        }
    }
    return failures == 0 ? 0 : 1;
}

int cmd_chaos_study(const std::vector<int>& ns, int replicas, double t, const std::string& phi_name) {
    const TestFunction phi = make_phi(phi_name, Vec3{});
    std::vector<EstimatorReport> covs;
    for (int n : ns) {
        EngineConfig cfg;
        cfg.n_particles = n;
        cfg.kernel.gamma = -1.0;
        cfg.kernel.nu = 0.25;
        cfg.kernel.eps = 0.05;
        cfg.t_final = t;
        cfg.seed = 31415;
        cfg.snapshot_times = {0.0, t};
        std::vector<EmpiricalFlow> flows;
        for (RunResult& r : run_replicas(cfg, replicas)) flows.push_back(std::move(r.flow));
        covs.push_back(chaos_covariance(flows, phi, t));
        std::printf("N=%-6d cov=%.6e +- %.2e\n", n, covs.back().value, covs.back().std_error);
    }
    int failures = 0;
    for (std::size_t i = 1; i < covs.size(); ++i) {
        const double ratio = std::abs(covs[i - 1].value) / std::abs(covs[i].value);
        const double n_ratio =
            static_cast<double>(ns[i]) / static_cast<double>(ns[i - 1]);
        std::printf("ratio |cov(N=%d)| / |cov(N=%d)| = %.3f (N ratio %g)\n", ns[i - 1], ns[i],
                    ratio, n_ratio);
        if (!(ratio >= 0.5 * n_ratio && ratio <= 2.0 * n_ratio)) {
            std::printf("FAIL: ratio outside [%g, %g]\n", 0.5 * n_ratio, 2.0 * n_ratio);
            ++failures;
        }
    }
    return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Event-driven Kac N-particle simulator with verification suites"};
    app.require_subcommand(1);

    RunConfig flag_config;
    SimulateFlags sim_flags;
    CLI::App* simulate = app.add_subcommand("simulate", "run the particle system + diagnostics");
    attach_config_flags(simulate, flag_config, sim_flags);

    CLI::App* verify_kernel =
        app.add_subcommand("verify-kernel", "kernel identity suite over a (gamma, |z|) grid");
    std::string vk_gammas = "-0.5,-1,-1.5";
    std::string vk_zs = "0.5,1,2";
    double vk_nu = 0.25, vk_tol = 1e-6, vk_inv_tol = 1e-10;
    verify_kernel->add_option("--gamma", vk_gammas, "comma-separated gamma grid");
    verify_kernel->add_option("--z", vk_zs, "comma-separated |v - v*| grid");
    verify_kernel->add_option("--nu", vk_nu, "angular exponent");
    verify_kernel->add_option("--tol", vk_tol, "relative tolerance for the moment identities");
    verify_kernel->add_option("--inv-tol", vk_inv_tol, "scaled tolerance for collision invariants");

    CLI::App* verify_weakform =
        app.add_subcommand("verify-weakform", "weak-form residuals on stored flows");
    std::vector<std::string> vw_dirs;
    std::string vw_phi = "bump";
    std::string vw_center = "0.5,0.5,0";
    double vw_t = -1.0;
    verify_weakform->add_option("--flows", vw_dirs, "flow directories (from simulate --save-snapshots)")
        ->required()
        ->delimiter(',');
    verify_weakform->add_option("--phi", vw_phi, "test function: bump, quadratic, v0/v1/v2");
    verify_weakform->add_option("--center", vw_center, "bump center x,y,z");
    verify_weakform->add_option("--t", vw_t, "evaluation time (default: last snapshot)");

    CLI::App* benchmark = app.add_subcommand("benchmark", "quantitative reference suites");
    std::string bm_suite = "maxwell";
    int bm_n = 4096, bm_replicas = 16;
    double bm_t = 6.0, bm_tol = 0.05, bm_teval = 1.0;
    std::string bm_eps = "0.2,0.1,0.05";
    benchmark->add_option("--suite", bm_suite, "maxwell | equilibrium | eps-schedule")->required();
    benchmark->add_option("--n", bm_n, "particle count");
    benchmark->add_option("--replicas", bm_replicas, "replica count");
    benchmark->add_option("--t-final", bm_t, "horizon for the maxwell fit");
    benchmark->add_option("--tol", bm_tol, "relative tolerance for the maxwell rate");
    benchmark->add_option("--eps", bm_eps, "decreasing eps schedule");
    benchmark->add_option("--t-eval", bm_teval, "comparison time for the schedule");

    CLI::App* chaos = app.add_subcommand("chaos-study", "two-particle covariance over an N sweep");
    std::string cs_ns = "128,512,2048";
    int cs_replicas = 100;
    double cs_t = 1.0;
    std::string cs_phi = "quadratic";
    chaos->add_option("--n", cs_ns, "comma-separated particle counts");
    chaos->add_option("--replicas", cs_replicas, "replicas per N (>= 30)");
    chaos->add_option("--t", cs_t, "observation time");
    chaos->add_option("--phi", cs_phi, "test function");

    CLI11_PARSE(app, argc, argv);

    try {
        if (simulate->parsed()) return cmd_simulate(simulate, flag_config, sim_flags);
        if (verify_kernel->parsed())
            return cmd_verify_kernel(parse_csv_doubles(vk_gammas), parse_csv_doubles(vk_zs), vk_nu,
                                     vk_tol, vk_inv_tol);
        if (verify_weakform->parsed()) {
            const std::vector<double> c = parse_csv_doubles(vw_center);
            if (c.size() != 3) throw std::invalid_argument("--center expects x,y,z");
            return cmd_verify_weakform(vw_dirs, vw_phi, Vec3{c[0], c[1], c[2]}, vw_t);
        }
        if (benchmark->parsed()) {
            if (bm_suite == "maxwell") return cmd_benchmark_maxwell(bm_n, bm_replicas, bm_t, bm_tol);
            if (bm_suite == "equilibrium") return cmd_benchmark_equilibrium();
            if (bm_suite == "eps-schedule")
                return cmd_benchmark_schedule(bm_n == 4096 ? 1024 : bm_n, bm_replicas,
                                              parse_csv_doubles(bm_eps), bm_teval);
            std::cerr << "unknown benchmark suite '" << bm_suite << "'\n";
            return 2;
        }
        if (chaos->parsed()) return cmd_chaos_study(parse_csv_ints(cs_ns), cs_replicas, cs_t, cs_phi);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
