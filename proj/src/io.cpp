#include "kacsim/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "kacsim/rng.hpp"

namespace kacsim {

namespace {

using nlohmann::json;

void require_keys(const json& j, const char* where, std::initializer_list<const char*> allowed) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* key : allowed)
            if (it.key() == key) ok = true;
        if (!ok)
            throw std::invalid_argument(std::string("config: unknown key '") + it.key() + "' in " +
                                        where);
    }
}

template <typename T>
void maybe(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

std::string beta_form_name(BetaForm f) {
    return f == BetaForm::power_law ? "power_law" : "cutoff_uniform";
}

BetaForm beta_form_from(const std::string& s) {
    if (s == "power_law") return BetaForm::power_law;
    if (s == "cutoff_uniform") return BetaForm::cutoff_uniform;
    throw std::invalid_argument("config: beta_form must be power_law or cutoff_uniform");
}

std::string init_kind_name(InitialCondition::Kind k) {
    switch (k) {
        case InitialCondition::Kind::standard_gaussian: return "standard_gaussian";
        case InitialCondition::Kind::two_bump: return "two_bump";
        case InitialCondition::Kind::isotropic_mixture: return "isotropic_mixture";
        case InitialCondition::Kind::custom_samples: return "custom_samples";
    }
    return "standard_gaussian";
}

InitialCondition::Kind init_kind_from(const std::string& s) {
    if (s == "standard_gaussian") return InitialCondition::Kind::standard_gaussian;
    if (s == "two_bump") return InitialCondition::Kind::two_bump;
    if (s == "isotropic_mixture") return InitialCondition::Kind::isotropic_mixture;
    if (s == "custom_samples") return InitialCondition::Kind::custom_samples;
    throw std::invalid_argument("config: unknown initial condition kind '" + s + "'");
}

std::string fisher_method_name(FisherMethod m) {
    return m == FisherMethod::kde_plugin ? "kde_plugin" : "knn_score";
}

FisherMethod fisher_method_from(const std::string& s) {
    if (s == "kde_plugin") return FisherMethod::kde_plugin;
    if (s == "knn_score") return FisherMethod::knn_score;
    throw std::invalid_argument("config: fisher_method must be kde_plugin or knn_score");
}

std::string w2_method_name(W2Method m) {
    return m == W2Method::exact_assignment ? "exact_assignment" : "sliced";
}

W2Method w2_method_from(const std::string& s) {
    if (s == "exact_assignment") return W2Method::exact_assignment;
    if (s == "sliced") return W2Method::sliced;
    throw std::invalid_argument("config: w2_method must be exact_assignment or sliced");
}

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ull;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ull;

std::uint64_t fnv1a(const std::string& bytes) {
    std::uint64_t h = kFnvOffset;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= kFnvPrime;
    }
    return h;
}

void write_report_fields(std::ostream& out, const std::optional<EstimatorReport>& report) {
    if (report) {
        out << ' ' << format_double(report->value) << ' ' << format_double(report->std_error);
    } else {
        out << " nan nan";
    }
}

}  // namespace

std::string format_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void EstimatorOptions::validate() const {
    if (entropy_k < 1) throw std::invalid_argument("config: entropy_k must be >= 1");
    if (score_k < 4) throw std::invalid_argument("config: score_k must be >= 4");
    if (fisher_bandwidth < 0.0)
        throw std::invalid_argument("config: fisher_bandwidth must be nonnegative");
    if (!(pairwise_a > -2.0) || !(pairwise_a < 0.0))
        throw std::invalid_argument("config: pairwise_a must lie in (-2, 0)");
    if (w2_projections < 1) throw std::invalid_argument("config: w2_projections must be >= 1");
}

void RunConfig::validate() const {
    engine.validate();
    estimators.validate();
    if (replicas < 1) throw std::invalid_argument("config: replicas must be >= 1");
}

nlohmann::json config_to_json(const RunConfig& config) {
    json kernel{{"gamma", config.engine.kernel.gamma},
                {"nu", config.engine.kernel.nu},
                {"eps", config.engine.kernel.eps},
                {"beta_form", beta_form_name(config.engine.kernel.beta_form)},
                {"beta_const", config.engine.kernel.beta_const}};
    json init{{"kind", init_kind_name(config.engine.init.kind)},
              {"separation", config.engine.init.separation},
              {"mix", config.engine.init.mix},
              {"scale_ratio", config.engine.init.scale_ratio},
              {"weight", config.engine.init.weight},
              {"path", config.engine.init.path},
              {"normalize", config.engine.init.normalize}};
    json engine{{"n_particles", config.engine.n_particles},
                {"kernel", kernel},
                {"t_final", config.engine.t_final},
                {"seed", config.engine.seed},
                {"snapshot_times", config.engine.snapshot_times},
                {"init", init},
                {"record_events", config.engine.record_events}};
    json est{{"with_entropy", config.estimators.with_entropy},
             {"with_fisher", config.estimators.with_fisher},
             {"with_pairwise", config.estimators.with_pairwise},
             {"with_w2_ref", config.estimators.with_w2_ref},
             {"entropy_k", config.estimators.entropy_k},
             {"score_k", config.estimators.score_k},
             {"fisher_method", fisher_method_name(config.estimators.fisher_method)},
             {"fisher_bandwidth", config.estimators.fisher_bandwidth},
             {"pairwise_a", config.estimators.pairwise_a},
             {"pairwise_cap", config.estimators.pairwise_cap},
             {"w2_method", w2_method_name(config.estimators.w2_method)},
             {"w2_projections", config.estimators.w2_projections}};
    return json{{"engine", engine},
                {"estimators", est},
                {"replicas", config.replicas},
                {"outdir", config.outdir},
                {"save_snapshots", config.save_snapshots}};
}

RunConfig config_from_json(const nlohmann::json& j) {
    RunConfig config;
    require_keys(j, "config",
                 {"engine", "estimators", "replicas", "outdir", "save_snapshots"});
    if (j.contains("engine")) {
        const json& e = j.at("engine");
        require_keys(e, "engine",
                     {"n_particles", "kernel", "t_final", "seed", "snapshot_times", "init",
                      "record_events"});
        maybe(e, "n_particles", config.engine.n_particles);
        maybe(e, "t_final", config.engine.t_final);
        maybe(e, "seed", config.engine.seed);
        maybe(e, "snapshot_times", config.engine.snapshot_times);
        maybe(e, "record_events", config.engine.record_events);
        if (e.contains("kernel")) {
            const json& k = e.at("kernel");
            require_keys(k, "kernel", {"gamma", "nu", "eps", "beta_form", "beta_const"});
            maybe(k, "gamma", config.engine.kernel.gamma);
            maybe(k, "nu", config.engine.kernel.nu);
            maybe(k, "eps", config.engine.kernel.eps);
            if (k.contains("beta_form"))
                config.engine.kernel.beta_form = beta_form_from(k.at("beta_form").get<std::string>());
            maybe(k, "beta_const", config.engine.kernel.beta_const);
        }
        if (e.contains("init")) {
            const json& i = e.at("init");
            require_keys(i, "init",
                         {"kind", "separation", "mix", "scale_ratio", "weight", "path",
                          "normalize"});
            if (i.contains("kind"))
                config.engine.init.kind = init_kind_from(i.at("kind").get<std::string>());
            maybe(i, "separation", config.engine.init.separation);
            maybe(i, "mix", config.engine.init.mix);
            maybe(i, "scale_ratio", config.engine.init.scale_ratio);
            maybe(i, "weight", config.engine.init.weight);
            maybe(i, "path", config.engine.init.path);
            maybe(i, "normalize", config.engine.init.normalize);
        }
    }
    if (j.contains("estimators")) {
        const json& e = j.at("estimators");
        require_keys(e, "estimators",
                     {"with_entropy", "with_fisher", "with_pairwise", "with_w2_ref", "entropy_k",
                      "score_k", "fisher_method", "fisher_bandwidth", "pairwise_a", "pairwise_cap",
                      "w2_method", "w2_projections"});
        maybe(e, "with_entropy", config.estimators.with_entropy);
        maybe(e, "with_fisher", config.estimators.with_fisher);
        maybe(e, "with_pairwise", config.estimators.with_pairwise);
        maybe(e, "with_w2_ref", config.estimators.with_w2_ref);
        maybe(e, "entropy_k", config.estimators.entropy_k);
        maybe(e, "score_k", config.estimators.score_k);
        if (e.contains("fisher_method"))
            config.estimators.fisher_method =
                fisher_method_from(e.at("fisher_method").get<std::string>());
        maybe(e, "fisher_bandwidth", config.estimators.fisher_bandwidth);
        maybe(e, "pairwise_a", config.estimators.pairwise_a);
        maybe(e, "pairwise_cap", config.estimators.pairwise_cap);
        if (e.contains("w2_method"))
            config.estimators.w2_method = w2_method_from(e.at("w2_method").get<std::string>());
        maybe(e, "w2_projections", config.estimators.w2_projections);
    }
    maybe(j, "replicas", config.replicas);
    maybe(j, "outdir", config.outdir);
    maybe(j, "save_snapshots", config.save_snapshots);
    config.validate();
    return config;
}

RunConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open " + path);
    json j;
    in >> j;
    return config_from_json(j);
}

std::string config_hash(const RunConfig& config) {
    // Where the artifacts land does not change what they contain; the hash
    // covers only fields that determine output bytes.
    RunConfig canonical = config;
    canonical.outdir.clear();
    canonical.save_snapshots = false;
    const std::uint64_t h = fnv1a(config_to_json(canonical).dump());
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::vector<DiagnosticsRecord> build_diagnostics(const std::vector<EmpiricalFlow>& flows,
                                                 const EstimatorOptions& options,
                                                 std::uint64_t seed) {
    options.validate();
    if (flows.empty()) return {};
    const std::vector<double>& times = flows.front().times;
    for (const EmpiricalFlow& f : flows)
        if (f.times != times)
            throw std::invalid_argument("diagnostics: replica snapshot grids differ");

    std::vector<DiagnosticsRecord> records;
    records.reserve(times.size());
    for (std::size_t it = 0; it < times.size(); ++it) {
        std::vector<Vec3> pooled;
        pooled.reserve(flows.size() * flows.front().n_particles());
        for (const EmpiricalFlow& f : flows)
            pooled.insert(pooled.end(), f.snapshots[it].begin(), f.snapshots[it].end());

        DiagnosticsRecord rec;
        rec.t = times[it];
        const Moments m = moments(pooled);
        rec.m2 = m.m2;
        rec.m4 = m.m4;
        if (options.with_entropy)
            rec.entropy = entropy_knn(pooled, options.entropy_k, derive_seed(seed, 11));
        if (options.with_fisher) {
            FisherParams params;
            params.k = options.score_k;
            params.bandwidth = options.fisher_bandwidth;
            params.seed = derive_seed(seed, 12);
            rec.fisher = fisher_estimate(pooled, options.fisher_method, params);
        }
        if (options.with_pairwise) {
            std::vector<Vec3> sub = pooled;
            if (sub.size() > options.pairwise_cap) sub.resize(options.pairwise_cap);
            rec.pairwise = pairwise_singular_moment(sub, options.pairwise_a);
        }
        if (options.with_w2_ref) {
            std::vector<Vec3> sub = pooled;
            if (sub.size() > 2048) sub.resize(2048);
            Rng ref_rng(derive_seed(seed, 13));
            std::vector<Vec3> ref(sub.size());
            for (Vec3& v : ref) v = ref_rng.normal3();
            rec.w2_ref = w2_distance(sub, ref, options.w2_method, options.w2_projections,
                                     derive_seed(seed, 14));
        }
        records.push_back(std::move(rec));
    }
    return records;
}

void emit_diagnostics(const std::vector<DiagnosticsRecord>& records,
                      const DiagnosticsHeader& header, std::ostream& out) {
    for (std::size_t i = 1; i < records.size(); ++i)
        if (!(records[i].t > records[i - 1].t))
            throw std::invalid_argument("diagnostics: records must be time-sorted");

    out << "# kacsim diagnostics v1\n";
    out << "# config_hash=" << header.config_hash << " seed=" << header.seed
        << " n=" << header.n_particles << " replicas=" << header.replicas << "\n";
    out << "# kernel gamma=" << format_double(header.kernel.gamma)
        << " nu=" << format_double(header.kernel.nu) << " eps=" << format_double(header.kernel.eps)
        << " beta_form=" << beta_form_name(header.kernel.beta_form)
        << " beta_const=" << format_double(header.kernel.beta_const) << "\n";
    out << "# derived b=" << format_double(header.b) << " b_eps=" << format_double(header.b_eps)
        << " lambda=" << format_double(header.lambda) << "\n";
    out << "# columns t m2 m4 entropy entropy_err fisher fisher_err pairwise pairwise_err "
           "w2ref w2ref_err residual\n";
    for (const DiagnosticsRecord& rec : records) {
        out << format_double(rec.t) << ' ' << format_double(rec.m2) << ' '
            << format_double(rec.m4);
        write_report_fields(out, rec.entropy);
        write_report_fields(out, rec.fisher);
        write_report_fields(out, rec.pairwise);
        write_report_fields(out, rec.w2_ref);
        out << ' ' << format_double(rec.residual.value_or(std::nan(""))) << "\n";
    }
}

void emit_diagnostics(const std::vector<DiagnosticsRecord>& records,
                      const DiagnosticsHeader& header, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("diagnostics: cannot write " + path);
    emit_diagnostics(records, header, out);
    if (!out) throw std::runtime_error("diagnostics: write failed for " + path);
}

void write_snapshot(const SnapshotFile& snap, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("snapshot: cannot write " + path);
    out << "# kacsim snapshot v1\n";
    out << "# t=" << format_double(snap.t) << " seed=" << snap.seed
        << " config_hash=" << snap.config_hash << " n=" << snap.velocities.size() << "\n";
    for (const Vec3& v : snap.velocities) {
        out << format_double(v.x) << ' ' << format_double(v.y) << ' ' << format_double(v.z)
            << "\n";
    }
    if (!out) throw std::runtime_error("snapshot: write failed for " + path);
}

SnapshotFile read_snapshot(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("snapshot: cannot open " + path);
    SnapshotFile snap;
    std::string line;
    if (!std::getline(in, line) || line.rfind("# kacsim snapshot v1", 0) != 0)
        throw std::runtime_error("snapshot: bad magic in " + path);
    if (!std::getline(in, line))
        throw std::runtime_error("snapshot: missing header in " + path);
    std::size_t n = 0;
    {
        std::istringstream ss(line);
        std::string tok;
        while (ss >> tok) {
            if (tok.rfind("t=", 0) == 0) snap.t = std::stod(tok.substr(2));
            if (tok.rfind("seed=", 0) == 0) snap.seed = std::stoull(tok.substr(5));
            if (tok.rfind("config_hash=", 0) == 0) snap.config_hash = tok.substr(12);
            if (tok.rfind("n=", 0) == 0) n = std::stoul(tok.substr(2));
        }
    }
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        Vec3 v;
        if (!(ss >> v.x >> v.y >> v.z))
            throw std::runtime_error("snapshot: malformed row in " + path);
        snap.velocities.push_back(v);
    }
    if (n != 0 && n != snap.velocities.size())
        throw std::runtime_error("snapshot: row count does not match header in " + path);
    return snap;
}

void write_events(const std::vector<EventRecord>& events, const std::string& cfg_hash,
                  const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("events: cannot write " + path);
    out << "# kacsim events v1\n";
    out << "# config_hash=" << cfg_hash << "\n";
    out << "# columns t i j theta phi accepted\n";
    for (const EventRecord& e : events) {
        out << format_double(e.t) << ' ' << e.i << ' ' << e.j << ' ' << format_double(e.theta)
            << ' ' << format_double(e.phi) << ' ' << (e.accepted ? 1 : 0) << "\n";
    }
    if (!out) throw std::runtime_error("events: write failed for " + path);
}

}  // namespace kacsim
