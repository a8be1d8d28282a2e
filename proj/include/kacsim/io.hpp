#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "kacsim/engine.hpp"
#include "kacsim/estimators.hpp"

namespace kacsim {

struct EstimatorOptions {
    bool with_entropy = true;
    bool with_fisher = true;
    bool with_pairwise = true;
    bool with_w2_ref = false;  // W2 of the pooled marginal against a Maxwellian sample
    int entropy_k = 4;
    int score_k = 32;
    FisherMethod fisher_method = FisherMethod::kde_plugin;
    double fisher_bandwidth = 0.0;  // 0 = automatic
    double pairwise_a = -1.0;
    std::size_t pairwise_cap = 4096;  // pooled subsample cap for O(n^2) sums
    W2Method w2_method = W2Method::sliced;
    int w2_projections = 128;

    void validate() const;
};

// Full run description: everything needed to reproduce an output byte for
// byte. The FNV-1a hash of the canonical JSON is embedded in every artifact.
struct RunConfig {
    EngineConfig engine;
    EstimatorOptions estimators;
    int replicas = 1;
    std::string outdir;
    bool save_snapshots = false;

    void validate() const;
};

nlohmann::json config_to_json(const RunConfig& config);
// Strict parse: unknown keys are fatal, physical ranges enforced.
RunConfig config_from_json(const nlohmann::json& j);
RunConfig load_config_file(const std::string& path);

std::string config_hash(const RunConfig& config);

// One diagnostics row per snapshot time. Absent observables stay unset.
struct DiagnosticsRecord {
    double t = 0.0;
    double m2 = 0.0;
    double m4 = 0.0;
    std::optional<EstimatorReport> entropy;
    std::optional<EstimatorReport> fisher;
    std::optional<EstimatorReport> pairwise;
    std::optional<EstimatorReport> w2_ref;
    std::optional<double> residual;
};

// Estimator sweep over the common snapshot grid of a replica set. Pooled
// samples feed entropy/Fisher; sub-streams are derived from the config seed
// so reruns are byte-stable.
std::vector<DiagnosticsRecord> build_diagnostics(const std::vector<EmpiricalFlow>& flows,
                                                 const EstimatorOptions& options,
                                                 std::uint64_t seed);

struct DiagnosticsHeader {
    std::string config_hash;
    std::uint64_t seed = 0;
    int n_particles = 0;
    int replicas = 0;
    KernelSpec kernel;
    double b = 0.0;
    double b_eps = 0.0;
    double lambda = 0.0;
};

// v1 text schema: fixed column order
//   t m2 m4 entropy entropy_err fisher fisher_err pairwise pairwise_err
//   w2ref w2ref_err residual
// with nan for absent fields; header carries the config hash and the derived
// kernel constants. Records must be time-sorted.
void emit_diagnostics(const std::vector<DiagnosticsRecord>& records,
                      const DiagnosticsHeader& header, std::ostream& out);
void emit_diagnostics(const std::vector<DiagnosticsRecord>& records,
                      const DiagnosticsHeader& header, const std::string& path);

struct SnapshotFile {
    double t = 0.0;
    std::uint64_t seed = 0;
    std::string config_hash;
    std::vector<Vec3> velocities;
};

void write_snapshot(const SnapshotFile& snap, const std::string& path);
SnapshotFile read_snapshot(const std::string& path);

void write_events(const std::vector<EventRecord>& events, const std::string& cfg_hash,
                  const std::string& path);

// %.17g, round-trip exact for doubles; the one formatting used everywhere.
std::string format_double(double x);

}  // namespace kacsim
