#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "kacsim/io.hpp"

using namespace kacsim;

namespace {

RunConfig small_config() {
    RunConfig config;
    config.engine.n_particles = 64;
    config.engine.kernel.gamma = -1.0;
    config.engine.kernel.nu = 0.25;
    config.engine.kernel.eps = 0.1;
    config.engine.t_final = 0.5;
    config.engine.seed = 7;
    config.engine.snapshot_times = {0.0, 0.25, 0.5};
    config.replicas = 2;
    return config;
}

std::filesystem::path temp_file(const std::string& name) {
    return std::filesystem::temp_directory_path() / name;
}

}  // namespace

TEST_CASE("config: round trip preserves the hash") {
    const RunConfig config = small_config();
    const std::string h1 = config_hash(config);
    const RunConfig back = config_from_json(config_to_json(config));
    CHECK(config_hash(back) == h1);
    CHECK(back.engine.snapshot_times == config.engine.snapshot_times);

    RunConfig other = config;
    other.engine.seed = 8;
    CHECK(config_hash(other) != h1);
}

TEST_CASE("config: unknown keys are fatal, ranges rejected with the constraint named") {
    nlohmann::json j = config_to_json(small_config());
    j["engine"]["kernel"]["gamm"] = -1.0;
    CHECK_THROWS_WITH_AS(config_from_json(j), doctest::Contains("unknown key 'gamm'"),
                         std::invalid_argument);

    nlohmann::json bad = config_to_json(small_config());
    bad["engine"]["kernel"]["gamma"] = -2.5;
    CHECK_THROWS_WITH_AS(config_from_json(bad), doctest::Contains("(-2, 0]"),
                         std::invalid_argument);

    nlohmann::json bad_nu = config_to_json(small_config());
    bad_nu["engine"]["kernel"]["nu"] = 1.5;
    CHECK_THROWS_AS(config_from_json(bad_nu), std::invalid_argument);

    nlohmann::json bad_eps = config_to_json(small_config());
    bad_eps["engine"]["kernel"]["eps"] = 0.0;
    CHECK_THROWS_AS(config_from_json(bad_eps), std::invalid_argument);
}

TEST_CASE("diagnostics: header-only file for an empty record list; stable bytes") {
    DiagnosticsHeader header;
    header.config_hash = "00ff00ff00ff00ff";
    header.seed = 7;
    header.n_particles = 64;
    header.replicas = 2;
    header.b = 1.5;
    header.b_eps = 1.25;
    header.lambda = 100.0;

    std::ostringstream empty;
    emit_diagnostics({}, header, empty);
    CHECK(empty.str().find("# columns t m2 m4") != std::string::npos);
    int lines = 0;
    for (char c : empty.str())
        if (c == '\n') ++lines;
    CHECK(lines == 5);  // header only

    DiagnosticsRecord rec;
    rec.t = 0.5;
    rec.m2 = 3.0;
    rec.m4 = 15.0;
    EstimatorReport ent;
    ent.value = 4.25;
    ent.std_error = 0.01;
    rec.entropy = ent;
    std::ostringstream a, b;
    emit_diagnostics({rec}, header, a);
    emit_diagnostics({rec}, header, b);
    CHECK(a.str() == b.str());
    CHECK(a.str().find("0.5 3 15 4.25 0.01 nan nan nan nan nan nan nan") != std::string::npos);

    DiagnosticsRecord rec2 = rec;  // identical time: not sorted
    CHECK_THROWS_AS(emit_diagnostics({rec, rec2}, header, a), std::invalid_argument);
}

TEST_CASE("snapshot files: write/read round trip") {
    SnapshotFile snap;
    snap.t = 1.25;
    snap.seed = 99;
    snap.config_hash = "abcdefabcdefabcd";
    snap.velocities = {Vec3{0.1, -0.2, 0.3}, Vec3{1.0 / 3.0, 2.0 / 3.0, -1e-17}};
    const auto path = temp_file("kacsim_test_snapshot.txt");
    write_snapshot(snap, path.string());
    const SnapshotFile back = read_snapshot(path.string());
    CHECK(back.t == snap.t);
    CHECK(back.seed == snap.seed);
    CHECK(back.config_hash == snap.config_hash);
    REQUIRE(back.velocities.size() == 2);
    CHECK(back.velocities[0] == snap.velocities[0]);
    CHECK(back.velocities[1] == snap.velocities[1]);  // %.17g round-trips exactly
    std::filesystem::remove(path);
}

TEST_CASE("event log format") {
    const auto path = temp_file("kacsim_test_events.txt");
    write_events({{0.125, 3, 7, 0.5, 1.5, true}, {0.25, 1, 2, 0.0625, 0.75, false}}, "deadbeef",
                 path.string());
    std::ifstream in(path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    CHECK(text.find("# columns t i j theta phi accepted") != std::string::npos);
    CHECK(text.find("0.125 3 7 0.5 1.5 1") != std::string::npos);
    CHECK(text.find("0.25 1 2 0.0625 0.75 0") != std::string::npos);
    std::filesystem::remove(path);
}

TEST_CASE("build_diagnostics: pooled estimators over replica flows, byte-stable") {
    EngineConfig engine = small_config().engine;
    std::vector<EmpiricalFlow> flows;
    for (RunResult& r : run_replicas(engine, 2)) flows.push_back(std::move(r.flow));

    EstimatorOptions options;
    options.with_fisher = false;  // 128 pooled points are too few for the kde grid path
    const auto recs = build_diagnostics(flows, options, engine.seed);
    REQUIRE(recs.size() == 3);
    CHECK(recs[0].t == 0.0);
    CHECK(recs[0].m2 == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(recs[1].entropy.has_value());
    CHECK(recs[1].pairwise.has_value());
    CHECK(!recs[1].fisher.has_value());

    const auto again = build_diagnostics(flows, options, engine.seed);
    std::ostringstream a, b;
    DiagnosticsHeader header;
    emit_diagnostics(recs, header, a);
    emit_diagnostics(again, header, b);
    CHECK(a.str() == b.str());
}
