#include "support.hpp"
#include "uiclust/commands.hpp"

#include <doctest.h>

#include <fstream>
#include <sstream>

using namespace testing;
namespace cli = uiclust::cli;
namespace io = uiclust::io;
namespace fs = std::filesystem;

namespace {

void write_text(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

/// Metrics step records with the wall-clock field removed.
std::vector<nlohmann::json> steps_without_time(const fs::path& metrics)
{
    auto parsed = io::parse_metrics(io::read_file(metrics));
    for (auto& s : parsed.steps) s.erase("duration_seconds");
    return parsed.steps;
}

}  // namespace

TEST_CASE("gen writes identical bytes for identical invocations")
{
    const auto dir = scratch("gen");
    const auto a = cli::cmd_gen({"sdwcd", 7, dir / "a"});
    const auto b = cli::cmd_gen({"sdwcd", 7, dir / "b"});
    CHECK(io::read_file(a) == io::read_file(b));
    for (int t = 1; t <= 10; ++t) {
        char name[32];
        std::snprintf(name, sizeof name, "chunk_%04d.csv", t);
        REQUIRE(io::read_file(dir / "a" / name) == io::read_file(dir / "b" / name));
    }
    const auto loaded = io::load_stream(a);
    CHECK(loaded.chunks.size() == 10);
    CHECK(loaded.manifest.seed == std::optional<std::uint64_t>{7});
    CHECK(loaded.manifest.spec["name"] == "sdwcd");
    CHECK_THROWS_AS(cli::cmd_gen({"bogus", 1, dir / "c"}), UsageError);
    CHECK_FALSE(fs::exists(dir / "c" / "manifest.json"));
}

TEST_CASE("gen accepts a spec file and overrides its seed")
{
    const auto dir = scratch("gen-spec");
    write_text(dir / "spec.json",
               R"({"name":"two","anchors":[[0.25,0.25],[0.75,0.75]],"entries":[{"clusters":2,"chunk_size":20,"repeat":3}]})");
    const auto m = cli::cmd_gen({(dir / "spec.json").string(), 5, dir / "out"});
    const auto s = io::load_stream(m);
    CHECK(s.chunks.size() == 3);
    CHECK(s.manifest.spec["seed"] == 5);
    write_text(dir / "broken.json", "{");
    CHECK_THROWS_AS(cli::cmd_gen({(dir / "broken.json").string(), 5, dir / "out2"}), UsageError);
}

TEST_CASE("chunk splits the toy table as published")
{
    const auto dir = scratch("chunk-toy");
    write_text(dir / "toy.csv",
               "A1,A2,class\n0.052,0.153,1\n0.061,0.252,1\n0.046,0.175,1\n0.055,0.183,1\n"
               "0.957,0.858,2\n0.965,0.752,2\n0.957,0.858,2\n0.965,0.752,2\n");
    cli::ChunkOptions o;
    o.dataset = dir / "toy.csv";
    o.out = dir / "stream";
    o.chunks = 2;
    o.normalize = false;
    const auto s = io::load_stream(cli::cmd_chunk(o));
    REQUIRE(s.chunks.size() == 2);
    CHECK(s.manifest.real_world());
    CHECK(s.manifest.attributes == std::vector<std::string>{"A1", "A2"});
    CHECK(s.chunks[0].values == rows_of({{0.052, 0.153}, {0.061, 0.252}, {0.957, 0.858}, {0.965, 0.752}}));
    CHECK(s.chunks[1].values == rows_of({{0.046, 0.175}, {0.055, 0.183}, {0.957, 0.858}, {0.965, 0.752}}));

    o.chunks = 5;
    CHECK_THROWS_AS(cli::cmd_chunk(o), UsageError);
    o.chunks = 1;
    o.out = dir / "one";
    CHECK(io::load_stream(cli::cmd_chunk(o)).chunks.size() == 1);
}

TEST_CASE("chunk adds one artificial class set per attribute")
{
    const auto dir = scratch("chunk-artificial");
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 20.0);
    std::ostringstream text;
    text << "a;b;c;quality\n";
    for (int i = 0; i < 140; ++i) text << u(rng) << ";" << u(rng) << ";" << u(rng) << ";" << (3 + i % 7) << "\n";
    write_text(dir / "wine.csv", text.str());

    cli::ChunkOptions o;
    o.dataset = dir / "wine.csv";
    o.out = dir / "stream";
    o.chunks = 10;
    o.artificial_classes = true;
    o.drifts = cli::parse_drift_schedule("3:temporary,6:sustained");
    const auto s = io::load_stream(cli::cmd_chunk(o));
    CHECK(s.chunks.size() == 10);
    CHECK(s.manifest.artificial_class_sets == 3);
    CHECK(s.manifest.spec["bins"] == 7);
    for (const auto& c : s.chunks) {
        CHECK(c.artificial.cols() == 3);
        CHECK(c.artificial.minCoeff() >= 1);
        CHECK(c.artificial.maxCoeff() <= 7);
        CHECK(c.values.minCoeff() >= 0.0);
        CHECK(c.values.maxCoeff() <= 1.0);
    }
    // Same record order in every chunk: class i sits at row i.
    CHECK(*s.chunks[0].labels[0] == 3);
    CHECK(*s.chunks[2].labels[0] != 3);
    CHECK(*s.chunks[3].labels[0] == 3);
    CHECK(*s.chunks[5].labels[0] == *s.chunks[9].labels[0]);
    CHECK(*s.chunks[5].labels[0] != 3);

    o.drifts = cli::parse_drift_schedule("11:temporary");
    o.out = dir / "late";
    CHECK_THROWS_AS(cli::cmd_chunk(o), UsageError);
}

TEST_CASE("drift schedule parsing")
{
    const auto d = cli::parse_drift_schedule("3:temporary,6:sustained");
    REQUIRE(d.size() == 2);
    CHECK(d[0] == std::pair<std::int64_t, LabelDrift>{3, LabelDrift::Temporary});
    CHECK(d[1].second == LabelDrift::Sustained);
    CHECK(cli::parse_drift_schedule("").empty());
    CHECK_THROWS_AS(cli::parse_drift_schedule("3"), UsageError);
    CHECK_THROWS_AS(cli::parse_drift_schedule("x:temporary"), UsageError);
    CHECK_THROWS_AS(cli::parse_drift_schedule("0:temporary"), UsageError);
    CHECK_THROWS_AS(cli::parse_drift_schedule("2:none"), UsageError);
    CHECK_THROWS_AS(cli::parse_drift_schedule("2:sideways"), UsageError);
}

TEST_CASE("threshold defaults follow the stream origin")
{
    io::StreamManifest m;
    cli::RunConfig rc;
    CHECK(cli::drift_config_for(rc, m).d_thresh == 0.6);
    CHECK(cli::drift_config_for(rc, m).o_thresh == 0.18);
    m.origin = "real-world";
    CHECK(cli::drift_config_for(rc, m).d_thresh == 0.4);
    rc.d_thresh = 0.9;
    CHECK(cli::drift_config_for(rc, m).d_thresh == 0.9);
}

TEST_CASE("k follows the labels of each chunk unless fixed")
{
    const auto s = generate_synthetic(streams::sdwcd(1));
    CHECK(cli::k_schedule(s, std::nullopt, 5) == std::vector<Index>{5, 5, 1, 5, 5, 3, 3, 3, 3, 3});
    CHECK(cli::k_schedule(s, Index{4}, 5) == std::vector<Index>(10, 4));
    auto unlabeled = s;
    unlabeled[0].labels[0].reset();
    CHECK(cli::k_schedule(unlabeled, std::nullopt, 7)[0] == 7);
}

TEST_CASE("run writes self-describing metrics and a series")
{
    const auto dir = scratch("run");
    const auto manifest = cli::cmd_gen({"sdwcd", 3, dir / "stream"});
    cli::RunConfig rc;
    rc.manifest = manifest;
    rc.out = dir / "out";
    rc.repeat = 3;
    rc.parallel = true;
    const auto out = cli::cmd_run(rc);
    CHECK(out.runs.size() == 3);
    CHECK(out.runs[1].state.config.seed == 43);
    CHECK(out.report.runs == 3);

    const auto parsed = io::parse_metrics(io::read_file(out.metrics_path));
    CHECK(parsed.header["config"]["k_policy"] == "labels");
    CHECK(parsed.header["config"]["d_thresh"] == 0.6);
    CHECK(parsed.header["config"]["seed"] == 42);
    CHECK(parsed.header["stream"]["name"] == "sdwcd");
    CHECK(parsed.header["tool"] == std::string(uiclust::version));
    CHECK(parsed.steps.size() == 10);
    CHECK(parsed.summary["runs"] == 3);
    CHECK(parsed.summary["final_centroids"].size() == 3);
    CHECK(parsed.summary.contains("tcv"));
    CHECK(io::read_file(out.series_path).rfind("timestamp\tcluster_count\n1\t5\n2\t5\n3\t1\n", 0) == 0);

    // Sequential repeats give the same trajectory as the threaded ones.
    rc.parallel = false;
    rc.out = dir / "seq";
    const auto seq = cli::cmd_run(rc);
    CHECK(steps_without_time(seq.metrics_path) == steps_without_time(out.metrics_path));
}

TEST_CASE("run configuration errors")
{
    const auto dir = scratch("run-errors");
    const auto manifest = cli::cmd_gen({"sdccl", 3, dir / "stream"});
    cli::RunConfig rc;
    rc.manifest = manifest;
    rc.out = dir / "out";
    rc.repeat = 0;
    CHECK_THROWS_AS(cli::cmd_run(rc), UsageError);
    rc.repeat = 2;
    rc.snapshot = dir / "s.json";
    CHECK_THROWS_AS(cli::cmd_run(rc), UsageError);
    rc.repeat = 1;
    rc.snapshot.reset();
    rc.stop_after = 3;
    CHECK_THROWS_AS(cli::cmd_run(rc), UsageError);
    rc.stop_after.reset();
    rc.o_thresh = 1.5;
    CHECK_THROWS_AS(cli::cmd_run(rc), UsageError);
    rc.o_thresh.reset();
    rc.manifest = dir / "nope.json";
    CHECK_THROWS_AS(cli::cmd_run(rc), UsageError);
    CHECK_FALSE(fs::exists(dir / "out" / "metrics.jsonl"));
}

TEST_CASE("eval prints the TCV table and validates its inputs")
{
    const auto dir = scratch("eval");
    const auto sdccl = cli::cmd_gen({"sdccl", 1, dir / "sdccl"});
    const auto sdwcd = cli::cmd_gen({"sdwcd", 1, dir / "sdwcd"});
    cli::RunConfig rc;
    rc.manifest = sdccl;
    rc.out = dir / "out";
    const auto out = cli::cmd_run(rc);

    std::ostringstream os;
    const auto m = cli::cmd_eval(sdccl, out.metrics_path, os);
    CHECK(m.pairs.size() == 5);
    for (const auto& p : m.pairs) CHECK(p.distance <= 0.005);
    CHECK(os.str().find("7 of 7 chunks") != std::string::npos);
    CHECK(os.str().find("mean distance") != std::string::npos);

    std::ostringstream ignored;
    CHECK_THROWS_WITH_AS(cli::cmd_eval(sdwcd, out.metrics_path, ignored), doctest::Contains("fingerprint"), UsageError);

    // A run stopped early still evaluates.
    rc.out = dir / "early";
    rc.snapshot = dir / "early" / "snap.json";
    rc.stop_after = 4;
    const auto early = cli::cmd_run(rc);
    std::ostringstream os2;
    const auto partial = cli::cmd_eval(sdccl, early.metrics_path, os2);
    CHECK(os2.str().find("4 of 7 chunks") != std::string::npos);
    double worst = 0.0;
    for (const auto& p : partial.pairs) worst = std::max(worst, p.distance);
    CHECK(worst > 0.0);
}

TEST_CASE("eval rejects unlabeled streams")
{
    const auto dir = scratch("eval-unlabeled");
    const auto manifest = cli::cmd_gen({"sdccl", 1, dir / "s"});
    cli::RunConfig rc;
    rc.manifest = manifest;
    rc.out = dir / "out";
    rc.k = 5;
    const auto out = cli::cmd_run(rc);
    auto text = io::read_file(dir / "s" / "chunk_0001.csv");
    const auto eol = text.find('\n', text.find('\n') + 1);
    const auto comma = text.rfind(',', eol);
    text.erase(comma + 1, eol - comma - 1);
    write_text(dir / "s" / "chunk_0001.csv", text);
    // The edit changes the fingerprint too, so refresh the metrics first.
    const auto out2 = cli::cmd_run(rc);
    std::ostringstream os;
    CHECK_THROWS_WITH_AS(cli::cmd_eval(manifest, out2.metrics_path, os), doctest::Contains("unlabeled"), UsageError);
    CHECK(out.metrics_path == out2.metrics_path);
}

TEST_CASE("resume continues a stopped run exactly")
{
    const auto dir = scratch("resume");
    const auto manifest = cli::cmd_gen({"sdwcd", 5, dir / "stream"});
    cli::RunConfig rc;
    rc.manifest = manifest;
    rc.out = dir / "full";
    const auto full = cli::cmd_run(rc);

    for (std::int64_t stop : {1, 3, 6, 8, 10}) {
        rc.out = dir / ("part" + std::to_string(stop));
        rc.snapshot = rc.out / "snap.json";
        rc.stop_after = stop;
        cli::cmd_run(rc);
        const auto resumed = cli::cmd_resume({*rc.snapshot, dir / ("resumed" + std::to_string(stop))});
        REQUIRE(resumed.runs.front().state == full.runs.front().state);
        REQUIRE(steps_without_time(resumed.metrics_path) == steps_without_time(full.metrics_path));
        CHECK(io::read_file(resumed.series_path) == io::read_file(full.series_path));
    }

    // A modified stream is refused.
    auto text = io::read_file(dir / "stream" / "chunk_0010.csv");
    write_text(dir / "stream" / "chunk_0010.csv", text + "0.5,0.5,1\n");
    CHECK_THROWS_AS(cli::cmd_resume({dir / "part3" / "snap.json", dir / "x"}), UsageError);
}
