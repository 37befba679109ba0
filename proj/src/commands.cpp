#include "uiclust/commands.hpp"

#include <charconv>
#include <cinttypes>
#include <cstdio>
#include <future>
#include <ostream>
#include <set>

namespace uiclust::cli {

namespace {

std::string hex(std::uint64_t v)
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, v);
    return buf;
}

json point(const Vector<double>& v)
{
    json out = json::array();
    for (Index i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

std::string format_point(const Vector<double>& v, int precision)
{
    std::string out = "(";
    char buf[32];
    for (Index i = 0; i < v.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.*f", precision, v(i));
        out += (i ? ", " : "") + std::string(buf);
    }
    return out + ")";
}

json stream_identity(const io::LoadedStream& s)
{
    return {{"manifest", fs::absolute(s.manifest_path).lexically_normal().string()},
            {"name", s.manifest.name},
            {"origin", s.manifest.origin},
            {"fingerprint", hex(s.fingerprint)},
            {"chunks", s.chunks.size()},
            {"dimensionality", s.manifest.dimensionality}};
}

json config_json(const RunConfig& rc, const DriftConfig& dc)
{
    json j = io::to_json(dc);
    j["k_policy"] = rc.k ? json(*rc.k) : json("labels");
    j["repeat"] = rc.repeat;
    j["out"] = fs::absolute(rc.out).lexically_normal().string();
    if (rc.stop_after) j["stop_after"] = *rc.stop_after;
    return j;
}

/// The run length, in chunks, after applying stop_after.
std::size_t run_length(const std::vector<Chunk<double>>& chunks, std::optional<std::int64_t> stop_after)
{
    if (!stop_after) return chunks.size();
    const std::int64_t first = chunks.front().timestamp;
    if (*stop_after < first) throw UsageError("--stop-after precedes the first timestamp");
    return static_cast<std::size_t>(std::min<std::int64_t>(*stop_after - first + 1, std::ssize(chunks)));
}

bool labelled(const std::vector<Chunk<double>>& chunks)
{
    for (const auto& c : chunks)
        for (const auto& l : c.labels)
            if (!l) return false;
    return true;
}

json tcv_rows(const ClusteringResult<double>& final_main, const std::vector<Chunk<double>>& chunks,
              json& unmatched_labels)
{
    const auto tcvs = true_cluster_values<double>(chunks);
    const auto matching = tcv_distance<double>(final_main, tcvs);
    json rows = json::array();
    for (const auto& p : matching.pairs)
        rows.push_back({{"label", tcvs[p.tcv].label},
                        {"tcv", point(tcvs[p.tcv].centroid)},
                        {"cluster", p.cluster},
                        {"centroid", point(final_main.clusters[static_cast<std::size_t>(p.cluster)].centroid)},
                        {"distance", p.distance}});
    unmatched_labels = json::array();
    for (auto j : matching.unmatched_tcvs) unmatched_labels.push_back(tcvs[j].label);
    return rows;
}

struct Prepared {
    io::LoadedStream stream;
    DriftConfig drift;
    std::vector<Index> ks;
};

Prepared prepare(const RunConfig& config)
{
    config.validate();
    Prepared p{io::load_stream(config.manifest), {}, {}};
    p.drift = drift_config_for(config, p.stream.manifest);
    p.ks = k_schedule(p.stream.chunks, config.k, p.drift.k);
    return p;
}

/// Writes metrics, series and (optionally) the snapshot, and fills the
/// outcome paths.
void publish(RunOutcome& out, const RunConfig& config, const Prepared& p, std::size_t processed,
             const std::optional<EngineState<double>>& snapshot_state)
{
    const std::vector<Chunk<double>> all(p.stream.chunks.begin(), p.stream.chunks.end());
    const auto& final_main = out.runs.front().state.main;

    json finals = json::array();
    for (const auto& c : final_main.clusters) finals.push_back(point(c.centroid));
    out.summary = {{"processed_chunks", processed}, {"final_centroids", finals}};
    if (labelled(all)) {
        json unmatched;
        out.summary["tcv"] = tcv_rows(final_main, all, unmatched);
        out.summary["unmatched_tcv_labels"] = unmatched;
    }

    const json header = {{"stream", stream_identity(p.stream)}, {"config", config_json(config, p.drift)}};
    fs::create_directories(config.out);
    out.metrics_path = config.out / "metrics.jsonl";
    out.series_path = config.out / "series.tsv";
    io::atomic_write(out.metrics_path, io::render_metrics(out.report, header, out.summary));
    io::atomic_write(out.series_path, io::render_series(out.report));

    if (config.snapshot && snapshot_state) {
        json steps = json::array();
        for (const auto& s : out.report.steps) steps.push_back(io::to_json(s));
        json context = header;
        context["steps"] = steps;
        io::atomic_write(*config.snapshot, io::render_snapshot(*snapshot_state, context));
        out.snapshot_path = *config.snapshot;
    }
}

RunConfig config_from_json(const json& header, const fs::path& snapshot)
{
    RunConfig rc;
    const auto& cfg = header.at("config");
    rc.manifest = header.at("stream").at("manifest").get<std::string>();
    if (cfg.at("k_policy").is_number()) rc.k = cfg["k_policy"].get<Index>();
    rc.o_thresh = cfg.at("o_thresh").get<double>();
    rc.d_thresh = cfg.at("d_thresh").get<double>();
    rc.seed = cfg.at("seed").get<std::uint64_t>();
    rc.max_iterations = cfg.at("max_iterations").get<int>();
    rc.repeat = cfg.at("repeat").get<int>();
    rc.out = cfg.at("out").get<std::string>();
    rc.snapshot = snapshot;
    return rc;
}

}  // namespace

void RunConfig::validate() const
{
    if (repeat < 1) throw UsageError("--repeat must be >= 1");
    if (k && *k < 1) throw UsageError("--k must be >= 1");
    if (o_thresh && !(*o_thresh > 0.0 && *o_thresh <= 1.0)) throw UsageError("--o-thresh must lie in (0,1]");
    if (d_thresh && !(*d_thresh > 0.0)) throw UsageError("--d-thresh must be > 0");
    if (max_iterations < 1) throw UsageError("--max-iterations must be >= 1");
    if (out.empty()) throw UsageError("--out is required");
    if (snapshot && repeat != 1) throw UsageError("--snapshot needs --repeat 1");
    if (stop_after && !snapshot) throw UsageError("--stop-after needs --snapshot");
}

DriftConfig drift_config_for(const RunConfig& config, const io::StreamManifest& manifest)
{
    DriftConfig dc;
    dc.k = config.k.value_or(dc.k);
    dc.o_thresh = config.o_thresh.value_or(0.18);
    dc.d_thresh = config.d_thresh.value_or(manifest.real_world() ? 0.4 : 0.6);
    dc.seed = config.seed;
    dc.max_iterations = config.max_iterations;
    dc.validate();
    return dc;
}

std::vector<Index> k_schedule(const std::vector<Chunk<double>>& chunks, std::optional<Index> fixed, Index fallback)
{
    std::vector<Index> ks;
    ks.reserve(chunks.size());
    for (const auto& c : chunks) {
        if (fixed) {
            ks.push_back(*fixed);
            continue;
        }
        std::set<int> distinct;
        bool complete = true;
        for (const auto& l : c.labels) {
            if (!l) complete = false;
            else distinct.insert(*l);
        }
        ks.push_back(complete && !distinct.empty() ? static_cast<Index>(distinct.size()) : fallback);
    }
    return ks;
}

fs::path cmd_gen(const GenOptions& opts)
{
    if (opts.out.empty()) throw UsageError("--out is required");

    StreamSpec<double> spec;
    json spec_json;
    if (fs::exists(opts.stream) && fs::is_regular_file(opts.stream)) {
        try {
            spec_json = json::parse(io::read_file(opts.stream));
        } catch (const json::parse_error& e) {
            throw UsageError(opts.stream + ": invalid JSON: " + e.what());
        }
        spec_json["seed"] = opts.seed;
        spec = io::stream_spec_from_json(spec_json);
    } else {
        spec = builtin_stream<double>(opts.stream, opts.seed);
    }
    spec_json = io::to_json(spec);

    const auto chunks = generate_synthetic(spec);
    io::StreamManifest m;
    m.name = spec.name;
    m.origin = "synthetic";
    m.seed = spec.seed;
    m.spec = spec_json;
    for (Index c = 0; c < spec.anchors.cols(); ++c) m.attributes.push_back("x" + std::to_string(c + 1));
    return io::write_stream(opts.out, chunks, std::move(m));
}

std::vector<std::pair<std::int64_t, LabelDrift>> parse_drift_schedule(std::string_view text)
{
    std::vector<std::pair<std::int64_t, LabelDrift>> out;
    while (!text.empty()) {
        const auto comma = text.find(',');
        const auto item = text.substr(0, comma);
        text = comma == std::string_view::npos ? std::string_view{} : text.substr(comma + 1);
        const auto colon = item.find(':');
        if (colon == std::string_view::npos)
            throw UsageError("drift entry '" + std::string(item) + "' is not of the form <timestamp>:<kind>");
        std::int64_t t = 0;
        const auto ts = item.substr(0, colon);
        const auto [ptr, ec] = std::from_chars(ts.data(), ts.data() + ts.size(), t);
        if (ec != std::errc() || ptr != ts.data() + ts.size() || t < 1)
            throw UsageError("drift entry '" + std::string(item) + "': bad timestamp");
        const auto kind = label_drift_from_string(item.substr(colon + 1));
        if (kind == LabelDrift::None) throw UsageError("drift entry '" + std::string(item) + "': kind is none");
        out.emplace_back(t, kind);
    }
    return out;
}

fs::path cmd_chunk(const ChunkOptions& opts)
{
    if (opts.out.empty()) throw UsageError("--out is required");
    if (opts.bins && *opts.bins < 1) throw UsageError("--bins must be >= 1");

    auto table = io::read_dataset(opts.dataset, opts.delimiter);
    auto& data = table.data;
    if (opts.normalize) data.values = minmax_normalize(data.values);

    std::set<int> classes;
    for (const auto& l : data.labels) classes.insert(*l);
    const int bins = opts.bins.value_or(static_cast<int>(classes.size()));
    if (opts.artificial_classes) data.artificial = make_artificial_classes(data.values, {bins, opts.binning});

    auto chunks = chunk_dataset(data, opts.chunks);
    json drift_json = json::array();
    if (!opts.drifts.empty()) {
        std::vector<LabelDrift> schedule(chunks.size(), LabelDrift::None);
        for (const auto& [t, kind] : opts.drifts) {
            if (t > std::ssize(chunks))
                throw UsageError("drift at t=" + std::to_string(t) + " but the stream has " +
                                 std::to_string(chunks.size()) + " chunks");
            schedule[static_cast<std::size_t>(t - 1)] = kind;
            drift_json.push_back({{"timestamp", t}, {"kind", std::string(to_string(kind))}});
        }
        chunks = apply_label_drift(std::move(chunks), std::span<const LabelDrift>(schedule), opts.seed);
    }

    io::StreamManifest m;
    m.name = opts.name.empty() ? opts.dataset.stem().string() : opts.name;
    m.origin = "real-world";
    m.attributes = table.attributes;
    if (!opts.drifts.empty()) m.seed = opts.seed;
    m.spec = {{"source", opts.dataset.filename().string()},
              {"records", data.size()},
              {"classes", classes.size()},
              {"chunks", opts.chunks},
              {"normalize", opts.normalize},
              {"artificial_classes", opts.artificial_classes},
              {"bins", bins},
              {"binning", opts.binning == BinningMethod::EqualFrequency ? "equal-frequency" : "equal-width"},
              {"label_drift", drift_json}};
    return io::write_stream(opts.out, chunks, std::move(m));
}

RunOutcome cmd_run(const RunConfig& config)
{
    const auto p = prepare(config);
    const auto& chunks = p.stream.chunks;
    const std::size_t n = run_length(chunks, config.stop_after);
    const std::span<const Chunk<double>> window(chunks.data(), n);
    const std::span<const Index> ks(p.ks.data(), n);

    auto one = [&](int r) {
        DriftConfig dc = p.drift;
        dc.seed = p.drift.seed + static_cast<std::uint64_t>(r);
        return run<double>(window, dc, ks);
    };

    RunOutcome out;
    out.runs.resize(static_cast<std::size_t>(config.repeat));
    if (config.parallel && config.repeat > 1) {
        std::vector<std::future<RunResult<double>>> jobs;
        for (int r = 0; r < config.repeat; ++r) jobs.push_back(std::async(std::launch::async, one, r));
        for (int r = 0; r < config.repeat; ++r) out.runs[static_cast<std::size_t>(r)] = jobs[static_cast<std::size_t>(r)].get();
    } else {
        for (int r = 0; r < config.repeat; ++r) out.runs[static_cast<std::size_t>(r)] = one(r);
    }

    std::vector<MetricsReport> reports;
    for (const auto& r : out.runs)
        reports.push_back(evaluate_run<double>(r.reports, window));
    out.report = average(reports);

    publish(out, config, p, n, out.runs.front().state);
    return out;
}

RunOutcome cmd_resume(const ResumeOptions& opts)
{
    auto [state, context] = io::parse_snapshot(io::read_file(opts.snapshot));
    RunConfig config = config_from_json(context, opts.snapshot);
    if (opts.out) config.out = *opts.out;
    const auto p = prepare(config);

    const auto expected = context.at("stream").at("fingerprint").get<std::string>();
    if (hex(p.stream.fingerprint) != expected)
        throw UsageError("stream at " + config.manifest.string() + " changed since the snapshot was taken (fingerprint " +
                         hex(p.stream.fingerprint) + ", snapshot expects " + expected + ")");
    if (state.config != p.drift) throw UsageError("snapshot engine configuration does not match its run context");

    const auto& chunks = p.stream.chunks;
    const std::int64_t first = chunks.front().timestamp;
    const auto done = static_cast<std::size_t>(state.timestamp - first + 1);
    if (state.timestamp < first || done > chunks.size())
        throw UsageError("snapshot timestamp " + std::to_string(state.timestamp) + " lies outside the stream");

    RunOutcome out;
    out.runs.resize(1);
    auto& result = out.runs.front();
    result.state = state;
    for (std::size_t i = done; i < chunks.size(); ++i) {
        auto [next, report] = step(result.state, chunks[i].values, chunks[i].timestamp, p.ks[i]);
        result.state = std::move(next);
        result.reports.push_back(std::move(report));
    }

    const std::span<const Chunk<double>> rest(chunks.data() + done, chunks.size() - done);
    auto tail = evaluate_run<double>(result.reports, rest);
    for (const auto& s : context.at("steps")) out.report.steps.push_back(io::timestamp_metrics_from_json(s));
    out.report.steps.insert(out.report.steps.end(), tail.steps.begin(), tail.steps.end());
    recompute_means(out.report);

    config.stop_after.reset();
    publish(out, config, p, chunks.size(), result.state);
    return out;
}

TcvMatching<double> cmd_eval(const fs::path& manifest, const fs::path& metrics, std::ostream& os)
{
    const auto stream = io::load_stream(manifest);
    const auto parsed = io::parse_metrics(io::read_file(metrics));

    const auto& id = parsed.header.value("stream", json::object());
    const auto recorded = id.value("fingerprint", std::string());
    if (recorded != hex(stream.fingerprint))
        throw UsageError("metrics " + metrics.string() + " were produced from stream '" + id.value("name", std::string("?")) +
                         "' (fingerprint " + recorded + "), not from " + manifest.string() + " (fingerprint " +
                         hex(stream.fingerprint) + ")");
    if (!labelled(stream.chunks)) throw UsageError("eval: stream '" + stream.manifest.name + "' has unlabeled records");
    if (!parsed.summary.contains("final_centroids")) throw UsageError("eval: metrics carry no final centroids");

    ClusteringResult<double> final_main;
    for (const auto& c : parsed.summary["final_centroids"]) {
        ClusterSummary<double> s;
        s.centroid.resize(static_cast<Index>(c.size()));
        for (std::size_t i = 0; i < c.size(); ++i) s.centroid(static_cast<Index>(i)) = c[i].get<double>();
        detail::require_same_dimension(s.centroid.size(), stream.manifest.dimensionality, "eval");
        final_main.clusters.push_back(std::move(s));
    }

    const auto tcvs = true_cluster_values<double>(stream.chunks);
    const auto matching = tcv_distance<double>(final_main, tcvs);

    const auto processed = parsed.summary.value("processed_chunks", std::size_t{0});
    os << "stream " << stream.manifest.name << ": " << processed << " of " << stream.chunks.size()
       << " chunks processed, " << final_main.clusters.size() << " final clusters, " << tcvs.size() << " classes\n";

    char line[256];
    std::snprintf(line, sizeof line, "%-6s %-24s %-24s %9s %10s\n", "class", "TCV", "discovered", "distance", "exact");
    os << line;
    double total = 0.0;
    for (const auto& pr : matching.pairs) {
        const auto& t = tcvs[pr.tcv];
        std::snprintf(line, sizeof line, "%-6d %-24s %-24s %9.2f %10.6f\n", t.label, format_point(t.centroid, 3).c_str(),
                      format_point(final_main.clusters[static_cast<std::size_t>(pr.cluster)].centroid, 3).c_str(),
                      pr.distance, pr.distance);
        os << line;
        total += pr.distance;
    }
    for (auto j : matching.unmatched_tcvs) {
        std::snprintf(line, sizeof line, "%-6d %-24s %-24s %9s %10s\n", tcvs[j].label,
                      format_point(tcvs[j].centroid, 3).c_str(), "-", "unmatched", "-");
        os << line;
    }
    for (auto c : matching.unmatched_clusters)
        os << "cluster " << c << " " << format_point(final_main.clusters[static_cast<std::size_t>(c)].centroid, 3)
           << " has no class\n";
    if (!matching.pairs.empty()) {
        std::snprintf(line, sizeof line, "mean distance %.4f over %zu matched classes\n",
                      total / static_cast<double>(matching.pairs.size()), matching.pairs.size());
        os << line;
    }

    const auto& s = parsed.summary;
    auto num = [&](const char* key) -> std::string {
        if (!s.contains(key) || s[key].is_null()) return "n/a";
        std::snprintf(line, sizeof line, "%.4f", s[key].get<double>());
        return line;
    };
    os << "mean entropy " << num("mean_entropy") << ", mean SSE " << num("mean_sse") << ", runtime "
       << num("total_runtime_seconds") << " s over " << s.value("runs", 1) << " run(s)\n";
    return matching;
}

}  // namespace uiclust::cli
