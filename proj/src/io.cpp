#include "uiclust/io.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>
#include <system_error>

namespace uiclust::io {

namespace {

constexpr int stream_format_version = 1;
constexpr int snapshot_format_version = 1;
constexpr int metrics_format_version = 1;

std::string_view trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    s = s.substr(first, last - first + 1);
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
    return s;
}

std::vector<std::string_view> split(std::string_view line, char delim)
{
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(delim, start);
        if (pos == std::string_view::npos) {
            fields.push_back(trim(line.substr(start)));
            return fields;
        }
        fields.push_back(trim(line.substr(start, pos - start)));
        start = pos + 1;
    }
}

std::vector<std::string_view> lines_of(std::string_view text)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (start < text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        auto line = text.substr(start, end - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        out.push_back(line);
        start = end + 1;
    }
    return out;
}

bool try_parse_double(std::string_view text, double& out)
{
    if (text.empty()) return false;
    if (text.front() == '+') text.remove_prefix(1);
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, out);
    return ec == std::errc() && ptr == end;
}

int parse_label(std::string_view text, const std::string& where)
{
    double v = 0.0;
    if (!try_parse_double(text, v) || v != std::floor(v) || std::abs(v) > 1e9)
        throw UsageError(where + ": class label '" + std::string(text) + "' is not an integer");
    return static_cast<int>(v);
}

template <typename T>
T require(const json& j, const char* key, const std::string& what)
{
    if (!j.is_object() || !j.contains(key)) throw UsageError(what + ": missing field '" + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw UsageError(what + ": bad field '" + std::string(key) + "': " + e.what());
    }
}

json vector_to_json(const Vector<double>& v)
{
    json out = json::array();
    for (Index i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

Vector<double> vector_from_json(const json& j, const std::string& what)
{
    if (!j.is_array()) throw UsageError(what + ": expected an array of numbers");
    Vector<double> v(static_cast<Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) throw UsageError(what + ": expected an array of numbers");
        v(static_cast<Index>(i)) = j[i].get<double>();
    }
    return v;
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

std::string format_double(double v)
{
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc()) throw std::runtime_error("format_double: conversion failed");
    return std::string(buf, ptr);
}

double parse_double(std::string_view text)
{
    double v = 0.0;
    if (!try_parse_double(trim(text), v)) throw UsageError("not a number: '" + std::string(text) + "'");
    return v;
}

void atomic_write(const fs::path& path, std::string_view content)
{
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            out.close();
            std::error_code ignored;
            fs::remove(tmp, ignored);
            throw std::runtime_error("write failed: " + tmp.string());
        }
    }
    fs::rename(tmp, path);
}

std::string read_file(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::uint64_t fingerprint(std::string_view text)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

RawTable read_dataset(const fs::path& path, std::optional<char> delimiter)
{
    const std::string text = read_file(path);
    const auto lines = lines_of(text);
    const std::string where = path.string();

    std::size_t first = 0;
    while (first < lines.size() && trim(lines[first]).empty()) ++first;
    if (first == lines.size()) throw UsageError(where + ": empty file");

    const char delim = delimiter.value_or(lines[first].find(';') != std::string_view::npos ? ';' : ',');

    RawTable out;
    std::vector<std::vector<double>> rows;
    std::size_t columns = 0;
    bool header_checked = false;
    for (std::size_t i = first; i < lines.size(); ++i) {
        if (trim(lines[i]).empty()) continue;
        const auto fields = split(lines[i], delim);
        const std::string at = where + ":" + std::to_string(i + 1);

        if (!header_checked) {
            header_checked = true;
            columns = fields.size();
            if (columns < 2) throw UsageError(at + ": need at least one attribute and a class column");
            double probe = 0.0;
            const bool numeric = std::all_of(fields.begin(), fields.end(),
                                             [&](std::string_view f) { return try_parse_double(f, probe); });
            if (!numeric) {
                for (std::size_t c = 0; c + 1 < fields.size(); ++c) out.attributes.emplace_back(fields[c]);
                continue;
            }
        }
        if (fields.size() != columns)
            throw UsageError(at + ": expected " + std::to_string(columns) + " fields, found " +
                             std::to_string(fields.size()));

        std::vector<double> row(columns - 1);
        for (std::size_t c = 0; c + 1 < columns; ++c)
            if (!try_parse_double(fields[c], row[c]))
                throw UsageError(at + ": field " + std::to_string(c + 1) + " '" + std::string(fields[c]) +
                                 "' is not a number");
        out.data.labels.emplace_back(parse_label(fields.back(), at));
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw UsageError(where + ": no data rows");

    const auto dim = static_cast<Index>(columns - 1);
    out.data.values.resize(static_cast<Index>(rows.size()), dim);
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (Index c = 0; c < dim; ++c) out.data.values(static_cast<Index>(r), c) = rows[r][static_cast<std::size_t>(c)];
    if (out.attributes.empty())
        for (Index c = 0; c < dim; ++c) out.attributes.push_back("a" + std::to_string(c + 1));
    return out;
}

// ---- stream files ---------------------------------------------------------

json to_json(const StreamManifest& m)
{
    json chunks = json::array();
    for (const auto& c : m.chunks) chunks.push_back({{"timestamp", c.timestamp}, {"file", c.file}, {"records", c.records}});
    return {{"format", "uiclust-stream"},
            {"version", stream_format_version},
            {"tool", std::string(version)},
            {"name", m.name},
            {"origin", m.origin},
            {"seed", m.seed ? json(*m.seed) : json(nullptr)},
            {"spec", m.spec},
            {"dimensionality", m.dimensionality},
            {"attributes", m.attributes},
            {"artificial_class_sets", m.artificial_class_sets},
            {"chunks", chunks}};
}

StreamManifest manifest_from_json(const json& j)
{
    const std::string what = "manifest";
    if (require<std::string>(j, "format", what) != "uiclust-stream") throw UsageError("not a uiclust stream manifest");
    const int v = require<int>(j, "version", what);
    if (v != stream_format_version)
        throw UsageError("unsupported manifest version " + std::to_string(v) + " (this build reads " +
                         std::to_string(stream_format_version) + ")");

    StreamManifest m;
    m.name = require<std::string>(j, "name", what);
    m.origin = require<std::string>(j, "origin", what);
    if (m.origin != "synthetic" && m.origin != "real-world")
        throw UsageError("manifest: origin must be 'synthetic' or 'real-world'");
    if (j.contains("seed") && !j["seed"].is_null()) m.seed = require<std::uint64_t>(j, "seed", what);
    m.spec = j.value("spec", json(nullptr));
    m.dimensionality = require<Index>(j, "dimensionality", what);
    m.attributes = require<std::vector<std::string>>(j, "attributes", what);
    m.artificial_class_sets = j.value("artificial_class_sets", Index{0});
    if (!j.contains("chunks") || !j["chunks"].is_array()) throw UsageError("manifest: missing chunk list");
    for (const auto& c : j["chunks"])
        m.chunks.push_back({require<std::int64_t>(c, "timestamp", "manifest chunk"),
                            require<std::string>(c, "file", "manifest chunk"),
                            require<Index>(c, "records", "manifest chunk")});
    if (m.chunks.empty()) throw UsageError("manifest: no chunks");
    return m;
}

std::string render_manifest(const StreamManifest& m) { return to_json(m).dump(2) + "\n"; }

std::string render_chunk_csv(const Chunk<double>& chunk, const std::vector<std::string>& attributes)
{
    if (static_cast<Index>(attributes.size()) != chunk.dimension())
        throw UsageError("render_chunk_csv: attribute count does not match the chunk");
    std::string out;
    for (const auto& a : attributes) out += a + ",";
    out += "label";
    for (Index j = 0; j < chunk.artificial.cols(); ++j) out += ",ac" + std::to_string(j + 1);
    out += "\n";
    for (Index i = 0; i < chunk.size(); ++i) {
        for (Index j = 0; j < chunk.dimension(); ++j) out += format_double(chunk.values(i, j)) + ",";
        const auto& l = chunk.labels[static_cast<std::size_t>(i)];
        if (l) out += std::to_string(*l);
        for (Index j = 0; j < chunk.artificial.cols(); ++j) out += "," + std::to_string(chunk.artificial(i, j));
        out += "\n";
    }
    return out;
}

Chunk<double> parse_chunk_csv(std::string_view text, std::int64_t timestamp, const std::string& origin_for_errors)
{
    const auto lines = lines_of(text);
    if (lines.empty()) throw UsageError(origin_for_errors + ": empty chunk file");
    const auto header = split(lines[0], ',');
    const auto label_at = std::find(header.begin(), header.end(), "label");
    if (label_at == header.end()) throw UsageError(origin_for_errors + ": header has no 'label' column");
    const auto dim = static_cast<Index>(label_at - header.begin());
    const auto artificial = static_cast<Index>(header.size()) - dim - 1;
    if (dim == 0) throw UsageError(origin_for_errors + ": no attribute columns");

    std::vector<std::string_view> body;
    for (std::size_t i = 1; i < lines.size(); ++i)
        if (!trim(lines[i]).empty()) body.push_back(lines[i]);

    Chunk<double> chunk;
    chunk.timestamp = timestamp;
    chunk.values.resize(static_cast<Index>(body.size()), dim);
    chunk.artificial.resize(artificial > 0 ? static_cast<Index>(body.size()) : 0, artificial);
    for (std::size_t r = 0; r < body.size(); ++r) {
        const auto fields = split(body[r], ',');
        const std::string at = origin_for_errors + ": data row " + std::to_string(r + 1);
        if (fields.size() != header.size())
            throw UsageError(at + ": expected " + std::to_string(header.size()) + " fields, found " +
                             std::to_string(fields.size()));
        const auto row = static_cast<Index>(r);
        for (Index j = 0; j < dim; ++j) {
            double v = 0.0;
            if (!try_parse_double(fields[static_cast<std::size_t>(j)], v))
                throw UsageError(at + ": attribute " + std::to_string(j + 1) + " is not a number");
            chunk.values(row, j) = v;
        }
        const auto lf = fields[static_cast<std::size_t>(dim)];
        chunk.labels.push_back(lf.empty() ? Label{} : Label{parse_label(lf, at)});
        for (Index j = 0; j < artificial; ++j)
            chunk.artificial(row, j) = parse_label(fields[static_cast<std::size_t>(dim + 1 + j)], at);
    }
    return chunk;
}

fs::path write_stream(const fs::path& dir, const std::vector<Chunk<double>>& chunks, StreamManifest manifest)
{
    if (chunks.empty()) throw UsageError("write_stream: no chunks");
    fs::create_directories(dir);
    const Index dim = chunks.front().dimension();
    manifest.dimensionality = dim;
    if (manifest.attributes.empty())
        for (Index c = 0; c < dim; ++c) manifest.attributes.push_back("a" + std::to_string(c + 1));
    manifest.artificial_class_sets = chunks.front().artificial.cols();
    manifest.chunks.clear();
    for (std::size_t i = 0; i < chunks.size(); ++i) {
        const auto& c = chunks[i];
        detail::require_same_dimension(c.dimension(), dim, "write_stream");
        char name[32];
        std::snprintf(name, sizeof name, "chunk_%04zu.csv", i + 1);
        atomic_write(dir / name, render_chunk_csv(c, manifest.attributes));
        manifest.chunks.push_back({c.timestamp, name, c.size()});
    }
    const auto path = dir / "manifest.json";
    atomic_write(path, render_manifest(manifest));
    return path;
}

LoadedStream load_stream(const fs::path& manifest_path)
{
    LoadedStream out;
    out.manifest_path = manifest_path;
    const std::string text = read_file(manifest_path);
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw UsageError(manifest_path.string() + ": invalid JSON: " + e.what());
    }
    out.manifest = manifest_from_json(j);

    std::uint64_t h = fingerprint(text);
    const auto base = manifest_path.parent_path();
    std::int64_t expected = out.manifest.chunks.front().timestamp;
    for (const auto& entry : out.manifest.chunks) {
        if (entry.timestamp != expected)
            throw UsageError("manifest: chunk timestamps must be consecutive (expected " + std::to_string(expected) +
                             ", found " + std::to_string(entry.timestamp) + ")");
        ++expected;
        const auto path = base / entry.file;
        const std::string body = read_file(path);
        h ^= fingerprint(body) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        auto chunk = parse_chunk_csv(body, entry.timestamp, path.string());
        if (chunk.size() != entry.records)
            throw UsageError(path.string() + ": manifest lists " + std::to_string(entry.records) + " records, file has " +
                             std::to_string(chunk.size()));
        if (chunk.dimension() != out.manifest.dimensionality)
            throw UsageError(path.string() + ": dimensionality " + std::to_string(chunk.dimension()) +
                             " does not match the manifest (" + std::to_string(out.manifest.dimensionality) + ")");
        out.chunks.push_back(std::move(chunk));
    }
    out.fingerprint = h;
    return out;
}

json to_json(const StreamSpec<double>& spec)
{
    json anchors = json::array();
    for (Index i = 0; i < spec.anchors.rows(); ++i) anchors.push_back(vector_to_json(spec.anchors.row(i).transpose()));
    json entries = json::array();
    for (const auto& e : spec.entries)
        entries.push_back({{"clusters", e.cluster_count},
                           {"chunk_size", e.chunk_size},
                           {"geometry", std::string(to_string(e.geometry))},
                           {"label_drift", std::string(to_string(e.label_drift))}});
    return {{"name", spec.name},  {"anchors", anchors}, {"offset", vector_to_json(spec.offset)},
            {"sigma", spec.sigma}, {"seed", spec.seed},  {"entries", entries}};
}

StreamSpec<double> stream_spec_from_json(const json& j)
{
    const std::string what = "stream spec";
    StreamSpec<double> s;
    s.name = require<std::string>(j, "name", what);
    if (!j.contains("anchors") || !j["anchors"].is_array() || j["anchors"].empty())
        throw UsageError(what + ": 'anchors' must be a non-empty array of points");
    const auto& anchors = j["anchors"];
    for (std::size_t i = 0; i < anchors.size(); ++i) {
        const auto row = vector_from_json(anchors[i], what + " anchor " + std::to_string(i + 1));
        if (i == 0) s.anchors.resize(static_cast<Index>(anchors.size()), row.size());
        if (row.size() != s.anchors.cols()) throw UsageError(what + ": anchors differ in dimensionality");
        s.anchors.row(static_cast<Index>(i)) = row.transpose();
    }
    s.offset = j.contains("offset") ? vector_from_json(j["offset"], what + " offset")
                                    : Vector<double>::Zero(s.anchors.cols());
    s.sigma = j.value("sigma", s.sigma);
    s.seed = j.value("seed", s.seed);
    if (!j.contains("entries") || !j["entries"].is_array()) throw UsageError(what + ": missing 'entries'");
    for (const auto& e : j["entries"]) {
        StreamEntry entry;
        entry.cluster_count = require<Index>(e, "clusters", what + " entry");
        entry.chunk_size = e.value("chunk_size", entry.chunk_size);
        entry.geometry = geometry_from_string(e.value("geometry", std::string("none")));
        entry.label_drift = label_drift_from_string(e.value("label_drift", std::string("none")));
        const int repeat = e.value("repeat", 1);
        if (repeat < 1) throw UsageError(what + ": repeat must be >= 1");
        for (int r = 0; r < repeat; ++r) s.entries.push_back(entry);
    }
    s.validate();
    return s;
}

// ---- engine snapshots -----------------------------------------------------

json to_json(const ClusteringResult<double>& r)
{
    json clusters = json::array();
    for (const auto& c : r.clusters)
        clusters.push_back({{"centroid", vector_to_json(c.centroid)},
                            {"radius", c.radius},
                            {"lifetime_count", c.lifetime_count},
                            {"chunk_count", c.chunk_count}});
    return {{"clusters", clusters}, {"outliers", r.outliers}, {"timestamp", r.timestamp}};
}

ClusteringResult<double> clustering_from_json(const json& j)
{
    const std::string what = "clustering";
    ClusteringResult<double> r;
    r.outliers = require<std::int64_t>(j, "outliers", what);
    r.timestamp = require<std::int64_t>(j, "timestamp", what);
    if (!j.contains("clusters") || !j["clusters"].is_array()) throw UsageError(what + ": missing clusters");
    for (const auto& c : j["clusters"]) {
        ClusterSummary<double> s;
        s.centroid = vector_from_json(c.at("centroid"), what + " centroid");
        s.radius = require<double>(c, "radius", what);
        s.lifetime_count = require<std::int64_t>(c, "lifetime_count", what);
        s.chunk_count = require<std::int64_t>(c, "chunk_count", what);
        if (!r.clusters.empty()) detail::require_same_dimension(s.centroid.size(), r.dimension(), "snapshot");
        r.clusters.push_back(std::move(s));
    }
    if (r.clusters.empty()) throw UsageError(what + ": no clusters");
    return r;
}

json to_json(const DriftConfig& c)
{
    return {{"k", c.k},
            {"o_thresh", c.o_thresh},
            {"d_thresh", c.d_thresh},
            {"seed", c.seed},
            {"max_iterations", c.max_iterations}};
}

DriftConfig drift_config_from_json(const json& j)
{
    const std::string what = "config";
    DriftConfig c;
    c.k = require<Index>(j, "k", what);
    c.o_thresh = require<double>(j, "o_thresh", what);
    c.d_thresh = require<double>(j, "d_thresh", what);
    c.seed = require<std::uint64_t>(j, "seed", what);
    c.max_iterations = require<int>(j, "max_iterations", what);
    c.validate();
    return c;
}

json to_json(const EngineState<double>& s)
{
    json parallel = nullptr;
    if (s.parallel) parallel = {{"result", to_json(s.parallel->result)}, {"strike", s.parallel->strike}};
    return {{"main", to_json(s.main)},
            {"parallel", parallel},
            {"is_concept_drift", s.is_concept_drift},
            {"timestamp", s.timestamp},
            {"config", to_json(s.config)}};
}

EngineState<double> engine_state_from_json(const json& j)
{
    const std::string what = "engine state";
    EngineState<double> s;
    s.main = clustering_from_json(j.at("main"));
    if (j.contains("parallel") && !j["parallel"].is_null()) {
        ParallelState<double> p;
        p.result = clustering_from_json(j["parallel"].at("result"));
        p.strike = require<int>(j["parallel"], "strike", what);
        detail::require_same_dimension(p.result.dimension(), s.main.dimension(), "snapshot");
        s.parallel = std::move(p);
    }
    s.is_concept_drift = require<bool>(j, "is_concept_drift", what);
    s.timestamp = require<std::int64_t>(j, "timestamp", what);
    s.config = drift_config_from_json(j.at("config"));
    return s;
}

std::string render_snapshot(const EngineState<double>& state, const json& context)
{
    json doc = {{"format", "uiclust-snapshot"},
                {"version", snapshot_format_version},
                {"tool", std::string(version)},
                {"state", to_json(state)},
                {"context", context}};
    return doc.dump(2) + "\n";
}

std::pair<EngineState<double>, json> parse_snapshot(std::string_view text)
{
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw UsageError(std::string("snapshot: invalid JSON: ") + e.what());
    }
    if (require<std::string>(doc, "format", "snapshot") != "uiclust-snapshot")
        throw UsageError("not a uiclust snapshot");
    const int v = require<int>(doc, "version", "snapshot");
    if (v != snapshot_format_version)
        throw UsageError("unsupported snapshot version " + std::to_string(v) + " (this build reads " +
                         std::to_string(snapshot_format_version) + ")");
    try {
        return {engine_state_from_json(doc.at("state")), doc.value("context", json::object())};
    } catch (const json::exception& e) {
        throw UsageError(std::string("snapshot: ") + e.what());
    }
}

// ---- metrics --------------------------------------------------------------

json to_json(const TimestampMetrics& m)
{
    return {{"type", "step"},
            {"timestamp", m.timestamp},
            {"entropy", optional_number(m.entropy)},
            {"entropy_artificial", optional_number(m.entropy_artificial)},
            {"sse", m.sse},
            {"cluster_count", m.cluster_count},
            {"outliers", m.outliers},
            {"duration_seconds", m.duration_seconds},
            {"activated", m.activated},
            {"stabilized", m.stabilized},
            {"swapped", m.swapped},
            {"parallel_active", m.parallel_active},
            {"strike", m.strike},
            {"drift_cause", m.drift_cause}};
}

TimestampMetrics timestamp_metrics_from_json(const json& j)
{
    const std::string what = "metrics step";
    auto opt = [&](const char* key) -> std::optional<double> {
        if (!j.contains(key) || j[key].is_null()) return std::nullopt;
        return require<double>(j, key, what);
    };
    TimestampMetrics m;
    m.timestamp = require<std::int64_t>(j, "timestamp", what);
    m.entropy = opt("entropy");
    m.entropy_artificial = opt("entropy_artificial");
    m.sse = require<double>(j, "sse", what);
    m.cluster_count = require<double>(j, "cluster_count", what);
    m.outliers = require<double>(j, "outliers", what);
    m.duration_seconds = require<double>(j, "duration_seconds", what);
    m.activated = require<bool>(j, "activated", what);
    m.stabilized = require<bool>(j, "stabilized", what);
    m.swapped = require<bool>(j, "swapped", what);
    m.parallel_active = require<bool>(j, "parallel_active", what);
    m.strike = require<int>(j, "strike", what);
    m.drift_cause = require<std::string>(j, "drift_cause", what);
    return m;
}

std::string render_metrics(const MetricsReport& report, const json& header, const json& summary_extra)
{
    json head = {{"type", "header"},
                 {"format", "uiclust-metrics"},
                 {"version", metrics_format_version},
                 {"tool", std::string(version)}};
    head.update(header);
    std::string out = head.dump() + "\n";

    for (const auto& s : report.steps) out += to_json(s).dump() + "\n";

    json summary = {{"type", "summary"},
                    {"mean_entropy", optional_number(report.mean_entropy)},
                    {"mean_entropy_artificial", optional_number(report.mean_entropy_artificial)},
                    {"mean_sse", report.mean_sse},
                    {"total_runtime_seconds", report.total_runtime_seconds},
                    {"runs", report.runs}};
    summary.update(summary_extra);
    out += summary.dump() + "\n";
    return out;
}

ParsedMetrics parse_metrics(std::string_view text)
{
    ParsedMetrics out;
    bool have_header = false, have_summary = false;
    std::size_t n = 0;
    for (const auto line : lines_of(text)) {
        ++n;
        if (trim(line).empty()) continue;
        json rec;
        try {
            rec = json::parse(line);
        } catch (const json::parse_error& e) {
            throw UsageError("metrics line " + std::to_string(n) + ": invalid JSON: " + e.what());
        }
        const auto type = rec.value("type", std::string());
        if (type == "header") {
            if (rec.value("format", std::string()) != "uiclust-metrics") throw UsageError("not a uiclust metrics file");
            out.header = std::move(rec);
            have_header = true;
        } else if (type == "step") {
            out.steps.push_back(std::move(rec));
        } else if (type == "summary") {
            out.summary = std::move(rec);
            have_summary = true;
        } else {
            throw UsageError("metrics line " + std::to_string(n) + ": unknown record type '" + type + "'");
        }
    }
    if (!have_header) throw UsageError("metrics: missing header record");
    if (!have_summary) throw UsageError("metrics: missing summary record (truncated file?)");
    return out;
}

std::string render_series(const MetricsReport& report)
{
    std::string out = "timestamp\tcluster_count\n";
    for (const auto& s : report.steps)
        out += std::to_string(s.timestamp) + "\t" + format_double(s.cluster_count) + "\n";
    return out;
}

}  // namespace uiclust::io
