#ifndef UICLUST_IO_HPP
#define UICLUST_IO_HPP

#include "engine.hpp"
#include "evaluation.hpp"
#include "streamgen.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <string_view>

namespace uiclust {

inline constexpr std::string_view version = "0.1.0";

namespace io {

namespace fs = std::filesystem;
using json = nlohmann::json;

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);
double parse_double(std::string_view text);

/// Writes to `path` through a sibling temporary file and a rename, so a failed
/// write never leaves a partial file behind.
void atomic_write(const fs::path& path, std::string_view content);
std::string read_file(const fs::path& path);

std::uint64_t fingerprint(std::string_view text);

// ---- raw datasets -------------------------------------------------------

/// Delimiter-separated table with the class label in the last column. A
/// first row that does not parse as numbers is taken as a header. With no
/// explicit delimiter, ';' is used when the first line contains one, else ','.
struct RawTable {
    Dataset<double> data;
    std::vector<std::string> attributes;
};
RawTable read_dataset(const fs::path& path, std::optional<char> delimiter = std::nullopt);

// ---- stream files -------------------------------------------------------

struct ChunkEntry {
    std::int64_t timestamp = 0;
    std::string file;
    Index records = 0;
};

struct StreamManifest {
    std::string name;
    std::string origin = "synthetic";  ///< "synthetic" or "real-world"
    std::optional<std::uint64_t> seed;
    json spec;  ///< generator spec or chunking parameters; null when absent
    Index dimensionality = 0;
    std::vector<std::string> attributes;
    Index artificial_class_sets = 0;
    std::vector<ChunkEntry> chunks;

    bool real_world() const { return origin == "real-world"; }
};

json to_json(const StreamManifest& m);
StreamManifest manifest_from_json(const json& j);
std::string render_manifest(const StreamManifest& m);

std::string render_chunk_csv(const Chunk<double>& chunk, const std::vector<std::string>& attributes);
Chunk<double> parse_chunk_csv(std::string_view text, std::int64_t timestamp, const std::string& origin_for_errors);

/// Writes one CSV per chunk plus `manifest.json` into `dir`; returns the
/// manifest path. Chunk file names and the dimensionality are filled in.
fs::path write_stream(const fs::path& dir, const std::vector<Chunk<double>>& chunks, StreamManifest manifest);

struct LoadedStream {
    fs::path manifest_path;
    StreamManifest manifest;
    std::vector<Chunk<double>> chunks;
    std::uint64_t fingerprint = 0;
};
LoadedStream load_stream(const fs::path& manifest_path);

json to_json(const StreamSpec<double>& spec);
StreamSpec<double> stream_spec_from_json(const json& j);

// ---- engine snapshots ---------------------------------------------------

json to_json(const ClusteringResult<double>& r);
ClusteringResult<double> clustering_from_json(const json& j);
json to_json(const DriftConfig& c);
DriftConfig drift_config_from_json(const json& j);
json to_json(const EngineState<double>& s);
EngineState<double> engine_state_from_json(const json& j);

/// Versioned snapshot document: engine state plus caller context (run
/// configuration, stream identity).
std::string render_snapshot(const EngineState<double>& state, const json& context);
std::pair<EngineState<double>, json> parse_snapshot(std::string_view text);

// ---- metrics ------------------------------------------------------------

json to_json(const TimestampMetrics& m);
TimestampMetrics timestamp_metrics_from_json(const json& j);

/// JSON lines: a header record (tool, stream identity, configuration), one
/// record per timestamp, then a summary record merged with `summary_extra`.
std::string render_metrics(const MetricsReport& report, const json& header, const json& summary_extra);

struct ParsedMetrics {
    json header;
    std::vector<json> steps;
    json summary;
};
ParsedMetrics parse_metrics(std::string_view text);

/// Tab-separated timestamp and discovered cluster count, with a header line.
std::string render_series(const MetricsReport& report);

}  // namespace io
}  // namespace uiclust

#endif  // UICLUST_IO_HPP
