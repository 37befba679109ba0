#ifndef UICLUST_COMMANDS_HPP
#define UICLUST_COMMANDS_HPP

#include "io.hpp"

#include <iosfwd>

namespace uiclust::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

/// Seed used whenever --seed is not given.
inline constexpr std::uint64_t default_seed = 42;

struct GenOptions {
    std::string stream;  ///< built-in name or a JSON spec file
    std::uint64_t seed = default_seed;
    fs::path out;
};

/// Generates a stream into opts.out and returns the manifest path.
fs::path cmd_gen(const GenOptions& opts);

struct ChunkOptions {
    fs::path dataset;
    fs::path out;
    Index chunks = 10;
    bool normalize = true;
    bool artificial_classes = false;
    /// Bins per attribute; defaults to the number of distinct class labels.
    std::optional<int> bins;
    BinningMethod binning = BinningMethod::EqualFrequency;
    /// Label drift injected at the given timestamps.
    std::vector<std::pair<std::int64_t, LabelDrift>> drifts;
    std::uint64_t seed = default_seed;
    std::optional<char> delimiter;
    std::string name;  ///< defaults to the dataset file stem
};

/// Parses "3:temporary,6:sustained".
std::vector<std::pair<std::int64_t, LabelDrift>> parse_drift_schedule(std::string_view text);

fs::path cmd_chunk(const ChunkOptions& opts);

struct RunConfig {
    fs::path manifest;
    /// Fixed k for every chunk; empty means one cluster per distinct class
    /// label in the chunk.
    std::optional<Index> k;
    std::optional<double> o_thresh;
    std::optional<double> d_thresh;  ///< default depends on the stream origin
    std::uint64_t seed = default_seed;
    int max_iterations = 100;
    int repeat = 1;
    fs::path out;
    std::optional<fs::path> snapshot;
    /// Stop after this timestamp (requires a snapshot path to be useful).
    std::optional<std::int64_t> stop_after;
    /// Run the repeats on separate threads.
    bool parallel = false;

    void validate() const;
};

struct RunOutcome {
    MetricsReport report;  ///< averaged over the repeats
    std::vector<RunResult<double>> runs;
    fs::path metrics_path;
    fs::path series_path;
    std::optional<fs::path> snapshot_path;
    json summary;  ///< the summary record as written
};

/// Resolves the thresholds of `config` against the stream origin.
DriftConfig drift_config_for(const RunConfig& config, const io::StreamManifest& manifest);

/// Per-chunk k: the fixed value, or the chunk's distinct label count.
std::vector<Index> k_schedule(const std::vector<Chunk<double>>& chunks, std::optional<Index> fixed, Index fallback);

RunOutcome cmd_run(const RunConfig& config);

struct ResumeOptions {
    fs::path snapshot;
    std::optional<fs::path> out;  ///< defaults to the directory recorded in the snapshot
};

RunOutcome cmd_resume(const ResumeOptions& opts);

/// Prints the TCV comparison for a run and returns the matching.
TcvMatching<double> cmd_eval(const fs::path& manifest, const fs::path& metrics, std::ostream& os);

}  // namespace uiclust::cli

#endif  // UICLUST_COMMANDS_HPP
