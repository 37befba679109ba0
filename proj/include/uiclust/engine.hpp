#ifndef UICLUST_ENGINE_HPP
#define UICLUST_ENGINE_HPP

#include "distclust.hpp"
#include "drift.hpp"
#include "kmeans.hpp"

#include <chrono>
#include <span>

namespace uiclust {

template <typename Scalar>
struct ParallelState {
    ClusteringResult<Scalar> result;
    /// 1 on the activation chunk, +1 for every further chunk on which main
    /// is still drifting. Reaching 4 swaps the parallel result in.
    int strike = 1;

    bool operator==(const ParallelState&) const = default;
};

template <typename Scalar>
struct EngineState {
    ClusteringResult<Scalar> main;
    std::optional<ParallelState<Scalar>> parallel;
    bool is_concept_drift = false;
    std::int64_t timestamp = 0;
    DriftConfig config;

    bool operator==(const EngineState&) const = default;
};

enum class ReportedModel { Main, Parallel };

template <typename Scalar>
struct StepReport {
    std::int64_t timestamp = 0;
    std::int64_t chunk_size = 0;

    /// Main clustering after this chunk.
    std::int64_t outliers = 0;
    std::vector<std::int64_t> chunk_counts;
    DriftVerdict verdict;
    std::optional<DriftVerdict> parallel_verdict;

    bool bootstrap = false;
    bool activated = false;
    bool stabilized = false;
    bool parallel_retrained = false;
    bool swapped = false;
    bool parallel_active = false;
    int strike = 0;

    /// The model that describes this chunk: the parallel result while drift
    /// handling is active, main otherwise. Assignments and SSE refer to it.
    ReportedModel model = ReportedModel::Main;
    Index cluster_count = 0;
    Index discovered_clusters = 0;
    AssignmentTrace<Scalar> assignments;
    Scalar sse = 0;

    double duration_seconds = 0.0;
};

/// Equality of everything except the wall-clock duration.
template <typename Scalar>
bool same_trajectory(const StepReport<Scalar>& a, const StepReport<Scalar>& b)
{
    return a.timestamp == b.timestamp && a.chunk_size == b.chunk_size && a.outliers == b.outliers &&
           a.chunk_counts == b.chunk_counts && a.verdict == b.verdict && a.parallel_verdict == b.parallel_verdict &&
           a.bootstrap == b.bootstrap && a.activated == b.activated && a.stabilized == b.stabilized &&
           a.parallel_retrained == b.parallel_retrained && a.swapped == b.swapped &&
           a.parallel_active == b.parallel_active && a.strike == b.strike && a.model == b.model &&
           a.cluster_count == b.cluster_count && a.discovered_clusters == b.discovered_clusters &&
           a.assignments == b.assignments && a.sse == b.sse;
}

template <typename Scalar>
struct StepOutcome {
    EngineState<Scalar> state;
    StepReport<Scalar> report;
};

namespace detail {

template <typename Scalar>
void describe(StepReport<Scalar>& report, const ClusteringResult<Scalar>& model, ReportedModel which,
              AssignmentTrace<Scalar> trace)
{
    report.model = which;
    report.cluster_count = static_cast<Index>(model.clusters.size());
    report.discovered_clusters = 0;
    for (const auto& c : model.clusters)
        if (c.chunk_count > 0) ++report.discovered_clusters;
    report.sse = 0;
    for (const auto& a : trace)
        if (a.cluster >= 0) report.sse += a.distance * a.distance;
    report.assignments = std::move(trace);
}

template <typename Scalar>
void record_main(StepReport<Scalar>& report, const ClusteringResult<Scalar>& main)
{
    report.outliers = main.outliers;
    report.chunk_counts.clear();
    for (const auto& c : main.clusters) report.chunk_counts.push_back(c.chunk_count);
}

inline KMeansParams bootstrap_params(const DriftConfig& config, std::optional<Index> k, std::int64_t timestamp)
{
    return {k.value_or(config.k), config.max_iterations, config.seed + static_cast<std::uint64_t>(timestamp)};
}

inline double seconds_since(std::chrono::steady_clock::time_point start)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace detail

/// Bootstraps the engine on the first chunk. `k` overrides config.k for this
/// chunk only.
template <typename Derived>
EngineState<typename Derived::Scalar> init(const Eigen::MatrixBase<Derived>& x, std::int64_t timestamp,
                                           const DriftConfig& config, std::optional<Index> k = {},
                                           StepReport<typename Derived::Scalar>* report = nullptr)
{
    using Scalar = typename Derived::Scalar;
    const auto start = std::chrono::steady_clock::now();
    config.validate();
    if (x.rows() == 0) throw UsageError("init: empty chunk");
    if (timestamp < 1) throw UsageError("init: timestamps start at 1");

    EngineState<Scalar> state;
    state.config = config;
    state.timestamp = timestamp;
    AssignmentTrace<Scalar> trace;
    state.main = summarize(x, detail::bootstrap_params(config, k, timestamp), timestamp, &trace);

    if (report) {
        *report = {};
        report->timestamp = timestamp;
        report->chunk_size = x.rows();
        report->bootstrap = true;
        detail::record_main(*report, state.main);
        detail::describe(*report, state.main, ReportedModel::Main, std::move(trace));
        report->duration_seconds = detail::seconds_since(start);
    }
    return state;
}

/// Processes the next chunk.
///
/// Without active drift handling the chunk is absorbed by main and checked
/// for drift; on drift a parallel clustering is bootstrapped from the chunk.
/// While drift handling is active main keeps absorbing chunks. A clean main
/// verdict discards the parallel result. Otherwise the parallel result
/// absorbs the chunk (or is rebuilt from it if it drifts itself) and the
/// strike count grows. The third drifted chunk after activation swaps the
/// parallel result in as the new main.
template <typename Derived>
StepOutcome<typename Derived::Scalar> step(const EngineState<typename Derived::Scalar>& state,
                                           const Eigen::MatrixBase<Derived>& x, std::int64_t timestamp,
                                           std::optional<Index> k = {})
{
    using Scalar = typename Derived::Scalar;
    const auto start = std::chrono::steady_clock::now();

    if (x.rows() == 0) throw UsageError("step: empty chunk");
    detail::require_same_dimension(x.cols(), state.main.dimension(), "step");
    if (timestamp != state.timestamp + 1)
        throw UsageError("step: expected timestamp " + std::to_string(state.timestamp + 1) + ", got " +
                         std::to_string(timestamp));

    const auto& config = state.config;
    const std::int64_t n = x.rows();

    StepOutcome<Scalar> out{state, {}};
    auto& next = out.state;
    auto& report = out.report;
    next.timestamp = timestamp;
    report.timestamp = timestamp;
    report.chunk_size = n;

    AssignmentTrace<Scalar> main_trace;
    next.main = dist_clust(x, state.main, timestamp, &main_trace);
    report.verdict = detect(next.main, state.main, n, config);
    detail::record_main(report, next.main);

    if (!state.parallel) {
        if (!report.verdict.is_drift) {
            detail::describe(report, next.main, ReportedModel::Main, std::move(main_trace));
        } else {
            AssignmentTrace<Scalar> trace;
            ParallelState<Scalar> parallel;
            parallel.result = summarize(x, detail::bootstrap_params(config, k, timestamp), timestamp, &trace);
            parallel.strike = 1;
            next.parallel = std::move(parallel);
            next.is_concept_drift = true;
            report.activated = true;
            detail::describe(report, next.parallel->result, ReportedModel::Parallel, std::move(trace));
        }
    } else if (!report.verdict.is_drift) {
        next.parallel.reset();
        next.is_concept_drift = false;
        report.stabilized = true;
        detail::describe(report, next.main, ReportedModel::Main, std::move(main_trace));
    } else {
        const auto& prev_parallel = state.parallel->result;
        AssignmentTrace<Scalar> trace;
        auto candidate = dist_clust(x, prev_parallel, timestamp, &trace);
        report.parallel_verdict = detect(candidate, prev_parallel, n, config);
        if (report.parallel_verdict->is_drift) {
            candidate = summarize(x, detail::bootstrap_params(config, k, timestamp), timestamp, &trace);
            report.parallel_retrained = true;
        }
        const int strike = state.parallel->strike + 1;
        if (strike >= 4) {
            next.main = std::move(candidate);
            next.parallel.reset();
            next.is_concept_drift = false;
            report.swapped = true;
            report.strike = strike;
            detail::describe(report, next.main, ReportedModel::Main, std::move(trace));
        } else {
            next.parallel->result = std::move(candidate);
            next.parallel->strike = strike;
            detail::describe(report, next.parallel->result, ReportedModel::Parallel, std::move(trace));
        }
    }

    report.parallel_active = next.parallel.has_value();
    if (next.parallel) report.strike = next.parallel->strike;
    report.duration_seconds = detail::seconds_since(start);
    return out;
}

template <typename Scalar>
struct RunResult {
    EngineState<Scalar> state;
    std::vector<StepReport<Scalar>> reports;
};

/// Bootstraps on the first chunk and steps through the rest. `k_per_chunk`,
/// when non-empty, overrides config.k chunk by chunk.
template <typename Scalar>
RunResult<Scalar> run(std::span<const Chunk<Scalar>> stream, const DriftConfig& config,
                      std::span<const Index> k_per_chunk = {})
{
    if (stream.empty()) throw UsageError("run: empty stream");
    if (!k_per_chunk.empty() && k_per_chunk.size() != stream.size())
        throw UsageError("run: k_per_chunk must match the stream length");

    auto k_at = [&](std::size_t i) -> std::optional<Index> {
        if (k_per_chunk.empty()) return std::nullopt;
        return k_per_chunk[i];
    };

    RunResult<Scalar> out;
    out.reports.reserve(stream.size());
    StepReport<Scalar> first;
    out.state = init(stream[0].values, stream[0].timestamp, config, k_at(0), &first);
    out.reports.push_back(std::move(first));
    for (std::size_t i = 1; i < stream.size(); ++i) {
        auto [state, report] = step(out.state, stream[i].values, stream[i].timestamp, k_at(i));
        out.state = std::move(state);
        out.reports.push_back(std::move(report));
    }
    return out;
}

}  // namespace uiclust

#endif  // UICLUST_ENGINE_HPP
