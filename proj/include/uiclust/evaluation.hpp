#ifndef UICLUST_EVALUATION_HPP
#define UICLUST_EVALUATION_HPP

#include "engine.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <span>

namespace uiclust {

/// Size-weighted cluster entropy in bits. Records with cluster < 0 (outliers)
/// are ignored; every remaining record must carry a label.
inline double entropy(std::span<const Index> clusters, std::span<const Label> labels)
{
    if (clusters.size() != labels.size()) throw UsageError("entropy: cluster and label counts differ");

    std::map<Index, std::map<int, std::int64_t>> table;
    std::int64_t total = 0;
    for (std::size_t i = 0; i < clusters.size(); ++i) {
        if (clusters[i] < 0) continue;
        if (!labels[i]) throw UsageError("entropy: record " + std::to_string(i) + " has no label");
        ++table[clusters[i]][*labels[i]];
        ++total;
    }
    if (total == 0) throw UsageError("entropy: no assigned records");

    double h = 0.0;
    for (const auto& [cluster, counts] : table) {
        std::int64_t size = 0;
        for (const auto& [label, n] : counts) size += n;
        double hk = 0.0;
        for (const auto& [label, n] : counts) {
            const double p = static_cast<double>(n) / static_cast<double>(size);
            hk -= p * std::log2(p);
        }
        h += static_cast<double>(size) / static_cast<double>(total) * hk;
    }
    return h;
}

template <typename Scalar>
Scalar sse(std::span<const Assignment<Scalar>> assignments)
{
    Scalar total = 0;
    for (const auto& a : assignments)
        if (a.cluster >= 0) total += a.distance * a.distance;
    return total;
}

template <typename Scalar>
struct LabeledCentroid {
    int label = 0;
    Vector<Scalar> centroid;
    std::int64_t count = 0;
};

/// Per-class means over the whole stream (the true cluster values).
template <typename Scalar>
std::vector<LabeledCentroid<Scalar>> true_cluster_values(std::span<const Chunk<Scalar>> chunks)
{
    if (chunks.empty()) throw UsageError("true_cluster_values: empty stream");
    std::map<int, LabeledCentroid<Scalar>> acc;
    for (const auto& chunk : chunks) {
        for (Index i = 0; i < chunk.size(); ++i) {
            const auto& l = chunk.labels[static_cast<std::size_t>(i)];
            if (!l) throw UsageError("true_cluster_values: unlabeled record at t=" + std::to_string(chunk.timestamp));
            auto& entry = acc[*l];
            if (entry.count == 0) {
                entry.label = *l;
                entry.centroid = Vector<Scalar>::Zero(chunk.dimension());
            }
            entry.centroid += chunk.values.row(i).transpose();
            ++entry.count;
        }
    }
    std::vector<LabeledCentroid<Scalar>> out;
    for (auto& [label, entry] : acc) {
        entry.centroid /= static_cast<Scalar>(entry.count);
        out.push_back(std::move(entry));
    }
    return out;
}

template <typename Scalar>
struct TcvPair {
    Index cluster = 0;
    std::size_t tcv = 0;
    Scalar distance = 0;
};

template <typename Scalar>
struct TcvMatching {
    /// Ordered by TCV index.
    std::vector<TcvPair<Scalar>> pairs;
    std::vector<Index> unmatched_clusters;
    std::vector<std::size_t> unmatched_tcvs;
};

namespace detail {

template <typename Scalar>
struct AssignmentSearch {
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& cost;
    std::vector<Index> current, best;
    std::vector<bool> used;
    Scalar best_cost = std::numeric_limits<Scalar>::infinity();

    void descend(Index row, Scalar acc)
    {
        if (acc >= best_cost) return;
        if (row == cost.rows()) {
            best_cost = acc;
            best = current;
            return;
        }
        for (Index c = 0; c < cost.cols(); ++c) {
            if (used[static_cast<std::size_t>(c)]) continue;
            used[static_cast<std::size_t>(c)] = true;
            current[static_cast<std::size_t>(row)] = c;
            descend(row + 1, acc + cost(row, c));
            used[static_cast<std::size_t>(c)] = false;
        }
    }
};

}  // namespace detail

/// Matches discovered centroids to TCVs one-to-one. Exhaustive minimum total
/// distance while both sides have at most 8 entries, greedy by ascending
/// distance beyond that. Leftovers on either side are reported unmatched.
template <typename Scalar>
TcvMatching<Scalar> tcv_distance(const ClusteringResult<Scalar>& final_result,
                                 std::span<const LabeledCentroid<Scalar>> tcvs)
{
    const auto k = static_cast<Index>(final_result.clusters.size());
    const auto m = static_cast<Index>(tcvs.size());

    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> dist(k, m);
    for (Index i = 0; i < k; ++i)
        for (Index j = 0; j < m; ++j)
            dist(i, j) = euclidean(final_result.clusters[static_cast<std::size_t>(i)].centroid,
                                   tcvs[static_cast<std::size_t>(j)].centroid);

    std::vector<Index> cluster_of(static_cast<std::size_t>(m), -1);
    if (std::max(k, m) <= 8) {
        // Assign each row of the smaller side to a distinct column.
        const bool transpose = k > m;
        const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> cost =
            transpose ? Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>(dist.transpose()) : dist;
        detail::AssignmentSearch<Scalar> search{cost, std::vector<Index>(static_cast<std::size_t>(cost.rows()), -1),
                                                {}, std::vector<bool>(static_cast<std::size_t>(cost.cols()), false)};
        search.descend(0, Scalar(0));
        for (Index r = 0; r < cost.rows(); ++r) {
            const Index c = search.best[static_cast<std::size_t>(r)];
            if (transpose)
                cluster_of[static_cast<std::size_t>(r)] = c;
            else
                cluster_of[static_cast<std::size_t>(c)] = r;
        }
    } else {
        std::vector<std::pair<Index, Index>> order;
        for (Index i = 0; i < k; ++i)
            for (Index j = 0; j < m; ++j) order.emplace_back(i, j);
        std::stable_sort(order.begin(), order.end(),
                         [&](const auto& a, const auto& b) { return dist(a.first, a.second) < dist(b.first, b.second); });
        std::vector<bool> cluster_used(static_cast<std::size_t>(k), false);
        for (const auto& [i, j] : order) {
            if (cluster_used[static_cast<std::size_t>(i)] || cluster_of[static_cast<std::size_t>(j)] >= 0) continue;
            cluster_used[static_cast<std::size_t>(i)] = true;
            cluster_of[static_cast<std::size_t>(j)] = i;
        }
    }

    TcvMatching<Scalar> out;
    std::vector<bool> matched(static_cast<std::size_t>(k), false);
    for (Index j = 0; j < m; ++j) {
        const Index i = cluster_of[static_cast<std::size_t>(j)];
        if (i < 0) {
            out.unmatched_tcvs.push_back(static_cast<std::size_t>(j));
            continue;
        }
        matched[static_cast<std::size_t>(i)] = true;
        out.pairs.push_back({i, static_cast<std::size_t>(j), dist(i, j)});
    }
    for (Index i = 0; i < k; ++i)
        if (!matched[static_cast<std::size_t>(i)]) out.unmatched_clusters.push_back(i);
    return out;
}

struct TimestampMetrics {
    std::int64_t timestamp = 0;
    std::optional<double> entropy;
    /// Mean entropy over the artificial class sets, when the stream has them.
    std::optional<double> entropy_artificial;
    double sse = 0.0;
    double cluster_count = 0.0;
    double outliers = 0.0;
    double duration_seconds = 0.0;
    bool activated = false;
    bool stabilized = false;
    bool swapped = false;
    bool parallel_active = false;
    int strike = 0;
    std::string drift_cause = "none";
};

struct MetricsReport {
    std::vector<TimestampMetrics> steps;
    std::optional<double> mean_entropy;
    std::optional<double> mean_entropy_artificial;
    double mean_sse = 0.0;
    double total_runtime_seconds = 0.0;
    int runs = 1;
};

/// Recomputes the run-level means from the per-timestamp records.
inline void recompute_means(MetricsReport& report)
{
    report.mean_sse = report.total_runtime_seconds = 0.0;
    double entropy_sum = 0.0, artificial_sum = 0.0;
    std::size_t entropy_n = 0, artificial_n = 0;
    for (const auto& m : report.steps) {
        report.mean_sse += m.sse;
        report.total_runtime_seconds += m.duration_seconds;
        if (m.entropy) {
            entropy_sum += *m.entropy;
            ++entropy_n;
        }
        if (m.entropy_artificial) {
            artificial_sum += *m.entropy_artificial;
            ++artificial_n;
        }
    }
    if (!report.steps.empty()) report.mean_sse /= static_cast<double>(report.steps.size());
    report.mean_entropy.reset();
    report.mean_entropy_artificial.reset();
    if (entropy_n > 0) report.mean_entropy = entropy_sum / static_cast<double>(entropy_n);
    if (artificial_n > 0) report.mean_entropy_artificial = artificial_sum / static_cast<double>(artificial_n);
}

/// Per-timestamp metrics of one engine run. `chunks` must be the stream the
/// reports were produced from (same order); only its labels are read.
template <typename Scalar>
MetricsReport evaluate_run(std::span<const StepReport<Scalar>> reports, std::span<const Chunk<Scalar>> chunks)
{
    if (reports.size() > chunks.size()) throw UsageError("evaluate_run: more reports than chunks");

    MetricsReport out;
    for (std::size_t i = 0; i < reports.size(); ++i) {
        const auto& r = reports[i];
        const auto& chunk = chunks[i];
        if (r.timestamp != chunk.timestamp) throw UsageError("evaluate_run: report/chunk timestamp mismatch");

        TimestampMetrics m;
        m.timestamp = r.timestamp;
        m.sse = static_cast<double>(r.sse);
        m.cluster_count = static_cast<double>(r.discovered_clusters);
        m.outliers = static_cast<double>(r.outliers);
        m.duration_seconds = r.duration_seconds;
        m.activated = r.activated;
        m.stabilized = r.stabilized;
        m.swapped = r.swapped;
        m.parallel_active = r.parallel_active;
        m.strike = r.strike;
        m.drift_cause = std::string(to_string(r.verdict.cause));

        std::vector<Index> clusters;
        clusters.reserve(r.assignments.size());
        for (const auto& a : r.assignments) clusters.push_back(a.cluster);
        const bool any_assigned = std::any_of(clusters.begin(), clusters.end(), [](Index c) { return c >= 0; });
        const bool labelled = std::all_of(chunk.labels.begin(), chunk.labels.end(), [](const Label& l) { return l.has_value(); });

        if (any_assigned && labelled) {
            m.entropy = entropy(clusters, chunk.labels);
        }
        if (any_assigned && chunk.artificial.size() > 0) {
            double acc = 0.0;
            std::vector<Label> set(static_cast<std::size_t>(chunk.size()));
            for (Index j = 0; j < chunk.artificial.cols(); ++j) {
                for (Index row = 0; row < chunk.size(); ++row)
                    set[static_cast<std::size_t>(row)] = chunk.artificial(row, j);
                acc += entropy(clusters, set);
            }
            m.entropy_artificial = acc / static_cast<double>(chunk.artificial.cols());
        }
        out.steps.push_back(std::move(m));
    }
    recompute_means(out);
    return out;
}

/// Element-wise mean of several runs over the same stream. Event flags and
/// the drift cause are taken from the first run.
inline MetricsReport average(std::span<const MetricsReport> runs)
{
    if (runs.empty()) throw UsageError("average: no runs");
    MetricsReport out = runs.front();
    const auto n = static_cast<double>(runs.size());
    out.runs = static_cast<int>(runs.size());

    auto mean_opt = [&](auto getter) -> std::optional<double> {
        double acc = 0.0;
        for (const auto& r : runs) {
            const std::optional<double> v = getter(r);
            if (!v) return std::nullopt;
            acc += *v;
        }
        return acc / n;
    };

    for (std::size_t t = 0; t < out.steps.size(); ++t) {
        auto& s = out.steps[t];
        s.sse = s.cluster_count = s.outliers = s.duration_seconds = 0.0;
        for (const auto& r : runs) {
            if (r.steps.size() != out.steps.size()) throw UsageError("average: runs differ in length");
            s.sse += r.steps[t].sse / n;
            s.cluster_count += r.steps[t].cluster_count / n;
            s.outliers += r.steps[t].outliers / n;
            s.duration_seconds += r.steps[t].duration_seconds / n;
        }
        s.entropy = mean_opt([t](const MetricsReport& r) { return r.steps[t].entropy; });
        s.entropy_artificial = mean_opt([t](const MetricsReport& r) { return r.steps[t].entropy_artificial; });
    }
    out.mean_sse = 0.0;
    out.total_runtime_seconds = 0.0;
    for (const auto& r : runs) {
        out.mean_sse += r.mean_sse / n;
        out.total_runtime_seconds += r.total_runtime_seconds / n;
    }
    out.mean_entropy = mean_opt([](const MetricsReport& r) { return r.mean_entropy; });
    out.mean_entropy_artificial = mean_opt([](const MetricsReport& r) { return r.mean_entropy_artificial; });
    return out;
}

}  // namespace uiclust

#endif  // UICLUST_EVALUATION_HPP
