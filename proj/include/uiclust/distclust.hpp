#ifndef UICLUST_DISTCLUST_HPP
#define UICLUST_DISTCLUST_HPP

#include "core.hpp"

#include <limits>
#include <utility>

namespace uiclust {

/// Index of the nearest centroid and its distance. Ties go to the lowest index.
template <typename Derived, typename Scalar>
std::pair<Index, Scalar> closest_cluster(const Eigen::MatrixBase<Derived>& record,
                                         const ClusteringResult<Scalar>& result)
{
    if (result.clusters.empty()) throw UsageError("closest_cluster: empty cluster list");
    detail::require_same_dimension(record.size(), result.dimension(), "closest_cluster");

    Index best = 0;
    Scalar best_d = std::numeric_limits<Scalar>::infinity();
    for (std::size_t c = 0; c < result.clusters.size(); ++c) {
        const Scalar d = euclidean(record, result.clusters[c].centroid);
        if (d < best_d) {
            best_d = d;
            best = static_cast<Index>(c);
        }
    }
    return {best, best_d};
}

/// Running-mean absorption of one record. psi is incremented first and the
/// new centroid is (1 - 1/psi) x + (1/psi) A. The radius is left alone.
template <typename Scalar, typename Derived>
ClusterSummary<Scalar> update_centroid(ClusterSummary<Scalar> summary, const Eigen::MatrixBase<Derived>& record)
{
    detail::require_same_dimension(record.size(), summary.centroid.size(), "update_centroid");
    summary.lifetime_count += 1;
    summary.chunk_count += 1;
    const Scalar rate = Scalar(1) / static_cast<Scalar>(summary.lifetime_count);
    summary.centroid = (Scalar(1) - rate) * summary.centroid + rate * record.derived().reshaped();
    return summary;
}

/// Single ordered pass over a chunk against the previous result. Delta and the
/// outlier counter restart from zero; a record within lambda of its nearest
/// centroid is absorbed, otherwise it is counted as an outlier and dropped.
template <typename Derived>
ClusteringResult<typename Derived::Scalar> dist_clust(const Eigen::MatrixBase<Derived>& x,
                                                      const ClusteringResult<typename Derived::Scalar>& prev,
                                                      std::int64_t timestamp,
                                                      AssignmentTrace<typename Derived::Scalar>* trace = nullptr)
{
    using Scalar = typename Derived::Scalar;
    if (prev.clusters.empty()) throw UsageError("dist_clust: previous result has no clusters");
    detail::require_same_dimension(x.cols(), prev.dimension(), "dist_clust");

    ClusteringResult<Scalar> next = prev;
    next.timestamp = timestamp;
    next.outliers = 0;
    for (auto& c : next.clusters) c.chunk_count = 0;

    if (trace) {
        trace->clear();
        trace->reserve(static_cast<std::size_t>(x.rows()));
    }

    for (Index i = 0; i < x.rows(); ++i) {
        const auto [k, dist] = closest_cluster(x.row(i), next);
        auto& cluster = next.clusters[static_cast<std::size_t>(k)];
        if (dist <= cluster.radius) {
            cluster = update_centroid(std::move(cluster), x.row(i));
            if (trace) trace->push_back({k, dist});
        } else {
            ++next.outliers;
            if (trace) trace->push_back({-1, dist});
        }
    }
    return next;
}

}  // namespace uiclust

#endif  // UICLUST_DISTCLUST_HPP
