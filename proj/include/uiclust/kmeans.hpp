#ifndef UICLUST_KMEANS_HPP
#define UICLUST_KMEANS_HPP

#include "core.hpp"

#include <limits>
#include <random>

namespace uiclust {

struct KMeansParams {
    Index k = 1;
    int max_iterations = 100;
    std::uint64_t seed = 0;
};

template <typename Scalar>
struct KMeansResult {
    /// k x n, one centroid per row.
    RecordMatrix<Scalar> centroids;
    /// Cluster index per input record.
    std::vector<Index> assignment;
    int iterations = 0;
    /// SSE after every assignment pass, in order.
    std::vector<Scalar> sse_history;

    Index cluster_count() const { return centroids.rows(); }

    std::vector<Index> members(Index cluster) const
    {
        std::vector<Index> out;
        for (std::size_t i = 0; i < assignment.size(); ++i)
            if (assignment[i] == cluster) out.push_back(static_cast<Index>(i));
        return out;
    }
};

namespace detail {

inline void validate(const KMeansParams& params, Index rows)
{
    if (params.k < 1) throw UsageError("kmeans: k must be >= 1");
    if (params.max_iterations < 1) throw UsageError("kmeans: max_iterations must be >= 1");
    if (rows < params.k)
        throw UsageError("kmeans: k (" + std::to_string(params.k) + ") exceeds chunk size (" + std::to_string(rows) +
                         ")");
}

// Greedy farthest-point seeding: a seeded random first record, then repeatedly
// the record farthest from every centre chosen so far (lowest index on ties).
template <typename Derived>
RecordMatrix<typename Derived::Scalar> farthest_point_centres(const Eigen::MatrixBase<Derived>& x, Index k,
                                                             std::uint64_t seed)
{
    using Scalar = typename Derived::Scalar;
    const Index n = x.rows();
    RecordMatrix<Scalar> centres(k, x.cols());

    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<Index> pick(0, n - 1);
    centres.row(0) = x.row(pick(rng));

    Vector<Scalar> nearest = (x.rowwise() - centres.row(0)).rowwise().squaredNorm();
    for (Index c = 1; c < k; ++c) {
        Index far = 0;
        nearest.maxCoeff(&far);
        centres.row(c) = x.row(far);
        nearest = nearest.cwiseMin((x.rowwise() - centres.row(c)).rowwise().squaredNorm());
    }
    return centres;
}

// Returns whether any assignment changed; accumulates SSE.
template <typename Derived, typename Scalar>
bool assign_nearest(const Eigen::MatrixBase<Derived>& x, const RecordMatrix<Scalar>& centres,
                    std::vector<Index>& assignment, Scalar& sse)
{
    bool changed = false;
    sse = 0;
    for (Index i = 0; i < x.rows(); ++i) {
        Index best = 0;
        Scalar best_d = std::numeric_limits<Scalar>::infinity();
        for (Index c = 0; c < centres.rows(); ++c) {
            const Scalar d = (x.row(i) - centres.row(c)).squaredNorm();
            if (d < best_d) {
                best_d = d;
                best = c;
            }
        }
        auto& slot = assignment[static_cast<std::size_t>(i)];
        if (slot != best) {
            slot = best;
            changed = true;
        }
        sse += best_d;
    }
    return changed;
}

}  // namespace detail

/// Lloyd k-means with farthest-point seeding. Stops when an assignment pass
/// changes nothing or after max_iterations passes. Empty clusters are
/// re-seeded with the record farthest from its current centroid.
template <typename Derived>
KMeansResult<typename Derived::Scalar> kmeans(const Eigen::MatrixBase<Derived>& x, const KMeansParams& params)
{
    using Scalar = typename Derived::Scalar;
    detail::validate(params, x.rows());

    const Index n = x.rows();
    const Index k = params.k;

    KMeansResult<Scalar> result;
    result.centroids = detail::farthest_point_centres(x, k, params.seed);
    result.assignment.assign(static_cast<std::size_t>(n), -1);

    bool converged = false;
    for (int iter = 0; iter < params.max_iterations; ++iter) {
        Scalar sse = 0;
        const bool changed = detail::assign_nearest(x, result.centroids, result.assignment, sse);
        result.sse_history.push_back(sse);
        result.iterations = iter + 1;
        if (!changed) {
            converged = true;
            break;
        }

        RecordMatrix<Scalar> sums = RecordMatrix<Scalar>::Zero(k, x.cols());
        std::vector<Index> counts(static_cast<std::size_t>(k), 0);
        for (Index i = 0; i < n; ++i) {
            const Index c = result.assignment[static_cast<std::size_t>(i)];
            sums.row(c) += x.row(i);
            ++counts[static_cast<std::size_t>(c)];
        }
        for (Index c = 0; c < k; ++c)
            if (counts[static_cast<std::size_t>(c)] > 0)
                result.centroids.row(c) = sums.row(c) / static_cast<Scalar>(counts[static_cast<std::size_t>(c)]);

        std::vector<bool> taken(static_cast<std::size_t>(n), false);
        for (Index c = 0; c < k; ++c) {
            if (counts[static_cast<std::size_t>(c)] > 0) continue;
            Index far = -1;
            Scalar far_d = -1;
            for (Index i = 0; i < n; ++i) {
                if (taken[static_cast<std::size_t>(i)]) continue;
                const Scalar d =
                    (x.row(i) - result.centroids.row(result.assignment[static_cast<std::size_t>(i)])).squaredNorm();
                if (d > far_d) {
                    far_d = d;
                    far = i;
                }
            }
            if (far < 0) break;
            taken[static_cast<std::size_t>(far)] = true;
            result.centroids.row(c) = x.row(far);
        }
    }

    // Out of iterations: make the assignment consistent with the final centres.
    if (!converged) {
        Scalar sse = 0;
        detail::assign_nearest(x, result.centroids, result.assignment, sse);
        result.sse_history.push_back(sse);
    }
    return result;
}

/// Radius of a cluster: distance from the centroid to its farthest member.
template <typename DerivedC, typename DerivedM>
typename DerivedC::Scalar get_max_dist(const Eigen::MatrixBase<DerivedC>& centroid,
                                       const Eigen::MatrixBase<DerivedM>& members)
{
    if (members.rows() == 0) throw UsageError("get_max_dist: empty member set");
    detail::require_same_dimension(centroid.size(), members.cols(), "get_max_dist");
    return (members.rowwise() - centroid.derived().reshaped().transpose()).rowwise().norm().maxCoeff();
}

/// Bootstraps a clustering result from one chunk: k-means, then one summary
/// per non-empty cluster (radius from get_max_dist, psi = Delta = size).
/// The records themselves are not kept.
template <typename Derived>
ClusteringResult<typename Derived::Scalar> summarize(const Eigen::MatrixBase<Derived>& x, const KMeansParams& params,
                                                     std::int64_t timestamp,
                                                     AssignmentTrace<typename Derived::Scalar>* trace = nullptr)
{
    using Scalar = typename Derived::Scalar;
    const auto km = kmeans(x, params);

    ClusteringResult<Scalar> result;
    result.timestamp = timestamp;
    result.outliers = 0;

    std::vector<Index> remap(static_cast<std::size_t>(km.cluster_count()), -1);
    for (Index c = 0; c < km.cluster_count(); ++c) {
        const auto idx = km.members(c);
        if (idx.empty()) continue;

        const RecordMatrix<Scalar> members = x(idx, Eigen::all);
        ClusterSummary<Scalar> s;
        s.centroid = km.centroids.row(c).transpose();
        s.radius = get_max_dist(s.centroid, members);
        s.lifetime_count = static_cast<std::int64_t>(idx.size());
        s.chunk_count = s.lifetime_count;
        remap[static_cast<std::size_t>(c)] = static_cast<Index>(result.clusters.size());
        result.clusters.push_back(std::move(s));
    }

    if (trace) {
        trace->clear();
        trace->reserve(static_cast<std::size_t>(x.rows()));
        for (Index i = 0; i < x.rows(); ++i) {
            const Index c = remap[static_cast<std::size_t>(km.assignment[static_cast<std::size_t>(i)])];
            const auto& centroid = result.clusters[static_cast<std::size_t>(c)].centroid;
            trace->push_back({c, euclidean(x.row(i).transpose(), centroid)});
        }
    }
    return result;
}

}  // namespace uiclust

#endif  // UICLUST_KMEANS_HPP
