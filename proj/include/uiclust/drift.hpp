#ifndef UICLUST_DRIFT_HPP
#define UICLUST_DRIFT_HPP

#include "core.hpp"

#include <cmath>
#include <cstdlib>
#include <limits>
#include <string_view>

namespace uiclust {

enum class DriftCause { None, OutlierRatio, DistributionShift };

inline std::string_view to_string(DriftCause cause)
{
    switch (cause) {
    case DriftCause::OutlierRatio: return "outlier_ratio";
    case DriftCause::DistributionShift: return "distribution_shift";
    case DriftCause::None: break;
    }
    return "none";
}

struct DriftVerdict {
    bool is_drift = false;
    DriftCause cause = DriftCause::None;
    /// |Delta^t - Delta^{t-1}| / Delta^{t-1} for each cluster examined, up to
    /// and including the first one over the threshold.
    std::vector<double> percent_change;
    double outlier_ratio = 0.0;

    bool operator==(const DriftVerdict&) const = default;
};

/// Relative change of one cluster's per-chunk count. A dead cluster that
/// receives records is an infinite change; one that stays dead is no change.
inline double percent_change(std::int64_t current, std::int64_t previous)
{
    const auto diff = static_cast<double>(std::llabs(current - previous));
    if (previous == 0) return diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return diff / static_cast<double>(previous);
}

/// Case 1: outliers / chunk_size > o_thresh. Case 2: any cluster whose
/// per-chunk count moved by more than d_thresh relative to the previous
/// result. A differing cluster count is reported as a distribution shift.
template <typename Scalar>
DriftVerdict detect(const ClusteringResult<Scalar>& current, const ClusteringResult<Scalar>& previous,
                    std::int64_t chunk_size, const DriftConfig& config)
{
    if (chunk_size <= 0) throw UsageError("detect: chunk_size must be positive");

    DriftVerdict verdict;
    verdict.outlier_ratio = static_cast<double>(current.outliers) / static_cast<double>(chunk_size);
    if (verdict.outlier_ratio > config.o_thresh) {
        verdict.is_drift = true;
        verdict.cause = DriftCause::OutlierRatio;
        return verdict;
    }

    if (current.clusters.size() != previous.clusters.size()) {
        verdict.is_drift = true;
        verdict.cause = DriftCause::DistributionShift;
        return verdict;
    }

    for (std::size_t k = 0; k < current.clusters.size(); ++k) {
        const double change = percent_change(current.clusters[k].chunk_count, previous.clusters[k].chunk_count);
        verdict.percent_change.push_back(change);
        if (change > config.d_thresh) {
            verdict.is_drift = true;
            verdict.cause = DriftCause::DistributionShift;
            break;
        }
    }
    return verdict;
}

}  // namespace uiclust

#endif  // UICLUST_DRIFT_HPP
