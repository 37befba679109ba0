#ifndef UICLUST_CORE_HPP
#define UICLUST_CORE_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace uiclust {

using Index = Eigen::Index;
using Label = std::optional<int>;

/// Raised for every caller-side contract violation (bad dimensions, bad
/// parameters, malformed input files).
class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// One record per row. Row-major so a record is a contiguous span.
template <typename Scalar>
using RecordMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using ClassMatrix = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar>
struct Record {
    Vector<Scalar> values;
    Label label;
};

/// A labelled table of records. Labels travel alongside the values but the
/// clustering functions only ever receive `values`.
template <typename Scalar>
struct Dataset {
    RecordMatrix<Scalar> values;
    std::vector<Label> labels;
    /// Optional artificial class sets, one column per attribute (bins 1..n).
    ClassMatrix artificial;

    Index size() const { return values.rows(); }
    Index dimension() const { return values.cols(); }

    Record<Scalar> record(Index i) const { return {values.row(i).transpose(), labels[static_cast<std::size_t>(i)]}; }
};

template <typename Scalar>
struct Chunk : Dataset<Scalar> {
    std::int64_t timestamp = 1;
};

/// Compact per-cluster state: centroid x, radius lambda, lifetime count psi
/// and per-chunk count Delta.
template <typename Scalar>
struct ClusterSummary {
    Vector<Scalar> centroid;
    Scalar radius = 0;
    std::int64_t lifetime_count = 1;
    std::int64_t chunk_count = 0;

    bool operator==(const ClusterSummary&) const = default;
};

template <typename Scalar>
struct ClusteringResult {
    std::vector<ClusterSummary<Scalar>> clusters;
    std::int64_t outliers = 0;
    std::int64_t timestamp = 0;

    Index dimension() const { return clusters.empty() ? 0 : clusters.front().centroid.size(); }

    std::int64_t absorbed() const
    {
        std::int64_t total = 0;
        for (const auto& c : clusters) total += c.chunk_count;
        return total;
    }

    bool operator==(const ClusteringResult&) const = default;
};

struct DriftConfig {
    Index k = 5;
    double o_thresh = 0.18;
    double d_thresh = 0.6;
    std::uint64_t seed = 42;
    int max_iterations = 100;

    void validate() const
    {
        if (k < 1) throw UsageError("k must be >= 1");
        if (!(o_thresh > 0.0 && o_thresh <= 1.0)) throw UsageError("o_thresh must lie in (0,1]");
        if (!(d_thresh > 0.0)) throw UsageError("d_thresh must be > 0");
        if (max_iterations < 1) throw UsageError("max_iterations must be >= 1");
    }

    bool operator==(const DriftConfig&) const = default;
};

/// Per-record outcome of an assignment pass. cluster == -1 marks an outlier.
template <typename Scalar>
struct Assignment {
    Index cluster = -1;
    Scalar distance = 0;

    bool operator==(const Assignment&) const = default;
};

template <typename Scalar>
using AssignmentTrace = std::vector<Assignment<Scalar>>;

namespace detail {

inline void require_same_dimension(Index a, Index b, const char* what)
{
    if (a != b)
        throw UsageError(std::string(what) + ": dimensionality mismatch (" + std::to_string(a) + " vs " +
                         std::to_string(b) + ")");
}

}  // namespace detail

template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar euclidean(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b)
{
    detail::require_same_dimension(a.size(), b.size(), "euclidean");
    return (a.derived().reshaped() - b.derived().reshaped()).norm();
}

/// Rescales every column to [0,1] by its own min/max. Constant columns map to 0.
template <typename Derived>
RecordMatrix<typename Derived::Scalar> minmax_normalize(const Eigen::MatrixBase<Derived>& values)
{
    using Scalar = typename Derived::Scalar;
    if (values.rows() == 0 || values.cols() == 0) throw UsageError("minmax_normalize: empty dataset");

    RecordMatrix<Scalar> out(values.rows(), values.cols());
    for (Index j = 0; j < values.cols(); ++j) {
        const Scalar lo = values.col(j).minCoeff();
        const Scalar hi = values.col(j).maxCoeff();
        const Scalar range = hi - lo;
        if (range > Scalar(0))
            out.col(j) = (values.col(j).array() - lo) / range;
        else
            out.col(j).setZero();
    }
    return out;
}

template <typename Scalar>
Dataset<Scalar> minmax_normalize(const Dataset<Scalar>& dataset)
{
    Dataset<Scalar> out = dataset;
    out.values = minmax_normalize(dataset.values);
    return out;
}

}  // namespace uiclust

#endif  // UICLUST_CORE_HPP
