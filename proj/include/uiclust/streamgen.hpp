#ifndef UICLUST_STREAMGEN_HPP
#define UICLUST_STREAMGEN_HPP

#include "core.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <string_view>

namespace uiclust {

/// Where a chunk's clusters sit relative to the anchors.
enum class Geometry {
    None,      ///< the first cluster_count anchors
    Relocate,  ///< the first cluster_count anchors shifted by the spec offset
    Merge,     ///< one cluster at the mean of all anchors, under a new class label
};

enum class LabelDrift {
    None,
    Temporary,  ///< labels permuted for this chunk only
    Sustained,  ///< permutation applies from this chunk to the end of the stream
};

inline std::string_view to_string(Geometry g);
inline std::string_view to_string(LabelDrift d);
inline Geometry geometry_from_string(std::string_view s);
inline LabelDrift label_drift_from_string(std::string_view s);

struct StreamEntry {
    Index cluster_count = 5;
    Index chunk_size = 150;
    Geometry geometry = Geometry::None;
    LabelDrift label_drift = LabelDrift::None;

    /// chunk_size split over the clusters; the remainder goes to the first ones.
    std::vector<Index> cluster_sizes() const
    {
        std::vector<Index> sizes(static_cast<std::size_t>(cluster_count), chunk_size / cluster_count);
        for (Index i = 0; i < chunk_size % cluster_count; ++i) ++sizes[static_cast<std::size_t>(i)];
        return sizes;
    }

    bool operator==(const StreamEntry&) const = default;
};

template <typename Scalar>
struct StreamSpec {
    std::string name;
    RecordMatrix<Scalar> anchors;
    Vector<Scalar> offset;
    Scalar sigma = Scalar(0.02);
    std::uint64_t seed = 42;
    std::vector<StreamEntry> entries;

    void validate() const
    {
        if (entries.empty()) throw UsageError("stream spec '" + name + "': no entries");
        if (anchors.rows() == 0 || anchors.cols() == 0) throw UsageError("stream spec '" + name + "': no anchors");
        if (offset.size() != anchors.cols())
            throw UsageError("stream spec '" + name + "': offset dimensionality must match anchors");
        if (!(sigma >= Scalar(0))) throw UsageError("stream spec '" + name + "': sigma must be >= 0");
        for (std::size_t t = 0; t < entries.size(); ++t) {
            const auto& e = entries[t];
            const std::string where = "stream spec '" + name + "' t=" + std::to_string(t + 1);
            if (e.cluster_count < 1) throw UsageError(where + ": cluster_count must be >= 1");
            if (e.chunk_size < e.cluster_count) throw UsageError(where + ": chunk_size smaller than cluster_count");
            if (e.geometry == Geometry::Merge && e.cluster_count != 1)
                throw UsageError(where + ": merge chunks have exactly one cluster");
            if (e.geometry != Geometry::Merge && e.cluster_count > anchors.rows())
                throw UsageError(where + ": more clusters than anchors");
        }
    }

    bool operator==(const StreamSpec&) const = default;
};

/// The five anchor centroids of the published benchmark streams.
template <typename Scalar = double>
RecordMatrix<Scalar> benchmark_anchors()
{
    RecordMatrix<Scalar> a(5, 2);
    a << 0.117, 0.884,
         0.885, 0.885,
         0.527, 0.635,
         0.117, 0.111,
         0.877, 0.117;
    return a;
}

namespace streams {

/// Two normal chunks, a one-chunk merge under temporary relabelling, two
/// normal chunks, then three relocated and relabelled clusters to the end.
template <typename Scalar = double>
StreamSpec<Scalar> sdwcd(std::uint64_t seed)
{
    StreamSpec<Scalar> s;
    s.name = "sdwcd";
    s.anchors = benchmark_anchors<Scalar>();
    s.offset = Vector<Scalar>(2);
    s.offset << 0.0, -0.25;
    s.seed = seed;
    s.entries = {{5, 150}, {5, 150}, {1, 150, Geometry::Merge, LabelDrift::Temporary}, {5, 150}, {5, 150},
                 {3, 150, Geometry::Relocate, LabelDrift::Sustained}};
    for (int t = 7; t <= 10; ++t) s.entries.push_back({3, 150, Geometry::Relocate});
    return s;
}

/// Four normal chunks, one merged chunk, two slightly shifted chunks.
template <typename Scalar = double>
StreamSpec<Scalar> sdccl(std::uint64_t seed, Scalar shift = Scalar(0.01))
{
    StreamSpec<Scalar> s;
    s.name = "sdccl";
    s.anchors = benchmark_anchors<Scalar>();
    s.offset = Vector<Scalar>::Constant(2, shift);
    s.seed = seed;
    s.entries = {{5, 150}, {5, 150}, {5, 150}, {5, 150}, {1, 150, Geometry::Merge},
                 {5, 150, Geometry::Relocate}, {5, 150, Geometry::Relocate}};
    return s;
}

template <typename Scalar = double>
StreamSpec<Scalar> ncd100(std::uint64_t seed)
{
    StreamSpec<Scalar> s;
    s.name = "100ncd";
    s.anchors = benchmark_anchors<Scalar>();
    s.offset = Vector<Scalar>::Zero(2);
    s.seed = seed;
    s.entries.assign(100, StreamEntry{5, 150});
    return s;
}

/// Ten blocks of 100 chunks; every block after the first changes the cluster
/// count and permutes the labels for good.
template <typename Scalar = double>
StreamSpec<Scalar> wcd1000(std::uint64_t seed)
{
    static constexpr Index counts[] = {5, 4, 5, 3, 5, 4, 5, 2, 3, 5};
    StreamSpec<Scalar> s;
    s.name = "1000wcd";
    s.anchors = benchmark_anchors<Scalar>();
    s.offset = Vector<Scalar>::Zero(2);
    s.seed = seed;
    for (int block = 0; block < 10; ++block)
        for (int i = 0; i < 100; ++i)
            s.entries.push_back({counts[block], 150, Geometry::None,
                                 block > 0 && i == 0 ? LabelDrift::Sustained : LabelDrift::None});
    return s;
}

}  // namespace streams

template <typename Scalar = double>
StreamSpec<Scalar> builtin_stream(std::string_view name, std::uint64_t seed)
{
    if (name == "sdwcd") return streams::sdwcd<Scalar>(seed);
    if (name == "sdccl") return streams::sdccl<Scalar>(seed);
    if (name == "100ncd" || name == "ncd100") return streams::ncd100<Scalar>(seed);
    if (name == "1000wcd" || name == "wcd1000") return streams::wcd1000<Scalar>(seed);
    throw UsageError("unknown stream '" + std::string(name) + "' (expected sdwcd, sdccl, 100ncd or 1000wcd)");
}

/// Sorted set of labels present anywhere in the stream.
template <typename Scalar>
std::vector<int> label_universe(std::span<const Chunk<Scalar>> chunks)
{
    std::vector<int> labels;
    for (const auto& c : chunks)
        for (const auto& l : c.labels)
            if (l) labels.push_back(*l);
    std::sort(labels.begin(), labels.end());
    labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
    return labels;
}

template <typename Scalar>
void relabel(Chunk<Scalar>& chunk, const std::map<int, int>& mapping)
{
    for (auto& l : chunk.labels)
        if (l) {
            const auto it = mapping.find(*l);
            if (it != mapping.end()) l = it->second;
        }
}

/// Permutes class labels on flagged timestamps. Every draw is a random cyclic
/// permutation of the stream's label universe, so each label changes.
template <typename Scalar>
std::vector<Chunk<Scalar>> apply_label_drift(std::vector<Chunk<Scalar>> chunks, std::span<const LabelDrift> schedule,
                                             std::uint64_t seed)
{
    if (schedule.size() != chunks.size()) throw UsageError("apply_label_drift: schedule length must match chunks");

    const auto universe = label_universe<Scalar>(chunks);
    std::mt19937_64 rng(seed);
    auto draw = [&] {
        // Sattolo's algorithm.
        std::vector<int> image = universe;
        for (std::size_t i = image.size(); i > 1; --i) {
            std::uniform_int_distribution<std::size_t> pick(0, i - 2);
            std::swap(image[i - 1], image[pick(rng)]);
        }
        std::map<int, int> m;
        for (std::size_t i = 0; i < universe.size(); ++i) m[universe[i]] = image[i];
        return m;
    };
    auto compose = [](const std::map<int, int>& outer, const std::map<int, int>& inner) {
        std::map<int, int> m;
        for (const auto& [from, to] : inner) m[from] = outer.at(to);
        return m;
    };

    std::map<int, int> active;
    for (int l : universe) active[l] = l;

    for (std::size_t t = 0; t < chunks.size(); ++t) {
        switch (schedule[t]) {
        case LabelDrift::None: relabel(chunks[t], active); break;
        case LabelDrift::Temporary: relabel(chunks[t], compose(draw(), active)); break;
        case LabelDrift::Sustained:
            active = compose(draw(), active);
            relabel(chunks[t], active);
            break;
        }
    }
    return chunks;
}

/// Gaussian blobs around the anchors, clipped to the unit box, one chunk per
/// entry. Deterministic for a given spec.
template <typename Scalar>
std::vector<Chunk<Scalar>> generate_synthetic(const StreamSpec<Scalar>& spec)
{
    spec.validate();
    const Index dim = spec.anchors.cols();
    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<Scalar> noise(Scalar(0), spec.sigma);

    std::vector<Chunk<Scalar>> chunks;
    chunks.reserve(spec.entries.size());
    for (std::size_t t = 0; t < spec.entries.size(); ++t) {
        const auto& e = spec.entries[t];
        RecordMatrix<Scalar> centres;
        std::vector<int> labels;
        if (e.geometry == Geometry::Merge) {
            centres = spec.anchors.colwise().mean();
            labels = {static_cast<int>(spec.anchors.rows()) + 1};
        } else {
            centres = spec.anchors.topRows(e.cluster_count);
            if (e.geometry == Geometry::Relocate) centres.rowwise() += spec.offset.transpose();
            labels.resize(static_cast<std::size_t>(e.cluster_count));
            std::iota(labels.begin(), labels.end(), 1);
        }

        Chunk<Scalar> chunk;
        chunk.timestamp = static_cast<std::int64_t>(t) + 1;
        chunk.values.resize(e.chunk_size, dim);
        chunk.labels.reserve(static_cast<std::size_t>(e.chunk_size));
        Index row = 0;
        const auto sizes = e.cluster_sizes();
        for (std::size_t c = 0; c < sizes.size(); ++c) {
            for (Index i = 0; i < sizes[c]; ++i, ++row) {
                for (Index j = 0; j < dim; ++j)
                    chunk.values(row, j) =
                        std::clamp(centres(static_cast<Index>(c), j) + noise(rng), Scalar(0), Scalar(1));
                chunk.labels.push_back(labels[c]);
            }
        }
        chunks.push_back(std::move(chunk));
    }

    std::vector<LabelDrift> schedule;
    for (const auto& e : spec.entries) schedule.push_back(e.label_drift);
    return apply_label_drift(std::move(chunks), std::span<const LabelDrift>(schedule), spec.seed ^ 0x9e3779b97f4a7c15ULL);
}

template <typename Scalar>
Dataset<Scalar> select_rows(const Dataset<Scalar>& d, std::span<const Index> rows)
{
    Dataset<Scalar> out;
    out.values.resize(static_cast<Index>(rows.size()), d.dimension());
    if (d.artificial.size() > 0) out.artificial.resize(static_cast<Index>(rows.size()), d.artificial.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out.values.row(static_cast<Index>(i)) = d.values.row(rows[i]);
        if (d.artificial.size() > 0) out.artificial.row(static_cast<Index>(i)) = d.artificial.row(rows[i]);
        out.labels.push_back(d.labels[static_cast<std::size_t>(rows[i])]);
    }
    return out;
}

/// Splits a labelled dataset into chunk_count chunks. Chunk i takes the i-th
/// contiguous slice of every class (classes in order of first appearance), so
/// each chunk keeps the class proportions of the whole.
template <typename Scalar>
std::vector<Chunk<Scalar>> chunk_dataset(const Dataset<Scalar>& dataset, Index chunk_count)
{
    if (chunk_count < 1) throw UsageError("chunk_dataset: chunk_count must be >= 1");
    if (dataset.size() == 0) throw UsageError("chunk_dataset: empty dataset");
    if (static_cast<Index>(dataset.labels.size()) != dataset.size())
        throw UsageError("chunk_dataset: label column length mismatch");

    std::vector<int> order;
    std::map<int, std::vector<Index>> by_class;
    for (Index i = 0; i < dataset.size(); ++i) {
        const auto& l = dataset.labels[static_cast<std::size_t>(i)];
        if (!l) throw UsageError("chunk_dataset: record " + std::to_string(i) + " has no class label");
        auto [it, inserted] = by_class.try_emplace(*l);
        if (inserted) order.push_back(*l);
        it->second.push_back(i);
    }
    for (const auto& [label, rows] : by_class)
        if (static_cast<Index>(rows.size()) < chunk_count)
            throw UsageError("chunk_dataset: class " + std::to_string(label) + " has " + std::to_string(rows.size()) +
                             " records, fewer than " + std::to_string(chunk_count) + " chunks");

    std::vector<Chunk<Scalar>> chunks;
    for (Index c = 0; c < chunk_count; ++c) {
        std::vector<Index> rows;
        for (int label : order) {
            const auto& members = by_class.at(label);
            const auto n = static_cast<Index>(members.size());
            const Index lo = c * n / chunk_count;
            const Index hi = (c + 1) * n / chunk_count;
            rows.insert(rows.end(), members.begin() + lo, members.begin() + hi);
        }
        Chunk<Scalar> chunk;
        static_cast<Dataset<Scalar>&>(chunk) = select_rows(dataset, std::span<const Index>(rows));
        chunk.timestamp = c + 1;
        chunks.push_back(std::move(chunk));
    }
    return chunks;
}

enum class BinningMethod {
    EqualFrequency,  ///< bin by rank within the column; ties share the lowest rank's bin
    EqualWidth,      ///< bin = ceil(v * n) clamped to [1, n]
};

struct BinningSpec {
    int bin_count = 2;
    BinningMethod method = BinningMethod::EqualFrequency;
};

/// One artificial class column per attribute, each value mapped to a bin in
/// 1..bin_count. Values must already be normalized to [0,1].
template <typename Derived>
ClassMatrix make_artificial_classes(const Eigen::MatrixBase<Derived>& values, const BinningSpec& spec)
{
    using Scalar = typename Derived::Scalar;
    if (spec.bin_count < 1) throw UsageError("make_artificial_classes: bin_count must be >= 1");
    if (values.size() > 0 && (values.minCoeff() < Scalar(0) || values.maxCoeff() > Scalar(1)))
        throw UsageError("make_artificial_classes: values must be normalized to [0,1]");

    const Index rows = values.rows();
    const int n = spec.bin_count;
    ClassMatrix out(rows, values.cols());

    if (spec.method == BinningMethod::EqualWidth) {
        for (Index i = 0; i < rows; ++i)
            for (Index j = 0; j < values.cols(); ++j) {
                const auto bin = static_cast<int>(std::ceil(values(i, j) * static_cast<Scalar>(n)));
                out(i, j) = std::clamp(bin, 1, n);
            }
        return out;
    }

    std::vector<Index> order(static_cast<std::size_t>(rows));
    for (Index j = 0; j < values.cols(); ++j) {
        std::iota(order.begin(), order.end(), Index(0));
        std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return values(a, j) < values(b, j); });
        Index rank = 0;
        for (Index r = 0; r < rows; ++r) {
            const Index i = order[static_cast<std::size_t>(r)];
            if (r > 0 && values(i, j) != values(order[static_cast<std::size_t>(r - 1)], j)) rank = r;
            out(i, j) = static_cast<int>(rank * n / rows) + 1;
        }
    }
    return out;
}

inline std::string_view to_string(Geometry g)
{
    switch (g) {
    case Geometry::Relocate: return "relocate";
    case Geometry::Merge: return "merge";
    case Geometry::None: break;
    }
    return "none";
}

inline std::string_view to_string(LabelDrift d)
{
    switch (d) {
    case LabelDrift::Temporary: return "temporary";
    case LabelDrift::Sustained: return "sustained";
    case LabelDrift::None: break;
    }
    return "none";
}

inline Geometry geometry_from_string(std::string_view s)
{
    if (s == "none") return Geometry::None;
    if (s == "relocate") return Geometry::Relocate;
    if (s == "merge") return Geometry::Merge;
    throw UsageError("unknown geometry '" + std::string(s) + "'");
}

inline LabelDrift label_drift_from_string(std::string_view s)
{
    if (s == "none") return LabelDrift::None;
    if (s == "temporary") return LabelDrift::Temporary;
    if (s == "sustained") return LabelDrift::Sustained;
    throw UsageError("unknown label drift '" + std::string(s) + "'");
}

}  // namespace uiclust

#endif  // UICLUST_STREAMGEN_HPP
