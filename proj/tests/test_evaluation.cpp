#include "support.hpp"

#include <doctest.h>

#include <numeric>
#include <set>

using namespace testing;

namespace {

ClusteringResult<double> centroids(const Mat& m)
{
    ClusteringResult<double> r;
    for (Index i = 0; i < m.rows(); ++i) {
        ClusterSummary<double> s;
        s.centroid = m.row(i).transpose();
        r.clusters.push_back(s);
    }
    return r;
}

std::vector<LabeledCentroid<double>> tcvs_of(const Mat& m)
{
    std::vector<LabeledCentroid<double>> out;
    for (Index i = 0; i < m.rows(); ++i) out.push_back({static_cast<int>(i) + 1, m.row(i).transpose(), 1});
    return out;
}

double brute_force_assignment(const Mat& a, const Mat& b)
{
    std::vector<int> perm(static_cast<std::size_t>(b.rows()));
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
        double total = 0.0;
        for (Index i = 0; i < a.rows(); ++i) total += (a.row(i) - b.row(perm[static_cast<std::size_t>(i)])).norm();
        best = std::min(best, total);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

}  // namespace

TEST_CASE("entropy of a mixed and a pure cluster")
{
    const std::vector<Index> clusters = {0, 0, 0, 0, 1, 1, 1, 1};
    const std::vector<Label> labels = {1, 1, 1, 2, 2, 2, 2, 2};
    CHECK(entropy(clusters, labels) == doctest::Approx(0.4056).epsilon(1e-4));
}

TEST_CASE("entropy edge cases")
{
    const std::vector<Index> one = {0, 0, 0};
    const std::vector<Label> same = {4, 4, 4};
    CHECK(entropy(one, same) == 0.0);

    const std::vector<Index> with_outliers = {0, -1, 0, -1};
    const std::vector<Label> labels = {1, 2, 1, Label{}};
    CHECK(entropy(with_outliers, labels) == 0.0);

    const std::vector<Label> unlabeled = {1, Label{}, 1};
    CHECK_THROWS_AS(entropy(one, unlabeled), UsageError);
    const std::vector<Index> none = {-1};
    const std::vector<Label> l1 = {1};
    CHECK_THROWS_AS(entropy(none, l1), UsageError);
    CHECK_THROWS_AS(entropy(one, l1), UsageError);
}

TEST_CASE("entropy is invariant under relabelling classes and clusters")
{
    std::mt19937_64 rng(31);
    std::uniform_int_distribution<int> c(0, 4), l(1, 6);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<Index> clusters(50);
        std::vector<Label> labels(50);
        for (std::size_t i = 0; i < 50; ++i) {
            clusters[i] = c(rng);
            labels[i] = l(rng);
        }
        std::vector<int> class_map = {0, 1, 2, 3, 4, 5, 6};
        std::vector<Index> cluster_map = {0, 1, 2, 3, 4};
        std::shuffle(class_map.begin() + 1, class_map.end(), rng);
        std::shuffle(cluster_map.begin(), cluster_map.end(), rng);
        auto c2 = clusters;
        auto l2 = labels;
        for (auto& x : c2) x = cluster_map[static_cast<std::size_t>(x)] + 10;
        for (auto& x : l2) x = class_map[static_cast<std::size_t>(*x)];
        const double h = entropy(clusters, labels);
        REQUIRE(h >= 0.0);
        REQUIRE(entropy(c2, l2) == doctest::Approx(h).epsilon(1e-12));
    }
}

TEST_CASE("sse sums squared assignment distances, skipping outliers")
{
    const AssignmentTrace<double> zero = {{0, 0.0}, {1, 0.0}};
    CHECK(sse<double>(zero) == 0.0);
    const AssignmentTrace<double> half = {{0, 0.5}, {0, 0.5}, {-1, 9.0}};
    CHECK(sse<double>(half) == doctest::Approx(0.5));
}

TEST_CASE("online SSE equals a retained-record replay")
{
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 50; ++trial) {
        const Mat boot = uniform_matrix(rng, 40, 2);
        AssignmentTrace<double> trace;
        const auto state = summarize(boot, {4, 100, 1}, 1, &trace);
        std::vector<std::vector<Vector<double>>> members(state.clusters.size());
        for (std::size_t i = 0; i < trace.size(); ++i)
            members[static_cast<std::size_t>(trace[i].cluster)].push_back(boot.row(static_cast<Index>(i)).transpose());

        const Mat x = uniform_matrix(rng, 60, 2);
        AssignmentTrace<double> online;
        dist_clust(x, state, 2, &online);

        double offline = 0.0;
        for (std::size_t i = 0; i < online.size(); ++i) {
            if (online[i].cluster < 0) continue;
            auto& m = members[static_cast<std::size_t>(online[i].cluster)];
            Vector<double> mean = Vector<double>::Zero(2);
            for (const auto& r : m) mean += r;
            mean /= static_cast<double>(m.size());
            const Vector<double> rec = x.row(static_cast<Index>(i)).transpose();
            offline += (rec - mean).squaredNorm();
            m.push_back(rec);
        }
        REQUIRE(sse<double>(online) == doctest::Approx(offline).epsilon(1e-9));
    }
}

TEST_CASE("true cluster values are per-class means")
{
    Chunk<double> a, b;
    a.values = rows_of({{0.0, 0.0}, {1.0, 1.0}, {0.5, 0.5}});
    a.labels = {1, 1, 2};
    b.values = rows_of({{0.2, 0.4}});
    b.labels = {2};
    b.timestamp = 2;
    const std::vector<Chunk<double>> s = {a, b};
    const auto t = true_cluster_values<double>(s);
    REQUIRE(t.size() == 2);
    CHECK(t[0].label == 1);
    CHECK(t[0].count == 2);
    CHECK(t[0].centroid(0) == doctest::Approx(0.5));
    CHECK(t[1].centroid(0) == doctest::Approx(0.35));
    CHECK(t[1].centroid(1) == doctest::Approx(0.45));

    b.labels = {Label{}};
    const std::vector<Chunk<double>> bad = {a, b};
    CHECK_THROWS_AS(true_cluster_values<double>(bad), UsageError);
    CHECK_THROWS_AS(true_cluster_values<double>(std::span<const Chunk<double>>{}), UsageError);
}

TEST_CASE("SDCCL true cluster values sit on the anchors")
{
    const auto s = generate_synthetic(streams::sdccl(42));
    const auto t = true_cluster_values<double>(s);
    REQUIRE(t.size() == 6);
    const auto anchors = benchmark_anchors();
    for (Index i = 0; i < 5; ++i) {
        CHECK(t[static_cast<std::size_t>(i)].label == i + 1);
        CHECK((t[static_cast<std::size_t>(i)].centroid - anchors.row(i).transpose()).norm() < 0.01);
    }
}

TEST_CASE("tcv distance of identical and offset centroids")
{
    const Mat a = benchmark_anchors();
    const auto same = tcv_distance<double>(centroids(a), tcvs_of(a));
    REQUIRE(same.pairs.size() == 5);
    for (const auto& p : same.pairs) {
        CHECK(p.distance == 0.0);
        CHECK(p.cluster == static_cast<Index>(p.tcv));
    }
    Mat one = rows_of({{0.5, 0.5}});
    const auto off = tcv_distance<double>(centroids(one), tcvs_of(rows_of({{0.53, 0.54}})));
    CHECK(off.pairs[0].distance == doctest::Approx(0.05));
}

TEST_CASE("tcv matching equals a brute-force minimal assignment on five clusters")
{
    std::mt19937_64 rng(51);
    for (int trial = 0; trial < 200; ++trial) {
        const Mat a = uniform_matrix(rng, 5, 2);
        const Mat b = uniform_matrix(rng, 5, 2);
        const auto m = tcv_distance<double>(centroids(a), tcvs_of(b));
        REQUIRE(m.pairs.size() == 5);
        double total = 0.0;
        std::set<Index> used;
        for (const auto& p : m.pairs) {
            total += p.distance;
            used.insert(p.cluster);
        }
        REQUIRE(used.size() == 5);
        REQUIRE(total == doctest::Approx(brute_force_assignment(a, b)).epsilon(1e-12));
    }
}

TEST_CASE("tcv matching reports unmatched entries on both sides")
{
    const Mat three = rows_of({{0.0, 0.0}, {1.0, 1.0}, {0.0, 1.0}});
    const Mat two = rows_of({{0.0, 0.9}, {0.1, 0.0}});
    const auto more_tcvs = tcv_distance<double>(centroids(two), tcvs_of(three));
    CHECK(more_tcvs.pairs.size() == 2);
    CHECK(more_tcvs.unmatched_tcvs == std::vector<std::size_t>{1});
    CHECK(more_tcvs.unmatched_clusters.empty());

    const auto more_clusters = tcv_distance<double>(centroids(three), tcvs_of(two));
    CHECK(more_clusters.pairs.size() == 2);
    CHECK(more_clusters.unmatched_clusters == std::vector<Index>{1});
}

TEST_CASE("tcv distances vanish exactly for equal multisets, greedy beyond eight")
{
    std::mt19937_64 rng(61);
    for (Index k : {3, 8, 12}) {
        const Mat a = uniform_matrix(rng, k, 3);
        std::vector<Index> perm(static_cast<std::size_t>(k));
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        const Mat b = a(perm, Eigen::all);
        const auto m = tcv_distance<double>(centroids(a), tcvs_of(b));
        for (const auto& p : m.pairs) REQUIRE(p.distance < 1e-12);

        Mat c = b;
        c(0, 0) += 0.1;
        const auto moved = tcv_distance<double>(centroids(a), tcvs_of(c));
        double worst = 0.0;
        for (const auto& p : moved.pairs) worst = std::max(worst, p.distance);
        CHECK(worst > 1e-12);
    }
}

TEST_CASE("evaluate_run and average")
{
    const auto s = generate_synthetic(streams::sdwcd(2));
    DriftConfig c;
    std::vector<Index> ks;
    for (const auto& chunk : s) {
        std::set<int> l;
        for (const auto& x : chunk.labels) l.insert(*x);
        ks.push_back(static_cast<Index>(l.size()));
    }
    const auto r1 = run<double>(s, c, ks);
    c.seed = 43;
    const auto r2 = run<double>(s, c, ks);
    const auto m1 = evaluate_run<double>(r1.reports, s);
    const auto m2 = evaluate_run<double>(r2.reports, s);
    REQUIRE(m1.steps.size() == 10);
    double sse_sum = 0.0;
    for (const auto& st : m1.steps) {
        REQUIRE(st.entropy);
        CHECK(*st.entropy >= 0.0);
        CHECK(st.sse >= 0.0);
        sse_sum += st.sse;
    }
    CHECK(m1.mean_sse == doctest::Approx(sse_sum / 10.0));
    CHECK(m1.steps[2].activated);
    CHECK(m1.steps[2].drift_cause == "outlier_ratio");

    const std::vector<MetricsReport> both = {m1, m2};
    const auto avg = average(both);
    CHECK(avg.runs == 2);
    CHECK(avg.mean_sse == doctest::Approx((m1.mean_sse + m2.mean_sse) / 2.0));
    CHECK(avg.steps[0].sse == doctest::Approx((m1.steps[0].sse + m2.steps[0].sse) / 2.0));
    CHECK_THROWS_AS(average(std::span<const MetricsReport>{}), UsageError);

    auto copy = m1;
    copy.mean_sse = -1.0;
    recompute_means(copy);
    CHECK(copy.mean_sse == doctest::Approx(m1.mean_sse));
    CHECK(copy.mean_entropy == m1.mean_entropy);
}

TEST_CASE("artificial class sets are averaged")
{
    Chunk<double> c;
    c.values = rows_of({{0.1}, {0.2}, {0.8}, {0.9}});
    c.labels = {1, 1, 2, 2};
    c.artificial.resize(4, 2);
    c.artificial << 1, 1,
                    1, 2,
                    2, 1,
                    2, 2;
    StepReport<double> r;
    r.timestamp = 1;
    r.assignments = {{0, 0.0}, {0, 0.0}, {1, 0.0}, {1, 0.0}};
    const std::vector<StepReport<double>> reps = {r};
    const std::vector<Chunk<double>> chunks = {c};
    const auto m = evaluate_run<double>(reps, chunks);
    REQUIRE(m.steps[0].entropy_artificial);
    CHECK(*m.steps[0].entropy_artificial == doctest::Approx(0.5));
    CHECK(*m.steps[0].entropy == 0.0);
}
