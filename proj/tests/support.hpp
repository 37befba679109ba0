#ifndef UICLUST_TESTS_SUPPORT_HPP
#define UICLUST_TESTS_SUPPORT_HPP

#include "uiclust/uiclust.hpp"

#include <filesystem>
#include <random>

namespace testing {

using namespace uiclust;
using Mat = RecordMatrix<double>;

inline Mat uniform_matrix(std::mt19937_64& rng, Index rows, Index cols, double lo = 0.0, double hi = 1.0)
{
    std::uniform_real_distribution<double> u(lo, hi);
    Mat m(rows, cols);
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j) m(i, j) = u(rng);
    return m;
}

/// rows records around each centre, gaussian noise sigma.
inline Mat blobs(std::mt19937_64& rng, const Mat& centres, Index per_centre, double sigma)
{
    std::normal_distribution<double> noise(0.0, sigma);
    Mat m(centres.rows() * per_centre, centres.cols());
    for (Index c = 0; c < centres.rows(); ++c)
        for (Index i = 0; i < per_centre; ++i)
            for (Index j = 0; j < centres.cols(); ++j) m(c * per_centre + i, j) = centres(c, j) + noise(rng);
    return m;
}

inline Mat rows_of(std::initializer_list<std::initializer_list<double>> rows)
{
    Mat m(static_cast<Index>(rows.size()), static_cast<Index>(rows.begin()->size()));
    Index i = 0;
    for (const auto& r : rows) {
        Index j = 0;
        for (double v : r) m(i, j++) = v;
        ++i;
    }
    return m;
}

/// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch(const std::string& name)
{
    auto p = std::filesystem::temp_directory_path() / ("uiclust-test-" + name);
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

}  // namespace testing

#endif
