#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>

namespace gofmult {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// A point in R^d, viewed as contiguous coordinates.
using Point = std::span<const double>;

/// n observations in R^d stored row-major. Rows are finite.
class Dataset {
public:
    Dataset() = default;
    explicit Dataset(RowMatrix rows);

    [[nodiscard]] Eigen::Index n() const noexcept { return rows_.rows(); }
    [[nodiscard]] Eigen::Index dim() const noexcept { return rows_.cols(); }
    [[nodiscard]] Point row(Eigen::Index i) const noexcept {
        return {rows_.data() + i * rows_.cols(), static_cast<std::size_t>(rows_.cols())};
    }
    [[nodiscard]] const RowMatrix& matrix() const noexcept { return rows_; }

private:
    RowMatrix rows_;
};

inline Point as_point(const Vector& v) noexcept {
    return {v.data(), static_cast<std::size_t>(v.size())};
}

}  // namespace gofmult
