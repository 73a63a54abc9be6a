#pragma once

#include "gofmult/types.hpp"

#include <functional>
#include <span>

// Descriptive statistics used for starting values and by the test suites.
namespace gofmult::stats {

double mean(std::span<const double> x);
/// Unbiased (n - 1) sample variance.
double variance(std::span<const double> x);
double median(std::span<const double> x);
double quantile(std::span<const double> x, double p);

Vector column_means(const RowMatrix& x);
/// Unbiased sample covariance of the rows.
Matrix covariance(const RowMatrix& x);
Matrix correlation(const RowMatrix& x);

/// Kendall's tau-a between two columns, O(n^2).
double kendall_tau(std::span<const double> x, std::span<const double> y);
double spearman_rho(std::span<const double> x, std::span<const double> y);

/// sup_x |F_n(x) - F(x)| for a univariate sample.
double ks_distance(std::span<const double> x, const std::function<double(double)>& cdf);

std::vector<double> column(const RowMatrix& x, Eigen::Index j);

}  // namespace gofmult::stats
