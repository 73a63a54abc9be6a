#pragma once

#include "gofmult/distributions.hpp"

#include <limits>
#include <vector>

namespace gofmult {

enum class CopulaKind { Normal, Clayton, T };

/// Copula family with its fixed constants. Parameters live in theta.
struct CopulaSpec {
    CopulaKind kind = CopulaKind::Normal;
    double nu = std::numeric_limits<double>::infinity();  ///< t copula only

    [[nodiscard]] int param_count(int d) const { return kind == CopulaKind::Clayton ? 1 : d * (d - 1) / 2; }
};

namespace copula {

// The kernels below assume validated parameters; call validate() first.

/// C(u) for u in [0, 1]^d. `params` is either (rho12, rho13, rho23) or (theta).
double cdf(const CopulaSpec& spec, const Vector& params, Point u);
/// log c(u) for u in (0, 1)^d.
double logpdf(const CopulaSpec& spec, const Vector& params, Point u);
/// n draws of U with uniform margins.
RowMatrix sample(const CopulaSpec& spec, const Vector& params, int d, Eigen::Index n, RngStream& rng);
/// Starting values by inversion of pairwise Kendall tau.
Vector tau_start(const CopulaSpec& spec, const RowMatrix& data);
void validate(const CopulaSpec& spec, const Vector& params, int d);

}  // namespace copula

/// F(x) = C(F_1(x_1), ..., F_d(x_d)) with univariate margins.
///
/// theta is laid out as margin 1 parameters, ..., margin d parameters, then
/// the copula parameters.
class SklarFamily final : public Family {
public:
    SklarFamily(std::string id, std::vector<FamilyPtr> margins, CopulaSpec copula);

    [[nodiscard]] std::string id() const override { return id_; }
    [[nodiscard]] int dim() const override { return static_cast<int>(margins_.size()); }
    [[nodiscard]] std::vector<std::string> param_names() const override;
    [[nodiscard]] std::vector<ParamKind> param_kinds() const override;
    void validate(const Vector& theta) const override;
    using Family::cdf;
    using Family::logpdf;
    void cdf(const Vector& theta, ConstRowsRef points, std::span<double> out) const override;
    void logpdf(const Vector& theta, ConstRowsRef points, std::span<double> out) const override;
    [[nodiscard]] Dataset sample(const Vector& theta, Eigen::Index n, RngStream& rng) const override;
    [[nodiscard]] Vector moment_start(const Dataset& data) const override;

    [[nodiscard]] const CopulaSpec& copula() const noexcept { return copula_; }
    [[nodiscard]] const std::vector<FamilyPtr>& margins() const noexcept { return margins_; }
    [[nodiscard]] Vector margin_params(const Vector& theta, int j) const;
    [[nodiscard]] Vector copula_params(const Vector& theta) const;

private:
    std::string id_;
    std::vector<FamilyPtr> margins_;
    CopulaSpec copula_;
    std::vector<int> offsets_;  // start of each margin slice; back() is the copula slice
};

}  // namespace gofmult
