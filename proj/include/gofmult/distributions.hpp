#pragma once

#include "gofmult/rng.hpp"
#include "gofmult/types.hpp"

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace gofmult {

using ConstRowsRef = Eigen::Ref<const RowMatrix>;

/// How a parameter is constrained; drives the unconstrained reparametrization
/// used by the optimizer (identity, log, atanh).
enum class ParamKind { Real, Positive, Correlation };

/// A parametric family {F_theta} of continuous distributions on R^d.
///
/// All members are const and free of hidden state, so a family may be shared
/// across threads. Batched evaluators take the points as rows of a matrix so
/// per-theta work (Cholesky factors, log-normalizers) is done once per call.
class Family {
public:
    virtual ~Family() = default;

    /// Identifier as accepted by make_family(), e.g. "t5" or "gn".
    [[nodiscard]] virtual std::string id() const = 0;
    [[nodiscard]] virtual int dim() const = 0;
    [[nodiscard]] virtual std::vector<std::string> param_names() const = 0;
    [[nodiscard]] virtual std::vector<ParamKind> param_kinds() const = 0;
    [[nodiscard]] int param_count() const { return static_cast<int>(param_kinds().size()); }

    /// Throws DomainError if theta is not a valid parameter vector.
    virtual void validate(const Vector& theta) const;
    [[nodiscard]] bool in_domain(const Vector& theta) const noexcept;

    virtual void cdf(const Vector& theta, ConstRowsRef points, std::span<double> out) const = 0;
    virtual void logpdf(const Vector& theta, ConstRowsRef points, std::span<double> out) const = 0;
    [[nodiscard]] double cdf(const Vector& theta, Point x) const;
    [[nodiscard]] double logpdf(const Vector& theta, Point x) const;
    [[nodiscard]] Vector cdf(const Vector& theta, ConstRowsRef points) const;
    [[nodiscard]] Vector logpdf(const Vector& theta, ConstRowsRef points) const;

    /// Sum of log-densities over the rows of `data`.
    [[nodiscard]] double loglik(const Vector& theta, ConstRowsRef data) const;

    [[nodiscard]] virtual Dataset sample(const Vector& theta, Eigen::Index n, RngStream& rng) const = 0;

    /// Method-of-moments starting values. Throws DegenerateData.
    [[nodiscard]] virtual Vector moment_start(const Dataset& data) const = 0;

    /// Maximum likelihood estimate when it has a closed form.
    [[nodiscard]] virtual std::optional<Vector> closed_form_mle(const Dataset&) const { return std::nullopt; }

    /// Inverse CDF for univariate families. The default solves F(x) = u by
    /// bracketing, bisection and Newton steps to 1e-12.
    [[nodiscard]] virtual double quantile(const Vector& theta, double u) const;

    [[nodiscard]] virtual bool has_analytic_gradients() const { return false; }
    /// Rows: gradient of F_theta at each point (m x p).
    virtual void cdf_gradient_analytic(const Vector& theta, ConstRowsRef points, RowMatrix& out) const;
    /// Rows: gradient of log f_theta at each point (n x p).
    virtual void logpdf_gradient_analytic(const Vector& theta, ConstRowsRef points, RowMatrix& out) const;

    [[nodiscard]] Vector to_unconstrained(const Vector& theta) const;
    [[nodiscard]] Vector from_unconstrained(const Vector& eta) const;
};

using FamilyPtr = std::shared_ptr<const Family>;

/// Location/dispersion/correlation parameters of an elliptical family, laid
/// out in theta as (mu_1..mu_d, lambda2_1..lambda2_d, rho_12, rho_13, rho_23).
struct EllipticalParams {
    Vector mu;
    Vector lambda2;
    Matrix corr;

    [[nodiscard]] static EllipticalParams unpack(const Vector& theta, int d);
    [[nodiscard]] Vector pack() const;
};

/// Off-diagonal index pairs (i < j) in canonical order.
std::vector<std::pair<int, int>> correlation_pairs(int d);

/// Cholesky factor of a correlation matrix, or nullopt if a pivot is <= 1e-12.
std::optional<Matrix> correlation_cholesky(const Matrix& corr);

/// Nearest-ish positive-definite correlation matrix: shrinks toward identity.
Matrix project_correlation(const Matrix& corr);

class NormalFamily final : public Family {
public:
    [[nodiscard]] std::string id() const override { return "norm"; }
    [[nodiscard]] int dim() const override { return 1; }
    [[nodiscard]] std::vector<std::string> param_names() const override { return {"mean", "variance"}; }
    [[nodiscard]] std::vector<ParamKind> param_kinds() const override { return {ParamKind::Real, ParamKind::Positive}; }
    using Family::cdf;
    using Family::logpdf;
    void cdf(const Vector& theta, ConstRowsRef points, std::span<double> out) const override;
    void logpdf(const Vector& theta, ConstRowsRef points, std::span<double> out) const override;
    [[nodiscard]] Dataset sample(const Vector& theta, Eigen::Index n, RngStream& rng) const override;
    [[nodiscard]] Vector moment_start(const Dataset& data) const override;
    [[nodiscard]] std::optional<Vector> closed_form_mle(const Dataset& data) const override;
    [[nodiscard]] double quantile(const Vector& theta, double u) const override;
};

/// Location-scale Student t with fixed degrees of freedom; theta = (mu, lambda^2).
class StudentTFamily final : public Family {
public:
    explicit StudentTFamily(double nu);
    [[nodiscard]] std::string id() const override;
    [[nodiscard]] int dim() const override { return 1; }
    [[nodiscard]] double dof() const noexcept { return nu_; }
    [[nodiscard]] std::vector<std::string> param_names() const override { return {"location", "dispersion2"}; }
    [[nodiscard]] std::vector<ParamKind> param_kinds() const override { return {ParamKind::Real, ParamKind::Positive}; }
    using Family::cdf;
    using Family::logpdf;
    void cdf(const Vector& theta, ConstRowsRef points, std::span<double> out) const override;
    void logpdf(const Vector& theta, ConstRowsRef points, std::span<double> out) const override;
    [[nodiscard]] Dataset sample(const Vector& theta, Eigen::Index n, RngStream& rng) const override;
    [[nodiscard]] Vector moment_start(const Dataset& data) const override;
    [[nodiscard]] double quantile(const Vector& theta, double u) const override;

private:
    double nu_;
};

/// theta = (location, scale), density exp(-z) / (s (1 + exp(-z))^2).
class LogisticFamily final : public Family {
public:
    [[nodiscard]] std::string id() const override { return "logis"; }
    [[nodiscard]] int dim() const override { return 1; }
    [[nodiscard]] std::vector<std::string> param_names() const override { return {"location", "scale"}; }
    [[nodiscard]] std::vector<ParamKind> param_kinds() const override { return {ParamKind::Real, ParamKind::Positive}; }
    using Family::cdf;
    using Family::logpdf;
    void cdf(const Vector& theta, ConstRowsRef points, std::span<double> out) const override;
    void logpdf(const Vector& theta, ConstRowsRef points, std::span<double> out) const override;
    [[nodiscard]] Dataset sample(const Vector& theta, Eigen::Index n, RngStream& rng) const override;
    [[nodiscard]] Vector moment_start(const Dataset& data) const override;
    [[nodiscard]] double quantile(const Vector& theta, double u) const override;
};

/// theta = (shape, rate).
class GammaFamily final : public Family {
public:
    [[nodiscard]] std::string id() const override { return "gamma"; }
    [[nodiscard]] int dim() const override { return 1; }
    [[nodiscard]] std::vector<std::string> param_names() const override { return {"shape", "rate"}; }
    [[nodiscard]] std::vector<ParamKind> param_kinds() const override { return {ParamKind::Positive, ParamKind::Positive}; }
    using Family::cdf;
    using Family::logpdf;
    void cdf(const Vector& theta, ConstRowsRef points, std::span<double> out) const override;
    void logpdf(const Vector& theta, ConstRowsRef points, std::span<double> out) const override;
    [[nodiscard]] Dataset sample(const Vector& theta, Eigen::Index n, RngStream& rng) const override;
    [[nodiscard]] Vector moment_start(const Dataset& data) const override;
    [[nodiscard]] double quantile(const Vector& theta, double u) const override;
};

/// theta = (shape, scale), F(x) = 1 - exp(-(x / scale)^shape).
class WeibullFamily final : public Family {
public:
    [[nodiscard]] std::string id() const override { return "weibull"; }
    [[nodiscard]] int dim() const override { return 1; }
    [[nodiscard]] std::vector<std::string> param_names() const override { return {"shape", "scale"}; }
    [[nodiscard]] std::vector<ParamKind> param_kinds() const override { return {ParamKind::Positive, ParamKind::Positive}; }
    using Family::cdf;
    using Family::logpdf;
    void cdf(const Vector& theta, ConstRowsRef points, std::span<double> out) const override;
    void logpdf(const Vector& theta, ConstRowsRef points, std::span<double> out) const override;
    [[nodiscard]] Dataset sample(const Vector& theta, Eigen::Index n, RngStream& rng) const override;
    [[nodiscard]] Vector moment_start(const Dataset& data) const override;
    [[nodiscard]] double quantile(const Vector& theta, double u) const override;
};

/// Multivariate normal (nu = infinity) or t with fixed nu, d in {2, 3},
/// parametrized by EllipticalParams.
class EllipticalFamily : public Family {
public:
    EllipticalFamily(int d, double nu);
    [[nodiscard]] int dim() const override { return d_; }
    [[nodiscard]] double dof() const noexcept { return nu_; }
    [[nodiscard]] bool is_normal() const noexcept;
    [[nodiscard]] std::vector<std::string> param_names() const override;
    [[nodiscard]] std::vector<ParamKind> param_kinds() const override;
    void validate(const Vector& theta) const override;
    using Family::cdf;
    using Family::logpdf;
    void cdf(const Vector& theta, ConstRowsRef points, std::span<double> out) const override;
    void logpdf(const Vector& theta, ConstRowsRef points, std::span<double> out) const override;
    [[nodiscard]] Dataset sample(const Vector& theta, Eigen::Index n, RngStream& rng) const override;
    [[nodiscard]] Vector moment_start(const Dataset& data) const override;

protected:
    int d_;
    double nu_;
};

class MvNormalFamily final : public EllipticalFamily {
public:
    explicit MvNormalFamily(int d);
    [[nodiscard]] std::string id() const override { return "mvnorm"; }
    [[nodiscard]] std::optional<Vector> closed_form_mle(const Dataset& data) const override;
};

class MvTFamily final : public EllipticalFamily {
public:
    MvTFamily(int d, double nu);
    [[nodiscard]] std::string id() const override;
    [[nodiscard]] bool has_analytic_gradients() const override { return true; }
    void cdf_gradient_analytic(const Vector& theta, ConstRowsRef points, RowMatrix& out) const override;
    void logpdf_gradient_analytic(const Vector& theta, ConstRowsRef points, RowMatrix& out) const override;
};

/// Numeric inverse of a univariate CDF (bracketing + safeguarded Newton, tolerance 1e-12).
double numeric_quantile(const Family& family, const Vector& theta, double u);

}  // namespace gofmult
