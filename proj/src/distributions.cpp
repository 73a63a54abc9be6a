#include "gofmult/distributions.hpp"

#include "gofmult/errors.hpp"
#include "gofmult/mvcdf.hpp"
#include "gofmult/special.hpp"
#include "gofmult/stats.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gofmult {

namespace {

std::string format_dof(double nu) {
    if (std::floor(nu) == nu && nu < 1e9) return std::to_string(static_cast<long long>(nu));
    std::string s = std::to_string(nu);
    s.erase(s.find_last_not_of('0') + 1);
    if (!s.empty() && s.back() == '.') s.pop_back();
    return s;
}

void require_univariate(ConstRowsRef points) {
    if (points.cols() != 1) throw DomainError("univariate family evaluated at a multivariate point");
}

void require_size(std::span<double> out, ConstRowsRef points) {
    if (static_cast<Eigen::Index>(out.size()) != points.rows()) {
        throw std::invalid_argument("output span does not match number of points");
    }
}

std::vector<double> first_column(const Dataset& data) { return stats::column(data.matrix(), 0); }

void require_rows(const Dataset& data, Eigen::Index min_rows) {
    if (data.n() < min_rows) {
        throw DegenerateData("need at least " + std::to_string(min_rows) + " observations, got " +
                             std::to_string(data.n()));
    }
}

double checked_variance(std::span<const double> x) {
    const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
    const double v = stats::variance(x);
    if (*lo == *hi || !(v > 0.0)) throw DegenerateData("sample variance is zero");
    return v;
}

}  // namespace

Dataset::Dataset(RowMatrix rows) : rows_(std::move(rows)) {
    if (rows_.rows() < 1 || rows_.cols() < 1) throw DegenerateData("dataset must have at least one row and column");
    if (!rows_.allFinite()) throw DegenerateData("dataset contains non-finite values");
}

// ---------------------------------------------------------------- Family

void Family::validate(const Vector& theta) const {
    const auto kinds = param_kinds();
    if (theta.size() != static_cast<Eigen::Index>(kinds.size())) {
        throw DomainError(id() + ": expected " + std::to_string(kinds.size()) + " parameters, got " +
                          std::to_string(theta.size()));
    }
    for (std::size_t i = 0; i < kinds.size(); ++i) {
        const double v = theta[static_cast<Eigen::Index>(i)];
        if (!std::isfinite(v)) throw DomainError(id() + ": non-finite parameter");
        if (kinds[i] == ParamKind::Positive && !(v > 0.0)) {
            throw DomainError(id() + ": parameter " + param_names()[i] + " must be positive");
        }
        if (kinds[i] == ParamKind::Correlation && !(std::abs(v) < 1.0)) {
            throw DomainError(id() + ": correlation " + param_names()[i] + " must lie in (-1, 1)");
        }
    }
}

bool Family::in_domain(const Vector& theta) const noexcept {
    try {
        validate(theta);
        return true;
    } catch (const std::exception&) {
        return false;
    }
}

double Family::cdf(const Vector& theta, Point x) const {
    double out = 0.0;
    cdf(theta, Eigen::Map<const RowMatrix>(x.data(), 1, static_cast<Eigen::Index>(x.size())), {&out, 1});
    return out;
}

double Family::logpdf(const Vector& theta, Point x) const {
    double out = 0.0;
    logpdf(theta, Eigen::Map<const RowMatrix>(x.data(), 1, static_cast<Eigen::Index>(x.size())), {&out, 1});
    return out;
}

Vector Family::cdf(const Vector& theta, ConstRowsRef points) const {
    Vector out(points.rows());
    cdf(theta, points, {out.data(), static_cast<std::size_t>(out.size())});
    return out;
}

Vector Family::logpdf(const Vector& theta, ConstRowsRef points) const {
    Vector out(points.rows());
    logpdf(theta, points, {out.data(), static_cast<std::size_t>(out.size())});
    return out;
}

double Family::loglik(const Vector& theta, ConstRowsRef data) const { return logpdf(theta, data).sum(); }

double Family::quantile(const Vector& theta, double u) const { return numeric_quantile(*this, theta, u); }

void Family::cdf_gradient_analytic(const Vector&, ConstRowsRef, RowMatrix&) const {
    throw std::logic_error(id() + " has no analytic CDF gradient");
}

void Family::logpdf_gradient_analytic(const Vector&, ConstRowsRef, RowMatrix&) const {
    throw std::logic_error(id() + " has no analytic log-density gradient");
}

Vector Family::to_unconstrained(const Vector& theta) const {
    const auto kinds = param_kinds();
    Vector eta(theta.size());
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
        switch (kinds[static_cast<std::size_t>(i)]) {
            case ParamKind::Real: eta[i] = theta[i]; break;
            case ParamKind::Positive: eta[i] = std::log(theta[i]); break;
            case ParamKind::Correlation: eta[i] = std::atanh(theta[i]); break;
        }
    }
    return eta;
}

Vector Family::from_unconstrained(const Vector& eta) const {
    const auto kinds = param_kinds();
    Vector theta(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
        switch (kinds[static_cast<std::size_t>(i)]) {
            case ParamKind::Real: theta[i] = eta[i]; break;
            case ParamKind::Positive: theta[i] = std::exp(eta[i]); break;
            case ParamKind::Correlation: theta[i] = std::tanh(eta[i]); break;
        }
    }
    return theta;
}

double numeric_quantile(const Family& family, const Vector& theta, double u) {
    if (family.dim() != 1) throw DomainError("quantile is only defined for univariate families");
    if (!(u > 0.0 && u < 1.0)) {
        if (u == 0.0) return -INFINITY;
        if (u == 1.0) return INFINITY;
        throw DomainError("quantile level must lie in [0, 1]");
    }
    auto F = [&](double x) { return family.cdf(theta, Point(&x, 1)); };
    double lo = -1.0, hi = 1.0;
    for (int i = 0; i < 2000 && F(lo) >= u; ++i) lo = 2.0 * lo - 1.0;
    for (int i = 0; i < 2000 && F(hi) <= u; ++i) hi = 2.0 * hi + 1.0;
    double x = 0.5 * (lo + hi);
    for (int iter = 0; iter < 500; ++iter) {
        const double fx = F(x) - u;
        if (fx == 0.0) return x;
        if (fx < 0.0) lo = x; else hi = x;
        const double density = std::exp(family.logpdf(theta, Point(&x, 1)));
        double next = (density > 0.0 && std::isfinite(density)) ? x - fx / density : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - x) <= 1e-12 * std::max(1.0, std::abs(x)) || hi - lo <= 1e-12 * std::max(1.0, std::abs(x))) {
            return next;
        }
        x = next;
    }
    return x;
}

// ---------------------------------------------------------------- correlation helpers

std::vector<std::pair<int, int>> correlation_pairs(int d) {
    std::vector<std::pair<int, int>> pairs;
    for (int i = 0; i < d; ++i) {
        for (int j = i + 1; j < d; ++j) pairs.emplace_back(i, j);
    }
    return pairs;
}

std::optional<Matrix> correlation_cholesky(const Matrix& corr) {
    const Eigen::Index d = corr.rows();
    Matrix l = Matrix::Zero(d, d);
    for (Eigen::Index j = 0; j < d; ++j) {
        double pivot = corr(j, j);
        for (Eigen::Index k = 0; k < j; ++k) pivot -= l(j, k) * l(j, k);
        if (!(pivot > 1e-12)) return std::nullopt;
        l(j, j) = std::sqrt(pivot);
        for (Eigen::Index i = j + 1; i < d; ++i) {
            double s = corr(i, j);
            for (Eigen::Index k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
            l(i, j) = s / l(j, j);
        }
    }
    return l;
}

Matrix project_correlation(const Matrix& corr) {
    if (correlation_cholesky(corr)) return corr;
    const Matrix identity = Matrix::Identity(corr.rows(), corr.cols());
    for (double alpha = 0.05; alpha < 1.0; alpha += 0.05) {
        Matrix shrunk = (1.0 - alpha) * corr + alpha * identity;
        if (correlation_cholesky(shrunk)) return shrunk;
    }
    return identity;
}

EllipticalParams EllipticalParams::unpack(const Vector& theta, int d) {
    EllipticalParams p;
    p.mu = theta.head(d);
    p.lambda2 = theta.segment(d, d);
    p.corr = Matrix::Identity(d, d);
    Eigen::Index k = 2 * d;
    for (auto [i, j] : correlation_pairs(d)) {
        p.corr(i, j) = p.corr(j, i) = theta[k++];
    }
    return p;
}

Vector EllipticalParams::pack() const {
    const auto d = static_cast<int>(mu.size());
    Vector theta(2 * d + d * (d - 1) / 2);
    theta.head(d) = mu;
    theta.segment(d, d) = lambda2;
    Eigen::Index k = 2 * d;
    for (auto [i, j] : correlation_pairs(d)) theta[k++] = corr(i, j);
    return theta;
}

// ---------------------------------------------------------------- normal

void NormalFamily::cdf(const Vector& theta, ConstRowsRef points, std::span<double> out) const {
    validate(theta);
    require_univariate(points);
    require_size(out, points);
    const double sd = std::sqrt(theta[1]);
    for (Eigen::Index i = 0; i < points.rows(); ++i) out[i] = special::norm_cdf((points(i, 0) - theta[0]) / sd);
}

void NormalFamily::logpdf(const Vector& theta, ConstRowsRef points, std::span<double> out) const {
    validate(theta);
    require_univariate(points);
    require_size(out, points);
    const double sd = std::sqrt(theta[1]);
    const double log_sd = 0.5 * std::log(theta[1]);
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
        out[i] = special::norm_logpdf((points(i, 0) - theta[0]) / sd) - log_sd;
    }
}

Dataset NormalFamily::sample(const Vector& theta, Eigen::Index n, RngStream& rng) const {
    validate(theta);
    if (n < 1) throw std::invalid_argument("sample size must be positive");
    const double sd = std::sqrt(theta[1]);
    RowMatrix x(n, 1);
    for (Eigen::Index i = 0; i < n; ++i) x(i, 0) = theta[0] + sd * rng.normal();
    return Dataset(std::move(x));
}

Vector NormalFamily::moment_start(const Dataset& data) const {
    require_rows(data, 3);
    const auto x = first_column(data);
    Vector theta(2);
    theta << stats::mean(x), checked_variance(x);
    return theta;
}

std::optional<Vector> NormalFamily::closed_form_mle(const Dataset& data) const {
    Vector theta = moment_start(data);
    const double n = static_cast<double>(data.n());
    theta[1] *= (n - 1.0) / n;
    return theta;
}

double NormalFamily::quantile(const Vector& theta, double u) const {
    validate(theta);
    return theta[0] + std::sqrt(theta[1]) * special::norm_quantile(u);
}

// ---------------------------------------------------------------- Student t

StudentTFamily::StudentTFamily(double nu) : nu_(nu) {
    if (!(nu > 0.0) || !std::isfinite(nu)) throw DomainError("t family needs finite positive degrees of freedom");
}

std::string StudentTFamily::id() const { return "t" + format_dof(nu_); }

void StudentTFamily::cdf(const Vector& theta, ConstRowsRef points, std::span<double> out) const {
    validate(theta);
    require_univariate(points);
    require_size(out, points);
    const double scale = std::sqrt(theta[1]);
    for (Eigen::Index i = 0; i < points.rows(); ++i) out[i] = special::t_cdf((points(i, 0) - theta[0]) / scale, nu_);
}

void StudentTFamily::logpdf(const Vector& theta, ConstRowsRef points, std::span<double> out) const {
    validate(theta);
    require_univariate(points);
    require_size(out, points);
    const double scale = std::sqrt(theta[1]);
    const double log_c = special::mvt_log_normalizer(nu_, 1) - 0.5 * std::log(theta[1]);
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
        const double z = (points(i, 0) - theta[0]) / scale;
        out[i] = log_c - 0.5 * (nu_ + 1.0) * std::log1p(z * z / nu_);
    }
}

Dataset StudentTFamily::sample(const Vector& theta, Eigen::Index n, RngStream& rng) const {
    validate(theta);
    if (n < 1) throw std::invalid_argument("sample size must be positive");
    const double scale = std::sqrt(theta[1]);
    RowMatrix x(n, 1);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double z = rng.normal();
        const double w = rng.chi_square(nu_);
        x(i, 0) = theta[0] + scale * z / std::sqrt(w / nu_);
    }
    return Dataset(std::move(x));
}

Vector StudentTFamily::moment_start(const Dataset& data) const {
    require_rows(data, 3);
    const auto x = first_column(data);
    const double var = checked_variance(x);
    Vector theta(2);
    theta[0] = stats::mean(x);
    if (nu_ > 2.0) {
        theta[1] = var * (nu_ - 2.0) / nu_;
    } else {
        const double iqr = stats::quantile(x, 0.75) - stats::quantile(x, 0.25);
        const double scale = iqr / (2.0 * special::t_quantile(0.75, nu_));
        theta[0] = stats::median(x);
        theta[1] = scale > 0.0 ? scale * scale : var;
    }
    return theta;
}

double StudentTFamily::quantile(const Vector& theta, double u) const {
    validate(theta);
    return theta[0] + std::sqrt(theta[1]) * special::t_quantile(u, nu_);
}

// ---------------------------------------------------------------- logistic

void LogisticFamily::cdf(const Vector& theta, ConstRowsRef points, std::span<double> out) const {
    validate(theta);
    require_univariate(points);
    require_size(out, points);
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
        const double z = (points(i, 0) - theta[0]) / theta[1];
        out[i] = 1.0 / (1.0 + std::exp(-z));
    }
}

void LogisticFamily::logpdf(const Vector& theta, ConstRowsRef points, std::span<double> out) const {
    validate(theta);
    require_univariate(points);
    require_size(out, points);
    const double log_s = std::log(theta[1]);
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
        const double az = std::abs((points(i, 0) - theta[0]) / theta[1]);
        out[i] = -az - log_s - 2.0 * std::log1p(std::exp(-az));
    }
}

Dataset LogisticFamily::sample(const Vector& theta, Eigen::Index n, RngStream& rng) const {
    validate(theta);
    if (n < 1) throw std::invalid_argument("sample size must be positive");
    RowMatrix x(n, 1);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double u = rng.uniform();
        x(i, 0) = theta[0] + theta[1] * std::log(u / (1.0 - u));
    }
    return Dataset(std::move(x));
}

Vector LogisticFamily::moment_start(const Dataset& data) const {
    require_rows(data, 3);
    const auto x = first_column(data);
    Vector theta(2);
    theta << stats::mean(x), std::sqrt(checked_variance(x)) * std::sqrt(3.0) / special::kPi;
    return theta;
}

double LogisticFamily::quantile(const Vector& theta, double u) const {
    validate(theta);
    if (u <= 0.0) return -INFINITY;
    if (u >= 1.0) return INFINITY;
    return theta[0] + theta[1] * std::log(u / (1.0 - u));
}

// ---------------------------------------------------------------- gamma

void GammaFamily::cdf(const Vector& theta, ConstRowsRef points, std::span<double> out) const {
    validate(theta);
    require_univariate(points);
    require_size(out, points);
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
        const double x = points(i, 0);
        out[i] = x <= 0.0 ? 0.0 : (std::isinf(x) ? 1.0 : boost::math::gamma_p(theta[0], theta[1] * x));
    }
}

void GammaFamily::logpdf(const Vector& theta, ConstRowsRef points, std::span<double> out) const {
    validate(theta);
    require_univariate(points);
    require_size(out, points);
    const double shape = theta[0], rate = theta[1];
    const double log_c = shape * std::log(rate) - std::lgamma(shape);
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
        const double x = points(i, 0);
        out[i] = x <= 0.0 ? -INFINITY : log_c + (shape - 1.0) * std::log(x) - rate * x;
    }
}

Dataset GammaFamily::sample(const Vector& theta, Eigen::Index n, RngStream& rng) const {
    validate(theta);
    if (n < 1) throw std::invalid_argument("sample size must be positive");
    RowMatrix x(n, 1);
    for (Eigen::Index i = 0; i < n; ++i) x(i, 0) = rng.gamma(theta[0]) / theta[1];
    return Dataset(std::move(x));
}

Vector GammaFamily::moment_start(const Dataset& data) const {
    require_rows(data, 3);
    const auto x = first_column(data);
    if (*std::min_element(x.begin(), x.end()) <= 0.0) throw DegenerateData("gamma: data outside (0, inf)");
    const double m = stats::mean(x);
    const double v = checked_variance(x);
    Vector theta(2);
    theta << m * m / v, m / v;
    return theta;
}

double GammaFamily::quantile(const Vector& theta, double u) const {
    validate(theta);
    if (u <= 0.0) return 0.0;
    if (u >= 1.0) return INFINITY;
    return boost::math::gamma_p_inv(theta[0], u) / theta[1];
}

// ---------------------------------------------------------------- Weibull

void WeibullFamily::cdf(const Vector& theta, ConstRowsRef points, std::span<double> out) const {
    validate(theta);
    require_univariate(points);
    require_size(out, points);
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
        const double x = points(i, 0);
        out[i] = x <= 0.0 ? 0.0 : -std::expm1(-std::pow(x / theta[1], theta[0]));
    }
}

void WeibullFamily::logpdf(const Vector& theta, ConstRowsRef points, std::span<double> out) const {
    validate(theta);
    require_univariate(points);
    require_size(out, points);
    const double shape = theta[0], scale = theta[1];
    const double log_c = std::log(shape) - std::log(scale);
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
        const double x = points(i, 0);
        if (x <= 0.0) {
            out[i] = -INFINITY;
            continue;
        }
        const double log_ratio = std::log(x / scale);
        out[i] = log_c + (shape - 1.0) * log_ratio - std::exp(shape * log_ratio);
    }
}

Dataset WeibullFamily::sample(const Vector& theta, Eigen::Index n, RngStream& rng) const {
    validate(theta);
    if (n < 1) throw std::invalid_argument("sample size must be positive");
    RowMatrix x(n, 1);
    for (Eigen::Index i = 0; i < n; ++i) x(i, 0) = theta[1] * std::pow(rng.exponential(), 1.0 / theta[0]);
    return Dataset(std::move(x));
}

Vector WeibullFamily::moment_start(const Dataset& data) const {
    require_rows(data, 3);
    auto x = first_column(data);
    if (*std::min_element(x.begin(), x.end()) <= 0.0) throw DegenerateData("weibull: data outside (0, inf)");
    // log X is a minimum-Gumbel variable: mean log(scale) - gamma/k, variance pi^2 / (6 k^2).
    for (double& v : x) v = std::log(v);
    const double sd = std::sqrt(checked_variance(x));
    const double shape = special::kPi / (sd * std::sqrt(6.0));
    constexpr double euler_gamma = 0.57721566490153286061;
    Vector theta(2);
    theta << shape, std::exp(stats::mean(x) + euler_gamma / shape);
    return theta;
}

double WeibullFamily::quantile(const Vector& theta, double u) const {
    validate(theta);
    if (u <= 0.0) return 0.0;
    if (u >= 1.0) return INFINITY;
    return theta[1] * std::pow(-std::log1p(-u), 1.0 / theta[0]);
}

// ---------------------------------------------------------------- elliptical

EllipticalFamily::EllipticalFamily(int d, double nu) : d_(d), nu_(nu) {
    if (d < 2 || d > 3) throw DomainError("multivariate families support dimension 2 or 3");
    if (!(nu > 0.0)) throw DomainError("degrees of freedom must be positive");
}

bool EllipticalFamily::is_normal() const noexcept { return std::isinf(nu_); }

std::vector<std::string> EllipticalFamily::param_names() const {
    std::vector<std::string> names;
    for (int j = 0; j < d_; ++j) names.push_back("mu" + std::to_string(j + 1));
    for (int j = 0; j < d_; ++j) names.push_back("lambda2_" + std::to_string(j + 1));
    for (auto [i, j] : correlation_pairs(d_)) names.push_back("rho" + std::to_string(i + 1) + std::to_string(j + 1));
    return names;
}

std::vector<ParamKind> EllipticalFamily::param_kinds() const {
    std::vector<ParamKind> kinds(static_cast<std::size_t>(d_), ParamKind::Real);
    kinds.insert(kinds.end(), static_cast<std::size_t>(d_), ParamKind::Positive);
    kinds.insert(kinds.end(), static_cast<std::size_t>(d_ * (d_ - 1) / 2), ParamKind::Correlation);
    return kinds;
}

void EllipticalFamily::validate(const Vector& theta) const {
    Family::validate(theta);
    if (!correlation_cholesky(EllipticalParams::unpack(theta, d_).corr)) {
        throw DomainError(id() + ": correlation matrix is not positive definite");
    }
}

void EllipticalFamily::cdf(const Vector& theta, ConstRowsRef points, std::span<double> out) const {
    validate(theta);
    require_size(out, points);
    if (points.cols() != d_) throw DomainError("point dimension does not match family");
    const auto p = EllipticalParams::unpack(theta, d_);
    const Vector scale = p.lambda2.cwiseSqrt();
    Vector z(d_);
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
        for (int j = 0; j < d_; ++j) z[j] = (points(i, j) - p.mu[j]) / scale[j];
        out[i] = mvcdf::mvt_cdf(as_point(z), p.corr, nu_);
    }
}

void EllipticalFamily::logpdf(const Vector& theta, ConstRowsRef points, std::span<double> out) const {
    validate(theta);
    require_size(out, points);
    if (points.cols() != d_) throw DomainError("point dimension does not match family");
    const auto p = EllipticalParams::unpack(theta, d_);
    const Matrix l = *correlation_cholesky(p.corr);
    const Vector scale = p.lambda2.cwiseSqrt();
    const double log_det = 2.0 * l.diagonal().array().log().sum();
    const double log_scale = 0.5 * p.lambda2.array().log().sum();
    const double log_c = (is_normal() ? -d_ * special::kLogSqrtTwoPi : special::mvt_log_normalizer(nu_, d_)) -
                         0.5 * log_det - log_scale;
    double z[3], y[3];
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
        for (int j = 0; j < d_; ++j) z[j] = (points(i, j) - p.mu[j]) / scale[j];
        double q = 0.0;
        for (int j = 0; j < d_; ++j) {
            double s = z[j];
            for (int k = 0; k < j; ++k) s -= l(j, k) * y[k];
            y[j] = s / l(j, j);
            q += y[j] * y[j];
        }
        out[i] = is_normal() ? log_c - 0.5 * q : log_c - 0.5 * (nu_ + d_) * std::log1p(q / nu_);
    }
}

Dataset EllipticalFamily::sample(const Vector& theta, Eigen::Index n, RngStream& rng) const {
    validate(theta);
    if (n < 1) throw std::invalid_argument("sample size must be positive");
    const auto p = EllipticalParams::unpack(theta, d_);
    const Matrix l = *correlation_cholesky(p.corr);
    const Vector scale = p.lambda2.cwiseSqrt();
    RowMatrix x(n, d_);
    Vector z(d_);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (int j = 0; j < d_; ++j) z[j] = rng.normal();
        const Vector y = l * z;
        const double mix = is_normal() ? 1.0 : std::sqrt(rng.chi_square(nu_) / nu_);
        for (int j = 0; j < d_; ++j) x(i, j) = p.mu[j] + scale[j] * y[j] / mix;
    }
    return Dataset(std::move(x));
}

Vector EllipticalFamily::moment_start(const Dataset& data) const {
    if (data.dim() != d_) throw DomainError("data dimension does not match family");
    require_rows(data, d_ + 2);
    EllipticalParams p;
    p.mu = stats::column_means(data.matrix());
    const Matrix cov = stats::covariance(data.matrix());
    p.lambda2 = cov.diagonal();
    for (int j = 0; j < d_; ++j) {
        if (!(p.lambda2[j] > 0.0)) throw DegenerateData("sample variance is zero in column " + std::to_string(j + 1));
    }
    p.corr = project_correlation(stats::correlation(data.matrix()));
    if (!is_normal()) {
        if (nu_ > 2.0) {
            p.lambda2 *= (nu_ - 2.0) / nu_;
        } else {
            for (int j = 0; j < d_; ++j) {
                const auto col = stats::column(data.matrix(), j);
                const double iqr = stats::quantile(col, 0.75) - stats::quantile(col, 0.25);
                const double s = iqr / (2.0 * special::t_quantile(0.75, nu_));
                if (s > 0.0) p.lambda2[j] = s * s;
                p.mu[j] = stats::median(col);
            }
        }
    }
    return p.pack();
}

MvNormalFamily::MvNormalFamily(int d) : EllipticalFamily(d, mvcdf::kNormalDof) {}

std::optional<Vector> MvNormalFamily::closed_form_mle(const Dataset& data) const {
    Vector theta = EllipticalFamily::moment_start(data);
    const double n = static_cast<double>(data.n());
    theta.segment(d_, d_) *= (n - 1.0) / n;
    return theta;
}

MvTFamily::MvTFamily(int d, double nu) : EllipticalFamily(d, nu) {
    if (!std::isfinite(nu)) throw DomainError("multivariate t needs finite degrees of freedom");
}

std::string MvTFamily::id() const { return "mvt" + format_dof(nu_); }

}  // namespace gofmult
