#include "gofmult/sklar.hpp"

#include "gofmult/errors.hpp"
#include "gofmult/mvcdf.hpp"
#include "gofmult/special.hpp"
#include "gofmult/stats.hpp"

#include <algorithm>
#include <cmath>

namespace gofmult {

namespace copula {

namespace {

constexpr double kMaxU = 1.0 - 0x1p-53;

Matrix correlation_from(const Vector& params, int d) {
    Matrix r = Matrix::Identity(d, d);
    int k = 0;
    for (auto [i, j] : correlation_pairs(d)) r(i, j) = r(j, i) = params[k++];
    return r;
}

double marginal_quantile(const CopulaSpec& spec, double u) {
    return spec.kind == CopulaKind::T ? special::t_quantile(u, spec.nu) : special::norm_quantile(u);
}

double clayton_log_sum(double theta, Point u) {
    // log(sum u_j^{-theta} - d + 1) kept accurate as theta -> 0.
    double s = 0.0;
    for (double v : u) s += std::expm1(-theta * std::log(v));
    return std::log1p(s);
}

}  // namespace

void validate(const CopulaSpec& spec, const Vector& params, int d) {
    if (params.size() != spec.param_count(d)) throw DomainError("copula parameter vector has the wrong length");
    if (spec.kind == CopulaKind::Clayton) {
        if (!(params[0] > 0.0) || !std::isfinite(params[0])) throw DomainError("Clayton parameter must be positive");
        return;
    }
    if (spec.kind == CopulaKind::T && !(spec.nu > 0.0)) throw DomainError("t copula needs positive degrees of freedom");
    for (Eigen::Index k = 0; k < params.size(); ++k) {
        if (!(std::abs(params[k]) < 1.0)) throw DomainError("copula correlation must lie in (-1, 1)");
    }
    if (!correlation_cholesky(correlation_from(params, d))) {
        throw DomainError("copula correlation matrix is not positive definite");
    }
}

double cdf(const CopulaSpec& spec, const Vector& params, Point u) {
    const int d = static_cast<int>(u.size());
    for (double v : u) {
        if (v <= 0.0) return 0.0;
    }
    if (spec.kind == CopulaKind::Clayton) {
        double ud[3];
        int m = 0;
        for (double v : u) {
            if (v < 1.0) ud[m++] = v;
        }
        if (m == 0) return 1.0;
        return std::exp(-clayton_log_sum(params[0], Point(ud, static_cast<std::size_t>(m))) / params[0]);
    }
    Vector z(d);
    for (int j = 0; j < d; ++j) z[j] = u[j] >= 1.0 ? INFINITY : marginal_quantile(spec, u[j]);
    return mvcdf::mvt_cdf(as_point(z), correlation_from(params, d), spec.nu);
}

double logpdf(const CopulaSpec& spec, const Vector& params, Point u) {
    const int d = static_cast<int>(u.size());
    for (double v : u) {
        if (!(v > 0.0 && v < 1.0)) return -INFINITY;
    }
    if (spec.kind == CopulaKind::Clayton) {
        const double theta = params[0];
        double out = 0.0, sum_log_u = 0.0;
        for (int k = 1; k < d; ++k) out += std::log1p(k * theta);
        for (double v : u) sum_log_u += std::log(v);
        return out - (theta + 1.0) * sum_log_u - (1.0 / theta + d) * clayton_log_sum(theta, u);
    }
    const Matrix r = correlation_from(params, d);
    const Matrix l = *correlation_cholesky(r);
    double z[3], y[3], q = 0.0, zz = 0.0;
    for (int j = 0; j < d; ++j) {
        z[j] = marginal_quantile(spec, u[j]);
        double s = z[j];
        for (int k = 0; k < j; ++k) s -= l(j, k) * y[k];
        y[j] = s / l(j, j);
        q += y[j] * y[j];
        zz += z[j] * z[j];
    }
    const double log_det = 2.0 * l.diagonal().array().log().sum();
    if (spec.kind == CopulaKind::Normal) return -0.5 * log_det - 0.5 * (q - zz);
    const double nu = spec.nu;
    double margins = 0.0;
    for (int j = 0; j < d; ++j) margins += special::t_logpdf(z[j], nu);
    return special::mvt_log_normalizer(nu, d) - 0.5 * log_det - 0.5 * (nu + d) * std::log1p(q / nu) - margins;
}

RowMatrix sample(const CopulaSpec& spec, const Vector& params, int d, Eigen::Index n, RngStream& rng) {
    validate(spec, params, d);
    RowMatrix u(n, d);
    if (spec.kind == CopulaKind::Clayton) {
        const double theta = params[0];
        for (Eigen::Index i = 0; i < n; ++i) {
            const double v = rng.gamma(1.0 / theta);
            for (int j = 0; j < d; ++j) {
                u(i, j) = std::clamp(std::exp(-std::log1p(rng.exponential() / v) / theta), 0x1p-60, kMaxU);
            }
        }
        return u;
    }
    const Matrix l = *correlation_cholesky(correlation_from(params, d));
    Vector z(d);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (int j = 0; j < d; ++j) z[j] = rng.normal();
        const Vector y = l * z;
        const double mix = spec.kind == CopulaKind::T ? std::sqrt(rng.chi_square(spec.nu) / spec.nu) : 1.0;
        for (int j = 0; j < d; ++j) {
            const double v = spec.kind == CopulaKind::T ? special::t_cdf(y[j] / mix, spec.nu) : special::norm_cdf(y[j]);
            u(i, j) = std::clamp(v, 0x1p-60, kMaxU);
        }
    }
    return u;
}

Vector tau_start(const CopulaSpec& spec, const RowMatrix& data) {
    const int d = static_cast<int>(data.cols());
    std::vector<std::vector<double>> cols;
    for (int j = 0; j < d; ++j) cols.push_back(stats::column(data, j));
    const auto pairs = correlation_pairs(d);
    if (spec.kind == CopulaKind::Clayton) {
        double tau = 0.0;
        for (auto [i, j] : pairs) tau += stats::kendall_tau(cols[i], cols[j]);
        tau /= static_cast<double>(pairs.size());
        tau = std::clamp(tau, 0.02, 0.95);
        return Vector::Constant(1, 2.0 * tau / (1.0 - tau));
    }
    Matrix r = Matrix::Identity(d, d);
    for (auto [i, j] : pairs) {
        const double tau = stats::kendall_tau(cols[i], cols[j]);
        r(i, j) = r(j, i) = std::clamp(std::sin(0.5 * special::kPi * tau), -0.99, 0.99);
    }
    r = project_correlation(r);
    Vector out(static_cast<Eigen::Index>(pairs.size()));
    int k = 0;
    for (auto [i, j] : pairs) out[k++] = r(i, j);
    return out;
}

}  // namespace copula

SklarFamily::SklarFamily(std::string id, std::vector<FamilyPtr> margins, CopulaSpec copula)
    : id_(std::move(id)), margins_(std::move(margins)), copula_(copula) {
    const int d = dim();
    if (d < 2 || d > 3) throw DomainError("copula families support dimension 2 or 3");
    int offset = 0;
    for (const auto& m : margins_) {
        if (!m || m->dim() != 1) throw DomainError("copula margins must be univariate");
        offsets_.push_back(offset);
        offset += m->param_count();
    }
    offsets_.push_back(offset);
}

std::vector<std::string> SklarFamily::param_names() const {
    std::vector<std::string> names;
    for (std::size_t j = 0; j < margins_.size(); ++j) {
        for (const auto& n : margins_[j]->param_names()) names.push_back(n + "_" + std::to_string(j + 1));
    }
    if (copula_.kind == CopulaKind::Clayton) {
        names.emplace_back("theta");
    } else {
        for (auto [i, j] : correlation_pairs(dim())) names.push_back("rho" + std::to_string(i + 1) + std::to_string(j + 1));
    }
    return names;
}

std::vector<ParamKind> SklarFamily::param_kinds() const {
    std::vector<ParamKind> kinds;
    for (const auto& m : margins_) {
        const auto mk = m->param_kinds();
        kinds.insert(kinds.end(), mk.begin(), mk.end());
    }
    const auto c = static_cast<std::size_t>(copula_.param_count(dim()));
    kinds.insert(kinds.end(), c, copula_.kind == CopulaKind::Clayton ? ParamKind::Positive : ParamKind::Correlation);
    return kinds;
}

Vector SklarFamily::margin_params(const Vector& theta, int j) const {
    return theta.segment(offsets_[j], offsets_[j + 1] - offsets_[j]);
}

Vector SklarFamily::copula_params(const Vector& theta) const {
    return theta.segment(offsets_.back(), copula_.param_count(dim()));
}

void SklarFamily::validate(const Vector& theta) const {
    Family::validate(theta);
    for (int j = 0; j < dim(); ++j) margins_[j]->validate(margin_params(theta, j));
    copula::validate(copula_, copula_params(theta), dim());
}

void SklarFamily::cdf(const Vector& theta, ConstRowsRef points, std::span<double> out) const {
    validate(theta);
    const int d = dim();
    if (points.cols() != d) throw DomainError("point dimension does not match family");
    RowMatrix u(points.rows(), d);
    Vector f(points.rows());
    for (int j = 0; j < d; ++j) {
        margins_[j]->cdf(margin_params(theta, j), points.col(j), {f.data(), static_cast<std::size_t>(f.size())});
        u.col(j) = f;
    }
    const Vector c = copula_params(theta);
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
        out[i] = copula::cdf(copula_, c, Point(u.row(i).data(), static_cast<std::size_t>(d)));
    }
}

void SklarFamily::logpdf(const Vector& theta, ConstRowsRef points, std::span<double> out) const {
    validate(theta);
    const int d = dim();
    if (points.cols() != d) throw DomainError("point dimension does not match family");
    RowMatrix u(points.rows(), d);
    Vector f(points.rows()), lf(points.rows());
    Vector marginal_sum = Vector::Zero(points.rows());
    for (int j = 0; j < d; ++j) {
        const Vector mp = margin_params(theta, j);
        margins_[j]->cdf(mp, points.col(j), {f.data(), static_cast<std::size_t>(f.size())});
        margins_[j]->logpdf(mp, points.col(j), {lf.data(), static_cast<std::size_t>(lf.size())});
        u.col(j) = f;
        marginal_sum += lf;
    }
    const Vector c = copula_params(theta);
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
        if (!std::isfinite(marginal_sum[i])) {
            out[i] = -INFINITY;
            continue;
        }
        out[i] = marginal_sum[i] + copula::logpdf(copula_, c, Point(u.row(i).data(), static_cast<std::size_t>(d)));
    }
}

Dataset SklarFamily::sample(const Vector& theta, Eigen::Index n, RngStream& rng) const {
    validate(theta);
    if (n < 1) throw std::invalid_argument("sample size must be positive");
    RowMatrix x = copula::sample(copula_, copula_params(theta), dim(), n, rng);
    for (int j = 0; j < dim(); ++j) {
        const Vector mp = margin_params(theta, j);
        for (Eigen::Index i = 0; i < n; ++i) x(i, j) = margins_[j]->quantile(mp, x(i, j));
    }
    return Dataset(std::move(x));
}

Vector SklarFamily::moment_start(const Dataset& data) const {
    const int d = dim();
    if (data.dim() != d) throw DomainError("data dimension does not match family");
    if (data.n() < d + 2) throw DegenerateData("too few observations for starting values");
    Vector theta(param_count());
    for (int j = 0; j < d; ++j) {
        RowMatrix col = data.matrix().col(j);
        theta.segment(offsets_[j], offsets_[j + 1] - offsets_[j]) = margins_[j]->moment_start(Dataset(std::move(col)));
    }
    theta.tail(copula_.param_count(d)) = copula::tau_start(copula_, data.matrix());
    return theta;
}

}  // namespace gofmult
