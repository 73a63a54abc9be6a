#include "gofmult/mvt_analytic.hpp"

#include "gofmult/distributions.hpp"
#include "gofmult/errors.hpp"
#include "gofmult/mvcdf.hpp"
#include "gofmult/special.hpp"

#include <cmath>

namespace gofmult::mvt_analytic {

namespace {

// Adjugate and determinant of a 2x2 or 3x3 symmetric matrix.
struct Adjugate {
    Matrix adj;
    double det;
};

Adjugate adjugate(const Matrix& a) {
    Adjugate out;
    if (a.rows() == 2) {
        out.adj.resize(2, 2);
        out.adj << a(1, 1), -a(0, 1), -a(1, 0), a(0, 0);
        out.det = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
        return out;
    }
    out.adj.resize(3, 3);
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            const int r0 = (j + 1) % 3, r1 = (j + 2) % 3;
            const int c0 = (i + 1) % 3, c1 = (i + 2) % 3;
            out.adj(i, j) = a(r0, c0) * a(r1, c1) - a(r0, c1) * a(r1, c0);
        }
    }
    out.det = a(0, 0) * out.adj(0, 0) + a(0, 1) * out.adj(1, 0) + a(0, 2) * out.adj(2, 0);
    return out;
}

Vector standardize(const MvtParams& p, Point x) {
    if (static_cast<int>(x.size()) != p.dim()) throw DomainError("point dimension does not match parameters");
    Vector z(p.dim());
    for (int j = 0; j < p.dim(); ++j) z[j] = (x[j] - p.mu[j]) / std::sqrt(p.lambda2[j]);
    return z;
}

}  // namespace

MvtParams MvtParams::from_theta(const Vector& theta, int d, double nu) {
    if (d < 2 || d > 3) throw DomainError("analytic gradients support d in {2, 3}");
    if (theta.size() != 2 * d + d * (d - 1) / 2) throw DomainError("parameter vector has the wrong length");
    const auto e = EllipticalParams::unpack(theta, d);
    MvtParams p{e.mu, e.lambda2, e.corr, nu};
    p.validate();
    return p;
}

void MvtParams::validate() const {
    const int d = dim();
    if (d < 2 || d > 3) throw DomainError("analytic gradients support d in {2, 3}");
    if (lambda2.size() != d || corr.rows() != d || corr.cols() != d) throw DomainError("inconsistent parameter sizes");
    if (!(nu > 0.0)) throw DomainError("degrees of freedom must be positive");
    if (!mu.allFinite() || !(lambda2.array() > 0.0).all() || !lambda2.allFinite()) {
        throw DomainError("locations must be finite and dispersions positive");
    }
    if (!correlation_cholesky(corr)) throw DomainError("correlation matrix is not positive definite");
}

double cdf_partial(const Matrix& corr, double nu, Point z, int j) {
    const int d = static_cast<int>(corr.rows());
    const double zj = z[j];
    const double marginal = special::t_pdf(zj, nu);
    if (marginal == 0.0) return 0.0;
    const double factor = std::isinf(nu) ? 1.0 : std::sqrt((nu + 1.0) / (nu + zj * zj));
    const double cond_nu = nu + 1.0;
    int rest[2], k = 0;
    for (int i = 0; i < d; ++i) {
        if (i != j) rest[k++] = i;
    }
    double w[2], scale[2];
    for (int a = 0; a < d - 1; ++a) {
        const int i = rest[a];
        scale[a] = std::sqrt(1.0 - corr(i, j) * corr(i, j));
        w[a] = factor * (z[i] - zj * corr(i, j)) / scale[a];
    }
    if (d == 2) return marginal * special::t_cdf(w[0], cond_nu);
    const double lambda01 = corr(rest[0], rest[1]) - corr(rest[0], j) * corr(rest[1], j);
    const double r = lambda01 / (scale[0] * scale[1]);
    return marginal * mvcdf::bvt_cdf(w[0], w[1], r, cond_nu);
}

double cdf_rho_partial(const Matrix& corr, double nu, Point z, int i, int j) {
    const int d = static_cast<int>(corr.rows());
    const double rho = corr(i, j);
    const double det = 1.0 - rho * rho;
    const double q = (z[i] * z[i] - 2.0 * rho * z[i] * z[j] + z[j] * z[j]) / det;
    // Scale mixture of the normal identity: the mixing weight tilts the
    // chi-square law, which leaves exponent -nu/2 and nu degrees of freedom.
    const double kernel = std::isinf(nu) ? std::exp(-0.5 * q) : std::pow(1.0 + q / nu, -0.5 * nu);
    const double pair = kernel / (special::kTwoPi * std::sqrt(det));
    if (d == 2) return pair;
    const int k = 3 - i - j;
    // Conditional mean and variance of Z_k given (Z_i, Z_j) under the normal law.
    const double bi = (corr(k, i) - rho * corr(k, j)) / det;
    const double bj = (corr(k, j) - rho * corr(k, i)) / det;
    const double m = bi * z[i] + bj * z[j];
    const double s2 = 1.0 - bi * corr(k, i) - bj * corr(k, j);
    const double spread = std::isinf(nu) ? 1.0 : std::sqrt(1.0 + q / nu);
    return pair * special::t_cdf((z[k] - m) / (std::sqrt(s2) * spread), nu);
}

Vector mvt_cdf_grad(const MvtParams& p, Point x) {
    const int d = p.dim();
    const Vector z = standardize(p, x);
    Vector g(p.param_count());
    for (int j = 0; j < d; ++j) {
        const double lambda = std::sqrt(p.lambda2[j]);
        const double partial = cdf_partial(p.corr, p.nu, as_point(z), j);
        g[j] = -partial / lambda;
        g[d + j] = -(x[j] - p.mu[j]) / (2.0 * lambda * p.lambda2[j]) * partial;
    }
    int k = 2 * d;
    for (auto [i, j] : correlation_pairs(d)) g[k++] = cdf_rho_partial(p.corr, p.nu, as_point(z), i, j);
    return g;
}

Vector mvt_logpdf_grad(const MvtParams& p, Point x) {
    const int d = p.dim();
    const Vector z = standardize(p, x);
    const Adjugate a = adjugate(p.corr);
    const Matrix inv = a.adj / a.det;
    const Vector r_z = inv * z;
    const double q = z.dot(r_z);
    const double shrink = std::isinf(p.nu) ? 1.0 : (p.nu + d) / (p.nu + q);
    Vector g(p.param_count());
    for (int j = 0; j < d; ++j) {
        const double lambda = std::sqrt(p.lambda2[j]);
        const double ratio = -shrink * r_z[j];  // t^(j)(z) / t(z)
        g[j] = -ratio / lambda;
        g[d + j] = -0.5 / p.lambda2[j] - (x[j] - p.mu[j]) / (2.0 * lambda * p.lambda2[j]) * ratio;
    }
    int k = 2 * d;
    for (auto [i, j] : correlation_pairs(d)) {
        const double ddet = 2.0 * a.adj(i, j);
        const double dquad = -2.0 * r_z[i] * r_z[j];
        g[k++] = -0.5 * (ddet / a.det + shrink * dquad);
    }
    return g;
}

}  // namespace gofmult::mvt_analytic

namespace gofmult {

void MvTFamily::cdf_gradient_analytic(const Vector& theta, ConstRowsRef points, RowMatrix& out) const {
    const auto p = mvt_analytic::MvtParams::from_theta(theta, d_, nu_);
    out.resize(points.rows(), p.param_count());
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
        const Point x{points.row(i).data(), static_cast<std::size_t>(d_)};
        out.row(i) = mvt_analytic::mvt_cdf_grad(p, x).transpose();
    }
}

void MvTFamily::logpdf_gradient_analytic(const Vector& theta, ConstRowsRef points, RowMatrix& out) const {
    const auto p = mvt_analytic::MvtParams::from_theta(theta, d_, nu_);
    out.resize(points.rows(), p.param_count());
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
        const Point x{points.row(i).data(), static_cast<std::size_t>(d_)};
        out.row(i) = mvt_analytic::mvt_logpdf_grad(p, x).transpose();
    }
}

}  // namespace gofmult
