#pragma once

#include "gofmult/types.hpp"

// Closed-form gradients of the multivariate t CDF and log-density with
// respect to (mu, lambda^2, rho), for d in {2, 3} and fixed nu.

namespace gofmult::mvt_analytic {

struct MvtParams {
    Vector mu;
    Vector lambda2;
    Matrix corr;
    double nu = 0.0;

    /// Unpacks theta laid out as (mu, lambda2, rho12, rho13, rho23). Throws DomainError.
    [[nodiscard]] static MvtParams from_theta(const Vector& theta, int d, double nu);
    [[nodiscard]] int dim() const { return static_cast<int>(mu.size()); }
    [[nodiscard]] int param_count() const { return 2 * dim() + dim() * (dim() - 1) / 2; }
    void validate() const;
};

/// dT_{nu,R}(z) / dz_j: marginal density times the conditional CDF of the rest.
double cdf_partial(const Matrix& corr, double nu, Point z, int j);

/// dT_{nu,R}(z) / drho_ij for i != j (Plackett-type identity).
double cdf_rho_partial(const Matrix& corr, double nu, Point z, int i, int j);

/// Gradient of F(x) = T_{nu,R}((x - mu) / lambda) in canonical parameter order.
Vector mvt_cdf_grad(const MvtParams& params, Point x);

/// Gradient of log t_{nu,R,mu,lambda}(x) in canonical parameter order.
Vector mvt_logpdf_grad(const MvtParams& params, Point x);

}  // namespace gofmult::mvt_analytic
