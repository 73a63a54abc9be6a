#pragma once

#include "gofmult/types.hpp"

#include <array>
#include <limits>

/// Deterministic kernels for standard bivariate/trivariate normal and t
/// orthant probabilities P(X_1 <= a_1, ..., X_d <= a_d), d <= 3.
///
/// No randomized lattice rules are used; every value is reproducible to the
/// last bit for a given input.
namespace gofmult::mvcdf {

inline constexpr double kNormalDof = std::numeric_limits<double>::infinity();

#ifndef GOFMULT_MVCDF_PANELS
#define GOFMULT_MVCDF_PANELS 16
#endif
#ifndef GOFMULT_MVCDF_PANEL_NODES
#define GOFMULT_MVCDF_PANEL_NODES 16
#endif

/// Outer quadrature resolution: panels x nodes per panel (256 by default).
inline constexpr int kOuterPanels = GOFMULT_MVCDF_PANELS;
inline constexpr int kPanelNodes = GOFMULT_MVCDF_PANEL_NODES;

/// Correlations with |rho| above this are treated as the degenerate limit.
inline constexpr double kSingularRho = 1.0 - 1e-10;

struct OrthantQuery {
    Vector upper;
    Matrix corr;
    double nu = kNormalDof;  ///< infinity encodes the normal law
};

/// P(X <= h, Y <= k) for a standard bivariate normal with correlation rho.
double bvn_cdf(double h, double k, double rho);

/// P(X <= h, Y <= k) for a standard bivariate t with nu degrees of freedom.
/// Closed-form Dunnett-Sobel series for integer nu, quadrature otherwise.
double bvt_cdf(double h, double k, double rho, double nu);

/// Same quantity by one-dimensional quadrature over the conditional law of Y
/// given X. Valid for any nu > 0; used for non-integer nu and as a cross-check.
double bvt_cdf_quadrature(double h, double k, double rho, double nu);

/// Trivariate normal orthant probability; rho = (r12, r13, r23).
double tvn_cdf(const std::array<double, 3>& upper, const std::array<double, 3>& rho);

/// Trivariate t orthant probability; rho = (r12, r13, r23).
double tvt_cdf(const std::array<double, 3>& upper, const std::array<double, 3>& rho, double nu);

/// Dispatching entry point for d in {1, 2, 3}; handles infinite limits.
double mvt_cdf(const OrthantQuery& q);
double mvt_cdf(Point upper, const Matrix& corr, double nu);

}  // namespace gofmult::mvcdf
