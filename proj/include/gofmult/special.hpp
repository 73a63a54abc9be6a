#pragma once

#include <vector>

namespace gofmult::special {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;
inline constexpr double kLogSqrtTwoPi = 0.91893853320467274178;

double norm_pdf(double x);
double norm_logpdf(double x);
double norm_cdf(double x);
double norm_quantile(double p);

/// Standard Student t with `nu` degrees of freedom; nu may be non-integer.
double t_logpdf(double x, double nu);
double t_pdf(double x, double nu);
double t_cdf(double x, double nu);
double t_quantile(double p, double nu);

/// log Gamma((nu + d) / 2) - log Gamma(nu / 2) - (d / 2) log(pi nu).
double mvt_log_normalizer(double nu, int d);

/// Gauss-Legendre rule on [-1, 1].
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

GaussRule make_gauss_legendre(int n);

}  // namespace gofmult::special
