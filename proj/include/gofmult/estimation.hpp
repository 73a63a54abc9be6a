#pragma once

#include "gofmult/distributions.hpp"

#include <functional>

namespace gofmult {

struct FitConfig {
    int max_iter = 0;            ///< simplex iterations per run; 0 means 2000 * p
    double rel_tol = 1e-8;       ///< relative tolerance on the log-likelihood
    double scale_guard = 1e-2;   ///< floor for per-parameter rescaling
    int restarts = 2;            ///< simplex restarts from the incumbent
    bool use_analytic_grads = false;
    bool use_closed_form = true;  ///< use Family::closed_form_mle when available
    bool compute_influence = true;
};

struct FitResult {
    Vector theta;
    double loglik = 0.0;
    Matrix info;
    Matrix info_inv;
    RowMatrix scores;     ///< n x p, gradient of log f at each observation
    RowMatrix influence;  ///< n x p, scores * info_inv
    bool converged = false;
    int iterations = 0;
    int evaluations = 0;
};

struct NelderMeadOptions {
    double reflection = 1.0;
    double expansion = 2.0;
    double contraction = 0.5;
    double shrink = 0.5;
    int max_iter = 1000;
    double rel_tol = 1e-8;
    double x_tol = 1e-6;  ///< largest vertex distance (max norm) allowed at convergence
};

struct NelderMeadResult {
    Vector x;
    double value = 0.0;
    int iterations = 0;
    int evaluations = 0;
    bool converged = false;
};

/// Minimizes f from x0 with an axis-aligned initial simplex of the given steps.
/// f may return +inf to reject a point.
NelderMeadResult nelder_mead(const std::function<double(const Vector&)>& f, const Vector& x0, const Vector& step,
                             const NelderMeadOptions& options = {});

struct RichardsonOptions {
    double rel_step = 1e-4;   ///< initial step as a fraction of |theta_i|
    double abs_step = 1e-4;   ///< initial step when theta_i is near zero
    double zero_tol = 1.781029e-5;
    int levels = 4;
    double ratio = 2.0;
};

/// Domain test used to keep finite-difference probes inside the parameter space.
using DomainPredicate = std::function<bool(const Vector&)>;

/// Gradient of a scalar function by Richardson-extrapolated central differences,
/// switching to one-sided differences where a probe leaves the domain.
Vector richardson_gradient(const std::function<double(const Vector&)>& f, const Vector& theta,
                           const DomainPredicate& in_domain = {}, const RichardsonOptions& options = {});

/// Jacobian (k x p) of a vector-valued function, same scheme as richardson_gradient.
RowMatrix richardson_jacobian(const std::function<Vector(const Vector&)>& f, const Vector& theta,
                              const DomainPredicate& in_domain = {}, const RichardsonOptions& options = {});

struct InformationEstimate {
    Matrix info;
    Matrix inverse;
};

/// Sample covariance of the score rows and its inverse. Throws SingularInformation.
InformationEstimate information_estimate(const RowMatrix& scores);

/// Rows: gradient of log f_theta at each data point.
RowMatrix score_matrix(const Family& family, const Vector& theta, ConstRowsRef data, bool analytic = false);

/// Rows: gradient of F_theta at each point (m x p).
RowMatrix cdf_gradient(const Family& family, const Vector& theta, ConstRowsRef points, bool analytic = false);

/// Maximum likelihood fit by Nelder-Mead from moment starting values.
/// Throws DegenerateData, NonConvergence, SingularInformation.
FitResult fit_mle(const Family& family, const Dataset& data, const FitConfig& config = {});

/// Fit from an explicit starting point, skipping the closed form.
FitResult fit_mle_from(const Family& family, const Dataset& data, const Vector& start, const FitConfig& config = {});

}  // namespace gofmult
