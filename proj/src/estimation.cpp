#include "gofmult/estimation.hpp"

#include "gofmult/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

namespace gofmult {

// ---------------------------------------------------------------- simplex

NelderMeadResult nelder_mead(const std::function<double(const Vector&)>& f, const Vector& x0, const Vector& step,
                             const NelderMeadOptions& opt) {
    const Eigen::Index p = x0.size();
    std::vector<Vector> x(static_cast<std::size_t>(p + 1), x0);
    std::vector<double> fx(static_cast<std::size_t>(p + 1));
    NelderMeadResult res;
    auto eval = [&](const Vector& v) {
        ++res.evaluations;
        const double value = f(v);
        return std::isnan(value) ? INFINITY : value;
    };
    fx[0] = eval(x0);
    if (!std::isfinite(fx[0])) throw DomainError("objective is not finite at the starting point");
    for (Eigen::Index i = 0; i < p; ++i) {
        x[static_cast<std::size_t>(i + 1)][i] += step[i];
        fx[static_cast<std::size_t>(i + 1)] = eval(x[static_cast<std::size_t>(i + 1)]);
    }

    std::vector<std::size_t> order(x.size());
    while (true) {
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fx[a] < fx[b]; });
        const std::size_t lo = order.front(), hi = order.back(), second = order[order.size() - 2];
        double extent = 0.0;
        for (const auto& v : x) extent = std::max(extent, (v - x[lo]).cwiseAbs().maxCoeff());
        // vertices straddling the optimum can tie in value while the simplex is still wide
        if (fx[hi] - fx[lo] <= opt.rel_tol * (std::abs(fx[lo]) + opt.rel_tol) && extent <= opt.x_tol) {
            res.converged = true;
            break;
        }
        if (res.iterations >= opt.max_iter) break;
        ++res.iterations;

        Vector centroid = Vector::Zero(p);
        for (std::size_t k = 0; k + 1 < order.size(); ++k) centroid += x[order[k]];
        centroid /= static_cast<double>(p);

        const Vector xr = centroid + opt.reflection * (centroid - x[hi]);
        const double fr = eval(xr);
        if (fr < fx[lo]) {
            const Vector xe = centroid + opt.expansion * (xr - centroid);
            const double fe = eval(xe);
            if (fe < fr) {
                x[hi] = xe;
                fx[hi] = fe;
            } else {
                x[hi] = xr;
                fx[hi] = fr;
            }
            continue;
        }
        if (fr < fx[second]) {
            x[hi] = xr;
            fx[hi] = fr;
            continue;
        }
        if (fr < fx[hi]) {
            const Vector xc = centroid + opt.contraction * (xr - centroid);
            const double fc = eval(xc);
            if (fc <= fr) {
                x[hi] = xc;
                fx[hi] = fc;
                continue;
            }
        } else {
            const Vector xc = centroid + opt.contraction * (x[hi] - centroid);
            const double fc = eval(xc);
            if (fc < fx[hi]) {
                x[hi] = xc;
                fx[hi] = fc;
                continue;
            }
        }
        for (std::size_t k = 0; k < x.size(); ++k) {
            if (k == lo) continue;
            x[k] = x[lo] + opt.shrink * (x[k] - x[lo]);
            fx[k] = eval(x[k]);
        }
    }
    const auto best = static_cast<std::size_t>(std::min_element(fx.begin(), fx.end()) - fx.begin());
    res.x = x[best];
    res.value = fx[best];
    return res;
}

// ---------------------------------------------------------------- Richardson

RowMatrix richardson_jacobian(const std::function<Vector(const Vector&)>& f, const Vector& theta,
                              const DomainPredicate& in_domain, const RichardsonOptions& opt) {
    const Eigen::Index p = theta.size();
    const int levels = opt.levels;

    auto probe = [&](const Vector& at) -> std::optional<Vector> {
        if (in_domain && !in_domain(at)) return std::nullopt;
        try {
            Vector v = f(at);
            if (!v.allFinite()) return std::nullopt;
            return v;
        } catch (const Error&) {
            return std::nullopt;
        }
    };

    std::optional<Vector> center;
    RowMatrix jac;
    for (Eigen::Index i = 0; i < p; ++i) {
        const double h0 = std::abs(theta[i]) < opt.zero_tol ? opt.abs_step : opt.rel_step * std::abs(theta[i]);
        std::vector<Vector> diffs;
        int order_step = 2;

        // Central differences first; fall back to forward then backward.
        for (int k = 0; k < levels; ++k) {
            const double h = h0 / std::pow(opt.ratio, k);
            Vector up = theta, down = theta;
            up[i] += h;
            down[i] -= h;
            auto fu = probe(up);
            auto fd = fu ? probe(down) : std::nullopt;
            if (!fu || !fd) {
                diffs.clear();
                break;
            }
            diffs.push_back((*fu - *fd) / (2.0 * h));
        }
        if (diffs.empty()) {
            if (!center) {
                center = probe(theta);
                if (!center) throw NumericalFailure("function is not finite at the differentiation point");
            }
            order_step = 1;
            for (double sign : {1.0, -1.0}) {
                diffs.clear();
                for (int k = 0; k < levels; ++k) {
                    const double h = sign * h0 / std::pow(opt.ratio, k);
                    Vector at = theta;
                    at[i] += h;
                    auto fa = probe(at);
                    if (!fa) {
                        diffs.clear();
                        break;
                    }
                    diffs.push_back((*fa - *center) / h);
                }
                if (!diffs.empty()) break;
            }
            if (diffs.empty()) throw NumericalFailure("no admissible finite-difference step for parameter " + std::to_string(i));
        }
        for (int m = 1; m < levels; ++m) {
            const double factor = std::pow(opt.ratio, order_step * m);
            for (int k = 0; k + m < levels; ++k) {
                diffs[static_cast<std::size_t>(k)] =
                    (factor * diffs[static_cast<std::size_t>(k + 1)] - diffs[static_cast<std::size_t>(k)]) / (factor - 1.0);
            }
        }
        if (i == 0) jac.resize(diffs.front().size(), p);
        jac.col(i) = diffs.front();
    }
    return jac;
}

Vector richardson_gradient(const std::function<double(const Vector&)>& f, const Vector& theta,
                           const DomainPredicate& in_domain, const RichardsonOptions& options) {
    const auto wrapped = [&](const Vector& at) { return Vector::Constant(1, f(at)); };
    return richardson_jacobian(wrapped, theta, in_domain, options).row(0).transpose();
}

// ---------------------------------------------------------------- information

InformationEstimate information_estimate(const RowMatrix& scores) {
    const Eigen::Index n = scores.rows(), p = scores.cols();
    if (n <= p) throw SingularInformation("need more observations than parameters");
    if (!scores.allFinite()) throw SingularInformation("scores contain non-finite values");
    const RowMatrix centered = scores.rowwise() - scores.colwise().mean();
    InformationEstimate out;
    out.info = (centered.transpose() * centered) / static_cast<double>(n - 1);
    out.info = 0.5 * (out.info + out.info.transpose());
    const Eigen::SelfAdjointEigenSolver<Matrix> eig(out.info, Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues().minCoeff(), hi = eig.eigenvalues().maxCoeff();
    if (!(lo > 0.0) || hi / lo > 1e12) throw SingularInformation("information matrix is singular or ill-conditioned");
    const Eigen::LLT<Matrix> llt(out.info);
    if (llt.info() != Eigen::Success) throw SingularInformation("information matrix is not positive definite");
    out.inverse = llt.solve(Matrix::Identity(p, p));
    out.inverse = 0.5 * (out.inverse + out.inverse.transpose());
    return out;
}

// ---------------------------------------------------------------- gradients

RowMatrix score_matrix(const Family& family, const Vector& theta, ConstRowsRef data, bool analytic) {
    if (analytic && family.has_analytic_gradients()) {
        RowMatrix out;
        family.logpdf_gradient_analytic(theta, data, out);
        return out;
    }
    const auto f = [&](const Vector& t) { return family.logpdf(t, data); };
    const auto dom = [&](const Vector& t) { return family.in_domain(t); };
    return richardson_jacobian(f, theta, dom);
}

RowMatrix cdf_gradient(const Family& family, const Vector& theta, ConstRowsRef points, bool analytic) {
    if (analytic && family.has_analytic_gradients()) {
        RowMatrix out;
        family.cdf_gradient_analytic(theta, points, out);
        return out;
    }
    const auto f = [&](const Vector& t) { return family.cdf(t, points); };
    const auto dom = [&](const Vector& t) { return family.in_domain(t); };
    return richardson_jacobian(f, theta, dom);
}

// ---------------------------------------------------------------- MLE

namespace {

void check_data(const Family& family, const Dataset& data) {
    if (data.dim() != family.dim()) {
        throw DomainError(family.id() + ": data has dimension " + std::to_string(data.dim()) + ", family expects " +
                          std::to_string(family.dim()));
    }
    if (data.n() <= family.param_count()) throw DegenerateData("need more observations than parameters");
}

void finish_fit(const Family& family, const Dataset& data, const FitConfig& config, FitResult& fit) {
    fit.loglik = family.loglik(fit.theta, data.matrix());
    if (!std::isfinite(fit.loglik)) throw NumericalFailure("log-likelihood is not finite at the estimate");
    if (!config.compute_influence) return;
    fit.scores = score_matrix(family, fit.theta, data.matrix(), config.use_analytic_grads);
    auto info = information_estimate(fit.scores);
    fit.info = std::move(info.info);
    fit.info_inv = std::move(info.inverse);
    fit.influence = fit.scores * fit.info_inv;
}

}  // namespace

FitResult fit_mle_from(const Family& family, const Dataset& data, const Vector& start, const FitConfig& config) {
    check_data(family, data);
    family.validate(start);
    const Eigen::Index p = start.size();
    const Vector eta0 = family.to_unconstrained(start);
    const Vector scale = eta0.cwiseAbs().cwiseMax(config.scale_guard);
    const Vector step = (0.1 * eta0.cwiseAbs().cwiseMax(0.1)).cwiseQuotient(scale);

    const auto objective = [&](const Vector& u) -> double {
        const Vector theta = family.from_unconstrained(u.cwiseProduct(scale));
        if (!family.in_domain(theta)) return INFINITY;
        const double ll = family.loglik(theta, data.matrix());
        return std::isfinite(ll) ? -ll : INFINITY;
    };

    NelderMeadOptions nm;
    nm.max_iter = config.max_iter > 0 ? config.max_iter : 2000 * static_cast<int>(p);
    nm.rel_tol = config.rel_tol;

    FitResult fit;
    Vector u = eta0.cwiseQuotient(scale);
    double best = INFINITY;
    bool converged = false;
    for (int run = 0; run <= config.restarts; ++run) {
        const auto res = nelder_mead(objective, u, step, nm);
        fit.iterations += res.iterations;
        fit.evaluations += res.evaluations;
        converged = res.converged;
        const bool improved = res.value < best - config.rel_tol * (std::abs(best) + config.rel_tol);
        if (res.value < best) {
            best = res.value;
            u = res.x;
        }
        if (!converged) continue;
        if (run > 0 && !improved) break;
    }
    if (!converged) throw NonConvergence(family.id() + ": simplex did not converge within the iteration cap");
    fit.theta = family.from_unconstrained(u.cwiseProduct(scale));
    fit.converged = true;
    finish_fit(family, data, config, fit);
    return fit;
}

FitResult fit_mle(const Family& family, const Dataset& data, const FitConfig& config) {
    check_data(family, data);
    if (config.use_closed_form) {
        if (auto theta = family.closed_form_mle(data)) {
            FitResult fit;
            fit.theta = std::move(*theta);
            fit.converged = true;
            family.validate(fit.theta);
            finish_fit(family, data, config, fit);
            return fit;
        }
    }
    return fit_mle_from(family, data, family.moment_start(data), config);
}

}  // namespace gofmult
