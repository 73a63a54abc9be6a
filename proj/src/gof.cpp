#include "gofmult/gof.hpp"

#include "gofmult/errors.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace gofmult {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string lower(std::string_view text) {
    std::string out(text);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

bool dominated(const double* x, const double* y, Eigen::Index d) {
    for (Eigen::Index k = 0; k < d; ++k) {
        if (x[k] > y[k]) return false;
    }
    return true;
}

// F_n at each row of `points`.
Vector empirical_cdf(const RowMatrix& data, const RowMatrix& points) {
    const Eigen::Index n = data.rows(), m = points.rows(), d = data.cols();
    Vector out(m);
    if (d == 1) {
        std::vector<double> sorted(data.data(), data.data() + n);
        std::sort(sorted.begin(), sorted.end());
        for (Eigen::Index j = 0; j < m; ++j) {
            const auto count = std::upper_bound(sorted.begin(), sorted.end(), points(j, 0)) - sorted.begin();
            out[j] = static_cast<double>(count) / static_cast<double>(n);
        }
        return out;
    }
    for (Eigen::Index j = 0; j < m; ++j) {
        Eigen::Index count = 0;
        for (Eigen::Index i = 0; i < n; ++i) count += dominated(data.row(i).data(), points.row(j).data(), d);
        out[j] = static_cast<double>(count) / static_cast<double>(n);
    }
    return out;
}

RowMatrix evaluation_points(const Family& family, const Vector& theta, const Dataset& data, Statistic statistic,
                            int grid_size) {
    if (!uses_grid(statistic)) return data.matrix();
    if (family.dim() != 1) throw DomainError(to_string(statistic) + " is only available for univariate families");
    return quantile_grid(family, theta, grid_size);
}

// Runs body(k) for k in [0, count) on up to `threads` workers; results must be
// written to per-k slots so the outcome does not depend on scheduling.
template <class Body>
void parallel_for(int count, unsigned threads, Body&& body) {
    threads = std::max(1U, std::min<unsigned>(threads, static_cast<unsigned>(std::max(count, 1))));
    if (threads == 1) {
        for (int k = 0; k < count; ++k) body(k, 0U);
        return;
    }
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
            try {
                for (int k = static_cast<int>(t); k < count; k += static_cast<int>(threads)) body(k, t);
            } catch (...) {
                const std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

void check_replicates(int replicates, const GofOptions& options) {
    if (replicates < options.min_replicates) {
        throw std::invalid_argument("number of replicates must be at least " + std::to_string(options.min_replicates));
    }
}

}  // namespace

std::string to_string(Statistic s) {
    switch (s) {
        case Statistic::Sn: return "Sn";
        case Statistic::Tn: return "Tn";
        case Statistic::SnStar: return "Sn*";
        case Statistic::TnStar: return "Tn*";
    }
    return "?";
}

std::string to_string(Method m) { return m == Method::MP ? "MP" : "PB"; }

std::string to_string(WeightKind w) { return w == WeightKind::Normal ? "normal" : "rademacher"; }

std::optional<Statistic> parse_statistic(std::string_view text) {
    const std::string s = lower(text);
    if (s == "sn") return Statistic::Sn;
    if (s == "tn") return Statistic::Tn;
    if (s == "snstar" || s == "sn*") return Statistic::SnStar;
    if (s == "tnstar" || s == "tn*") return Statistic::TnStar;
    return std::nullopt;
}

std::optional<Method> parse_method(std::string_view text) {
    const std::string s = lower(text);
    if (s == "mp") return Method::MP;
    if (s == "pb") return Method::PB;
    return std::nullopt;
}

std::optional<WeightKind> parse_weights(std::string_view text) {
    const std::string s = lower(text);
    if (s == "normal") return WeightKind::Normal;
    if (s == "rademacher") return WeightKind::Rademacher;
    return std::nullopt;
}

bool is_squares_type(Statistic s) { return s == Statistic::Sn || s == Statistic::SnStar; }

bool uses_grid(Statistic s) { return s == Statistic::Sn || s == Statistic::Tn; }

// ---------------------------------------------------------------- indicator

IndicatorMatrix::IndicatorMatrix(const RowMatrix& data, const RowMatrix& points)
    : n_(data.rows()), m_(points.rows()), row_bytes_((data.rows() + 7) / 8) {
    if (data.cols() != points.cols()) throw DomainError("indicator: dimension mismatch");
    bytes_.assign(static_cast<std::size_t>(m_ * row_bytes_), 0);
    const Eigen::Index d = data.cols();
    for (Eigen::Index j = 0; j < m_; ++j) {
        std::uint8_t* row = bytes_.data() + j * row_bytes_;
        for (Eigen::Index i = 0; i < n_; ++i) {
            if (dominated(data.row(i).data(), points.row(j).data(), d)) row[i / 8] |= static_cast<std::uint8_t>(1U << (i % 8));
        }
    }
}

Eigen::Index IndicatorMatrix::count(Eigen::Index j) const noexcept {
    Eigen::Index c = 0;
    const std::uint8_t* row = bytes_.data() + j * row_bytes_;
    for (Eigen::Index b = 0; b < row_bytes_; ++b) c += std::popcount(row[b]);
    return c;
}

void IndicatorMatrix::weighted_sums(const Vector& w, Vector& out, std::vector<double>& table) const {
    // Per 8-observation block, tabulate the weight sum of every bit pattern,
    // then each evaluation point costs one lookup per block.
    table.resize(static_cast<std::size_t>(row_bytes_) * 256);
    for (Eigen::Index b = 0; b < row_bytes_; ++b) {
        double* t = table.data() + b * 256;
        double wb[8];
        for (int k = 0; k < 8; ++k) {
            const Eigen::Index i = 8 * b + k;
            wb[k] = i < n_ ? w[i] : 0.0;
        }
        t[0] = 0.0;
        for (unsigned v = 1; v < 256; ++v) t[v] = t[v & (v - 1)] + wb[std::countr_zero(v)];
    }
    out.resize(m_);
    for (Eigen::Index j = 0; j < m_; ++j) {
        const std::uint8_t* row = bytes_.data() + j * row_bytes_;
        const double* t = table.data();
        double s = 0.0;
        for (Eigen::Index b = 0; b < row_bytes_; ++b, t += 256) s += t[row[b]];
        out[j] = s;
    }
}

// ---------------------------------------------------------------- context

RowMatrix quantile_grid(const Family& family, const Vector& theta, int m) {
    if (family.dim() != 1) throw DomainError("quantile grid needs a univariate family");
    if (m < 1) throw std::invalid_argument("grid size must be positive");
    RowMatrix grid(m, 1);
    for (int j = 0; j < m; ++j) grid(j, 0) = family.quantile(theta, (j + 1.0) / (m + 1.0));
    return grid;
}

GofContext build_context(const Family& family, const Dataset& data, FitResult fit, Statistic statistic,
                         const GofOptions& options) {
    if (fit.influence.rows() != data.n() || fit.influence.cols() != family.param_count()) {
        throw std::invalid_argument("fit does not carry influence rows for this sample");
    }
    GofContext ctx;
    ctx.statistic = statistic;
    ctx.data = data;
    ctx.eval_points = evaluation_points(family, fit.theta, data, statistic, options.grid_size);
    ctx.indicator = IndicatorMatrix(data.matrix(), ctx.eval_points);
    ctx.Fhat = family.cdf(fit.theta, ctx.eval_points);
    ctx.Fn.resize(ctx.eval_points.rows());
    for (Eigen::Index j = 0; j < ctx.Fn.size(); ++j) {
        ctx.Fn[j] = static_cast<double>(ctx.indicator.count(j)) / static_cast<double>(data.n());
    }
    ctx.Fdot = cdf_gradient(family, fit.theta, ctx.eval_points, options.fit.use_analytic_grads);
    ctx.fit = std::move(fit);
    return ctx;
}

double statistic_from_process(Statistic statistic, const Vector& process) {
    if (process.size() == 0) return 0.0;
    if (is_squares_type(statistic)) return process.squaredNorm() / static_cast<double>(process.size());
    return process.cwiseAbs().maxCoeff();
}

double statistic_observed(const GofContext& ctx) {
    const double root_n = std::sqrt(static_cast<double>(ctx.data.n()));
    return statistic_from_process(ctx.statistic, root_n * (ctx.Fn - ctx.Fhat));
}

double multiplier_replicate(const GofContext& ctx, const Vector& z) {
    const Eigen::Index n = ctx.data.n();
    if (z.size() != n) throw std::invalid_argument("multiplier vector has the wrong length");
    const Vector w = z.array() - z.mean();
    thread_local std::vector<double> table;
    Vector sums;
    ctx.indicator.weighted_sums(w, sums, table);
    const Vector a = ctx.fit.influence.transpose() * w;
    const Vector process = (sums - ctx.Fdot * a) / std::sqrt(static_cast<double>(n));
    return statistic_from_process(ctx.statistic, process);
}

double multiplier_replicate_direct(const GofContext& ctx, const Vector& z) {
    const Eigen::Index n = ctx.data.n(), m = ctx.eval_points.rows();
    const double zbar = z.mean();
    Vector process = Vector::Zero(m);
    for (Eigen::Index j = 0; j < m; ++j) {
        double s = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double ind = ctx.indicator.get(i, j) ? 1.0 : 0.0;
            s += (z[i] - zbar) * (ind - ctx.fit.influence.row(i).dot(ctx.Fdot.row(j)));
        }
        process[j] = s / std::sqrt(static_cast<double>(n));
    }
    return statistic_from_process(ctx.statistic, process);
}

double pvalue(const std::vector<double>& replicates, double observed, bool correction) {
    if (replicates.empty()) return std::nan("");
    const auto k = std::count_if(replicates.begin(), replicates.end(), [&](double r) { return r >= observed; });
    const auto n = static_cast<double>(replicates.size());
    return correction ? (static_cast<double>(k) + 1.0) / (n + 1.0) : static_cast<double>(k) / n;
}

double observed_statistic(const Family& family, const Vector& theta, const Dataset& data, Statistic statistic,
                          int grid_size) {
    const RowMatrix points = evaluation_points(family, theta, data, statistic, grid_size);
    const Vector fhat = family.cdf(theta, points);
    const Vector fn = empirical_cdf(data.matrix(), points);
    return statistic_from_process(statistic, std::sqrt(static_cast<double>(data.n())) * (fn - fhat));
}

// ---------------------------------------------------------------- tests

GofResult multiplier_test(const Family& family, const Dataset& data, Statistic statistic, int replicates,
                          const RngStream& rng, const GofOptions& options) {
    check_replicates(replicates, options);
    const auto t0 = Clock::now();
    GofResult res;
    res.statistic = statistic;
    res.method = Method::MP;
    res.seed = rng.seed();
    res.stream = rng.stream_id();

    FitConfig fc = options.fit;
    fc.compute_influence = true;
    FitResult fit = fit_mle(family, data, fc);
    res.fit_seconds = seconds_since(t0);
    res.theta = fit.theta;

    const auto t1 = Clock::now();
    const GofContext ctx = build_context(family, data, std::move(fit), statistic, options);
    res.observed = statistic_observed(ctx);
    res.setup_seconds = seconds_since(t1);

    const auto t2 = Clock::now();
    res.replicates.assign(static_cast<std::size_t>(replicates), 0.0);
    const Eigen::Index n = data.n();
    parallel_for(replicates, options.threads, [&](int k, unsigned) {
        RngStream stream = rng.substream(static_cast<std::uint64_t>(k));
        Vector z(n);
        if (options.weights == WeightKind::Normal) {
            for (Eigen::Index i = 0; i < n; ++i) z[i] = stream.normal();
        } else {
            for (Eigen::Index i = 0; i < n; ++i) z[i] = stream.rademacher();
        }
        res.replicates[static_cast<std::size_t>(k)] = multiplier_replicate(ctx, z);
    });
    res.replicate_seconds = seconds_since(t2);
    res.pvalue = pvalue(res.replicates, res.observed, options.pvalue_correction);
    res.wall_seconds = seconds_since(t0);
    return res;
}

GofResult parametric_bootstrap_test(const Family& family, const Dataset& data, Statistic statistic, int replicates,
                                    const RngStream& rng, const GofOptions& options) {
    check_replicates(replicates, options);
    const auto t0 = Clock::now();
    GofResult res;
    res.statistic = statistic;
    res.method = Method::PB;
    res.seed = rng.seed();
    res.stream = rng.stream_id();

    FitConfig fc = options.fit;
    fc.compute_influence = false;
    const FitResult fit = fit_mle(family, data, fc);
    res.fit_seconds = seconds_since(t0);
    res.theta = fit.theta;

    const auto t1 = Clock::now();
    res.observed = observed_statistic(family, fit.theta, data, statistic, options.grid_size);
    res.setup_seconds = seconds_since(t1);

    const auto t2 = Clock::now();
    std::vector<double> values(static_cast<std::size_t>(replicates), 0.0);
    std::vector<char> ok(static_cast<std::size_t>(replicates), 0);
    parallel_for(replicates, options.threads, [&](int k, unsigned) {
        RngStream stream = rng.substream(static_cast<std::uint64_t>(k));
        try {
            const Dataset sample = family.sample(fit.theta, data.n(), stream);
            const FitResult refit = fit_mle(family, sample, fc);
            values[static_cast<std::size_t>(k)] =
                observed_statistic(family, refit.theta, sample, statistic, options.grid_size);
            ok[static_cast<std::size_t>(k)] = 1;
        } catch (const Error&) {
        }
    });
    for (int k = 0; k < replicates; ++k) {
        if (ok[static_cast<std::size_t>(k)]) {
            res.replicates.push_back(values[static_cast<std::size_t>(k)]);
        } else {
            ++res.failed_replicates;
        }
    }
    res.replicate_seconds = seconds_since(t2);
    res.valid = res.failed_replicates <= options.max_failure_rate * replicates;
    res.pvalue = pvalue(res.replicates, res.observed, options.pvalue_correction);
    res.wall_seconds = seconds_since(t0);
    return res;
}

}  // namespace gofmult
