#pragma once

#include "gofmult/distributions.hpp"
#include "gofmult/estimation.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace gofmult {

enum class Statistic { Sn, Tn, SnStar, TnStar };
enum class Method { MP, PB };
enum class WeightKind { Normal, Rademacher };

std::string to_string(Statistic s);
std::string to_string(Method m);
std::string to_string(WeightKind w);
/// Accepts sn, tn, snstar, tnstar (case-insensitive) and Sn*, Tn*.
std::optional<Statistic> parse_statistic(std::string_view text);
std::optional<Method> parse_method(std::string_view text);
std::optional<WeightKind> parse_weights(std::string_view text);

/// Squares-type statistics average the squared process; the others take max |.|.
bool is_squares_type(Statistic s);
bool uses_grid(Statistic s);

/// Bit-packed 1(X_i <= x_j): one row of ceil(n / 8) bytes per evaluation point.
class IndicatorMatrix {
public:
    IndicatorMatrix() = default;
    IndicatorMatrix(const RowMatrix& data, const RowMatrix& points);

    [[nodiscard]] Eigen::Index n() const noexcept { return n_; }
    [[nodiscard]] Eigen::Index m() const noexcept { return m_; }
    [[nodiscard]] bool get(Eigen::Index i, Eigen::Index j) const noexcept {
        return (bytes_[static_cast<std::size_t>(j * row_bytes_ + i / 8)] >> (i % 8)) & 1U;
    }
    [[nodiscard]] Eigen::Index count(Eigen::Index j) const noexcept;

    /// out_j = sum_i w_i 1(X_i <= x_j). `table` is scratch space, reused across calls.
    void weighted_sums(const Vector& w, Vector& out, std::vector<double>& table) const;

private:
    Eigen::Index n_ = 0;
    Eigen::Index m_ = 0;
    Eigen::Index row_bytes_ = 0;
    std::vector<std::uint8_t> bytes_;
};

/// Everything a multiplier replicate needs, computed once per test.
struct GofContext {
    Statistic statistic = Statistic::SnStar;
    Dataset data;
    FitResult fit;
    RowMatrix eval_points;  ///< m x d
    IndicatorMatrix indicator;
    Vector Fhat;            ///< F_theta_n at the evaluation points
    Vector Fn;              ///< empirical CDF at the evaluation points
    RowMatrix Fdot;         ///< m x p gradient of F_theta_n at the evaluation points
};

struct GofOptions {
    int grid_size = 1000;
    WeightKind weights = WeightKind::Normal;
    bool pvalue_correction = false;  ///< (k + 1) / (N + 1) instead of k / N
    unsigned threads = 1;
    FitConfig fit;
    double max_failure_rate = 0.02;
    int min_replicates = 100;
};

struct GofResult {
    Statistic statistic = Statistic::SnStar;
    Method method = Method::MP;
    double observed = 0.0;
    std::vector<double> replicates;
    double pvalue = 0.0;
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
    Vector theta;
    int failed_replicates = 0;
    bool valid = true;
    double fit_seconds = 0.0;
    double setup_seconds = 0.0;
    double replicate_seconds = 0.0;
    double wall_seconds = 0.0;
};

/// Grid u_j = j / (m + 1) mapped through the fitted quantile function (d = 1).
RowMatrix quantile_grid(const Family& family, const Vector& theta, int m);

/// Builds the context from a fit that carries influence rows.
GofContext build_context(const Family& family, const Dataset& data, FitResult fit, Statistic statistic,
                         const GofOptions& options = {});

/// Statistic of a process sampled at the evaluation points.
double statistic_from_process(Statistic statistic, const Vector& process);

double statistic_observed(const GofContext& ctx);

/// Uncentered multipliers z; centering happens inside.
double multiplier_replicate(const GofContext& ctx, const Vector& z);

/// Straightforward O(n m p) evaluation of the same quantity, for checking.
double multiplier_replicate_direct(const GofContext& ctx, const Vector& z);

/// #{replicates >= observed} / N, or (k + 1) / (N + 1) with the correction.
double pvalue(const std::vector<double>& replicates, double observed, bool correction = false);

/// Observed statistic for a fitted theta without building a full context.
double observed_statistic(const Family& family, const Vector& theta, const Dataset& data, Statistic statistic,
                          int grid_size = 1000);

GofResult multiplier_test(const Family& family, const Dataset& data, Statistic statistic, int replicates,
                          const RngStream& rng, const GofOptions& options = {});

GofResult parametric_bootstrap_test(const Family& family, const Dataset& data, Statistic statistic, int replicates,
                                    const RngStream& rng, const GofOptions& options = {});

}  // namespace gofmult
