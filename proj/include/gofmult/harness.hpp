#pragma once

#include "gofmult/gof.hpp"

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace gofmult {

// ---------------------------------------------------------------- CSV

/// Comma-separated numeric rows, optional header line, '.' decimal separator.
/// Throws ParseError with 1-based row and column.
Dataset parse_csv(std::istream& in);
/// Throws IoError if the file cannot be opened.
Dataset read_csv(const std::string& path);
void write_csv(const Dataset& data, const std::string& path);

// ---------------------------------------------------------------- single test

std::string gof_result_json(const GofResult& result, const Family& family, const Dataset& data);

// ---------------------------------------------------------------- experiments

struct ExperimentConfig {
    std::string true_family = "norm";
    int dim = 1;
    Vector true_theta;
    std::vector<std::string> hypothesized{"norm"};
    std::vector<int> n_grid{100};
    int reps = 500;
    int replicates = 250;
    std::vector<Statistic> statistics{Statistic::SnStar};
    std::vector<Method> methods{Method::MP};
    double level = 0.05;
    std::uint64_t seed = 1;
    unsigned threads = 1;
    GofOptions gof;
};

struct CellResult {
    int n = 0;
    std::string family;
    Statistic statistic = Statistic::SnStar;
    Method method = Method::MP;
    int completed = 0;   ///< outer replications with a valid test
    int rejections = 0;
    int failures = 0;    ///< fit failures or invalid bootstrap runs
    double rate = 0.0;   ///< rejections / completed
    double se = 0.0;     ///< binomial standard error of rate
    double mean_seconds = 0.0;
    std::vector<double> pvalues;   ///< per outer replication, NaN on failure
    std::vector<double> observed;  ///< observed statistic, NaN on failure
    std::vector<double> replicate_medians;
};

struct ExperimentReport {
    ExperimentConfig config;
    std::vector<CellResult> cells;
    double wall_seconds = 0.0;
};

/// Throws std::invalid_argument on inconsistent configs.
void validate(const ExperimentConfig& config);

/// JSON config: keys true_family, dim, true_theta, hypothesized, n_grid, reps,
/// replicates, statistics, methods, level, seed, threads, grid_size, weights,
/// analytic_gradients, pvalue_correction.
ExperimentConfig parse_experiment_config(const std::string& json_text);

/// Data for outer replication r at sample size n depends only on (seed, n, r),
/// so results do not depend on thread count or on which cells are requested.
ExperimentReport run_experiment(const ExperimentConfig& config,
                                const std::function<void(int, int)>& progress = {});

/// Rows: true family x n; one column group per hypothesized family x statistic x method.
void write_report_csv(const ExperimentReport& report, const std::string& path);
std::string report_manifest_json(const ExperimentReport& report);

// ---------------------------------------------------------------- gradient check

struct GradientCheckReport {
    int dim = 2;
    double nu = 5.0;
    int trials = 0;
    double max_rel_cdf = 0.0;
    double max_rel_logpdf = 0.0;
    double tolerance = 1e-4;
    bool pass = false;
    double seconds = 0.0;
};

/// Hook to tamper with analytic gradients before comparison (mutation testing).
using GradientCorruption = std::function<void(Vector& cdf_grad, Vector& logpdf_grad)>;

/// Relative error used by the gradient check: |a - b| / max(|b|, floor).
double gradient_relative_error(const Vector& analytic, const Vector& numeric, double floor = 1e-6);

GradientCheckReport run_gradient_check(int dim, double nu, int trials, std::uint64_t seed = 1,
                                       const GradientCorruption& corrupt = {});

// ---------------------------------------------------------------- timing

struct TimingReport {
    std::string family;
    Eigen::Index n = 0;
    int replicates = 0;
    double mp_numeric = 0.0;
    double mp_analytic = -1.0;  ///< negative when the family has no analytic gradients
    double pb = 0.0;
    double pvalue_mp_numeric = 0.0;
    double pvalue_mp_analytic = -1.0;
    double pvalue_pb = 0.0;
};

TimingReport run_timing(const Family& family, const Dataset& data, Statistic statistic, int replicates,
                        const RngStream& rng, const GofOptions& options = {});

std::string timing_json(const TimingReport& report);

}  // namespace gofmult
