// Command-line front end: single tests, Monte Carlo studies, gradient checks
// and MP-vs-PB timing.

#include "gofmult/errors.hpp"
#include "gofmult/families.hpp"
#include "gofmult/gof.hpp"
#include "gofmult/harness.hpp"
#include "gofmult/version.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitFit = 2;
constexpr int kExitIo = 3;

struct TestArgs {
    std::string family;
    std::string stat = "snstar";
    std::string method = "mp";
    std::string weights = "normal";
    int nrep = 1000;
    std::uint64_t seed = 1;
    int grid = 1000;
    unsigned threads = 1;
    bool analytic = false;
    bool correction = false;
    std::string output;
    std::string data;
};

struct StudyArgs {
    std::string config;
    std::string output = "study";
    unsigned threads = 0;
    bool quiet = false;
};

struct GradArgs {
    std::string family = "mvt5";
    int dim = 2;
    int trials = 100;
    std::uint64_t seed = 1;
};

struct SimArgs {
    std::string family;
    int dim = 1;
    std::vector<double> theta;
    int n = 100;
    std::uint64_t seed = 1;
    std::string output;
};

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw gofmult::IoError("cannot write '" + path + "'");
    out << text << '\n';
}

gofmult::FamilyPtr family_or_usage(const std::string& id, int dim) {
    try {
        return gofmult::make_family(id, dim);
    } catch (const gofmult::DomainError& e) {
        throw CLI::ValidationError("--family", e.what());
    }
}

gofmult::GofOptions options_from(const TestArgs& a) {
    gofmult::GofOptions opt;
    const auto w = gofmult::parse_weights(a.weights);
    if (!w) throw CLI::ValidationError("--weights", "expected normal or rademacher");
    opt.weights = *w;
    opt.grid_size = a.grid;
    opt.threads = a.threads;
    opt.pvalue_correction = a.correction;
    opt.fit.use_analytic_grads = a.analytic;
    return opt;
}

int run_test(const TestArgs& a) {
    const auto stat = gofmult::parse_statistic(a.stat);
    const auto method = gofmult::parse_method(a.method);
    if (!stat) throw CLI::ValidationError("--stat", "expected sn, tn, snstar or tnstar");
    if (!method) throw CLI::ValidationError("--method", "expected mp or pb");
    // reject bad identifiers before touching the file
    (void)family_or_usage(a.family, gofmult::is_multivariate_id(a.family) ? 2 : 1);
    const auto opt = options_from(a);
    const auto data = gofmult::read_csv(a.data);
    const auto family = family_or_usage(a.family, static_cast<int>(data.dim()));
    const gofmult::RngStream rng(a.seed, 0);
    const auto res = *method == gofmult::Method::MP
                         ? gofmult::multiplier_test(*family, data, *stat, a.nrep, rng, opt)
                         : gofmult::parametric_bootstrap_test(*family, data, *stat, a.nrep, rng, opt);
    std::printf("family     %s (n = %ld, d = %ld)\n", family->id().c_str(), static_cast<long>(data.n()),
                static_cast<long>(data.dim()));
    std::printf("statistic  %s = %.6g\n", gofmult::to_string(res.statistic).c_str(), res.observed);
    std::printf("method     %s, N = %zu", gofmult::to_string(res.method).c_str(), res.replicates.size());
    if (res.failed_replicates > 0) std::printf(" (%d failed refits)", res.failed_replicates);
    std::printf("\np-value    %.4f\n", res.pvalue);
    std::printf("time       %.3f s (fit %.3f s, setup %.3f s, replicates %.3f s)\n", res.wall_seconds,
                res.fit_seconds, res.setup_seconds, res.replicate_seconds);
    if (!a.output.empty()) write_text(a.output, gofmult::gof_result_json(res, *family, data));
    if (!res.valid) {
        std::fprintf(stderr, "error: more than %.0f%% of bootstrap refits failed\n", 100.0 * opt.max_failure_rate);
        return kExitFit;
    }
    return kExitOk;
}

int run_study(const StudyArgs& a) {
    std::ifstream in(a.config);
    if (!in) throw gofmult::IoError("cannot open '" + a.config + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    auto config = gofmult::parse_experiment_config(buf.str());
    if (a.threads > 0) config.threads = a.threads;
    std::function<void(int, int)> progress;
    if (!a.quiet) {
        progress = [](int done, int total) {
            if (done == total || done % 10 == 0) std::fprintf(stderr, "\r%d/%d datasets", done, total);
            if (done == total) std::fprintf(stderr, "\n");
        };
    }
    const auto report = gofmult::run_experiment(config, progress);
    gofmult::write_report_csv(report, a.output + ".csv");
    write_text(a.output + ".json", gofmult::report_manifest_json(report));
    std::printf("%-8s %-6s %-10s %-5s %-4s %8s %8s %6s\n", "n", "stat", "family", "meth", "", "rate", "se", "fail");
    for (const auto& c : report.cells) {
        std::printf("%-8d %-6s %-10s %-5s %-4s %7.1f%% %7.1f%% %6d\n", c.n, gofmult::to_string(c.statistic).c_str(),
                    c.family.c_str(), gofmult::to_string(c.method).c_str(), "", 100.0 * c.rate, 100.0 * c.se,
                    c.failures);
    }
    std::printf("wrote %s.csv and %s.json (%.1f s)\n", a.output.c_str(), a.output.c_str(), report.wall_seconds);
    return kExitOk;
}

int run_gradcheck(const GradArgs& a) {
    const auto family = family_or_usage(a.family, a.dim);
    const auto* mvt = dynamic_cast<const gofmult::MvTFamily*>(family.get());
    if (!mvt) throw CLI::ValidationError("--family", "gradient check needs a multivariate t family (mvt<nu>)");
    const auto rep = gofmult::run_gradient_check(a.dim, mvt->dof(), a.trials, a.seed);
    std::printf("%s d=%d trials=%d: max rel. error cdf %.3g, logpdf %.3g (tolerance %.0e) %s\n",
                family->id().c_str(), a.dim, a.trials, rep.max_rel_cdf, rep.max_rel_logpdf, rep.tolerance,
                rep.pass ? "PASS" : "FAIL");
    return rep.pass ? kExitOk : kExitFit;
}

int run_bench(const TestArgs& a) {
    const auto stat = gofmult::parse_statistic(a.stat);
    if (!stat) throw CLI::ValidationError("--stat", "expected sn, tn, snstar or tnstar");
    (void)family_or_usage(a.family, gofmult::is_multivariate_id(a.family) ? 2 : 1);
    const auto data = gofmult::read_csv(a.data);
    const auto family = family_or_usage(a.family, static_cast<int>(data.dim()));
    const auto rep = gofmult::run_timing(*family, data, *stat, a.nrep, gofmult::RngStream(a.seed, 0), options_from(a));
    std::printf("%s n=%ld N=%d\n", rep.family.c_str(), static_cast<long>(rep.n), rep.replicates);
    std::printf("  MP numeric   %9.3f s  p = %.4f\n", rep.mp_numeric, rep.pvalue_mp_numeric);
    if (rep.mp_analytic >= 0.0) std::printf("  MP analytic  %9.3f s  p = %.4f\n", rep.mp_analytic, rep.pvalue_mp_analytic);
    std::printf("  PB           %9.3f s  p = %.4f\n", rep.pb, rep.pvalue_pb);
    if (!a.output.empty()) write_text(a.output, gofmult::timing_json(rep));
    return kExitOk;
}

int run_simulate(const SimArgs& a) {
    const auto family = family_or_usage(a.family, a.dim);
    const gofmult::Vector theta = Eigen::Map<const gofmult::Vector>(a.theta.data(), static_cast<Eigen::Index>(a.theta.size()));
    gofmult::RngStream rng(a.seed, 0);
    const auto data = family->sample(theta, a.n, rng);
    gofmult::write_csv(data, a.output);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multiplier and parametric bootstrap goodness-of-fit tests"};
    app.set_version_flag("--version", gofmult::kVersion);
    app.require_subcommand(1);

    TestArgs test;
    auto* cmd_test = app.add_subcommand("test", "Test a parametric family on a CSV sample");
    cmd_test->add_option("--family", test.family, "norm, t<nu>, logis, gamma, weibull, mvnorm, mvt<nu>, nc, gn, t<nu>n")->required();
    cmd_test->add_option("--stat", test.stat, "sn, tn, snstar or tnstar")->capture_default_str();
    cmd_test->add_option("--method", test.method, "mp (multiplier) or pb (parametric bootstrap)")->capture_default_str();
    cmd_test->add_option("--nrep", test.nrep, "number of replicates N")->capture_default_str();
    cmd_test->add_option("--seed", test.seed, "RNG seed")->capture_default_str();
    cmd_test->add_option("--weights", test.weights, "multiplier law: normal or rademacher")->capture_default_str();
    cmd_test->add_option("--grid", test.grid, "grid size for sn/tn")->capture_default_str();
    cmd_test->add_option("--threads", test.threads, "worker threads")->capture_default_str();
    cmd_test->add_flag("--analytic", test.analytic, "closed-form gradients (multivariate t)");
    cmd_test->add_flag("--correction", test.correction, "report (k + 1) / (N + 1)");
    cmd_test->add_option("--output,-o", test.output, "write a JSON report");
    cmd_test->add_option("data", test.data, "CSV file, one observation per row")->required();

    StudyArgs study;
    auto* cmd_study = app.add_subcommand("study", "Run a Monte Carlo level/power study");
    cmd_study->add_option("--config", study.config, "JSON experiment config")->required();
    cmd_study->add_option("--output,-o", study.output, "output prefix for .csv and .json")->capture_default_str();
    cmd_study->add_option("--threads", study.threads, "override the config's thread count");
    cmd_study->add_flag("--quiet,-q", study.quiet, "no progress output");

    GradArgs grad;
    auto* cmd_grad = app.add_subcommand("gradcheck", "Compare analytic and numeric multivariate t gradients");
    cmd_grad->add_option("--family", grad.family, "mvt<nu>")->capture_default_str();
    cmd_grad->add_option("--dim", grad.dim, "dimension (2 or 3)")->capture_default_str();
    cmd_grad->add_option("--trials", grad.trials, "random configurations")->capture_default_str();
    cmd_grad->add_option("--seed", grad.seed, "RNG seed")->capture_default_str();

    TestArgs bench;
    bench.stat = "snstar";
    auto* cmd_bench = app.add_subcommand("bench", "Time MP (numeric and analytic gradients) against PB");
    cmd_bench->add_option("--family", bench.family, "family identifier")->required();
    cmd_bench->add_option("--stat", bench.stat, "statistic")->capture_default_str();
    cmd_bench->add_option("--nrep", bench.nrep, "number of replicates N")->capture_default_str();
    cmd_bench->add_option("--seed", bench.seed, "RNG seed")->capture_default_str();
    cmd_bench->add_option("--threads", bench.threads, "worker threads")->capture_default_str();
    cmd_bench->add_option("--output,-o", bench.output, "write a JSON report");
    cmd_bench->add_option("data", bench.data, "CSV file")->required();

    SimArgs sim;
    auto* cmd_sim = app.add_subcommand("simulate", "Draw a sample from a family and write it as CSV");
    cmd_sim->add_option("--family", sim.family, "family identifier")->required();
    cmd_sim->add_option("--dim", sim.dim, "dimension")->capture_default_str();
    cmd_sim->add_option("--theta", sim.theta, "parameters, comma-separated")->delimiter(',')->required();
    cmd_sim->add_option("--n", sim.n, "sample size")->capture_default_str();
    cmd_sim->add_option("--seed", sim.seed, "RNG seed")->capture_default_str();
    cmd_sim->add_option("--output,-o", sim.output, "CSV path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*cmd_test) return run_test(test);
        if (*cmd_study) return run_study(study);
        if (*cmd_grad) return run_gradcheck(grad);
        if (*cmd_bench) return run_bench(bench);
        if (*cmd_sim) return run_simulate(sim);
    } catch (const CLI::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const gofmult::IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const gofmult::ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const gofmult::Error& e) {
        std::cerr << "fit failed: " << e.what() << '\n';
        return kExitFit;
    }
    return kExitUsage;
}
