#include "gofmult/harness.hpp"

#include "gofmult/errors.hpp"
#include "gofmult/families.hpp"
#include "gofmult/mvt_analytic.hpp"
#include "gofmult/stats.hpp"
#include "gofmult/version.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

namespace gofmult {

using json = nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

std::optional<double> parse_number(std::string_view field) {
    if (!field.empty() && field.front() == '+') field.remove_prefix(1);
    double v = 0.0;
    const auto [end, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc{} || end != field.data() + field.size() || field.empty()) return std::nullopt;
    return v;
}

// FNV-1a, used to give each (family, statistic, method) cell a stable stream id.
std::uint64_t stable_hash(std::string_view text) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

double median_of(std::vector<double> v) {
    return v.empty() ? std::nan("") : stats::median(v);
}

json vector_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json nan_aware(const std::vector<double>& v) {
    json out = json::array();
    for (double x : v) out.push_back(std::isfinite(x) ? json(x) : json(nullptr));
    return out;
}

}  // namespace

// ---------------------------------------------------------------- CSV

Dataset parse_csv(std::istream& in) {
    std::string line;
    long row = 0;
    long columns = -1;
    bool header_allowed = true;
    std::vector<double> values;
    while (std::getline(in, line)) {
        ++row;
        const std::string_view text = trim(line);
        if (text.empty()) continue;
        const auto fields = split_fields(text);
        std::vector<double> parsed;
        long bad_column = 0;
        for (std::size_t k = 0; k < fields.size(); ++k) {
            auto v = parse_number(fields[k]);
            if (!v) {
                bad_column = static_cast<long>(k) + 1;
                break;
            }
            if (!std::isfinite(*v)) throw ParseError("non-finite value '" + std::string(fields[k]) + "'", row, static_cast<long>(k) + 1);
            parsed.push_back(*v);
        }
        if (bad_column != 0) {
            if (header_allowed) {
                header_allowed = false;
                columns = static_cast<long>(fields.size());
                continue;
            }
            throw ParseError("non-numeric value '" + std::string(fields[static_cast<std::size_t>(bad_column - 1)]) + "'",
                             row, bad_column);
        }
        header_allowed = false;
        if (columns < 0) columns = static_cast<long>(parsed.size());
        if (static_cast<long>(parsed.size()) != columns) {
            throw ParseError("expected " + std::to_string(columns) + " columns, found " + std::to_string(parsed.size()),
                             row, std::min(columns, static_cast<long>(parsed.size())) + 1);
        }
        values.insert(values.end(), parsed.begin(), parsed.end());
    }
    if (values.empty()) throw ParseError("no data rows", row, 0);
    const auto n = static_cast<Eigen::Index>(values.size()) / columns;
    RowMatrix m = Eigen::Map<RowMatrix>(values.data(), n, columns);
    return Dataset(std::move(m));
}

Dataset read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    return parse_csv(in);
}

void write_csv(const Dataset& data, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path + "'");
    out << std::setprecision(17);
    for (Eigen::Index i = 0; i < data.n(); ++i) {
        for (Eigen::Index j = 0; j < data.dim(); ++j) out << (j ? "," : "") << data.matrix()(i, j);
        out << '\n';
    }
    if (!out) throw IoError("failed writing '" + path + "'");
}

// ---------------------------------------------------------------- single test

std::string gof_result_json(const GofResult& r, const Family& family, const Dataset& data) {
    json j;
    j["family"] = family.id();
    j["n"] = data.n();
    j["dim"] = data.dim();
    j["statistic"] = to_string(r.statistic);
    j["method"] = to_string(r.method);
    j["observed"] = r.observed;
    j["pvalue"] = r.pvalue;
    j["replicates"] = r.replicates.size();
    j["failed_replicates"] = r.failed_replicates;
    j["valid"] = r.valid;
    j["seed"] = r.seed;
    j["stream"] = r.stream;
    json params = json::object();
    const auto names = family.param_names();
    for (std::size_t k = 0; k < names.size(); ++k) params[names[k]] = r.theta[static_cast<Eigen::Index>(k)];
    j["theta"] = params;
    j["timing"] = {{"fit", r.fit_seconds},
                   {"setup", r.setup_seconds},
                   {"replicates", r.replicate_seconds},
                   {"wall", r.wall_seconds}};
    j["replicate_values"] = r.replicates;
    j["version"] = kVersion;
    return j.dump(2);
}

// ---------------------------------------------------------------- experiments

void validate(const ExperimentConfig& c) {
    if (c.reps < 1) throw std::invalid_argument("reps must be at least 1");
    if (!(c.level > 0.0 && c.level < 1.0)) throw std::invalid_argument("level must lie in (0, 1)");
    if (c.n_grid.empty() || c.hypothesized.empty() || c.statistics.empty() || c.methods.empty()) {
        throw std::invalid_argument("n_grid, hypothesized, statistics and methods must be non-empty");
    }
    for (int n : c.n_grid) {
        if (n < 2) throw std::invalid_argument("sample sizes must be at least 2");
    }
    const auto truth = make_family(c.true_family, c.dim);
    truth->validate(c.true_theta);
    for (const auto& h : c.hypothesized) (void)make_family(h, c.dim);
    if (c.dim > 1) {
        for (Statistic s : c.statistics) {
            if (uses_grid(s)) throw std::invalid_argument(to_string(s) + " is only available in dimension 1");
        }
    }
}

ExperimentConfig parse_experiment_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("config is not valid JSON: ") + e.what());
    }
    ExperimentConfig c;
    try {
        c.true_family = j.value("true_family", c.true_family);
        c.dim = j.value("dim", c.dim);
        if (j.contains("true_theta")) {
            const auto v = j.at("true_theta").get<std::vector<double>>();
            c.true_theta = Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
        }
        c.hypothesized = j.value("hypothesized", c.hypothesized);
        c.n_grid = j.value("n_grid", c.n_grid);
        c.reps = j.value("reps", c.reps);
        c.replicates = j.value("replicates", c.replicates);
        c.level = j.value("level", c.level);
        c.seed = j.value("seed", c.seed);
        c.threads = j.value("threads", c.threads);
        c.gof.grid_size = j.value("grid_size", c.gof.grid_size);
        c.gof.pvalue_correction = j.value("pvalue_correction", c.gof.pvalue_correction);
        c.gof.fit.use_analytic_grads = j.value("analytic_gradients", c.gof.fit.use_analytic_grads);
        if (j.contains("weights")) {
            auto w = parse_weights(j.at("weights").get<std::string>());
            if (!w) throw std::invalid_argument("unknown weights kind");
            c.gof.weights = *w;
        }
        if (j.contains("statistics")) {
            c.statistics.clear();
            for (const auto& s : j.at("statistics")) {
                auto st = parse_statistic(s.get<std::string>());
                if (!st) throw std::invalid_argument("unknown statistic '" + s.get<std::string>() + "'");
                c.statistics.push_back(*st);
            }
        }
        if (j.contains("methods")) {
            c.methods.clear();
            for (const auto& s : j.at("methods")) {
                auto m = parse_method(s.get<std::string>());
                if (!m) throw std::invalid_argument("unknown method '" + s.get<std::string>() + "'");
                c.methods.push_back(*m);
            }
        }
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("bad config value: ") + e.what());
    }
    if (c.true_theta.size() == 0) throw std::invalid_argument("config needs true_theta");
    validate(c);
    return c;
}

ExperimentReport run_experiment(const ExperimentConfig& config, const std::function<void(int, int)>& progress) {
    validate(config);
    const auto t0 = Clock::now();
    const auto truth = make_family(config.true_family, config.dim);
    std::vector<FamilyPtr> hyps;
    for (const auto& h : config.hypothesized) hyps.push_back(make_family(h, config.dim));

    ExperimentReport report;
    report.config = config;
    struct CellKey {
        std::size_t n_index, family;
        Statistic statistic;
        Method method;
        std::uint64_t stream;
    };
    std::vector<CellKey> keys;
    for (std::size_t a = 0; a < config.n_grid.size(); ++a) {
        for (std::size_t h = 0; h < hyps.size(); ++h) {
            for (Statistic s : config.statistics) {
                for (Method m : config.methods) {
                    keys.push_back({a, h, s, m, stable_hash(config.hypothesized[h] + "/" + to_string(s) + "/" + to_string(m))});
                    CellResult cell;
                    cell.n = config.n_grid[a];
                    cell.family = config.hypothesized[h];
                    cell.statistic = s;
                    cell.method = m;
                    cell.pvalues.assign(static_cast<std::size_t>(config.reps), std::nan(""));
                    cell.observed = cell.pvalues;
                    cell.replicate_medians = cell.pvalues;
                    report.cells.push_back(std::move(cell));
                }
            }
        }
    }
    std::vector<std::vector<double>> seconds(keys.size(), std::vector<double>(static_cast<std::size_t>(config.reps), -1.0));

    const int total = static_cast<int>(config.n_grid.size()) * config.reps;
    const RngStream base(config.seed, 0);
    std::mutex progress_mutex;
    int done = 0;
    auto work = [&](int item) {
        const auto a = static_cast<std::size_t>(item / config.reps);
        const int r = item % config.reps;
        const int n = config.n_grid[a];
        const RngStream data_stream = base.substream(static_cast<std::uint64_t>(n)).substream(static_cast<std::uint64_t>(r));
        RngStream draw = data_stream;
        const Dataset data = truth->sample(config.true_theta, n, draw);
        for (std::size_t c = 0; c < keys.size(); ++c) {
            if (keys[c].n_index != a) continue;
            auto& cell = report.cells[c];
            const RngStream test_rng = data_stream.substream(keys[c].stream);
            const auto& fam = *hyps[keys[c].family];
            const auto start = Clock::now();
            try {
                const GofResult res = keys[c].method == Method::MP
                                          ? multiplier_test(fam, data, keys[c].statistic, config.replicates, test_rng, config.gof)
                                          : parametric_bootstrap_test(fam, data, keys[c].statistic, config.replicates, test_rng, config.gof);
                if (!res.valid) continue;
                cell.pvalues[static_cast<std::size_t>(r)] = res.pvalue;
                cell.observed[static_cast<std::size_t>(r)] = res.observed;
                cell.replicate_medians[static_cast<std::size_t>(r)] = median_of(res.replicates);
                seconds[c][static_cast<std::size_t>(r)] = seconds_since(start);
            } catch (const Error&) {
            }
        }
        if (progress) {
            const std::lock_guard lock(progress_mutex);
            progress(++done, total);
        }
    };

    const unsigned threads = std::max(1U, std::min<unsigned>(config.threads, static_cast<unsigned>(total)));
    if (threads == 1) {
        for (int item = 0; item < total; ++item) work(item);
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t) {
            pool.emplace_back([&, t] {
                for (int item = static_cast<int>(t); item < total; item += static_cast<int>(threads)) work(item);
            });
        }
        for (auto& th : pool) th.join();
    }

    for (std::size_t c = 0; c < keys.size(); ++c) {
        auto& cell = report.cells[c];
        double time_sum = 0.0;
        for (int r = 0; r < config.reps; ++r) {
            const double p = cell.pvalues[static_cast<std::size_t>(r)];
            if (std::isnan(p)) {
                ++cell.failures;
                continue;
            }
            ++cell.completed;
            cell.rejections += p < config.level;
            time_sum += seconds[c][static_cast<std::size_t>(r)];
        }
        if (cell.completed > 0) {
            cell.rate = static_cast<double>(cell.rejections) / cell.completed;
            cell.se = std::sqrt(cell.rate * (1.0 - cell.rate) / cell.completed);
            cell.mean_seconds = time_sum / cell.completed;
        }
    }
    report.wall_seconds = seconds_since(t0);
    return report;
}

void write_report_csv(const ExperimentReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path + "'");
    const auto& c = report.config;
    out << "true_family,n";
    const std::size_t per_n = report.cells.size() / c.n_grid.size();
    for (std::size_t k = 0; k < per_n; ++k) {
        const auto& cell = report.cells[k];
        out << ',' << cell.family << '/' << to_string(cell.statistic) << '/' << to_string(cell.method);
    }
    out << '\n' << std::setprecision(10);
    for (std::size_t a = 0; a < c.n_grid.size(); ++a) {
        out << c.true_family << ',' << c.n_grid[a];
        for (std::size_t k = 0; k < per_n; ++k) out << ',' << report.cells[a * per_n + k].rate;
        out << '\n';
    }
    if (!out) throw IoError("failed writing '" + path + "'");
}

std::string report_manifest_json(const ExperimentReport& report) {
    const auto& c = report.config;
    json j;
    j["version"] = kVersion;
    json cfg;
    cfg["true_family"] = c.true_family;
    cfg["dim"] = c.dim;
    cfg["true_theta"] = vector_json(c.true_theta);
    cfg["hypothesized"] = c.hypothesized;
    cfg["n_grid"] = c.n_grid;
    cfg["reps"] = c.reps;
    cfg["replicates"] = c.replicates;
    std::vector<std::string> st, me;
    for (auto s : c.statistics) st.push_back(to_string(s));
    for (auto m : c.methods) me.push_back(to_string(m));
    cfg["statistics"] = st;
    cfg["methods"] = me;
    cfg["level"] = c.level;
    cfg["seed"] = c.seed;
    cfg["threads"] = c.threads;
    cfg["grid_size"] = c.gof.grid_size;
    cfg["weights"] = to_string(c.gof.weights);
    cfg["analytic_gradients"] = c.gof.fit.use_analytic_grads;
    cfg["pvalue_correction"] = c.gof.pvalue_correction;
    j["config"] = cfg;
    json cells = json::array();
    for (const auto& cell : report.cells) {
        cells.push_back({{"n", cell.n},
                         {"family", cell.family},
                         {"statistic", to_string(cell.statistic)},
                         {"method", to_string(cell.method)},
                         {"completed", cell.completed},
                         {"rejections", cell.rejections},
                         {"failures", cell.failures},
                         {"rate", cell.rate},
                         {"se", cell.se},
                         {"mean_seconds", cell.mean_seconds},
                         {"pvalues", nan_aware(cell.pvalues)}});
    }
    j["cells"] = cells;
    j["wall_seconds"] = report.wall_seconds;
    return j.dump(2);
}

// ---------------------------------------------------------------- gradient check

double gradient_relative_error(const Vector& analytic, const Vector& numeric, double floor) {
    double worst = 0.0;
    for (Eigen::Index k = 0; k < analytic.size(); ++k) {
        worst = std::max(worst, std::abs(analytic[k] - numeric[k]) / std::max(std::abs(numeric[k]), floor));
    }
    return worst;
}

GradientCheckReport run_gradient_check(int dim, double nu, int trials, std::uint64_t seed,
                                       const GradientCorruption& corrupt) {
    const auto t0 = Clock::now();
    const MvTFamily family(dim, nu);
    GradientCheckReport rep;
    rep.dim = dim;
    rep.nu = nu;
    rep.trials = trials;
    const RngStream base(seed, 0x67726164ULL);
    for (int t = 0; t < trials; ++t) {
        RngStream rng = base.substream(static_cast<std::uint64_t>(t));
        EllipticalParams p;
        p.mu.resize(dim);
        p.lambda2.resize(dim);
        for (int j = 0; j < dim; ++j) {
            p.mu[j] = rng.normal();
            p.lambda2[j] = std::exp(2.0 * rng.uniform() - 1.0);
        }
        do {
            p.corr = Matrix::Identity(dim, dim);
            for (auto [i, j] : correlation_pairs(dim)) p.corr(i, j) = p.corr(j, i) = 1.6 * rng.uniform() - 0.8;
        } while (!correlation_cholesky(p.corr));
        const Vector theta = p.pack();
        const Dataset draw = family.sample(theta, 1, rng);
        const Point x = draw.row(0);

        const auto params = mvt_analytic::MvtParams::from_theta(theta, dim, nu);
        Vector g_cdf = mvt_analytic::mvt_cdf_grad(params, x);
        Vector g_log = mvt_analytic::mvt_logpdf_grad(params, x);
        if (corrupt) corrupt(g_cdf, g_log);
        const auto dom = [&](const Vector& th) { return family.in_domain(th); };
        const Vector n_cdf = richardson_gradient([&](const Vector& th) { return family.cdf(th, x); }, theta, dom);
        const Vector n_log = richardson_gradient([&](const Vector& th) { return family.logpdf(th, x); }, theta, dom);
        rep.max_rel_cdf = std::max(rep.max_rel_cdf, gradient_relative_error(g_cdf, n_cdf));
        rep.max_rel_logpdf = std::max(rep.max_rel_logpdf, gradient_relative_error(g_log, n_log));
    }
    rep.pass = rep.max_rel_cdf <= rep.tolerance && rep.max_rel_logpdf <= rep.tolerance;
    rep.seconds = seconds_since(t0);
    return rep;
}

// ---------------------------------------------------------------- timing

TimingReport run_timing(const Family& family, const Dataset& data, Statistic statistic, int replicates,
                        const RngStream& rng, const GofOptions& options) {
    TimingReport rep;
    rep.family = family.id();
    rep.n = data.n();
    rep.replicates = replicates;
    GofOptions numeric = options;
    numeric.fit.use_analytic_grads = false;
    auto t = Clock::now();
    rep.pvalue_mp_numeric = multiplier_test(family, data, statistic, replicates, rng, numeric).pvalue;
    rep.mp_numeric = seconds_since(t);
    if (family.has_analytic_gradients()) {
        GofOptions analytic = options;
        analytic.fit.use_analytic_grads = true;
        t = Clock::now();
        rep.pvalue_mp_analytic = multiplier_test(family, data, statistic, replicates, rng, analytic).pvalue;
        rep.mp_analytic = seconds_since(t);
    }
    t = Clock::now();
    rep.pvalue_pb = parametric_bootstrap_test(family, data, statistic, replicates, rng, options).pvalue;
    rep.pb = seconds_since(t);
    return rep;
}

std::string timing_json(const TimingReport& r) {
    json j;
    j["family"] = r.family;
    j["n"] = r.n;
    j["replicates"] = r.replicates;
    j["seconds"] = {{"mp_numeric", r.mp_numeric}, {"pb", r.pb}};
    j["pvalues"] = {{"mp_numeric", r.pvalue_mp_numeric}, {"pb", r.pvalue_pb}};
    j["speedup_pb_over_mp_numeric"] = r.pb / r.mp_numeric;
    if (r.mp_analytic >= 0.0) {
        j["seconds"]["mp_analytic"] = r.mp_analytic;
        j["pvalues"]["mp_analytic"] = r.pvalue_mp_analytic;
        j["speedup_pb_over_mp_analytic"] = r.pb / r.mp_analytic;
        j["speedup_numeric_over_analytic"] = r.mp_numeric / r.mp_analytic;
    }
    j["version"] = kVersion;
    return j.dump(2);
}

}  // namespace gofmult
