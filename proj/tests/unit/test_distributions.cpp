#include "gofmult/distributions.hpp"
#include "gofmult/errors.hpp"
#include "gofmult/families.hpp"
#include "gofmult/special.hpp"
#include "gofmult/stats.hpp"

#include "test_support.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <catch_amalgamated.hpp>

using namespace gofmult;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Vector vec(std::initializer_list<double> v) {
    Vector out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) out[i++] = x;
    return out;
}

double at(const Family& f, const Vector& theta, std::initializer_list<double> x) {
    const Vector p = vec(x);
    return f.cdf(theta, as_point(p));
}

double logpdf_at(const Family& f, const Vector& theta, std::initializer_list<double> x) {
    const Vector p = vec(x);
    return f.logpdf(theta, as_point(p));
}

struct UnivariateCase {
    std::string id;
    Vector theta;
    double lo, hi;  // integration box
};

std::vector<UnivariateCase> univariate_cases() {
    return {
        {"norm", vec({10.0, 1.0}), 0.0, 20.0},
        {"t5", vec({0.5, 2.0}), -kInf, kInf},
        {"t3", vec({-1.0, 0.7}), -kInf, kInf},
        {"t10", vec({0.0, 1.0}), -kInf, kInf},
        {"logis", vec({1.0, 0.5}), -kInf, kInf},
        {"gamma", vec({98.671, 9.866}), 0.0, 30.0},
        {"gamma", vec({0.8, 2.0}), 0.0, kInf},
        {"weibull", vec({2.0, 3.0}), 0.0, kInf},
        {"weibull", vec({0.7, 1.5}), 0.0, kInf},
    };
}

}  // namespace

TEST_CASE("closed-form values") {
    const auto norm = make_family("norm");
    CHECK(at(*norm, vec({10, 1}), {10}) == 0.5);
    CHECK_THAT(logpdf_at(*norm, vec({10, 1}), {10}), WithinAbs(-special::kLogSqrtTwoPi, 1e-15));

    const auto mvn = make_family("mvnorm", 2);
    CHECK_THAT(at(*mvn, vec({0, 0, 1, 1, 0}), {0, 0}), WithinAbs(0.25, 1e-12));

    const auto mvt = make_family("mvt5", 2);
    CHECK_THAT(logpdf_at(*mvt, vec({0, 0, 1, 1, 0}), {0, 0}),
               WithinAbs(std::log(std::tgamma(3.5) / (5.0 * special::kPi * std::tgamma(2.5))), 1e-13));
}

TEST_CASE("gamma cdf matches quadrature of the density") {
    const auto gamma = make_family("gamma");
    const Vector theta = vec({98.671, 9.866});
    const auto dens = [&](double x) { return std::exp(logpdf_at(*gamma, theta, {x})); };
    const double oracle = testsupport::integrate(dens, 0.0, 10.0, 1e-13);
    CHECK_THAT(at(*gamma, theta, {10.0}), WithinAbs(oracle, 1e-10));
    CHECK(logpdf_at(*gamma, theta, {-1.0}) == -kInf);
    CHECK(at(*gamma, theta, {-1.0}) == 0.0);
}

TEST_CASE("trivariate t log-density matches an extended-precision evaluation") {
    using mp = boost::multiprecision::cpp_bin_float_50;
    const auto fam = make_family("mvt5", 3);
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        Vector theta(9);
        for (int j = 0; j < 3; ++j) theta[j] = 2.0 * unif(gen);
        for (int j = 3; j < 6; ++j) theta[j] = std::exp(unif(gen));
        do {
            for (int j = 6; j < 9; ++j) theta[j] = 0.8 * unif(gen);
        } while (!fam->in_domain(theta));
        Vector x(3);
        for (int j = 0; j < 3; ++j) x[j] = 3.0 * unif(gen);

        // Sigma = D R D with D = diag(lambda)
        mp s[3][3];
        const double r[3][3] = {{1, theta[6], theta[7]}, {theta[6], 1, theta[8]}, {theta[7], theta[8], 1}};
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) s[i][j] = mp(r[i][j]) * boost::multiprecision::sqrt(mp(theta[3 + i]) * mp(theta[3 + j]));
        const mp det = s[0][0] * (s[1][1] * s[2][2] - s[1][2] * s[2][1]) - s[0][1] * (s[1][0] * s[2][2] - s[1][2] * s[2][0]) +
                       s[0][2] * (s[1][0] * s[2][1] - s[1][1] * s[2][0]);
        mp adj[3][3];
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                const int a = (j + 1) % 3, b = (j + 2) % 3, c = (i + 1) % 3, d = (i + 2) % 3;
                adj[i][j] = s[a][c] * s[b][d] - s[a][d] * s[b][c];
            }
        mp q = 0;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) q += (mp(x[i]) - theta[i]) * adj[i][j] / det * (mp(x[j]) - theta[j]);
        const mp nu = 5;
        const mp pi = boost::math::constants::pi<mp>();
        const mp logf = boost::math::lgamma((nu + 3) / 2) - boost::math::lgamma(nu / 2) - mp(1.5) * log(nu * pi) -
                        log(det) / 2 - (nu + 3) / 2 * log1p(q / nu);
        CHECK_THAT(fam->logpdf(theta, as_point(x)), WithinAbs(static_cast<double>(logf), 1e-11));
    }
}

TEST_CASE("univariate cdf derivative equals the density") {
    std::mt19937_64 gen(1);
    for (const auto& c : univariate_cases()) {
        INFO(c.id << " theta=" << c.theta.transpose());
        const auto fam = make_family(c.id);
        std::uniform_real_distribution<double> unif(0.01, 0.99);
        for (int k = 0; k < 50; ++k) {
            const double x = fam->quantile(c.theta, unif(gen));
            const double h = 1e-5 * std::max(1.0, std::abs(x));
            const double fd = (at(*fam, c.theta, {x + h}) - at(*fam, c.theta, {x - h})) / (2 * h);
            CHECK_THAT(fd, WithinRel(std::exp(logpdf_at(*fam, c.theta, {x})), 1e-5));
        }
    }
}

TEST_CASE("univariate densities integrate to one") {
    for (const auto& c : univariate_cases()) {
        INFO(c.id << " theta=" << c.theta.transpose());
        const auto fam = make_family(c.id);
        const auto dens = [&](double x) { return std::exp(logpdf_at(*fam, c.theta, {x})); };
        // split at the median so the integrator sees the bulk of the mass
        const double mid = fam->quantile(c.theta, 0.5);
        const double total = testsupport::integrate(dens, c.lo, mid, 1e-10) + testsupport::integrate(dens, mid, c.hi, 1e-10);
        CHECK_THAT(total, WithinAbs(1.0, 1e-4));
    }
}

TEST_CASE("bivariate densities integrate to one") {
    for (const std::string id : {"mvnorm", "mvt5"}) {
        const auto fam = make_family(id, 2);
        const Vector theta = vec({0.5, -1.0, 1.5, 0.5, 0.309});
        const auto dens = [&](double x, double y) { return std::exp(logpdf_at(*fam, theta, {x, y})); };
        const double total = testsupport::integrate2(dens, -kInf, kInf, -kInf, kInf, 1e-8);
        CHECK_THAT(total, WithinAbs(1.0, 1e-4));
    }
}

TEST_CASE("quantile inverts the cdf") {
    for (const auto& c : univariate_cases()) {
        const auto fam = make_family(c.id);
        for (double u : {1e-6, 0.025, 0.3, 0.5, 0.77, 0.999}) {
            const double x = fam->quantile(c.theta, u);
            CHECK_THAT(at(*fam, c.theta, {x}), WithinAbs(u, 1e-11));
            CHECK_THAT(numeric_quantile(*fam, c.theta, u), WithinRel(x, 1e-8));
        }
    }
}

TEST_CASE("t cdf approaches the normal cdf for huge degrees of freedom") {
    const auto t = make_family("t1000000");
    const auto norm = make_family("norm");
    for (double x : {-3.0, -1.0, 0.2, 1.5, 2.5}) {
        CHECK_THAT(at(*t, vec({0.3, 1.7}), {x}), WithinAbs(at(*norm, vec({0.3, 1.7}), {x}), 1e-4));
    }
    const auto mvt = make_family("mvt1000000", 3);
    const auto mvn = make_family("mvnorm", 3);
    const Vector theta = vec({0, 0, 0, 1, 1, 1, 0.55, 0.40, 0.45});
    CHECK_THAT(at(*mvt, theta, {0.3, -0.2, 0.1}), WithinAbs(at(*mvn, theta, {0.3, -0.2, 0.1}), 1e-4));
}

TEST_CASE("sample moments") {
    const Eigen::Index n = 100000;
    SECTION("normal mean") {
        RngStream rng(10, 0);
        const auto data = make_family("norm")->sample(vec({10, 1}), n, rng);
        CHECK(std::abs(stats::mean(stats::column(data.matrix(), 0)) - 10.0) < 4.0 / std::sqrt(double(n)));
    }
    SECTION("gamma mean") {
        RngStream rng(11, 0);
        const auto data = make_family("gamma")->sample(vec({98.671, 9.866}), n, rng);
        const double sd = std::sqrt(98.671) / 9.866;
        CHECK(std::abs(stats::mean(stats::column(data.matrix(), 0)) - 98.671 / 9.866) < 4.0 * sd / std::sqrt(double(n)));
    }
    SECTION("bivariate t Kendall tau") {
        RngStream rng(12, 0);
        const auto data = make_family("mvt5", 2)->sample(vec({0, 0, 1, 1, 0.309}), 4000, rng);
        const double tau = stats::kendall_tau(stats::column(data.matrix(), 0), stats::column(data.matrix(), 1));
        // sd of tau-hat is about 2 / (3 sqrt(n)) under weak dependence
        CHECK(std::abs(tau - 0.2) < 4.0 * 2.0 / (3.0 * std::sqrt(4000.0)));
    }
    SECTION("univariate samples follow their cdf") {
        for (const auto& c : univariate_cases()) {
            INFO(c.id);
            RngStream rng(13, 0);
            const auto fam = make_family(c.id);
            const auto data = fam->sample(c.theta, 20000, rng);
            const double ks = testsupport::ks_distance(stats::column(data.matrix(), 0),
                                                       [&](double x) { return at(*fam, c.theta, {x}); });
            CHECK(ks < 1.63 / std::sqrt(20000.0));
        }
    }
}

TEST_CASE("sampling is deterministic given the stream") {
    for (const std::string id : {"norm", "t5", "gamma", "weibull", "logis"}) {
        const auto fam = make_family(id);
        const Vector theta = id == "gamma" || id == "weibull" ? vec({2.0, 1.5}) : vec({0.0, 1.0});
        RngStream a(3, 4), b(3, 4);
        CHECK(fam->sample(theta, 50, a).matrix() == fam->sample(theta, 50, b).matrix());
    }
}

TEST_CASE("moment starts converge to the truth") {
    struct Case {
        std::string id;
        int dim;
        Vector truth;
    };
    const std::vector<Case> cases = {
        {"norm", 1, vec({10.0, 1.0})},
        {"t5", 1, vec({0.0, 2.0})},
        {"t10", 1, vec({1.0, 0.5})},
        {"logis", 1, vec({1.0, 0.5})},
        {"gamma", 1, vec({98.671, 9.866})},
        {"weibull", 1, vec({2.0, 3.0})},
        {"mvnorm", 2, vec({0.0, 1.0, 1.0, 2.0, 0.309})},
        {"mvt10", 3, vec({0.0, 1.0, -1.0, 1.0, 2.0, 0.5, 0.55, 0.40, 0.45})},
    };
    const Eigen::Index n = 100000;
    const int batches = 20;
    for (const auto& c : cases) {
        INFO(c.id);
        const auto fam = make_family(c.id, c.dim);
        RngStream rng(21, 0);
        const Dataset data = fam->sample(c.truth, n, rng);
        const Vector start = fam->moment_start(data);
        REQUIRE(fam->in_domain(start));

        // standard error of the start from the spread across disjoint batches
        const Eigen::Index b = n / batches;
        Matrix starts(batches, start.size());
        for (int k = 0; k < batches; ++k) {
            starts.row(k) = fam->moment_start(Dataset(data.matrix().middleRows(k * b, b))).transpose();
        }
        const Vector mean = starts.colwise().mean();
        const Vector sd = ((starts.rowwise() - mean.transpose()).array().square().colwise().sum() / (batches - 1)).sqrt();
        const Vector se = sd / std::sqrt(double(batches));
        for (Eigen::Index j = 0; j < start.size(); ++j) {
            INFO("parameter " << j << " start " << start[j] << " truth " << c.truth[j] << " se " << se[j]);
            CHECK(std::abs(start[j] - c.truth[j]) <= 3.0 * se[j]);
        }
    }
}

TEST_CASE("moment start on a normal sample") {
    RngStream rng(5, 5);
    const auto fam = make_family("norm");
    const Vector start = fam->moment_start(fam->sample(vec({10, 1}), 5000, rng));
    CHECK_THAT(start[0], WithinAbs(10.0, 0.06));
    CHECK_THAT(start[1], WithinAbs(1.0, 0.08));

    const auto gamma = make_family("gamma");
    RngStream g(5, 6);
    const Dataset gd = gamma->sample(vec({98.671, 9.866}), 5000, g);
    const auto col = stats::column(gd.matrix(), 0);
    const double m = stats::mean(col), v = stats::variance(col);
    const Vector gs = gamma->moment_start(gd);
    CHECK_THAT(gs[0], WithinRel(m * m / v, 1e-2));
    CHECK_THAT(gs[1], WithinRel(m / v, 1e-2));
}

TEST_CASE("degenerate data is rejected") {
    RowMatrix constant = RowMatrix::Constant(10, 1, 3.0);
    for (const std::string id : {"norm", "t5", "t2", "logis", "gamma", "weibull"}) {
        INFO(id);
        CHECK_THROWS_AS(make_family(id)->moment_start(Dataset(constant)), DegenerateData);
    }
    RowMatrix two(10, 2);
    for (int i = 0; i < 10; ++i) two.row(i) << i, 1.0;
    CHECK_THROWS_AS(make_family("mvnorm", 2)->moment_start(Dataset(two)), DegenerateData);
    CHECK_THROWS_AS(make_family("norm")->moment_start(Dataset(RowMatrix::Constant(2, 1, 1.0))), DegenerateData);
    RowMatrix bad(2, 1);
    bad << 1.0, std::nan("");
    CHECK_THROWS_AS(Dataset(bad), DegenerateData);
}

TEST_CASE("invalid parameters raise DomainError") {
    const Vector x = vec({0.0});
    CHECK_THROWS_AS(make_family("norm")->cdf(vec({0, -1}), as_point(x)), DomainError);
    CHECK_THROWS_AS(make_family("gamma")->logpdf(vec({0, 1}), as_point(x)), DomainError);
    CHECK_THROWS_AS(make_family("norm")->cdf(vec({0, 1, 2}), as_point(x)), DomainError);
    const Vector x3 = vec({0, 0, 0});
    // pairwise valid, jointly not positive definite
    CHECK_THROWS_AS(make_family("mvt5", 3)->cdf(vec({0, 0, 0, 1, 1, 1, 0.9, 0.9, -0.9}), as_point(x3)), DomainError);
    CHECK_FALSE(make_family("mvnorm", 2)->in_domain(vec({0, 0, 1, 1, 1.0})));
    CHECK_THROWS_AS(make_family("frechet"), DomainError);
    CHECK_THROWS_AS(make_family("mvnorm", 4), DomainError);
    CHECK_THROWS_AS(make_family("norm", 2), DomainError);
}

TEST_CASE("unconstrained reparametrization round-trips") {
    const auto fam = make_family("mvt5", 3);
    const Vector theta = vec({1.0, -2.0, 0.5, 0.3, 2.0, 7.0, 0.55, -0.40, 0.45});
    const Vector eta = fam->to_unconstrained(theta);
    CHECK_THAT(eta[3], WithinAbs(std::log(0.3), 1e-15));
    CHECK_THAT(eta[6], WithinAbs(std::atanh(0.55), 1e-15));
    CHECK((fam->from_unconstrained(eta) - theta).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("family identifiers round-trip") {
    for (const std::string id : {"norm", "t5", "t10", "t20", "logis", "gamma", "weibull"}) CHECK(make_family(id)->id() == id);
    for (const std::string id : {"mvnorm", "mvt5", "mvt10", "nc", "gn", "t5n"}) {
        CHECK(make_family(id, 2)->id() == id);
        CHECK(make_family(id, 3)->dim() == 3);
        CHECK(is_multivariate_id(id));
    }
    CHECK(make_family("mvt10", 3)->param_count() == 9);
    CHECK(make_family("nc", 3)->param_count() == 7);
}

TEST_CASE("correlation helpers") {
    const auto pairs = correlation_pairs(3);
    REQUIRE(pairs.size() == 3);
    CHECK(pairs[0] == std::pair{0, 1});
    CHECK(pairs[1] == std::pair{0, 2});
    CHECK(pairs[2] == std::pair{1, 2});
    CHECK_FALSE(correlation_cholesky(testsupport::corr3(0.9, 0.9, -0.9)).has_value());
    const Matrix fixed = project_correlation(testsupport::corr3(0.9, 0.9, -0.9));
    CHECK(correlation_cholesky(fixed).has_value());
    CHECK(fixed.diagonal().isOnes(1e-15));
}
