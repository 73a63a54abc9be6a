#include "gofmult/errors.hpp"
#include "gofmult/families.hpp"
#include "gofmult/mvcdf.hpp"
#include "gofmult/sklar.hpp"
#include "gofmult/special.hpp"
#include "gofmult/stats.hpp"

#include "test_support.hpp"

#include <catch_amalgamated.hpp>

using namespace gofmult;
using Catch::Matchers::WithinAbs;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Vector vec(std::initializer_list<double> v) {
    Vector out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) out[i++] = x;
    return out;
}

double cdf_at(const Family& f, const Vector& theta, const Vector& x) { return f.cdf(theta, as_point(x)); }

SklarFamily with_margins(const std::string& margin, int d, CopulaSpec spec) {
    return SklarFamily("custom", std::vector<FamilyPtr>(static_cast<std::size_t>(d), make_family(margin)), spec);
}

}  // namespace

TEST_CASE("Clayton approaches independence as theta goes to zero") {
    const auto nc = make_family("nc", 3);
    const auto norm = make_family("norm");
    const Vector theta = vec({0.0, 1.0, 1.0, 2.0, -1.0, 0.5, 1e-6});
    std::mt19937_64 gen(1);
    std::normal_distribution<double> z;
    for (int t = 0; t < 20; ++t) {
        const Vector x = vec({z(gen), 1.0 + z(gen), -1.0 + z(gen)});
        double prod = 1.0, logsum = 0.0;
        for (int j = 0; j < 3; ++j) {
            const Vector m = theta.segment(2 * j, 2);
            const Vector xj = x.segment(j, 1);
            prod *= norm->cdf(m, as_point(xj));
            logsum += norm->logpdf(m, as_point(xj));
        }
        CHECK_THAT(cdf_at(*nc, theta, x), WithinAbs(prod, 1e-4));
        CHECK_THAT(nc->logpdf(theta, as_point(x)), WithinAbs(logsum, 1e-4));
    }
}

TEST_CASE("gamma-margin normal copula at the marginal medians") {
    const auto gn = make_family("gn", 2);
    const auto gamma = make_family("gamma");
    const Vector margin = vec({98.671, 9.866});
    const double med = gamma->quantile(margin, 0.5);
    const Vector theta = vec({98.671, 9.866, 98.671, 9.866, 0.309});
    const Vector x = vec({med, med});
    CHECK_THAT(cdf_at(*gn, theta, x), WithinAbs(0.25 + std::asin(0.309) / special::kTwoPi, 1e-7));
}

TEST_CASE("an infinite coordinate drops out of the copula") {
    for (const std::string id : {"nc", "gn", "t5n"}) {
        const auto f3 = make_family(id, 3);
        const auto f2 = make_family(id, 2);
        Vector t3, t2;
        if (id == "gn") {
            t3 = vec({3, 1, 4, 2, 5, 1, 0.55, 0.40, 0.45});
            t2 = vec({3, 1, 5, 1, 0.40});  // margins 1 and 3, rho13
        } else if (id == "nc") {
            t3 = vec({0, 1, 1, 2, -1, 0.5, 1.333});
            t2 = vec({0, 1, -1, 0.5, 1.333});
        } else {
            t3 = vec({0, 1, 1, 2, -1, 0.5, 0.55, 0.40, 0.45});
            t2 = vec({0, 1, -1, 0.5, 0.40});
        }
        const double lo = id == "gn" ? 2.5 : 0.2;
        CHECK_THAT(cdf_at(*f3, t3, vec({lo, kInf, lo})), WithinAbs(cdf_at(*f2, t2, vec({lo, lo})), 1e-10));
    }
}

TEST_CASE("copulas have uniform margins") {
    const std::vector<std::pair<CopulaSpec, Vector>> cases = {
        {{CopulaKind::Normal}, vec({0.55, 0.40, 0.45})},
        {{CopulaKind::T, 5.0}, vec({0.55, -0.40, 0.45})},
        {{CopulaKind::Clayton}, vec({1.333})},
        {{CopulaKind::Clayton}, vec({0.5})},
    };
    for (const auto& [spec, params] : cases)
        for (double u : {1e-6, 0.1, 0.5, 0.93})
            for (int j = 0; j < 3; ++j) {
                Vector v = Vector::Ones(3);
                v[j] = u;
                CHECK_THAT(copula::cdf(spec, params, as_point(v)), WithinAbs(u, 1e-8));
            }
}

TEST_CASE("normal copula with normal margins is the multivariate normal") {
    for (int d : {2, 3}) {
        const auto mvn = make_family("mvnorm", d);
        const SklarFamily sk = with_margins("norm", d, {CopulaKind::Normal});
        const Vector theta = d == 2 ? vec({0.5, -1.0, 1.5, 0.5, 0.309}) : vec({0.5, -1.0, 2.0, 1.5, 0.5, 3.0, 0.55, 0.40, 0.45});
        // sklar layout interleaves (mean_j, variance_j) per margin
        Vector st(theta.size());
        for (int j = 0; j < d; ++j) {
            st[2 * j] = theta[j];
            st[2 * j + 1] = theta[d + j];
        }
        st.tail(theta.size() - 2 * d) = theta.tail(theta.size() - 2 * d);
        RngStream rng(2, static_cast<std::uint64_t>(d));
        const Dataset x = mvn->sample(theta, 50, rng);
        for (Eigen::Index i = 0; i < x.n(); ++i) {
            CHECK_THAT(sk.logpdf(st, x.row(i)), WithinAbs(mvn->logpdf(theta, x.row(i)), 1e-10));
            CHECK_THAT(sk.cdf(st, x.row(i)), WithinAbs(mvn->cdf(theta, x.row(i)), 1e-10));
        }
    }
}

TEST_CASE("t copula with matching t margins is the multivariate t") {
    for (int d : {2, 3}) {
        const auto mvt = make_family("mvt5", d);
        const SklarFamily sk = with_margins("t5", d, {CopulaKind::T, 5.0});
        const Vector theta = d == 2 ? vec({0.5, -1.0, 1.5, 0.5, 0.309}) : vec({0.5, -1.0, 2.0, 1.5, 0.5, 3.0, 0.55, 0.40, 0.45});
        Vector st(theta.size());
        for (int j = 0; j < d; ++j) {
            st[2 * j] = theta[j];
            st[2 * j + 1] = theta[d + j];
        }
        st.tail(theta.size() - 2 * d) = theta.tail(theta.size() - 2 * d);
        RngStream rng(3, static_cast<std::uint64_t>(d));
        const Dataset x = mvt->sample(theta, 50, rng);
        for (Eigen::Index i = 0; i < x.n(); ++i) {
            CHECK_THAT(sk.logpdf(st, x.row(i)), WithinAbs(mvt->logpdf(theta, x.row(i)), 1e-10));
            CHECK_THAT(sk.cdf(st, x.row(i)), WithinAbs(mvt->cdf(theta, x.row(i)), 1e-9));
        }
    }
}

TEST_CASE("sampled Kendall tau matches the copula parameter") {
    const double band = 4.0 * 2.0 / (3.0 * std::sqrt(4000.0));
    for (auto [theta_c, tau] : {std::pair{0.5, 0.2}, std::pair{1.333, 0.4}}) {
        RngStream rng(4, 0);
        const RowMatrix u = copula::sample({CopulaKind::Clayton}, vec({theta_c}), 2, 4000, rng);
        CHECK(std::abs(stats::kendall_tau(stats::column(u, 0), stats::column(u, 1)) - tau) < band);
    }
    for (auto [rho, tau] : {std::pair{0.309, 0.2}, std::pair{0.588, 0.4}}) {
        RngStream rng(5, 0);
        const RowMatrix u = copula::sample({CopulaKind::Normal}, vec({rho}), 2, 4000, rng);
        CHECK(std::abs(2.0 / special::kPi * std::asin(rho) - tau) < 1e-3);
        CHECK(std::abs(stats::kendall_tau(stats::column(u, 0), stats::column(u, 1)) - tau) < band);
    }
}

TEST_CASE("sampling preserves the margins") {
    const Eigen::Index n = 100000;
    struct Case {
        std::string id;
        Vector theta;
    };
    const std::vector<Case> cases = {
        {"nc", vec({10, 1, 10, 1, 1.333})},
        {"gn", vec({98.671, 9.866, 98.671, 9.866, 0.588})},
        {"t5n", vec({0, 1, 1, 2, 0.309})},
    };
    for (const auto& c : cases) {
        INFO(c.id);
        const auto fam = make_family(c.id, 2);
        const auto& sk = dynamic_cast<const SklarFamily&>(*fam);
        RngStream rng(6, 0);
        const Dataset x = fam->sample(c.theta, n, rng);
        for (int j = 0; j < 2; ++j) {
            const Vector m = sk.margin_params(c.theta, j);
            const auto& margin = *sk.margins()[static_cast<std::size_t>(j)];
            const double ks = testsupport::ks_distance(stats::column(x.matrix(), j), [&](double v) {
                const Vector p = vec({v});
                return margin.cdf(m, as_point(p));
            });
            CHECK(ks < 1.36 / std::sqrt(double(n)));
        }
    }
}

TEST_CASE("density integrates to box probabilities") {
    std::mt19937_64 gen(9);
    std::uniform_real_distribution<double> u(-1.5, 1.0);
    for (const std::string id : {"nc", "t5n"}) {
        const auto fam = make_family(id, 2);
        const Vector theta = id == "nc" ? vec({0, 1, 0.5, 0.5, 1.333}) : vec({0, 1, 0.5, 0.5, 0.588});
        for (int t = 0; t < 3; ++t) {
            const double a1 = u(gen), a2 = u(gen);
            const double b1 = a1 + 0.8, b2 = a2 + 1.1;
            const auto dens = [&](double x, double y) {
                const Vector p = vec({x, y});
                return std::exp(fam->logpdf(theta, as_point(p)));
            };
            const double mass = testsupport::integrate2(dens, a1, b1, a2, b2, 1e-9);
            const double box = cdf_at(*fam, theta, vec({b1, b2})) - cdf_at(*fam, theta, vec({a1, b2})) -
                               cdf_at(*fam, theta, vec({b1, a2})) + cdf_at(*fam, theta, vec({a1, a2}));
            CHECK_THAT(mass, WithinAbs(box, 1e-4));
        }
    }
}

TEST_CASE("parameter slicing partitions theta") {
    const auto fam = make_family("gn", 3);
    const auto& sk = dynamic_cast<const SklarFamily&>(*fam);
    const Vector theta = vec({1, 2, 3, 4, 5, 6, 0.1, 0.2, 0.3});
    CHECK(sk.margin_params(theta, 1) == vec({3, 4}));
    CHECK(sk.copula_params(theta) == vec({0.1, 0.2, 0.3}));
    const auto names = fam->param_names();
    CHECK(names.size() == 9);
    CHECK(names.back() == "rho23");
}

TEST_CASE("copula starting values by tau inversion") {
    const auto fam = make_family("nc", 2);
    RngStream rng(7, 0);
    const Dataset x = fam->sample(vec({0, 1, 0, 1, 1.333}), 5000, rng);
    const Vector start = fam->moment_start(x);
    CHECK(std::abs(start[4] - 1.333) < 0.15);

    const auto gn = make_family("gn", 2);
    RngStream rng2(8, 0);
    const Vector s2 = gn->moment_start(gn->sample(vec({98.671, 9.866, 98.671, 9.866, 0.588}), 5000, rng2));
    CHECK(std::abs(s2[4] - 0.588) < 0.04);
}

TEST_CASE("invalid copula parameters") {
    const Vector u = vec({0.5, 0.5});
    CHECK_THROWS_AS(copula::validate({CopulaKind::Clayton}, vec({-0.5}), 2), DomainError);
    CHECK_THROWS_AS(copula::validate({CopulaKind::Normal}, vec({1.2}), 2), DomainError);
    CHECK_THROWS_AS(copula::validate({CopulaKind::Normal}, vec({0.9, 0.9, -0.9}), 3), DomainError);
    CHECK_THROWS_AS(copula::validate({CopulaKind::T, 5.0}, vec({0.2, 0.1}), 2), DomainError);
    CHECK_THROWS_AS(make_family("nc", 2)->cdf(vec({0, -1, 0, 1, 1.0}), as_point(u)), DomainError);
}
