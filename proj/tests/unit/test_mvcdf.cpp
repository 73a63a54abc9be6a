#include "gofmult/mvcdf.hpp"
#include "gofmult/mvt_analytic.hpp"
#include "gofmult/special.hpp"

#include "test_support.hpp"

#include <catch_amalgamated.hpp>

using namespace gofmult;
using namespace gofmult::mvcdf;
using Catch::Matchers::WithinAbs;
using testsupport::corr2;
using testsupport::corr3;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
const double kRhos[] = {-0.9, -0.5, 0.0, 0.309, 0.588, 0.9};

double orthant2(double rho) { return 0.25 + std::asin(rho) / special::kTwoPi; }

double orthant3(double a, double b, double c) {
    return 0.125 + (std::asin(a) + std::asin(b) + std::asin(c)) / (2.0 * special::kTwoPi);
}

}  // namespace

TEST_CASE("bivariate normal orthant identity") {
    for (double rho : kRhos) CHECK_THAT(bvn_cdf(0.0, 0.0, rho), WithinAbs(orthant2(rho), 1e-7));
}

TEST_CASE("bivariate normal reduces to the product under independence and is symmetric") {
    for (double h : {-2.0, 0.1, 1.5})
        for (double k : {-0.7, 0.0, 2.2}) {
            CHECK_THAT(bvn_cdf(h, k, 0.0), WithinAbs(special::norm_cdf(h) * special::norm_cdf(k), 1e-12));
            for (double rho : kRhos) CHECK_THAT(bvn_cdf(h, k, rho), WithinAbs(bvn_cdf(k, h, rho), 1e-14));
        }
}

TEST_CASE("bivariate normal matches two-dimensional quadrature of the density") {
    const double rho = 0.588;
    const double det = 1.0 - rho * rho;
    const auto dens = [&](double x, double y) {
        return std::exp(-(x * x - 2.0 * rho * x * y + y * y) / (2.0 * det)) / (special::kTwoPi * std::sqrt(det));
    };
    const double oracle = testsupport::integrate2(dens, -12.0, 1.0, -12.0, -0.5);
    CHECK_THAT(bvn_cdf(1.0, -0.5, rho), WithinAbs(oracle, 1e-7));
    CHECK_THAT(bvn_cdf(-1.7, 0.4, -0.6),
               WithinAbs(testsupport::integrate2(
                             [](double x, double y) {
                                 const double r = -0.6, dt = 1 - r * r;
                                 return std::exp(-(x * x - 2 * r * x * y + y * y) / (2 * dt)) /
                                        (special::kTwoPi * std::sqrt(dt));
                             },
                             -12.0, -1.7, -12.0, 0.4),
                         1e-7));
}

TEST_CASE("bivariate t orthant identity holds for any degrees of freedom") {
    for (double nu : {1.0, 3.0, 4.5, 5.0, 10.0})
        for (double rho : kRhos) {
            CHECK_THAT(bvt_cdf(0.0, 0.0, rho, nu), WithinAbs(orthant2(rho), 1e-7));
            CHECK_THAT(bvt_cdf_quadrature(0.0, 0.0, rho, nu), WithinAbs(orthant2(rho), 1e-7));
        }
}

TEST_CASE("bivariate t closed form agrees with its quadrature") {
    for (double nu : {1.0, 2.0, 3.0, 5.0, 10.0})
        for (double rho : {-0.8, 0.309, 0.95})
            for (double h : {-3.0, -0.4, 1.2})
                for (double k : {-1.0, 0.8, 4.0})
                    CHECK_THAT(bvt_cdf(h, k, rho, nu), WithinAbs(bvt_cdf_quadrature(h, k, rho, nu), 1e-8));
}

TEST_CASE("bivariate t matches quadrature of its density") {
    const double nu = 5.0, rho = 0.4, det = 1 - rho * rho;
    const auto dens = [&](double x, double y) {
        const double q = (x * x - 2 * rho * x * y + y * y) / det;
        return std::pow(1.0 + q / nu, -(nu + 2) / 2) / (special::kTwoPi * std::sqrt(det));
    };
    const double oracle = testsupport::integrate2(dens, -kInf, 0.7, -kInf, -1.1);
    CHECK_THAT(bvt_cdf(0.7, -1.1, rho, nu), WithinAbs(oracle, 1e-6));
}

TEST_CASE("trivariate normal orthant values") {
    CHECK_THAT(tvn_cdf({0, 0, 0}, {0, 0, 0}), WithinAbs(0.125, 1e-12));
    CHECK_THAT(tvn_cdf({0, 0, 0}, {0.5, 0.5, 0.5}), WithinAbs(orthant3(0.5, 0.5, 0.5), 1e-6));
    CHECK_THAT(tvn_cdf({0, 0, 0}, {0.55, 0.40, 0.45}), WithinAbs(orthant3(0.55, 0.40, 0.45), 1e-6));
    CHECK_THAT(tvn_cdf({0, 0, 0}, {-0.3, 0.2, 0.6}), WithinAbs(orthant3(-0.3, 0.2, 0.6), 1e-6));
}

TEST_CASE("trivariate normal matches simulation") {
    const Vector a = (Vector(3) << 0.3, -0.2, 0.1).finished();
    const Matrix r = corr3(0.5, 0.5, 0.5);
    const long draws = 4'000'000;
    const double mc = testsupport::mc_orthant(a, r, kInf, draws, 11);
    const double p = tvn_cdf({0.3, -0.2, 0.1}, {0.5, 0.5, 0.5});
    CHECK(std::abs(mc - p) < 4.0 * std::sqrt(p * (1 - p) / draws));
}

TEST_CASE("trivariate kernels reduce to bivariate ones when one limit is infinite") {
    for (double nu : {kNormalDof, 3.0, 5.0, 10.0}) {
        const std::array<double, 3> rho{0.55, 0.40, 0.45};
        const double full = nu == kNormalDof ? tvn_cdf({0.3, -0.2, kInf}, rho) : tvt_cdf({0.3, -0.2, kInf}, rho, nu);
        const double pair = nu == kNormalDof ? bvn_cdf(0.3, -0.2, 0.55) : bvt_cdf(0.3, -0.2, 0.55, nu);
        CHECK_THAT(full, WithinAbs(pair, 1e-12));
        const double mid = nu == kNormalDof ? tvn_cdf({0.3, kInf, 0.7}, rho) : tvt_cdf({0.3, kInf, 0.7}, rho, nu);
        const double pair2 = nu == kNormalDof ? bvn_cdf(0.3, 0.7, 0.40) : bvt_cdf(0.3, 0.7, 0.40, nu);
        CHECK_THAT(mid, WithinAbs(pair2, 1e-12));
    }
}

TEST_CASE("trivariate values are invariant under joint permutation") {
    const std::array<double, 3> a{0.3, -0.2, 0.1};
    const std::array<double, 3> r{0.55, 0.40, 0.45};  // r12, r13, r23
    for (double nu : {kNormalDof, 5.0}) {
        const auto f = [nu](std::array<double, 3> u, std::array<double, 3> rho) {
            return nu == kNormalDof ? tvn_cdf(u, rho) : tvt_cdf(u, rho, nu);
        };
        const double base = f(a, r);
        // swap coordinates 1 and 2: r12 stays, r13 <-> r23
        CHECK_THAT(f({a[1], a[0], a[2]}, {r[0], r[2], r[1]}), WithinAbs(base, 1e-9));
        // cycle (1 2 3) -> (3 1 2)
        CHECK_THAT(f({a[2], a[0], a[1]}, {r[1], r[2], r[0]}), WithinAbs(base, 1e-9));
    }
}

TEST_CASE("trivariate t orthant identity and simulation oracle") {
    for (double nu : {3.0, 5.0, 10.0})
        CHECK_THAT(tvt_cdf({0, 0, 0}, {0.55, 0.40, 0.45}, nu), WithinAbs(orthant3(0.55, 0.40, 0.45), 1e-5));

    const Vector a = (Vector(3) << 0.3, -0.2, 0.1).finished();
    const Matrix r = corr3(0.55, 0.40, 0.45);
    const long draws = 4'000'000;
    const double mc = testsupport::mc_orthant(a, r, 5.0, draws, 12);
    const double p = mvt_cdf(as_point(a), r, 5.0);
    CHECK(std::abs(mc - p) < 4.0 * std::sqrt(p * (1 - p) / draws));
}

TEST_CASE("multivariate t approaches the normal for large degrees of freedom") {
    const Vector a2 = (Vector(2) << 0.4, -0.6).finished();
    CHECK_THAT(mvt_cdf(as_point(a2), corr2(0.588), 1e6), WithinAbs(bvn_cdf(0.4, -0.6, 0.588), 1e-4));
    const Vector a3 = (Vector(3) << 0.3, -0.2, 0.1).finished();
    CHECK_THAT(mvt_cdf(as_point(a3), corr3(0.55, 0.40, 0.45), 1e6),
               WithinAbs(tvn_cdf({0.3, -0.2, 0.1}, {0.55, 0.40, 0.45}), 1e-4));
}

TEST_CASE("dispatcher handles one dimension and infinite limits") {
    const Vector a1 = (Vector(1) << 0.7).finished();
    CHECK_THAT(mvt_cdf(as_point(a1), Matrix::Identity(1, 1), 4.0), WithinAbs(special::t_cdf(0.7, 4.0), 1e-14));
    const Vector all_inf = Vector::Constant(3, kInf);
    CHECK(mvt_cdf(as_point(all_inf), corr3(0.2, 0.1, 0.3), 5.0) == 1.0);
    const Vector neg = (Vector(2) << -kInf, 0.0).finished();
    CHECK(mvt_cdf(as_point(neg), corr2(0.3), kNormalDof) == 0.0);
}

TEST_CASE("monotone in every upper limit and bounded by the margins") {
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> u(-2.5, 2.5);
    const Matrix r3 = corr3(0.55, 0.40, 0.45);
    for (double nu : {kNormalDof, 3.0, 10.0})
        for (int trial = 0; trial < 40; ++trial) {
            Vector a(3);
            for (int j = 0; j < 3; ++j) a[j] = u(gen);
            const double base = mvt_cdf(as_point(a), r3, nu);
            CHECK(base >= 0.0);
            for (int j = 0; j < 3; ++j) {
                const double marg = std::isinf(nu) ? special::norm_cdf(a[j]) : special::t_cdf(a[j], nu);
                CHECK(base <= marg + 1e-9);
                Vector b = a;
                b[j] += 0.05;
                CHECK(mvt_cdf(as_point(b), r3, nu) >= base - 1e-9);
            }
        }
}

TEST_CASE("difference quotients match the analytic coordinate partials") {
    const double h = 1e-5;
    for (double nu : {3.0, 5.0})
        for (int d : {2, 3}) {
            const Matrix r = d == 2 ? corr2(0.4) : corr3(0.55, 0.40, 0.45);
            Vector z = (Vector(3) << 0.3, -0.6, 0.8).finished().head(d);
            for (int j = 0; j < d; ++j) {
                Vector up = z, dn = z;
                up[j] += h;
                dn[j] -= h;
                const double fd = (mvt_cdf(as_point(up), r, nu) - mvt_cdf(as_point(dn), r, nu)) / (2 * h);
                CHECK_THAT(fd, WithinAbs(mvt_analytic::cdf_partial(r, nu, as_point(z), j), 1e-4));
            }
        }
}

TEST_CASE("near-singular correlations use the degenerate limit") {
    CHECK_THAT(bvn_cdf(0.3, 0.8, 1.0), WithinAbs(special::norm_cdf(0.3), 1e-12));
    CHECK_THAT(bvn_cdf(0.3, -0.1, -1.0), WithinAbs(std::max(0.0, special::norm_cdf(0.3) - special::norm_cdf(0.1)), 1e-12));
    CHECK_THAT(bvt_cdf(0.3, 0.8, 1.0, 5.0), WithinAbs(special::t_cdf(0.3, 5.0), 1e-12));
}
