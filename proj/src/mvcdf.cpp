#include "gofmult/mvcdf.hpp"

#include "gofmult/errors.hpp"
#include "gofmult/special.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace gofmult::mvcdf {

namespace {

using special::kPi;
using special::kTwoPi;
using special::norm_cdf;

const special::GaussRule& rule_for_bvn(double abs_r) {
    static const special::GaussRule g6 = special::make_gauss_legendre(6);
    static const special::GaussRule g12 = special::make_gauss_legendre(12);
    static const special::GaussRule g20 = special::make_gauss_legendre(20);
    if (abs_r < 0.3) return g6;
    if (abs_r < 0.75) return g12;
    return g20;
}

const special::GaussRule& panel_rule() {
    static const special::GaussRule rule = special::make_gauss_legendre(kPanelNodes);
    return rule;
}

// Upper orthant probability P(X > dh, Y > dk), Drezner-Wesolowsky with Genz's refinements.
double bvn_upper(double dh, double dk, double r) {
    const auto& rule = rule_for_bvn(std::abs(r));
    const int n = static_cast<int>(rule.nodes.size());
    double h = dh, k = dk, hk = h * k;
    double bvn = 0.0;
    if (std::abs(r) < 0.925) {
        const double hs = 0.5 * (h * h + k * k);
        const double asr = std::asin(r);
        for (int i = 0; i < n; ++i) {
            const double sn = std::sin(0.5 * asr * (rule.nodes[i] + 1.0));
            bvn += rule.weights[i] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
        }
        return bvn * asr / (2.0 * kTwoPi) + norm_cdf(-h) * norm_cdf(-k);
    }
    if (r < 0) {
        k = -k;
        hk = -hk;
    }
    if (std::abs(r) < 1.0) {
        const double as = (1.0 - r) * (1.0 + r);
        double a = std::sqrt(as);
        const double bs = (h - k) * (h - k);
        const double c = (4.0 - hk) / 8.0;
        const double d = (12.0 - hk) / 16.0;
        bvn = a * std::exp(-0.5 * (bs / as + hk)) *
              (1.0 - c * (bs - as) * (1.0 - d * bs / 5.0) / 3.0 + c * d * as * as / 5.0);
        if (hk > -160.0) {
            const double b = std::sqrt(bs);
            bvn -= std::exp(-0.5 * hk) * std::sqrt(kTwoPi) * norm_cdf(-b / a) * b *
                   (1.0 - c * bs * (1.0 - d * bs / 5.0) / 3.0);
        }
        a *= 0.5;
        for (int i = 0; i < n; ++i) {
            const double xs = std::pow(a * (rule.nodes[i] + 1.0), 2);
            const double rs = std::sqrt(1.0 - xs);
            bvn += a * rule.weights[i] * std::exp(-0.5 * (bs / xs + hk)) *
                   (std::exp(-hk * (1.0 - rs) / (2.0 * (1.0 + rs))) / rs - (1.0 + c * xs * (1.0 + d * xs)));
        }
        bvn = -bvn / kTwoPi;
    }
    if (r > 0) return bvn + norm_cdf(-std::max(h, k));
    return -bvn + std::max(0.0, norm_cdf(-h) - norm_cdf(-k));
}

// Dunnett-Sobel finite series for integer nu (Genz's BVTL).
double bvt_integer(int nu, double dh, double dk, double r) {
    constexpr double eps = 1e-15;
    if (1.0 - r <= eps) return special::t_cdf(std::min(dh, dk), nu);
    if (r + 1.0 <= eps) {
        return dh > -dk ? special::t_cdf(dh, nu) - special::t_cdf(-dk, nu) : 0.0;
    }
    const double dnu = nu;
    const double snu = std::sqrt(dnu);
    const double ors = 1.0 - r * r;
    const double hrk = dh - r * dk;
    const double krh = dk - r * dh;
    double xnhk = 0.0, xnkh = 0.0;
    if (std::abs(hrk) + ors > 0.0) {
        xnhk = hrk * hrk / (hrk * hrk + ors * (dnu + dk * dk));
        xnkh = krh * krh / (krh * krh + ors * (dnu + dh * dh));
    }
    const double hs = hrk < 0 ? -1.0 : 1.0;
    const double ks = krh < 0 ? -1.0 : 1.0;
    double bvt;
    if (nu % 2 == 0) {
        bvt = std::atan2(std::sqrt(ors), -r) / kTwoPi;
        double gmph = dh / std::sqrt(16.0 * (dnu + dh * dh));
        double gmpk = dk / std::sqrt(16.0 * (dnu + dk * dk));
        double btnckh = 2.0 * std::atan2(std::sqrt(xnkh), std::sqrt(1.0 - xnkh)) / kPi;
        double btpdkh = 2.0 * std::sqrt(xnkh * (1.0 - xnkh)) / kPi;
        double btnchk = 2.0 * std::atan2(std::sqrt(xnhk), std::sqrt(1.0 - xnhk)) / kPi;
        double btpdhk = 2.0 * std::sqrt(xnhk * (1.0 - xnhk)) / kPi;
        for (int j = 1; j <= nu / 2; ++j) {
            bvt += gmph * (1.0 + ks * btnckh);
            bvt += gmpk * (1.0 + hs * btnchk);
            btnckh += btpdkh;
            btpdkh = 2.0 * j * btpdkh * (1.0 - xnkh) / (2.0 * j + 1.0);
            btnchk += btpdhk;
            btpdhk = 2.0 * j * btpdhk * (1.0 - xnhk) / (2.0 * j + 1.0);
            gmph = gmph * (2.0 * j - 1.0) / (2.0 * j * (1.0 + dh * dh / dnu));
            gmpk = gmpk * (2.0 * j - 1.0) / (2.0 * j * (1.0 + dk * dk / dnu));
        }
    } else {
        const double qhrk = std::sqrt(dh * dh + dk * dk - 2.0 * r * dh * dk + dnu * ors);
        const double hkrn = dh * dk + r * dnu;
        const double hkn = dh * dk - dnu;
        const double hpk = dh + dk;
        bvt = std::atan2(-snu * (hkn * qhrk + hpk * hkrn), hkn * hkrn - dnu * hpk * qhrk) / kTwoPi;
        if (bvt < -eps) bvt += 1.0;
        double gmph = dh / (kTwoPi * snu * (1.0 + dh * dh / dnu));
        double gmpk = dk / (kTwoPi * snu * (1.0 + dk * dk / dnu));
        double btnckh = std::sqrt(xnkh);
        double btpdkh = btnckh;
        double btnchk = std::sqrt(xnhk);
        double btpdhk = btnchk;
        for (int j = 1; j <= (nu - 1) / 2; ++j) {
            bvt += gmph * (1.0 + ks * btnckh);
            bvt += gmpk * (1.0 + hs * btnchk);
            btpdkh = (2.0 * j - 1.0) * btpdkh * (1.0 - xnkh) / (2.0 * j);
            btnckh += btpdkh;
            btpdhk = (2.0 * j - 1.0) * btpdhk * (1.0 - xnhk) / (2.0 * j);
            btnchk += btpdhk;
            gmph = 2.0 * j * gmph / ((2.0 * j + 1.0) * (1.0 + dh * dh / dnu));
            gmpk = 2.0 * j * gmpk / ((2.0 * j + 1.0) * (1.0 + dk * dk / dnu));
        }
    }
    return std::clamp(bvt, 0.0, 1.0);
}

bool is_small_integer(double nu) { return nu >= 1.0 && nu <= 2000.0 && std::floor(nu) == nu; }

// Lower truncation point carrying negligible (< 1e-17) mass.
double lower_cutoff(double nu) {
    if (std::isinf(nu)) return -8.5;
    thread_local double cached_nu = -1.0;
    thread_local double cached_cut = 0.0;
    if (nu != cached_nu) {
        cached_nu = nu;
        cached_cut = special::t_quantile(1e-17, nu);
    }
    return cached_cut;
}

// Integral of the standard (t_nu or normal) density times g over (-inf, a].
template <class G>
double integrate_below(double a, double nu, G&& g) {
    const auto& rule = panel_rule();
    double total = 0.0;
    if (std::isinf(nu) || nu >= 30.0) {
        const double lo = lower_cutoff(nu);
        const double hi = std::min(a, -lo);
        if (hi <= lo) return 0.0;
        const double log_norm = std::isinf(nu) ? -special::kLogSqrtTwoPi
                                               : special::mvt_log_normalizer(nu, 1);
        const int panels = std::max(kOuterPanels, static_cast<int>(std::ceil(hi - lo)));
        const double width = (hi - lo) / panels;
        for (int p = 0; p < panels; ++p) {
            const double mid = lo + (p + 0.5) * width;
            double panel = 0.0;
            for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
                const double x = mid + 0.5 * width * rule.nodes[i];
                const double log_density = std::isinf(nu) ? log_norm - 0.5 * x * x
                                                          : log_norm - 0.5 * (nu + 1.0) * std::log1p(x * x / nu);
                panel += rule.weights[i] * std::exp(log_density) * g(x);
            }
            total += 0.5 * width * panel;
        }
        return total;
    }
    // x = sqrt(nu) tan(phi) maps the t density to a bounded weight cos(phi)^(nu - 1).
    const double snu = std::sqrt(nu);
    const double lo = -0.5 * kPi;
    const double hi = std::isinf(a) ? 0.5 * kPi : std::atan(a / snu);
    const double log_c = std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) - 0.5 * std::log(kPi);
    const double width = (hi - lo) / kOuterPanels;
    for (int p = 0; p < kOuterPanels; ++p) {
        const double mid = lo + (p + 0.5) * width;
        double panel = 0.0;
        for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
            const double phi = mid + 0.5 * width * rule.nodes[i];
            const double c = std::cos(phi);
            if (c <= 0.0) continue;
            const double weight = std::exp(log_c + (nu - 1.0) * std::log(c));
            panel += rule.weights[i] * weight * g(snu * std::tan(phi));
        }
        total += 0.5 * width * panel;
    }
    return total;
}

double univariate_cdf(double x, double nu) {
    return std::isinf(nu) ? norm_cdf(x) : special::t_cdf(x, nu);
}

double bivariate_cdf(double h, double k, double rho, double nu) {
    return std::isinf(nu) ? bvn_cdf(h, k, rho) : bvt_cdf(h, k, rho, nu);
}

// Trivariate orthant probability by conditioning on one coordinate.
double trivariate(const std::array<double, 3>& a, const std::array<double, 3>& rho, double nu) {
    for (double v : a) {
        if (std::isnan(v)) throw DomainError("orthant limit is NaN");
        if (v == -INFINITY) return 0.0;
    }
    // rho index for pair (i, j), i != j.
    auto pair_rho = [&](int i, int j) {
        if (i > j) std::swap(i, j);
        if (i == 0) return j == 1 ? rho[0] : rho[1];
        return rho[2];
    };
    for (int j = 0; j < 3; ++j) {
        if (a[j] == INFINITY) {
            int u = (j == 0) ? 1 : 0;
            int v = (j == 2) ? 1 : 2;
            return bivariate_cdf(a[u], a[v], pair_rho(u, v), nu);
        }
    }
    // Condition on the coordinate least correlated with the others.
    int outer = 0;
    double best = INFINITY;
    for (int k = 0; k < 3; ++k) {
        double worst = 0.0;
        for (int j = 0; j < 3; ++j) {
            if (j != k) worst = std::max(worst, std::abs(pair_rho(k, j)));
        }
        if (worst < best) {
            best = worst;
            outer = k;
        }
    }
    const int i = (outer == 0) ? 1 : 0;
    const int j = (outer == 2) ? 1 : 2;
    const double rki = std::clamp(pair_rho(outer, i), -kSingularRho, kSingularRho);
    const double rkj = std::clamp(pair_rho(outer, j), -kSingularRho, kSingularRho);
    const double si = std::sqrt((1.0 - rki) * (1.0 + rki));
    const double sj = std::sqrt((1.0 - rkj) * (1.0 + rkj));
    const double r = std::clamp((pair_rho(i, j) - rki * rkj) / (si * sj), -1.0, 1.0);
    const double ai = a[i], aj = a[j];
    if (std::isinf(nu)) {
        return integrate_below(a[outer], nu, [&](double x) {
            return bvn_cdf((ai - rki * x) / si, (aj - rkj * x) / sj, r);
        });
    }
    return integrate_below(a[outer], nu, [&](double x) {
        const double s = std::sqrt((nu + 1.0) / (nu + x * x));
        return bvt_cdf(s * (ai - rki * x) / si, s * (aj - rkj * x) / sj, r, nu + 1.0);
    });
}

}  // namespace

double bvn_cdf(double h, double k, double rho) {
    if (std::isnan(h) || std::isnan(k) || std::isnan(rho)) throw DomainError("bvn_cdf: NaN argument");
    if (h == -INFINITY || k == -INFINITY) return 0.0;
    if (h == INFINITY) return norm_cdf(k);
    if (k == INFINITY) return norm_cdf(h);
    if (rho >= kSingularRho) return norm_cdf(std::min(h, k));
    if (rho <= -kSingularRho) return std::max(0.0, norm_cdf(h) - norm_cdf(-k));
    return std::clamp(bvn_upper(-h, -k, rho), 0.0, 1.0);
}

double bvt_cdf_quadrature(double h, double k, double rho, double nu) {
    if (h == -INFINITY || k == -INFINITY) return 0.0;
    if (h == INFINITY) return univariate_cdf(k, nu);
    if (k == INFINITY) return univariate_cdf(h, nu);
    if (rho >= kSingularRho) return univariate_cdf(std::min(h, k), nu);
    if (rho <= -kSingularRho) return std::max(0.0, univariate_cdf(h, nu) - univariate_cdf(-k, nu));
    const double sr = std::sqrt((1.0 - rho) * (1.0 + rho));
    if (std::isinf(nu)) {
        return integrate_below(h, nu, [&](double x) { return norm_cdf((k - rho * x) / sr); });
    }
    return integrate_below(h, nu, [&](double x) {
        const double s = std::sqrt((nu + 1.0) / (nu + x * x));
        return special::t_cdf(s * (k - rho * x) / sr, nu + 1.0);
    });
}

double bvt_cdf(double h, double k, double rho, double nu) {
    if (std::isnan(h) || std::isnan(k) || std::isnan(rho)) throw DomainError("bvt_cdf: NaN argument");
    if (!(nu > 0.0)) throw DomainError("bvt_cdf: degrees of freedom must be positive");
    if (std::isinf(nu)) return bvn_cdf(h, k, rho);
    if (h == -INFINITY || k == -INFINITY) return 0.0;
    if (h == INFINITY) return special::t_cdf(k, nu);
    if (k == INFINITY) return special::t_cdf(h, nu);
    if (is_small_integer(nu)) return bvt_integer(static_cast<int>(nu), h, k, rho);
    return std::clamp(bvt_cdf_quadrature(h, k, rho, nu), 0.0, 1.0);
}

double tvn_cdf(const std::array<double, 3>& upper, const std::array<double, 3>& rho) {
    return std::clamp(trivariate(upper, rho, kNormalDof), 0.0, 1.0);
}

double tvt_cdf(const std::array<double, 3>& upper, const std::array<double, 3>& rho, double nu) {
    if (!(nu > 0.0)) throw DomainError("tvt_cdf: degrees of freedom must be positive");
    return std::clamp(trivariate(upper, rho, nu), 0.0, 1.0);
}

double mvt_cdf(Point upper, const Matrix& corr, double nu) {
    const auto d = static_cast<Eigen::Index>(upper.size());
    if (d < 1 || d > 3) throw DomainError("mvt_cdf supports dimensions 1 to 3");
    if (corr.rows() != d || corr.cols() != d) throw DomainError("mvt_cdf: correlation matrix has wrong shape");
    if (!(nu > 0.0)) throw DomainError("mvt_cdf: degrees of freedom must be positive");
    std::vector<int> kept;
    for (int j = 0; j < d; ++j) {
        if (std::isnan(upper[j])) throw DomainError("mvt_cdf: NaN limit");
        if (upper[j] == -INFINITY) return 0.0;
        if (upper[j] != INFINITY) kept.push_back(j);
    }
    switch (kept.size()) {
        case 0:
            return 1.0;
        case 1:
            return univariate_cdf(upper[kept[0]], nu);
        case 2:
            return bivariate_cdf(upper[kept[0]], upper[kept[1]], corr(kept[0], kept[1]), nu);
        default:
            return std::isinf(nu) ? tvn_cdf({upper[0], upper[1], upper[2]}, {corr(0, 1), corr(0, 2), corr(1, 2)})
                                  : tvt_cdf({upper[0], upper[1], upper[2]}, {corr(0, 1), corr(0, 2), corr(1, 2)}, nu);
    }
}

double mvt_cdf(const OrthantQuery& q) { return mvt_cdf(as_point(q.upper), q.corr, q.nu); }

}  // namespace gofmult::mvcdf
