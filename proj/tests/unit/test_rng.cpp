#include "gofmult/rng.hpp"
#include "gofmult/special.hpp"

#include "test_support.hpp"

#include <catch_amalgamated.hpp>

#include <set>

using gofmult::RngStream;

TEST_CASE("philox4x32-10 known-answer vectors") {
    using A4 = std::array<std::uint32_t, 4>;
    using A2 = std::array<std::uint32_t, 2>;
    CHECK(gofmult::philox4x32_10(A4{0, 0, 0, 0}, A2{0, 0}) == A4{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
    CHECK(gofmult::philox4x32_10(A4{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, A2{0xffffffff, 0xffffffff}) ==
          A4{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
    CHECK(gofmult::philox4x32_10(A4{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, A2{0xa4093822, 0x299f31d0}) ==
          A4{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("streams are deterministic and distinct") {
    RngStream a(42, 7), b(42, 7), c(42, 8), d(43, 7);
    bool differs_c = false, differs_d = false;
    for (int i = 0; i < 100; ++i) {
        const auto x = a.next_u64();
        CHECK(x == b.next_u64());
        differs_c |= x != c.next_u64();
        differs_d |= x != d.next_u64();
    }
    CHECK(differs_c);
    CHECK(differs_d);
}

TEST_CASE("substreams do not disturb the parent and do not collide") {
    RngStream parent(5, 0);
    RngStream copy = parent;
    std::set<std::uint64_t> firsts;
    for (std::uint64_t i = 0; i < 1000; ++i) {
        RngStream child = parent.substream(i);
        firsts.insert(child.next_u64());
        CHECK(child.seed() == parent.seed());
    }
    CHECK(firsts.size() == 1000);
    CHECK(parent.next_u64() == copy.next_u64());
    CHECK(parent.substream(3).next_u64() == RngStream(5, 0).substream(3).next_u64());
}

TEST_CASE("uniform draws lie in the open unit interval") {
    RngStream rng(1, 0);
    double sum = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform();
        REQUIRE(u > 0.0);
        REQUIRE(u < 1.0);
        sum += u;
    }
    CHECK(std::abs(sum / n - 0.5) < 4.0 * std::sqrt(1.0 / 12.0 / n));
}

TEST_CASE("normal variates follow the standard normal law") {
    RngStream rng(2, 0);
    std::vector<double> x(100000);
    for (auto& v : x) v = rng.normal();
    CHECK(testsupport::ks_distance(x, gofmult::special::norm_cdf) < 1.63 / std::sqrt(x.size()));
}

TEST_CASE("exponential, gamma and chi-square moments") {
    RngStream rng(3, 0);
    const int n = 200000;
    for (double shape : {0.3, 1.0, 2.5, 98.671}) {
        double s = 0.0, s2 = 0.0;
        for (int i = 0; i < n; ++i) {
            const double g = rng.gamma(shape);
            s += g;
            s2 += g * g;
        }
        const double mean = s / n, var = s2 / n - mean * mean;
        CHECK(std::abs(mean - shape) < 4.0 * std::sqrt(shape / n));
        CHECK(std::abs(var / shape - 1.0) < 0.05);
    }
    double e = 0.0, c = 0.0;
    for (int i = 0; i < n; ++i) {
        e += rng.exponential();
        c += rng.chi_square(5.0);
    }
    CHECK(std::abs(e / n - 1.0) < 4.0 / std::sqrt(n));
    CHECK(std::abs(c / n - 5.0) < 4.0 * std::sqrt(10.0 / n));
}

TEST_CASE("rademacher takes values plus and minus one with equal frequency") {
    RngStream rng(4, 0);
    const int n = 100000;
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
        const double r = rng.rademacher();
        REQUIRE(std::abs(r) == 1.0);
        s += r;
    }
    CHECK(std::abs(s / n) < 4.0 / std::sqrt(n));
}

TEST_CASE("works as a standard uniform random bit generator") {
    RngStream rng(9, 1);
    std::uniform_int_distribution<int> die(1, 6);
    int counts[7] = {};
    for (int i = 0; i < 60000; ++i) ++counts[die(rng)];
    for (int k = 1; k <= 6; ++k) CHECK(std::abs(counts[k] - 10000) < 500);
}
