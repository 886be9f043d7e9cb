#include "doctest.h"

#include <cmath>
#include <sstream>

#include "semiflow/measures.hpp"
#include "semiflow/rng.hpp"
#include "support/test_oracles.hpp"

using namespace semiflow;

namespace {
double norm1(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += std::fabs(v);
    return s;
}
}  // namespace

TEST_CASE("construction: weights renormalize within 1e-9, reject beyond") {
    EmpiricalMeasure ok({0.0, 1.0}, 1, {0.5 + 4e-10, 0.5});
    CHECK(ok.weight(0) + ok.weight(1) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK_THROWS_AS(EmpiricalMeasure({0.0, 1.0}, 1, {0.6, 0.5}),
                    std::invalid_argument);
    CHECK_THROWS_AS(EmpiricalMeasure({0.0}, 1, {-1.0}), std::invalid_argument);
    CHECK_THROWS_AS(EmpiricalMeasure({}, 1, {}), std::invalid_argument);
    CHECK_THROWS_AS(EmpiricalMeasure({0.0, 1.0}, 1, {1.0}), std::invalid_argument);
}

TEST_CASE("push_forward translates a Dirac") {
    const EmpiricalMeasure mu = EmpiricalMeasure::dirac({0.0});
    const EmpiricalMeasure nu = push_forward(mu, [](std::span<const double> x) {
        return std::vector<double>{x[0] + 3.0};
    });
    CHECK(nu.point(0)[0] == 3.0);
    CHECK(nu.weight(0) == 1.0);
}

TEST_CASE("push_forward applies a linear map and keeps weights") {
    const EmpiricalMeasure mu({0.0, 1.0}, 1, {0.5, 0.5});
    const EmpiricalMeasure nu = push_forward(mu, [](std::span<const double> x) {
        return std::vector<double>{2.0 * x[0]};
    });
    CHECK(nu.point(0)[0] == 0.0);
    CHECK(nu.point(1)[0] == 2.0);
    CHECK(nu.weight(0) == 0.5);
    // integral identity: int h d(push) = int h(map) dmu, exact
    auto h = [](std::span<const double> x) { return std::cos(x[0]) + x[0]; };
    const double lhs = moment(nu, h);
    const double rhs = moment(mu, [&](std::span<const double> x) {
        const std::vector<double> y{2.0 * x[0]};
        return h(std::span<const double>(y));
    });
    CHECK(lhs == rhs);
}

TEST_CASE("push_forward failure names the support point") {
    const EmpiricalMeasure mu({0.0, 1.0}, 1, {0.5, 0.5});
    try {
        push_forward(mu, [](std::span<const double> x) -> std::vector<double> {
            if (x[0] > 0.5) throw std::runtime_error("boom");
            return {x[0]};
        });
        FAIL("expected an exception");
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()).find("point 1") != std::string::npos);
    }
}

TEST_CASE("moment basics and a seeded sample against direct accumulation") {
    CHECK(moment(EmpiricalMeasure::dirac({3.0}),
                 [](std::span<const double> x) { return x[0] * x[0]; }) == 9.0);
    const EmpiricalMeasure two({0.0, 2.0}, 1, {0.5, 0.5});
    CHECK(moment(two, [](std::span<const double> x) { return x[0]; }) == 1.0);

    Rng rng(100);
    std::vector<double> pts(100);
    for (auto& p : pts) p = rng.gaussian();
    const EmpiricalMeasure mu(pts, 1, std::vector<double>(100, 0.01));
    double direct = 0.0;
    for (double p : pts) direct += 0.01 * p * p;
    CHECK(moment(mu, [](std::span<const double> x) { return x[0] * x[0]; }) ==
          doctest::Approx(direct).epsilon(1e-14));
}

TEST_CASE("tail_mass: thresholds and dyadic sweep") {
    auto absval = [](std::span<const double> x) { return std::fabs(x[0]); };
    CHECK(tail_mass(EmpiricalMeasure::dirac({0.0}), absval, 1.0) == 0.0);
    CHECK(tail_mass(EmpiricalMeasure::dirac({2.0}), absval, 1.0) == 2.0);

    Rng rng(5);
    std::vector<double> pts(64);
    for (auto& p : pts) p = rng.gaussian() * 3.0;
    const EmpiricalMeasure mu(pts, 1, std::vector<double>(64, 1.0 / 64));
    double prev = tail_mass(mu, absval, 0.0);
    double maxval = 0.0;
    for (double p : pts) maxval = std::max(maxval, std::fabs(p));
    for (double r : {1.0, 2.0, 4.0, 8.0}) {
        const double cur = tail_mass(mu, absval, r);
        CHECK(cur <= prev);
        prev = cur;
    }
    CHECK(tail_mass(mu, absval, maxval + 1.0) == 0.0);
    CHECK_THROWS_AS(tail_mass(mu, absval, -1.0), std::invalid_argument);
}

TEST_CASE("wasserstein1_1d: point masses and the 2x2 coupling") {
    CHECK(wasserstein1_1d(EmpiricalMeasure::dirac({0.0}),
                          EmpiricalMeasure::dirac({1.0})) == 1.0);
    const EmpiricalMeasure mu({0.0, 1.0}, 1, {0.5, 0.5});
    CHECK(wasserstein1_1d(mu, mu) == 0.0);
    const EmpiricalMeasure nu({0.0, 1.0}, 1, {0.25, 0.75});
    const double lp = test_oracle::transport_bruteforce({0.0, 1.0}, {0.5, 0.5},
                                                        {0.0, 1.0}, {0.25, 0.75});
    CHECK(wasserstein1_1d(mu, nu) == doctest::Approx(lp).epsilon(1e-13));
}

TEST_CASE("wasserstein1_1d agrees with coupling enumeration on small supports") {
    Rng rng(77);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t m = 2 + rng.integer(3), n = 2 + rng.integer(3);
        std::vector<double> xs(m), ys(n), wx(m), wy(n);
        for (auto& v : xs) v = rng.uniform(-3.0, 3.0);
        for (auto& v : ys) v = rng.uniform(-3.0, 3.0);
        double sx = 0.0, sy = 0.0;
        for (auto& v : wx) sx += (v = rng.uniform(0.1, 1.0));
        for (auto& v : wy) sy += (v = rng.uniform(0.1, 1.0));
        for (auto& v : wx) v /= sx;
        for (auto& v : wy) v /= sy;
        const EmpiricalMeasure mu(xs, 1, wx);
        const EmpiricalMeasure nu(ys, 1, wy);
        const double lp = test_oracle::transport_bruteforce(xs, wx, ys, wy);
        CHECK(wasserstein1_1d(mu, nu) == doctest::Approx(lp).epsilon(1e-10));
    }
    CHECK_THROWS_AS(
        wasserstein1_1d(EmpiricalMeasure({0.0, 0.0}, 2, {1.0}),
                        EmpiricalMeasure({0.0, 0.0}, 2, {1.0})),
        std::invalid_argument);
}

TEST_CASE("dictionary functions are 1-bounded and 1-Lipschitz") {
    const LipschitzDictionary dict(2, 32, 11);
    CHECK(dict.sampled_violation(200, 12) <= 1e-9);
}

TEST_CASE("bl_distance: zero on equal measures, symmetric, matches direct sum") {
    const LipschitzDictionary dict(1, 32, 2024);
    const EmpiricalMeasure d0 = EmpiricalMeasure::dirac({0.0});
    const EmpiricalMeasure d1 = EmpiricalMeasure::dirac({1.0});
    CHECK(bl_distance(d0, d0, dict) == 0.0);
    CHECK(bl_distance(d0, d1, dict) == bl_distance(d1, d0, dict));
    CHECK(bl_distance(d0, d1, dict) > 0.0);

    // independent truncated-sum oracle
    double expect = 0.0, pow2 = 1.0;
    for (std::size_t j = 0; j < dict.size(); ++j) {
        pow2 *= 0.5;
        const std::vector<double> x0{0.0}, x1{1.0};
        expect += pow2 * std::fabs(dict.evaluate(j, std::span<const double>(x0)) -
                                   dict.evaluate(j, std::span<const double>(x1)));
    }
    CHECK(bl_distance(d0, d1, dict) == doctest::Approx(expect).epsilon(1e-15));
}

TEST_CASE("bl_distance satisfies the triangle inequality on random triples") {
    const LipschitzDictionary dict(1, 32, 5);
    Rng rng(6);
    for (int trial = 0; trial < 25; ++trial) {
        auto sample = [&] {
            std::vector<double> pts(4);
            for (auto& p : pts) p = rng.gaussian();
            return EmpiricalMeasure(pts, 1, std::vector<double>(4, 0.25));
        };
        const EmpiricalMeasure a = sample(), b = sample(), c = sample();
        CHECK(bl_distance(a, c, dict) <=
              bl_distance(a, b, dict) + bl_distance(b, c, dict) + 1e-12);
    }
}

TEST_CASE("bl_distance rejects dimension mismatches") {
    const LipschitzDictionary dict(1, 8, 1);
    const EmpiricalMeasure flat({0.0, 0.0}, 2, {1.0});
    CHECK_THROWS_AS(bl_distance(flat, flat, dict), std::invalid_argument);
}

TEST_CASE("measure CSV round-trips exactly at 17 significant digits") {
    Rng rng(8);
    std::vector<double> pts(6);
    for (auto& p : pts) p = rng.gaussian() * 1e3;
    std::vector<double> w = {0.1, 0.2, 0.7};
    const EmpiricalMeasure mu(pts, 2, w);
    std::ostringstream ss;
    write_measure_csv(mu, ss);
    const std::string path = "measure_roundtrip_test.csv";
    write_measure_csv(mu, path);
    const EmpiricalMeasure back = read_measure_csv(path);
    REQUIRE(back.size() == mu.size());
    REQUIRE(back.dim() == mu.dim());
    for (std::size_t i = 0; i < mu.size(); ++i) {
        CHECK(back.weight(i) == mu.weight(i));
        CHECK(norm1(back.point(i)) == norm1(mu.point(i)));
        for (std::size_t c = 0; c < mu.dim(); ++c)
            CHECK(back.point(i)[c] == mu.point(i)[c]);
    }
    std::remove(path.c_str());
}
