#include "doctest.h"

#include <cmath>

#include "semiflow/oracles.hpp"
#include "semiflow/rng.hpp"
#include "support/test_oracles.hpp"

using namespace semiflow;

TEST_CASE("quadratic_flow fixed point and free drift") {
    QuadraticFlowSpec fixed{1.0, {1.0}, {0.0}};
    for (double t : {0.0, 0.7, 3.0}) {
        const std::vector<double> x{1.0}, v{0.0};
        const FlowPoint p = quadratic_flow(x, v, t, fixed);
        CHECK(p.position[0] == doctest::Approx(1.0).epsilon(1e-15));
    }
    QuadraticFlowSpec free0{0.0, {0.0}, {0.0}};
    const std::vector<double> x{2.0}, v{3.0};
    const FlowPoint p = quadratic_flow(x, v, 4.0, free0);
    CHECK(p.position[0] == 14.0);
    CHECK(p.velocity[0] == 3.0);
    CHECK_THROWS_AS(quadratic_flow(x, v, -1.0, free0), std::invalid_argument);
}

TEST_CASE("two equal masses at +-1 oscillate as cos t") {
    QuadraticFlowSpec spec{1.0, {0.0}, {0.0}};
    for (double t : {0.3, 1.0, 2.5}) {
        const std::vector<double> xp{1.0}, xm{-1.0}, v0{0.0};
        CHECK(quadratic_flow(xp, v0, t, spec).position[0] ==
              doctest::Approx(std::cos(t)).epsilon(1e-15));
        CHECK(quadratic_flow(xm, v0, t, spec).position[0] ==
              doctest::Approx(-std::cos(t)).epsilon(1e-15));
    }
}

TEST_CASE("quadratic_flow satisfies its ODE by finite differences") {
    // d2X/dt2 = -kappa (X - mean_x - t mean_v); the kappa<0 case pins the
    // 1/sqrt(-kappa) prefactor of the sinh term
    Rng rng(10);
    for (double kappa : {1.7, -0.8}) {
        QuadraticFlowSpec spec{kappa, {0.2}, {-0.4}};
        for (int trial = 0; trial < 10; ++trial) {
            const std::vector<double> x{rng.gaussian()}, v{rng.gaussian()};
            const double t = rng.uniform(0.1, 2.0);
            const double h = 1e-5;
            const double xm = quadratic_flow(x, v, t - h, spec).position[0];
            const double x0 = quadratic_flow(x, v, t, spec).position[0];
            const double xp = quadratic_flow(x, v, t + h, spec).position[0];
            const double accel = (xp - 2.0 * x0 + xm) / (h * h);
            const double rhs = -kappa * (x0 - (0.2 - 0.4 * t));
            CHECK(std::fabs(accel - rhs) < 1e-6);
            // velocity is the exact time derivative
            const double vel = quadratic_flow(x, v, t, spec).velocity[0];
            CHECK(std::fabs(vel - (xp - xm) / (2.0 * h)) < 1e-6);
        }
    }
}

TEST_CASE("quadratic_flow preserves the mean exactly") {
    Rng rng(21);
    const std::size_t n = 8;
    std::vector<double> xs(n), vs(n), ms(n);
    double msum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        xs[i] = rng.gaussian();
        vs[i] = rng.gaussian();
        msum += (ms[i] = rng.uniform(0.5, 1.5));
    }
    for (auto& m : ms) m /= msum;
    double mx = 0.0, mv = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += ms[i] * xs[i];
        mv += ms[i] * vs[i];
    }
    QuadraticFlowSpec spec{1.0, {mx}, {mv}};
    for (double t : {0.5, 1.5}) {
        double mean = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const std::vector<double> x{xs[i]}, v{vs[i]};
            mean += ms[i] * quadratic_flow(x, v, t, spec).position[0];
        }
        CHECK(mean == doctest::Approx(mx + t * mv).epsilon(1e-13));
    }
}

TEST_CASE("undamped mode: pure cosine and conserved lambda a^2 + adot^2") {
    const ModeValue at_pi = damped_mode(1.0, 0.0, 1.0, 3.14159265358979323846, 0.0);
    CHECK(at_pi.a == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(std::fabs(at_pi.adot) < 1e-12);
    const ModeValue zero = damped_mode(0.0, 0.0, 7.3, 1.23, 0.0);
    CHECK(zero.a == 0.0);
    CHECK(zero.adot == 0.0);

    Rng rng(2);
    for (int trial = 0; trial < 10; ++trial) {
        const double g = rng.gaussian(), h = rng.gaussian();
        const double lambda = rng.uniform(0.5, 30.0);
        const double inv0 = lambda * g * g + h * h;
        for (double t : {0.3, 1.1, 2.9}) {
            const ModeValue mv = damped_mode(g, h, lambda, t, 0.0);
            const double inv = lambda * mv.a * mv.a + mv.adot * mv.adot;
            CHECK(std::fabs(inv - inv0) <= 1e-12 * std::max(1.0, inv0));
        }
    }
}

TEST_CASE("damped modes match a high-resolution rk4 reference") {
    struct Case {
        double g, h, lambda, mu, t;
    };
    const Case cases[] = {
        {1.0, 0.0, 9.8696044010893586, 0.1, 1.0},  // underdamped, lambda = pi^2
        {0.7, -0.3, 4.0, 2.0, 1.5},                // overdamped (mu^2 l^2 > 4l)
        {1.0, 0.5, 1.0, 2.0, 2.0},                 // critically damped boundary
        {-0.4, 1.2, 25.0, 0.02, 2.0},              // lightly damped
    };
    for (const Case& c : cases) {
        const auto ref = test_oracle::rk4_second_order(
            [&](double y, double v) { return -c.lambda * y - c.mu * c.lambda * v; },
            c.g, c.h, c.t, 1e-5);
        const ModeValue mv = damped_mode(c.g, c.h, c.lambda, c.t, c.mu);
        CHECK(std::fabs(mv.a - ref.y) <= 1e-8);
        CHECK(std::fabs(mv.adot - ref.ydot) <= 1e-8);
    }
    CHECK_THROWS_AS(damped_mode(1.0, 0.0, 0.0, 1.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(damped_mode(1.0, 0.0, -2.0, 1.0, 0.1), std::invalid_argument);
}

TEST_CASE("linear_wave_modes handles vector coefficients per mode") {
    const std::vector<double> g = {1.0, 0.0, 0.5, -0.5};  // 2 modes, d = 2
    const std::vector<double> h = {0.0, 1.0, 0.0, 0.0};
    const std::vector<double> lambdas = {1.0, 4.0};
    const ModeSolution ms = linear_wave_modes(g, h, lambdas, 2, 0.9, 0.0);
    REQUIRE(ms.a.size() == 4);
    const ModeValue m00 = damped_mode(1.0, 0.0, 1.0, 0.9, 0.0);
    const ModeValue m11 = damped_mode(-0.5, 0.0, 4.0, 0.9, 0.0);
    CHECK(ms.a[0] == m00.a);
    CHECK(ms.a[3] == m11.a);
    CHECK_THROWS_AS(linear_wave_modes(g, h, {1.0}, 2, 0.5, 0.0),
                    std::invalid_argument);
}
