#include "doctest.h"

#include <cmath>

#include "semiflow/jeans_vlasov.hpp"
#include "semiflow/newton.hpp"
#include "semiflow/oracles.hpp"
#include "semiflow/rng.hpp"
#include "support/test_oracles.hpp"

using namespace semiflow;

namespace {

SemiconvexPotential zero_potential(std::size_t n, std::size_t d) {
    SemiconvexPotential V;
    V.num_particles = n;
    V.dim = d;
    V.translation_invariant = true;
    V.value = [](std::span<const double>) { return 0.0; };
    V.gradient = [](std::span<const double>, std::span<double> g) {
        for (double& v : g) v = 0.0;
    };
    return V;
}

IntegratorConfig rk4(double dt) {
    IntegratorConfig cfg;
    cfg.dt = dt;
    cfg.scheme = Scheme::Rk4;
    return cfg;
}

constexpr double kTau = 2.0 * 3.14159265358979323846;

}  // namespace

TEST_CASE("chi: boundary values, monotonicity, brute-force quadrature") {
    CHECK(chi(0.0, 0.0) == 0.0);
    CHECK(chi(0.0, 3.7) == 0.0);
    CHECK(chi_prime(0.0, 0.0) == 1.0);
    CHECK(chi_prime(0.0, 9.0) == 1.0);
    CHECK_THROWS_AS(chi(-1.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(chi(1.0, -0.5), std::invalid_argument);

    // 1e6-point midpoint rule as the independent oracle
    const double oracle = std::exp(0.5) *
                          test_oracle::midpoint_integral(
                              [](double s) { return std::exp(-0.5 * s * s); }, 0.0,
                              1.0, 1000000);
    CHECK(std::fabs(chi(1.0, 0.0) - oracle) < 1e-9);

    double prev = 0.0;
    for (double t : {0.25, 0.5, 1.0, 2.0}) {
        const double c = chi(t, 1.0);
        CHECK(c > prev);
        prev = c;
    }
}

TEST_CASE("free motion is exact") {
    ParticleSystemState s0;
    s0.positions = {0.0};
    s0.velocities = {1.0};
    s0.masses = {1.0};
    for (Scheme scheme : {Scheme::VelocityVerlet, Scheme::Rk4}) {
        IntegratorConfig cfg;
        cfg.scheme = scheme;
        const Trajectory traj = integrate(zero_potential(1, 1), s0, 1.0, cfg);
        CHECK(traj.states.back().positions[0] == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(traj.states.back().velocities[0] == 1.0);
    }
}

TEST_CASE("harmonic oscillator returns after one period (rk4)") {
    const SemiconvexPotential V = harmonic_potential(1, 1);
    ParticleSystemState s0;
    s0.positions = {1.0};
    s0.velocities = {0.0};
    s0.masses = {1.0};
    const Trajectory traj = integrate(V, s0, kTau, rk4(1e-3));
    CHECK(std::fabs(traj.states.back().positions[0] - 1.0) <= 1e-8);
    CHECK(std::fabs(traj.states.back().velocities[0]) <= 1e-8);
}

TEST_CASE("two lifted particles match the quadratic flow") {
    const InteractionPotential w = quadratic_interaction(1, 1.0);
    const std::vector<double> masses = {0.5, 0.5};
    const SemiconvexPotential V = lift_potential(w, masses);
    ParticleSystemState s0;
    s0.positions = {-1.0, 1.0};
    s0.velocities = {0.5, -0.25};
    s0.masses = masses;
    const Trajectory traj = integrate(V, s0, 2.0, rk4(1e-3));
    QuadraticFlowSpec spec{1.0, {0.0}, {0.125}};
    double err = 0.0;
    for (const auto& st : traj.states)
        for (std::size_t i = 0; i < 2; ++i) {
            const std::vector<double> x{s0.positions[i]}, v{s0.velocities[i]};
            const FlowPoint p = quadratic_flow(x, v, st.time, spec);
            err = std::max(err, std::fabs(p.position[0] - st.positions[i]));
            err = std::max(err, std::fabs(p.velocity[0] - st.velocities[i]));
        }
    CHECK(err <= 1e-6);
}

TEST_CASE("total_energy basics") {
    ParticleSystemState s;
    s.positions = {0.0};
    s.velocities = {3.0};
    s.masses = {2.0};
    CHECK(total_energy(s, zero_potential(1, 1)) == 9.0);
    ParticleSystemState h;
    h.positions = {1.0};
    h.velocities = {0.0};
    h.masses = {1.0};
    CHECK(total_energy(h, harmonic_potential(1, 1)) == 0.5);
}

TEST_CASE("energy drift: rk4 tight, verlet bounded") {
    const SemiconvexPotential V = harmonic_potential(1, 1);
    ParticleSystemState s0;
    s0.positions = {1.0};
    s0.velocities = {0.0};
    s0.masses = {1.0};
    const double e0 = total_energy(s0, V);
    {
        const Trajectory traj = integrate(V, s0, kTau, rk4(1e-3));
        double drift = 0.0;
        for (const auto& st : traj.states)
            drift = std::max(drift, std::fabs(total_energy(st, V) - e0));
        CHECK(drift <= 1e-8);
    }
    {
        IntegratorConfig cfg;  // velocity-verlet default
        const Trajectory traj = integrate(V, s0, kTau, cfg);
        double drift = 0.0;
        for (const auto& st : traj.states)
            drift = std::max(drift, std::fabs(total_energy(st, V) - e0));
        CHECK(drift <= 1e-4);
    }
}

TEST_CASE("velocity-verlet is time reversible") {
    const SemiconvexPotential V = double_well_potential(2, 1);
    ParticleSystemState s0;
    s0.positions = {0.3, -1.2};
    s0.velocities = {0.4, 0.1};
    s0.masses = {1.0, 2.0};
    IntegratorConfig cfg;
    const Trajectory fwd = integrate(V, s0, 1.0, cfg);
    ParticleSystemState turn = fwd.states.back();
    for (double& v : turn.velocities) v = -v;
    const Trajectory bwd = integrate(V, turn, 1.0, cfg);
    const auto& end = bwd.states.back();
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(std::fabs(end.positions[i] - s0.positions[i]) <= 1e-9);
        CHECK(std::fabs(-end.velocities[i] - s0.velocities[i]) <= 1e-9);
    }
}

TEST_CASE("a-priori velocity bound: t = 0 and free motion") {
    const SemiconvexPotential V = harmonic_potential(1, 1);
    ParticleSystemState s0;
    s0.positions = {2.0};
    s0.velocities = {3.0};
    s0.masses = {1.0};
    const VelocityBound b0 = apriori_velocity_bound(s0, V, 0.0);
    // chi'(0) = 1: the bound is m v^2 + |DV|^2/m
    CHECK(b0.pointwise == doctest::Approx(9.0 + 4.0).epsilon(1e-14));
    CHECK(b0.time_integral == 0.0);

    const SemiconvexPotential Z = zero_potential(1, 1);
    for (double t : {0.5, 1.0, 2.0}) {
        const VelocityBound b = apriori_velocity_bound(s0, Z, t);
        CHECK(9.0 <= b.pointwise);  // velocities constant under free motion
    }
}

TEST_CASE("a-priori velocity bound holds along seeded lifted runs") {
    Rng rng(31);
    for (int run = 0; run < 20; ++run) {
        const double kappa = (run % 2 == 0) ? 1.0 : -1.0;
        const std::size_t n = 4 + rng.integer(6);
        std::vector<double> masses(n);
        double msum = 0.0;
        for (auto& m : masses) msum += (m = rng.uniform(0.5, 1.5));
        for (auto& m : masses) m /= msum;
        ParticleSystemState s0;
        s0.masses = masses;
        s0.positions.resize(n);
        s0.velocities.resize(n);
        for (auto& x : s0.positions) x = rng.gaussian();
        for (auto& v : s0.velocities) v = rng.gaussian();
        const SemiconvexPotential V =
            lift_potential(quadratic_interaction(1, kappa), masses);
        const Trajectory traj = integrate(V, s0, 2.0, rk4(1e-3));
        for (const auto& st : traj.states) {
            double mv2 = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                mv2 += st.masses[i] * st.velocities[i] * st.velocities[i];
            const VelocityBound b = apriori_velocity_bound(s0, V, st.time);
            CHECK(mv2 <= b.pointwise * (1.0 + 1e-8) + 1e-8);
        }
    }
}

TEST_CASE("semiconvexity check: convex, exactly semiconvex, and violating") {
    CHECK(check_semiconvexity(harmonic_potential(2, 1), 100, 3).pass);

    SemiconvexPotential neg;  // -|x|^2/2 with modulus 1: exactly semiconvex
    neg.num_particles = 1;
    neg.dim = 2;
    neg.modulus = 1.0;
    neg.value = [](std::span<const double> x) {
        double s = 0.0;
        for (double v : x) s += v * v;
        return -0.5 * s;
    };
    neg.gradient = [](std::span<const double> x, std::span<double> g) {
        for (std::size_t i = 0; i < x.size(); ++i) g[i] = -x[i];
    };
    CHECK(check_semiconvexity(neg, 100, 4).pass);

    SemiconvexPotential bad = neg;  // -|x|^2 declared with modulus 1: fails
    bad.value = [](std::span<const double> x) {
        double s = 0.0;
        for (double v : x) s += v * v;
        return -s;
    };
    bad.gradient = [](std::span<const double> x, std::span<double> g) {
        for (std::size_t i = 0; i < x.size(); ++i) g[i] = -2.0 * x[i];
    };
    const SemiconvexityReport rep = check_semiconvexity(bad, 100, 5);
    CHECK_FALSE(rep.pass);
    CHECK(rep.max_violation > 0.0);
}

TEST_CASE("momentum is conserved for translation-invariant potentials") {
    Rng rng(12);
    const std::size_t n = 6;
    std::vector<double> masses(n, 1.0 / n);
    ParticleSystemState s0;
    s0.masses = masses;
    s0.dim = 2;
    s0.positions.resize(n * 2);
    s0.velocities.resize(n * 2);
    for (auto& x : s0.positions) x = rng.gaussian();
    for (auto& v : s0.velocities) v = rng.gaussian();
    const SemiconvexPotential V =
        lift_potential(cosine_interaction(2, 1.0, 0.3, 1.5), masses);
    REQUIRE(V.translation_invariant);
    const Trajectory traj = integrate(V, s0, 2.0, rk4(1e-3));
    double p0x = 0.0, p0y = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        p0x += masses[i] * s0.velocities[i * 2];
        p0y += masses[i] * s0.velocities[i * 2 + 1];
    }
    for (const auto& st : traj.states) {
        double px = 0.0, py = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            px += masses[i] * st.velocities[i * 2];
            py += masses[i] * st.velocities[i * 2 + 1];
        }
        CHECK(std::fabs(px - p0x) <= 1e-10);
        CHECK(std::fabs(py - p0y) <= 1e-10);
    }
}

TEST_CASE("integrate reports the failing step on blow-up") {
    SemiconvexPotential V;  // inverted quartic: finite-time escape
    V.num_particles = 1;
    V.dim = 1;
    V.value = [](std::span<const double> x) { return -0.25 * std::pow(x[0], 4); };
    V.gradient = [](std::span<const double> x, std::span<double> g) {
        g[0] = -x[0] * x[0] * x[0];
    };
    ParticleSystemState s0;
    s0.positions = {10.0};
    s0.velocities = {10.0};
    s0.masses = {1e-30};
    IntegratorConfig cfg;
    cfg.dt = 0.5;
    try {
        integrate(V, s0, 100.0, cfg);
        FAIL("expected blow-up");
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()).find("step") != std::string::npos);
    }
}

TEST_CASE("degenerate empty systems are rejected") {
    ParticleSystemState empty;
    CHECK_THROWS_AS(integrate(harmonic_potential(1, 1), empty, 1.0, {}),
                    std::invalid_argument);
    CHECK_THROWS_AS(harmonic_potential(0, 1), std::invalid_argument);
}
