#include "doctest.h"

#include <cmath>

#include "semiflow/exec.hpp"
#include "semiflow/jeans_vlasov.hpp"
#include "semiflow/quadrature.hpp"
#include "semiflow/rng.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace semiflow;

TEST_CASE("block_sum: serial and parallel agree bitwise") {
    Rng rng(42);
    std::vector<double> x(100000);
    for (auto& v : x) v = rng.gaussian();
    const double serial = block_sum(x, ExecMode::Serial);
    const double parallel = block_sum(x, ExecMode::Parallel);
    CHECK(serial == parallel);

#ifdef _OPENMP
    const int saved = omp_get_max_threads();
    for (int threads : {1, 2, 3, 7}) {
        omp_set_num_threads(threads);
        CHECK(block_sum(x, ExecMode::Parallel) == serial);
    }
    omp_set_num_threads(saved);
#endif
}

TEST_CASE("block_sum matches a plain accumulation to rounding") {
    Rng rng(7);
    std::vector<double> x(5000);
    double naive = 0.0;
    for (auto& v : x) naive += (v = rng.uniform());
    CHECK(block_sum(x, ExecMode::Serial) ==
          doctest::Approx(naive).epsilon(1e-13));
}

TEST_CASE("pairwise_accel: serial and parallel agree bitwise across thread counts") {
    Rng rng(3);
    const std::size_t n = 65, d = 2;
    std::vector<double> pos(n * d), mass(n), serial(n * d), parallel(n * d);
    for (auto& v : pos) v = rng.gaussian();
    double msum = 0.0;
    for (auto& m : mass) msum += (m = rng.uniform(0.5, 1.5));
    for (auto& m : mass) m /= msum;
    const InteractionPotential w = quadratic_interaction(d, 1.3);
    auto dw = [&](std::span<const double> z, std::span<double> g) { w.dw(z, g); };

    pairwise_accel(n, d, pos.data(), mass.data(), dw, serial.data(), ExecMode::Serial);
    pairwise_accel(n, d, pos.data(), mass.data(), dw, parallel.data(),
                   ExecMode::Parallel);
    for (std::size_t i = 0; i < n * d; ++i) CHECK(serial[i] == parallel[i]);

#ifdef _OPENMP
    const int saved = omp_get_max_threads();
    omp_set_num_threads(4);
    pairwise_accel(n, d, pos.data(), mass.data(), dw, parallel.data(),
                   ExecMode::Parallel);
    omp_set_num_threads(saved);
    for (std::size_t i = 0; i < n * d; ++i) CHECK(serial[i] == parallel[i]);
#endif
}

TEST_CASE("pairwise_accel: total force vanishes for an even potential") {
    Rng rng(9);
    const std::size_t n = 20, d = 1;
    std::vector<double> pos(n), mass(n, 1.0 / n), acc(n);
    for (auto& v : pos) v = rng.gaussian();
    const InteractionPotential w = cosine_interaction(1, 0.5, 0.3, 2.0);
    pairwise_accel(
        n, d, pos.data(), mass.data(),
        [&](std::span<const double> z, std::span<double> g) { w.dw(z, g); },
        acc.data(), ExecMode::Serial);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += mass[i] * acc[i];
    CHECK(std::fabs(total) < 1e-14);
}

TEST_CASE("integrate_adaptive hits analytic integrals at 1e-12") {
    const double e1 = integrate_adaptive([](double x) { return std::exp(x); }, 0.0, 1.0);
    CHECK(std::fabs(e1 - (std::exp(1.0) - 1.0)) < 1e-12);
    const double s = integrate_adaptive([](double x) { return std::sin(10.0 * x); },
                                        0.0, 3.0);
    CHECK(std::fabs(s - (1.0 - std::cos(30.0)) / 10.0) < 1e-12);
}

TEST_CASE("gauss_legendre integrates polynomials of degree 2n-1 exactly") {
    std::vector<double> nodes, weights;
    gauss_legendre(5, 0.0, 2.0, nodes, weights);
    double s = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i)
        s += weights[i] * std::pow(nodes[i], 9);
    CHECK(s == doctest::Approx(std::pow(2.0, 10) / 10.0).epsilon(1e-13));
    CHECK_THROWS_AS(gauss_legendre(0, 0.0, 1.0, nodes, weights),
                    std::invalid_argument);
}
