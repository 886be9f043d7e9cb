// Timing comparison of the serial reference kernels against the OpenMP
// variants. Both produce bit-identical results; this target only reports
// wall time.

#include <chrono>
#include <cstdio>
#include <span>
#include <vector>

#include "semiflow/exec.hpp"
#include "semiflow/galerkin.hpp"
#include "semiflow/jeans_vlasov.hpp"
#include "semiflow/rng.hpp"

using namespace semiflow;
namespace chrono = std::chrono;

namespace {

double time_ms(const std::function<void()>& body, int reps) {
    const auto t0 = chrono::steady_clock::now();
    for (int r = 0; r < reps; ++r) body();
    const auto t1 = chrono::steady_clock::now();
    return chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

void report(const char* name, double serial_ms, double parallel_ms) {
    std::printf("%-28s serial %9.3f ms   parallel %9.3f ms   speedup %.2fx\n",
                name, serial_ms, parallel_ms, serial_ms / parallel_ms);
}

}  // namespace

int main() {
    apply_thread_env();
    std::printf("threads: %d\n", max_threads());

    Rng rng(1);

    {
        const std::size_t n = 1 << 22;
        std::vector<double> x(n);
        for (auto& v : x) v = rng.uniform();
        volatile double sink = 0.0;
        const double s = time_ms([&] { sink = block_sum(x, ExecMode::Serial); }, 5);
        const double p = time_ms([&] { sink = block_sum(x, ExecMode::Parallel); }, 5);
        (void)sink;
        report("block_sum (4M)", s, p);
    }

    {
        const std::size_t n = 2048, d = 2;
        std::vector<double> pos(n * d), mass(n, 1.0 / n), acc(n * d);
        for (auto& v : pos) v = rng.gaussian();
        const InteractionPotential w = quadratic_interaction(d, 1.0);
        auto dw = [&](std::span<const double> z, std::span<double> g) { w.dw(z, g); };
        const double s = time_ms(
            [&] { pairwise_accel(n, d, pos.data(), mass.data(), dw, acc.data(),
                                 ExecMode::Serial); },
            3);
        const double p = time_ms(
            [&] { pairwise_accel(n, d, pos.data(), mass.data(), dw, acc.data(),
                                 ExecMode::Parallel); },
            3);
        report("pairwise_accel (N=2048)", s, p);
    }

    {
        const Box box{{1.0}};
        const EigenBasis basis = build_basis(box, 32);
        const StoredEnergy F = cosine_energy(1, 0.5, {2.0});
        std::vector<double> y = rng.gaussian_vec(basis.mode_count());
        const double s = time_ms(
            [&] { discrete_potential(y, basis, F, ExecMode::Serial); }, 20);
        const double p = time_ms(
            [&] { discrete_potential(y, basis, F, ExecMode::Parallel); }, 20);
        report("discrete_potential (m=32)", s, p);
    }
    return 0;
}
