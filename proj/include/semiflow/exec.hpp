#ifndef SEMIFLOW_EXEC_HPP
#define SEMIFLOW_EXEC_HPP

#include <cstddef>
#include <span>
#include <vector>

namespace semiflow {

// Every data-parallel kernel comes in two variants: Serial is the reference
// path, Parallel runs the same arithmetic under OpenMP. Reductions are
// blocked with a fixed block size and the block partials are combined in
// ascending block order, so both variants produce bit-identical results for
// any thread count.
enum class ExecMode { Serial, Parallel };

inline constexpr std::size_t kSumBlock = 1024;

// Reads SEMIFLOW_THREADS and, if set, forwards it to the OpenMP runtime.
void apply_thread_env();
int max_threads();

void set_exec_mode(ExecMode mode);
ExecMode exec_mode();

double block_sum(std::span<const double> x, ExecMode mode);

// Blocked sum of f(i) for i in [0,n).
template <class F>
double block_sum_fn(std::size_t n, F&& f, ExecMode mode) {
    if (n == 0) return 0.0;
    const std::size_t nblocks = (n + kSumBlock - 1) / kSumBlock;
    auto partial = [&](std::size_t b) {
        const std::size_t lo = b * kSumBlock;
        const std::size_t hi = lo + kSumBlock < n ? lo + kSumBlock : n;
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) s += f(i);
        return s;
    };
    if (nblocks == 1) return partial(0);
    std::vector<double> sums(nblocks);
    if (mode == ExecMode::Parallel) {
#pragma omp parallel for schedule(static)
        for (std::size_t b = 0; b < nblocks; ++b) sums[b] = partial(b);
    } else {
        for (std::size_t b = 0; b < nblocks; ++b) sums[b] = partial(b);
    }
    double total = 0.0;
    for (double s : sums) total += s;
    return total;
}

// accel[i] = -sum_j mass[j] * dw(pos_i - pos_j) with the inner sum in
// ascending j, one independent output row per i. dw writes d components.
template <class DW>
void pairwise_accel(std::size_t n, std::size_t d, const double* pos,
                    const double* mass, DW&& dw, double* accel,
                    ExecMode mode) {
    auto row = [&](std::size_t i) {
        std::vector<double> z(d), g(d), acc(d, 0.0);
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;  // DW(0) = 0 for even C1 potentials
            for (std::size_t c = 0; c < d; ++c) z[c] = pos[i * d + c] - pos[j * d + c];
            dw(std::span<const double>(z), std::span<double>(g));
            for (std::size_t c = 0; c < d; ++c) acc[c] -= mass[j] * g[c];
        }
        for (std::size_t c = 0; c < d; ++c) accel[i * d + c] = acc[c];
    };
    if (mode == ExecMode::Parallel) {
#pragma omp parallel for schedule(static)
        for (std::size_t i = 0; i < n; ++i) row(i);
    } else {
        for (std::size_t i = 0; i < n; ++i) row(i);
    }
}

}  // namespace semiflow

#endif
