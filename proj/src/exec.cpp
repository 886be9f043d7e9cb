#include "semiflow/exec.hpp"

#include <atomic>
#include <cstdlib>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace semiflow {

namespace {
std::atomic<ExecMode> g_mode{ExecMode::Parallel};
}

void apply_thread_env() {
    const char* env = std::getenv("SEMIFLOW_THREADS");
    if (env == nullptr) return;
    int n = std::atoi(env);
    if (n < 1) return;
#ifdef _OPENMP
    omp_set_num_threads(n);
#endif
}

int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

void set_exec_mode(ExecMode mode) { g_mode.store(mode); }
ExecMode exec_mode() { return g_mode.load(); }

double block_sum(std::span<const double> x, ExecMode mode) {
    return block_sum_fn(x.size(), [&](std::size_t i) { return x[i]; }, mode);
}

}  // namespace semiflow
