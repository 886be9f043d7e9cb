#ifndef SEMIFLOW_RNG_HPP
#define SEMIFLOW_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace semiflow {

// Seeded random source. Samples are derived from the raw mt19937_64 stream
// with fixed arithmetic (no std::*_distribution), so a seed pins every value
// bit-for-bit across standard library implementations.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    // uniform in [0,1)
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // standard normal, Box-Muller
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    std::vector<double> gaussian_vec(std::size_t n) {
        std::vector<double> out(n);
        for (auto& x : out) x = gaussian();
        return out;
    }

    // uniform integer in [0, n)
    std::uint64_t integer(std::uint64_t n) { return gen_() % n; }

  private:
    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace semiflow

#endif
