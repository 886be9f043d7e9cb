#ifndef SEMIFLOW_NEWTON_HPP
#define SEMIFLOW_NEWTON_HPP

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "semiflow/exec.hpp"

namespace semiflow {

// Potential on (R^d)^N with a one-sided Lipschitz gradient:
// (DV(x)-DV(y)).(x-y) >= -L |x-y|^2 with |.|^2 either the plain squared
// norm or, when mass_weighted is set, sum_i m_i |x_i-y_i|^2.
struct SemiconvexPotential {
    std::size_t num_particles = 0;
    std::size_t dim = 1;
    std::function<double(std::span<const double>)> value;
    std::function<void(std::span<const double>, std::span<double>)> gradient;
    double modulus = 0.0;
    bool mass_weighted = false;
    std::vector<double> masses;  // required when mass_weighted
    bool translation_invariant = false;

    std::size_t dofs() const { return num_particles * dim; }
};

struct ParticleSystemState {
    std::vector<double> positions;   // N*d, row-major per particle
    std::vector<double> velocities;  // N*d
    std::vector<double> masses;      // N, strictly positive
    std::size_t dim = 1;
    double time = 0.0;

    std::size_t count() const { return masses.size(); }
    void validate() const;
};

enum class Scheme { VelocityVerlet, Rk4 };

struct IntegratorConfig {
    double dt = 1e-3;
    Scheme scheme = Scheme::VelocityVerlet;
    std::size_t max_steps = 50000000;
    std::size_t output_stride = 10;
};

Scheme scheme_from_string(const std::string& s);
std::string scheme_to_string(Scheme s);

struct Trajectory {
    std::vector<ParticleSystemState> states;
    double dt = 0.0;
    Scheme scheme = Scheme::VelocityVerlet;
};

// chi(t) = e^{(L+1)t^2/2} int_0^t e^{-(L+1)s^2/2} ds, by adaptive quadrature
// to 1e-12. chi'(t) = 1 + (L+1) t chi(t). Both require t, L >= 0.
double chi(double t, double L);
double chi_prime(double t, double L);

// Per-run cache of chi on a fixed time grid, for the per-step checkers.
class ChiTable {
  public:
    ChiTable(std::span<const double> times, double L);
    double chi_at(std::size_t i) const { return chi_[i]; }
    double chi_prime_at(std::size_t i) const { return chi_prime_[i]; }

  private:
    std::vector<double> chi_, chi_prime_;
};

// Uniform-grid integration of m_i x_i'' = -D_{x_i}V. Deterministic for any
// thread count. Throws std::runtime_error naming the step on non-finite
// states.
Trajectory integrate(const SemiconvexPotential& V, const ParticleSystemState& s0,
                     double T, const IntegratorConfig& cfg);

double total_energy(const ParticleSystemState& s, const SemiconvexPotential& V);

// Right-hand side of the a-priori velocity estimate: `pointwise` bounds
// sum_i m_i |v_i(t)|^2, `time_integral` bounds int_0^t of the same quantity.
struct VelocityBound {
    double pointwise;
    double time_integral;
};
VelocityBound apriori_velocity_bound(const ParticleSystemState& s0,
                                     const SemiconvexPotential& V, double t);

struct SemiconvexityReport {
    double max_violation = 0.0;
    bool pass = true;
    std::size_t samples = 0;
};
SemiconvexityReport check_semiconvexity(const SemiconvexPotential& V,
                                        std::size_t sample_count,
                                        std::uint64_t seed, double tol = 1e-8);

// Built-in potentials. The double well sums x^4/4 - x^2/2 per coordinate and
// is semiconvex with unweighted modulus 1.
SemiconvexPotential harmonic_potential(std::size_t n, std::size_t d);
SemiconvexPotential double_well_potential(std::size_t n, std::size_t d);

// CSV schema: t,i,x1..xd,v1..vd, one row per particle per stored time.
void write_trajectory_csv(const Trajectory& traj, std::ostream& out);
void write_trajectory_csv(const Trajectory& traj, const std::string& path);

}  // namespace semiflow

#endif
