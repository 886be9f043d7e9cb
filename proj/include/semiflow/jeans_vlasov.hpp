#ifndef SEMIFLOW_JEANS_VLASOV_HPP
#define SEMIFLOW_JEANS_VLASOV_HPP

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "semiflow/measures.hpp"
#include "semiflow/newton.hpp"

namespace semiflow {

// Even C^1 pairwise potential with a semiconvexity modulus L
// (W + (L/2)|z|^2 convex) and linear gradient growth |DW(z)| <= C(1+|z|).
struct InteractionPotential {
    std::size_t dim = 1;
    std::function<double(std::span<const double>)> w;
    std::function<void(std::span<const double>, std::span<double>)> dw;
    double modulus = 0.0;
    double growth = 0.0;
    std::string family = "custom";
    double kappa = 0.0, alpha = 0.0, beta = 0.0;
};

InteractionPotential free_interaction(std::size_t dim);
// W(z) = (kappa/2)|z|^2; declared modulus |kappa| (valid for either sign).
InteractionPotential quadratic_interaction(std::size_t dim, double kappa);
// W(z) = (kappa/2)|z|^2 + alpha cos(beta . z) with a fixed direction beta
// (scalar here, applied to the first coordinate for dim > 1).
InteractionPotential cosine_interaction(std::size_t dim, double kappa,
                                        double alpha, double beta);

struct InteractionReport {
    double evenness = 0.0;       // max |W(-z) - W(z)|
    double gradient_origin = 0.0;  // |DW(0)|
    double growth_excess = 0.0;  // max |DW(z)| - C(1+|z|)
    bool pass = false;
};
InteractionReport validate_interaction(const InteractionPotential& w,
                                       std::size_t samples, std::uint64_t seed);

// Empirical measure on phase space R^d x R^d, points (x_i, v_i), weights m_i.
struct PhaseMeasure {
    EmpiricalMeasure measure;  // on R^{2d}
    std::size_t dim;           // spatial dimension d
    double time = 0.0;

    PhaseMeasure(EmpiricalMeasure m, std::size_t d, double t = 0.0);
    std::size_t count() const { return measure.size(); }
    std::span<const double> x(std::size_t i) const { return measure.point(i).subspan(0, dim); }
    std::span<const double> v(std::size_t i) const { return measure.point(i).subspan(dim, dim); }
    double mass(std::size_t i) const { return measure.weight(i); }
    EmpiricalMeasure spatial_marginal() const;
    EmpiricalMeasure velocity_marginal() const;
};

// V(x) = (1/2) sum_{ij} m_i m_j W(x_i - x_j). Mass-weighted modulus equals
// the modulus of W; requires the masses to sum to 1 within 1e-12.
SemiconvexPotential lift_potential(const InteractionPotential& w,
                                   std::vector<double> masses);

struct VlasovSeries {
    std::vector<PhaseMeasure> snapshots;
    InteractionPotential w;
    IntegratorConfig config;
    std::size_t dim = 1;
    const PhaseMeasure& at_time(double t) const;  // exact stored time only
};

VlasovSeries simulate(const PhaseMeasure& f0, const InteractionPotential& w,
                      double T, const IntegratorConfig& cfg);

// C^1 test function on phase space with both gradients.
struct PhaseTestFunction {
    std::function<double(std::span<const double>, std::span<const double>)> psi;
    std::function<void(std::span<const double>, std::span<const double>, std::span<double>)> dx;
    std::function<void(std::span<const double>, std::span<const double>, std::span<double>)> dv;
};

// | int psi df_t - int psi df_0 - int_0^t int (v . Dx psi - (DW*rho_s) . Dv
// psi) df_s ds | with the time integral by the trapezoid rule on the stored
// snapshot grid. t must be a stored snapshot time.
double weak_residual(const VlasovSeries& series, const PhaseTestFunction& psi,
                     double t);

struct MomentBoundReport {
    double max_velocity_violation = 0.0;  // relative, floor 1
    double max_position_violation = 0.0;
    bool pass = true;
};
// Checks the kinetic and position moment estimates at every stored time.
MomentBoundReport moment_bounds_check(const VlasovSeries& series);

struct DistributionSpec {
    enum class Kind { Gaussian, UniformBox, Points };
    Kind kind = Kind::Gaussian;
    // Gaussian: per-coordinate mean/sigma over the 2d phase coordinates.
    std::vector<double> mean, sigma;
    // UniformBox: per-coordinate bounds over the 2d phase coordinates.
    std::vector<double> lo, hi;
    // Points: explicit support (R^{2d}) with weights.
    std::vector<std::vector<double>> points;
    std::vector<double> weights;
};

// Draws n equal-weight samples (Points returns the list as given).
PhaseMeasure sample_initial(const DistributionSpec& spec, std::size_t n,
                            std::uint64_t seed, std::size_t dim);

}  // namespace semiflow

#endif
