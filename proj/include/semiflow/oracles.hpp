#ifndef SEMIFLOW_ORACLES_HPP
#define SEMIFLOW_ORACLES_HPP

#include <span>
#include <vector>

namespace semiflow {

// Closed-form flow for the quadratic interaction W(z) = (kappa/2)|z|^2.
// mean_x and mean_v are the initial mass-weighted means; the center of mass
// travels linearly and each point oscillates (kappa>0), diverges (kappa<0)
// or drifts (kappa=0) around it.
struct QuadraticFlowSpec {
    double kappa = 0.0;
    std::vector<double> mean_x, mean_v;
};

struct FlowPoint {
    std::vector<double> position, velocity;
};

FlowPoint quadratic_flow(std::span<const double> x, std::span<const double> v,
                         double t, const QuadraticFlowSpec& spec);

// Exact solution of a'' = -lambda a - mu lambda a' with a(0)=g, a'(0)=h.
struct ModeValue {
    double a, adot;
};
ModeValue damped_mode(double g, double h, double lambda, double t, double mu);

// Vector version: one R^d coefficient per mode; g,h flattened mode-major.
struct ModeSolution {
    std::vector<double> a, adot;
};
ModeSolution linear_wave_modes(std::span<const double> g, std::span<const double> h,
                               std::span<const double> lambdas, std::size_t d,
                               double t, double mu);

}  // namespace semiflow

#endif
