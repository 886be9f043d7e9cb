#include "semiflow/oracles.hpp"

#include <cmath>
#include <stdexcept>

namespace semiflow {

FlowPoint quadratic_flow(std::span<const double> x, std::span<const double> v,
                         double t, const QuadraticFlowSpec& spec) {
    if (t < 0.0) throw std::invalid_argument("quadratic_flow: t must be >= 0");
    const std::size_t d = x.size();
    if (v.size() != d || spec.mean_x.size() != d || spec.mean_v.size() != d)
        throw std::invalid_argument("quadratic_flow: dimension mismatch");
    FlowPoint out;
    out.position.resize(d);
    out.velocity.resize(d);
    for (std::size_t c = 0; c < d; ++c) {
        const double xc = x[c] - spec.mean_x[c];
        const double vc = v[c] - spec.mean_v[c];
        const double drift = spec.mean_x[c] + t * spec.mean_v[c];
        if (spec.kappa > 0.0) {
            const double w = std::sqrt(spec.kappa);
            out.position[c] = xc * std::cos(w * t) + vc * std::sin(w * t) / w + drift;
            out.velocity[c] =
                -xc * w * std::sin(w * t) + vc * std::cos(w * t) + spec.mean_v[c];
        } else if (spec.kappa < 0.0) {
            // hyperbolic branch: sqrt(-kappa) in both the argument and the
            // sinh prefactor (forced by the ODE d2X/dt2 = -kappa (X - mean))
            const double w = std::sqrt(-spec.kappa);
            out.position[c] = xc * std::cosh(w * t) + vc * std::sinh(w * t) / w + drift;
            out.velocity[c] =
                xc * w * std::sinh(w * t) + vc * std::cosh(w * t) + spec.mean_v[c];
        } else {
            out.position[c] = x[c] + t * v[c];
            out.velocity[c] = v[c];
        }
    }
    return out;
}

ModeValue damped_mode(double g, double h, double lambda, double t, double mu) {
    if (!(lambda > 0.0))
        throw std::invalid_argument("damped_mode: lambda must be positive");
    if (mu < 0.0) throw std::invalid_argument("damped_mode: mu must be >= 0");
    if (mu == 0.0) {
        const double w = std::sqrt(lambda);
        return {g * std::cos(w * t) + h * std::sin(w * t) / w,
                -g * w * std::sin(w * t) + h * std::cos(w * t)};
    }
    const double ml = mu * lambda;
    const double disc = ml * ml - 4.0 * lambda;
    if (std::fabs(disc) <= 1e-12 * ml * ml) {
        // critically damped: double root r = -mu lambda / 2
        const double r = -0.5 * ml;
        const double B = h - r * g;
        const double e = std::exp(r * t);
        return {(g + B * t) * e, (B * (1.0 + r * t) + r * g) * e};
    }
    if (disc < 0.0) {
        const double sigma = 0.5 * ml;
        const double w = std::sqrt(lambda - sigma * sigma);
        const double C = g;
        const double S = (h + sigma * g) / w;
        const double e = std::exp(-sigma * t);
        const double cs = std::cos(w * t), sn = std::sin(w * t);
        return {e * (C * cs + S * sn),
                e * ((S * w - sigma * C) * cs - (C * w + sigma * S) * sn)};
    }
    // overdamped; r2 is the large-magnitude root, r1 = lambda / r2 avoids
    // cancellation
    const double r2 = 0.5 * (-ml - std::sqrt(disc));
    const double r1 = lambda / r2;
    const double c1 = (h - r2 * g) / (r1 - r2);
    const double c2 = g - c1;
    return {c1 * std::exp(r1 * t) + c2 * std::exp(r2 * t),
            c1 * r1 * std::exp(r1 * t) + c2 * r2 * std::exp(r2 * t)};
}

ModeSolution linear_wave_modes(std::span<const double> g, std::span<const double> h,
                               std::span<const double> lambdas, std::size_t d,
                               double t, double mu) {
    const std::size_t m = lambdas.size();
    if (g.size() != m * d || h.size() != m * d)
        throw std::invalid_argument("linear_wave_modes: coefficient size mismatch");
    ModeSolution out;
    out.a.resize(m * d);
    out.adot.resize(m * d);
    for (std::size_t j = 0; j < m; ++j)
        for (std::size_t c = 0; c < d; ++c) {
            const ModeValue v =
                damped_mode(g[j * d + c], h[j * d + c], lambdas[j], t, mu);
            out.a[j * d + c] = v.a;
            out.adot[j * d + c] = v.adot;
        }
    return out;
}

}  // namespace semiflow
