#ifndef SEMIFLOW_GALERKIN_HPP
#define SEMIFLOW_GALERKIN_HPP

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "semiflow/exec.hpp"
#include "semiflow/newton.hpp"

namespace semiflow {

// Stored energy density on d x d matrices (flattened row-major), with the
// one-sided monotonicity modulus L (F + (L/2)|A|^2 convex, |A| Frobenius),
// two-sided coercivity constant c and gradient growth constant C.
struct StoredEnergy {
    std::size_t dim = 1;
    std::function<double(std::span<const double>)> f;
    std::function<void(std::span<const double>, std::span<double>)> df;
    double andrews_ball_modulus = 1.0;
    double coercivity = 0.5;
    double growth = 1.0;
    std::string family = "custom";
    double alpha = 0.0;
    std::vector<double> b_matrix;
};

StoredEnergy linear_energy(std::size_t d);  // F = |A|^2 / 2
// F(A) = |A|^2/2 + alpha cos(B . A); Andrews-Ball modulus
// max(0, alpha |B|^2 - 1), coercive for alpha <= 1/2.
StoredEnergy cosine_energy(std::size_t d, double alpha, std::vector<double> B);

struct StoredEnergyReport {
    double coercivity_violation = 0.0;
    double monotonicity_violation = 0.0;
    double growth_violation = 0.0;
    bool pass = false;
};
StoredEnergyReport validate_stored_energy(const StoredEnergy& F,
                                          std::size_t samples,
                                          std::uint64_t seed);

struct Box {
    std::vector<double> lengths;  // (0,l_1) x ... x (0,l_d)
    std::size_t dim() const { return lengths.size(); }
    double volume() const;
};

// Dirichlet eigenbasis of the Laplacian on a box: sine products with
// lambda_k = pi^2 sum (k_i/l_i)^2, tabulated on a tensor Gauss-Legendre grid.
// Modes are ordered by (lambda, lexicographic index).
struct EigenBasis {
    Box domain;
    std::vector<std::vector<int>> modes;
    std::vector<double> lambdas;
    int quad_order = 0;
    std::size_t node_count = 0;
    std::vector<double> nodes;    // node_count * dim
    std::vector<double> weights;  // node_count
    std::vector<double> phi;      // [mode * node_count + node]
    std::vector<double> dphi;     // [(mode * node_count + node) * dim + c]

    std::size_t mode_count() const { return modes.size(); }
    double phi_value(std::size_t mode, std::size_t node) const {
        return phi[mode * node_count + node];
    }
    const double* dphi_value(std::size_t mode, std::size_t node) const {
        return &dphi[(mode * node_count + node) * domain.dim()];
    }
    double eval_phi(std::size_t mode, std::span<const double> x) const;
    void eval_dphi(std::size_t mode, std::span<const double> x,
                   std::span<double> out) const;
};

// quad_order 0 selects the default 2*cutoff + 12, the smallest order that
// keeps the orthonormality defects below 1e-10 / 1e-8 across cutoffs.
EigenBasis build_basis(const Box& domain, int mode_cutoff, int quad_order = 0);

struct BasisOrthonormality {
    double mass_defect = 0.0;       // max |int phi_j phi_k - delta_jk|
    double stiffness_defect = 0.0;  // max |int Dphi_j.Dphi_k - lambda_j delta_jk|
};
BasisOrthonormality basis_orthonormality(const EigenBasis& basis);

using VectorField = std::function<void(std::span<const double>, std::span<double>)>;

struct FieldProjection {
    std::vector<double> coeffs;  // mode-major, d components per mode
    double residual_l2;          // ||field - sum coeffs phi||_L2 on the grid
};
FieldProjection project_initial(const VectorField& field, const EigenBasis& basis,
                                std::size_t d);

// V(y) = int_U F(sum_j y_j (x) Dphi_j) dx and its gradient, by quadrature.
// The reported modulus is L * lambda_max.
struct DiscretePotential {
    double value;
    std::vector<double> gradient;
    double modulus;
};
DiscretePotential discrete_potential(std::span<const double> coeffs,
                                     const EigenBasis& basis,
                                     const StoredEnergy& F,
                                     ExecMode mode);

// Wraps the discrete potential as a Newton-system potential on the mode
// coefficients (unit masses).
SemiconvexPotential galerkin_potential(const EigenBasis& basis,
                                       const StoredEnergy& F);

struct GalerkinState {
    std::vector<double> a, adot;  // mode-major, d components per mode
    double time = 0.0;
};

struct GalerkinSeries {
    std::vector<GalerkinState> states;
    std::vector<double> dissipation;  // mu int_0^t sum lambda_j |adot_j|^2,
                                      // per stored state
    double mu = 0.0;
    double dt = 0.0;
    std::size_t dim = 1;
};

// Mode ODE a_j'' = -D_{y_j}V - mu lambda_j a_j'; velocity-verlet when mu=0,
// rk4 otherwise. The dissipation integral rides along as an extra rk4 state.
GalerkinSeries evolve_galerkin(std::span<const double> g,
                               std::span<const double> h,
                               const StoredEnergy& F, const EigenBasis& basis,
                               double T, const IntegratorConfig& cfg, double mu);

struct EnergyLedger {
    std::vector<double> times, energy, dissipation, identity_residual;
    double max_drift_rel = 0.0;       // undamped: max |E - E0| / max(1,|E0|)
    double max_identity_residual = 0.0;  // damped: max |E + D - E0|
};
EnergyLedger energy_report(const GalerkinSeries& series, const StoredEnergy& F,
                           const EigenBasis& basis);

struct CellDecomposition {
    int space_cells = 2;  // per axis
    int time_cells = 2;
};

// Space-time histogram of the gradient field: the empirical stand-in for
// the gradient Young measure of the run.
struct YoungHistogram {
    std::vector<double> value_lo, value_hi;  // bin box per matrix entry
    int bins_per_entry = 32;
    struct Cell {
        std::vector<double> x_lo, x_hi;
        double t_lo, t_hi;
        std::vector<double> weights;  // normalized, bins_per_entry^(d*d)
        std::vector<double> mean;     // d*d, direct weighted average
        std::vector<double> binned_mean;  // from bin centers
    };
    std::vector<Cell> cells;
    double second_moment = 0.0;        // global int |A|^2 d eta
    double second_moment_bound = 0.0;  // 1 + E(0)/(c |U|)
    double bin_width(std::size_t entry) const {
        return (value_hi[entry] - value_lo[entry]) / bins_per_entry;
    }
};
YoungHistogram young_histogram(const GalerkinSeries& series,
                               const EigenBasis& basis, const StoredEnergy& F,
                               const CellDecomposition& cells,
                               int bins_per_entry);
std::string young_histogram_json(const YoungHistogram& h);

// L2 space-time distance of the gradient fields of two runs sharing domain,
// energy, damping, T and time grid. Evaluated on a fresh tensor rule of the
// given order.
double cauchy_gradient_check(const GalerkinSeries& run_small,
                             const EigenBasis& basis_small,
                             const GalerkinSeries& run_large,
                             const EigenBasis& basis_large,
                             int common_quad_order);

// CSV schema: t,mode,component,a,adot.
void write_modes_csv(const GalerkinSeries& series, std::ostream& out);
void write_modes_csv(const GalerkinSeries& series, const std::string& path);

}  // namespace semiflow

#endif
