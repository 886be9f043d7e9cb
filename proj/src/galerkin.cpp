#include "semiflow/galerkin.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "semiflow/csvio.hpp"
#include "semiflow/quadrature.hpp"
#include "semiflow/rng.hpp"

#include "json.hpp"

namespace semiflow {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

StoredEnergy linear_energy(std::size_t d) {
    StoredEnergy F;
    F.dim = d;
    F.family = "linear";
    F.andrews_ball_modulus = 1.0;  // any positive modulus is valid for a convex F
    F.coercivity = 0.5;
    F.growth = 1.0;
    F.f = [](std::span<const double> a) {
        double s = 0.0;
        for (double v : a) s += v * v;
        return 0.5 * s;
    };
    F.df = [](std::span<const double> a, std::span<double> g) {
        for (std::size_t i = 0; i < a.size(); ++i) g[i] = a[i];
    };
    return F;
}

StoredEnergy cosine_energy(std::size_t d, double alpha, std::vector<double> B) {
    if (B.size() != d * d)
        throw std::invalid_argument("cosine_energy: B must be a d x d matrix");
    if (!(alpha >= 0.0) || alpha > 0.5)
        throw std::invalid_argument(
            "cosine_energy: alpha must lie in [0, 1/2] to keep F coercive");
    double b2 = 0.0;
    for (double v : B) b2 += v * v;
    StoredEnergy F;
    F.dim = d;
    F.family = "cosine";
    F.alpha = alpha;
    F.b_matrix = B;
    F.andrews_ball_modulus = std::max(alpha * b2 - 1.0, 1e-6);
    F.coercivity = std::max(alpha, 0.01);
    F.growth = 1.0 + alpha * std::sqrt(b2);
    F.f = [alpha, B](std::span<const double> a) {
        double s = 0.0, ba = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            s += a[i] * a[i];
            ba += B[i] * a[i];
        }
        return 0.5 * s + alpha * std::cos(ba);
    };
    F.df = [alpha, B](std::span<const double> a, std::span<double> g) {
        double ba = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) ba += B[i] * a[i];
        const double sn = alpha * std::sin(ba);
        for (std::size_t i = 0; i < a.size(); ++i) g[i] = a[i] - sn * B[i];
    };
    return F;
}

StoredEnergyReport validate_stored_energy(const StoredEnergy& F,
                                          std::size_t samples,
                                          std::uint64_t seed) {
    Rng rng(seed);
    const std::size_t nn = F.dim * F.dim;
    std::vector<double> ga(nn), gb(nn);
    StoredEnergyReport rep;
    for (std::size_t k = 0; k < samples; ++k) {
        std::vector<double> a = rng.gaussian_vec(nn);
        std::vector<double> b = rng.gaussian_vec(nn);
        for (double& v : a) v *= 2.0;
        for (double& v : b) v *= 2.0;
        double a2 = 0.0;
        for (double v : a) a2 += v * v;
        const double fa = F.f(a);
        rep.coercivity_violation =
            std::max(rep.coercivity_violation, F.coercivity * (a2 - 1.0) - fa);
        rep.coercivity_violation = std::max(
            rep.coercivity_violation, fa - (a2 + 1.0) / F.coercivity);
        F.df(a, std::span<double>(ga));
        F.df(b, std::span<double>(gb));
        double inner = 0.0, dist2 = 0.0, gnorm2 = 0.0;
        for (std::size_t i = 0; i < nn; ++i) {
            const double dx = a[i] - b[i];
            inner += (ga[i] - gb[i]) * dx;
            dist2 += dx * dx;
            gnorm2 += ga[i] * ga[i];
        }
        rep.monotonicity_violation =
            std::max(rep.monotonicity_violation,
                     -(inner + F.andrews_ball_modulus * dist2));
        rep.growth_violation =
            std::max(rep.growth_violation,
                     std::sqrt(gnorm2) - F.growth * (std::sqrt(a2) + 1.0));
    }
    rep.pass = rep.coercivity_violation <= 1e-8 &&
               rep.monotonicity_violation <= 1e-8 && rep.growth_violation <= 1e-8;
    return rep;
}

double Box::volume() const {
    double v = 1.0;
    for (double l : lengths) v *= l;
    return v;
}

EigenBasis build_basis(const Box& domain, int mode_cutoff, int quad_order) {
    const std::size_t d = domain.dim();
    if (d == 0) throw std::invalid_argument("build_basis: empty domain");
    for (double l : domain.lengths)
        if (!(l > 0.0)) throw std::invalid_argument("build_basis: degenerate box");
    if (mode_cutoff < 1)
        throw std::invalid_argument("build_basis: mode_cutoff must be >= 1");
    if (quad_order == 0) quad_order = 2 * mode_cutoff + 12;
    if (quad_order < mode_cutoff + 2)
        throw std::invalid_argument("build_basis: quad_order must be >= cutoff + 2");

    EigenBasis basis;
    basis.domain = domain;
    basis.quad_order = quad_order;

    // all multi-indices in {1..cutoff}^d, sorted by (lambda, lex)
    std::vector<int> idx(d, 1);
    while (true) {
        basis.modes.push_back(idx);
        std::size_t c = d;
        while (c > 0) {
            --c;
            if (++idx[c] <= mode_cutoff) break;
            idx[c] = 1;
            if (c == 0) {
                idx.clear();
                break;
            }
        }
        if (idx.empty()) break;
    }
    auto lambda_of = [&](const std::vector<int>& k) {
        double s = 0.0;
        for (std::size_t c = 0; c < d; ++c) {
            const double r = k[c] / domain.lengths[c];
            s += r * r;
        }
        return kPi * kPi * s;
    };
    std::sort(basis.modes.begin(), basis.modes.end(),
              [&](const std::vector<int>& a, const std::vector<int>& b) {
                  const double la = lambda_of(a), lb = lambda_of(b);
                  if (la != lb) return la < lb;
                  return a < b;
              });
    for (const auto& k : basis.modes) basis.lambdas.push_back(lambda_of(k));

    // tensor Gauss-Legendre grid
    std::vector<std::vector<double>> axis_nodes(d), axis_weights(d);
    for (std::size_t c = 0; c < d; ++c)
        gauss_legendre(quad_order, 0.0, domain.lengths[c], axis_nodes[c],
                       axis_weights[c]);
    std::size_t total = 1;
    for (std::size_t c = 0; c < d; ++c) total *= quad_order;
    basis.node_count = total;
    basis.nodes.resize(total * d);
    basis.weights.resize(total);
    for (std::size_t q = 0; q < total; ++q) {
        std::size_t rem = q;
        double w = 1.0;
        for (std::size_t c = d; c-- > 0;) {
            const std::size_t j = rem % quad_order;
            rem /= quad_order;
            basis.nodes[q * d + c] = axis_nodes[c][j];
            w *= axis_weights[c][j];
        }
        basis.weights[q] = w;
    }

    const std::size_t m = basis.mode_count();
    basis.phi.resize(m * total);
    basis.dphi.resize(m * total * d);
    for (std::size_t j = 0; j < m; ++j)
        for (std::size_t q = 0; q < total; ++q) {
            basis.phi[j * total + q] =
                basis.eval_phi(j, std::span<const double>(&basis.nodes[q * d], d));
            basis.eval_dphi(j, std::span<const double>(&basis.nodes[q * d], d),
                            std::span<double>(&basis.dphi[(j * total + q) * d], d));
        }
    return basis;
}

double EigenBasis::eval_phi(std::size_t mode, std::span<const double> x) const {
    const std::size_t d = domain.dim();
    double v = 1.0;
    for (std::size_t c = 0; c < d; ++c) {
        const double l = domain.lengths[c];
        v *= std::sqrt(2.0 / l) * std::sin(modes[mode][c] * kPi * x[c] / l);
    }
    return v;
}

void EigenBasis::eval_dphi(std::size_t mode, std::span<const double> x,
                           std::span<double> out) const {
    const std::size_t d = domain.dim();
    for (std::size_t a = 0; a < d; ++a) {
        double v = 1.0;
        for (std::size_t c = 0; c < d; ++c) {
            const double l = domain.lengths[c];
            const double arg = modes[mode][c] * kPi * x[c] / l;
            if (c == a)
                v *= std::sqrt(2.0 / l) * (modes[mode][c] * kPi / l) * std::cos(arg);
            else
                v *= std::sqrt(2.0 / l) * std::sin(arg);
        }
        out[a] = v;
    }
}

BasisOrthonormality basis_orthonormality(const EigenBasis& basis) {
    BasisOrthonormality rep;
    const std::size_t m = basis.mode_count();
    const std::size_t d = basis.domain.dim();
    for (std::size_t j = 0; j < m; ++j)
        for (std::size_t k = j; k < m; ++k) {
            double mass = 0.0, stiff = 0.0;
            for (std::size_t q = 0; q < basis.node_count; ++q) {
                mass += basis.weights[q] * basis.phi_value(j, q) * basis.phi_value(k, q);
                const double* dj = basis.dphi_value(j, q);
                const double* dk = basis.dphi_value(k, q);
                double dot = 0.0;
                for (std::size_t c = 0; c < d; ++c) dot += dj[c] * dk[c];
                stiff += basis.weights[q] * dot;
            }
            const double target_mass = j == k ? 1.0 : 0.0;
            const double target_stiff = j == k ? basis.lambdas[j] : 0.0;
            rep.mass_defect = std::max(rep.mass_defect, std::fabs(mass - target_mass));
            rep.stiffness_defect =
                std::max(rep.stiffness_defect, std::fabs(stiff - target_stiff));
        }
    return rep;
}

FieldProjection project_initial(const VectorField& field, const EigenBasis& basis,
                                std::size_t d) {
    const std::size_t m = basis.mode_count();
    const std::size_t nq = basis.node_count;
    std::vector<double> values(nq * d);
    std::vector<double> buf(d);
    for (std::size_t q = 0; q < nq; ++q) {
        field(std::span<const double>(&basis.nodes[q * basis.domain.dim()],
                                      basis.domain.dim()),
              std::span<double>(buf));
        for (std::size_t c = 0; c < d; ++c) values[q * d + c] = buf[c];
    }
    FieldProjection proj;
    proj.coeffs.assign(m * d, 0.0);
    for (std::size_t j = 0; j < m; ++j)
        for (std::size_t c = 0; c < d; ++c)
            proj.coeffs[j * d + c] = block_sum_fn(
                nq,
                [&](std::size_t q) {
                    return basis.weights[q] * basis.phi_value(j, q) * values[q * d + c];
                },
                exec_mode());
    double err2 = 0.0;
    for (std::size_t q = 0; q < nq; ++q) {
        for (std::size_t c = 0; c < d; ++c) {
            double rec = 0.0;
            for (std::size_t j = 0; j < m; ++j)
                rec += proj.coeffs[j * d + c] * basis.phi_value(j, q);
            const double diff = values[q * d + c] - rec;
            err2 += basis.weights[q] * diff * diff;
        }
    }
    proj.residual_l2 = std::sqrt(std::max(0.0, err2));
    return proj;
}

DiscretePotential discrete_potential(std::span<const double> coeffs,
                                     const EigenBasis& basis,
                                     const StoredEnergy& F, ExecMode mode) {
    const std::size_t d = basis.domain.dim();
    const std::size_t m = basis.mode_count();
    const std::size_t nq = basis.node_count;
    if (coeffs.size() != m * d)
        throw std::invalid_argument("discrete_potential: coefficient size mismatch");
    if (F.dim != d)
        throw std::invalid_argument("discrete_potential: energy dimension mismatch");

    // pass 1: per node, the gradient matrix A, F(A) and DF(A)
    std::vector<double> df_all(nq * d * d);
    std::vector<double> f_all(nq);
    auto node_task = [&](std::size_t q) {
        std::vector<double> A(d * d, 0.0), G(d * d);
        for (std::size_t j = 0; j < m; ++j) {
            const double* dj = basis.dphi_value(j, q);
            for (std::size_t a = 0; a < d; ++a)
                for (std::size_t b = 0; b < d; ++b)
                    A[a * d + b] += coeffs[j * d + a] * dj[b];
        }
        f_all[q] = F.f(A);
        F.df(A, std::span<double>(G));
        for (std::size_t i = 0; i < d * d; ++i) df_all[q * d * d + i] = G[i];
    };
    if (mode == ExecMode::Parallel) {
#pragma omp parallel for schedule(static)
        for (std::size_t q = 0; q < nq; ++q) node_task(q);
    } else {
        for (std::size_t q = 0; q < nq; ++q) node_task(q);
    }

    DiscretePotential out;
    out.value = block_sum_fn(
        nq, [&](std::size_t q) { return basis.weights[q] * f_all[q]; }, mode);
    out.gradient.assign(m * d, 0.0);
    auto mode_task = [&](std::size_t j) {
        for (std::size_t a = 0; a < d; ++a) {
            double s = 0.0;
            for (std::size_t q = 0; q < nq; ++q) {
                const double* dj = basis.dphi_value(j, q);
                const double* G = &df_all[q * d * d];
                double dot = 0.0;
                for (std::size_t b = 0; b < d; ++b) dot += G[a * d + b] * dj[b];
                s += basis.weights[q] * dot;
            }
            out.gradient[j * d + a] = s;
        }
    };
    if (mode == ExecMode::Parallel) {
#pragma omp parallel for schedule(static)
        for (std::size_t j = 0; j < m; ++j) mode_task(j);
    } else {
        for (std::size_t j = 0; j < m; ++j) mode_task(j);
    }
    out.modulus = F.andrews_ball_modulus * basis.lambdas.back();
    return out;
}

SemiconvexPotential galerkin_potential(const EigenBasis& basis,
                                       const StoredEnergy& F) {
    SemiconvexPotential V;
    V.num_particles = basis.mode_count();
    V.dim = basis.domain.dim();
    V.modulus = F.andrews_ball_modulus * basis.lambdas.back();
    V.value = [&basis, &F](std::span<const double> y) {
        return discrete_potential(y, basis, F, exec_mode()).value;
    };
    V.gradient = [&basis, &F](std::span<const double> y, std::span<double> g) {
        const DiscretePotential dp = discrete_potential(y, basis, F, exec_mode());
        for (std::size_t i = 0; i < g.size(); ++i) g[i] = dp.gradient[i];
    };
    return V;
}

GalerkinSeries evolve_galerkin(std::span<const double> g,
                               std::span<const double> h,
                               const StoredEnergy& F, const EigenBasis& basis,
                               double T, const IntegratorConfig& cfg, double mu) {
    const std::size_t d = basis.domain.dim();
    const std::size_t m = basis.mode_count();
    const std::size_t dof = m * d;
    if (g.size() != dof || h.size() != dof)
        throw std::invalid_argument("evolve_galerkin: coefficient size mismatch");
    if (!(T > 0.0)) throw std::invalid_argument("evolve_galerkin: T must be positive");
    if (mu < 0.0) throw std::invalid_argument("evolve_galerkin: mu must be >= 0");

    const std::size_t steps = static_cast<std::size_t>(std::ceil(T / cfg.dt - 1e-12));
    if (steps > cfg.max_steps)
        throw std::runtime_error("evolve_galerkin: step count exceeds max_steps");

    std::vector<double> a(g.begin(), g.end());
    std::vector<double> adot(h.begin(), h.end());
    double dissipation = 0.0;

    GalerkinSeries series;
    series.mu = mu;
    series.dt = cfg.dt;
    series.dim = d;
    auto store = [&](double t) {
        series.states.push_back({a, adot, t});
        series.dissipation.push_back(dissipation);
    };
    auto force = [&](const std::vector<double>& y, std::vector<double>& out) {
        const DiscretePotential dp = discrete_potential(y, basis, F, exec_mode());
        for (std::size_t i = 0; i < dof; ++i) out[i] = -dp.gradient[i];
    };
    auto check = [&](std::size_t step) {
        for (double v : a)
            if (!std::isfinite(v))
                throw std::runtime_error("evolve_galerkin: non-finite state at step " +
                                         std::to_string(step));
    };
    store(0.0);

    if (mu == 0.0 && cfg.scheme == Scheme::VelocityVerlet) {
        std::vector<double> acc(dof);
        force(a, acc);
        for (std::size_t k = 1; k <= steps; ++k) {
            const double dt = (k == steps) ? T - (steps - 1) * cfg.dt : cfg.dt;
            for (std::size_t i = 0; i < dof; ++i) adot[i] += 0.5 * dt * acc[i];
            for (std::size_t i = 0; i < dof; ++i) a[i] += dt * adot[i];
            force(a, acc);
            for (std::size_t i = 0; i < dof; ++i) adot[i] += 0.5 * dt * acc[i];
            check(k);
            if (k % cfg.output_stride == 0 || k == steps)
                store(k == steps ? T : k * cfg.dt);
        }
        return series;
    }

    // rk4 on (a, adot, dissipation)
    std::vector<double> k1a(dof), k2a(dof), k3a(dof), k4a(dof);
    std::vector<double> k1v(dof), k2v(dof), k3v(dof), k4v(dof);
    std::vector<double> at(dof), vt(dof), frc(dof);
    auto rate = [&](const std::vector<double>& ya, const std::vector<double>& yv,
                    std::vector<double>& ka, std::vector<double>& kv, double& kd) {
        ka = yv;
        force(ya, frc);
        kd = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            double v2 = 0.0;
            for (std::size_t c = 0; c < d; ++c) {
                const double v = yv[j * d + c];
                kv[j * d + c] = frc[j * d + c] - mu * basis.lambdas[j] * v;
                v2 += v * v;
            }
            kd += basis.lambdas[j] * v2;
        }
        kd *= mu;
    };
    for (std::size_t k = 1; k <= steps; ++k) {
        const double dt = (k == steps) ? T - (steps - 1) * cfg.dt : cfg.dt;
        double kd1, kd2, kd3, kd4;
        rate(a, adot, k1a, k1v, kd1);
        for (std::size_t i = 0; i < dof; ++i) {
            at[i] = a[i] + 0.5 * dt * k1a[i];
            vt[i] = adot[i] + 0.5 * dt * k1v[i];
        }
        rate(at, vt, k2a, k2v, kd2);
        for (std::size_t i = 0; i < dof; ++i) {
            at[i] = a[i] + 0.5 * dt * k2a[i];
            vt[i] = adot[i] + 0.5 * dt * k2v[i];
        }
        rate(at, vt, k3a, k3v, kd3);
        for (std::size_t i = 0; i < dof; ++i) {
            at[i] = a[i] + dt * k3a[i];
            vt[i] = adot[i] + dt * k3v[i];
        }
        rate(at, vt, k4a, k4v, kd4);
        for (std::size_t i = 0; i < dof; ++i) {
            a[i] += dt / 6.0 * (k1a[i] + 2.0 * k2a[i] + 2.0 * k3a[i] + k4a[i]);
            adot[i] += dt / 6.0 * (k1v[i] + 2.0 * k2v[i] + 2.0 * k3v[i] + k4v[i]);
        }
        dissipation += dt / 6.0 * (kd1 + 2.0 * kd2 + 2.0 * kd3 + kd4);
        check(k);
        if (k % cfg.output_stride == 0 || k == steps)
            store(k == steps ? T : k * cfg.dt);
    }
    return series;
}

EnergyLedger energy_report(const GalerkinSeries& series, const StoredEnergy& F,
                           const EigenBasis& basis) {
    EnergyLedger ledger;
    if (series.states.empty()) return ledger;
    const std::size_t dof = series.states.front().a.size();
    double e0 = 0.0;
    for (std::size_t k = 0; k < series.states.size(); ++k) {
        const auto& st = series.states[k];
        double kin = 0.0;
        for (std::size_t i = 0; i < dof; ++i) kin += 0.5 * st.adot[i] * st.adot[i];
        const double E =
            kin + discrete_potential(st.a, basis, F, exec_mode()).value;
        if (k == 0) e0 = E;
        ledger.times.push_back(st.time);
        ledger.energy.push_back(E);
        ledger.dissipation.push_back(series.dissipation[k]);
        const double resid = std::fabs(E + series.dissipation[k] - e0);
        ledger.identity_residual.push_back(resid);
        ledger.max_identity_residual = std::max(ledger.max_identity_residual, resid);
        ledger.max_drift_rel = std::max(
            ledger.max_drift_rel, std::fabs(E - e0) / std::max(1.0, std::fabs(e0)));
    }
    return ledger;
}

YoungHistogram young_histogram(const GalerkinSeries& series,
                               const EigenBasis& basis, const StoredEnergy& F,
                               const CellDecomposition& cells,
                               int bins_per_entry) {
    if (series.states.empty())
        throw std::invalid_argument("young_histogram: empty series");
    if (cells.space_cells < 1 || cells.time_cells < 1 || bins_per_entry < 1)
        throw std::invalid_argument("young_histogram: bad decomposition");
    const std::size_t d = basis.domain.dim();
    const std::size_t nn = d * d;
    const std::size_t nq = basis.node_count;
    const std::size_t nt = series.states.size();
    const double T = series.states.back().time;

    // time trapezoid weights on the (possibly non-uniform) stored grid
    std::vector<double> tw(nt, 0.0);
    for (std::size_t k = 0; k + 1 < nt; ++k) {
        const double h = series.states[k + 1].time - series.states[k].time;
        tw[k] += 0.5 * h;
        tw[k + 1] += 0.5 * h;
    }

    auto gradient_at = [&](std::size_t k, std::size_t q, std::vector<double>& A) {
        A.assign(nn, 0.0);
        const auto& st = series.states[k];
        for (std::size_t j = 0; j < basis.mode_count(); ++j) {
            const double* dj = basis.dphi_value(j, q);
            for (std::size_t a = 0; a < d; ++a)
                for (std::size_t b = 0; b < d; ++b)
                    A[a * d + b] += st.a[j * d + a] * dj[b];
        }
    };

    YoungHistogram hist;
    hist.bins_per_entry = bins_per_entry;
    hist.value_lo.assign(nn, 1e300);
    hist.value_hi.assign(nn, -1e300);
    std::vector<double> A(nn);
    double second = 0.0, wtotal = 0.0;
    for (std::size_t k = 0; k < nt; ++k)
        for (std::size_t q = 0; q < nq; ++q) {
            gradient_at(k, q, A);
            const double w = tw[k] * basis.weights[q];
            wtotal += w;
            double a2 = 0.0;
            for (std::size_t i = 0; i < nn; ++i) {
                hist.value_lo[i] = std::min(hist.value_lo[i], A[i]);
                hist.value_hi[i] = std::max(hist.value_hi[i], A[i]);
                a2 += A[i] * A[i];
            }
            second += w * a2;
        }
    hist.second_moment = second / wtotal;
    for (std::size_t i = 0; i < nn; ++i)
        if (hist.value_hi[i] - hist.value_lo[i] < 1e-12) {
            hist.value_lo[i] -= 0.5e-12;
            hist.value_hi[i] += 0.5e-12;
        }

    // E(0) on the truncated initial data bounds the second moment
    double kin0 = 0.0;
    for (double v : series.states.front().adot) kin0 += 0.5 * v * v;
    const double e0 =
        kin0 +
        discrete_potential(series.states.front().a, basis, F, exec_mode()).value;
    hist.second_moment_bound =
        1.0 + e0 / (F.coercivity * basis.domain.volume());

    std::size_t joint_bins = 1;
    for (std::size_t i = 0; i < nn; ++i) joint_bins *= bins_per_entry;

    const std::size_t ncells =
        static_cast<std::size_t>(cells.time_cells) *
        static_cast<std::size_t>(std::pow(cells.space_cells, d));
    std::vector<YoungHistogram::Cell> cell(ncells);
    std::vector<double> cell_weight(ncells, 0.0);
    for (auto& c : cell) {
        c.weights.assign(joint_bins, 0.0);
        c.mean.assign(nn, 0.0);
        c.binned_mean.assign(nn, 0.0);
    }
    auto cell_index = [&](std::size_t k, std::size_t q) {
        const double t = series.states[k].time;
        int tc = static_cast<int>(t / T * cells.time_cells);
        tc = std::clamp(tc, 0, cells.time_cells - 1);
        std::size_t idx = tc;
        for (std::size_t c = 0; c < d; ++c) {
            const double x = basis.nodes[q * d + c];
            int xc = static_cast<int>(x / basis.domain.lengths[c] * cells.space_cells);
            xc = std::clamp(xc, 0, cells.space_cells - 1);
            idx = idx * cells.space_cells + xc;
        }
        return idx;
    };
    for (std::size_t k = 0; k < nt; ++k)
        for (std::size_t q = 0; q < nq; ++q) {
            gradient_at(k, q, A);
            const double w = tw[k] * basis.weights[q];
            if (w == 0.0) continue;
            const std::size_t ci = cell_index(k, q);
            std::size_t bin = 0;
            for (std::size_t i = 0; i < nn; ++i) {
                const double width = hist.bin_width(i);
                int b = static_cast<int>((A[i] - hist.value_lo[i]) / width);
                b = std::clamp(b, 0, bins_per_entry - 1);
                bin = bin * bins_per_entry + b;
            }
            cell[ci].weights[bin] += w;
            for (std::size_t i = 0; i < nn; ++i) cell[ci].mean[i] += w * A[i];
            cell_weight[ci] += w;
        }
    for (std::size_t ci = 0; ci < ncells; ++ci) {
        if (cell_weight[ci] == 0.0)
            throw std::runtime_error("young_histogram: empty cell " +
                                     std::to_string(ci));
        for (double& w : cell[ci].weights) w /= cell_weight[ci];
        for (double& m : cell[ci].mean) m /= cell_weight[ci];
        // mean from bin centers, for the resolution check
        std::vector<double> bm(nn, 0.0);
        for (std::size_t b = 0; b < joint_bins; ++b) {
            if (cell[ci].weights[b] == 0.0) continue;
            std::size_t rem = b;
            for (std::size_t i = nn; i-- > 0;) {
                const int bi = rem % bins_per_entry;
                rem /= bins_per_entry;
                bm[i] += cell[ci].weights[b] *
                         (hist.value_lo[i] + (bi + 0.5) * hist.bin_width(i));
            }
        }
        cell[ci].binned_mean = std::move(bm);
        // cell bounds, for the JSON schema
        std::size_t rem = ci;
        std::vector<int> coord(d);
        for (std::size_t c = d; c-- > 0;) {
            coord[c] = rem % cells.space_cells;
            rem /= cells.space_cells;
        }
        const int tc = static_cast<int>(rem);
        cell[ci].t_lo = T * tc / cells.time_cells;
        cell[ci].t_hi = T * (tc + 1) / cells.time_cells;
        for (std::size_t c = 0; c < d; ++c) {
            cell[ci].x_lo.push_back(basis.domain.lengths[c] * coord[c] /
                                    cells.space_cells);
            cell[ci].x_hi.push_back(basis.domain.lengths[c] * (coord[c] + 1) /
                                    cells.space_cells);
        }
    }
    hist.cells = std::move(cell);
    return hist;
}

std::string young_histogram_json(const YoungHistogram& h) {
    nlohmann::ordered_json root;
    root["bins_per_entry"] = h.bins_per_entry;
    root["value_lo"] = h.value_lo;
    root["value_hi"] = h.value_hi;
    root["second_moment"] = h.second_moment;
    root["second_moment_bound"] = h.second_moment_bound;
    nlohmann::ordered_json cells = nlohmann::ordered_json::array();
    for (const auto& c : h.cells) {
        nlohmann::ordered_json jc;
        jc["bounds"] = {{"x_lo", c.x_lo},
                        {"x_hi", c.x_hi},
                        {"t_lo", c.t_lo},
                        {"t_hi", c.t_hi}};
        jc["bins"] = h.bins_per_entry;
        jc["counts"] = c.weights;
        jc["mean"] = c.mean;
        cells.push_back(std::move(jc));
    }
    root["cells"] = std::move(cells);
    return root.dump(2) + "\n";
}

double cauchy_gradient_check(const GalerkinSeries& run_small,
                             const EigenBasis& basis_small,
                             const GalerkinSeries& run_large,
                             const EigenBasis& basis_large,
                             int common_quad_order) {
    if (basis_small.domain.lengths != basis_large.domain.lengths)
        throw std::invalid_argument("cauchy_gradient_check: domain mismatch");
    if (run_small.mu != run_large.mu || run_small.dt != run_large.dt)
        throw std::invalid_argument("cauchy_gradient_check: configuration mismatch");
    if (run_small.states.size() != run_large.states.size())
        throw std::invalid_argument("cauchy_gradient_check: time grid mismatch");
    if (basis_small.mode_count() >= basis_large.mode_count())
        throw std::invalid_argument("cauchy_gradient_check: need N_small < N_large");
    const std::size_t d = basis_small.domain.dim();
    const std::size_t nn = d * d;

    std::vector<std::vector<double>> axis_nodes(d), axis_weights(d);
    for (std::size_t c = 0; c < d; ++c)
        gauss_legendre(common_quad_order, 0.0, basis_small.domain.lengths[c],
                       axis_nodes[c], axis_weights[c]);
    std::size_t total = 1;
    for (std::size_t c = 0; c < d; ++c) total *= common_quad_order;

    const std::size_t nt = run_small.states.size();
    std::vector<double> tw(nt, 0.0);
    for (std::size_t k = 0; k + 1 < nt; ++k) {
        if (std::fabs(run_small.states[k].time - run_large.states[k].time) > 1e-12)
            throw std::invalid_argument("cauchy_gradient_check: time grid mismatch");
        const double h = run_small.states[k + 1].time - run_small.states[k].time;
        tw[k] += 0.5 * h;
        tw[k + 1] += 0.5 * h;
    }

    std::vector<double> x(d), dj(d), As(nn), Al(nn);
    double total_err = 0.0;
    for (std::size_t k = 0; k < nt; ++k) {
        double space_err = 0.0;
        for (std::size_t q = 0; q < total; ++q) {
            std::size_t rem = q;
            double w = 1.0;
            for (std::size_t c = d; c-- > 0;) {
                const std::size_t j = rem % common_quad_order;
                rem /= common_quad_order;
                x[c] = axis_nodes[c][j];
                w *= axis_weights[c][j];
            }
            auto grad_field = [&](const GalerkinSeries& run, const EigenBasis& basis,
                                  std::vector<double>& A) {
                A.assign(nn, 0.0);
                const auto& st = run.states[k];
                for (std::size_t j2 = 0; j2 < basis.mode_count(); ++j2) {
                    basis.eval_dphi(j2, x, std::span<double>(dj));
                    for (std::size_t a = 0; a < d; ++a)
                        for (std::size_t b = 0; b < d; ++b)
                            A[a * d + b] += st.a[j2 * d + a] * dj[b];
                }
            };
            grad_field(run_small, basis_small, As);
            grad_field(run_large, basis_large, Al);
            double diff2 = 0.0;
            for (std::size_t i = 0; i < nn; ++i) {
                const double diff = As[i] - Al[i];
                diff2 += diff * diff;
            }
            space_err += w * diff2;
        }
        total_err += tw[k] * space_err;
    }
    return std::sqrt(std::max(0.0, total_err));
}

void write_modes_csv(const GalerkinSeries& series, std::ostream& out) {
    out << "t,mode,component,a,adot\n";
    const std::size_t d = series.dim;
    for (const auto& st : series.states) {
        const std::size_t m = st.a.size() / d;
        for (std::size_t j = 0; j < m; ++j)
            for (std::size_t c = 0; c < d; ++c)
                out << format_double(st.time) << "," << j << "," << c << ","
                    << format_double(st.a[j * d + c]) << ","
                    << format_double(st.adot[j * d + c]) << "\n";
    }
}

void write_modes_csv(const GalerkinSeries& series, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    write_modes_csv(series, out);
}

}  // namespace semiflow
