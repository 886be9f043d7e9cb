#include "semiflow/jeans_vlasov.hpp"

#include <cmath>
#include <stdexcept>

#include "semiflow/exec.hpp"
#include "semiflow/rng.hpp"

namespace semiflow {

InteractionPotential free_interaction(std::size_t dim) {
    InteractionPotential w;
    w.dim = dim;
    w.family = "free";
    w.w = [](std::span<const double>) { return 0.0; };
    w.dw = [](std::span<const double>, std::span<double> g) {
        for (double& v : g) v = 0.0;
    };
    return w;
}

InteractionPotential quadratic_interaction(std::size_t dim, double kappa) {
    InteractionPotential w;
    w.dim = dim;
    w.family = "quadratic";
    w.kappa = kappa;
    w.modulus = std::fabs(kappa);
    w.growth = std::fabs(kappa);
    w.w = [kappa](std::span<const double> z) {
        double s = 0.0;
        for (double a : z) s += a * a;
        return 0.5 * kappa * s;
    };
    w.dw = [kappa](std::span<const double> z, std::span<double> g) {
        for (std::size_t c = 0; c < z.size(); ++c) g[c] = kappa * z[c];
    };
    return w;
}

InteractionPotential cosine_interaction(std::size_t dim, double kappa,
                                        double alpha, double beta) {
    if (alpha < 0.0)
        throw std::invalid_argument("cosine_interaction: alpha must be >= 0");
    InteractionPotential w;
    w.dim = dim;
    w.family = "cosine";
    w.kappa = kappa;
    w.alpha = alpha;
    w.beta = beta;
    // W'' along beta lies in [kappa - alpha beta^2, kappa + alpha beta^2]
    const double lmin = std::max(0.0, alpha * beta * beta - kappa);
    w.modulus = std::max(lmin, std::fabs(kappa));
    w.growth = std::max(std::fabs(kappa), alpha * std::fabs(beta));
    w.w = [kappa, alpha, beta](std::span<const double> z) {
        double s = 0.0;
        for (double a : z) s += a * a;
        return 0.5 * kappa * s + alpha * std::cos(beta * z[0]);
    };
    w.dw = [kappa, alpha, beta](std::span<const double> z, std::span<double> g) {
        for (std::size_t c = 0; c < z.size(); ++c) g[c] = kappa * z[c];
        g[0] -= alpha * beta * std::sin(beta * z[0]);
    };
    return w;
}

InteractionReport validate_interaction(const InteractionPotential& w,
                                       std::size_t samples, std::uint64_t seed) {
    Rng rng(seed);
    InteractionReport rep;
    std::vector<double> g(w.dim), zneg(w.dim), z0(w.dim, 0.0);
    w.dw(z0, std::span<double>(g));
    for (double v : g) rep.gradient_origin = std::max(rep.gradient_origin, std::fabs(v));
    for (std::size_t k = 0; k < samples; ++k) {
        std::vector<double> z = rng.gaussian_vec(w.dim);
        for (double& a : z) a *= 3.0;
        for (std::size_t c = 0; c < w.dim; ++c) zneg[c] = -z[c];
        rep.evenness = std::max(rep.evenness, std::fabs(w.w(zneg) - w.w(z)));
        w.dw(z, std::span<double>(g));
        double gn = 0.0, zn = 0.0;
        for (std::size_t c = 0; c < w.dim; ++c) {
            gn += g[c] * g[c];
            zn += z[c] * z[c];
        }
        rep.growth_excess = std::max(
            rep.growth_excess, std::sqrt(gn) - w.growth * (1.0 + std::sqrt(zn)));
    }
    rep.pass = rep.evenness <= 1e-10 && rep.gradient_origin <= 1e-12 &&
               rep.growth_excess <= 1e-8;
    return rep;
}

PhaseMeasure::PhaseMeasure(EmpiricalMeasure m, std::size_t d, double t)
    : measure(std::move(m)), dim(d), time(t) {
    if (measure.dim() != 2 * d)
        throw std::invalid_argument("PhaseMeasure: measure must live on R^{2d}");
}

EmpiricalMeasure PhaseMeasure::spatial_marginal() const {
    std::vector<double> flat;
    flat.reserve(count() * dim);
    for (std::size_t i = 0; i < count(); ++i) {
        auto xi = x(i);
        flat.insert(flat.end(), xi.begin(), xi.end());
    }
    return EmpiricalMeasure(std::move(flat), dim, measure.weights());
}

EmpiricalMeasure PhaseMeasure::velocity_marginal() const {
    std::vector<double> flat;
    flat.reserve(count() * dim);
    for (std::size_t i = 0; i < count(); ++i) {
        auto vi = v(i);
        flat.insert(flat.end(), vi.begin(), vi.end());
    }
    return EmpiricalMeasure(std::move(flat), dim, measure.weights());
}

SemiconvexPotential lift_potential(const InteractionPotential& w,
                                   std::vector<double> masses) {
    double sum = 0.0;
    for (double m : masses) sum += m;
    if (std::fabs(sum - 1.0) > 1e-12)
        throw std::invalid_argument("lift_potential: masses must sum to 1 within 1e-12");
    const std::size_t n = masses.size();
    const std::size_t d = w.dim;
    SemiconvexPotential V;
    V.num_particles = n;
    V.dim = d;
    V.modulus = w.modulus;
    V.mass_weighted = true;
    V.masses = masses;
    V.translation_invariant = true;
    auto wfn = w.w;
    auto dwfn = w.dw;
    V.value = [n, d, masses, wfn](std::span<const double> x) {
        return block_sum_fn(
            n * n,
            [&](std::size_t k) {
                const std::size_t i = k / n, j = k % n;
                std::vector<double> z(d);
                for (std::size_t c = 0; c < d; ++c)
                    z[c] = x[i * d + c] - x[j * d + c];
                return 0.5 * masses[i] * masses[j] * wfn(z);
            },
            exec_mode());
    };
    V.gradient = [n, d, masses, dwfn](std::span<const double> x, std::span<double> out) {
        // D_{x_i} V = m_i sum_j m_j DW(x_i - x_j)
        pairwise_accel(
            n, d, x.data(), masses.data(),
            [&](std::span<const double> z, std::span<double> g) { dwfn(z, g); },
            out.data(), exec_mode());
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t c = 0; c < d; ++c) out[i * d + c] *= -masses[i];
    };
    return V;
}

const PhaseMeasure& VlasovSeries::at_time(double t) const {
    for (const auto& s : snapshots)
        if (std::fabs(s.time - t) <= 1e-9) return s;
    throw std::invalid_argument("VlasovSeries: time " + std::to_string(t) +
                                " is not on the stored snapshot grid");
}

VlasovSeries simulate(const PhaseMeasure& f0, const InteractionPotential& w,
                      double T, const IntegratorConfig& cfg) {
    const std::size_t n = f0.count();
    const std::size_t d = f0.dim;
    if (w.dim != d)
        throw std::invalid_argument("simulate: interaction dimension mismatch");
    ParticleSystemState s0;
    s0.dim = d;
    s0.masses = f0.measure.weights();
    s0.positions.resize(n * d);
    s0.velocities.resize(n * d);
    for (std::size_t i = 0; i < n; ++i) {
        auto xi = f0.x(i);
        auto vi = f0.v(i);
        for (std::size_t c = 0; c < d; ++c) {
            s0.positions[i * d + c] = xi[c];
            s0.velocities[i * d + c] = vi[c];
        }
    }
    s0.time = f0.time;
    const SemiconvexPotential V = lift_potential(w, s0.masses);
    const Trajectory traj = integrate(V, s0, T, cfg);

    VlasovSeries series;
    series.w = w;
    series.config = cfg;
    series.dim = d;
    series.snapshots.reserve(traj.states.size());
    for (const auto& st : traj.states) {
        std::vector<double> flat(n * 2 * d);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t c = 0; c < d; ++c) {
                flat[i * 2 * d + c] = st.positions[i * d + c];
                flat[i * 2 * d + d + c] = st.velocities[i * d + c];
            }
        }
        series.snapshots.emplace_back(
            EmpiricalMeasure(std::move(flat), 2 * d, st.masses), d, st.time);
    }
    return series;
}

namespace {

// sum_i m_i [v_i . Dx psi - (DW * rho)(x_i) . Dv psi] at one snapshot
double transport_integrand(const PhaseMeasure& f, const InteractionPotential& w,
                           const PhaseTestFunction& psi) {
    const std::size_t n = f.count();
    const std::size_t d = f.dim;
    std::vector<double> conv(d), z(d), g(d), dxp(d), dvp(d);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        auto xi = f.x(i);
        auto vi = f.v(i);
        for (std::size_t c = 0; c < d; ++c) conv[c] = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            auto xj = f.x(j);
            for (std::size_t c = 0; c < d; ++c) z[c] = xi[c] - xj[c];
            w.dw(z, std::span<double>(g));
            for (std::size_t c = 0; c < d; ++c) conv[c] += f.mass(j) * g[c];
        }
        psi.dx(xi, vi, std::span<double>(dxp));
        psi.dv(xi, vi, std::span<double>(dvp));
        double s = 0.0;
        for (std::size_t c = 0; c < d; ++c) s += vi[c] * dxp[c] - conv[c] * dvp[c];
        total += f.mass(i) * s;
    }
    return total;
}

}  // namespace

double weak_residual(const VlasovSeries& series, const PhaseTestFunction& psi,
                     double t) {
    const PhaseMeasure& ft = series.at_time(t);
    const PhaseMeasure& f0 = series.snapshots.front();
    auto integral_psi = [&](const PhaseMeasure& f) {
        double s = 0.0;
        for (std::size_t i = 0; i < f.count(); ++i)
            s += f.mass(i) * psi.psi(f.x(i), f.v(i));
        return s;
    };
    const double boundary = integral_psi(ft) - integral_psi(f0);
    const double t_end = ft.time;
    double integral = 0.0;
    double prev_val = 0.0, prev_time = 0.0;
    bool first = true;
    for (const auto& f : series.snapshots) {
        if (f.time > t_end + 1e-12) break;
        const double val = transport_integrand(f, series.w, psi);
        if (!first)
            integral += 0.5 * (val + prev_val) * (f.time - prev_time);
        prev_val = val;
        prev_time = f.time;
        first = false;
    }
    return std::fabs(boundary - integral);
}

MomentBoundReport moment_bounds_check(const VlasovSeries& series) {
    const PhaseMeasure& f0 = series.snapshots.front();
    const std::size_t n = f0.count();
    const std::size_t d = f0.dim;
    double v2_0 = 0.0, x2_0 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        auto xi = f0.x(i);
        auto vi = f0.v(i);
        for (std::size_t c = 0; c < d; ++c) {
            v2_0 += f0.mass(i) * vi[c] * vi[c];
            x2_0 += f0.mass(i) * xi[c] * xi[c];
        }
    }
    // double convolution of |DW|^2 against the initial spatial marginal
    std::vector<double> z(d), g(d);
    double dw2 = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;  // DW(0) = 0
            auto xi = f0.x(i);
            auto xj = f0.x(j);
            for (std::size_t c = 0; c < d; ++c) z[c] = xi[c] - xj[c];
            series.w.dw(z, std::span<double>(g));
            double g2 = 0.0;
            for (std::size_t c = 0; c < d; ++c) g2 += g[c] * g[c];
            dw2 += f0.mass(i) * f0.mass(j) * g2;
        }
    const double base = v2_0 + dw2;

    std::vector<double> times;
    times.reserve(series.snapshots.size());
    for (const auto& f : series.snapshots) times.push_back(f.time - f0.time);
    const ChiTable table(times, series.w.modulus);

    MomentBoundReport rep;
    for (std::size_t k = 0; k < series.snapshots.size(); ++k) {
        const PhaseMeasure& f = series.snapshots[k];
        double v2 = 0.0, x2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            auto xi = f.x(i);
            auto vi = f.v(i);
            for (std::size_t c = 0; c < d; ++c) {
                v2 += f.mass(i) * vi[c] * vi[c];
                x2 += f.mass(i) * xi[c] * xi[c];
            }
        }
        const double t = times[k];
        const double vel_rhs = base * table.chi_prime_at(k);
        const double pos_rhs = x2_0 + base * t * table.chi_at(k);
        rep.max_velocity_violation =
            std::max(rep.max_velocity_violation,
                     (v2 - vel_rhs) / std::max(1.0, std::fabs(vel_rhs)));
        rep.max_position_violation =
            std::max(rep.max_position_violation,
                     (0.5 * x2 - pos_rhs) / std::max(1.0, std::fabs(pos_rhs)));
    }
    rep.pass = rep.max_velocity_violation <= 1e-8 &&
               rep.max_position_violation <= 1e-8;
    return rep;
}

PhaseMeasure sample_initial(const DistributionSpec& spec, std::size_t n,
                            std::uint64_t seed, std::size_t dim) {
    const std::size_t pd = 2 * dim;
    if (spec.kind == DistributionSpec::Kind::Points) {
        if (spec.points.empty())
            throw std::invalid_argument("sample_initial: empty point list");
        std::vector<double> weights = spec.weights;
        if (weights.empty())
            weights.assign(spec.points.size(), 1.0 / spec.points.size());
        return PhaseMeasure(EmpiricalMeasure(spec.points, std::move(weights)), dim);
    }
    if (n == 0) throw std::invalid_argument("sample_initial: n must be >= 1");
    Rng rng(seed);
    std::vector<double> flat(n * pd);
    if (spec.kind == DistributionSpec::Kind::Gaussian) {
        if (spec.mean.size() != pd || spec.sigma.size() != pd)
            throw std::invalid_argument(
                "sample_initial: gaussian spec needs mean/sigma of length 2d");
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t c = 0; c < pd; ++c)
                flat[i * pd + c] = spec.mean[c] + spec.sigma[c] * rng.gaussian();
    } else {
        if (spec.lo.size() != pd || spec.hi.size() != pd)
            throw std::invalid_argument(
                "sample_initial: uniform spec needs lo/hi of length 2d");
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t c = 0; c < pd; ++c)
                flat[i * pd + c] = rng.uniform(spec.lo[c], spec.hi[c]);
    }
    return PhaseMeasure(
        EmpiricalMeasure(std::move(flat), pd, std::vector<double>(n, 1.0 / n)),
        dim);
}

}  // namespace semiflow
