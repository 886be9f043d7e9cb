#include "semiflow/newton.hpp"

#include <cmath>
#include <fstream>
#include <ostream>
#include <stdexcept>

#include "semiflow/csvio.hpp"
#include "semiflow/quadrature.hpp"
#include "semiflow/rng.hpp"

namespace semiflow {

void ParticleSystemState::validate() const {
    const std::size_t n = masses.size();
    if (n == 0)
        throw std::invalid_argument("ParticleSystemState: empty system");
    if (positions.size() != n * dim || velocities.size() != n * dim)
        throw std::invalid_argument("ParticleSystemState: size mismatch");
    for (double m : masses)
        if (!(m > 0.0) || !std::isfinite(m))
            throw std::invalid_argument("ParticleSystemState: masses must be positive");
    for (double x : positions)
        if (!std::isfinite(x))
            throw std::invalid_argument("ParticleSystemState: non-finite position");
    for (double v : velocities)
        if (!std::isfinite(v))
            throw std::invalid_argument("ParticleSystemState: non-finite velocity");
}

Scheme scheme_from_string(const std::string& s) {
    if (s == "velocity-verlet" || s == "verlet") return Scheme::VelocityVerlet;
    if (s == "rk4") return Scheme::Rk4;
    throw std::invalid_argument("unknown scheme: " + s);
}

std::string scheme_to_string(Scheme s) {
    return s == Scheme::VelocityVerlet ? "velocity-verlet" : "rk4";
}

double chi(double t, double L) {
    if (t < 0.0 || L < 0.0)
        throw std::invalid_argument("chi: t and L must be nonnegative");
    if (t == 0.0) return 0.0;
    const double a = L + 1.0;
    const double integral = integrate_adaptive(
        [a](double s) { return std::exp(-0.5 * a * s * s); }, 0.0, t, 1e-12);
    return std::exp(0.5 * a * t * t) * integral;
}

double chi_prime(double t, double L) {
    if (t < 0.0 || L < 0.0)
        throw std::invalid_argument("chi_prime: t and L must be nonnegative");
    return 1.0 + (L + 1.0) * t * chi(t, L);
}

ChiTable::ChiTable(std::span<const double> times, double L) {
    chi_.reserve(times.size());
    chi_prime_.reserve(times.size());
    for (double t : times) {
        const double c = chi(t, L);
        chi_.push_back(c);
        chi_prime_.push_back(1.0 + (L + 1.0) * t * c);
    }
}

namespace {

void check_finite(std::span<const double> x, std::span<const double> v,
                  std::size_t step) {
    for (double a : x)
        if (!std::isfinite(a))
            throw std::runtime_error("integrate: non-finite position at step " +
                                     std::to_string(step));
    for (double a : v)
        if (!std::isfinite(a))
            throw std::runtime_error("integrate: non-finite velocity at step " +
                                     std::to_string(step));
}

struct Workspace {
    std::vector<double> grad, acc;
    std::vector<double> kx1, kv1, kx2, kv2, kx3, kv3, kx4, kv4, xt, vt;
};

void eval_accel(const SemiconvexPotential& V, const std::vector<double>& masses,
                std::size_t d, std::span<const double> x, Workspace& w,
                std::vector<double>& acc_out) {
    V.gradient(x, std::span<double>(w.grad));
    const std::size_t n = masses.size();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t c = 0; c < d; ++c)
            acc_out[i * d + c] = -w.grad[i * d + c] / masses[i];
}

}  // namespace

Trajectory integrate(const SemiconvexPotential& V, const ParticleSystemState& s0,
                     double T, const IntegratorConfig& cfg) {
    s0.validate();
    if (!(T > 0.0)) throw std::invalid_argument("integrate: T must be positive");
    if (!(cfg.dt > 0.0)) throw std::invalid_argument("integrate: dt must be positive");
    if (V.dofs() != s0.positions.size())
        throw std::invalid_argument("integrate: potential/state dimension mismatch");

    const std::size_t n = s0.count();
    const std::size_t d = s0.dim;
    const std::size_t dof = n * d;
    const std::size_t steps = static_cast<std::size_t>(std::ceil(T / cfg.dt - 1e-12));
    if (steps > cfg.max_steps)
        throw std::runtime_error("integrate: step count exceeds max_steps");

    Workspace w;
    w.grad.resize(dof);
    w.acc.resize(dof);
    std::vector<double> x = s0.positions, v = s0.velocities;

    Trajectory traj;
    traj.dt = cfg.dt;
    traj.scheme = cfg.scheme;
    auto store = [&](double t) {
        ParticleSystemState s;
        s.positions = x;
        s.velocities = v;
        s.masses = s0.masses;
        s.dim = d;
        s.time = t;
        traj.states.push_back(std::move(s));
    };
    store(s0.time);

    if (cfg.scheme == Scheme::VelocityVerlet) {
        eval_accel(V, s0.masses, d, x, w, w.acc);
        double t = s0.time;
        for (std::size_t k = 1; k <= steps; ++k) {
            const double h = (k == steps) ? T - (steps - 1) * cfg.dt : cfg.dt;
            for (std::size_t i = 0; i < dof; ++i) v[i] += 0.5 * h * w.acc[i];
            for (std::size_t i = 0; i < dof; ++i) x[i] += h * v[i];
            eval_accel(V, s0.masses, d, x, w, w.acc);
            for (std::size_t i = 0; i < dof; ++i) v[i] += 0.5 * h * w.acc[i];
            t = s0.time + ((k == steps) ? T : k * cfg.dt);
            check_finite(x, v, k);
            if (k % cfg.output_stride == 0 || k == steps) store(t);
        }
    } else {
        w.kx1.resize(dof); w.kv1.resize(dof);
        w.kx2.resize(dof); w.kv2.resize(dof);
        w.kx3.resize(dof); w.kv3.resize(dof);
        w.kx4.resize(dof); w.kv4.resize(dof);
        w.xt.resize(dof);  w.vt.resize(dof);
        for (std::size_t k = 1; k <= steps; ++k) {
            const double h = (k == steps) ? T - (steps - 1) * cfg.dt : cfg.dt;
            w.kx1 = v;
            eval_accel(V, s0.masses, d, x, w, w.kv1);
            for (std::size_t i = 0; i < dof; ++i) {
                w.xt[i] = x[i] + 0.5 * h * w.kx1[i];
                w.vt[i] = v[i] + 0.5 * h * w.kv1[i];
            }
            w.kx2 = w.vt;
            eval_accel(V, s0.masses, d, w.xt, w, w.kv2);
            for (std::size_t i = 0; i < dof; ++i) {
                w.xt[i] = x[i] + 0.5 * h * w.kx2[i];
                w.vt[i] = v[i] + 0.5 * h * w.kv2[i];
            }
            w.kx3 = w.vt;
            eval_accel(V, s0.masses, d, w.xt, w, w.kv3);
            for (std::size_t i = 0; i < dof; ++i) {
                w.xt[i] = x[i] + h * w.kx3[i];
                w.vt[i] = v[i] + h * w.kv3[i];
            }
            w.kx4 = w.vt;
            eval_accel(V, s0.masses, d, w.xt, w, w.kv4);
            for (std::size_t i = 0; i < dof; ++i) {
                x[i] += h / 6.0 * (w.kx1[i] + 2.0 * w.kx2[i] + 2.0 * w.kx3[i] + w.kx4[i]);
                v[i] += h / 6.0 * (w.kv1[i] + 2.0 * w.kv2[i] + 2.0 * w.kv3[i] + w.kv4[i]);
            }
            check_finite(x, v, k);
            const double t = s0.time + ((k == steps) ? T : k * cfg.dt);
            if (k % cfg.output_stride == 0 || k == steps) store(t);
        }
    }
    return traj;
}

double total_energy(const ParticleSystemState& s, const SemiconvexPotential& V) {
    double kinetic = 0.0;
    for (std::size_t i = 0; i < s.count(); ++i) {
        double v2 = 0.0;
        for (std::size_t c = 0; c < s.dim; ++c) {
            const double vv = s.velocities[i * s.dim + c];
            v2 += vv * vv;
        }
        kinetic += 0.5 * s.masses[i] * v2;
    }
    return kinetic + V.value(s.positions);
}

VelocityBound apriori_velocity_bound(const ParticleSystemState& s0,
                                     const SemiconvexPotential& V, double t) {
    s0.validate();
    if (t < 0.0) throw std::invalid_argument("apriori_velocity_bound: t must be >= 0");
    const std::size_t n = s0.count();
    const std::size_t d = s0.dim;
    std::vector<double> grad(n * d);
    V.gradient(s0.positions, std::span<double>(grad));
    double term = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double v2 = 0.0, g2 = 0.0;
        for (std::size_t c = 0; c < d; ++c) {
            v2 += s0.velocities[i * d + c] * s0.velocities[i * d + c];
            g2 += grad[i * d + c] * grad[i * d + c];
        }
        term += s0.masses[i] * v2 + g2 / s0.masses[i];
    }
    double L = V.modulus;
    if (!V.mass_weighted) {
        // Conservative conversion: V + (L/2)|x|^2 convex implies
        // V + (L/(2 min m)) sum_i m_i |x_i|^2 convex.
        double mmin = s0.masses[0];
        for (double m : s0.masses) mmin = std::min(mmin, m);
        L = V.modulus / mmin;
    }
    const double c = chi(t, L);
    return {term * (1.0 + (L + 1.0) * t * c), term * c};
}

SemiconvexityReport check_semiconvexity(const SemiconvexPotential& V,
                                        std::size_t sample_count,
                                        std::uint64_t seed, double tol) {
    if (sample_count == 0)
        throw std::invalid_argument("check_semiconvexity: sample_count must be >= 1");
    const std::size_t dof = V.dofs();
    Rng rng(seed);
    std::vector<double> gx(dof), gy(dof);
    SemiconvexityReport report;
    report.samples = sample_count;
    for (std::size_t k = 0; k < sample_count; ++k) {
        std::vector<double> x = rng.gaussian_vec(dof);
        std::vector<double> y = rng.gaussian_vec(dof);
        for (double& a : x) a *= 2.0;
        for (double& a : y) a *= 2.0;
        V.gradient(x, std::span<double>(gx));
        V.gradient(y, std::span<double>(gy));
        double inner = 0.0, quad = 0.0;
        for (std::size_t i = 0; i < dof; ++i) {
            const double dx = x[i] - y[i];
            inner += (gx[i] - gy[i]) * dx;
            const double w = V.mass_weighted ? V.masses[i / V.dim] : 1.0;
            quad += w * dx * dx;
        }
        report.max_violation = std::max(report.max_violation,
                                        -(inner + V.modulus * quad));
    }
    report.pass = report.max_violation <= tol;
    return report;
}

SemiconvexPotential harmonic_potential(std::size_t n, std::size_t d) {
    if (n == 0) throw std::invalid_argument("harmonic_potential: n must be >= 1");
    SemiconvexPotential V;
    V.num_particles = n;
    V.dim = d;
    V.modulus = 0.0;
    V.value = [](std::span<const double> x) {
        double s = 0.0;
        for (double a : x) s += a * a;
        return 0.5 * s;
    };
    V.gradient = [](std::span<const double> x, std::span<double> g) {
        for (std::size_t i = 0; i < x.size(); ++i) g[i] = x[i];
    };
    return V;
}

SemiconvexPotential double_well_potential(std::size_t n, std::size_t d) {
    if (n == 0) throw std::invalid_argument("double_well_potential: n must be >= 1");
    SemiconvexPotential V;
    V.num_particles = n;
    V.dim = d;
    V.modulus = 1.0;  // (x^4/4 - x^2/2)'' = 3x^2 - 1 >= -1
    V.value = [](std::span<const double> x) {
        double s = 0.0;
        for (double a : x) s += 0.25 * a * a * a * a - 0.5 * a * a;
        return s;
    };
    V.gradient = [](std::span<const double> x, std::span<double> g) {
        for (std::size_t i = 0; i < x.size(); ++i)
            g[i] = x[i] * x[i] * x[i] - x[i];
    };
    return V;
}

void write_trajectory_csv(const Trajectory& traj, std::ostream& out) {
    if (traj.states.empty()) throw std::invalid_argument("empty trajectory");
    const std::size_t d = traj.states.front().dim;
    out << "t,i";
    for (std::size_t c = 1; c <= d; ++c) out << ",x" << c;
    for (std::size_t c = 1; c <= d; ++c) out << ",v" << c;
    out << "\n";
    for (const auto& s : traj.states) {
        for (std::size_t i = 0; i < s.count(); ++i) {
            out << format_double(s.time) << "," << i;
            for (std::size_t c = 0; c < d; ++c)
                out << "," << format_double(s.positions[i * d + c]);
            for (std::size_t c = 0; c < d; ++c)
                out << "," << format_double(s.velocities[i * d + c]);
            out << "\n";
        }
    }
}

void write_trajectory_csv(const Trajectory& traj, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    write_trajectory_csv(traj, out);
}

}  // namespace semiflow
