#include "semiflow/verify.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>

#include "semiflow/csvio.hpp"
#include "semiflow/exec.hpp"
#include "semiflow/galerkin.hpp"
#include "semiflow/oracles.hpp"
#include "semiflow/rng.hpp"
#include "semiflow/scenario.hpp"

#include "json.hpp"

namespace semiflow {

PhaseMeasure seeded_phase_measure(std::uint64_t seed, std::size_t n, std::size_t d) {
    DistributionSpec spec;
    spec.kind = DistributionSpec::Kind::Gaussian;
    spec.mean.assign(2 * d, 0.0);
    spec.sigma.assign(2 * d, 1.0);
    return sample_initial(spec, n, seed, d);
}

StickyInitialData seeded_sticky_data(std::uint64_t seed, std::size_t n, double kappa) {
    Rng rng(seed);
    StickyInitialData data;
    data.positions.resize(n);
    for (auto& x : data.positions) x = rng.uniform(-2.0, 2.0);
    std::sort(data.positions.begin(), data.positions.end());
    for (std::size_t i = 1; i < n; ++i)
        if (data.positions[i] <= data.positions[i - 1])
            data.positions[i] = data.positions[i - 1] + 1e-9;
    data.masses.resize(n);
    double sum = 0.0;
    for (auto& m : data.masses) sum += (m = rng.uniform(0.5, 1.5));
    for (auto& m : data.masses) m /= sum;
    // piecewise-linear v0 with a few random knots spanning the support
    std::vector<double> bp = {-3.0, -1.0, 0.5, 3.0};
    std::vector<double> vals;
    for (std::size_t k = 0; k < bp.size(); ++k) vals.push_back(rng.uniform(-2.0, 2.0));
    PiecewiseLinearVelocity v0(bp, vals);
    for (std::size_t i = 0; i < n; ++i) data.velocities.push_back(v0(data.positions[i]));
    data.v0_total_variation = [v0](double a, double b) {
        return v0.total_variation(a, b);
    };
    data.w = kappa == 0.0 ? free_interaction(1) : quadratic_interaction(1, kappa);
    return data;
}

double non_event_time(const FlowMap& fm, double want) {
    double t = want;
    while (fm.is_event_time(t, 1e-4) && t < fm.terminal_time()) t += 1.3e-4;
    return std::min(t, fm.terminal_time());
}

std::vector<std::string> suite_names() {
    return {"entropy", "qspp",      "moments",           "energy",
            "averaging", "oracle-match", "galerkin-identities"};
}

namespace {

void add(SuiteReport& rep, const std::string& name, double violation, double tol) {
    const bool ok = violation <= tol;
    rep.checks.push_back({name, violation, tol, ok});
    rep.pass = rep.pass && ok;
}

IntegratorConfig rk4_config(double dt) {
    IntegratorConfig cfg;
    cfg.dt = dt;
    cfg.scheme = Scheme::Rk4;
    return cfg;
}

SuiteReport suite_oracle_match() {
    SuiteReport rep{"oracle-match", {}, true};
    for (double kappa : {1.0, -1.0, 0.0}) {
        const PhaseMeasure f0 = seeded_phase_measure(11, 16, 1);
        const InteractionPotential w = kappa == 0.0
                                           ? free_interaction(1)
                                           : quadratic_interaction(1, kappa);
        const VlasovSeries series = simulate(f0, w, 2.0, rk4_config(1e-3));
        QuadraticFlowSpec spec;
        spec.kappa = kappa;
        spec.mean_x = {0.0};
        spec.mean_v = {0.0};
        double mx = 0.0, mv = 0.0;
        for (std::size_t i = 0; i < f0.count(); ++i) {
            mx += f0.mass(i) * f0.x(i)[0];
            mv += f0.mass(i) * f0.v(i)[0];
        }
        spec.mean_x[0] = mx;
        spec.mean_v[0] = mv;
        double err = 0.0;
        for (const auto& f : series.snapshots)
            for (std::size_t i = 0; i < f.count(); ++i) {
                const FlowPoint p =
                    quadratic_flow(f0.x(i), f0.v(i), f.time, spec);
                err = std::max(err, std::fabs(p.position[0] - f.x(i)[0]));
                err = std::max(err, std::fabs(p.velocity[0] - f.v(i)[0]));
            }
        add(rep, "vlasov-quadratic-kappa" + std::to_string(static_cast<int>(kappa)),
            err, 1e-6);
    }
    for (double mu : {0.0, 0.1}) {
        const Box box{{1.0}};
        const EigenBasis basis = build_basis(box, 4);
        const StoredEnergy F = linear_energy(1);
        Rng rng(5);
        std::vector<double> g = rng.gaussian_vec(basis.mode_count());
        std::vector<double> h = rng.gaussian_vec(basis.mode_count());
        const GalerkinSeries series =
            evolve_galerkin(g, h, F, basis, 2.0, rk4_config(2e-4), mu);
        double err = 0.0;
        for (const auto& st : series.states) {
            const ModeSolution ms =
                linear_wave_modes(g, h, basis.lambdas, 1, st.time, mu);
            for (std::size_t i = 0; i < ms.a.size(); ++i) {
                err = std::max(err, std::fabs(ms.a[i] - st.a[i]));
                err = std::max(err, std::fabs(ms.adot[i] - st.adot[i]));
            }
        }
        add(rep, mu == 0.0 ? "galerkin-linear-undamped" : "galerkin-linear-damped",
            err, 1e-8);
    }
    return rep;
}

SuiteReport suite_moments() {
    SuiteReport rep{"moments", {}, true};
    double vel = 0.0, pos = 0.0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const double kappa = (seed % 2 == 0) ? 1.0 : -1.0;
        const VlasovSeries series =
            simulate(seeded_phase_measure(seed, 16, 1),
                     quadratic_interaction(1, kappa), 2.0, rk4_config(1e-3));
        const MomentBoundReport r = moment_bounds_check(series);
        vel = std::max(vel, r.max_velocity_violation);
        pos = std::max(pos, r.max_position_violation);
    }
    add(rep, "kinetic-moment-bound", vel, 1e-8);
    add(rep, "position-moment-bound", pos, 1e-8);
    return rep;
}

SuiteReport suite_entropy() {
    SuiteReport rep{"entropy", {}, true};
    double worst = 0.0;
    for (std::uint64_t seed = 1; seed <= 8; ++seed) {
        const FlowMap fm = evolve(seeded_sticky_data(seed, 12, 1.0), 2.0, {});
        for (double t : {0.1, 0.5, 1.0, 2.0})
            worst = std::max(worst, entropy_check(fm, t));
    }
    add(rep, "oleinik-velocity-bound", worst, 1e-8);
    return rep;
}

SuiteReport suite_qspp() {
    SuiteReport rep{"qspp", {}, true};
    double worst_ratio = 0.0, worst_zero = 0.0;
    const std::vector<double> dyadic = {0.125, 0.25, 0.5, 1.0, 2.0};
    for (std::uint64_t seed = 1; seed <= 8; ++seed) {
        const FlowMap fm = evolve(seeded_sticky_data(seed, 12, 1.0), 2.0, {});
        for (std::size_t a = 0; a < dyadic.size(); ++a)
            for (std::size_t b = a; b < dyadic.size(); ++b)
                worst_ratio =
                    std::max(worst_ratio, qspp_check(fm, dyadic[a], dyadic[b]));
        for (double t : dyadic)
            worst_zero = std::max(worst_zero, time_zero_bound_check(fm, t));
    }
    add(rep, "scaled-separation-monotone", worst_ratio, 1e-8);
    add(rep, "time-zero-separation-bound", worst_zero, 1e-8);
    return rep;
}

SuiteReport suite_energy() {
    SuiteReport rep{"energy", {}, true};
    {
        // harmonic oscillator, one revolution
        const SemiconvexPotential V = harmonic_potential(1, 1);
        ParticleSystemState s0;
        s0.positions = {1.0};
        s0.velocities = {0.0};
        s0.masses = {1.0};
        const Trajectory traj =
            integrate(V, s0, 2.0 * 3.14159265358979323846, rk4_config(1e-3));
        const double e0 = total_energy(traj.states.front(), V);
        double drift = 0.0;
        for (const auto& s : traj.states)
            drift = std::max(drift, std::fabs(total_energy(s, V) - e0));
        add(rep, "newton-rk4-energy-drift", drift, 1e-8);
    }
    {
        double worst = 0.0;
        for (std::uint64_t seed = 1; seed <= 5; ++seed) {
            const FlowMap fm = evolve(seeded_sticky_data(seed, 12, 1.0), 2.0, {});
            const auto samples = energy_series(fm);
            for (std::size_t k = 1; k < samples.size(); ++k)
                worst = std::max(worst,
                                 samples[k].energy - samples[k - 1].energy);
        }
        add(rep, "sticky-energy-nonincreasing", worst, 1e-8);
    }
    {
        const Box box{{2.0 * 3.14159265358979323846}};
        const EigenBasis basis = build_basis(box, 2);
        const StoredEnergy F = cosine_energy(1, 0.5, {2.0});
        Rng rng(3);
        std::vector<double> g = rng.gaussian_vec(basis.mode_count());
        std::vector<double> h = rng.gaussian_vec(basis.mode_count());
        IntegratorConfig cfg;
        cfg.dt = 1e-3;
        cfg.scheme = Scheme::VelocityVerlet;
        const GalerkinSeries undamped = evolve_galerkin(g, h, F, basis, 2.0, cfg, 0.0);
        add(rep, "galerkin-undamped-drift",
            energy_report(undamped, F, basis).max_drift_rel, 1e-6);
        const GalerkinSeries damped =
            evolve_galerkin(g, h, F, basis, 2.0, rk4_config(1e-3), 0.1);
        add(rep, "galerkin-damped-identity",
            energy_report(damped, F, basis).max_identity_residual, 1e-6);
    }
    return rep;
}

SuiteReport suite_averaging() {
    SuiteReport rep{"averaging", {}, true};
    double worst_avg = 0.0, worst_cond = 0.0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const FlowMap fm = evolve(seeded_sticky_data(seed, 10, 1.0), 2.0, {});
        const double s = non_event_time(fm, 0.3);
        const double t = non_event_time(fm, 1.7);
        const std::function<double(double)> observables[] = {
            [](double) { return 1.0; },
            [](double x) { return x; },
            [](double x) { return std::tanh(x); }};
        for (const auto& g : observables)
            worst_avg = std::max(worst_avg, averaging_check(fm, g, s, t));
        worst_cond = std::max(worst_cond, conditional_velocity_check(fm, t));
    }
    add(rep, "averaging-identity", worst_avg, 1e-8);
    add(rep, "conditional-velocity", worst_cond, 1e-6);
    return rep;
}

SuiteReport suite_galerkin_identities() {
    SuiteReport rep{"galerkin-identities", {}, true};
    const Box box{{1.0}};
    const EigenBasis basis = build_basis(box, 6);
    const BasisOrthonormality ortho = basis_orthonormality(basis);
    add(rep, "basis-mass-orthonormality", ortho.mass_defect, 1e-10);
    add(rep, "basis-stiffness-orthogonality", ortho.stiffness_defect, 1e-8);

    const StoredEnergy F = cosine_energy(1, 0.5, {2.0});
    const StoredEnergyReport er = validate_stored_energy(F, 200, 17);
    add(rep, "stored-energy-coercivity", er.coercivity_violation, 1e-8);
    add(rep, "stored-energy-monotonicity", er.monotonicity_violation, 1e-8);
    add(rep, "stored-energy-growth", er.growth_violation, 1e-8);

    // gradient of the discrete potential vs central differences
    Rng rng(23);
    double fd_err = 0.0;
    for (int trial = 0; trial < 5; ++trial) {
        std::vector<double> y = rng.gaussian_vec(basis.mode_count());
        const DiscretePotential dp = discrete_potential(y, basis, F, exec_mode());
        const double step = 1e-6;
        for (std::size_t i = 0; i < y.size(); ++i) {
            std::vector<double> yp = y, ym = y;
            yp[i] += step;
            ym[i] -= step;
            const double fd =
                (discrete_potential(yp, basis, F, exec_mode()).value -
                 discrete_potential(ym, basis, F, exec_mode()).value) /
                (2.0 * step);
            fd_err = std::max(fd_err, std::fabs(fd - dp.gradient[i]) /
                                          std::max(1.0, std::fabs(dp.gradient[i])));
        }
    }
    add(rep, "discrete-potential-gradient-fd", fd_err, 1e-5);

    // Young histogram mean condition and second moment bound
    Rng rng2(29);
    std::vector<double> g = rng2.gaussian_vec(basis.mode_count());
    std::vector<double> h = rng2.gaussian_vec(basis.mode_count());
    const GalerkinSeries series =
        evolve_galerkin(g, h, F, basis, 1.0, rk4_config(1e-3), 0.1);
    const YoungHistogram hist =
        young_histogram(series, basis, F, {2, 2}, 32);
    double mean_err = 0.0;
    for (const auto& cell : hist.cells)
        for (std::size_t i = 0; i < cell.mean.size(); ++i)
            mean_err = std::max(mean_err,
                                std::fabs(cell.mean[i] - cell.binned_mean[i]) /
                                    hist.bin_width(i));
    add(rep, "young-mean-within-one-bin", mean_err, 1.0);
    add(rep, "young-second-moment-bound",
        hist.second_moment - hist.second_moment_bound, 0.0);
    return rep;
}

}  // namespace

SuiteReport run_suite(const std::string& name) {
    if (name == "oracle-match") return suite_oracle_match();
    if (name == "moments") return suite_moments();
    if (name == "entropy") return suite_entropy();
    if (name == "qspp") return suite_qspp();
    if (name == "energy") return suite_energy();
    if (name == "averaging") return suite_averaging();
    if (name == "galerkin-identities") return suite_galerkin_identities();
    throw ConfigError("unknown verification suite: " + name);
}

namespace {

using nlohmann::json;

struct LoadedTrajectory {
    std::vector<ParticleSystemState> states;
    std::size_t dim;
};

LoadedTrajectory load_trajectory(const std::string& path,
                                 const std::vector<double>& masses) {
    const CsvTable table = read_csv(path);
    std::size_t d = 0;
    while (table.column("x" + std::to_string(d + 1)) >= 0) ++d;
    if (d == 0) throw std::runtime_error("trajectory CSV has no coordinate columns");
    LoadedTrajectory out;
    out.dim = d;
    std::map<double, std::vector<const std::vector<double>*>> by_time;
    for (const auto& row : table.rows) by_time[row[0]].push_back(&row);
    for (const auto& [t, rows] : by_time) {
        ParticleSystemState s;
        s.dim = d;
        s.time = t;
        if (masses.size() == rows.size())
            s.masses = masses;
        else
            s.masses.assign(rows.size(), 1.0 / rows.size());
        for (const auto* row : rows) {
            for (std::size_t c = 0; c < d; ++c) s.positions.push_back((*row)[2 + c]);
            for (std::size_t c = 0; c < d; ++c)
                s.velocities.push_back((*row)[2 + d + c]);
        }
        out.states.push_back(std::move(s));
    }
    return out;
}

}  // namespace

SuiteReport verify_artifacts(const std::string& manifest_path) {
    std::ifstream in(manifest_path);
    if (!in) throw ConfigError("cannot open manifest: " + manifest_path);
    json manifest;
    try {
        in >> manifest;
    } catch (const std::exception& e) {
        throw ConfigError(manifest_path + ": JSON parse error: " + e.what());
    }
    const std::string kind = manifest.at("kind").get<std::string>();
    const json& config = manifest.at("config");
    const std::string dir = std::filesystem::path(manifest_path).parent_path().string();
    const auto artifact = [&](const std::string& name) {
        return (std::filesystem::path(dir) / name).string();
    };

    SuiteReport rep{"artifacts:" + kind, {}, true};
    if (kind == "newton" || kind == "vlasov") {
        std::vector<double> masses;
        if (manifest.contains("masses"))
            masses = manifest.at("masses").get<std::vector<double>>();
        const LoadedTrajectory traj =
            load_trajectory(artifact("trajectory.csv"), masses);
        InteractionPotential w;
        bool lifted = kind == "vlasov";
        if (kind == "vlasov") {
            const json& jw = config.at("interaction");
            const std::string family = jw.at("family").get<std::string>();
            const std::size_t d = traj.dim;
            if (family == "quadratic")
                w = quadratic_interaction(d, jw.at("kappa").get<double>());
            else if (family == "cosine")
                w = cosine_interaction(d, jw.at("kappa").get<double>(),
                                       jw.at("alpha").get<double>(),
                                       jw.at("beta").get<double>());
            else
                w = free_interaction(d);
        }
        // momentum conservation for pairwise (translation invariant) forces
        if (lifted) {
            double worst = 0.0;
            std::vector<double> p0(traj.dim, 0.0);
            for (std::size_t k = 0; k < traj.states.size(); ++k) {
                const auto& s = traj.states[k];
                std::vector<double> p(traj.dim, 0.0);
                for (std::size_t i = 0; i < s.count(); ++i)
                    for (std::size_t c = 0; c < traj.dim; ++c)
                        p[c] += s.masses[i] * s.velocities[i * traj.dim + c];
                if (k == 0) p0 = p;
                for (std::size_t c = 0; c < traj.dim; ++c)
                    worst = std::max(worst, std::fabs(p[c] - p0[c]));
            }
            add(rep, "momentum-conservation", worst, 1e-10);

            // energy conservation of the lifted system
            const std::size_t n = traj.states.front().count();
            std::vector<double> masses = traj.states.front().masses;
            const SemiconvexPotential V = lift_potential(w, masses);
            double e0 = 0.0, drift = 0.0;
            for (std::size_t k = 0; k < traj.states.size(); ++k) {
                const double e = total_energy(traj.states[k], V);
                if (k == 0) e0 = e;
                drift = std::max(drift, std::fabs(e - e0) / std::max(1.0, std::fabs(e0)));
            }
            add(rep, "energy-drift", drift, 1e-6);
            (void)n;

            // a-priori velocity bound along the stored trajectory
            double worst_bound = 0.0;
            for (const auto& s : traj.states) {
                const VelocityBound b = apriori_velocity_bound(
                    traj.states.front(), V, s.time - traj.states.front().time);
                double mv2 = 0.0;
                for (std::size_t i = 0; i < s.count(); ++i)
                    for (std::size_t c = 0; c < traj.dim; ++c)
                        mv2 += s.masses[i] * s.velocities[i * traj.dim + c] *
                               s.velocities[i * traj.dim + c];
                worst_bound =
                    std::max(worst_bound, (mv2 - b.pointwise) /
                                              std::max(1.0, std::fabs(b.pointwise)));
            }
            add(rep, "apriori-velocity-bound", worst_bound, 1e-8);
        } else {
            // plain newton runs: energy conservation under the configured
            // potential
            const json& jp = config.at("potential");
            const std::string family = jp.at("family").get<std::string>();
            const std::size_t n = traj.states.front().count();
            SemiconvexPotential V;
            if (family == "harmonic")
                V = harmonic_potential(n, traj.dim);
            else if (family == "double_well")
                V = double_well_potential(n, traj.dim);
            else
                V = lift_potential(
                    [&] {
                        const json& jw = jp.at("interaction");
                        const std::string fam = jw.at("family").get<std::string>();
                        if (fam == "quadratic")
                            return quadratic_interaction(traj.dim,
                                                         jw.at("kappa").get<double>());
                        if (fam == "cosine")
                            return cosine_interaction(traj.dim,
                                                      jw.at("kappa").get<double>(),
                                                      jw.at("alpha").get<double>(),
                                                      jw.at("beta").get<double>());
                        return free_interaction(traj.dim);
                    }(),
                    traj.states.front().masses);
            double e0 = 0.0, drift = 0.0;
            for (std::size_t k = 0; k < traj.states.size(); ++k) {
                const double e = total_energy(traj.states[k], V);
                if (k == 0) e0 = e;
                drift = std::max(drift, std::fabs(e - e0) / std::max(1.0, std::fabs(e0)));
            }
            add(rep, "energy-drift", drift, 1e-6);
        }
        if (kind == "vlasov") {
            // note: equal-weight reconstruction; vlasov runs use equal masses
            VlasovSeries series;
            series.w = w;
            series.dim = traj.dim;
            for (const auto& s : traj.states) {
                std::vector<double> flat(s.count() * 2 * traj.dim);
                for (std::size_t i = 0; i < s.count(); ++i)
                    for (std::size_t c = 0; c < traj.dim; ++c) {
                        flat[i * 2 * traj.dim + c] = s.positions[i * traj.dim + c];
                        flat[i * 2 * traj.dim + traj.dim + c] =
                            s.velocities[i * traj.dim + c];
                    }
                series.snapshots.emplace_back(
                    EmpiricalMeasure(std::move(flat), 2 * traj.dim, s.masses),
                    traj.dim, s.time);
            }
            const MomentBoundReport mb = moment_bounds_check(series);
            add(rep, "kinetic-moment-bound", mb.max_velocity_violation, 1e-8);
            add(rep, "position-moment-bound", mb.max_position_violation, 1e-8);
        }
    } else if (kind == "sticky") {
        // event momentum balance from the events file
        std::ifstream ev_in(artifact("events.json"));
        if (!ev_in) throw ConfigError("missing events.json next to the manifest");
        json events;
        ev_in >> events;
        double worst_mom = 0.0;
        for (const auto& e : events) {
            const auto pre_v = e.at("pre_velocities").get<std::vector<double>>();
            const auto pre_m = e.at("pre_masses").get<std::vector<double>>();
            double mom = 0.0, mass = 0.0;
            for (std::size_t k = 0; k < pre_v.size(); ++k) {
                mom += pre_m[k] * pre_v[k];
                mass += pre_m[k];
            }
            worst_mom = std::max(
                worst_mom, std::fabs(mom - mass * e.at("post_velocity").get<double>()));
        }
        add(rep, "event-momentum-balance", worst_mom, 1e-12);

        // energy monotonicity and mass bookkeeping from the flow CSV
        const CsvTable table = read_csv(artifact("flow.csv"));
        const json& jw = config.at("interaction");
        const std::string family = jw.at("family").get<std::string>();
        InteractionPotential w = family == "quadratic"
                                     ? quadratic_interaction(1, jw.at("kappa").get<double>())
                                 : family == "cosine"
                                     ? cosine_interaction(1, jw.at("kappa").get<double>(),
                                                          jw.at("alpha").get<double>(),
                                                          jw.at("beta").get<double>())
                                     : free_interaction(1);
        std::map<double, std::vector<const std::vector<double>*>> by_time;
        for (const auto& row : table.rows) by_time[row[0]].push_back(&row);
        double prev_energy = 0.0, worst_inc = 0.0, worst_mass = 0.0;
        bool first = true;
        std::vector<double> z(1);
        for (const auto& [t, rows] : by_time) {
            (void)t;
            double kinetic = 0.0, msum = 0.0;
            for (const auto* row : rows) {
                kinetic += 0.5 * (*row)[5] * (*row)[4] * (*row)[4];
                msum += (*row)[5];
            }
            double potential = 0.0;
            for (const auto* ra : rows)
                for (const auto* rb : rows) {
                    z[0] = (*ra)[2] - (*rb)[2];
                    potential += 0.5 * (*ra)[5] * (*rb)[5] * w.w(z);
                }
            const double energy = kinetic + potential;
            worst_mass = std::max(worst_mass, std::fabs(msum - 1.0));
            if (!first) worst_inc = std::max(worst_inc, energy - prev_energy);
            prev_energy = energy;
            first = false;
        }
        add(rep, "total-mass", worst_mass, 1e-10);
        add(rep, "energy-nonincreasing", worst_inc, 1e-8);
    } else if (kind == "elasto") {
        const CsvTable table = read_csv(artifact("modes.csv"));
        const json& jd = config.at("domain");
        const Box box{jd.at("lengths").get<std::vector<double>>()};
        const int modes = config.at("modes").get<int>();
        int quad_order = 0;
        if (config.contains("quad_order")) quad_order = config.at("quad_order").get<int>();
        const EigenBasis basis = build_basis(box, modes, quad_order);
        const json& je = config.at("energy");
        const StoredEnergy F =
            je.at("family").get<std::string>() == "linear"
                ? linear_energy(box.dim())
                : cosine_energy(box.dim(), je.at("alpha").get<double>(),
                                je.at("b").get<std::vector<double>>());
        const double mu = config.contains("mu") ? config.at("mu").get<double>() : 0.0;
        const std::size_t d = box.dim();
        std::map<double, GalerkinState> by_time;
        for (const auto& row : table.rows) {
            GalerkinState& st = by_time[row[0]];
            if (st.a.empty()) {
                st.a.assign(basis.mode_count() * d, 0.0);
                st.adot.assign(basis.mode_count() * d, 0.0);
                st.time = row[0];
            }
            const std::size_t j = static_cast<std::size_t>(row[1]);
            const std::size_t c = static_cast<std::size_t>(row[2]);
            st.a[j * d + c] = row[3];
            st.adot[j * d + c] = row[4];
        }
        double e0 = 0.0, worst = 0.0;
        bool first = true;
        double prev_e = 0.0;
        for (const auto& [t, st] : by_time) {
            (void)t;
            double kin = 0.0;
            for (double v : st.adot) kin += 0.5 * v * v;
            const double e = kin + discrete_potential(st.a, basis, F, exec_mode()).value;
            if (first) e0 = prev_e = e;
            if (mu == 0.0)
                worst = std::max(worst, std::fabs(e - e0) / std::max(1.0, std::fabs(e0)));
            else if (!first)
                worst = std::max(worst, e - prev_e - 1e-12);
            prev_e = e;
            first = false;
        }
        add(rep, mu == 0.0 ? "energy-drift" : "energy-nonincreasing", worst,
            mu == 0.0 ? 1e-5 : 1e-8);
    } else {
        throw ConfigError("verify_artifacts: unknown kind '" + kind + "'");
    }
    return rep;
}

std::string report_json(const SuiteReport& report) {
    nlohmann::ordered_json j;
    j["suite"] = report.suite;
    j["pass"] = report.pass;
    nlohmann::ordered_json checks = nlohmann::ordered_json::array();
    for (const auto& c : report.checks) {
        nlohmann::ordered_json jc;
        jc["name"] = c.name;
        jc["max_violation"] = c.max_violation;
        jc["tolerance"] = c.tolerance;
        jc["pass"] = c.pass;
        checks.push_back(std::move(jc));
    }
    j["checks"] = std::move(checks);
    return j.dump(2) + "\n";
}

}  // namespace semiflow
