#include "semiflow/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <set>

#include "semiflow/csvio.hpp"
#include "semiflow/exec.hpp"
#include "semiflow/galerkin.hpp"
#include "semiflow/jeans_vlasov.hpp"
#include "semiflow/measures.hpp"
#include "semiflow/newton.hpp"
#include "semiflow/rng.hpp"
#include "semiflow/sticky.hpp"
#include "semiflow/version.hpp"

namespace semiflow {

namespace {

using nlohmann::json;

void expect_keys(const json& obj, const std::set<std::string>& allowed,
                 const std::string& ctx) {
    if (!obj.is_object()) throw ConfigError(ctx + ": expected an object");
    for (const auto& [key, value] : obj.items()) {
        (void)value;
        if (allowed.find(key) == allowed.end())
            throw ConfigError(ctx + ": unknown key '" + key + "'");
    }
}

const json& require(const json& obj, const std::string& key, const std::string& ctx) {
    const auto it = obj.find(key);
    if (it == obj.end()) throw ConfigError(ctx + ": missing key '" + key + "'");
    return *it;
}

double num(const json& v, const std::string& ctx) {
    if (!v.is_number()) throw ConfigError(ctx + ": expected a number");
    return v.get<double>();
}

double positive(const json& v, const std::string& ctx) {
    const double x = num(v, ctx);
    if (!(x > 0.0)) throw ConfigError(ctx + ": must be positive");
    return x;
}

std::vector<double> num_vec(const json& v, const std::string& ctx) {
    if (!v.is_array()) throw ConfigError(ctx + ": expected an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) out.push_back(num(e, ctx));
    return out;
}

IntegratorConfig integ_from(const json& j, const std::string& ctx) {
    IntegratorConfig cfg;
    if (j.contains("dt")) cfg.dt = positive(j["dt"], ctx + ".dt");
    if (j.contains("scheme"))
        cfg.scheme = scheme_from_string(j["scheme"].get<std::string>());
    if (j.contains("output_stride")) {
        const double s = positive(j["output_stride"], ctx + ".output_stride");
        cfg.output_stride = static_cast<std::size_t>(s);
    }
    if (j.contains("max_steps"))
        cfg.max_steps = static_cast<std::size_t>(positive(j["max_steps"], ctx));
    return cfg;
}

InteractionPotential interaction_from(const json& j, const std::string& ctx) {
    expect_keys(j, {"family", "kappa", "alpha", "beta", "d"}, ctx);
    const std::string family = require(j, "family", ctx).get<std::string>();
    std::size_t d = 1;
    if (j.contains("d")) d = static_cast<std::size_t>(positive(j["d"], ctx + ".d"));
    if (family == "free") return free_interaction(d);
    if (family == "quadratic")
        return quadratic_interaction(d, num(require(j, "kappa", ctx), ctx + ".kappa"));
    if (family == "cosine")
        return cosine_interaction(d, num(require(j, "kappa", ctx), ctx + ".kappa"),
                                  num(require(j, "alpha", ctx), ctx + ".alpha"),
                                  num(require(j, "beta", ctx), ctx + ".beta"));
    throw ConfigError(ctx + ": unknown interaction family '" + family + "'");
}

StoredEnergy energy_from(const json& j, const std::string& ctx, std::size_t d) {
    expect_keys(j, {"family", "alpha", "b"}, ctx);
    const std::string family = require(j, "family", ctx).get<std::string>();
    if (family == "linear") return linear_energy(d);
    if (family == "cosine")
        return cosine_energy(d, num(require(j, "alpha", ctx), ctx + ".alpha"),
                             num_vec(require(j, "b", ctx), ctx + ".b"));
    throw ConfigError(ctx + ": unknown energy family '" + family + "'");
}

std::uint64_t seed_from(const json& j) {
    if (!j.contains("seed")) return 0;
    const double s = num(j["seed"], "seed");
    if (s < 0.0) throw ConfigError("seed: must be nonnegative");
    return static_cast<std::uint64_t>(s);
}

void check_tolerances(const json& j) {
    if (!j.contains("tolerances")) return;
    if (!j["tolerances"].is_object())
        throw ConfigError("tolerances: expected an object");
    for (const auto& [key, value] : j["tolerances"].items()) {
        (void)key;
        if (!value.is_number() || !(value.get<double>() > 0.0))
            throw ConfigError("tolerances: all entries must be positive numbers");
    }
}

// ---- newton -------------------------------------------------------------

SemiconvexPotential newton_potential_from(const json& j, std::size_t n,
                                          std::size_t d) {
    const std::string ctx = "potential";
    expect_keys(j, {"family", "interaction"}, ctx);
    const std::string family = require(j, "family", ctx).get<std::string>();
    if (family == "harmonic") return harmonic_potential(n, d);
    if (family == "double_well") return double_well_potential(n, d);
    if (family == "lifted")
        throw ConfigError(ctx + ": lifted potentials need masses; use at run time");
    throw ConfigError(ctx + ": unknown potential family '" + family + "'");
}

ParticleSystemState newton_initial_from(const json& j, std::uint64_t seed) {
    const std::string ctx = "initial";
    const std::string type = require(j, "type", ctx).get<std::string>();
    ParticleSystemState s;
    if (type == "points") {
        expect_keys(j, {"type", "positions", "velocities", "masses"}, ctx);
        const auto& jp = require(j, "positions", ctx);
        const auto& jv = require(j, "velocities", ctx);
        if (!jp.is_array() || jp.empty())
            throw ConfigError(ctx + ".positions: expected a nonempty array");
        s.dim = jp[0].is_array() ? jp[0].size() : 1;
        for (const auto& p : jp) {
            const auto v = p.is_array() ? num_vec(p, ctx) : std::vector<double>{num(p, ctx)};
            s.positions.insert(s.positions.end(), v.begin(), v.end());
        }
        for (const auto& p : jv) {
            const auto v = p.is_array() ? num_vec(p, ctx) : std::vector<double>{num(p, ctx)};
            s.velocities.insert(s.velocities.end(), v.begin(), v.end());
        }
        if (j.contains("masses"))
            s.masses = num_vec(j["masses"], ctx + ".masses");
        else
            s.masses.assign(s.positions.size() / s.dim, 1.0);
        s.validate();
        return s;
    }
    if (type == "gaussian") {
        expect_keys(j, {"type", "n", "d", "sigma_x", "sigma_v", "mean_x", "mean_v"},
                    ctx);
        const std::size_t n = static_cast<std::size_t>(positive(require(j, "n", ctx), ctx));
        const std::size_t d = static_cast<std::size_t>(positive(require(j, "d", ctx), ctx));
        const double sx = j.contains("sigma_x") ? num(j["sigma_x"], ctx) : 1.0;
        const double sv = j.contains("sigma_v") ? num(j["sigma_v"], ctx) : 1.0;
        Rng rng(seed);
        s.dim = d;
        s.masses.assign(n, 1.0 / n);
        s.positions.resize(n * d);
        s.velocities.resize(n * d);
        for (std::size_t i = 0; i < n * d; ++i) s.positions[i] = sx * rng.gaussian();
        for (std::size_t i = 0; i < n * d; ++i) s.velocities[i] = sv * rng.gaussian();
        s.validate();
        return s;
    }
    throw ConfigError(ctx + ": unknown initial type '" + type + "'");
}

// ---- vlasov -------------------------------------------------------------

PhaseMeasure vlasov_initial_from(const json& j, std::uint64_t seed,
                                 const std::string& base_dir) {
    const std::string ctx = "initial";
    const std::string type = require(j, "type", ctx).get<std::string>();
    if (type == "points") {
        expect_keys(j, {"type", "d", "points", "weights"}, ctx);
        DistributionSpec spec;
        spec.kind = DistributionSpec::Kind::Points;
        for (const auto& p : require(j, "points", ctx))
            spec.points.push_back(num_vec(p, ctx + ".points"));
        if (j.contains("weights")) spec.weights = num_vec(j["weights"], ctx);
        const std::size_t d =
            static_cast<std::size_t>(positive(require(j, "d", ctx), ctx + ".d"));
        return sample_initial(spec, spec.points.size(), seed, d);
    }
    if (type == "gaussian" || type == "uniform") {
        expect_keys(j, {"type", "n", "d", "mean", "sigma", "lo", "hi"}, ctx);
        const std::size_t n = static_cast<std::size_t>(positive(require(j, "n", ctx), ctx));
        const std::size_t d = static_cast<std::size_t>(positive(require(j, "d", ctx), ctx));
        DistributionSpec spec;
        if (type == "gaussian") {
            spec.kind = DistributionSpec::Kind::Gaussian;
            spec.mean = num_vec(require(j, "mean", ctx), ctx + ".mean");
            spec.sigma = num_vec(require(j, "sigma", ctx), ctx + ".sigma");
        } else {
            spec.kind = DistributionSpec::Kind::UniformBox;
            spec.lo = num_vec(require(j, "lo", ctx), ctx + ".lo");
            spec.hi = num_vec(require(j, "hi", ctx), ctx + ".hi");
        }
        return sample_initial(spec, n, seed, d);
    }
    if (type == "csv") {
        expect_keys(j, {"type", "d", "path"}, ctx);
        const std::string rel = require(j, "path", ctx).get<std::string>();
        const std::string path =
            std::filesystem::path(rel).is_absolute()
                ? rel
                : (std::filesystem::path(base_dir) / rel).string();
        const std::size_t d =
            static_cast<std::size_t>(positive(require(j, "d", ctx), ctx + ".d"));
        return PhaseMeasure(read_measure_csv(path), d);
    }
    throw ConfigError(ctx + ": unknown initial type '" + type + "'");
}

// ---- sticky -------------------------------------------------------------

StickyInitialData sticky_initial_from(const json& j, const InteractionPotential& w,
                                      std::uint64_t seed) {
    const std::string ctx = "initial";
    const std::string type = require(j, "type", ctx).get<std::string>();
    StickyInitialData data;
    data.w = w;
    if (type == "explicit") {
        expect_keys(j, {"type", "positions", "velocities", "masses"}, ctx);
        data.positions = num_vec(require(j, "positions", ctx), ctx);
        data.velocities = num_vec(require(j, "velocities", ctx), ctx);
        if (j.contains("masses"))
            data.masses = num_vec(j["masses"], ctx);
        else
            data.masses.assign(data.positions.size(), 1.0 / data.positions.size());
        data.validate();
        return data;
    }
    if (type == "seeded") {
        expect_keys(j, {"type", "n", "spread", "mass", "v0"}, ctx);
        const std::size_t n = static_cast<std::size_t>(positive(require(j, "n", ctx), ctx));
        const double spread = j.contains("spread") ? positive(j["spread"], ctx) : 2.0;
        Rng rng(seed);
        data.positions.resize(n);
        for (std::size_t i = 0; i < n; ++i)
            data.positions[i] = rng.uniform(-spread, spread);
        std::sort(data.positions.begin(), data.positions.end());
        for (std::size_t i = 1; i < n; ++i)  // enforce strict ordering
            if (data.positions[i] <= data.positions[i - 1])
                data.positions[i] = data.positions[i - 1] + 1e-9;
        std::string mass_kind = "equal";
        if (j.contains("mass")) mass_kind = j["mass"].get<std::string>();
        if (mass_kind == "equal") {
            data.masses.assign(n, 1.0 / n);
        } else if (mass_kind == "random") {
            data.masses.resize(n);
            double sum = 0.0;
            for (auto& m : data.masses) sum += (m = rng.uniform(0.5, 1.5));
            for (auto& m : data.masses) m /= sum;
        } else {
            throw ConfigError(ctx + ".mass: unknown kind '" + mass_kind + "'");
        }
        const json& jv = require(j, "v0", ctx);
        expect_keys(jv, {"family", "intercept", "slope", "breakpoints", "values"},
                    ctx + ".v0");
        const std::string family = require(jv, "family", ctx).get<std::string>();
        if (family == "affine") {
            AffineVelocity v0{num(require(jv, "intercept", ctx), ctx),
                              num(require(jv, "slope", ctx), ctx)};
            for (std::size_t i = 0; i < n; ++i)
                data.velocities.push_back(v0(data.positions[i]));
            data.v0_total_variation = [v0](double a, double b) {
                return v0.total_variation(a, b);
            };
        } else if (family == "piecewise_linear") {
            PiecewiseLinearVelocity v0(num_vec(require(jv, "breakpoints", ctx), ctx),
                                       num_vec(require(jv, "values", ctx), ctx));
            for (std::size_t i = 0; i < n; ++i)
                data.velocities.push_back(v0(data.positions[i]));
            data.v0_total_variation = [v0](double a, double b) {
                return v0.total_variation(a, b);
            };
        } else {
            throw ConfigError(ctx + ".v0: unknown family '" + family + "'");
        }
        data.validate();
        return data;
    }
    throw ConfigError(ctx + ": unknown initial type '" + type + "'");
}

// ---- elasto -------------------------------------------------------------

struct ElastoSetup {
    EigenBasis basis;
    StoredEnergy energy;
    std::vector<double> g, h;
    double mu;
};

ElastoSetup elasto_setup_from(const json& j) {
    const json& jd = require(j, "domain", "domain");
    expect_keys(jd, {"lengths"}, "domain");
    Box box{num_vec(require(jd, "lengths", "domain"), "domain.lengths")};
    const int modes = static_cast<int>(positive(require(j, "modes", "modes"), "modes"));
    int quad_order = 0;
    if (j.contains("quad_order"))
        quad_order = static_cast<int>(positive(j["quad_order"], "quad_order"));

    ElastoSetup setup{build_basis(box, modes, quad_order),
                      energy_from(require(j, "energy", "energy"), "energy", box.dim()),
                      {}, {}, 0.0};
    if (j.contains("mu")) {
        setup.mu = num(j["mu"], "mu");
        if (setup.mu < 0.0) throw ConfigError("mu: must be nonnegative");
    }
    const std::size_t d = box.dim();
    const std::size_t m = setup.basis.mode_count();
    const json& ji = require(j, "initial", "initial");
    const std::string type = require(ji, "type", "initial").get<std::string>();
    if (type == "coefficients") {
        expect_keys(ji, {"type", "g", "h"}, "initial");
        setup.g.assign(m * d, 0.0);
        setup.h.assign(m * d, 0.0);
        auto fill = [&](const json& arr, std::vector<double>& out) {
            std::size_t jmode = 0;
            for (const auto& row : arr) {
                if (jmode >= m) throw ConfigError("initial: more rows than modes");
                const auto v = row.is_array() ? num_vec(row, "initial")
                                              : std::vector<double>{num(row, "initial")};
                if (v.size() != d)
                    throw ConfigError("initial: coefficient rows must have d entries");
                for (std::size_t c = 0; c < d; ++c) out[jmode * d + c] = v[c];
                ++jmode;
            }
        };
        fill(require(ji, "g", "initial"), setup.g);
        fill(require(ji, "h", "initial"), setup.h);
        return setup;
    }
    if (type == "bump") {
        expect_keys(ji, {"type", "g_amplitude", "h_amplitude"}, "initial");
        const double ga = j.contains("initial") && ji.contains("g_amplitude")
                              ? num(ji["g_amplitude"], "initial")
                              : 1.0;
        const double ha = ji.contains("h_amplitude") ? num(ji["h_amplitude"], "initial")
                                                     : 0.0;
        auto bump = [&box](double amp, std::span<const double> x, std::span<double> out) {
            double v = amp;
            for (std::size_t c = 0; c < box.dim(); ++c) {
                const double l = box.lengths[c];
                v *= x[c] * (l - x[c]) / (l * l);
            }
            out[0] = v;
            for (std::size_t c = 1; c < out.size(); ++c) out[c] = 0.0;
        };
        setup.g = project_initial(
                      [&](std::span<const double> x, std::span<double> out) {
                          bump(ga, x, out);
                      },
                      setup.basis, d)
                      .coeffs;
        setup.h = project_initial(
                      [&](std::span<const double> x, std::span<double> out) {
                          bump(ha, x, out);
                      },
                      setup.basis, d)
                      .coeffs;
        return setup;
    }
    throw ConfigError("initial: unknown type '" + type + "'");
}

// ---- manifest -----------------------------------------------------------

void write_manifest(const std::string& dir, const ScenarioConfig& cfg,
                    const std::vector<std::string>& outputs, double wall_seconds,
                    const json& extra) {
    nlohmann::ordered_json m;
    m["schema_version"] = 1;
    m["kind"] = cfg.kind;
    m["library_version"] = kVersion;
    m["config"] = cfg.raw;
    m["outputs"] = outputs;
    for (const auto& [k, v] : extra.items()) m[k] = v;
    m["wall_time_seconds"] = wall_seconds;
    std::ofstream out(std::filesystem::path(dir) / "manifest.json");
    if (!out) throw std::runtime_error("cannot write manifest in " + dir);
    out << m.dump(2) << "\n";
}

}  // namespace

ScenarioConfig parse_config(const json& j, const std::string& source) {
    if (!j.is_object()) throw ConfigError(source + ": config must be an object");
    static const std::set<std::string> common = {
        "schema_version", "kind",          "seed",       "T",
        "dt",             "scheme",        "output_stride", "max_steps",
        "output_dir",     "tolerances"};
    std::set<std::string> allowed = common;
    const std::string kind = require(j, "kind", source).get<std::string>();
    if (kind == "newton") {
        allowed.insert({"potential", "initial", "interaction"});
    } else if (kind == "vlasov") {
        allowed.insert({"interaction", "initial", "write_snapshots"});
    } else if (kind == "sticky") {
        allowed.insert({"interaction", "initial", "epsilon_event", "epsilon_merge"});
    } else if (kind == "elasto") {
        allowed.insert({"energy", "domain", "modes", "quad_order", "mu", "initial",
                        "young"});
    } else {
        throw ConfigError(source + ": unknown kind '" + kind + "'");
    }
    expect_keys(j, allowed, source);
    const int version = static_cast<int>(num(require(j, "schema_version", source), source));
    if (version != 1)
        throw ConfigError(source + ": unsupported schema_version");
    positive(require(j, "T", source), source + ".T");
    check_tolerances(j);
    seed_from(j);
    integ_from(j, source);

    ScenarioConfig cfg;
    cfg.raw = j;
    cfg.kind = kind;
    cfg.source_path = source;
    if (j.contains("output_dir")) cfg.output_dir = j["output_dir"].get<std::string>();

    const std::string base_dir =
        source.empty() ? "." : std::filesystem::path(source).parent_path().string();
    // validate the kind-specific sections eagerly (fail fast at load time)
    const std::uint64_t seed = seed_from(j);
    if (kind == "newton") {
        const auto& ini = require(j, "initial", source);
        const ParticleSystemState s = newton_initial_from(ini, seed);
        const auto& pot = require(j, "potential", source);
        const std::string family = require(pot, "family", source).get<std::string>();
        if (family == "lifted")
            interaction_from(require(pot, "interaction", source), "potential.interaction");
        else
            newton_potential_from(pot, s.count(), s.dim);
    } else if (kind == "vlasov") {
        interaction_from(require(j, "interaction", source), "interaction");
        vlasov_initial_from(require(j, "initial", source), seed, base_dir);
    } else if (kind == "sticky") {
        const InteractionPotential w =
            interaction_from(require(j, "interaction", source), "interaction");
        if (w.dim != 1) throw ConfigError("sticky: interaction must live on R");
        sticky_initial_from(require(j, "initial", source), w, seed);
        if (j.contains("epsilon_event")) positive(j["epsilon_event"], "epsilon_event");
        if (j.contains("epsilon_merge")) positive(j["epsilon_merge"], "epsilon_merge");
    } else {
        elasto_setup_from(j);
        if (j.contains("young")) {
            expect_keys(j["young"], {"space_cells", "time_cells", "bins"}, "young");
        }
    }
    return cfg;
}

ScenarioConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ConfigError(path + ": JSON parse error: " + e.what());
    }
    return parse_config(j, path);
}

RunOutputs run_scenario(const ScenarioConfig& cfg,
                        const std::string& output_dir_override) {
    const auto t_start = std::chrono::steady_clock::now();
    const json& j = cfg.raw;
    const std::uint64_t seed = seed_from(j);
    const double T = positive(require(j, "T", "T"), "T");
    const IntegratorConfig integ = integ_from(j, "config");

    std::string dir = output_dir_override.empty() ? cfg.output_dir : output_dir_override;
    if (dir.empty()) dir = "semiflow_out";
    std::filesystem::create_directories(dir);
    const auto path_in = [&](const std::string& name) {
        return (std::filesystem::path(dir) / name).string();
    };

    RunOutputs outputs;
    json extra = json::object();

    if (cfg.kind == "newton") {
        ParticleSystemState s0 = newton_initial_from(require(j, "initial", "initial"), seed);
        const json& pot = require(j, "potential", "potential");
        const std::string family = require(pot, "family", "potential").get<std::string>();
        SemiconvexPotential V;
        if (family == "lifted")
            V = lift_potential(
                interaction_from(require(pot, "interaction", "potential"), "interaction"),
                s0.masses);
        else
            V = newton_potential_from(pot, s0.count(), s0.dim);
        const Trajectory traj = integrate(V, s0, T, integ);
        write_trajectory_csv(traj, path_in("trajectory.csv"));
        outputs.files.push_back(path_in("trajectory.csv"));
        extra["masses"] = s0.masses;
        extra["final_energy"] = total_energy(traj.states.back(), V);
    } else if (cfg.kind == "vlasov") {
        const InteractionPotential w =
            interaction_from(require(j, "interaction", "interaction"), "interaction");
        const std::string base_dir =
            cfg.source_path.empty()
                ? "."
                : std::filesystem::path(cfg.source_path).parent_path().string();
        const PhaseMeasure f0 =
            vlasov_initial_from(require(j, "initial", "initial"), seed, base_dir);
        const VlasovSeries series = simulate(f0, w, T, integ);

        // trajectory CSV carries the full particle history
        Trajectory traj;
        traj.dt = integ.dt;
        traj.scheme = integ.scheme;
        for (const auto& f : series.snapshots) {
            ParticleSystemState st;
            st.dim = f.dim;
            st.time = f.time;
            st.masses = f.measure.weights();
            for (std::size_t i = 0; i < f.count(); ++i) {
                auto xi = f.x(i);
                auto vi = f.v(i);
                st.positions.insert(st.positions.end(), xi.begin(), xi.end());
                st.velocities.insert(st.velocities.end(), vi.begin(), vi.end());
            }
            traj.states.push_back(std::move(st));
        }
        write_trajectory_csv(traj, path_in("trajectory.csv"));
        outputs.files.push_back(path_in("trajectory.csv"));

        bool snapshots = false;
        if (j.contains("write_snapshots")) snapshots = j["write_snapshots"].get<bool>();
        if (snapshots) {
            std::filesystem::create_directories(path_in("snapshots"));
            for (std::size_t k = 0; k < series.snapshots.size(); ++k) {
                char name[64];
                std::snprintf(name, sizeof(name), "snapshots/snap_%05zu.csv", k);
                write_measure_csv(series.snapshots[k].measure, path_in(name));
                outputs.files.push_back(path_in(name));
            }
        }
        double x2 = 0.0, v2 = 0.0;
        for (std::size_t i = 0; i < f0.count(); ++i) {
            for (double a : f0.x(i)) x2 += f0.mass(i) * a * a;
            for (double a : f0.v(i)) v2 += f0.mass(i) * a * a;
        }
        extra["initial_moments"] = {{"x2", x2}, {"v2", v2}};
        extra["masses"] = f0.measure.weights();
        extra["interaction"] = {{"family", w.family}, {"kappa", w.kappa},
                                {"modulus", w.modulus}};
    } else if (cfg.kind == "sticky") {
        const InteractionPotential w =
            interaction_from(require(j, "interaction", "interaction"), "interaction");
        const StickyInitialData data =
            sticky_initial_from(require(j, "initial", "initial"), w, seed);
        StickyConfig scfg;
        scfg.base = integ;
        if (j.contains("epsilon_event"))
            scfg.epsilon_event = positive(j["epsilon_event"], "epsilon_event");
        if (j.contains("epsilon_merge"))
            scfg.epsilon_merge = positive(j["epsilon_merge"], "epsilon_merge");
        const FlowMap fm = evolve(data, T, scfg);
        write_flow_csv(fm, path_in("flow.csv"));
        outputs.files.push_back(path_in("flow.csv"));
        {
            std::ofstream out(path_in("events.json"));
            out << events_json(fm);
        }
        outputs.files.push_back(path_in("events.json"));
        extra["events_count"] = fm.events().size();
    } else {  // elasto
        const ElastoSetup setup = elasto_setup_from(j);
        const GalerkinSeries series = evolve_galerkin(
            setup.g, setup.h, setup.energy, setup.basis, T, integ, setup.mu);
        write_modes_csv(series, path_in("modes.csv"));
        outputs.files.push_back(path_in("modes.csv"));
        if (j.contains("young")) {
            const json& jy = j["young"];
            CellDecomposition cells;
            if (jy.contains("space_cells"))
                cells.space_cells = static_cast<int>(positive(jy["space_cells"], "young"));
            if (jy.contains("time_cells"))
                cells.time_cells = static_cast<int>(positive(jy["time_cells"], "young"));
            int bins = setup.basis.domain.dim() == 1 ? 32 : 8;
            if (jy.contains("bins")) bins = static_cast<int>(positive(jy["bins"], "young"));
            const YoungHistogram hist =
                young_histogram(series, setup.basis, setup.energy, cells, bins);
            std::ofstream out(path_in("young.json"));
            out << young_histogram_json(hist);
            outputs.files.push_back(path_in("young.json"));
        }
        const EnergyLedger ledger = energy_report(series, setup.energy, setup.basis);
        extra["energy"] = {{"initial", ledger.energy.front()},
                           {"final", ledger.energy.back()},
                           {"max_identity_residual", ledger.max_identity_residual}};
    }

    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
            .count();
    write_manifest(dir, cfg, outputs.files, wall, extra);
    outputs.files.push_back(path_in("manifest.json"));
    return outputs;
}

namespace {

// One ladder entry: the spatial measures this run can produce at the
// candidate times (sticky flow maps support any time, particle runs only
// their stored snapshot grid).
struct LadderRun {
    std::vector<bool> supported;
    std::vector<EmpiricalMeasure> measures;  // indexed like the candidates,
                                             // dummy entry when unsupported
};

LadderRun measures_at_times(const ScenarioConfig& cfg, const json& overridden,
                            const std::vector<double>& times) {
    const std::uint64_t seed = seed_from(overridden);
    const double T = num(overridden["T"], "T");
    const IntegratorConfig integ = integ_from(overridden, "config");
    LadderRun run;
    if (cfg.kind == "vlasov") {
        const InteractionPotential w =
            interaction_from(overridden["interaction"], "interaction");
        const std::string base_dir =
            cfg.source_path.empty()
                ? "."
                : std::filesystem::path(cfg.source_path).parent_path().string();
        const PhaseMeasure f0 = vlasov_initial_from(overridden["initial"], seed, base_dir);
        const VlasovSeries series = simulate(f0, w, T, integ);
        for (double t : times) {
            bool found = false;
            for (const auto& f : series.snapshots)
                if (std::fabs(f.time - t) <= 1e-9) {
                    run.measures.push_back(f.spatial_marginal());
                    found = true;
                    break;
                }
            if (!found) run.measures.push_back(EmpiricalMeasure::dirac({0.0}));
            run.supported.push_back(found);
        }
        return run;
    }
    if (cfg.kind == "sticky") {
        const InteractionPotential w =
            interaction_from(overridden["interaction"], "interaction");
        const StickyInitialData data =
            sticky_initial_from(overridden["initial"], w, seed);
        StickyConfig scfg;
        scfg.base = integ;
        const FlowMap fm = evolve(data, T, scfg);
        for (double t : times) {
            const auto cv = fm.clusters_right(t);
            run.measures.emplace_back(cv.position, 1, std::vector<double>(cv.mass));
            run.supported.push_back(true);
        }
        return run;
    }
    throw ConfigError("convergence_study: ladder parameter unsupported for kind '" +
                      cfg.kind + "'");
}

// fixed seeded dictionary for distances between multi-dimensional marginals
LipschitzDictionary LadderDict(std::size_t dim) {
    return LipschitzDictionary(dim, 32, 20240901);
}

}  // namespace

void convergence_study(const ScenarioConfig& cfg, const LadderSpec& ladder,
                       std::ostream& out) {
    if (ladder.values.size() < 2)
        throw ConfigError("convergence_study: ladder needs at least two values");
    const double T = num(cfg.raw.at("T"), "T");

    if (ladder.parameter == "modes") {
        if (cfg.kind != "elasto")
            throw ConfigError("convergence_study: modes ladder requires kind elasto");
        out << "parameter,lo,hi,time,distance\n";
        std::vector<GalerkinSeries> runs;
        std::vector<EigenBasis> bases;
        for (double v : ladder.values) {
            json o = cfg.raw;
            o["modes"] = static_cast<int>(v);
            const ElastoSetup setup = elasto_setup_from(o);
            runs.push_back(evolve_galerkin(setup.g, setup.h, setup.energy, setup.basis,
                                           T, integ_from(o, "config"), setup.mu));
            bases.push_back(setup.basis);
        }
        for (std::size_t k = 0; k + 1 < runs.size(); ++k) {
            const int order = 2 * static_cast<int>(ladder.values.back()) + 12;
            const double dist = cauchy_gradient_check(runs[k], bases[k], runs[k + 1],
                                                      bases[k + 1], order);
            out << "modes," << format_double(ladder.values[k]) << ","
                << format_double(ladder.values[k + 1]) << "," << format_double(T)
                << "," << format_double(dist) << "\n";
        }
        return;
    }

    if (ladder.parameter != "dt" && ladder.parameter != "n")
        throw ConfigError("convergence_study: unknown ladder parameter '" +
                          ladder.parameter + "'");
    std::vector<double> times;
    for (int k = 1; k <= 8; ++k) times.push_back(T * k / 8.0);

    std::vector<LadderRun> runs;
    for (double v : ladder.values) {
        json o = cfg.raw;
        if (ladder.parameter == "dt") {
            o["dt"] = v;
        } else {
            if (!o["initial"].contains("n"))
                throw ConfigError("convergence_study: initial spec has no particle count");
            o["initial"]["n"] = static_cast<int>(v);
        }
        runs.push_back(measures_at_times(cfg, o, times));
    }
    out << "parameter,lo,hi,time,distance\n";
    for (std::size_t k = 0; k + 1 < runs.size(); ++k)
        for (std::size_t ti = 0; ti < times.size(); ++ti) {
            if (!runs[k].supported[ti] || !runs[k + 1].supported[ti]) continue;
            const EmpiricalMeasure& a = runs[k].measures[ti];
            const EmpiricalMeasure& b = runs[k + 1].measures[ti];
            const double dist =
                a.dim() == 1
                    ? wasserstein1_1d(a, b)
                    : bl_distance(a, b, LadderDict(a.dim()));
            out << ladder.parameter << "," << format_double(ladder.values[k]) << ","
                << format_double(ladder.values[k + 1]) << ","
                << format_double(times[ti]) << "," << format_double(dist) << "\n";
        }
}

}  // namespace semiflow
