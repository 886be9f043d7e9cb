#include "semiflow/sticky.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <stdexcept>

#include "semiflow/csvio.hpp"
#include "semiflow/exec.hpp"

#include "json.hpp"

namespace semiflow {

PiecewiseLinearVelocity::PiecewiseLinearVelocity(std::vector<double> bp,
                                                 std::vector<double> val)
    : breakpoints(std::move(bp)), values(std::move(val)) {
    if (breakpoints.size() != values.size() || breakpoints.size() < 2)
        throw std::invalid_argument("PiecewiseLinearVelocity: need >= 2 breakpoints");
    for (std::size_t i = 1; i < breakpoints.size(); ++i)
        if (!(breakpoints[i] > breakpoints[i - 1]))
            throw std::invalid_argument(
                "PiecewiseLinearVelocity: breakpoints must increase");
}

double PiecewiseLinearVelocity::operator()(double x) const {
    if (x <= breakpoints.front()) return values.front();
    if (x >= breakpoints.back()) return values.back();
    const auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), x);
    const std::size_t k = it - breakpoints.begin();
    const double t = (x - breakpoints[k - 1]) / (breakpoints[k] - breakpoints[k - 1]);
    return values[k - 1] + t * (values[k] - values[k - 1]);
}

double PiecewiseLinearVelocity::total_variation(double a, double b) const {
    if (b < a) std::swap(a, b);
    double tv = 0.0, prev = (*this)(a);
    for (std::size_t k = 0; k < breakpoints.size(); ++k) {
        const double x = breakpoints[k];
        if (x <= a || x >= b) continue;
        const double v = (*this)(x);
        tv += std::fabs(v - prev);
        prev = v;
    }
    tv += std::fabs((*this)(b)-prev);
    return tv;
}

void StickyInitialData::validate() const {
    const std::size_t n = masses.size();
    if (n == 0) throw std::invalid_argument("StickyInitialData: empty system");
    if (positions.size() != n || velocities.size() != n)
        throw std::invalid_argument("StickyInitialData: size mismatch");
    if (w.dim != 1)
        throw std::invalid_argument("StickyInitialData: interaction must live on R");
    for (std::size_t i = 1; i < n; ++i)
        if (!(positions[i] > positions[i - 1]))
            throw std::invalid_argument(
                "StickyInitialData: positions must be strictly increasing");
    double sum = 0.0;
    for (double m : masses) {
        if (!(m > 0.0))
            throw std::invalid_argument("StickyInitialData: masses must be positive");
        sum += m;
    }
    if (std::fabs(sum - 1.0) > 1e-12)
        throw std::invalid_argument("StickyInitialData: masses must sum to 1 within 1e-12");
    for (double v : velocities)
        if (!std::isfinite(v))
            throw std::invalid_argument("StickyInitialData: non-finite velocity");
}

namespace {

struct ClusterDyn {
    const InteractionPotential* w;
    const std::vector<double>* mass;

    void accel(const std::vector<double>& p, std::vector<double>& a) const {
        a.resize(p.size());
        pairwise_accel(
            p.size(), 1, p.data(), mass->data(),
            [this](std::span<const double> z, std::span<double> g) { w->dw(z, g); },
            a.data(), exec_mode());
    }
};

struct ClusterState {
    std::vector<double> p, u, q;  // q: force integral since segment start
};

// One step of the position/velocity dynamics only.
void step_core(const ClusterDyn& dyn, std::vector<double>& p,
               std::vector<double>& u, double h, Scheme scheme) {
    const std::size_t n = p.size();
    std::vector<double> a(n);
    if (scheme == Scheme::VelocityVerlet) {
        dyn.accel(p, a);
        for (std::size_t i = 0; i < n; ++i) u[i] += 0.5 * h * a[i];
        for (std::size_t i = 0; i < n; ++i) p[i] += h * u[i];
        dyn.accel(p, a);
        for (std::size_t i = 0; i < n; ++i) u[i] += 0.5 * h * a[i];
        return;
    }
    std::vector<double> k1v(n), k2v(n), k3v(n), k4v(n), pt(n), ut(n);
    const std::vector<double> k1p = u;
    dyn.accel(p, k1v);
    for (std::size_t i = 0; i < n; ++i) {
        pt[i] = p[i] + 0.5 * h * k1p[i];
        ut[i] = u[i] + 0.5 * h * k1v[i];
    }
    const std::vector<double> k2p = ut;
    dyn.accel(pt, k2v);
    for (std::size_t i = 0; i < n; ++i) {
        pt[i] = p[i] + 0.5 * h * k2p[i];
        ut[i] = u[i] + 0.5 * h * k2v[i];
    }
    const std::vector<double> k3p = ut;
    dyn.accel(pt, k3v);
    for (std::size_t i = 0; i < n; ++i) {
        pt[i] = p[i] + h * k3p[i];
        ut[i] = u[i] + h * k3v[i];
    }
    const std::vector<double> k4p = ut;
    dyn.accel(pt, k4v);
    for (std::size_t i = 0; i < n; ++i) {
        p[i] += h / 6.0 * (k1p[i] + 2.0 * k2p[i] + 2.0 * k3p[i] + k4p[i]);
        u[i] += h / 6.0 * (k1v[i] + 2.0 * k2v[i] + 2.0 * k3v[i] + k4v[i]);
    }
}

// Step with Simpson accumulation of the per-cluster force integral
// q' = (W'*rho)(p) = -accel. The midpoint state comes from the cubic
// Hermite interpolant of the step, keeping the quadrature O(h^4) globally
// yet independent of the integrator's own stage combination.
void advance(const ClusterDyn& dyn, ClusterState& s, double h, Scheme scheme) {
    const std::size_t n = s.p.size();
    std::vector<double> a0(n), amid(n), aend(n), pmid(n);
    dyn.accel(s.p, a0);
    const std::vector<double> p0 = s.p, u0 = s.u;
    step_core(dyn, s.p, s.u, h, scheme);
    for (std::size_t i = 0; i < n; ++i)
        pmid[i] = 0.5 * (p0[i] + s.p[i]) + 0.125 * h * (u0[i] - s.u[i]);
    dyn.accel(pmid, amid);
    dyn.accel(s.p, aend);
    for (std::size_t i = 0; i < n; ++i)
        s.q[i] += h / 6.0 * (-a0[i] - 4.0 * amid[i] - aend[i]);
}

}  // namespace

FlowMap evolve(const StickyInitialData& data, double T, const StickyConfig& cfg) {
    data.validate();
    if (!(T > 0.0)) throw std::invalid_argument("evolve: T must be positive");
    if (!(cfg.base.dt > 0.0)) throw std::invalid_argument("evolve: dt must be positive");

    const std::size_t n = data.count();
    const double dt = cfg.base.dt;

    FlowMap fm;
    fm.data_ = data;
    fm.config_ = cfg;
    fm.terminal_ = T;

    ClusterState state{data.positions, data.velocities,
                       std::vector<double>(n, 0.0)};
    std::vector<double> cluster_mass = data.masses;
    std::vector<std::vector<int>> members(n);
    for (std::size_t i = 0; i < n; ++i) members[i] = {static_cast<int>(i)};
    std::vector<double> q_offset(n, 0.0);

    auto open_segment = [&](double t) {
        StickySegment seg;
        seg.t_begin = t;
        seg.t_end = t;
        seg.cluster_mass = cluster_mass;
        seg.q_offset = q_offset;
        seg.cluster_of.assign(n, 0);
        for (std::size_t c = 0; c < members.size(); ++c) {
            seg.representative.push_back(members[c].front());
            for (int i : members[c]) seg.cluster_of[i] = static_cast<int>(c);
        }
        fm.segments_.push_back(std::move(seg));
    };
    auto record = [&](double t) {
        StickySegment& seg = fm.segments_.back();
        seg.times.push_back(t);
        seg.pos.push_back(state.p);
        seg.vel.push_back(state.u);
        seg.fint.push_back(state.q);
        seg.t_end = t;
    };

    ClusterDyn dyn{&data.w, &cluster_mass};
    open_segment(0.0);
    record(0.0);

    double t = 0.0;
    std::size_t steps = 0;
    const double t_stop = T - 1e-12 * std::max(1.0, T);
    while (t < t_stop) {
        if (++steps > cfg.base.max_steps)
            throw std::runtime_error("evolve: step count exceeds max_steps");
        double target = std::floor(t / dt + 1.0 + 1e-9) * dt;
        target = std::min(target, T);
        const double h = target - t;

        ClusterState trial = state;
        step_core(dyn, trial.p, trial.u, h, cfg.base.scheme);
        bool crossing = false;
        for (std::size_t c = 0; c + 1 < trial.p.size(); ++c)
            if (!(trial.p[c + 1] - trial.p[c] > 0.0)) crossing = true;

        if (!crossing) {
            advance(dyn, state, h, cfg.base.scheme);
            t = target;
            record(t);
            continue;
        }

        // locate the earliest crossing among the flagged adjacent pairs
        double h_star = h;
        for (std::size_t c = 0; c + 1 < trial.p.size(); ++c) {
            if (trial.p[c + 1] - trial.p[c] > 0.0) continue;
            double lo = 0.0, hi = h;
            while (hi - lo > cfg.epsilon_event) {
                const double mid = 0.5 * (lo + hi);
                std::vector<double> pm = state.p, um = state.u;
                step_core(dyn, pm, um, mid, cfg.base.scheme);
                if (pm[c + 1] - pm[c] <= 0.0)
                    hi = mid;
                else
                    lo = mid;
            }
            h_star = std::min(h_star, hi);
        }

        advance(dyn, state, h_star, cfg.base.scheme);
        t += h_star;
        record(t);

        // transitive closure of the merge relation over adjacent gaps
        for (std::size_t i = 0; i < n; ++i) {
            const int c = fm.segments_.back().cluster_of[i];
            q_offset[i] += state.q[c];
        }
        std::vector<std::vector<std::size_t>> groups;
        groups.push_back({0});
        for (std::size_t c = 1; c < state.p.size(); ++c) {
            if (state.p[c] - state.p[c - 1] <= cfg.epsilon_merge)
                groups.back().push_back(c);
            else
                groups.push_back({c});
        }
        ClusterState merged;
        std::vector<double> new_mass;
        std::vector<std::vector<int>> new_members;
        for (const auto& g : groups) {
            double M = 0.0, mp = 0.0, mu = 0.0;
            std::vector<int> mem;
            for (std::size_t c : g) {
                M += cluster_mass[c];
                mp += cluster_mass[c] * state.p[c];
                mu += cluster_mass[c] * state.u[c];
                mem.insert(mem.end(), members[c].begin(), members[c].end());
            }
            std::sort(mem.begin(), mem.end());
            const double pos = mp / M;
            const double vel = mu / M;
            if (g.size() > 1) {
                StickyEvent ev;
                ev.time = t;
                ev.merged_indices = mem;
                for (std::size_t c : g) {
                    ev.pre_velocities.push_back(state.u[c]);
                    ev.pre_masses.push_back(cluster_mass[c]);
                }
                ev.post_velocity = vel;
                ev.position = pos;
                fm.events_.push_back(std::move(ev));
                if (fm.events_.size() > n - 1)
                    throw std::logic_error("evolve: more merge events than N-1");
            }
            merged.p.push_back(pos);
            merged.u.push_back(vel);
            merged.q.push_back(0.0);
            new_mass.push_back(M);
            new_members.push_back(std::move(mem));
        }
        state = std::move(merged);
        cluster_mass = std::move(new_mass);
        members = std::move(new_members);
        open_segment(t);
        record(t);
    }
    return fm;
}

const StickySegment& FlowMap::segment_at(double t, bool prefer_left) const {
    const double tol = 1e-12 * std::max(1.0, terminal_);
    if (t < -tol || t > terminal_ + tol)
        throw std::invalid_argument("FlowMap: time outside [0, T]");
    t = std::clamp(t, 0.0, terminal_);
    for (std::size_t k = 0; k < segments_.size(); ++k) {
        const StickySegment& seg = segments_[k];
        if (t < seg.t_begin - tol) break;
        if (t > seg.t_end + tol) continue;
        // boundary shared with a neighbor: pick by side preference
        if (prefer_left && std::fabs(t - seg.t_begin) <= tol && k > 0)
            return segments_[k - 1];
        if (!prefer_left && std::fabs(t - seg.t_end) <= tol &&
            k + 1 < segments_.size() &&
            std::fabs(segments_[k + 1].t_begin - t) <= tol)
            return segments_[k + 1];
        return seg;
    }
    return segments_.back();
}

void FlowMap::locate(const StickySegment& seg, double t, std::vector<double>& p,
                     std::vector<double>& u, std::vector<double>& q) const {
    const double tol = 1e-12 * std::max(1.0, terminal_);
    auto it = std::lower_bound(seg.times.begin(), seg.times.end(), t - tol);
    std::size_t k = it - seg.times.begin();
    if (k >= seg.times.size()) k = seg.times.size() - 1;
    if (std::fabs(seg.times[k] - t) <= tol) {
        p = seg.pos[k];
        u = seg.vel[k];
        q = seg.fint[k];
        return;
    }
    if (k == 0)
        throw std::logic_error("FlowMap::locate: time below segment grid");
    --k;
    ClusterState s{seg.pos[k], seg.vel[k], seg.fint[k]};
    ClusterDyn dyn{&data_.w, &seg.cluster_mass};
    advance(dyn, s, t - seg.times[k], config_.base.scheme);
    p = std::move(s.p);
    u = std::move(s.u);
    q = std::move(s.q);
}

FlowMap::Eval FlowMap::eval_index(int initial_index, double t) const {
    if (initial_index < 0 || static_cast<std::size_t>(initial_index) >= data_.count())
        throw std::invalid_argument("FlowMap: unknown initial index");
    const StickySegment& left = segment_at(t, true);
    const StickySegment& right = segment_at(t, false);
    std::vector<double> p, u, q;
    locate(right, t, p, u, q);
    Eval out;
    out.position = p[right.cluster_of[initial_index]];
    out.velocity_right = u[right.cluster_of[initial_index]];
    if (&left == &right) {
        out.velocity_left = out.velocity_right;
    } else {
        std::vector<double> pl, ul, ql;
        locate(left, t, pl, ul, ql);
        out.velocity_left = ul[left.cluster_of[initial_index]];
    }
    return out;
}

FlowMap::Eval FlowMap::eval(double initial_position, double t) const {
    for (std::size_t i = 0; i < data_.count(); ++i)
        if (std::fabs(data_.positions[i] - initial_position) <= 1e-12)
            return eval_index(static_cast<int>(i), t);
    throw std::invalid_argument("FlowMap: position is not a support point of rho_0");
}

double FlowMap::position(int initial_index, double t) const {
    return eval_index(initial_index, t).position;
}

double FlowMap::force_integral(int initial_index, double t) const {
    if (initial_index < 0 || static_cast<std::size_t>(initial_index) >= data_.count())
        throw std::invalid_argument("FlowMap: unknown initial index");
    const StickySegment& seg = segment_at(t, true);
    std::vector<double> p, u, q;
    locate(seg, t, p, u, q);
    return seg.q_offset[initial_index] + q[seg.cluster_of[initial_index]];
}

int FlowMap::cluster_representative(int initial_index, double t) const {
    const StickySegment& seg = segment_at(t, false);
    return seg.representative[seg.cluster_of[initial_index]];
}

FlowMap::ClusterView FlowMap::clusters_right(double t) const {
    const StickySegment& seg = segment_at(t, false);
    ClusterView view;
    std::vector<double> q;
    locate(seg, t, view.position, view.velocity, q);
    view.mass = seg.cluster_mass;
    view.representative = seg.representative;
    return view;
}

bool FlowMap::is_event_time(double t, double tol) const {
    for (const auto& e : events_)
        if (std::fabs(e.time - t) <= tol) return true;
    return false;
}

double averaging_check(const FlowMap& fm, const std::function<double(double)>& g,
                       double s, double t) {
    if (!(0.0 <= s && s < t && t <= fm.terminal_time()))
        throw std::invalid_argument("averaging_check: need 0 <= s < t <= T");
    const double tol = fm.config().epsilon_event;
    if ((s > 0.0 && fm.is_event_time(s, tol)) || fm.is_event_time(t, tol))
        throw std::invalid_argument(
            "averaging_check: s and t must not be event times");
    const std::size_t n = fm.initial().count();
    double lhs = 0.0, rhs = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto et = fm.eval_index(static_cast<int>(i), t);
        const auto es = fm.eval_index(static_cast<int>(i), s);
        const double dq = fm.force_integral(static_cast<int>(i), t) -
                          fm.force_integral(static_cast<int>(i), s);
        const double m = fm.initial().masses[i];
        const double gv = g(et.position);
        lhs += m * gv * et.velocity_right;
        rhs += m * gv * (es.velocity_right - dq);
    }
    return std::fabs(lhs - rhs);
}

double entropy_check(const FlowMap& fm, double t) {
    if (!(t > 0.0))
        throw std::invalid_argument("entropy_check: bound degenerates at t = 0");
    const double L = fm.initial().w.modulus;
    if (!(L > 0.0))
        throw std::invalid_argument("entropy_check: requires a potential with L > 0");
    const auto cv = fm.clusters_right(t);
    const double factor = std::sqrt(L) / std::tanh(std::sqrt(L) * t);
    double worst = 0.0;
    for (std::size_t a = 0; a < cv.position.size(); ++a)
        for (std::size_t b = a + 1; b < cv.position.size(); ++b) {
            const double dx = cv.position[a] - cv.position[b];
            const double dv = cv.velocity[a] - cv.velocity[b];
            worst = std::max(worst,
                             (dv * dx - factor * dx * dx) / (1.0 + dx * dx));
        }
    return worst;
}

double qspp_check(const FlowMap& fm, double s, double t) {
    if (!(s > 0.0))
        throw std::invalid_argument("qspp_check: requires s > 0");
    if (!(s <= t)) throw std::invalid_argument("qspp_check: requires s <= t");
    const double L = fm.initial().w.modulus;
    if (!(L > 0.0))
        throw std::invalid_argument("qspp_check: requires a potential with L > 0");
    const std::size_t n = fm.initial().count();
    std::vector<double> ps(n), pt(n);
    for (std::size_t i = 0; i < n; ++i) {
        ps[i] = fm.position(static_cast<int>(i), s);
        pt[i] = fm.position(static_cast<int>(i), t);
    }
    const double sl = std::sinh(std::sqrt(L) * s);
    const double tl = std::sinh(std::sqrt(L) * t);
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            worst = std::max(worst, std::fabs(pt[i] - pt[j]) / tl -
                                        std::fabs(ps[i] - ps[j]) / sl);
    return worst;
}

double time_zero_bound_check(const FlowMap& fm, double t) {
    if (t < 0.0) throw std::invalid_argument("time_zero_bound_check: t must be >= 0");
    if (!fm.initial().v0_total_variation)
        throw std::invalid_argument(
            "time_zero_bound_check: initial data has no v0 total variation");
    const double L = fm.initial().w.modulus;
    if (!(L > 0.0))
        throw std::invalid_argument(
            "time_zero_bound_check: requires a potential with L > 0");
    const std::size_t n = fm.initial().count();
    std::vector<double> pt(n);
    for (std::size_t i = 0; i < n; ++i) pt[i] = fm.position(static_cast<int>(i), t);
    const double rl = std::sqrt(L);
    const double ch = std::cosh(rl * t);
    const double sh = std::sinh(rl * t) / rl;
    double worst = 0.0;
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = j + 1; i < n; ++i) {
            const double dx0 = fm.initial().positions[i] - fm.initial().positions[j];
            const double tv = fm.initial().v0_total_variation(
                fm.initial().positions[j], fm.initial().positions[i]);
            worst = std::max(worst, (pt[i] - pt[j]) - (ch * dx0 + sh * tv));
        }
    return worst;
}

namespace {

double cluster_energy(const InteractionPotential& w,
                      const std::vector<double>& mass,
                      const std::vector<double>& p,
                      const std::vector<double>& u) {
    double kinetic = 0.0;
    for (std::size_t c = 0; c < mass.size(); ++c)
        kinetic += 0.5 * mass[c] * u[c] * u[c];
    double potential = 0.0;
    std::vector<double> z(1);
    for (std::size_t c = 0; c < mass.size(); ++c)
        for (std::size_t cc = 0; cc < mass.size(); ++cc) {
            z[0] = p[c] - p[cc];
            potential += 0.5 * mass[c] * mass[cc] * w.w(z);
        }
    return kinetic + potential;
}

}  // namespace

std::vector<EnergySample> energy_series(const FlowMap& fm) {
    std::vector<EnergySample> out;
    const double out_dt = fm.config().base.dt * fm.config().base.output_stride;
    for (const auto& seg : fm.segments()) {
        for (std::size_t k = 0; k < seg.times.size(); ++k) {
            const double t = seg.times[k];
            const bool boundary = (k == 0 || k + 1 == seg.times.size());
            const bool on_grid =
                std::fabs(t / out_dt - std::round(t / out_dt)) < 1e-9;
            if (!boundary && !on_grid) continue;
            EnergySample es;
            es.time = t;
            es.energy = cluster_energy(fm.initial().w, seg.cluster_mass,
                                       seg.pos[k], seg.vel[k]);
            es.post_event = (k == 0 && fm.is_event_time(t, fm.config().epsilon_event));
            out.push_back(es);
        }
    }
    return out;
}

EulerResidual euler_weak_residual(const FlowMap& fm,
                                  const SpaceTimeTestFunction& phi) {
    double mass_int = 0.0, mom_int = 0.0, src_int = 0.0;
    std::vector<double> z(1), g(1);
    for (const auto& seg : fm.segments()) {
        double prev_t = 0.0, prev_g1 = 0.0, prev_g2 = 0.0, prev_g3 = 0.0;
        for (std::size_t k = 0; k < seg.times.size(); ++k) {
            const double t = seg.times[k];
            double g1 = 0.0, g2 = 0.0, g3 = 0.0;
            for (std::size_t c = 0; c < seg.cluster_mass.size(); ++c) {
                const double x = seg.pos[k][c];
                const double u = seg.vel[k][c];
                const double M = seg.cluster_mass[c];
                const double pt = phi.dt(x, t);
                const double px = phi.dx(x, t);
                g1 += M * (pt + u * px);
                g2 += M * (u * pt + u * u * px);
                double conv = 0.0;
                for (std::size_t cc = 0; cc < seg.cluster_mass.size(); ++cc) {
                    if (cc == c) continue;
                    z[0] = x - seg.pos[k][cc];
                    fm.initial().w.dw(z, std::span<double>(g));
                    conv += seg.cluster_mass[cc] * g[0];
                }
                g3 += M * phi.phi(x, t) * conv;
            }
            if (k > 0) {
                const double h = t - prev_t;
                mass_int += 0.5 * h * (g1 + prev_g1);
                mom_int += 0.5 * h * (g2 + prev_g2);
                src_int += 0.5 * h * (g3 + prev_g3);
            }
            prev_t = t;
            prev_g1 = g1;
            prev_g2 = g2;
            prev_g3 = g3;
        }
    }
    double phi0 = 0.0, phi0v = 0.0;
    for (std::size_t i = 0; i < fm.initial().count(); ++i) {
        const double m = fm.initial().masses[i];
        const double x = fm.initial().positions[i];
        phi0 += m * phi.phi(x, 0.0);
        phi0v += m * phi.phi(x, 0.0) * fm.initial().velocities[i];
    }
    return {std::fabs(mass_int + phi0), std::fabs(mom_int + phi0v - src_int)};
}

double conditional_velocity_check(const FlowMap& fm, double t) {
    if (fm.is_event_time(t, fm.config().epsilon_event))
        throw std::invalid_argument(
            "conditional_velocity_check: t must not be an event time");
    const auto cv = fm.clusters_right(t);
    const std::size_t n = fm.initial().count();
    double worst = 0.0;
    for (std::size_t c = 0; c < cv.mass.size(); ++c) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (fm.cluster_representative(static_cast<int>(i), t) !=
                cv.representative[c])
                continue;
            acc += fm.initial().masses[i] *
                   (fm.initial().velocities[i] -
                    fm.force_integral(static_cast<int>(i), t));
        }
        worst = std::max(worst, std::fabs(cv.velocity[c] - acc / cv.mass[c]));
    }
    return worst;
}

void write_flow_csv(const FlowMap& fm, std::ostream& out) {
    out << "t,cluster_id,position,velocity_left,velocity_right,mass\n";
    const double out_dt = fm.config().base.dt * fm.config().base.output_stride;
    for (const auto& seg : fm.segments()) {
        for (std::size_t k = 0; k < seg.times.size(); ++k) {
            const double t = seg.times[k];
            const bool boundary = (k == 0 || k + 1 == seg.times.size());
            const bool on_grid =
                std::fabs(t / out_dt - std::round(t / out_dt)) < 1e-9;
            const bool post_event =
                (k == 0 && fm.is_event_time(t, fm.config().epsilon_event));
            if (!on_grid && !post_event && !(boundary && k + 1 == seg.times.size() &&
                                             std::fabs(t - fm.terminal_time()) < 1e-12))
                continue;
            if (boundary && k + 1 == seg.times.size() &&
                fm.is_event_time(t, fm.config().epsilon_event))
                continue;  // the post-merge segment emits this instant
            for (std::size_t c = 0; c < seg.cluster_mass.size(); ++c) {
                double vleft = seg.vel[k][c];
                if (post_event) {
                    // left limit: the pre-merge velocity of this cluster's
                    // representative
                    const auto ev = fm.eval_index(seg.representative[c], t);
                    vleft = ev.velocity_left;
                }
                out << format_double(t) << "," << seg.representative[c] << ","
                    << format_double(seg.pos[k][c]) << "," << format_double(vleft)
                    << "," << format_double(seg.vel[k][c]) << ","
                    << format_double(seg.cluster_mass[c]) << "\n";
            }
        }
    }
}

void write_flow_csv(const FlowMap& fm, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    write_flow_csv(fm, out);
}

std::string events_json(const FlowMap& fm) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& e : fm.events()) {
        nlohmann::ordered_json ev;
        ev["time"] = e.time;
        ev["merged_indices"] = e.merged_indices;
        ev["pre_velocities"] = e.pre_velocities;
        ev["pre_masses"] = e.pre_masses;
        ev["post_velocity"] = e.post_velocity;
        ev["position"] = e.position;
        arr.push_back(std::move(ev));
    }
    return arr.dump(2) + "\n";
}

}  // namespace semiflow
