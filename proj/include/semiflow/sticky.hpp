#ifndef SEMIFLOW_STICKY_HPP
#define SEMIFLOW_STICKY_HPP

#include <cmath>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "semiflow/jeans_vlasov.hpp"
#include "semiflow/newton.hpp"

namespace semiflow {

// Initial velocity fields with an analytic total variation, for the
// time-zero separation bound.
struct AffineVelocity {
    double intercept = 0.0, slope = 0.0;
    double operator()(double x) const { return intercept + slope * x; }
    double total_variation(double a, double b) const {
        return std::abs(slope) * (b - a);
    }
};

struct PiecewiseLinearVelocity {
    std::vector<double> breakpoints;  // strictly increasing
    std::vector<double> values;       // same length; affine between, constant outside
    PiecewiseLinearVelocity(std::vector<double> bp, std::vector<double> val);
    double operator()(double x) const;
    double total_variation(double a, double b) const;
};

struct StickyInitialData {
    std::vector<double> positions;   // strictly increasing
    std::vector<double> velocities;  // v0(x_i)
    std::vector<double> masses;      // positive, sum 1 within 1e-12
    InteractionPotential w;          // on R
    // optional: (a,b) -> int_a^b |v0'|; required by time_zero_bound_check
    std::function<double(double, double)> v0_total_variation;
    void validate() const;
    std::size_t count() const { return masses.size(); }
};

struct StickyConfig {
    IntegratorConfig base{1e-3, Scheme::Rk4, 50000000, 10};
    double epsilon_event = 1e-10;  // time bracket width for event bisection
    double epsilon_merge = 1e-9;   // spatial threshold for merging at an event
};

struct StickyEvent {
    double time;
    std::vector<int> merged_indices;     // initial indices, ascending
    std::vector<double> pre_velocities;  // per merging cluster, position order
    std::vector<double> pre_masses;      // aligned with pre_velocities
    double post_velocity;
    double position;
};

// One inter-event interval of the evolution. Fine-grid samples land on the
// global dt grid plus the two segment ends. force_integral accumulates
// int (W'*rho_s)(gamma(s)) ds from the segment start (rk4-integrated
// alongside the dynamics), per cluster.
struct StickySegment {
    double t_begin, t_end;
    std::vector<int> representative;  // per cluster, smallest initial index
    std::vector<double> cluster_mass;
    std::vector<int> cluster_of;      // initial index -> cluster id
    std::vector<double> times;
    std::vector<std::vector<double>> pos, vel, fint;  // [sample][cluster]
    std::vector<double> q_offset;     // per initial index, force integral at t_begin
};

// Sticky particle flow map: per-initial-particle trajectory with cluster
// membership over time. Immutable once built.
class FlowMap {
  public:
    struct Eval {
        double position;
        double velocity_left, velocity_right;
    };

    Eval eval_index(int initial_index, double t) const;
    Eval eval(double initial_position, double t) const;
    double position(int initial_index, double t) const;
    // int_0^t (W'*rho_s)(gamma_i(s)) ds
    double force_integral(int initial_index, double t) const;
    int cluster_representative(int initial_index, double t) const;

    struct ClusterView {
        std::vector<double> position, velocity, mass;
        std::vector<int> representative;
    };
    ClusterView clusters_right(double t) const;

    bool is_event_time(double t, double tol) const;
    const std::vector<StickyEvent>& events() const { return events_; }
    const std::vector<StickySegment>& segments() const { return segments_; }
    double terminal_time() const { return terminal_; }
    const StickyInitialData& initial() const { return data_; }
    const StickyConfig& config() const { return config_; }

  private:
    friend FlowMap evolve(const StickyInitialData&, double, const StickyConfig&);
    StickyInitialData data_;
    StickyConfig config_;
    std::vector<StickySegment> segments_;
    std::vector<StickyEvent> events_;
    double terminal_ = 0.0;

    const StickySegment& segment_at(double t, bool prefer_left) const;
    void locate(const StickySegment& seg, double t, std::vector<double>& p,
                std::vector<double>& u, std::vector<double>& q) const;
};

FlowMap evolve(const StickyInitialData& data, double T, const StickyConfig& cfg);

// Residual of the averaging identity between non-event times s < t with the
// supplied observable g.
double averaging_check(const FlowMap& fm, const std::function<double(double)>& g,
                       double s, double t);

// Max over support pairs of the one-sided velocity (Oleinik-type) bound at
// t > 0, normalized by 1 + (x-y)^2. Requires L > 0.
double entropy_check(const FlowMap& fm, double t);

// Max over initial pairs of the scaled-separation ratio increase between
// 0 < s <= t. Requires L > 0.
double qspp_check(const FlowMap& fm, double s, double t);

// Max over ordered initial pairs of the separation growth bound at t.
// Requires v0_total_variation and L > 0.
double time_zero_bound_check(const FlowMap& fm, double t);

struct EnergySample {
    double time;
    double energy;
    bool post_event;  // sampled just after a merge at `time`
};
std::vector<EnergySample> energy_series(const FlowMap& fm);

struct SpaceTimeTestFunction {
    std::function<double(double, double)> phi, dt, dx;  // phi(x,t) C^1,
                                                        // compact support in t
};
struct EulerResidual {
    double mass;
    double momentum;
};
// Numerical residuals of the two weak-form identities of the pressureless
// Euler system, trapezoid in time on the fine grid (event nodes included).
EulerResidual euler_weak_residual(const FlowMap& fm,
                                  const SpaceTimeTestFunction& phi);

// Max over clusters of |cluster velocity - mass-averaged (v0 - accumulated
// force)| at a non-event time t.
double conditional_velocity_check(const FlowMap& fm, double t);

// CSV schema: t,cluster_id,position,velocity_left,velocity_right,mass.
void write_flow_csv(const FlowMap& fm, std::ostream& out);
void write_flow_csv(const FlowMap& fm, const std::string& path);
std::string events_json(const FlowMap& fm);

}  // namespace semiflow

#endif
