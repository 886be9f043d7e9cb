// Independent reference computations used only by the tests. These stay
// deliberately naive: enumeration, midpoint sums and a bare rk4 loop, so
// they share no code with the library paths they check.
#ifndef SEMIFLOW_TEST_ORACLES_HPP
#define SEMIFLOW_TEST_ORACLES_HPP

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

namespace test_oracle {

// Minimum transport cost between two weighted 1D point sets, by enumerating
// the basic feasible solutions (spanning-tree supports) of the
// transportation polytope. Exact for small supports.
inline double transport_bruteforce(const std::vector<double>& xs,
                                   const std::vector<double>& wx,
                                   const std::vector<double>& ys,
                                   const std::vector<double>& wy) {
    const std::size_t m = xs.size(), n = ys.size();
    const std::size_t cells = m * n;
    const std::size_t basis = m + n - 1;
    if (basis > cells) throw std::invalid_argument("degenerate transport problem");
    std::vector<std::size_t> pick(basis);
    double best = std::numeric_limits<double>::infinity();

    std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t start,
                                                            std::size_t k) {
        if (k == basis) {
            // solve the flow equations on the chosen cells by elimination
            std::vector<double> flow(cells, 0.0);
            std::vector<bool> chosen(cells, false);
            for (std::size_t c : pick) chosen[c] = true;
            std::vector<double> row_rem = wx, col_rem = wy;
            std::vector<bool> solved(cells, false);
            std::size_t remaining = basis;
            bool progress = true;
            while (remaining > 0 && progress) {
                progress = false;
                for (std::size_t i = 0; i < m; ++i) {
                    std::size_t cnt = 0, cell = 0;
                    for (std::size_t j = 0; j < n; ++j) {
                        const std::size_t c = i * n + j;
                        if (chosen[c] && !solved[c]) {
                            ++cnt;
                            cell = c;
                        }
                    }
                    if (cnt == 1) {
                        flow[cell] = row_rem[i];
                        solved[cell] = true;
                        row_rem[i] = 0.0;
                        col_rem[cell % n] -= flow[cell];
                        --remaining;
                        progress = true;
                    }
                }
                for (std::size_t j = 0; j < n; ++j) {
                    std::size_t cnt = 0, cell = 0;
                    for (std::size_t i = 0; i < m; ++i) {
                        const std::size_t c = i * n + j;
                        if (chosen[c] && !solved[c]) {
                            ++cnt;
                            cell = c;
                        }
                    }
                    if (cnt == 1) {
                        flow[cell] = col_rem[j];
                        solved[cell] = true;
                        col_rem[j] = 0.0;
                        row_rem[cell / n] -= flow[cell];
                        --remaining;
                        progress = true;
                    }
                }
            }
            if (remaining > 0) return;  // cyclic support, not a vertex
            double cost = 0.0;
            for (std::size_t c = 0; c < cells; ++c) {
                if (!chosen[c]) continue;
                if (flow[c] < -1e-12) return;  // infeasible vertex
                cost += flow[c] * std::fabs(xs[c / n] - ys[c % n]);
            }
            best = std::min(best, cost);
            return;
        }
        for (std::size_t c = start; c + (basis - k) <= cells; ++c) {
            pick[k] = c;
            rec(c + 1, k + 1);
        }
    };
    rec(0, 0);
    return best;
}

// Midpoint-rule quadrature.
inline double midpoint_integral(const std::function<double(double)>& f, double a,
                                double b, std::size_t points) {
    const double h = (b - a) / points;
    double s = 0.0;
    for (std::size_t k = 0; k < points; ++k) s += f(a + (k + 0.5) * h);
    return s * h;
}

// Plain fixed-step rk4 for a scalar second-order ODE y'' = rhs(y, y').
struct Rk4Result {
    double y, ydot;
};
inline Rk4Result rk4_second_order(
    const std::function<double(double, double)>& rhs, double y0, double v0,
    double t_end, double dt) {
    double y = y0, v = v0;
    const std::size_t steps = static_cast<std::size_t>(std::llround(t_end / dt));
    for (std::size_t k = 0; k < steps; ++k) {
        const double k1y = v, k1v = rhs(y, v);
        const double k2y = v + 0.5 * dt * k1v, k2v = rhs(y + 0.5 * dt * k1y, v + 0.5 * dt * k1v);
        const double k3y = v + 0.5 * dt * k2v, k3v = rhs(y + 0.5 * dt * k2y, v + 0.5 * dt * k2v);
        const double k4y = v + dt * k3v, k4v = rhs(y + dt * k3y, v + dt * k3v);
        y += dt / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
        v += dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
    }
    return {y, v};
}

}  // namespace test_oracle

#endif
