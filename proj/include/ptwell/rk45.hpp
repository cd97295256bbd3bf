#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

namespace ptwell {

/// Adaptive Dormand-Prince 5(4) step control for complex vector states.
/// State must support axpy-style arithmetic (Eigen vectors do).
template <typename State>
class Rk45 {
public:
    using Rhs = std::function<State(double, const State&)>;

    Rk45(Rhs rhs, double tol) : rhs_(std::move(rhs)), tol_(tol) {}

    /// One accepted step from (t, y). dt is adapted in place; the step never
    /// overshoots t_limit. Returns the new time.
    double step(double t, State& y, double& dt, double t_limit) {
        for (int attempt = 0; attempt < 64; ++attempt) {
            const double h = std::min(dt, t_limit - t);
            State y5, y4;
            try_step(t, y, h, y5, y4);
            const double err = (y5 - y4).norm();
            const double scale = tol_ * std::max(1.0, y.norm());
            if (err <= scale || h <= min_dt_) {
                y = std::move(y5);
                const double grow = (err > 0.0)
                                        ? 0.9 * std::pow(scale / err, 0.2)
                                        : 5.0;
                dt = h * std::clamp(grow, 0.2, 5.0);
                return t + h;
            }
            dt = h * std::clamp(0.9 * std::pow(scale / err, 0.2), 0.1, 0.9);
        }
        throw std::runtime_error("rk45: step size control failed to converge");
    }

    /// Single trial step (no error control), exposed for bisection near
    /// termination events.
    State trial(double t, const State& y, double h) const {
        State y5, y4;
        try_step(t, y, h, y5, y4);
        return y5;
    }

    void set_min_dt(double v) { min_dt_ = v; }

private:
    void try_step(double t, const State& y, double h, State& y5, State& y4) const {
        const State k1 = rhs_(t, y);
        const State k2 = rhs_(t + h / 5.0, y + (h / 5.0) * k1);
        const State k3 = rhs_(t + 3.0 * h / 10.0, y + h * (3.0 / 40.0 * k1 + 9.0 / 40.0 * k2));
        const State k4 = rhs_(t + 4.0 * h / 5.0,
                              y + h * (44.0 / 45.0 * k1 - 56.0 / 15.0 * k2 + 32.0 / 9.0 * k3));
        const State k5 =
            rhs_(t + 8.0 * h / 9.0,
                 y + h * (19372.0 / 6561.0 * k1 - 25360.0 / 2187.0 * k2 +
                          64448.0 / 6561.0 * k3 - 212.0 / 729.0 * k4));
        const State k6 =
            rhs_(t + h, y + h * (9017.0 / 3168.0 * k1 - 355.0 / 33.0 * k2 +
                                 46732.0 / 5247.0 * k3 + 49.0 / 176.0 * k4 -
                                 5103.0 / 18656.0 * k5));
        y5 = y + h * (35.0 / 384.0 * k1 + 500.0 / 1113.0 * k3 + 125.0 / 192.0 * k4 -
                      2187.0 / 6784.0 * k5 + 11.0 / 84.0 * k6);
        const State k7 = rhs_(t + h, y5);
        y4 = y + h * (5179.0 / 57600.0 * k1 + 7571.0 / 16695.0 * k3 + 393.0 / 640.0 * k4 -
                      92097.0 / 339200.0 * k5 + 187.0 / 2100.0 * k6 + 1.0 / 40.0 * k7);
    }

    Rhs rhs_;
    double tol_;
    double min_dt_ = 1e-13;
};

}  // namespace ptwell
