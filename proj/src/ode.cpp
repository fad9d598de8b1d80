#include "msfem/ode.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace msfem {

namespace {

// Dormand-Prince tableau.
constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                 a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                 a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
constexpr double b1 = 35.0 / 384.0, b3 = 500.0 / 1113.0, b4 = 125.0 / 192.0,
                 b5 = -2187.0 / 6784.0, b6 = 11.0 / 84.0;
// fifth minus fourth order weights
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                 e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;

}  // namespace

std::vector<double> integrate_dopri(const std::function<double(double, double)>& rhs, double y0,
                                    std::span<const double> times, const OdeOptions& opt,
                                    OdeStats* stats) {
    std::vector<double> out;
    if (times.empty()) return out;
    out.reserve(times.size());
    out.push_back(y0);

    double t = times[0];
    double y = y0;
    double k1 = rhs(t, y);
    const double span = times.back() - times.front();
    double h = span > 0.0 ? std::min(1e-3, span) : 0.0;
    std::size_t steps = 0;
    OdeStats local;

    for (std::size_t i = 1; i < times.size(); ++i) {
        const double target = times[i];
        while (t < target) {
            if (++steps > opt.max_steps) throw OdeFailure("ODE step budget exhausted");
            bool hits = false;
            double step = h;
            if (t + step >= target) {
                step = target - t;
                hits = true;
            }
            const double k2 = rhs(t + c2 * step, y + step * (a21 * k1));
            const double k3 = rhs(t + c3 * step, y + step * (a31 * k1 + a32 * k2));
            const double k4 = rhs(t + c4 * step, y + step * (a41 * k1 + a42 * k2 + a43 * k3));
            const double k5 =
                rhs(t + c5 * step, y + step * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
            const double k6 = rhs(t + step, y + step * (a61 * k1 + a62 * k2 + a63 * k3 +
                                                         a64 * k4 + a65 * k5));
            const double y_new =
                y + step * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
            const double t_new = hits ? target : t + step;
            const double k7 = rhs(t_new, y_new);

            const double err_abs =
                std::abs(step * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7));
            const double scale = opt.atol + opt.rtol * std::max(std::abs(y), std::abs(y_new));
            const double err = err_abs / scale;

            const double factor =
                err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
            if (err <= 1.0) {
                t = t_new;
                y = y_new;
                k1 = k7;
                ++local.accepted;
                // a clipped step that passed easily says nothing about the admissible size
                const bool clipped = hits && step < h;
                if (!clipped || factor < 1.0) h = step * factor;
            } else {
                ++local.rejected;
                h = step * factor;
                if (h < opt.min_step) {
                    throw OdeFailure("ODE step size underflow at t = " + std::to_string(t));
                }
            }
        }
        out.push_back(y);
    }
    if (stats) *stats = local;
    return out;
}

}  // namespace msfem
