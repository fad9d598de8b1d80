#pragma once

#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

namespace msfem {

class OdeFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct OdeOptions {
    double atol = 1e-9;
    double rtol = 1e-9;
    double min_step = 1e-14;
    std::size_t max_steps = 10'000'000;
};

struct OdeStats {
    std::size_t accepted = 0;
    std::size_t rejected = 0;
};

// Adaptive Dormand-Prince 5(4) for a scalar ODE y' = rhs(t, y), y(times[0]) = y0.
// Returns y at every entry of `times` (strictly increasing). Steps are shortened
// so that they end on each output time; no interpolation is involved.
std::vector<double> integrate_dopri(const std::function<double(double, double)>& rhs, double y0,
                                    std::span<const double> times, const OdeOptions& options,
                                    OdeStats* stats = nullptr);

}  // namespace msfem
