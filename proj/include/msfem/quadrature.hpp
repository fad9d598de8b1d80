#pragma once

#include <array>
#include <cstddef>
#include <span>

namespace msfem {

// Gauss-Legendre rules mapped to the reference interval [0,1].
struct QuadPoint {
    double x;
    double w;
};

inline constexpr std::array<QuadPoint, 3> gauss3_unit{{
    {0.5 - 0.3872983346207416885, 5.0 / 18.0},
    {0.5, 8.0 / 18.0},
    {0.5 + 0.3872983346207416885, 5.0 / 18.0},
}};

inline constexpr std::array<QuadPoint, 4> gauss4_unit{{
    {0.5 - 0.4305681557970262, 0.1739274225687269},
    {0.5 - 0.1699905217924281, 0.3260725774312731},
    {0.5 + 0.1699905217924281, 0.3260725774312731},
    {0.5 + 0.4305681557970262, 0.1739274225687269},
}};

// Composite 4-point Gauss over [a,b] with the given number of panels.
template <class F>
double integrate_composite(F&& f, double a, double b, std::size_t panels) {
    const double h = (b - a) / static_cast<double>(panels);
    double sum = 0.0;
    for (std::size_t p = 0; p < panels; ++p) {
        const double x0 = a + static_cast<double>(p) * h;
        double local = 0.0;
        for (const auto& q : gauss4_unit) local += q.w * f(x0 + q.x * h);
        sum += local * h;
    }
    return sum;
}

}  // namespace msfem
