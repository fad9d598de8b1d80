#pragma once

#include <functional>
#include <optional>
#include <string>

namespace msfem {

using SpaceTimeField = std::function<double(double x, double t)>;
using SpaceField = std::function<double(double x)>;

// Problem data for u_t + c u_x = (mu u_x)_x + g on the periodic unit interval.
struct CoefficientSet {
    SpaceTimeField c;
    SpaceTimeField mu;
    SpaceField g;  // empty means g == 0
    SpaceField f;

    // Nominal oscillation wavelengths of mu and c (documentation / validation).
    double eps_scale = 1.0;
    double delta_scale = 1.0;
    // Highest spatial frequency index present; sizes averaging quadrature.
    double max_frequency = 1.0;

    bool has_forcing() const { return static_cast<bool>(g); }
    double velocity(double x, double t) const { return c(x, t); }
    double diffusivity(double x, double t) const { return mu(x, t); }
    double forcing(double x) const { return g ? g(x) : 0.0; }
};

enum class CaseId { One = 1, Two = 2, Three = 3, Four = 4, Five = 5, Convergence = 6 };

struct CaseParams {
    CaseId id = CaseId::One;
    int k = 30;
    std::optional<double> v;      // mean velocity, case 3
    std::optional<double> alpha;  // velocity variation, convergence study
    double sigma = 0.1;
    double nu = 0.5;
};

CaseId parse_case_id(const std::string& text);
std::string case_name(CaseId id);

CoefficientSet make_case(const CaseParams& params);

// Normalized Gaussian bump.
SpaceField initial_condition(const CaseParams& params);

// Spatial average of c at time t.
double mean_velocity(const CoefficientSet& cs, double t);

// Normalized L1 norm of the local Peclet number c L / mu at time t.
double peclet_diagnostic(const CoefficientSet& cs, double length, double t);

// Panel count used by mean_velocity and peclet_diagnostic.
std::size_t averaging_panels(const CoefficientSet& cs);

}  // namespace msfem
