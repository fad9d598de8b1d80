#include "msfem/coeffs.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "msfem/mesh.hpp"
#include "msfem/quadrature.hpp"

namespace msfem {

namespace {

constexpr double pi = std::numbers::pi;

// 0.01 + 0.0099 cos(2 pi freq x): the oscillatory diffusivity shape shared by all cases.
double diffusivity_profile(double x, double freq) {
    return 1e-4 + 0.0099 * (1.0 + std::cos(2.0 * pi * freq * x));
}

void require_k(const CaseParams& p) {
    if (p.k <= 0) throw ConfigError("case parameter k must be a positive integer");
}

}  // namespace

CaseId parse_case_id(const std::string& text) {
    if (text == "1") return CaseId::One;
    if (text == "2") return CaseId::Two;
    if (text == "3") return CaseId::Three;
    if (text == "4") return CaseId::Four;
    if (text == "5") return CaseId::Five;
    if (text == "convergence" || text == "6") return CaseId::Convergence;
    throw ConfigError("unknown case id '" + text + "'");
}

std::string case_name(CaseId id) {
    if (id == CaseId::Convergence) return "convergence";
    return std::to_string(static_cast<int>(id));
}

SpaceField initial_condition(const CaseParams& params) {
    if (!(params.sigma > 0.0)) throw ConfigError("sigma must be positive");
    const double sigma = params.sigma;
    const double nu = params.nu;
    const double scale = 1.0 / (sigma * std::sqrt(2.0 * pi));
    return [=](double x) {
        const double d = x - nu;
        return scale * std::exp(-d * d / (2.0 * sigma * sigma));
    };
}

CoefficientSet make_case(const CaseParams& p) {
    CoefficientSet cs;
    cs.f = initial_condition(p);
    const double k = p.k;

    switch (p.id) {
    case CaseId::One:
        require_k(p);
        cs.c = [](double, double t) { return 5.0 * std::cos(10.0 * pi * t); };
        cs.mu = [k](double x, double t) { return 5.0 * (t + 1.0) * diffusivity_profile(x, k); };
        cs.eps_scale = 1.0 / k;
        cs.delta_scale = 1.0;
        cs.max_frequency = k;
        break;
    case CaseId::Two:
        require_k(p);
        cs.c = [k](double x, double) { return 10.0 + std::cos(2.0 * k * pi * x); };
        cs.mu = [](double x, double t) { return 5.0 * (t + 1.0) * diffusivity_profile(x, 30.0); };
        cs.eps_scale = 1.0 / 30.0;
        cs.delta_scale = 1.0 / k;
        cs.max_frequency = std::max(k, 30.0);
        break;
    case CaseId::Three: {
        if (!p.v) throw ConfigError("case 3 requires the mean velocity parameter v");
        const double v = *p.v;
        cs.c = [v](double x, double) {
            return v + 1.5 * std::cos(2.0 * pi * x) + 0.5 * std::cos(60.0 * pi * x);
        };
        cs.mu = [](double x, double t) { return 5.0 * (t + 1.0) * diffusivity_profile(x, 25.0); };
        cs.eps_scale = 1.0 / 25.0;
        cs.delta_scale = 1.0 / 30.0;
        cs.max_frequency = 30.0;
        break;
    }
    case CaseId::Four:
    case CaseId::Five:
        require_k(p);
        cs.c = [](double x, double t) {
            return (2.0 * t + 0.5) * (3.0 + std::cos(2.0 * pi * x) + std::cos(60.0 * pi * x));
        };
        cs.mu = [k](double x, double) { return diffusivity_profile(x, k); };
        if (p.id == CaseId::Five) {
            cs.g = [](double x) { return 0.015 * std::sin(8.0 * pi * x); };
        }
        cs.eps_scale = 1.0 / k;
        cs.delta_scale = 1.0 / 30.0;
        cs.max_frequency = std::max(k, 30.0);
        break;
    case CaseId::Convergence: {
        require_k(p);
        if (!p.alpha) throw ConfigError("convergence case requires the parameter alpha");
        const double alpha = *p.alpha;
        cs.c = [alpha](double x, double t) {
            return (2.0 * t + 0.5) * (1.5 + 0.5 * alpha * std::cos(2.0 * pi * x));
        };
        cs.mu = [k](double x, double) { return diffusivity_profile(x, k); };
        cs.eps_scale = 1.0 / k;
        cs.delta_scale = 1.0;
        cs.max_frequency = k;
        break;
    }
    }
    // all fields are evaluated at x mod 1
    cs.c = [c = std::move(cs.c)](double x, double t) { return c(wrap_unit(x), t); };
    cs.mu = [mu = std::move(cs.mu)](double x, double t) { return mu(wrap_unit(x), t); };
    if (cs.g) cs.g = [g = std::move(cs.g)](double x) { return g(wrap_unit(x)); };
    return cs;
}

std::size_t averaging_panels(const CoefficientSet& cs) {
    const double want = std::max(200.0, 10.0 * cs.max_frequency);
    return static_cast<std::size_t>(std::ceil(want));
}

double mean_velocity(const CoefficientSet& cs, double t) {
    return integrate_composite([&](double x) { return cs.c(x, t); }, 0.0, 1.0, averaging_panels(cs));
}

double peclet_diagnostic(const CoefficientSet& cs, double length, double t) {
    if (!(length > 0.0)) throw ConfigError("Peclet length scale must be positive");
    return integrate_composite(
        [&](double x) { return std::abs(cs.c(x, t) * length / cs.mu(x, t)); }, 0.0, 1.0,
        averaging_panels(cs));
}

}  // namespace msfem
