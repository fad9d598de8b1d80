#pragma once

#include <functional>
#include <span>
#include <vector>

#include "msfem/banded.hpp"
#include "msfem/coeffs.hpp"
#include "msfem/mesh.hpp"
#include "msfem/transform.hpp"

namespace msfem {

// Pointwise data of a 1D P1 problem  u_t + v u_x = (k u_x)_x + s  written in
// a reference coordinate. All callbacks take the fraction w in [0,1] of the
// whole segment being assembled.
struct P1Fields {
    std::function<double(double)> velocity;    // v(w); empty means zero
    std::function<double(double)> stiffness;   // k(w) > 0
    std::function<double(double)> source;      // s(w); empty means no load
};

// Matrices of one assembled P1 system.
//   mass(k,l)      =  int psi_k psi_l
//   advection(k,l) =  int psi_k v d(psi_l)
//   diffusion(k,l) = -int k d(psi_k) d(psi_l)
struct P1System {
    BandedMatrix mass;
    BandedMatrix advection;
    BandedMatrix diffusion;
    std::vector<double> load;  // empty when the problem has no source
};

// Assembles on a uniform mesh of `elements` elements spanning a segment of
// length `length`, with 3-point Gauss quadrature per element. Periodic
// systems have `elements` unknowns (last node glued to the first); otherwise
// `elements + 1`.
P1System assemble_p1(double length, std::size_t elements, bool periodic, const P1Fields& fields);
BandedMatrix assemble_p1_mass(double length, std::size_t elements, bool periodic);

// L2 projection of f onto periodic P1 on [0,1] with `elements` elements.
std::vector<double> project_p1_periodic(const SpaceField& f, std::size_t elements);

// Local system of one moving coarse cell at stored time index n. The mass
// matrix is time-independent and is only filled when `with_mass` is set.
struct LocalSystem {
    std::size_t cell = 0;
    std::size_t time_index = 0;
    BandedMatrix mass;
    BandedMatrix advection;
    BandedMatrix diffusion;
    std::vector<double> load;
};

LocalSystem assemble_local(const FineMesh& mesh, const CoefficientSet& cs,
                           const CharacteristicTable& table, const JacobianFactors& jf,
                           std::size_t n, bool with_mass = true);

// Operators of  M u' + E u = D u + G  frozen at one time level.
struct OperatorView {
    const BandedMatrix* mass;
    const BandedMatrix* explicit_op;   // treated with AB2 (Heun on the first step)
    const BandedMatrix* implicit_op;   // treated with Crank-Nicolson
    std::span<const double> load;      // may be empty
};

enum class MassRule { Current, Midpoint };

struct Dirichlet {
    bool enabled = false;
    double left = 0.0;
    double right = 0.0;
};

// Two-level IMEX stepper: AB2 for the explicit operator, Crank-Nicolson for
// the implicit one, trapezoidal rule for the load. The very first step uses a
// Heun predictor-corrector for the explicit part since AB2 needs history.
class ImexStepper {
public:
    ImexStepper(std::vector<double> initial, double dt, MassRule rule = MassRule::Current);

    const std::vector<double>& state() const { return current_; }
    std::size_t step_index() const { return step_; }
    double dt() const { return dt_; }

    void advance(const OperatorView& now, const OperatorView& next, const Dirichlet& bc = {});

private:
    std::vector<double> implicit_solve(const OperatorView& now, const OperatorView& next,
                                       std::span<const double> explicit_term,
                                       const Dirichlet& bc) const;

    std::vector<double> current_;
    std::vector<double> previous_explicit_;  // E^{n-1} u^{n-1}
    double dt_;
    MassRule rule_;
    std::size_t step_ = 0;
};

// Snapshot of a field on the uniform Eulerian grid.
struct FieldSnapshot {
    double time = 0.0;
    std::vector<double> x;
    std::vector<double> u;
};

struct ReferenceOptions {
    std::size_t elements = 750;
    double dt = 1e-3;
    double end_time = 1.0;
    std::size_t eval_points = 750;
    OdeOptions ode;
    MassRule mass_rule = MassRule::Current;
};

struct ReferenceRun {
    std::vector<double> times;
    std::vector<std::size_t> snapshot_steps;
    std::vector<FieldSnapshot> snapshots;
};

// Standard periodic P1 FEM for the equation in mean-flow coordinates, stepped
// with ImexStepper; snapshots are pulled back to the Eulerian grid at the
// requested step indices. Also serves as the low-resolution comparator.
ReferenceRun reference_solve(const CoefficientSet& cs, const ReferenceOptions& options,
                             std::span<const std::size_t> snapshot_steps);

}  // namespace msfem
