#include "msfem/global.hpp"

#include <algorithm>
#include <cmath>

#include "msfem/quadrature.hpp"

namespace msfem {

namespace {

void scale(double block[2][2], double s) {
    for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) block[a][b] *= s;
    }
}

}  // namespace

CoarseSystem assemble_coarse(const BasisSet& basis, std::size_t n, const CoarseAssembly& how) {
    const CoarseMesh& mesh = basis.mesh();
    const std::size_t dofs = mesh.num_dofs();
    const double dt = basis.dt();
    CoarseSystem sys{BandedMatrix(dofs, true), BandedMatrix(dofs, true), BandedMatrix(dofs, true),
                     BandedMatrix(dofs, true), {}};

    for (std::size_t i = 0; i < basis.num_cells(); ++i) {
        const BasisTrajectory& traj = basis.cell(i);
        CellBlocks b;
        if (traj.has_blocks()) {
            b = traj.blocks(n);
        } else if (traj.has_systems()) {
            const auto back = basis_time_derivative(traj, n, dt, RateRule::Backward);
            const auto cent = basis_time_derivative(traj, n, dt, RateRule::Central);
            b = cell_blocks(traj.mass(), traj.system(n), traj.alphas(n), back, cent);
        } else {
            throw ConfigError("basis has neither coarse blocks nor local matrices");
        }
        if (how.rate == RateRule::Central) std::copy(&b.rate_central[0][0], &b.rate_central[0][0] + 4, &b.rate[0][0]);
        if (how.measure == CellMeasure::Physical) {
            const double j = traj.jacobian(n);
            scale(b.mass, j);
            scale(b.rate, j);
            scale(b.advection, j);
            scale(b.diffusion, j);
            b.load[0] *= j;
            b.load[1] *= j;
        }
        sys.mass.add_block(i, b.mass);
        sys.basis_rate.add_block(i, b.rate);
        sys.advection.add_block(i, b.advection);
        sys.diffusion.add_block(i, b.diffusion);
        if (b.has_load) {
            if (sys.load.empty()) sys.load.assign(dofs, 0.0);
            sys.load[mesh.left_dof(i)] += b.load[0];
            sys.load[mesh.right_dof(i)] += b.load[1];
        }
    }
    return sys;
}

std::vector<double> project_initial(const BasisSet& basis, const SpaceField& f) {
    const CoarseMesh& mesh = basis.mesh();
    std::vector<double> rhs(mesh.num_dofs(), 0.0);
    constexpr std::size_t subpanels = 16;
    for (std::size_t i = 0; i < basis.num_cells(); ++i) {
        const BasisTrajectory& traj = basis.cell(i);
        const FineMesh fine(mesh, i, traj.fine_nodes());
        const auto alpha = traj.alphas(0);
        const double h = fine.width();
        // fine load  l_j = int psi_j f
        std::vector<double> load(fine.num_nodes(), 0.0);
        for (std::size_t e = 0; e < fine.num_elements(); ++e) {
            const double x0 = fine.node(e);
            load[e] += integrate_composite([&](double x) { return (1.0 - (x - x0) / h) * f(x); },
                                           x0, x0 + h, subpanels);
            load[e + 1] += integrate_composite([&](double x) { return (x - x0) / h * f(x); }, x0,
                                               x0 + h, subpanels);
        }
        double left = 0.0, right = 0.0;
        for (std::size_t j = 0; j < load.size(); ++j) {
            left += alpha[j] * load[j];
            right += (1.0 - alpha[j]) * load[j];
        }
        rhs[mesh.left_dof(i)] += left;
        rhs[mesh.right_dof(i)] += right;
    }
    return solve(assemble_coarse(basis, 0).mass, rhs);
}

CoarseSolution solve_online(const BasisSet& basis, const CoefficientSet& cs, double dt,
                            double end_time, const OnlineOptions& opt) {
    const std::vector<double> times = make_time_grid(dt, end_time);
    if (times.size() != basis.num_times() ||
        std::abs(times.back() - basis.times().back()) > 1e-12 * end_time) {
        throw ConfigError("basis does not cover the requested time grid");
    }
    CoarseSolution sol;
    sol.times = basis.times();
    sol.basis = &basis;
    sol.u.reserve(times.size());
    sol.u.push_back(project_initial(basis, cs.f));

    auto explicit_part = [](const CoarseSystem& s) {
        BandedMatrix e = s.advection;
        e.combine(1.0, s.basis_rate, 1.0);
        return e;
    };

    CoarseSystem now = assemble_coarse(basis, 0, opt.assembly);
    BandedMatrix explicit_now = explicit_part(now);
    ImexStepper stepper(sol.u.front(), dt, opt.mass_rule);
    for (std::size_t n = 0; n + 1 < times.size(); ++n) {
        CoarseSystem next = assemble_coarse(basis, n + 1, opt.assembly);
        BandedMatrix explicit_next = explicit_part(next);
        stepper.advance({&now.mass, &explicit_now, &now.diffusion, now.load},
                        {&next.mass, &explicit_next, &next.diffusion, next.load});
        sol.u.push_back(stepper.state());
        now = std::move(next);
        explicit_now = std::move(explicit_next);
    }
    return sol;
}

FineField fine_field(const CoarseSolution& sol, const JacobianFactors& jf, std::size_t n) {
    const BasisSet& basis = *sol.basis;
    const CoarseMesh& mesh = basis.mesh();
    const std::vector<double>& u = sol.u.at(n);
    FineField out;
    for (std::size_t i = 0; i < basis.num_cells(); ++i) {
        const BasisTrajectory& traj = basis.cell(i);
        const CellFrame& frame = jf.frame(i, n);
        const auto alpha = traj.alphas(n);
        const double ul = u[mesh.left_dof(i)];
        const double ur = u[mesh.right_dof(i)];
        const std::size_t elements = traj.fine_nodes() - 1;
        for (std::size_t j = 0; j < elements; ++j) {
            const double w = static_cast<double>(j) / static_cast<double>(elements);
            out.positions.push_back(frame.position(w));
            out.values.push_back(ul * alpha[j] + ur * (1.0 - alpha[j]));
        }
    }
    return out;
}

FieldSnapshot reconstruct(const CoarseSolution& sol, const JacobianFactors& jf, std::size_t n,
                          std::size_t eval_points) {
    const FineField field = fine_field(sol, jf, n);
    FieldSnapshot snap;
    snap.time = sol.times.at(n);
    snap.x = uniform_grid(eval_points);
    snap.u = pull_back(field.positions, field.values, snap.x);
    return snap;
}

}  // namespace msfem
