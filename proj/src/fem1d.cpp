#include "msfem/fem1d.hpp"

#include <algorithm>
#include <cmath>

#include "msfem/quadrature.hpp"

namespace msfem {

namespace {

std::size_t dof_count(std::size_t elements, bool periodic) {
    return periodic ? elements : elements + 1;
}

void add_load(std::vector<double>& load, std::size_t a, std::size_t n, double va, double vb) {
    load[a] += va;
    load[(a + 1) % n] += vb;
}

}  // namespace

BandedMatrix assemble_p1_mass(double length, std::size_t elements, bool periodic) {
    if (elements == 0) throw std::invalid_argument("need at least one element");
    const double h = length / static_cast<double>(elements);
    BandedMatrix mass(dof_count(elements, periodic), periodic);
    const double block[2][2] = {{h / 3.0, h / 6.0}, {h / 6.0, h / 3.0}};
    for (std::size_t e = 0; e < elements; ++e) mass.add_block(e, block);
    return mass;
}

P1System assemble_p1(double length, std::size_t elements, bool periodic, const P1Fields& fields) {
    const std::size_t n = dof_count(elements, periodic);
    const double h = length / static_cast<double>(elements);
    const double inv_elements = 1.0 / static_cast<double>(elements);

    P1System sys{assemble_p1_mass(length, elements, periodic), BandedMatrix(n, periodic),
                 BandedMatrix(n, periodic), {}};
    if (fields.source) sys.load.assign(n, 0.0);

    for (std::size_t e = 0; e < elements; ++e) {
        double adv[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
        double stiff = 0.0;
        double la = 0.0, lb = 0.0;
        for (const auto& q : gauss3_unit) {
            const double w = (static_cast<double>(e) + q.x) * inv_elements;
            const double psi_a = 1.0 - q.x;
            const double psi_b = q.x;
            if (fields.velocity) {
                // int psi_k v dpsi_l, with dpsi_a = -1/h, dpsi_b = 1/h and dx = h ds
                const double v = q.w * fields.velocity(w);
                adv[0][0] -= psi_a * v;
                adv[0][1] += psi_a * v;
                adv[1][0] -= psi_b * v;
                adv[1][1] += psi_b * v;
            }
            stiff += q.w * fields.stiffness(w);
            if (fields.source) {
                const double s = q.w * h * fields.source(w);
                la += psi_a * s;
                lb += psi_b * s;
            }
        }
        if (fields.velocity) sys.advection.add_block(e, adv);
        const double k = stiff / h;
        const double diff[2][2] = {{-k, k}, {k, -k}};
        sys.diffusion.add_block(e, diff);
        if (fields.source) add_load(sys.load, e, n, la, lb);
    }
    return sys;
}

LocalSystem assemble_local(const FineMesh& mesh, const CoefficientSet& cs,
                           const CharacteristicTable& table, const JacobianFactors& jf,
                           std::size_t n, bool with_mass) {
    const CellFrame& frame = jf.frame(mesh.parent(), n);
    const double t = table.times()[n];
    const double inv_j2 = 1.0 / (frame.dx_dxi * frame.dx_dxi);

    P1Fields fields;
    fields.velocity = [&](double w) { return effective_velocity(cs, frame, w, t); };
    fields.stiffness = [&](double w) { return transformed_diffusivity(cs, frame, w, t) * inv_j2; };
    if (cs.has_forcing()) {
        fields.source = [&](double w) { return cs.forcing(wrap_unit(frame.position(w))); };
    }
    P1System sys = assemble_p1(frame.width, mesh.num_elements(), false, fields);

    LocalSystem local;
    local.cell = mesh.parent();
    local.time_index = n;
    if (with_mass) local.mass = std::move(sys.mass);
    local.advection = std::move(sys.advection);
    local.diffusion = std::move(sys.diffusion);
    local.load = std::move(sys.load);
    return local;
}

ImexStepper::ImexStepper(std::vector<double> initial, double dt, MassRule rule)
    : current_(std::move(initial)), dt_(dt), rule_(rule) {
    if (!(dt > 0.0)) throw std::invalid_argument("time step must be positive");
}

std::vector<double> ImexStepper::implicit_solve(const OperatorView& now, const OperatorView& next,
                                                std::span<const double> explicit_term,
                                                const Dirichlet& bc) const {
    const std::size_t n = current_.size();
    BandedMatrix lhs = *next.mass;
    if (rule_ == MassRule::Midpoint) lhs.combine(0.5, *now.mass, 0.5);

    std::vector<double> rhs = lhs.multiply(current_);
    const std::vector<double> diff_now = now.implicit_op->multiply(current_);
    for (std::size_t i = 0; i < n; ++i) {
        rhs[i] += 0.5 * dt_ * diff_now[i] - dt_ * explicit_term[i];
    }
    if (!now.load.empty()) {
        for (std::size_t i = 0; i < n; ++i) rhs[i] += 0.5 * dt_ * (now.load[i] + next.load[i]);
    }
    lhs.combine(1.0, *next.implicit_op, -0.5 * dt_);

    if (bc.enabled) {
        lhs.set_identity_row(0);
        lhs.set_identity_row(n - 1);
        rhs[0] = bc.left;
        rhs[n - 1] = bc.right;
    }
    return solve(lhs, rhs);
}

void ImexStepper::advance(const OperatorView& now, const OperatorView& next, const Dirichlet& bc) {
    std::vector<double> explicit_now = now.explicit_op->multiply(current_);
    std::vector<double> term(explicit_now.size());
    if (step_ == 0) {
        const std::vector<double> predicted = implicit_solve(now, next, explicit_now, bc);
        const std::vector<double> explicit_pred = next.explicit_op->multiply(predicted);
        for (std::size_t i = 0; i < term.size(); ++i) {
            term[i] = 0.5 * (explicit_now[i] + explicit_pred[i]);
        }
    } else {
        for (std::size_t i = 0; i < term.size(); ++i) {
            term[i] = 1.5 * explicit_now[i] - 0.5 * previous_explicit_[i];
        }
    }
    current_ = implicit_solve(now, next, term, bc);
    previous_explicit_ = std::move(explicit_now);
    ++step_;
}

namespace {

P1System assemble_mean_flow(const CoefficientSet& cs, std::size_t elements, double shift,
                            double mean_c, double t) {
    P1Fields fields;
    fields.velocity = [&](double w) { return cs.c(wrap_unit(w + shift), t) - mean_c; };
    fields.stiffness = [&](double w) { return cs.mu(wrap_unit(w + shift), t); };
    if (cs.has_forcing()) fields.source = [&](double w) { return cs.forcing(wrap_unit(w + shift)); };
    return assemble_p1(1.0, elements, true, fields);
}

}  // namespace

ReferenceRun reference_solve(const CoefficientSet& cs, const ReferenceOptions& opt,
                             std::span<const std::size_t> snapshot_steps) {
    ReferenceRun run;
    run.times = make_time_grid(opt.dt, opt.end_time);
    run.snapshot_steps.assign(snapshot_steps.begin(), snapshot_steps.end());
    const std::size_t steps = run.times.size() - 1;
    for (std::size_t s : snapshot_steps) {
        if (s > steps) throw ConfigError("snapshot step beyond the end of the run");
    }

    const MeanFlowShift mf = mean_flow_shift(cs, run.times, opt.ode);
    const std::size_t elements = opt.elements;
    const std::vector<double> grid = uniform_grid(opt.eval_points);
    std::vector<double> positions(elements);

    auto snapshot = [&](std::size_t n, const std::vector<double>& u) {
        for (std::size_t j = 0; j < elements; ++j) {
            positions[j] = static_cast<double>(j) / static_cast<double>(elements) + mf.shift[n];
        }
        FieldSnapshot snap;
        snap.time = run.times[n];
        snap.x = grid;
        snap.u = pull_back(positions, u, grid);
        return snap;
    };
    auto record = [&](std::size_t n, const std::vector<double>& u) {
        for (std::size_t s : run.snapshot_steps) {
            if (s == n) run.snapshots.push_back(snapshot(n, u));
        }
    };

    std::vector<double> u0 = project_p1_periodic(cs.f, elements);
    record(0, u0);

    P1System now = assemble_mean_flow(cs, elements, mf.shift[0], mf.velocity[0], run.times[0]);
    ImexStepper stepper(std::move(u0), opt.dt, opt.mass_rule);
    for (std::size_t n = 0; n < steps; ++n) {
        P1System next =
            assemble_mean_flow(cs, elements, mf.shift[n + 1], mf.velocity[n + 1], run.times[n + 1]);
        stepper.advance({&now.mass, &now.advection, &now.diffusion, now.load},
                        {&next.mass, &next.advection, &next.diffusion, next.load});
        record(n + 1, stepper.state());
        now = std::move(next);
    }
    return run;
}

std::vector<double> project_p1_periodic(const SpaceField& f, std::size_t elements) {
    const double h = 1.0 / static_cast<double>(elements);
    constexpr std::size_t subpanels = 16;
    std::vector<double> load(elements, 0.0);
    for (std::size_t e = 0; e < elements; ++e) {
        const double x0 = static_cast<double>(e) * h;
        const double la = integrate_composite(
            [&](double x) { return (1.0 - (x - x0) / h) * f(x); }, x0, x0 + h, subpanels);
        const double lb =
            integrate_composite([&](double x) { return (x - x0) / h * f(x); }, x0, x0 + h,
                                subpanels);
        add_load(load, e, elements, la, lb);
    }
    return solve(assemble_p1_mass(1.0, elements, true), load);
}

}  // namespace msfem
