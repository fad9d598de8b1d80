#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

#include "msfem/quadrature.hpp"

namespace msfem::testing {

Dense zeros(std::size_t n) { return Dense(n, std::vector<double>(n, 0.0)); }

Dense dense(const BandedMatrix& a) {
    Dense out = zeros(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < a.size(); ++j) out[i][j] = a.at(i, j);
    }
    return out;
}

double max_abs_diff(const Dense& a, const Dense& b) {
    if (a.size() != b.size()) throw std::invalid_argument("size mismatch");
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, max_abs_diff(a[i], b[i]));
    return m;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw std::invalid_argument("size mismatch");
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

double max_abs(const Dense& a) {
    double m = 0.0;
    for (const auto& row : a) {
        for (double v : row) m = std::max(m, std::abs(v));
    }
    return m;
}

std::vector<double> dense_solve(Dense a, std::vector<double> b) {
    const std::size_t n = b.size();
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t p = k;
        for (std::size_t i = k + 1; i < n; ++i) {
            if (std::abs(a[i][k]) > std::abs(a[p][k])) p = i;
        }
        std::swap(a[k], a[p]);
        std::swap(b[k], b[p]);
        if (a[k][k] == 0.0) throw std::runtime_error("dense_solve: singular");
        for (std::size_t i = k + 1; i < n; ++i) {
            const double f = a[i][k] / a[k][k];
            for (std::size_t j = k; j < n; ++j) a[i][j] -= f * a[k][j];
            b[i] -= f * b[k];
        }
    }
    std::vector<double> x(n);
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t j = i + 1; j < n; ++j) s -= a[i][j] * x[j];
        x[i] = s / a[i][i];
    }
    return x;
}

CoefficientSet simple_set(SpaceTimeField c, SpaceTimeField mu, SpaceField f) {
    CoefficientSet cs;
    cs.c = std::move(c);
    cs.mu = std::move(mu);
    cs.f = f ? std::move(f) : SpaceField([](double) { return 1.0; });
    return cs;
}

CaseParams case_params(CaseId id, int k) {
    CaseParams p;
    p.id = id;
    p.k = k;
    return p;
}

CaseParams case3_params(double v) {
    CaseParams p;
    p.id = CaseId::Three;
    p.v = v;
    return p;
}

DenseLocal dense_local(const FineMesh& mesh, const CoefficientSet& cs,
                       const CharacteristicTable& table, const JacobianFactors& jf, std::size_t n) {
    const CellFrame& frame = jf.frame(mesh.parent(), n);
    const double t = table.times()[n];
    const std::size_t nodes = mesh.num_nodes();
    const double h = frame.width / static_cast<double>(mesh.num_elements());
    DenseLocal out{zeros(nodes), zeros(nodes), zeros(nodes), std::vector<double>(nodes, 0.0)};

    auto hat = [&](std::size_t k, double s) {  // s: position in units of fine elements
        const double d = std::abs(s - static_cast<double>(k));
        return d < 1.0 ? 1.0 - d : 0.0;
    };
    auto dhat = [&](std::size_t k, double s, std::size_t element) {
        if (k == element) return -1.0 / h;
        if (k == element + 1) return 1.0 / h;
        return 0.0;
    };
    const double inv_j2 = 1.0 / (frame.dx_dxi * frame.dx_dxi);
    for (std::size_t e = 0; e + 1 < nodes; ++e) {
        for (const auto& q : gauss4_unit) {
            const double s = static_cast<double>(e) + q.x;
            const double w = s / static_cast<double>(mesh.num_elements());
            const double dx = q.w * h;
            const double c = effective_velocity(cs, frame, w, t);
            const double mu = transformed_diffusivity(cs, frame, w, t) * inv_j2;
            const double g = cs.forcing(wrap_unit(frame.position(w)));
            for (std::size_t a = 0; a < nodes; ++a) {
                out.load[a] += hat(a, s) * g * dx;
                for (std::size_t b = 0; b < nodes; ++b) {
                    out.mass[a][b] += hat(a, s) * hat(b, s) * dx;
                    out.advection[a][b] += hat(a, s) * c * dhat(b, s, e) * dx;
                    out.diffusion[a][b] -= mu * dhat(a, s, e) * dhat(b, s, e) * dx;
                }
            }
        }
    }
    return out;
}

DenseCoarse brute_coarse(const BasisSet& basis, const CoefficientSet& cs,
                         const CharacteristicTable& table, std::size_t n, CellMeasure measure) {
    const CoarseMesh& mesh = basis.mesh();
    const JacobianFactors jf(table, mesh);
    const std::size_t dofs = mesh.num_dofs();
    DenseCoarse out{zeros(dofs), zeros(dofs), zeros(dofs), zeros(dofs), std::vector<double>(dofs, 0.0)};
    const double t = table.times()[n];
    const double dt = basis.dt();
    const std::size_t last = basis.num_times() - 1;

    for (std::size_t cell = 0; cell < mesh.num_cells(); ++cell) {
        const BasisTrajectory& traj = basis.cell(cell);
        const CellFrame& frame = jf.frame(cell, n);
        const std::size_t elements = traj.fine_nodes() - 1;
        const double h = frame.width / static_cast<double>(elements);
        const double weight = measure == CellMeasure::Physical ? frame.dx_dxi : 1.0;
        const std::size_t lo = n == 0 ? 0 : n - 1;
        const std::size_t hi = n == last ? last : n + 1;
        const auto a_now = traj.alphas(n);
        const auto a_lo = traj.alphas(lo);
        const auto a_hi = traj.alphas(hi);
        const double span = static_cast<double>(hi - lo) * dt;
        const std::size_t dof[2] = {mesh.left_dof(cell), mesh.right_dof(cell)};
        const double inv_j2 = 1.0 / (frame.dx_dxi * frame.dx_dxi);

        for (std::size_t e = 0; e < elements; ++e) {
            for (const auto& q : gauss3_unit) {
                const double w = (static_cast<double>(e) + q.x) / static_cast<double>(elements);
                const double dx = q.w * h * weight;
                const double left = (1.0 - q.x) * a_now[e] + q.x * a_now[e + 1];
                const double dleft = (a_now[e + 1] - a_now[e]) / h;
                const double rate_e = (a_hi[e] - a_lo[e]) / span;
                const double rate_e1 = (a_hi[e + 1] - a_lo[e + 1]) / span;
                const double rleft = (1.0 - q.x) * rate_e + q.x * rate_e1;
                const double phi[2] = {left, 1.0 - left};
                const double dphi[2] = {dleft, -dleft};
                const double rphi[2] = {rleft, -rleft};
                const double c = effective_velocity(cs, frame, w, t);
                const double g = cs.forcing(wrap_unit(frame.position(w)));
                // diffusion uses the element mean of mu, as P1 stiffness does
                double mu_bar = 0.0;
                for (const auto& r : gauss3_unit) {
                    const double wr = (static_cast<double>(e) + r.x) / static_cast<double>(elements);
                    mu_bar += r.w * transformed_diffusivity(cs, frame, wr, t);
                }
                mu_bar *= inv_j2;
                for (int a = 0; a < 2; ++a) {
                    out.load[dof[a]] += phi[a] * g * dx;
                    for (int b = 0; b < 2; ++b) {
                        out.mass[dof[a]][dof[b]] += phi[a] * phi[b] * dx;
                        out.rate[dof[a]][dof[b]] += phi[a] * rphi[b] * dx;
                        out.advection[dof[a]][dof[b]] += phi[a] * c * dphi[b] * dx;
                        out.diffusion[dof[a]][dof[b]] -= mu_bar * dphi[a] * dphi[b] * dx;
                    }
                }
            }
        }
    }
    return out;
}

CharacteristicTable table_for(TransformKind kind, const CoefficientSet& cs, const CoarseMesh& mesh,
                              double dt, double end_time, double tol) {
    const std::vector<double> times = make_time_grid(dt, end_time);
    TraceOptions opt;
    opt.ode = OdeOptions{tol, tol};
    return make_table(kind, cs, mesh, times, opt);
}

BasisSet offline(const CoefficientSet& cs, const CoarseMesh& mesh, const CharacteristicTable& table,
                 std::size_t fine_nodes, std::size_t workers, bool retain) {
    OfflineOptions opt;
    opt.fine_nodes = fine_nodes;
    opt.dt = table.times()[1] - table.times()[0];
    opt.workers = workers;
    opt.retain_systems = retain;
    return compute_offline(mesh, cs, table, opt);
}

}  // namespace msfem::testing
