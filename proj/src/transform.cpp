#include "msfem/transform.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace msfem {

std::string transform_name(TransformKind kind) {
    switch (kind) {
    case TransformKind::Eulerian: return "eulerian";
    case TransformKind::MeanFlow: return "mean-flow";
    case TransformKind::Characteristic: return "characteristic";
    }
    return "unknown";
}

CellCollapse::CellCollapse(std::size_t c, double t, double w)
    : std::runtime_error("coarse cell " + std::to_string(c) + " collapsed at t = " +
                         std::to_string(t) + " (width " + std::to_string(w) + ")"),
      cell(c), time(t), width(w) {}

std::vector<double> make_time_grid(double dt, double end_time) {
    if (!(dt > 0.0) || !(end_time > 0.0)) throw ConfigError("time step and end time must be positive");
    const double ratio = end_time / dt;
    const auto steps = static_cast<std::size_t>(std::llround(ratio));
    if (steps == 0 || std::abs(ratio - static_cast<double>(steps)) > 1e-9 * ratio) {
        throw ConfigError("time step does not divide the end time");
    }
    std::vector<double> times(steps + 1);
    for (std::size_t n = 0; n <= steps; ++n) {
        times[n] = end_time * static_cast<double>(n) / static_cast<double>(steps);
    }
    return times;
}

CharacteristicTable::CharacteristicTable(TransformKind kind, std::vector<double> times,
                                         std::vector<double> node_xi, std::vector<double> paths,
                                         std::vector<double> velocities)
    : kind_(kind), times_(std::move(times)), node_xi_(std::move(node_xi)),
      paths_(std::move(paths)), velocities_(std::move(velocities)) {
    if (paths_.size() != times_.size() * node_xi_.size() || velocities_.size() != paths_.size()) {
        throw std::invalid_argument("characteristic table dimensions do not match");
    }
}

JacobianFactors::JacobianFactors(const CharacteristicTable& table, const CoarseMesh& mesh)
    : num_cells_(mesh.num_cells()), num_times_(table.num_times()) {
    if (table.num_nodes() != mesh.num_nodes()) {
        throw std::invalid_argument("table and mesh disagree on the node count");
    }
    frames_.resize(num_cells_ * num_times_);
    const double H = mesh.width();
    for (std::size_t n = 0; n < num_times_; ++n) {
        for (std::size_t i = 0; i < num_cells_; ++i) {
            CellFrame& f = frames_[n * num_cells_ + i];
            f.xi_left = mesh.cell_left(i);
            f.width = H;
            f.x_left = table.position(i, n);
            f.x_right = table.position(i + 1, n);
            f.dx_dtau_left = table.velocity(i, n);
            f.dx_dtau_right = table.velocity(i + 1, n);
            f.dx_dxi = (f.x_right - f.x_left) / H;
        }
    }
}

CharacteristicTable identity_table(const CoarseMesh& mesh, std::span<const double> times) {
    const std::size_t nodes = mesh.num_nodes();
    std::vector<double> paths(times.size() * nodes);
    for (std::size_t n = 0; n < times.size(); ++n) {
        std::copy(mesh.nodes().begin(), mesh.nodes().end(), paths.begin() + n * nodes);
    }
    std::vector<double> velocities(paths.size(), 0.0);
    return {TransformKind::Eulerian, {times.begin(), times.end()}, mesh.nodes(), std::move(paths),
            std::move(velocities)};
}

MeanFlowShift mean_flow_shift(const CoefficientSet& cs, std::span<const double> times,
                              const OdeOptions& ode) {
    MeanFlowShift out;
    out.shift = integrate_dopri([&](double t, double) { return mean_velocity(cs, t); }, 0.0, times,
                                ode);
    out.velocity.resize(times.size());
    for (std::size_t n = 0; n < times.size(); ++n) out.velocity[n] = mean_velocity(cs, times[n]);
    return out;
}

CharacteristicTable mean_flow_table(const CoefficientSet& cs, const CoarseMesh& mesh,
                                    std::span<const double> times, const TraceOptions& opt) {
    const MeanFlowShift mf = mean_flow_shift(cs, times, opt.ode);
    const std::size_t nodes = mesh.num_nodes();
    std::vector<double> paths(times.size() * nodes);
    std::vector<double> velocities(times.size() * nodes);
    for (std::size_t n = 0; n < times.size(); ++n) {
        for (std::size_t m = 0; m < nodes; ++m) {
            paths[n * nodes + m] = mesh.node(m) + mf.shift[n];
            velocities[n * nodes + m] = mf.velocity[n];
        }
    }
    return {TransformKind::MeanFlow, {times.begin(), times.end()}, mesh.nodes(), std::move(paths),
            std::move(velocities)};
}

CharacteristicTable trace_characteristics(const CoefficientSet& cs, const CoarseMesh& mesh,
                                          std::span<const double> times,
                                          const TraceOptions& opt) {
    const std::size_t nodes = mesh.num_nodes();
    std::vector<double> paths(times.size() * nodes);
    std::vector<double> velocities(times.size() * nodes);
    const auto rhs = [&](double t, double x) { return cs.c(wrap_unit(x), t); };
    for (std::size_t m = 0; m + 1 < nodes; ++m) {
        const std::vector<double> path = integrate_dopri(rhs, mesh.node(m), times, opt.ode);
        for (std::size_t n = 0; n < times.size(); ++n) {
            paths[n * nodes + m] = path[n];
            velocities[n * nodes + m] = cs.c(wrap_unit(path[n]), times[n]);
        }
    }
    // the node at 1 is the node at 0, one period on
    for (std::size_t n = 0; n < times.size(); ++n) {
        paths[n * nodes + nodes - 1] = paths[n * nodes] + 1.0;
        velocities[n * nodes + nodes - 1] = velocities[n * nodes];
    }
    CharacteristicTable table(TransformKind::Characteristic, {times.begin(), times.end()},
                              mesh.nodes(), std::move(paths), std::move(velocities));
    check_cell_widths(table, mesh, opt.collapse_fraction);
    return table;
}

CharacteristicTable make_table(TransformKind kind, const CoefficientSet& cs,
                               const CoarseMesh& mesh, std::span<const double> times,
                               const TraceOptions& opt) {
    switch (kind) {
    case TransformKind::Eulerian: return identity_table(mesh, times);
    case TransformKind::MeanFlow: return mean_flow_table(cs, mesh, times, opt);
    case TransformKind::Characteristic: return trace_characteristics(cs, mesh, times, opt);
    }
    throw std::invalid_argument("unknown transform kind");
}

void check_cell_widths(const CharacteristicTable& table, const CoarseMesh& mesh, double fraction) {
    const double threshold = fraction * mesh.width();
    for (std::size_t n = 0; n < table.num_times(); ++n) {
        for (std::size_t i = 0; i < mesh.num_cells(); ++i) {
            const double width = table.position(i + 1, n) - table.position(i, n);
            if (!(width > threshold)) throw CellCollapse(i, table.times()[n], width);
        }
    }
}

double effective_velocity(const CoefficientSet& cs, const CellFrame& frame, double w, double t) {
    const double x = frame.position(w);
    return (cs.c(wrap_unit(x), t) - frame.dx_dtau(w)) / frame.dx_dxi;
}

double transformed_diffusivity(const CoefficientSet& cs, const CellFrame& frame, double w,
                               double t) {
    return cs.mu(wrap_unit(frame.position(w)), t);
}

double effective_velocity(const CoefficientSet& cs, const CoarseMesh& mesh,
                          const CharacteristicTable& table, const JacobianFactors& jf, double xi,
                          std::size_t n) {
    const CellLocation loc = locate_periodic(mesh, xi);
    return effective_velocity(cs, jf.frame(loc.cell, n), loc.local, table.times()[n]);
}

CharacteristicTable subsample(const CharacteristicTable& table, std::size_t stride) {
    if (stride == 0 || (table.num_times() - 1) % stride != 0) {
        throw ConfigError(fmt::format("cannot subsample {} times with stride {}", table.num_times(), stride));
    }
    const std::size_t nodes = table.num_nodes();
    std::vector<double> times, xi(nodes), paths, vel;
    for (std::size_t m = 0; m < nodes; ++m) xi[m] = table.node_xi(m);
    for (std::size_t n = 0; n < table.num_times(); n += stride) {
        times.push_back(table.times()[n]);
        for (std::size_t m = 0; m < nodes; ++m) {
            paths.push_back(table.position(m, n));
            vel.push_back(table.velocity(m, n));
        }
    }
    return CharacteristicTable(table.kind(), std::move(times), std::move(xi), std::move(paths),
                               std::move(vel));
}

double max_effective_speed(const CoefficientSet& cs, const CoarseMesh& mesh,
                           const CharacteristicTable& table, std::size_t samples) {
    const JacobianFactors jf(table, mesh);
    double top = 0.0;
    for (std::size_t n = 0; n < table.num_times(); ++n) {
        const double t = table.times()[n];
        for (std::size_t i = 0; i < mesh.num_cells(); ++i) {
            const CellFrame& f = jf.frame(i, n);
            for (std::size_t j = 0; j < samples; ++j) {
                const double w = static_cast<double>(j) / static_cast<double>(samples - 1);
                top = std::max(top, std::abs(effective_velocity(cs, f, w, t)));
            }
        }
    }
    return top;
}

double to_eulerian(const CoarseMesh& mesh, const JacobianFactors& jf, double xi, std::size_t n) {
    const CellLocation loc = locate_periodic(mesh, xi);
    return wrap_unit(jf.frame(loc.cell, n).position(loc.local));
}

std::vector<double> pull_back(std::span<const double> positions, std::span<const double> values,
                              std::span<const double> grid) {
    if (positions.size() != values.size() || positions.empty()) {
        throw std::invalid_argument("pull_back: positions and values must match and be non-empty");
    }
    const std::size_t count = positions.size();
    const double origin = positions.front();
    std::vector<double> out(grid.size());
    for (std::size_t e = 0; e < grid.size(); ++e) {
        // representative of grid[e] in [origin, origin + 1)
        double y = origin + wrap_unit(grid[e] - origin);
        auto it = std::upper_bound(positions.begin(), positions.end(), y);
        const std::size_t right = static_cast<std::size_t>(it - positions.begin());
        const std::size_t left = right - 1;  // right >= 1 since y >= origin
        const double xl = positions[left];
        const double xr = right < count ? positions[right] : origin + 1.0;
        const double vl = values[left];
        const double vr = right < count ? values[right] : values[0];
        const double w = (y - xl) / (xr - xl);
        out[e] = (1.0 - w) * vl + w * vr;
    }
    return out;
}

std::vector<double> uniform_grid(std::size_t count) {
    std::vector<double> g(count);
    for (std::size_t j = 0; j < count; ++j) {
        g[j] = static_cast<double>(j) / static_cast<double>(count);
    }
    return g;
}

}  // namespace msfem
