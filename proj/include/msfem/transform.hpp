#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "msfem/coeffs.hpp"
#include "msfem/mesh.hpp"
#include "msfem/ode.hpp"

namespace msfem {

enum class TransformKind { Eulerian, MeanFlow, Characteristic };

std::string transform_name(TransformKind kind);

// Thrown when two traced coarse nodes come closer than the collapse threshold.
class CellCollapse : public std::runtime_error {
public:
    CellCollapse(std::size_t cell, double time, double width);
    std::size_t cell;
    double time;
    double width;
};

// Uniform time grid t_n = n * dt, n = 0..steps. The last entry is exactly T.
std::vector<double> make_time_grid(double dt, double end_time);

// Trajectories of the coarse nodes on the stored time grid. Positions are kept
// unwrapped; coefficients are always evaluated at position mod 1.
class CharacteristicTable {
public:
    CharacteristicTable(TransformKind kind, std::vector<double> times, std::vector<double> node_xi,
                        std::vector<double> paths, std::vector<double> velocities);

    TransformKind kind() const { return kind_; }
    const std::vector<double>& times() const { return times_; }
    std::size_t num_times() const { return times_.size(); }
    std::size_t num_nodes() const { return node_xi_.size(); }
    double node_xi(std::size_t m) const { return node_xi_[m]; }

    double position(std::size_t m, std::size_t n) const { return paths_[n * num_nodes() + m]; }
    double velocity(std::size_t m, std::size_t n) const { return velocities_[n * num_nodes() + m]; }

private:
    TransformKind kind_;
    std::vector<double> times_;
    std::vector<double> node_xi_;
    std::vector<double> paths_;       // [time][node]
    std::vector<double> velocities_;  // [time][node]
};

// Per-cell linear coordinate map at one stored time.
struct CellFrame {
    double xi_left;
    double width;          // H
    double x_left;
    double x_right;
    double dx_dtau_left;   // nodal velocities
    double dx_dtau_right;
    double dx_dxi;         // (x_right - x_left) / H

    // Physical position of the point at fraction w in [0,1] of the cell.
    double position(double w) const { return (1.0 - w) * x_left + w * x_right; }
    double dx_dtau(double w) const { return (1.0 - w) * dx_dtau_left + w * dx_dtau_right; }
};

class JacobianFactors {
public:
    JacobianFactors(const CharacteristicTable& table, const CoarseMesh& mesh);

    std::size_t num_cells() const { return num_cells_; }
    std::size_t num_times() const { return num_times_; }
    const CellFrame& frame(std::size_t cell, std::size_t n) const {
        return frames_[n * num_cells_ + cell];
    }

private:
    std::size_t num_cells_;
    std::size_t num_times_;
    std::vector<CellFrame> frames_;
};

struct TraceOptions {
    OdeOptions ode;
    double collapse_fraction = 0.01;
};

CharacteristicTable identity_table(const CoarseMesh& mesh, std::span<const double> times);

// Integral of the mean velocity, sampled on `times`, and the mean velocity itself.
struct MeanFlowShift {
    std::vector<double> shift;
    std::vector<double> velocity;
};
MeanFlowShift mean_flow_shift(const CoefficientSet& cs, std::span<const double> times,
                              const OdeOptions& ode);

CharacteristicTable mean_flow_table(const CoefficientSet& cs, const CoarseMesh& mesh,
                                    std::span<const double> times, const TraceOptions& opt = {});

// Traces dx/dt = c(x mod 1, t) from every coarse node. Throws CellCollapse.
CharacteristicTable trace_characteristics(const CoefficientSet& cs, const CoarseMesh& mesh,
                                          std::span<const double> times,
                                          const TraceOptions& opt = {});

CharacteristicTable make_table(TransformKind kind, const CoefficientSet& cs,
                               const CoarseMesh& mesh, std::span<const double> times,
                               const TraceOptions& opt = {});

// Every stride-th time of the table.
CharacteristicTable subsample(const CharacteristicTable& table, std::size_t stride);

// Largest |effective velocity| over the table, sampled at `samples` points per cell.
double max_effective_speed(const CoefficientSet& cs, const CoarseMesh& mesh,
                           const CharacteristicTable& table, std::size_t samples);

// Throws CellCollapse if any cell of the table is narrower than fraction * H.
void check_cell_widths(const CharacteristicTable& table, const CoarseMesh& mesh, double fraction);

// Residual velocity [c(x(xi)) - dx/dtau] / (dx/dxi) at fraction w of a cell.
double effective_velocity(const CoefficientSet& cs, const CellFrame& frame, double w, double t);
double effective_velocity(const CoefficientSet& cs, const CoarseMesh& mesh,
                          const CharacteristicTable& table, const JacobianFactors& jf, double xi,
                          std::size_t n);

// Diffusivity seen in the moving frame, mu(x(xi) mod 1, t).
double transformed_diffusivity(const CoefficientSet& cs, const CellFrame& frame, double w,
                               double t);

double to_eulerian(const CoarseMesh& mesh, const JacobianFactors& jf, double xi, std::size_t n);

// Periodic piecewise-linear interpolation. `positions` must be strictly
// increasing and span less than one period; the segment from the last
// position to positions[0] + 1 closes the loop.
std::vector<double> pull_back(std::span<const double> positions, std::span<const double> values,
                              std::span<const double> eulerian_grid);

// x_j = j / count, j = 0..count-1
std::vector<double> uniform_grid(std::size_t count);

}  // namespace msfem
