#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "msfem/coeffs.hpp"
#include "msfem/fem1d.hpp"
#include "msfem/mesh.hpp"
#include "msfem/transform.hpp"

namespace msfem {

// Coarse 2x2 contributions alpha * X * alpha^T of one cell at one time, for
// X in {mass, advection, diffusion}; `rate` pairs the mass matrix with the
// basis time derivative and `load` the fine load vector with alpha.
struct CellBlocks {
    double mass[2][2] = {};
    double rate[2][2] = {};          // backward difference of alpha
    double rate_central[2][2] = {};  // central difference of alpha
    double advection[2][2] = {};
    double diffusion[2][2] = {};
    double load[2] = {};
    bool has_load = false;
};

CellBlocks cell_blocks(const BandedMatrix& mass, const LocalSystem& local,
                       std::span<const double> alpha, std::span<const double> backward_rate,
                       std::span<const double> central_rate);

// Time history of the "left" basis function of one coarse cell (1 at the left
// node, 0 at the right node) on the cell's fine mesh, plus the local matrices
// assembled along the way. The right basis function is 1 - alphas.
class BasisTrajectory {
public:
    BasisTrajectory(std::size_t cell, std::size_t fine_nodes, std::size_t num_times);

    std::size_t cell() const { return cell_; }
    std::size_t fine_nodes() const { return fine_nodes_; }
    std::size_t num_times() const { return num_times_; }

    std::span<const double> alphas(std::size_t n) const {
        return {alphas_.data() + n * fine_nodes_, fine_nodes_};
    }
    std::span<double> alphas(std::size_t n) { return {alphas_.data() + n * fine_nodes_, fine_nodes_}; }
    const std::vector<double>& all_alphas() const { return alphas_; }

    // dx/dxi of the cell at each stored time
    double jacobian(std::size_t n) const { return jacobians_.at(n); }
    const std::vector<double>& jacobians() const { return jacobians_; }
    void set_jacobians(std::vector<double> j) { jacobians_ = std::move(j); }

    const BandedMatrix& mass() const { return mass_; }
    const LocalSystem& system(std::size_t n) const { return systems_.at(n); }
    bool has_systems() const { return systems_.size() == num_times_; }
    const CellBlocks& blocks(std::size_t n) const { return blocks_.at(n); }
    bool has_blocks() const { return blocks_.size() == num_times_; }

    void set_mass(BandedMatrix mass) { mass_ = std::move(mass); }
    void push_system(LocalSystem sys) { systems_.push_back(std::move(sys)); }
    void push_blocks(const CellBlocks& b) { blocks_.push_back(b); }

private:
    std::size_t cell_;
    std::size_t fine_nodes_;
    std::size_t num_times_;
    std::vector<double> alphas_;  // [time][fine node]
    std::vector<double> jacobians_;
    BandedMatrix mass_;
    std::vector<LocalSystem> systems_;
    std::vector<CellBlocks> blocks_;
};

enum class RateRule { Backward, Central };

// Backward: (alphas(n) - alphas(n-1)) / dt, zero at n = 0.
// Central: (alphas(n+1) - alphas(n-1)) / (2 dt), one-sided at both ends.
std::vector<double> basis_time_derivative(const BasisTrajectory& traj, std::size_t n, double dt,
                                          RateRule rule = RateRule::Backward);

// Integrates the cell problem with Dirichlet values {1, 0}. Coarse blocks are
// always recorded; the local matrices themselves only with `retain_systems`.
// With substeps > 1 the table is on a grid of dt / substeps and only every
// substeps-th state is kept.
BasisTrajectory compute_basis(const FineMesh& mesh, const CoefficientSet& cs,
                              const CharacteristicTable& table, const JacobianFactors& jf,
                              double dt, MassRule rule = MassRule::Current,
                              bool retain_systems = true, std::size_t substeps = 1);

// Glued nodal basis over all coarse cells.
class BasisSet {
public:
    BasisSet(const CoarseMesh& mesh, std::vector<BasisTrajectory> cells, std::vector<double> times);

    const CoarseMesh& mesh() const { return mesh_; }
    std::size_t num_cells() const { return cells_.size(); }
    std::size_t num_times() const { return times_.size(); }
    const std::vector<double>& times() const { return times_; }
    double dt() const { return times_.size() > 1 ? times_[1] - times_[0] : 0.0; }
    const BasisTrajectory& cell(std::size_t i) const { return cells_[i]; }

    // Value of nodal basis function `dof` at fine node j of `cell` at time n.
    double value(std::size_t dof, std::size_t cell, std::size_t j, std::size_t n) const;

private:
    CoarseMesh mesh_;
    std::vector<BasisTrajectory> cells_;
    std::vector<double> times_;
};

BasisSet glue(const CoarseMesh& mesh, std::vector<BasisTrajectory> cells, std::vector<double> times);

struct OfflineOptions {
    std::size_t fine_nodes = 75;
    double dt = 1e-3;
    std::size_t workers = 1;
    MassRule mass_rule = MassRule::Current;
    bool retain_systems = true;
    std::size_t substeps = 1;  // table holds substeps * steps + 1 times
};

// Computes every cell's trajectory, distributing cells over `workers`
// threads. The result does not depend on the worker count.
BasisSet compute_offline(const CoarseMesh& mesh, const CoefficientSet& cs,
                         const CharacteristicTable& table, const OfflineOptions& options);

// Versioned binary dump of all alphas (see README for the layout) and a CSV
// with columns cell,j,t,alpha.
void write_basis_binary(const BasisSet& basis, const std::filesystem::path& path);
BasisSet read_basis_alphas(const std::filesystem::path& path);
void write_basis_csv(const BasisSet& basis, const std::filesystem::path& path,
                     std::size_t time_stride = 1);

}  // namespace msfem
