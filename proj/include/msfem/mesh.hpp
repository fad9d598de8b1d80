#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace msfem {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Uniform periodic coarse mesh on [0,1]. Node N-1 sits at 1 and is the same
// degree of freedom as node 0, so there are N-1 cells and N-1 unknowns.
class CoarseMesh {
public:
    explicit CoarseMesh(std::size_t num_nodes);

    std::size_t num_nodes() const { return num_nodes_; }
    std::size_t num_cells() const { return num_nodes_ - 1; }
    std::size_t num_dofs() const { return num_nodes_ - 1; }
    double width() const { return width_; }

    double node(std::size_t m) const { return nodes_[m]; }
    const std::vector<double>& nodes() const { return nodes_; }

    double cell_left(std::size_t cell) const { return nodes_[cell]; }
    double cell_right(std::size_t cell) const { return nodes_[cell + 1]; }

    // Global DOF index of the left/right node of a cell.
    std::size_t left_dof(std::size_t cell) const { return cell; }
    std::size_t right_dof(std::size_t cell) const { return (cell + 1) % num_dofs(); }

private:
    std::size_t num_nodes_;
    double width_;
    std::vector<double> nodes_;
};

// Uniform subdivision of one coarse cell. Endpoints are copied from the
// coarse mesh so adjacent fine meshes share their coarse node bit-exactly.
class FineMesh {
public:
    FineMesh(const CoarseMesh& coarse, std::size_t cell, std::size_t num_nodes);

    std::size_t parent() const { return parent_; }
    std::size_t num_nodes() const { return nodes_.size(); }
    std::size_t num_elements() const { return nodes_.size() - 1; }
    double width() const { return width_; }
    double left() const { return nodes_.front(); }
    double right() const { return nodes_.back(); }
    double node(std::size_t j) const { return nodes_[j]; }
    const std::vector<double>& nodes() const { return nodes_; }

    // Fraction of the parent cell covered up to fine node j, in [0,1].
    double fraction(std::size_t j) const {
        return static_cast<double>(j) / static_cast<double>(num_elements());
    }

private:
    std::size_t parent_;
    double width_;
    std::vector<double> nodes_;
};

struct CellLocation {
    std::size_t cell;
    double local;  // in [0,1)
};

CoarseMesh build_coarse(std::size_t num_nodes);
FineMesh build_fine(const CoarseMesh& coarse, std::size_t cell, std::size_t num_nodes);

// Reduce x into [0,1).
double wrap_unit(double x);

// Containing cell of x mod 1. Positions within 1e-12 cell widths of a coarse
// node snap to that node (local coordinate exactly 0).
CellLocation locate_periodic(const CoarseMesh& mesh, double x);

}  // namespace msfem
