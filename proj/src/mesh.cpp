#include "msfem/mesh.hpp"

#include <cmath>

namespace msfem {

CoarseMesh::CoarseMesh(std::size_t num_nodes) : num_nodes_(num_nodes) {
    if (num_nodes < 3) {
        throw ConfigError("coarse mesh needs at least 3 nodes, got " + std::to_string(num_nodes));
    }
    const double cells = static_cast<double>(num_nodes - 1);
    width_ = 1.0 / cells;
    nodes_.resize(num_nodes);
    for (std::size_t m = 0; m < num_nodes; ++m) {
        nodes_[m] = static_cast<double>(m) / cells;
    }
    nodes_.back() = 1.0;
}

FineMesh::FineMesh(const CoarseMesh& coarse, std::size_t cell, std::size_t num_nodes)
    : parent_(cell) {
    if (num_nodes < 3) {
        throw ConfigError("fine mesh needs at least 3 nodes, got " + std::to_string(num_nodes));
    }
    if (cell >= coarse.num_cells()) {
        throw ConfigError("coarse cell index out of range: " + std::to_string(cell));
    }
    const double a = coarse.cell_left(cell);
    const double b = coarse.cell_right(cell);
    const double elements = static_cast<double>(num_nodes - 1);
    width_ = (b - a) / elements;
    nodes_.resize(num_nodes);
    for (std::size_t j = 0; j < num_nodes; ++j) {
        const double w = static_cast<double>(j) / elements;
        nodes_[j] = (1.0 - w) * a + w * b;
    }
    nodes_.front() = a;
    nodes_.back() = b;
}

CoarseMesh build_coarse(std::size_t num_nodes) { return CoarseMesh(num_nodes); }

FineMesh build_fine(const CoarseMesh& coarse, std::size_t cell, std::size_t num_nodes) {
    return FineMesh(coarse, cell, num_nodes);
}

double wrap_unit(double x) {
    double r = x - std::floor(x);
    // floor() of a tiny negative number can give exactly 1.0
    if (r >= 1.0) r = 0.0;
    return r;
}

CellLocation locate_periodic(const CoarseMesh& mesh, double x) {
    const double cells = static_cast<double>(mesh.num_cells());
    double s = wrap_unit(x) * cells;
    const double nearest = std::round(s);
    if (std::abs(s - nearest) < 1e-12) s = nearest;
    auto cell = static_cast<std::size_t>(std::floor(s));
    if (cell >= mesh.num_cells()) cell = 0, s = 0.0;
    return {cell, s - static_cast<double>(cell)};
}

}  // namespace msfem
