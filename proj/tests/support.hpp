#pragma once

#include <cstddef>
#include <vector>

#include "msfem/banded.hpp"
#include "msfem/basis.hpp"
#include "msfem/coeffs.hpp"
#include "msfem/global.hpp"
#include "msfem/mesh.hpp"
#include "msfem/transform.hpp"

namespace msfem::testing {

using Dense = std::vector<std::vector<double>>;

Dense dense(const BandedMatrix& a);
Dense zeros(std::size_t n);
double max_abs_diff(const Dense& a, const Dense& b);
double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b);
double max_abs(const Dense& a);

// Gaussian elimination with partial pivoting.
std::vector<double> dense_solve(Dense a, std::vector<double> b);

// Coefficients from plain lambdas; f defaults to the constant 1.
CoefficientSet simple_set(SpaceTimeField c, SpaceTimeField mu, SpaceField f = {});

CaseParams case_params(CaseId id, int k);
CaseParams case3_params(double v);

// Local fine matrices by composite Gauss quadrature of products of hat
// functions on every fine element, entry by entry.
struct DenseLocal {
    Dense mass, advection, diffusion;
    std::vector<double> load;
};
DenseLocal dense_local(const FineMesh& mesh, const CoefficientSet& cs,
                       const CharacteristicTable& table, const JacobianFactors& jf, std::size_t n);

// Coarse operators by quadrature of the glued basis functions themselves.
struct DenseCoarse {
    Dense mass, rate, advection, diffusion;
    std::vector<double> load;
};
DenseCoarse brute_coarse(const BasisSet& basis, const CoefficientSet& cs,
                         const CharacteristicTable& table, std::size_t n, CellMeasure measure);

CharacteristicTable table_for(TransformKind kind, const CoefficientSet& cs, const CoarseMesh& mesh,
                              double dt, double end_time, double tol = 1e-10);

BasisSet offline(const CoefficientSet& cs, const CoarseMesh& mesh, const CharacteristicTable& table,
                 std::size_t fine_nodes, std::size_t workers = 1, bool retain = true);

}  // namespace msfem::testing
