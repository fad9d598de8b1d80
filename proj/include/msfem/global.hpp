#pragma once

#include <vector>

#include "msfem/banded.hpp"
#include "msfem/basis.hpp"
#include "msfem/fem1d.hpp"

namespace msfem {

// Coarse operators of  M u' + N u + A u = D u + G  at one stored time.
struct CoarseSystem {
    BandedMatrix mass;
    BandedMatrix basis_rate;  // N: int phi_i d/dt phi_j
    BandedMatrix advection;
    BandedMatrix diffusion;
    std::vector<double> load;  // empty without forcing
};

struct CoarseSolution {
    std::vector<double> times;
    std::vector<std::vector<double>> u;  // one coarse DOF vector per stored time
    const BasisSet* basis = nullptr;
};

// How cell contributions are summed into the coarse system. `Reference` adds
// the blocks as they are (integrals in the reference coordinate xi);
// `Physical` scales each cell by its dx/dxi so that the sum is the weak form
// in x. The two agree whenever all cells share one jacobian.
enum class CellMeasure { Physical, Reference };

// Collects alpha * X * alpha^T from every cell, using the recorded blocks when
// present and the stored local matrices otherwise.
struct CoarseAssembly {
    CellMeasure measure = CellMeasure::Physical;
    RateRule rate = RateRule::Central;
};

CoarseSystem assemble_coarse(const BasisSet& basis, std::size_t n, const CoarseAssembly& how = {});

// L2 projection of f onto the basis at time 0.
std::vector<double> project_initial(const BasisSet& basis, const SpaceField& f);

struct OnlineOptions {
    MassRule mass_rule = MassRule::Current;
    CoarseAssembly assembly;
};

CoarseSolution solve_online(const BasisSet& basis, const CoefficientSet& cs, double dt,
                            double end_time, const OnlineOptions& options = {});

// Fine-scale values sum_j u_j phi_j at every fine node, in cell order without
// the duplicated right endpoint, together with their unwrapped positions.
struct FineField {
    std::vector<double> positions;
    std::vector<double> values;
};
FineField fine_field(const CoarseSolution& sol, const JacobianFactors& jf, std::size_t n);

FieldSnapshot reconstruct(const CoarseSolution& sol, const JacobianFactors& jf, std::size_t n,
                          std::size_t eval_points);

}  // namespace msfem
