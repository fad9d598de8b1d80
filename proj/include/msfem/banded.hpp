#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace msfem {

class SingularSystem : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Tridiagonal matrix, optionally with periodic corner entries.
//   lower[i] = A(i, i-1 mod n),  diag[i] = A(i, i),  upper[i] = A(i, i+1 mod n)
// For non-periodic matrices lower[0] and upper[n-1] are unused and kept zero.
class BandedMatrix {
public:
    BandedMatrix() = default;
    BandedMatrix(std::size_t n, bool periodic);

    std::size_t size() const { return diag_.size(); }
    bool periodic() const { return periodic_; }

    std::vector<double>& lower() { return lower_; }
    std::vector<double>& diag() { return diag_; }
    std::vector<double>& upper() { return upper_; }
    const std::vector<double>& lower() const { return lower_; }
    const std::vector<double>& diag() const { return diag_; }
    const std::vector<double>& upper() const { return upper_; }

    // Dense entry access (sums coinciding band slots for tiny periodic sizes).
    double at(std::size_t row, std::size_t col) const;

    // Adds a 2x2 element block coupling rows/cols (a, b) with b = a+1 (mod n if periodic).
    void add_block(std::size_t a, const double block[2][2]);

    void multiply(std::span<const double> x, std::span<double> y) const;
    std::vector<double> multiply(std::span<const double> x) const;

    // this = alpha * this + beta * other
    void combine(double alpha, const BandedMatrix& other, double beta);

    // Replaces row i with the identity row (Dirichlet enforcement).
    void set_identity_row(std::size_t i);

    bool is_symmetric(double tol) const;
    void fill(double value);

private:
    bool periodic_ = false;
    std::vector<double> lower_, diag_, upper_;
};

// Direct solver for BandedMatrix. Non-periodic systems use the Thomas
// algorithm; periodic ones a Sherman-Morrison correction of the
// tridiagonal part. Sizes 1 and 2 are solved densely.
std::vector<double> solve(const BandedMatrix& a, std::span<const double> rhs);

}  // namespace msfem
