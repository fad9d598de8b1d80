#include "msfem/banded.hpp"

#include <cmath>

namespace msfem {

namespace {

constexpr double pivot_floor = 1e-300;

void check_pivot(double p) {
    if (!(std::abs(p) > pivot_floor)) throw SingularSystem("zero pivot in tridiagonal solve");
}

// Thomas algorithm on (sub, main, super); sub[0] and super[n-1] ignored.
std::vector<double> thomas(std::span<const double> sub, std::span<const double> main,
                           std::span<const double> super, std::span<const double> rhs) {
    const std::size_t n = main.size();
    std::vector<double> c(n), d(n), x(n);
    check_pivot(main[0]);
    c[0] = n > 1 ? super[0] / main[0] : 0.0;
    d[0] = rhs[0] / main[0];
    for (std::size_t i = 1; i < n; ++i) {
        const double m = main[i] - sub[i] * c[i - 1];
        check_pivot(m);
        c[i] = i + 1 < n ? super[i] / m : 0.0;
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / m;
    }
    x[n - 1] = d[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) x[i] = d[i] - c[i] * x[i + 1];
    return x;
}

}  // namespace

BandedMatrix::BandedMatrix(std::size_t n, bool periodic)
    : periodic_(periodic), lower_(n, 0.0), diag_(n, 0.0), upper_(n, 0.0) {
    if (n == 0) throw std::invalid_argument("banded matrix must have positive size");
}

double BandedMatrix::at(std::size_t row, std::size_t col) const {
    const std::size_t n = size();
    double v = 0.0;
    if (row == col) v += diag_[row];
    const std::size_t right = row + 1 < n ? row + 1 : (periodic_ ? 0 : n);
    const std::size_t left = row > 0 ? row - 1 : (periodic_ ? n - 1 : n);
    if (col == right && right != row) v += upper_[row];
    if (col == left && left != row) v += lower_[row];
    return v;
}

void BandedMatrix::add_block(std::size_t a, const double block[2][2]) {
    const std::size_t n = size();
    std::size_t b = a + 1;
    if (b == n) {
        if (!periodic_) throw std::out_of_range("element block outside non-periodic matrix");
        b = 0;
    }
    diag_[a] += block[0][0];
    upper_[a] += block[0][1];
    lower_[b] += block[1][0];
    diag_[b] += block[1][1];
}

void BandedMatrix::multiply(std::span<const double> x, std::span<double> y) const {
    const std::size_t n = size();
    if (n == 1) {
        y[0] = diag_[0] * x[0];
        return;
    }
    for (std::size_t i = 0; i < n; ++i) {
        double v = diag_[i] * x[i];
        if (i > 0) v += lower_[i] * x[i - 1];
        else if (periodic_) v += lower_[0] * x[n - 1];
        if (i + 1 < n) v += upper_[i] * x[i + 1];
        else if (periodic_) v += upper_[n - 1] * x[0];
        y[i] = v;
    }
}

std::vector<double> BandedMatrix::multiply(std::span<const double> x) const {
    std::vector<double> y(size());
    multiply(x, y);
    return y;
}

void BandedMatrix::combine(double alpha, const BandedMatrix& other, double beta) {
    if (other.size() != size() || other.periodic_ != periodic_) {
        throw std::invalid_argument("banded matrices are not conformant");
    }
    for (std::size_t i = 0; i < size(); ++i) {
        lower_[i] = alpha * lower_[i] + beta * other.lower_[i];
        diag_[i] = alpha * diag_[i] + beta * other.diag_[i];
        upper_[i] = alpha * upper_[i] + beta * other.upper_[i];
    }
}

void BandedMatrix::set_identity_row(std::size_t i) {
    lower_[i] = 0.0;
    diag_[i] = 1.0;
    upper_[i] = 0.0;
}

bool BandedMatrix::is_symmetric(double tol) const {
    const std::size_t n = size();
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < n; ++c) {
            if (std::abs(at(r, c) - at(c, r)) > tol) return false;
        }
    }
    return true;
}

void BandedMatrix::fill(double value) {
    std::fill(lower_.begin(), lower_.end(), value);
    std::fill(diag_.begin(), diag_.end(), value);
    std::fill(upper_.begin(), upper_.end(), value);
    if (!periodic_) {
        lower_[0] = 0.0;
        upper_.back() = 0.0;
    }
}

std::vector<double> solve(const BandedMatrix& a, std::span<const double> rhs) {
    const std::size_t n = a.size();
    if (rhs.size() != n) throw std::invalid_argument("right-hand side has wrong length");
    if (n == 1) {
        check_pivot(a.diag()[0]);
        return {rhs[0] / a.diag()[0]};
    }
    if (n == 2) {
        const double a00 = a.at(0, 0), a01 = a.at(0, 1), a10 = a.at(1, 0), a11 = a.at(1, 1);
        const double det = a00 * a11 - a01 * a10;
        check_pivot(det);
        return {(a11 * rhs[0] - a01 * rhs[1]) / det, (a00 * rhs[1] - a10 * rhs[0]) / det};
    }
    if (!a.periodic()) return thomas(a.lower(), a.diag(), a.upper(), rhs);

    // A = T + u v^T with u = (gamma, 0, ..., 0, corner_lo), v = (1, 0, ..., 0, corner_up / gamma)
    const double corner_up = a.lower()[0];       // A(0, n-1)
    const double corner_lo = a.upper()[n - 1];   // A(n-1, 0)
    const double gamma = -a.diag()[0];
    std::vector<double> main(a.diag());
    main[0] -= gamma;
    main[n - 1] -= corner_lo * corner_up / gamma;

    std::vector<double> x = thomas(a.lower(), main, a.upper(), rhs);
    std::vector<double> u(n, 0.0);
    u[0] = gamma;
    u[n - 1] = corner_lo;
    const std::vector<double> z = thomas(a.lower(), main, a.upper(), u);
    const double vx = x[0] + corner_up / gamma * x[n - 1];
    const double vz = z[0] + corner_up / gamma * z[n - 1];
    const double denom = 1.0 + vz;
    check_pivot(denom);
    const double factor = vx / denom;
    for (std::size_t i = 0; i < n; ++i) x[i] -= factor * z[i];
    return x;
}

}  // namespace msfem
