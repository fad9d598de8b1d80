#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "msfem/fem1d.hpp"

namespace msfem {

struct ErrorReport {
    double time = 0.0;
    double rel_l2 = 0.0;
    double rel_linf = 0.0;
    double rel_h1 = 0.0;   // seminorm
    double max_dev = 0.0;  // |max(candidate) - max(reference)| / max(reference)
};

// Discrete norms on a uniform periodic grid: trapezoid L2, nodal max, and the
// L2 norm of forward differences for the H1 seminorm.
double l2_norm(std::span<const double> v);
double linf_norm(std::span<const double> v);
double h1_seminorm(std::span<const double> v);

ErrorReport error_norms(const FieldSnapshot& candidate, const FieldSnapshot& reference);

std::vector<ErrorReport> error_series(std::span<const FieldSnapshot> candidate,
                                      std::span<const FieldSnapshot> reference);

// Grid position of the maximum of a snapshot.
double peak_position(const FieldSnapshot& snap);

// Signed periodic distance a - b reduced to [-1/2, 1/2).
double periodic_offset(double a, double b);

struct ConvergenceRow {
    std::size_t cells = 0;
    double rel_l2 = 0.0;
    double rel_linf = 0.0;
};

void write_error_csv(const std::filesystem::path& path, const std::vector<std::string>& variants,
                     const std::vector<std::vector<ErrorReport>>& series);
void write_snapshot_csv(const std::filesystem::path& path, const FieldSnapshot& snap);
void write_convergence_csv(const std::filesystem::path& path, std::span<const ConvergenceRow> rows);
// gnuplot script plotting the convergence CSV on log-log axes.
void write_convergence_plot(const std::filesystem::path& script, const std::string& csv_name);

}  // namespace msfem
