#include "msfem/analysis.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>
#include <fmt/os.h>

namespace msfem {

double l2_norm(std::span<const double> v) {
    // trapezoid on a periodic uniform grid reduces to h * sum
    const double h = 1.0 / static_cast<double>(v.size());
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(h * s);
}

double linf_norm(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

double h1_seminorm(std::span<const double> v) {
    const std::size_t n = v.size();
    const double h = 1.0 / static_cast<double>(n);
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const double d = (v[(j + 1) % n] - v[j]) / h;
        s += d * d;
    }
    return std::sqrt(h * s);
}

ErrorReport error_norms(const FieldSnapshot& candidate, const FieldSnapshot& reference) {
    if (candidate.u.size() != reference.u.size() || candidate.x != reference.x) {
        throw std::invalid_argument("error_norms: snapshots live on different grids");
    }
    if (std::abs(candidate.time - reference.time) > 1e-12) {
        throw std::invalid_argument("error_norms: snapshots are at different times");
    }
    std::vector<double> e(candidate.u.size());
    for (std::size_t j = 0; j < e.size(); ++j) e[j] = candidate.u[j] - reference.u[j];

    ErrorReport r;
    r.time = reference.time;
    r.rel_l2 = l2_norm(e) / l2_norm(reference.u);
    r.rel_linf = linf_norm(e) / linf_norm(reference.u);
    r.rel_h1 = h1_seminorm(e) / h1_seminorm(reference.u);
    const double cmax = *std::max_element(candidate.u.begin(), candidate.u.end());
    const double rmax = *std::max_element(reference.u.begin(), reference.u.end());
    r.max_dev = std::abs(cmax - rmax) / rmax;
    return r;
}

std::vector<ErrorReport> error_series(std::span<const FieldSnapshot> candidate,
                                      std::span<const FieldSnapshot> reference) {
    if (candidate.size() != reference.size()) {
        throw std::invalid_argument("error_series: snapshot schedules differ");
    }
    std::vector<ErrorReport> out;
    out.reserve(candidate.size());
    for (std::size_t i = 0; i < candidate.size(); ++i) {
        out.push_back(error_norms(candidate[i], reference[i]));
    }
    return out;
}

double peak_position(const FieldSnapshot& snap) {
    const auto it = std::max_element(snap.u.begin(), snap.u.end());
    return snap.x[static_cast<std::size_t>(it - snap.u.begin())];
}

double periodic_offset(double a, double b) {
    double d = a - b;
    d -= std::floor(d + 0.5);
    return d;
}

void write_error_csv(const std::filesystem::path& path, const std::vector<std::string>& variants,
                     const std::vector<std::vector<ErrorReport>>& series) {
    auto out = fmt::output_file(path.string());
    out.print("t,variant,rel_L2,rel_Linf,rel_H1,max_dev\n");
    for (std::size_t v = 0; v < variants.size(); ++v) {
        for (const ErrorReport& r : series[v]) {
            out.print("{:.6f},{},{:.10e},{:.10e},{:.10e},{:.10e}\n", r.time, variants[v], r.rel_l2,
                      r.rel_linf, r.rel_h1, r.max_dev);
        }
    }
}

void write_snapshot_csv(const std::filesystem::path& path, const FieldSnapshot& snap) {
    auto out = fmt::output_file(path.string());
    out.print("t,x,u\n");
    for (std::size_t j = 0; j < snap.x.size(); ++j) {
        out.print("{:.6f},{:.17g},{:.17g}\n", snap.time, snap.x[j], snap.u[j]);
    }
}

void write_convergence_csv(const std::filesystem::path& path, std::span<const ConvergenceRow> rows) {
    auto out = fmt::output_file(path.string());
    out.print("N,rel_L2,rel_Linf\n");
    for (const ConvergenceRow& r : rows) {
        out.print("{},{:.10e},{:.10e}\n", r.cells, r.rel_l2, r.rel_linf);
    }
}

void write_convergence_plot(const std::filesystem::path& script, const std::string& csv_name) {
    auto out = fmt::output_file(script.string());
    out.print("set datafile separator ','\n"
              "set logscale xy\n"
              "set xlabel 'coarse cells N'\n"
              "set ylabel 'relative error at T'\n"
              "set key top right\n"
              "set grid\n"
              "set terminal pngcairo size 800,600\n"
              "set output '{0}.png'\n"
              "plot '{0}' using 1:2 skip 1 with linespoints title 'L2', \\\n"
              "     '{0}' using 1:3 skip 1 with linespoints title 'Linf'\n",
              csv_name);
}

}  // namespace msfem
