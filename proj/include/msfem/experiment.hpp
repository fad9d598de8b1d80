#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "msfem/analysis.hpp"
#include "msfem/basis.hpp"
#include "msfem/coeffs.hpp"
#include "msfem/fem1d.hpp"
#include "msfem/global.hpp"
#include "msfem/transform.hpp"

namespace msfem {

enum class Variant { Fem, MeanFlow, Characteristic, Eulerian };

std::string variant_name(Variant v);
Variant parse_variant(const std::string& text);

enum class CountConvention { Nodes, Cells };

// Flat key = value configuration. Every key has a default; see README for the
// schema. `N` and `N_f` are interpreted through `count_convention`.
struct ExperimentConfig {
    static constexpr int schema_version = 1;

    CaseParams params;
    std::size_t N = 10;
    std::size_t N_f = 75;
    std::optional<CountConvention> convention;  // unset: nodes for run-case, cells for convergence
    double dt = 1e-3;
    double T = 1.0;
    std::vector<Variant> variants = {Variant::Fem, Variant::MeanFlow, Variant::Characteristic};
    std::size_t N_ref = 750;
    std::optional<double> dt_ref;  // defaults to dt
    double ode_tol = 1e-9;
    std::vector<double> snapshot_times = {0.25, 0.5, 0.75, 1.0};
    std::size_t series_every = 10;
    std::optional<std::size_t> eval_points;  // defaults to N_ref
    std::filesystem::path output_dir = "out";
    std::size_t workers = 0;  // 0: hardware concurrency
    MassRule mass_rule = MassRule::Current;
    std::vector<std::size_t> N_list = {24, 48, 96, 192, 384};
    double collapse_fraction = 0.01;
    CellMeasure cell_measure = CellMeasure::Physical;
    RateRule basis_rate = RateRule::Central;
    double courant_limit = 0.5;                   // 0 turns automatic substepping off
    std::optional<std::size_t> offline_substeps;  // unset: from courant_limit

    void set(const std::string& key, const std::string& value);
    void load_file(const std::filesystem::path& path);
    std::string echo() const;

    CountConvention convention_or(CountConvention fallback) const {
        return convention.value_or(fallback);
    }
    std::size_t worker_count() const;
    double reference_dt() const { return dt_ref.value_or(dt); }
    std::size_t grid_points() const { return eval_points.value_or(N_ref); }
};

// Coarse / fine node counts after applying the counting convention.
std::size_t coarse_nodes(std::size_t n, CountConvention convention);
std::size_t fine_nodes(std::size_t n, CountConvention convention);

// Smallest s >= 1 with speed * (dt / s) / spacing <= limit; 1 when limit <= 0.
std::size_t courant_substeps(double speed, double dt, double spacing, double limit);

// Largest |c(x, t) - mean_x c(., t)| over a sample of the unit square.
double reference_speed(const CoefficientSet& cs, double end_time);

// Step index of each time on a grid of spacing dt; throws ConfigError when a
// time does not fall on the grid.
std::vector<std::size_t> steps_for(std::span<const double> times, double dt, double end_time);

struct VariantResult {
    Variant variant;
    bool ok = false;
    bool numerical_failure = false;
    std::string error;
    std::vector<FieldSnapshot> snapshots;  // on the schedule
    std::vector<ErrorReport> series;       // against the reference on the schedule
    double seconds = 0.0;

    const ErrorReport& final_report() const { return series.back(); }
    const FieldSnapshot& final_snapshot() const { return snapshots.back(); }
};

struct CaseResult {
    std::vector<double> schedule;  // error-series times
    std::vector<FieldSnapshot> reference;
    std::vector<VariantResult> variants;

    const VariantResult& get(Variant v) const;
    bool any_failure() const;
};

// Validates sizes and grids; throws ConfigError.
void validate(const ExperimentConfig& cfg, std::size_t coarse_cells);

// Runs the reference, then each variant, comparing on a schedule made of the
// snapshot times plus every `series_every` steps.
CaseResult run_case(const ExperimentConfig& cfg);

// As run_case, also writing config.txt, snapshot CSVs, errors_<case>.csv and
// summary.csv into cfg.output_dir.
CaseResult run_case_to_disk(const ExperimentConfig& cfg);

// Char-MsFEM for every N in N_list against one shared reference at T.
std::vector<ConvergenceRow> convergence_table(const ExperimentConfig& cfg);
std::vector<ConvergenceRow> run_convergence_to_disk(const ExperimentConfig& cfg);

struct MsfemSettings {
    std::size_t coarse_nodes = 10;
    std::size_t fine_nodes = 75;
    double dt = 1e-3;
    double end_time = 1.0;
    std::size_t eval_points = 750;
    OdeOptions ode;
    std::size_t workers = 1;
    MassRule mass_rule = MassRule::Current;
    CoarseAssembly assembly;
    double collapse_fraction = 0.01;
    double courant_limit = 0.5;
    std::optional<std::size_t> offline_substeps;
    bool retain_systems = false;
};

// Characteristic table on the coarse time grid and the basis computed from it.
// When the fine-grid Courant number max|c~| dt / h exceeds courant_limit the
// cell problems are integrated with `substeps` steps per coarse step and only
// the coarse time levels are kept.
struct OfflinePhase {
    CharacteristicTable table;
    BasisSet basis;
    std::size_t substeps = 1;
};

OfflinePhase offline_phase(const CoefficientSet& cs, TransformKind kind, const MsfemSettings& settings);

// Single MsFEM run of one transform with snapshots at the given steps.
std::vector<FieldSnapshot> run_msfem(const CoefficientSet& cs, TransformKind kind,
                                     const MsfemSettings& settings,
                                     std::span<const std::size_t> steps);

// Reference solver settings; dt_ref is divided further when the fine grid
// Courant number would exceed courant_limit.
ReferenceOptions reference_options(const ExperimentConfig& cfg, const CoefficientSet& cs);

// Fine elements per shortest coefficient period at t = 0; fewer than
// min_elements_per_period means the cell problems under-resolve the coefficients.
constexpr double min_elements_per_period = 8.0;
double elements_per_period(const CoefficientSet& cs, std::size_t coarse_nodes, std::size_t fine_nodes);

MsfemSettings msfem_settings(const ExperimentConfig& cfg, std::size_t coarse_nodes,
                             std::size_t fine_nodes);

}  // namespace msfem
