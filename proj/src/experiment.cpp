#include "msfem/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

#include <fmt/format.h>
#include <fmt/os.h>
#include <fmt/ranges.h>

#include "msfem/global.hpp"

namespace msfem {

std::string variant_name(Variant v) {
    switch (v) {
        case Variant::Fem: return "fem";
        case Variant::MeanFlow: return "mf";
        case Variant::Characteristic: return "char";
        case Variant::Eulerian: return "euler";
    }
    return "?";
}

Variant parse_variant(const std::string& text) {
    if (text == "fem") return Variant::Fem;
    if (text == "mf") return Variant::MeanFlow;
    if (text == "char") return Variant::Characteristic;
    if (text == "euler") return Variant::Eulerian;
    throw ConfigError(fmt::format("unknown variant '{}' (fem, mf, char, euler)", text));
}

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(value);
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

double to_double(const std::string& key, const std::string& value) {
    double v = 0.0;
    const char* end = value.data() + value.size();
    const auto [p, ec] = std::from_chars(value.data(), end, v);
    if (ec != std::errc{} || p != end || !std::isfinite(v)) {
        throw ConfigError(fmt::format("{}: '{}' is not a number", key, value));
    }
    return v;
}

std::size_t to_size(const std::string& key, const std::string& value) {
    std::size_t v = 0;
    const char* end = value.data() + value.size();
    const auto [p, ec] = std::from_chars(value.data(), end, v);
    if (ec != std::errc{} || p != end) {
        throw ConfigError(fmt::format("{}: '{}' is not a non-negative integer", key, value));
    }
    return v;
}

int to_int(const std::string& key, const std::string& value) {
    int v = 0;
    const char* end = value.data() + value.size();
    const auto [p, ec] = std::from_chars(value.data(), end, v);
    if (ec != std::errc{} || p != end) {
        throw ConfigError(fmt::format("{}: '{}' is not an integer", key, value));
    }
    return v;
}

}  // namespace

void ExperimentConfig::set(const std::string& raw_key, const std::string& raw_value) {
    const std::string key = trim(raw_key);
    const std::string value = trim(raw_value);
    if (key == "schema") {
        if (to_int(key, value) != schema_version) {
            throw ConfigError(fmt::format("unsupported config schema {}", value));
        }
    } else if (key == "case") {
        params.id = parse_case_id(value);
    } else if (key == "k") {
        params.k = to_int(key, value);
    } else if (key == "v") {
        params.v = to_double(key, value);
    } else if (key == "alpha") {
        params.alpha = to_double(key, value);
    } else if (key == "sigma") {
        params.sigma = to_double(key, value);
    } else if (key == "nu") {
        params.nu = to_double(key, value);
    } else if (key == "N") {
        N = to_size(key, value);
    } else if (key == "N_f") {
        N_f = to_size(key, value);
    } else if (key == "count_convention") {
        if (value == "nodes") convention = CountConvention::Nodes;
        else if (value == "cells") convention = CountConvention::Cells;
        else throw ConfigError(fmt::format("count_convention: '{}' (nodes, cells)", value));
    } else if (key == "dt") {
        dt = to_double(key, value);
    } else if (key == "T") {
        T = to_double(key, value);
    } else if (key == "variants") {
        variants.clear();
        for (const auto& v : split_list(value)) variants.push_back(parse_variant(v));
        if (variants.empty()) throw ConfigError("variants: empty list");
    } else if (key == "N_ref") {
        N_ref = to_size(key, value);
    } else if (key == "dt_ref") {
        dt_ref = to_double(key, value);
    } else if (key == "ode_tol") {
        ode_tol = to_double(key, value);
    } else if (key == "snapshot_times") {
        snapshot_times.clear();
        for (const auto& v : split_list(value)) snapshot_times.push_back(to_double(key, v));
    } else if (key == "series_every") {
        series_every = to_size(key, value);
    } else if (key == "eval_points") {
        eval_points = to_size(key, value);
    } else if (key == "output_dir") {
        output_dir = value;
    } else if (key == "workers") {
        workers = to_size(key, value);
    } else if (key == "mass_rule") {
        if (value == "current") mass_rule = MassRule::Current;
        else if (value == "midpoint") mass_rule = MassRule::Midpoint;
        else throw ConfigError(fmt::format("mass_rule: '{}' (current, midpoint)", value));
    } else if (key == "N_list") {
        N_list.clear();
        for (const auto& v : split_list(value)) N_list.push_back(to_size(key, v));
        if (N_list.empty()) throw ConfigError("N_list: empty list");
        if (!std::is_sorted(N_list.begin(), N_list.end())) {
            throw ConfigError("N_list must be sorted ascending");
        }
    } else if (key == "cell_measure") {
        if (value == "physical") cell_measure = CellMeasure::Physical;
        else if (value == "reference") cell_measure = CellMeasure::Reference;
        else throw ConfigError(fmt::format("cell_measure: '{}' (physical, reference)", value));
    } else if (key == "basis_rate") {
        if (value == "central") basis_rate = RateRule::Central;
        else if (value == "backward") basis_rate = RateRule::Backward;
        else throw ConfigError(fmt::format("basis_rate: '{}' (central, backward)", value));
    } else if (key == "courant_limit") {
        courant_limit = to_double(key, value);
    } else if (key == "offline_substeps") {
        if (value == "auto") offline_substeps.reset();
        else offline_substeps = to_size(key, value);
    } else if (key == "collapse_fraction") {
        collapse_fraction = to_double(key, value);
    } else {
        throw ConfigError(fmt::format("unknown config key '{}'", key));
    }
}

void ExperimentConfig::load_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(fmt::format("cannot read config file {}", path.string()));
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        if (trim(line).empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(fmt::format("{}:{}: expected key = value", path.string(), lineno));
        }
        set(line.substr(0, eq), line.substr(eq + 1));
    }
}

std::string ExperimentConfig::echo() const {
    std::vector<std::string> names;
    for (Variant v : variants) names.push_back(variant_name(v));
    std::string out;
    auto line = [&](std::string_view key, const auto& value) {
        out += fmt::format("{} = {}\n", key, value);
    };
    line("schema", schema_version);
    line("case", case_name(params.id));
    line("k", params.k);
    if (params.v) line("v", *params.v);
    if (params.alpha) line("alpha", *params.alpha);
    line("sigma", params.sigma);
    line("nu", params.nu);
    line("N", N);
    line("N_f", N_f);
    if (convention) line("count_convention", *convention == CountConvention::Nodes ? "nodes" : "cells");
    line("dt", dt);
    line("T", T);
    line("variants", fmt::format("{}", fmt::join(names, ",")));
    line("N_ref", N_ref);
    line("dt_ref", reference_dt());
    line("ode_tol", ode_tol);
    line("snapshot_times", fmt::format("{}", fmt::join(snapshot_times, ",")));
    line("series_every", series_every);
    line("eval_points", grid_points());
    line("output_dir", output_dir.string());
    line("mass_rule", mass_rule == MassRule::Current ? "current" : "midpoint");
    line("N_list", fmt::format("{}", fmt::join(N_list, ",")));
    line("collapse_fraction", collapse_fraction);
    line("cell_measure", cell_measure == CellMeasure::Physical ? "physical" : "reference");
    line("basis_rate", basis_rate == RateRule::Central ? "central" : "backward");
    line("courant_limit", courant_limit);
    line("offline_substeps", offline_substeps ? std::to_string(*offline_substeps) : std::string("auto"));
    return out;
}

std::size_t ExperimentConfig::worker_count() const {
    if (workers > 0) return workers;
    return std::max(1u, std::thread::hardware_concurrency());
}

std::size_t coarse_nodes(std::size_t n, CountConvention convention) {
    return convention == CountConvention::Nodes ? n : n + 1;
}

std::size_t fine_nodes(std::size_t n, CountConvention convention) {
    return convention == CountConvention::Nodes ? n : n + 1;
}

std::size_t courant_substeps(double speed, double dt, double spacing, double limit) {
    if (!(limit > 0.0)) return 1;
    const double ratio = speed * dt / (spacing * limit);
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(ratio - 1e-12)));
}

double reference_speed(const CoefficientSet& cs, double end_time) {
    constexpr int xs = 2000, ts = 41;
    std::vector<double> row(xs);
    double top = 0.0;
    for (int n = 0; n < ts; ++n) {
        const double t = end_time * n / (ts - 1);
        double mean = 0.0;
        for (int j = 0; j < xs; ++j) {
            row[j] = cs.c(static_cast<double>(j) / xs, t);
            mean += row[j];
        }
        mean /= xs;
        for (double c : row) top = std::max(top, std::abs(c - mean));
    }
    return top;
}

std::vector<std::size_t> steps_for(std::span<const double> times, double dt, double end_time) {
    const std::size_t total = make_time_grid(dt, end_time).size() - 1;
    std::vector<std::size_t> steps;
    steps.reserve(times.size());
    for (double t : times) {
        const double r = t / end_time * static_cast<double>(total);
        const auto s = static_cast<long long>(std::llround(r));
        if (s < 0 || static_cast<std::size_t>(s) > total || std::abs(r - static_cast<double>(s)) > 1e-9 * (1.0 + r)) {
            throw ConfigError(fmt::format("time {} is not on the grid of step {}", t, dt));
        }
        steps.push_back(static_cast<std::size_t>(s));
    }
    return steps;
}

const VariantResult& CaseResult::get(Variant v) const {
    for (const auto& r : variants) {
        if (r.variant == v) return r;
    }
    throw std::out_of_range(fmt::format("variant {} was not run", variant_name(v)));
}

bool CaseResult::any_failure() const {
    return std::any_of(variants.begin(), variants.end(), [](const auto& r) { return !r.ok; });
}

void validate(const ExperimentConfig& cfg, std::size_t coarse_cells) {
    make_time_grid(cfg.dt, cfg.T);
    make_time_grid(cfg.reference_dt(), cfg.T);
    if (cfg.N_ref < 10 * coarse_cells) {
        throw ConfigError(fmt::format("N_ref = {} must be at least 10 x {} coarse cells", cfg.N_ref,
                                      coarse_cells));
    }
    if (cfg.series_every == 0) throw ConfigError("series_every must be positive");
    if (cfg.grid_points() < 2) throw ConfigError("eval_points must be at least 2");
    if (!(cfg.ode_tol > 0.0)) throw ConfigError("ode_tol must be positive");
    if (cfg.courant_limit < 0.0) throw ConfigError("courant_limit must be non-negative");
    if (cfg.offline_substeps && *cfg.offline_substeps == 0) {
        throw ConfigError("offline_substeps must be positive");
    }
    if (!(cfg.collapse_fraction > 0.0 && cfg.collapse_fraction < 1.0)) {
        throw ConfigError("collapse_fraction must lie in (0, 1)");
    }
    for (double t : cfg.snapshot_times) {
        if (!(t >= 0.0 && t <= cfg.T)) throw ConfigError(fmt::format("snapshot time {} outside [0, T]", t));
    }
}

ReferenceOptions reference_options(const ExperimentConfig& cfg, const CoefficientSet& cs) {
    ReferenceOptions ref;
    ref.elements = cfg.N_ref;
    ref.end_time = cfg.T;
    ref.eval_points = cfg.grid_points();
    ref.ode = OdeOptions{cfg.ode_tol, cfg.ode_tol};
    ref.mass_rule = cfg.mass_rule;
    const double spacing = 1.0 / static_cast<double>(cfg.N_ref);
    ref.dt = cfg.reference_dt() / static_cast<double>(courant_substeps(
                                     reference_speed(cs, cfg.T), cfg.reference_dt(), spacing, cfg.courant_limit));
    return ref;
}

double elements_per_period(const CoefficientSet& cs, std::size_t coarse_nodes, std::size_t fine_nodes) {
    const CoarseMesh mesh(coarse_nodes);
    const double h = mesh.width() / static_cast<double>(fine_nodes - 1);
    return std::min(cs.eps_scale, cs.delta_scale) / h;
}

MsfemSettings msfem_settings(const ExperimentConfig& cfg, std::size_t coarse_nodes,
                             std::size_t fine_nodes) {
    MsfemSettings s;
    s.coarse_nodes = coarse_nodes;
    s.fine_nodes = fine_nodes;
    s.dt = cfg.dt;
    s.end_time = cfg.T;
    s.eval_points = cfg.grid_points();
    s.ode = OdeOptions{cfg.ode_tol, cfg.ode_tol};
    s.workers = cfg.worker_count();
    s.mass_rule = cfg.mass_rule;
    s.assembly = {cfg.cell_measure, cfg.basis_rate};
    s.collapse_fraction = cfg.collapse_fraction;
    s.courant_limit = cfg.courant_limit;
    s.offline_substeps = cfg.offline_substeps;
    return s;
}

OfflinePhase offline_phase(const CoefficientSet& cs, TransformKind kind, const MsfemSettings& set) {
    const CoarseMesh mesh(set.coarse_nodes);
    const std::vector<double> times = make_time_grid(set.dt, set.end_time);
    const TraceOptions trace{set.ode, set.collapse_fraction};
    CharacteristicTable table = make_table(kind, cs, mesh, times, trace);

    OfflineOptions off;
    off.fine_nodes = set.fine_nodes;
    off.dt = set.dt;
    off.workers = set.workers;
    off.mass_rule = set.mass_rule;
    off.retain_systems = set.retain_systems;
    off.substeps = set.offline_substeps.value_or(0);
    if (off.substeps == 0) {
        const double spacing = mesh.width() / static_cast<double>(set.fine_nodes - 1);
        off.substeps = courant_substeps(max_effective_speed(cs, mesh, table, set.fine_nodes), set.dt,
                                        spacing, set.courant_limit);
    }
    if (off.substeps == 1) {
        BasisSet basis = compute_offline(mesh, cs, table, off);
        return {std::move(table), std::move(basis), 1};
    }
    const auto fine_times = make_time_grid(set.dt / static_cast<double>(off.substeps), set.end_time);
    const CharacteristicTable fine = make_table(kind, cs, mesh, fine_times, trace);
    BasisSet basis = compute_offline(mesh, cs, fine, off);
    return {subsample(fine, off.substeps), std::move(basis), off.substeps};
}

std::vector<FieldSnapshot> run_msfem(const CoefficientSet& cs, TransformKind kind,
                                     const MsfemSettings& set, std::span<const std::size_t> steps) {
    const OfflinePhase off = offline_phase(cs, kind, set);
    const CoarseSolution sol =
        solve_online(off.basis, cs, set.dt, set.end_time, {set.mass_rule, set.assembly});
    const JacobianFactors jf(off.table, off.basis.mesh());
    std::vector<FieldSnapshot> out;
    out.reserve(steps.size());
    for (std::size_t n : steps) out.push_back(reconstruct(sol, jf, n, set.eval_points));
    return out;
}

namespace {

struct Schedule {
    std::vector<double> times;
    std::vector<bool> is_snapshot;
};

Schedule make_schedule(const ExperimentConfig& cfg) {
    const std::vector<double> grid = make_time_grid(cfg.dt, cfg.T);
    std::vector<double> times;
    for (std::size_t n = 0; n < grid.size(); n += cfg.series_every) times.push_back(grid[n]);
    for (double t : cfg.snapshot_times) times.push_back(t);
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end(),
                            [](double a, double b) { return std::abs(a - b) < 1e-12; }),
                times.end());
    Schedule s;
    s.times = times;
    for (double t : times) {
        s.is_snapshot.push_back(std::any_of(cfg.snapshot_times.begin(), cfg.snapshot_times.end(),
                                            [&](double u) { return std::abs(u - t) < 1e-12; }));
    }
    return s;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

VariantResult run_variant(const ExperimentConfig& cfg, const CoefficientSet& cs, Variant v,
                          std::span<const double> schedule,
                          std::span<const FieldSnapshot> reference) {
    const CountConvention conv = cfg.convention_or(CountConvention::Nodes);
    const std::size_t nodes = coarse_nodes(cfg.N, conv);
    const std::vector<std::size_t> steps = steps_for(schedule, cfg.dt, cfg.T);
    const OdeOptions ode{cfg.ode_tol, cfg.ode_tol};

    VariantResult r;
    r.variant = v;
    const auto start = std::chrono::steady_clock::now();
    try {
        if (v == Variant::Fem) {
            ReferenceOptions opt;
            opt.elements = nodes - 1;
            opt.dt = cfg.dt;
            opt.end_time = cfg.T;
            opt.eval_points = cfg.grid_points();
            opt.ode = ode;
            opt.mass_rule = cfg.mass_rule;
            r.snapshots = reference_solve(cs, opt, steps).snapshots;
        } else {
            const TransformKind kind = v == Variant::MeanFlow       ? TransformKind::MeanFlow
                                       : v == Variant::Eulerian     ? TransformKind::Eulerian
                                                                    : TransformKind::Characteristic;
            r.snapshots = run_msfem(cs, kind, msfem_settings(cfg, nodes, fine_nodes(cfg.N_f, conv)), steps);
        }
        r.series = error_series(r.snapshots, reference);
        r.ok = true;
        for (const auto& e : r.series) {
            if (!std::isfinite(e.rel_l2) || !std::isfinite(e.rel_h1)) {
                r.ok = false;
                r.numerical_failure = true;
                r.error = "non-finite solution";
                break;
            }
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const CellCollapse& e) {
        r.numerical_failure = true;
        r.error = e.what();
    } catch (const std::exception& e) {
        r.numerical_failure = true;
        r.error = e.what();
    }
    r.seconds = seconds_since(start);
    return r;
}

}  // namespace

CaseResult run_case(const ExperimentConfig& cfg) {
    const CountConvention conv = cfg.convention_or(CountConvention::Nodes);
    const CoarseMesh mesh(coarse_nodes(cfg.N, conv));
    validate(cfg, mesh.num_cells());
    const CoefficientSet cs = make_case(cfg.params);
    const Schedule schedule = make_schedule(cfg);

    CaseResult result;
    result.schedule = schedule.times;

    const ReferenceOptions ref = reference_options(cfg, cs);
    const std::vector<std::size_t> ref_steps = steps_for(schedule.times, ref.dt, cfg.T);
    result.reference = reference_solve(cs, ref, ref_steps).snapshots;

    for (Variant v : cfg.variants) {
        result.variants.push_back(run_variant(cfg, cs, v, schedule.times, result.reference));
    }
    return result;
}

namespace {

void write_summary(const std::filesystem::path& path, const std::string& case_label,
                   const CaseResult& result) {
    auto out = fmt::output_file(path.string());
    out.print("case,variant,metric,value,status\n");
    for (const auto& r : result.variants) {
        const std::string status = r.ok ? "ok" : "failed";
        const ErrorReport rep = r.ok ? r.final_report() : ErrorReport{};
        const double nan = std::numeric_limits<double>::quiet_NaN();
        const std::pair<const char*, double> metrics[] = {
            {"rel_L2", r.ok ? rep.rel_l2 : nan},
            {"rel_Linf", r.ok ? rep.rel_linf : nan},
            {"rel_H1", r.ok ? rep.rel_h1 : nan},
            {"max_dev", r.ok ? rep.max_dev : nan},
        };
        for (const auto& [name, value] : metrics) {
            out.print("{},{},{},{:.10e},{}\n", case_label, variant_name(r.variant), name, value, status);
        }
    }
}

std::string case_label(const ExperimentConfig& cfg) {
    std::string label = fmt::format("{}_k{}", case_name(cfg.params.id), cfg.params.k);
    if (cfg.params.v) label += fmt::format("_v{}", *cfg.params.v);
    if (cfg.params.alpha) label += fmt::format("_a{}", *cfg.params.alpha);
    return label;
}

}  // namespace

CaseResult run_case_to_disk(const ExperimentConfig& cfg) {
    std::filesystem::create_directories(cfg.output_dir);
    {
        auto echo = fmt::output_file((cfg.output_dir / "config.txt").string());
        echo.print("{}", cfg.echo());
    }
    CaseResult result = run_case(cfg);
    const std::string label = case_label(cfg);
    const Schedule schedule = make_schedule(cfg);

    std::vector<std::string> names;
    std::vector<std::vector<ErrorReport>> series;
    for (const auto& r : result.variants) {
        if (!r.ok) continue;
        names.push_back(variant_name(r.variant));
        series.push_back(r.series);
    }
    write_error_csv(cfg.output_dir / fmt::format("errors_{}.csv", label), names, series);
    write_summary(cfg.output_dir / "summary.csv", label, result);

    for (std::size_t i = 0; i < schedule.times.size(); ++i) {
        if (!schedule.is_snapshot[i]) continue;
        const std::string stamp = fmt::format("{:.4f}", schedule.times[i]);
        write_snapshot_csv(cfg.output_dir / fmt::format("snapshot_ref_t{}.csv", stamp),
                           result.reference[i]);
        for (const auto& r : result.variants) {
            if (!r.ok) continue;
            write_snapshot_csv(
                cfg.output_dir / fmt::format("snapshot_{}_t{}.csv", variant_name(r.variant), stamp),
                r.snapshots[i]);
        }
    }
    return result;
}

std::vector<ConvergenceRow> convergence_table(const ExperimentConfig& cfg) {
    const CountConvention conv = cfg.convention_or(CountConvention::Cells);
    if (!std::is_sorted(cfg.N_list.begin(), cfg.N_list.end())) {
        throw ConfigError("N_list must be sorted ascending");
    }
    const CoarseMesh largest(coarse_nodes(cfg.N_list.back(), conv));
    ExperimentConfig checked = cfg;
    checked.snapshot_times.clear();
    validate(checked, largest.num_cells());
    const CoefficientSet cs = make_case(cfg.params);
    const double t_end[] = {cfg.T};

    const ReferenceOptions ref = reference_options(cfg, cs);
    const FieldSnapshot reference = reference_solve(cs, ref, steps_for(t_end, ref.dt, cfg.T)).snapshots.at(0);

    const std::vector<std::size_t> steps = steps_for(t_end, cfg.dt, cfg.T);
    std::vector<ConvergenceRow> rows;
    for (std::size_t n : cfg.N_list) {
        const std::size_t nodes = coarse_nodes(n, conv);
        const FieldSnapshot snap =
            run_msfem(cs, TransformKind::Characteristic,
                      msfem_settings(cfg, nodes, fine_nodes(cfg.N_f, conv)), steps)
                .at(0);
        const ErrorReport e = error_norms(snap, reference);
        rows.push_back({nodes - 1, e.rel_l2, e.rel_linf});
    }
    return rows;
}

std::vector<ConvergenceRow> run_convergence_to_disk(const ExperimentConfig& cfg) {
    std::filesystem::create_directories(cfg.output_dir);
    {
        auto echo = fmt::output_file((cfg.output_dir / "config.txt").string());
        echo.print("{}", cfg.echo());
    }
    const std::vector<ConvergenceRow> rows = convergence_table(cfg);
    const std::string csv = fmt::format("table_{}.csv", case_label(cfg));
    write_convergence_csv(cfg.output_dir / csv, rows);
    write_convergence_plot(cfg.output_dir / fmt::format("table_{}.gp", case_label(cfg)), csv);
    return rows;
}

}  // namespace msfem
