#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/os.h>

#include "msfem/basis.hpp"
#include "msfem/experiment.hpp"
#include "msfem/transform.hpp"

namespace {

constexpr int exit_ok = 0;
constexpr int exit_config = 2;
constexpr int exit_numerical = 3;

struct Common {
    std::string config_file;
    std::vector<std::string> overrides;
    std::string output;
    bool dry_run = false;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("-c,--config", c.config_file, "key = value config file");
    cmd->add_option("-s,--set", c.overrides, "override, key=value (repeatable)");
    cmd->add_option("-o,--output", c.output, "output directory");
    cmd->add_flag("--dry-run", c.dry_run, "print the resolved config and exit");
}

msfem::ExperimentConfig resolve(const Common& c, const std::string& verb) {
    msfem::ExperimentConfig cfg;
    if (const char* root = std::getenv("MSFEM_OUTPUT_ROOT"); root && *root) {
        cfg.output_dir = std::filesystem::path(root) / verb;
    }
    if (!c.config_file.empty()) cfg.load_file(c.config_file);
    for (const auto& kv : c.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw msfem::ConfigError(fmt::format("--set {}: expected key=value", kv));
        cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (!c.output.empty()) cfg.output_dir = c.output;
    return cfg;
}

void warn_resolution(const msfem::ExperimentConfig& cfg, std::size_t coarse, std::size_t fine) {
    const double per = msfem::elements_per_period(msfem::make_case(cfg.params), coarse, fine);
    if (per < msfem::min_elements_per_period) {
        fmt::print(stderr, "warning: {:.1f} fine elements per shortest coefficient period (N={} nodes, N_f={})\n",
                   per, coarse, fine);
    }
}

int run_case(const Common& c) {
    const auto cfg = resolve(c, "run-case");
    if (c.dry_run) {
        fmt::print("{}", cfg.echo());
        return exit_ok;
    }
    const auto conv = cfg.convention_or(msfem::CountConvention::Nodes);
    warn_resolution(cfg, msfem::coarse_nodes(cfg.N, conv), msfem::fine_nodes(cfg.N_f, conv));
    const auto result = msfem::run_case_to_disk(cfg);
    for (const auto& r : result.variants) {
        if (r.ok) {
            const auto& e = r.final_report();
            fmt::print("{:6} L2 {:.4e}  Linf {:.4e}  H1 {:.4e}  maxdev {:.4e}  ({:.1f} s)\n",
                       msfem::variant_name(r.variant), e.rel_l2, e.rel_linf, e.rel_h1, e.max_dev,
                       r.seconds);
        } else {
            fmt::print(stderr, "{:6} failed: {}\n", msfem::variant_name(r.variant), r.error);
        }
    }
    fmt::print("wrote {}\n", cfg.output_dir.string());
    return result.any_failure() ? exit_numerical : exit_ok;
}

int run_convergence(const Common& c) {
    const auto cfg = resolve(c, "run-convergence");
    if (c.dry_run) {
        fmt::print("{}", cfg.echo());
        return exit_ok;
    }
    const auto conv = cfg.convention_or(msfem::CountConvention::Cells);
    warn_resolution(cfg, msfem::coarse_nodes(cfg.N_list.back(), conv), msfem::fine_nodes(cfg.N_f, conv));
    const auto rows = msfem::run_convergence_to_disk(cfg);
    for (const auto& r : rows) fmt::print("N={:4}  L2 {:.4e}  Linf {:.4e}\n", r.cells, r.rel_l2, r.rel_linf);
    fmt::print("wrote {}\n", cfg.output_dir.string());
    return exit_ok;
}

msfem::TransformKind kind_from(const std::string& name) {
    if (name == "char") return msfem::TransformKind::Characteristic;
    if (name == "mf") return msfem::TransformKind::MeanFlow;
    if (name == "euler") return msfem::TransformKind::Eulerian;
    throw msfem::ConfigError(fmt::format("unknown transform '{}' (char, mf, euler)", name));
}

int dump_basis(const Common& c, const std::string& transform, std::size_t stride, bool with_systems) {
    const auto cfg = resolve(c, "dump-basis");
    if (c.dry_run) {
        fmt::print("{}", cfg.echo());
        return exit_ok;
    }
    const auto conv = cfg.convention_or(msfem::CountConvention::Nodes);
    warn_resolution(cfg, msfem::coarse_nodes(cfg.N, conv), msfem::fine_nodes(cfg.N_f, conv));
    const auto cs = msfem::make_case(cfg.params);
    auto settings = msfem::msfem_settings(cfg, msfem::coarse_nodes(cfg.N, conv), msfem::fine_nodes(cfg.N_f, conv));
    settings.retain_systems = with_systems;
    const auto off = msfem::offline_phase(cs, kind_from(transform), settings);
    const auto& basis = off.basis;
    if (off.substeps > 1) fmt::print("offline substeps per step: {}\n", off.substeps);

    std::filesystem::create_directories(cfg.output_dir);
    msfem::write_basis_binary(basis, cfg.output_dir / "basis.bin");
    msfem::write_basis_csv(basis, cfg.output_dir / "basis.csv", stride);
    fmt::print("wrote {}\n", cfg.output_dir.string());
    return exit_ok;
}

int trace_chars(const Common& c, std::size_t stride) {
    const auto cfg = resolve(c, "trace-chars");
    if (c.dry_run) {
        fmt::print("{}", cfg.echo());
        return exit_ok;
    }
    const auto conv = cfg.convention_or(msfem::CountConvention::Nodes);
    const msfem::CoarseMesh mesh(msfem::coarse_nodes(cfg.N, conv));
    const auto cs = msfem::make_case(cfg.params);
    const auto times = msfem::make_time_grid(cfg.dt, cfg.T);
    const msfem::TraceOptions trace{{cfg.ode_tol, cfg.ode_tol}, cfg.collapse_fraction};
    const auto table = msfem::trace_characteristics(cs, mesh, times, trace);

    std::filesystem::create_directories(cfg.output_dir);
    auto out = fmt::output_file((cfg.output_dir / "characteristics.csv").string());
    out.print("node,xi,t,x,dxdt\n");
    for (std::size_t m = 0; m < table.num_nodes(); ++m) {
        for (std::size_t n = 0; n < table.num_times(); n += stride) {
            out.print("{},{:.17g},{:.6f},{:.17g},{:.17g}\n", m, table.node_xi(m), table.times()[n],
                      table.position(m, n), table.velocity(m, n));
        }
    }
    out.close();
    fmt::print("wrote {}\n", cfg.output_dir.string());
    return exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"multiscale FEM for periodic 1D advection-diffusion"};
    app.require_subcommand(1);

    Common case_opts, conv_opts, basis_opts, trace_opts;
    std::string transform = "char";
    std::size_t basis_stride = 10, trace_stride = 1;
    bool with_systems = false;

    auto* rc = app.add_subcommand("run-case", "reference, coarse FEM and MsFEM variants with error tables");
    add_common(rc, case_opts);
    auto* cv = app.add_subcommand("run-convergence", "Char-MsFEM error against N");
    add_common(cv, conv_opts);
    auto* db = app.add_subcommand("dump-basis", "offline basis as binary and CSV");
    add_common(db, basis_opts);
    db->add_option("--transform", transform, "char, mf or euler");
    db->add_option("--stride", basis_stride, "time stride of the CSV")->check(CLI::PositiveNumber);
    db->add_flag("--with-systems", with_systems, "also store the local fine matrices in basis.bin");
    auto* tc = app.add_subcommand("trace-chars", "characteristic paths of the coarse nodes as CSV");
    add_common(tc, trace_opts);
    tc->add_option("--stride", trace_stride, "time stride")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_config;
    }

    try {
        if (rc->parsed()) return run_case(case_opts);
        if (cv->parsed()) return run_convergence(conv_opts);
        if (db->parsed()) return dump_basis(basis_opts, transform, basis_stride, with_systems);
        if (tc->parsed()) return trace_chars(trace_opts, trace_stride);
    } catch (const msfem::ConfigError& e) {
        fmt::print(stderr, "config error: {}\n", e.what());
        return exit_config;
    } catch (const msfem::CellCollapse& e) {
        fmt::print(stderr, "cell collapse: {}\n", e.what());
        return exit_numerical;
    } catch (const std::exception& e) {
        fmt::print(stderr, "numerical failure: {}\n", e.what());
        return exit_numerical;
    }
    return exit_config;
}
