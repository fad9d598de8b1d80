#include "msfem/basis.hpp"

#include <atomic>
#include <cstdint>
#include <cstring>
#include <exception>
#include <fstream>
#include <optional>
#include <thread>

#include <fmt/format.h>
#include <fmt/os.h>

namespace msfem {

BasisTrajectory::BasisTrajectory(std::size_t cell, std::size_t fine_nodes, std::size_t num_times)
    : cell_(cell), fine_nodes_(fine_nodes), num_times_(num_times),
      alphas_(fine_nodes * num_times, 0.0), jacobians_(num_times, 1.0) {}

std::vector<double> basis_time_derivative(const BasisTrajectory& traj, std::size_t n, double dt,
                                          RateRule rule) {
    std::vector<double> d(traj.fine_nodes(), 0.0);
    const std::size_t lo = n == 0 ? 0 : n - 1;
    std::size_t hi = n;
    if (rule == RateRule::Central && n + 1 < traj.num_times()) hi = n + 1;
    if (rule == RateRule::Backward && n == 0) return d;
    if (hi == lo) return d;
    const auto a = traj.alphas(hi);
    const auto b = traj.alphas(lo);
    const double span = dt * static_cast<double>(hi - lo);
    for (std::size_t j = 0; j < d.size(); ++j) d[j] = (a[j] - b[j]) / span;
    return d;
}

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// block[a][b] = rows[a] . (X * cols[b])
void sandwich(const BandedMatrix& x, const std::vector<double> (&rows)[2],
              const std::vector<double> (&cols)[2], double block[2][2]) {
    for (int b = 0; b < 2; ++b) {
        const std::vector<double> xc = x.multiply(cols[b]);
        for (int a = 0; a < 2; ++a) block[a][b] = dot(rows[a], xc);
    }
}

}  // namespace

CellBlocks cell_blocks(const BandedMatrix& mass, const LocalSystem& local,
                       std::span<const double> alpha, std::span<const double> backward_rate,
                       std::span<const double> central_rate) {
    const std::size_t nf = alpha.size();
    std::vector<double> rows[2] = {{alpha.begin(), alpha.end()}, std::vector<double>(nf)};
    std::vector<double> back[2] = {{backward_rate.begin(), backward_rate.end()}, std::vector<double>(nf)};
    std::vector<double> cent[2] = {{central_rate.begin(), central_rate.end()}, std::vector<double>(nf)};
    for (std::size_t j = 0; j < nf; ++j) {
        rows[1][j] = 1.0 - alpha[j];
        back[1][j] = -backward_rate[j];
        cent[1][j] = -central_rate[j];
    }
    CellBlocks b;
    sandwich(mass, rows, rows, b.mass);
    sandwich(mass, rows, back, b.rate);
    sandwich(mass, rows, cent, b.rate_central);
    sandwich(local.advection, rows, rows, b.advection);
    sandwich(local.diffusion, rows, rows, b.diffusion);
    if (!local.load.empty()) {
        b.has_load = true;
        b.load[0] = dot(rows[0], local.load);
        b.load[1] = dot(rows[1], local.load);
    }
    return b;
}

BasisTrajectory compute_basis(const FineMesh& mesh, const CoefficientSet& cs,
                              const CharacteristicTable& table, const JacobianFactors& jf,
                              double dt, MassRule rule, bool retain_systems, std::size_t substeps) {
    if (substeps == 0) throw ConfigError("offline substeps must be positive");
    if ((table.num_times() - 1) % substeps != 0) {
        throw ConfigError("characteristic table does not hold a whole number of substeps per step");
    }
    const std::size_t nodes = mesh.num_nodes();
    const std::size_t num_times = (table.num_times() - 1) / substeps + 1;
    BasisTrajectory traj(mesh.parent(), nodes, num_times);

    std::vector<double> hat(nodes);
    for (std::size_t j = 0; j < nodes; ++j) hat[j] = 1.0 - mesh.fraction(j);
    hat.front() = 1.0;
    hat.back() = 0.0;
    std::copy(hat.begin(), hat.end(), traj.alphas(0).begin());
    std::vector<double> jac(num_times);
    for (std::size_t n = 0; n < num_times; ++n) jac[n] = jf.frame(mesh.parent(), n * substeps).dx_dxi;
    traj.set_jacobians(std::move(jac));

    LocalSystem now = assemble_local(mesh, cs, table, jf, 0, true);
    traj.set_mass(std::move(now.mass));
    const BandedMatrix& mass = traj.mass();
    const Dirichlet bc{true, 1.0, 0.0};

    auto record = [&](std::size_t n, LocalSystem&& sys) {
        const std::vector<double> back = basis_time_derivative(traj, n, dt, RateRule::Backward);
        const std::vector<double> cent = basis_time_derivative(traj, n, dt, RateRule::Central);
        traj.push_blocks(cell_blocks(mass, sys, traj.alphas(n), back, cent));
        if (retain_systems) traj.push_system(std::move(sys));
    };

    // system at the last whole step, kept until the alphas one step later exist
    LocalSystem pending = now;
    ImexStepper stepper(std::move(hat), dt / static_cast<double>(substeps), rule);
    const std::size_t fine_steps = table.num_times() - 1;
    for (std::size_t m = 0; m < fine_steps; ++m) {
        LocalSystem next = assemble_local(mesh, cs, table, jf, m + 1, false);
        stepper.advance({&mass, &now.advection, &now.diffusion, {}},
                        {&mass, &next.advection, &next.diffusion, {}}, bc);
        now = std::move(next);
        if ((m + 1) % substeps != 0) continue;
        const std::size_t n = (m + 1) / substeps;
        const auto& state = stepper.state();
        std::copy(state.begin(), state.end(), traj.alphas(n).begin());
        record(n - 1, std::move(pending));
        pending = now;
    }
    record(num_times - 1, std::move(pending));
    return traj;
}

BasisSet::BasisSet(const CoarseMesh& mesh, std::vector<BasisTrajectory> cells,
                   std::vector<double> times)
    : mesh_(mesh), cells_(std::move(cells)), times_(std::move(times)) {
    if (cells_.size() != mesh_.num_cells()) {
        throw ConfigError("basis set needs one trajectory per coarse cell");
    }
    for (std::size_t i = 0; i < cells_.size(); ++i) {
        if (cells_[i].cell() != i) throw ConfigError("basis trajectories out of cell order");
        if (cells_[i].num_times() != times_.size()) {
            throw ConfigError(fmt::format("cell {} was computed on a different time grid", i));
        }
    }
}

double BasisSet::value(std::size_t dof, std::size_t cell, std::size_t j, std::size_t n) const {
    const double a = cells_[cell].alphas(n)[j];
    double v = 0.0;
    if (dof == mesh_.left_dof(cell)) v += a;
    if (dof == mesh_.right_dof(cell)) v += 1.0 - a;
    return v;
}

BasisSet glue(const CoarseMesh& mesh, std::vector<BasisTrajectory> cells, std::vector<double> times) {
    return BasisSet(mesh, std::move(cells), std::move(times));
}

BasisSet compute_offline(const CoarseMesh& mesh, const CoefficientSet& cs,
                         const CharacteristicTable& table, const OfflineOptions& opt) {
    const JacobianFactors jf(table, mesh);
    const std::size_t cells = mesh.num_cells();
    std::vector<std::optional<BasisTrajectory>> slots(cells);
    std::vector<std::exception_ptr> errors(cells);
    std::atomic<std::size_t> next{0};

    auto work = [&] {
        for (std::size_t i = next++; i < cells; i = next++) {
            try {
                const FineMesh fine(mesh, i, opt.fine_nodes);
                slots[i].emplace(
                    compute_basis(fine, cs, table, jf, opt.dt, opt.mass_rule, opt.retain_systems,
                                  opt.substeps));
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const std::size_t workers = std::max<std::size_t>(1, std::min(opt.workers, cells));
    if (workers == 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    std::vector<BasisTrajectory> out;
    out.reserve(cells);
    for (auto& s : slots) out.push_back(std::move(*s));
    std::vector<double> times;
    for (std::size_t n = 0; n < table.num_times(); n += opt.substeps) times.push_back(table.times()[n]);
    return BasisSet(mesh, std::move(out), std::move(times));
}

// Binary layout (native little-endian):
//   char[8]  "MSFBASIS"
//   u32      version (2)
//   u32      flags (bit 0: local systems present)
//   u64      coarse node count, fine node count, time count
//   f64[T]   times
//   per cell: f64[T * Nf] alphas, then f64[T] cell jacobians dx/dxi
//   if flags & 1, per cell: mass bands (3 * Nf), then per time advection and
//   diffusion bands (3 * Nf each) and u64 load length followed by the load.
namespace {

constexpr char basis_magic[8] = {'M', 'S', 'F', 'B', 'A', 'S', 'I', 'S'};
constexpr std::uint32_t basis_version = 2;

template <class T>
void put(std::ofstream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
void put_doubles(std::ofstream& out, std::span<const double> v) {
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(v.size() * sizeof(double)));
}
void put_bands(std::ofstream& out, const BandedMatrix& m) {
    put_doubles(out, m.lower());
    put_doubles(out, m.diag());
    put_doubles(out, m.upper());
}

template <class T>
T get(std::ifstream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw ConfigError("truncated basis file");
    return v;
}
void get_doubles(std::ifstream& in, std::span<double> v) {
    in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
    if (!in) throw ConfigError("truncated basis file");
}
BandedMatrix get_bands(std::ifstream& in, std::size_t n) {
    BandedMatrix m(n, false);
    get_doubles(in, m.lower());
    get_doubles(in, m.diag());
    get_doubles(in, m.upper());
    return m;
}

}  // namespace

void write_basis_binary(const BasisSet& basis, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open " + path.string() + " for writing");
    const std::size_t nf = basis.cell(0).fine_nodes();
    bool systems = true;
    for (std::size_t i = 0; i < basis.num_cells(); ++i) systems = systems && basis.cell(i).has_systems();

    out.write(basis_magic, sizeof(basis_magic));
    put(out, basis_version);
    put(out, static_cast<std::uint32_t>(systems ? 1 : 0));
    put(out, static_cast<std::uint64_t>(basis.mesh().num_nodes()));
    put(out, static_cast<std::uint64_t>(nf));
    put(out, static_cast<std::uint64_t>(basis.num_times()));
    put_doubles(out, basis.times());
    for (std::size_t i = 0; i < basis.num_cells(); ++i) {
        put_doubles(out, basis.cell(i).all_alphas());
        put_doubles(out, basis.cell(i).jacobians());
    }
    if (systems) {
        for (std::size_t i = 0; i < basis.num_cells(); ++i) {
            const BasisTrajectory& traj = basis.cell(i);
            put_bands(out, traj.mass());
            for (std::size_t n = 0; n < traj.num_times(); ++n) {
                const LocalSystem& sys = traj.system(n);
                put_bands(out, sys.advection);
                put_bands(out, sys.diffusion);
                put(out, static_cast<std::uint64_t>(sys.load.size()));
                put_doubles(out, sys.load);
            }
        }
    }
    if (!out) throw ConfigError("failed writing " + path.string());
}

BasisSet read_basis_alphas(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + path.string());
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, basis_magic, sizeof(magic)) != 0) {
        throw ConfigError(path.string() + " is not a basis file");
    }
    if (get<std::uint32_t>(in) != basis_version) throw ConfigError("unsupported basis file version");
    const bool systems = (get<std::uint32_t>(in) & 1u) != 0;
    const auto nodes = static_cast<std::size_t>(get<std::uint64_t>(in));
    const auto nf = static_cast<std::size_t>(get<std::uint64_t>(in));
    const auto nt = static_cast<std::size_t>(get<std::uint64_t>(in));
    std::vector<double> times(nt);
    get_doubles(in, times);

    const CoarseMesh mesh(nodes);
    std::vector<BasisTrajectory> cells;
    cells.reserve(mesh.num_cells());
    for (std::size_t i = 0; i < mesh.num_cells(); ++i) {
        BasisTrajectory traj(i, nf, nt);
        for (std::size_t n = 0; n < nt; ++n) get_doubles(in, traj.alphas(n));
        std::vector<double> jac(nt);
        get_doubles(in, jac);
        traj.set_jacobians(std::move(jac));
        cells.push_back(std::move(traj));
    }
    if (systems) {
        for (auto& traj : cells) {
            traj.set_mass(get_bands(in, nf));
            for (std::size_t n = 0; n < nt; ++n) {
                LocalSystem sys;
                sys.cell = traj.cell();
                sys.time_index = n;
                sys.advection = get_bands(in, nf);
                sys.diffusion = get_bands(in, nf);
                sys.load.resize(static_cast<std::size_t>(get<std::uint64_t>(in)));
                get_doubles(in, sys.load);
                traj.push_system(std::move(sys));
            }
        }
    }
    return BasisSet(mesh, std::move(cells), std::move(times));
}

void write_basis_csv(const BasisSet& basis, const std::filesystem::path& path,
                     std::size_t time_stride) {
    auto out = fmt::output_file(path.string());
    out.print("cell,j,t,alpha\n");
    const std::size_t stride = std::max<std::size_t>(1, time_stride);
    for (std::size_t i = 0; i < basis.num_cells(); ++i) {
        const BasisTrajectory& traj = basis.cell(i);
        for (std::size_t n = 0; n < traj.num_times(); n += stride) {
            const auto a = traj.alphas(n);
            for (std::size_t j = 0; j < a.size(); ++j) {
                out.print("{},{},{:.17g},{:.17g}\n", i, j, basis.times()[n], a[j]);
            }
        }
    }
}

}  // namespace msfem
