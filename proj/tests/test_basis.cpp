#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include "msfem/basis.hpp"
#include "msfem/experiment.hpp"
#include "msfem/global.hpp"
#include "support.hpp"

using namespace msfem;
using namespace msfem::testing;

namespace {

std::filesystem::path scratch(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "msfem_test_basis";
    std::filesystem::create_directories(dir);
    return dir / name;
}

CoefficientSet still_set(double mu) {
    return simple_set([](double, double) { return 0.0; }, [mu](double, double) { return mu; });
}

double max_alpha_diff(const BasisSet& a, const BasisSet& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.num_cells(); ++i) {
        const auto& x = a.cell(i).all_alphas();
        const auto& y = b.cell(i).all_alphas();
        REQUIRE(x.size() == y.size());
        for (std::size_t k = 0; k < x.size(); ++k) d = std::max(d, std::abs(x[k] - y[k]));
    }
    return d;
}

}  // namespace

TEST_CASE("initial basis is the hat function and boundary values hold") {
    const CoefficientSet cs = make_case(case_params(CaseId::Two, 3));
    const CoarseMesh mesh(6);
    const CharacteristicTable tab = table_for(TransformKind::Characteristic, cs, mesh, 1e-3, 0.2);
    const BasisSet b = offline(cs, mesh, tab, 11);
    REQUIRE(b.num_times() == 201);
    for (std::size_t i = 0; i < b.num_cells(); ++i) {
        const auto& traj = b.cell(i);
        for (std::size_t j = 0; j < 11; ++j) CHECK(traj.alphas(0)[j] == doctest::Approx(1.0 - j / 10.0).epsilon(1e-15));
        for (std::size_t n = 0; n < b.num_times(); ++n) {
            CHECK(traj.alphas(n)[0] == 1.0);
            CHECK(traj.alphas(n)[10] == 0.0);
        }
    }
}

TEST_CASE("glued basis is a partition of unity") {
    const CoefficientSet cs = make_case(case3_params(8.0));
    const CoarseMesh mesh(5);
    const CharacteristicTable tab = table_for(TransformKind::Characteristic, cs, mesh, 1e-3, 0.1);
    const BasisSet b = offline(cs, mesh, tab, 9);
    for (std::size_t n : {0, 50, 100}) {
        for (std::size_t c = 0; c < b.num_cells(); ++c) {
            for (std::size_t j = 0; j < 9; ++j) {
                double s = 0.0;
                for (std::size_t dof = 0; dof < mesh.num_dofs(); ++dof) s += b.value(dof, c, j, n);
                CHECK(std::abs(s - 1.0) <= 1e-12);
            }
        }
    }
    CHECK(b.value(0, 3, 8, 10) == 1.0);
    CHECK(b.value(3, 3, 0, 10) == 1.0);
}

TEST_CASE("no effective velocity and constant diffusivity keep the hat") {
    const CoefficientSet cs = still_set(0.3);
    const CoarseMesh mesh(4);
    const CharacteristicTable tab = identity_table(mesh, make_time_grid(1e-3, 0.5));
    const BasisSet b = offline(cs, mesh, tab, 13);
    for (std::size_t i = 0; i < b.num_cells(); ++i) {
        for (std::size_t n = 0; n < b.num_times(); ++n) {
            for (std::size_t j = 0; j < 13; ++j) {
                CHECK(std::abs(b.cell(i).alphas(n)[j] - b.cell(i).alphas(0)[j]) <= 1e-10);
            }
        }
    }
}

TEST_CASE("steady cell problem has slope proportional to 1/mu") {
    const CoefficientSet cs =
        simple_set([](double, double) { return 0.0; }, [](double x, double) { return 0.05 + x * x; });
    const CoarseMesh mesh(4);
    const std::size_t nf = 16;
    const CharacteristicTable tab = identity_table(mesh, make_time_grid(1e-2, 20.0));
    const JacobianFactors jf(tab, mesh);
    for (std::size_t cell : {0, 2}) {
        const FineMesh fine(mesh, cell, nf);
        const BasisTrajectory traj = compute_basis(fine, cs, tab, jf, 1e-2, MassRule::Current, false);
        DenseLocal d = dense_local(fine, cs, tab, jf, 0);
        std::vector<double> rhs(nf, 0.0);
        for (std::size_t k : {std::size_t{0}, nf - 1}) {
            for (auto& v : d.diffusion[k]) v = 0.0;
            d.diffusion[k][k] = 1.0;
        }
        rhs[0] = 1.0;
        const auto steady = dense_solve(d.diffusion, rhs);
        const auto last = traj.alphas(traj.num_times() - 1);
        for (std::size_t j = 0; j < nf; ++j) CHECK(std::abs(last[j] - steady[j]) <= 1e-8);
        // the discrete flux mu_e * slope is constant across elements
        const double h = fine.width();
        std::vector<double> flux;
        for (std::size_t e = 0; e + 1 < nf; ++e) {
            const double a = fine.node(e), b = fine.node(e + 1);
            const double integral = (b - a) * 0.05 + (b * b * b - a * a * a) / 3.0;
            flux.push_back(integral / (h * h) * (steady[e + 1] - steady[e]));
        }
        for (double f : flux) CHECK(f == doctest::Approx(flux.front()).epsilon(1e-10));
    }
}

TEST_CASE("basis time derivative") {
    BasisTrajectory traj(0, 5, 4);
    const double dt = 0.1;
    for (std::size_t n = 0; n < 4; ++n) {
        auto a = traj.alphas(n);
        for (std::size_t j = 0; j < 5; ++j) a[j] = (j == 0) ? 1.0 : (j == 4 ? 0.0 : 0.3 * j + 0.7 * j * n * dt);
    }
    for (RateRule rule : {RateRule::Backward, RateRule::Central}) {
        for (std::size_t n = 0; n < 4; ++n) {
            const auto d = basis_time_derivative(traj, n, dt, rule);
            CHECK(d.front() == 0.0);
            CHECK(d.back() == 0.0);
            if (rule == RateRule::Backward && n == 0) {
                for (double v : d) CHECK(v == 0.0);
                continue;
            }
            for (std::size_t j = 1; j < 4; ++j) CHECK(d[j] == doctest::Approx(0.7 * j).epsilon(1e-12));
        }
    }
    BasisTrajectory flat(0, 3, 3);
    for (std::size_t n = 0; n < 3; ++n) {
        flat.alphas(n)[0] = 1.0;
        flat.alphas(n)[1] = 0.5;
    }
    for (double v : basis_time_derivative(flat, 1, dt, RateRule::Central)) CHECK(v == 0.0);
}

TEST_CASE("uniform velocity gives the same basis in both moving frames") {
    const CoefficientSet cs = make_case(case_params(CaseId::One, 30));
    const CoarseMesh mesh(6);
    const CharacteristicTable mf = table_for(TransformKind::MeanFlow, cs, mesh, 1e-3, 0.3);
    const CharacteristicTable ch = table_for(TransformKind::Characteristic, cs, mesh, 1e-3, 0.3, 1e-12);
    const BasisSet a = offline(cs, mesh, mf, 21);
    const BasisSet b = offline(cs, mesh, ch, 21);
    CHECK(max_alpha_diff(a, b) <= 1e-10);
}

TEST_CASE("basis stays bounded for the test cases") {
    std::vector<CaseParams> cases = {case_params(CaseId::One, 60), case_params(CaseId::Two, 60), case3_params(16.0),
                                     case_params(CaseId::Four, 200)};
    for (const auto& p : cases) {
        const CoefficientSet cs = make_case(p);
        MsfemSettings s;
        s.end_time = p.id == CaseId::Four ? 0.25 : 1.0;
        s.workers = 4;
        for (TransformKind kind : {TransformKind::MeanFlow, TransformKind::Characteristic}) {
            const OfflinePhase off = offline_phase(cs, kind, s);
            double top = 0.0;
            for (std::size_t i = 0; i < off.basis.num_cells(); ++i) {
                for (double v : off.basis.cell(i).all_alphas()) top = std::max(top, std::abs(v));
            }
            CHECK(std::isfinite(top));
            CHECK(top <= 1.5);
        }
    }
}

TEST_CASE("worker count does not change the basis") {
    const CoefficientSet cs = make_case(case_params(CaseId::Two, 30));
    const CoarseMesh mesh(10);
    const CharacteristicTable tab = table_for(TransformKind::Characteristic, cs, mesh, 1e-3, 0.2);
    const BasisSet one = offline(cs, mesh, tab, 25, 1);
    const BasisSet four = offline(cs, mesh, tab, 25, 4);
    CHECK(max_alpha_diff(one, four) == 0.0);
    for (std::size_t i = 0; i < one.num_cells(); ++i) {
        CHECK(one.cell(i).jacobians() == four.cell(i).jacobians());
    }
}

TEST_CASE("coarse operators agree whether built from blocks or stored systems") {
    const CoefficientSet cs = make_case(case_params(CaseId::Five, 30));
    const CoarseMesh mesh(5);
    const CharacteristicTable tab = table_for(TransformKind::Characteristic, cs, mesh, 1e-3, 0.05);
    const BasisSet b = offline(cs, mesh, tab, 15, 2, true);
    const auto path = scratch("roundtrip.bin");
    write_basis_binary(b, path);
    const BasisSet r = read_basis_alphas(path);
    CHECK(max_alpha_diff(b, r) == 0.0);
    CHECK(r.times() == b.times());
    REQUIRE(r.cell(0).has_systems());
    CHECK_FALSE(r.cell(0).has_blocks());
    for (std::size_t n : {0, 1, 25, 50}) {
        for (CellMeasure m : {CellMeasure::Physical, CellMeasure::Reference}) {
            for (RateRule rate : {RateRule::Backward, RateRule::Central}) {
                const CoarseSystem x = assemble_coarse(b, n, {m, rate});
                const CoarseSystem y = assemble_coarse(r, n, {m, rate});
                CHECK(max_abs_diff(dense(x.mass), dense(y.mass)) <= 1e-13);
                CHECK(max_abs_diff(dense(x.basis_rate), dense(y.basis_rate)) <= 1e-10);
                CHECK(max_abs_diff(dense(x.advection), dense(y.advection)) <= 1e-12);
                CHECK(max_abs_diff(dense(x.diffusion), dense(y.diffusion)) <= 1e-12);
                CHECK(max_abs_diff(x.load, y.load) <= 1e-13);
            }
        }
    }
}

TEST_CASE("alphas-only files and corrupt files") {
    const CoefficientSet cs = make_case(case_params(CaseId::Two, 3));
    const CoarseMesh mesh(4);
    const CharacteristicTable tab = table_for(TransformKind::MeanFlow, cs, mesh, 1e-2, 0.1);
    const BasisSet b = offline(cs, mesh, tab, 7, 1, false);
    const auto path = scratch("alphas.bin");
    write_basis_binary(b, path);
    const BasisSet r = read_basis_alphas(path);
    CHECK(max_alpha_diff(b, r) == 0.0);
    CHECK_FALSE(r.cell(0).has_systems());
    for (std::size_t i = 0; i < b.num_cells(); ++i) CHECK(r.cell(i).jacobians() == b.cell(i).jacobians());

    const auto size = std::filesystem::file_size(path);
    std::filesystem::resize_file(path, size / 2);
    CHECK_THROWS_AS(read_basis_alphas(path), ConfigError);
    {
        std::ofstream junk(path, std::ios::binary | std::ios::trunc);
        junk << "not a basis file at all";
    }
    CHECK_THROWS_AS(read_basis_alphas(path), ConfigError);
    CHECK_THROWS_AS(read_basis_alphas(scratch("missing.bin")), ConfigError);
}

TEST_CASE("basis csv") {
    const CoefficientSet cs = still_set(0.1);
    const CoarseMesh mesh(3);
    const CharacteristicTable tab = identity_table(mesh, make_time_grid(0.1, 0.2));
    const BasisSet b = offline(cs, mesh, tab, 3);
    const auto path = scratch("basis.csv");
    write_basis_csv(b, path);
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    CHECK(line == "cell,j,t,alpha");
    std::size_t rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 2 * 3 * 3);
}

TEST_CASE("substepping equals a finer run sampled at the coarse levels") {
    const CoefficientSet cs = make_case(case_params(CaseId::Two, 30));
    const CoarseMesh mesh(5);
    const double dt = 2e-3;
    const CharacteristicTable fine_tab = table_for(TransformKind::Characteristic, cs, mesh, dt / 2.0, 0.1);
    const JacobianFactors jf(fine_tab, mesh);
    const FineMesh fine(mesh, 1, 19);
    const BasisTrajectory sub = compute_basis(fine, cs, fine_tab, jf, dt, MassRule::Current, false, 2);
    const BasisTrajectory full = compute_basis(fine, cs, fine_tab, jf, dt / 2.0, MassRule::Current, false, 1);
    REQUIRE(sub.num_times() == 51);
    REQUIRE(full.num_times() == 101);
    for (std::size_t n = 0; n < sub.num_times(); ++n) {
        for (std::size_t j = 0; j < 19; ++j) CHECK(sub.alphas(n)[j] == full.alphas(2 * n)[j]);
        CHECK(sub.jacobian(n) == full.jacobian(2 * n));
    }
    CHECK_THROWS_AS(compute_basis(fine, cs, fine_tab, jf, dt, MassRule::Current, false, 3), ConfigError);
    CHECK_THROWS_AS(compute_basis(fine, cs, fine_tab, jf, dt, MassRule::Current, false, 0), ConfigError);
}
