#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <string>

#include "msfem/analysis.hpp"
#include "msfem/transform.hpp"

using namespace msfem;
using std::numbers::pi;

namespace {

FieldSnapshot snapshot(std::size_t n, double t, const std::function<double(double)>& f) {
    FieldSnapshot s;
    s.time = t;
    s.x = uniform_grid(n);
    for (double x : s.x) s.u.push_back(f(x));
    return s;
}

std::vector<std::string> lines(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::vector<std::string> out;
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

std::filesystem::path scratch(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "msfem_test_analysis";
    std::filesystem::create_directories(dir);
    return dir / name;
}

}  // namespace

TEST_CASE("identical fields have zero error") {
    const FieldSnapshot a = snapshot(200, 0.5, [](double x) { return 1.0 + std::sin(2.0 * pi * x); });
    const ErrorReport r = error_norms(a, a);
    CHECK(r.rel_l2 == 0.0);
    CHECK(r.rel_linf == 0.0);
    CHECK(r.rel_h1 == 0.0);
    CHECK(r.max_dev == 0.0);
    CHECK(r.time == 0.5);
}

TEST_CASE("peak deviation example") {
    FieldSnapshot ref = snapshot(10, 1.0, [](double) { return 1.0; });
    ref.u[3] = 4.0;
    FieldSnapshot cand = ref;
    cand.u[3] = 4.001;
    CHECK(error_norms(cand, ref).max_dev == doctest::Approx(2.5e-4).epsilon(1e-10));
    cand.u[3] = 3.999;
    CHECK(error_norms(cand, ref).max_dev == doctest::Approx(2.5e-4).epsilon(1e-10));
}

TEST_CASE("doubling the reference gives unit relative errors") {
    const FieldSnapshot ref = snapshot(300, 1.0, [](double x) { return std::exp(std::cos(2.0 * pi * x)); });
    FieldSnapshot cand = ref;
    for (double& v : cand.u) v *= 2.0;
    const ErrorReport r = error_norms(cand, ref);
    CHECK(r.rel_l2 == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(r.rel_linf == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(r.rel_h1 == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(r.max_dev == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("discrete norms of a sine") {
    for (std::size_t n : {8, 100, 750}) {
        const FieldSnapshot s = snapshot(n, 0.0, [](double x) { return std::sin(2.0 * pi * x); });
        const double h = 1.0 / static_cast<double>(n);
        CHECK(l2_norm(s.u) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-13));
        CHECK(h1_seminorm(s.u) == doctest::Approx(2.0 * std::sin(pi * h) / h / std::sqrt(2.0)).epsilon(1e-12));
        CHECK(linf_norm(s.u) <= 1.0);
    }
    const std::vector<double> c(50, 3.0);
    CHECK(h1_seminorm(c) == 0.0);
    CHECK(l2_norm(c) == doctest::Approx(3.0).epsilon(1e-14));
}

TEST_CASE("norm axioms on random vectors") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> a(64), b(64), s(64);
        for (std::size_t j = 0; j < 64; ++j) {
            a[j] = u(rng);
            b[j] = u(rng);
            s[j] = a[j] + b[j];
        }
        for (auto norm : {l2_norm, linf_norm, h1_seminorm}) {
            CHECK(norm(a) >= 0.0);
            CHECK(norm(s) <= norm(a) + norm(b) + 1e-14);
            std::vector<double> scaled = a;
            for (double& v : scaled) v *= -2.5;
            CHECK(norm(scaled) == doctest::Approx(2.5 * norm(a)).epsilon(1e-14));
        }
        CHECK(l2_norm(a) <= linf_norm(a) + 1e-15);
        CHECK(linf_norm(a) <= std::sqrt(64.0) * l2_norm(a) + 1e-15);
    }
}

TEST_CASE("smooth errors have comparable L2 and max norms") {
    const FieldSnapshot ref = snapshot(750, 1.0, [](double x) { return std::exp(-std::pow((x - 0.4) / 0.05, 2)); });
    const FieldSnapshot cand = snapshot(750, 1.0, [](double x) { return std::exp(-std::pow((x - 0.41) / 0.05, 2)); });
    const ErrorReport r = error_norms(cand, ref);
    CHECK(r.rel_linf <= 10.0 * r.rel_l2);
    CHECK(r.rel_l2 <= 10.0 * r.rel_linf);
}

TEST_CASE("error series") {
    CHECK(error_series({}, {}).empty());
    std::vector<FieldSnapshot> a, b;
    for (double t : {0.25, 0.5}) {
        a.push_back(snapshot(20, t, [](double x) { return 2.0 + x; }));
        b.push_back(snapshot(20, t, [](double x) { return 2.0 + x; }));
    }
    const auto s = error_series(a, b);
    REQUIRE(s.size() == 2);
    CHECK(s[1].time == 0.5);
    CHECK(s[0].rel_l2 == 0.0);
    a.pop_back();
    CHECK_THROWS(error_series(a, b));
    const FieldSnapshot other = snapshot(21, 0.25, [](double) { return 1.0; });
    CHECK_THROWS(error_norms(other, b[0]));
    CHECK_THROWS(error_norms(b[1], b[0]));
}

TEST_CASE("peak position and periodic offsets") {
    const FieldSnapshot s = snapshot(100, 0.0, [](double x) { return std::exp(-std::pow((x - 0.73) / 0.05, 2)); });
    CHECK(peak_position(s) == doctest::Approx(0.73).epsilon(1e-12));
    CHECK(periodic_offset(0.95, 0.05) == doctest::Approx(-0.1).epsilon(1e-12));
    CHECK(periodic_offset(0.05, 0.95) == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(periodic_offset(0.3, 0.3) == 0.0);
    const double half = periodic_offset(0.75, 0.25);
    CHECK(half == -0.5);
}

TEST_CASE("csv writers") {
    const auto snap_path = scratch("snap.csv");
    write_snapshot_csv(snap_path, snapshot(4, 0.5, [](double x) { return x; }));
    auto l = lines(snap_path);
    REQUIRE(l.size() == 5);
    CHECK(l[0] == "t,x,u");
    CHECK(l[2] == "0.500000,0.25,0.25");

    ErrorReport r;
    r.time = 1.0;
    r.rel_l2 = 0.5;
    const auto err_path = scratch("errors.csv");
    write_error_csv(err_path, {"fem", "char"}, {{r}, {r, r}});
    l = lines(err_path);
    REQUIRE(l.size() == 4);
    CHECK(l[0] == "t,variant,rel_L2,rel_Linf,rel_H1,max_dev");
    CHECK(l[1].rfind("1.000000,fem,5.0000000000e-01", 0) == 0);

    const std::vector<ConvergenceRow> rows = {{24, 0.1, 0.2}, {48, 0.025, 0.05}};
    const auto conv_path = scratch("conv.csv");
    write_convergence_csv(conv_path, rows);
    l = lines(conv_path);
    REQUIRE(l.size() == 3);
    CHECK(l[0] == "N,rel_L2,rel_Linf");
    CHECK(l[2].rfind("48,", 0) == 0);

    const auto plot = scratch("conv.gp");
    write_convergence_plot(plot, "conv.csv");
    bool found = false;
    for (const auto& line : lines(plot)) found = found || line.find("logscale") != std::string::npos;
    CHECK(found);
}
