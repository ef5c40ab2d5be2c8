#include "wkbgreen/errors.hpp"
#include "wkbgreen/green.hpp"
#include "wkbgreen/oracle.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace wkbgreen;

namespace {

/// Max-norm error against the exact heat evolution, relative to the peak.
double heat_error(int n, double dt) {
    const double h = 0.1, xi = 0.2, s = 0.1, t = 0.4;
    const Grid1D grid = Grid1D::make(-3.0, 3.4, n, dt, h);
    std::vector<double> u0(grid.n);
    for (int i = 0; i < grid.n; ++i) u0[i] = heat_exact(grid.node(i), xi, s, h);
    const FieldSolution sol = crank_nicolson(make_heat(), grid, u0, t);
    double err = 0.0, peak = 0.0;
    for (int i = 0; i < grid.n; ++i) {
        const double exact = heat_exact(grid.node(i), xi, s + t, h);
        err = std::max(err, std::abs(sol.final_frame()[i] - exact));
        peak = std::max(peak, exact);
    }
    return err / peak;
}

}  // namespace

TEST_CASE("grid construction") {
    const Grid1D g = Grid1D::make(-1.0, 1.0, 5, 0.1, 0.2);
    CHECK(g.dx == doctest::Approx(0.5));
    CHECK(g.node(4) == doctest::Approx(1.0));
    CHECK(g.nodes().size() == 5);
    CHECK_THROWS_AS(Grid1D::make(0.0, 1.0, 2, 0.1, 0.1), ConfigError);
    CHECK_THROWS_AS(Grid1D::make(1.0, 1.0, 5, 0.1, 0.1), ConfigError);
    CHECK_THROWS_AS(Grid1D::make(0.0, 1.0, 5, 0.0, 0.1), ConfigError);
    CHECK_THROWS_AS(Grid1D::make(0.0, 1.0, 5, 0.1, -1.0), ConfigError);
}

TEST_CASE("Gaussian evolution under the heat equation") {
    CHECK(heat_error(2001, 3.2e-3) <= 1e-3);
}

TEST_CASE("second-order convergence") {
    const double coarse = heat_error(201, 0.02);
    const double fine = heat_error(401, 0.01);
    CHECK(coarse / fine >= 3.5);
}

TEST_CASE("zero data stays zero") {
    const Grid1D g = Grid1D::make(0.0, 2.0, 101, 0.01, 0.1);
    const FieldSolution sol = crank_nicolson(make_degenerate(), g, std::vector<double>(101, 0.0), 0.5, 3);
    REQUIRE(sol.frames.size() == 3);
    for (const auto& f : sol.frames) {
        for (double v : f) CHECK(v == 0.0);
    }
    CHECK(sol.times.back() == doctest::Approx(0.5));
    CHECK(sol.leakage == 0.0);
}

TEST_CASE("degenerate second-moment law") {
    const auto m = make_degenerate();
    for (auto [h, t] : {std::pair{0.05, 0.5}, std::pair{0.1, 1.0}, std::pair{0.2, 0.25}}) {
        const Grid1D g = auto_grid(m, 1.0, 1.0, t, h, 0.05, 4001);
        const FieldSolution sol = crank_nicolson(m, g, gaussian_datum(g, 1.0, 0.05), t, 5);
        const auto m2 = moment_check(sol, 2);
        CHECK(m2.front() > 0.0);
        for (std::size_t k = 0; k < m2.size(); ++k) {
            CHECK(std::abs(m2[k] / m2.front() / std::exp(12 * h * sol.times[k]) - 1.0) <= 0.01);
        }
    }
}

TEST_CASE("heat second-moment law") {
    const double h = 0.05, t = 0.5;
    const auto m = make_heat();
    const Grid1D g = auto_grid(m, 0.3, 0.3, t, h, 0.05, 2001);
    const FieldSolution sol = crank_nicolson(m, g, gaussian_datum(g, 0.3, 0.05), t);
    const auto m0 = moment_check(sol, 0);
    const auto m2 = moment_check(sol, 2);
    CHECK(std::abs((m2.back() - m2.front()) / (2 * h * t * m0.front()) - 1.0) <= 0.01);
    CHECK(std::abs(m0.back() - m0.front()) < 1e-6);  // D constant: mass is conserved
    CHECK_THROWS_AS(moment_check(sol, 3), DomainError);
}

TEST_CASE("support stays away from the origin") {
    const auto m = make_degenerate();
    const double h = 0.02, t = 0.25;
    const Grid1D g = Grid1D::make(0.0, 3.0, 3001, 1e-3, h);
    std::vector<double> u0(g.n, 0.0);
    for (int i = 0; i < g.n; ++i) {
        const double z = (g.node(i) - 1.0) / 0.5;
        if (std::abs(z) < 1) u0[i] = std::pow(1 - z * z, 4);
    }
    const FieldSolution sol = crank_nicolson(m, g, u0, t, 6);
    for (std::size_t f = 0; f < sol.frames.size(); ++f) {
        CHECK(mass_below(sol, 0.25 * std::exp(-sol.times[f]), f) < 1e-8);
    }
    CHECK(mass_below(sol, 1.0, 0) > 0.1);
}

TEST_CASE("a domain that is too small triggers the leakage diagnostic") {
    const Grid1D g = Grid1D::make(-0.3, 0.3, 301, 1e-3, 0.1);
    const FieldSolution sol = crank_nicolson(make_heat(), g, gaussian_datum(g, 0.0, 0.05), 0.5);
    CHECK(sol.leakage_warning);
    CHECK(sol.leakage > 0.01);
}

TEST_CASE("sampling interpolates smooth frames") {
    const Grid1D g = Grid1D::make(0.0, 1.0, 101, 0.1, 0.1);
    FieldSolution sol;
    sol.grid = g;
    std::vector<double> f(g.n);
    for (int i = 0; i < g.n; ++i) f[i] = std::sin(3 * g.node(i));
    sol.frames.push_back(f);
    sol.times.push_back(0.0);
    // Four-point error bound: (9/16) dx⁴ max|f⁗| / 24 ≈ 1.9e-8.
    CHECK(std::abs(sol.sample(0.4567, 0) - std::sin(3 * 0.4567)) < 5e-8);
    CHECK(sol.sample(2.0, 0) == 0.0);
}

TEST_CASE("heat comparison against the asymptotic kernel") {
    const ErrorReport r = compare_green(make_heat(), 0.5, 0.0, 0.5, 0.1, 0.01, 4001);
    CHECK(r.tag == "ok");
    CHECK(r.rel_error <= 0.02);
    CHECK(r.deviation() <= 0.02);
    REQUIRE(r.rel_error_exact.has_value());
    CHECK(*r.rel_error_exact <= 1e-3);
    CHECK(r.leakage < 0.01);
}

TEST_CASE("degenerate deviation decreases with h") {
    double previous = 1.0;
    for (double h : {0.1, 0.05, 0.025}) {
        const ErrorReport r = compare_green(make_degenerate(), 1.2, 1.0, 0.2, h);
        // The leading term carries a relative O(h) error, about h t / 4 here.
        CHECK(r.deviation() < previous);
        CHECK(r.deviation() == doctest::Approx(-std::expm1(-h * 0.2 / 4)).epsilon(0.05));
        previous = r.deviation();
    }
}

TEST_CASE("far tail is reported as underflow") {
    const ErrorReport r = compare_green(make_heat(), 3.0, 0.0, 0.1, 0.1);
    CHECK(r.underflow);
    CHECK(r.tag == "underflow regime");
}

TEST_CASE("comparison preconditions") {
    CHECK_THROWS_AS(compare_green(make_degenerate(), 0.5, 0.0, 0.2, 0.1), DomainError);
    CHECK_THROWS_AS(compare_green(make_degenerate(), -0.5, 1.0, 0.2, 0.1), DomainError);
    CHECK_THROWS_AS(compare_green(make_heat(), 0.5, 0.0, 0.0, 0.1), DomainError);
}

TEST_CASE("exports") {
    const Grid1D g = Grid1D::make(0.0, 1.0, 3, 0.5, 0.1);
    const FieldSolution sol = crank_nicolson(make_heat(), g, {0.0, 1.0, 0.0}, 1.0);
    std::ostringstream out;
    write_frames_csv(out, sol);
    CHECK(out.str().rfind("t,x,u\n", 0) == 0);
    const auto j = to_json(compare_green(make_heat(), 0.2, 0.0, 0.3, 0.1));
    for (auto key : {"inputs", "wkb_value", "oracle_value", "rel_error", "grid"}) CHECK(j.contains(key));
    CHECK(j["grid"]["n"] == 4001);
}
