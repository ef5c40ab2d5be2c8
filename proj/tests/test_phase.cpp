#include "wkbgreen/characteristics.hpp"
#include "wkbgreen/errors.hpp"
#include "wkbgreen/phase.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

using namespace wkbgreen;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

TEST_CASE("heat boundary solution by linear elimination") {
    const BoundarySolution s = solve_boundary(make_heat(), 2.0, 0.0, 0.5, 1.0);
    CHECK(s.x0 == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(s.y_hat == doctest::Approx(-2.0 / 3.0).epsilon(1e-12));
    CHECK(s.J == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(s.J0 == doctest::Approx(2.0).epsilon(1e-12));  // 1 + 2βt
    // E = β(x − ξ)²/(2(1 − β + 2βt)) = 0.5·4/3.
    CHECK(s.exponent == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("x = xi is the zero-momentum fixed point") {
    for (const auto& m : {make_heat(), make_degenerate(), make_general({1, 1})}) {
        const BoundarySolution s = solve_boundary(m, 0.8, 0.8, 0.7, 0.4);
        CHECK(s.x0 == doctest::Approx(0.8).epsilon(1e-12));
        CHECK(std::abs(s.y_hat) < 1e-12);
        CHECK(std::abs(s.exponent) < 1e-20);
        CHECK(phase_exponent(s, 0.8, 0.7) == doctest::Approx(0.0));
    }
}

TEST_CASE("degenerate boundary solution satisfies both conditions") {
    const double x = 1.2, xi = 1.0, beta = 0.9, t = 0.1;
    const BoundarySolution s = solve_boundary(make_degenerate(), x, xi, beta, t);
    CHECK(s.residual_x <= 1e-10);
    CHECK(s.residual_diagonal <= 1e-10);
    CHECK(s.exponent > 0.0);
    // Substitute back into the explicit solution and the diagonal condition.
    const PhasePoint c = closed_degenerate(s.x0, xi, s.y_hat, beta, t);
    CHECK(std::abs(c.x - x) < 1e-9);
    CHECK(std::abs(s.y_hat - (-beta * (s.x0 - xi - s.y_hat))) < 1e-9);
    // J/(1 − β) is ∂x/∂x0 with y eliminated.
    CHECK(rel(s.J / (1 - beta), jacobian_degenerate(s.x0, xi, beta, t)) < 1e-7);
}

TEST_CASE("heat exponent along a beta sequence") {
    const double t = 0.5;
    double previous = -1.0;
    for (double beta : {0.5, 0.9, 0.99, 0.999, 0.9999}) {
        const BoundarySolution s = solve_boundary(make_heat(), 1.0, 0.0, beta, t);
        const double expect = beta / (2.0 * (1.0 - beta + 2.0 * beta * t));
        CHECK(rel(s.exponent, expect) < 1e-10);
        CHECK(s.exponent > previous);
        previous = s.exponent;
    }
    CHECK(std::abs(previous - 0.5) < 1e-3);
}

TEST_CASE("heat extended Jacobian is 1 - beta + 2 beta t") {
    for (double beta : {0.1, 0.5, 0.9, 0.99}) {
        for (double t : {0.05, 0.5, 2.0}) {
            const BoundarySolution s = solve_boundary(make_heat(), -0.3, 1.1, beta, t);
            CHECK(std::abs(s.J - (1 - beta + 2 * beta * t)) < 1e-10);
        }
    }
}

TEST_CASE("boundary preconditions") {
    CHECK_THROWS_AS(solve_boundary(make_degenerate(), 0.5, 0.0, 0.5, 0.1), DeltaRegimeError);
    CHECK_THROWS_AS(solve_boundary(make_degenerate(), -0.5, 0.5, 0.5, 0.1), DomainError);
    CHECK_THROWS_AS(solve_boundary(make_heat(), 0.5, 0.0, 1.0, 0.1), DomainError);
    CHECK_THROWS_AS(solve_boundary(make_heat(), 0.5, 0.0, 0.0, 0.1), DomainError);
}

TEST_CASE("phase_field for the heat model") {
    const auto m = make_heat();
    const PhaseEvaluation p = phase_field(m, 1.5, 0.25, 0.25, 1.0, 0.5);
    CHECK(p.phi == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(p.phi_y == doctest::Approx(-1.0 / 2.0).epsilon(1e-12));  // −(x − ξ − y)/(1 + 2t)
    CHECK(p.J0 == doctest::Approx(2.0).epsilon(1e-12));
    // Φ_yy = 1/(1 + 2βt) from the closed form.
    CHECK(p.phi_yy == doctest::Approx(0.5).epsilon(1e-6));

    const PhaseEvaluation z = phase_field(m, 0.75, 0.25, 0.5, 1.0, 0.5);
    CHECK(std::abs(z.phi) < 1e-20);

    for (double beta : {0.3, 0.8}) {
        const double x = 0.9, xi = -0.2, y = 0.4, t = 0.7;
        const double mm = x - xi - y;
        CHECK(rel(phase_field(m, x, xi, y, beta, t).phi, beta * mm * mm / (2 * (1 + 2 * beta * t))) < 1e-12);
    }
}

TEST_CASE("phi_y is the derivative of phi in y") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 20; ++i) {
        const bool heat = i % 2 == 0;
        const auto m = heat ? make_heat() : make_degenerate();
        const double x = heat ? -1 + 2 * u(rng) : 0.6 + u(rng);
        const double xi = heat ? -1 + 2 * u(rng) : 0.6 + u(rng);
        const double y = -0.3 + 0.6 * u(rng);
        const double beta = 0.3 + 0.6 * u(rng);
        const double t = 0.05 + 0.3 * u(rng);
        const double d = 1e-5;
        BoundaryOptions o;
        o.tol = 1e-12;
        const double fd =
            (phase_field(m, x, xi, y + d, beta, t, o).phi - phase_field(m, x, xi, y - d, beta, t, o).phi) / (2 * d);
        CHECK(std::abs(fd - phase_field(m, x, xi, y, beta, t, o).phi_y) < 1e-6);
    }
}

TEST_CASE("exponent equals phi at y_hat minus y_hat squared over two") {
    for (const auto& m : {make_heat(), make_degenerate()}) {
        for (double beta : {0.5, 0.9, 0.99}) {
            for (double t : {0.1, 0.3, 0.5}) {
                const double x = 1.3, xi = 0.9;
                const BoundarySolution s = solve_boundary(m, x, xi, beta, t);
                const PhaseEvaluation p = phase_field(m, x, xi, s.y_hat, beta, t);
                CHECK(std::abs(s.exponent - (p.phi - 0.5 * s.y_hat * s.y_hat)) < 1e-8);
                // ŷ is a critical point of Φ − y²/2: Φ_y = p_y = ŷ.
                CHECK(std::abs(p.phi_y - s.y_hat) < 1e-8);
                CHECK(rel(p.J0 * (1 - p.phi_yy), s.J) < 1e-5);
            }
        }
    }
}

TEST_CASE("positivity of the exponent on random boundary solutions") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        const bool heat = i % 2 == 0;
        const double sign = u(rng) < 0.5 ? -1.0 : 1.0;
        const double x = heat ? -2 + 4 * u(rng) : sign * (0.3 + 1.5 * u(rng));
        const double xi = heat ? -2 + 4 * u(rng) : sign * (0.3 + 1.5 * u(rng));
        const BoundarySolution s =
            solve_boundary(heat ? make_heat() : make_degenerate(), x, xi, 0.1 + 0.89 * u(rng), 0.02 + 0.5 * u(rng));
        CHECK(s.exponent >= 0.0);
        CHECK(s.J > 0.0);
    }
}

TEST_CASE("manifold section caustics") {
    const auto deg = make_degenerate();
    const ManifoldSection fold = manifold_section(deg, 3.0, 0.0, 1.0, 2.0 / 3.0, 0.2, 1.2, 120);
    REQUIRE(fold.caustics.size() == 2);
    CHECK(std::abs(fold.caustics[0] - (3 - std::sqrt(3.0)) / 4) < 1e-10);
    CHECK(std::abs(fold.caustics[1] - (3 + std::sqrt(3.0)) / 4) < 1e-10);
    CHECK(fold.samples.size() == 120);
    for (std::size_t i = 1; i < fold.samples.size(); ++i) CHECK(fold.samples[i].x0 > fold.samples[i - 1].x0);

    // ξ + y = 3 split differently gives the same fold.
    const ManifoldSection shifted = manifold_section(deg, 2.0, 1.0, 1.0, 2.0 / 3.0, 0.2, 1.2, 120);
    REQUIRE(shifted.caustics.size() == 2);
    CHECK(std::abs(shifted.caustics[0] - fold.caustics[0]) < 1e-10);

    CHECK(manifold_section(make_heat(), 0.3, 0.1, 1.0, 2.0, -3.0, 3.0, 50).caustics.empty());
    for (double xi : {-1.0, -0.4, 0.5, 1.0}) {
        CHECK(manifold_section(deg, xi, 0.0, 0.5, 0.05, -1.0, 1.0, 80).caustics.empty());
    }
    CHECK_THROWS_AS(manifold_section(deg, 1.0, 0.0, 0.5, 0.05, -1.0, 1.0, 1), DomainError);
}

TEST_CASE("manifold CSV and caustics JSON") {
    const ManifoldSection sec = manifold_section(make_degenerate(), 3.0, 0.0, 1.0, 2.0 / 3.0, 0.2, 1.2, 10);
    std::ostringstream out;
    write_csv(out, sec);
    CHECK(out.str().rfind("x0,x,p_x,J0\n", 0) == 0);
    const auto j = caustics_json(sec);
    CHECK(j["count"] == 2);
    CHECK(j["caustics"].size() == 2);
}
