#include "wkbgreen/smallt.hpp"

#include "wkbgreen/errors.hpp"

#include <boost/math/tools/toms748_solve.hpp>

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>

namespace wkbgreen {

namespace {

void reject_origin(const HamiltonianModel& model, double xi) {
    if (model.fixes_origin() && xi == 0.0) {
        throw DeltaRegimeError(
            "xi = 0: the fundamental solution is the Dirac delta at the origin; "
            "S(x, beta) = x^2/(2(1 - beta)) has no finite beta -> 1 limit");
    }
}

struct OrderZero {
    double X = 0.0;
    double S0 = 0.0;
    bool finite = true;
};

// RK4 for the rescaled system (X, P) with the running action ∫(P H_p − H) dσ.
OrderZero integrate_order_zero(const HamiltonianModel& model, double xi, double P0, double t_prime, int steps) {
    using State = std::array<double, 3>;
    auto f = [&](const State& s) {
        const Derivatives d = model.derivatives(s[0], s[1]);
        return State{d.H_p, -d.H_x, s[1] * d.H_p - d.H};
    };
    State s{xi, P0, 0.0};
    const double ds = t_prime / steps;
    for (int i = 0; i < steps; ++i) {
        const State k1 = f(s);
        const State k2 = f({s[0] + 0.5 * ds * k1[0], s[1] + 0.5 * ds * k1[1], 0.0});
        const State k3 = f({s[0] + 0.5 * ds * k2[0], s[1] + 0.5 * ds * k2[1], 0.0});
        const State k4 = f({s[0] + ds * k3[0], s[1] + ds * k3[1], 0.0});
        for (int c = 0; c < 3; ++c) s[c] += ds / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
        if (!std::isfinite(s[0]) || !std::isfinite(s[1]) || std::abs(s[0]) > 1e12) return {s[0], s[2], false};
    }
    return {s[0], s[2], true};
}

struct OrderOne {
    double X1_end;  // X1(t′) per unit P1(0)
    double S1;      // S1 per unit P1(0)
};

// Linearized problem along the order-0 characteristic:
//   X1' = H_px X1 + H_pp P1,  P1' = −H_xx X1 − H_xp P1,
// with the action variation (P H_px − H_x) X1 + P H_pp P1.
OrderOne integrate_order_one(const HamiltonianModel& model, double xi, double P0, double t_prime, int steps) {
    using State = std::array<double, 5>;  // X, P, X1, P1, S1
    auto f = [&](const State& s) {
        const Derivatives d = model.derivatives(s[0], s[1]);
        return State{d.H_p,
                     -d.H_x,
                     d.H_xp * s[2] + d.H_pp * s[3],
                     -d.H_xx * s[2] - d.H_xp * s[3],
                     (s[1] * d.H_xp - d.H_x) * s[2] + s[1] * d.H_pp * s[3]};
    };
    auto add = [](const State& s, double a, const State& k) {
        State r;
        for (int c = 0; c < 5; ++c) r[c] = s[c] + a * k[c];
        return r;
    };
    State s{xi, P0, 0.0, 1.0, 0.0};
    const double ds = t_prime / steps;
    for (int i = 0; i < steps; ++i) {
        const State k1 = f(s);
        const State k2 = f(add(s, 0.5 * ds, k1));
        const State k3 = f(add(s, 0.5 * ds, k2));
        const State k4 = f(add(s, ds, k3));
        for (int c = 0; c < 5; ++c) s[c] += ds / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
    }
    return {s[2], s[4]};
}

}  // namespace

double p0_leading(const HamiltonianModel& model, double x, double xi, double nu, double t_prime) {
    if (!(nu > 0.0) || !(t_prime > 0.0)) throw DomainError("p0_leading: nu and t' must be positive");
    reject_origin(model, xi);
    const double Y = (x - xi) / (nu * t_prime);
    double P = 0.0;
    for (int it = 0; it < 50; ++it) {
        const Derivatives d = model.derivatives(xi, P);
        if (d.H_pp == 0.0) throw SolverError("p0_leading: H_pp(xi, .) vanishes", P);
        const double step = (d.H_p - Y) / d.H_pp;
        P -= step;
        if (std::abs(step) <= 1e-15 * std::max(1.0, std::abs(P))) return P;
    }
    throw SolverError("p0_leading: Newton did not converge", P);
}

SmallTimeSeries bvp_series(const HamiltonianModel& model, double x, double xi, double nu, double t_prime, int order,
                           const SmallTimeOptions& options) {
    if (!(nu > 0.0) || !(t_prime > 0.0)) throw DomainError("bvp_series: nu and t' must be positive");
    if (order < 0 || order > 1) throw DomainError("bvp_series: only orders 0 and 1 are available");
    reject_origin(model, xi);
    if (model.fixes_origin() && (x == 0.0 || (x > 0.0) != (xi > 0.0))) {
        throw DomainError("bvp_series: x and xi are sign-incompatible across the invariant origin");
    }

    SmallTimeSeries out;
    out.nu = nu;
    out.t_prime = t_prime;
    out.order = order;
    out.P0 = p0_leading(model, x, xi, nu, t_prime);
    if (x == xi) return out;

    const double A_xi = model.coefficient(xi);
    if (A_xi == 0.0) throw DomainError("bvp_series: A(xi) = 0");
    const int steps = std::max(options.steps, 16);

    // Rescaled momentum P = ν p, so P(0) = C / A(ξ).
    auto miss = [&](double C) {
        const OrderZero z = integrate_order_zero(model, xi, C / A_xi, t_prime, steps);
        if (!z.finite) return std::copysign(std::numeric_limits<double>::max(), C * A_xi);
        return z.X - x;
    };

    // Frozen-coefficient guess: H_p(ξ, P) (x − ξ)/t′ in rescaled time.
    const double guess = A_xi * (x - xi) / (2.0 * A_xi * A_xi * t_prime);
    double lo = 0.0;
    double hi = guess;
    double f_lo = miss(lo);
    double f_hi = miss(hi);
    for (int k = 0; f_lo * f_hi > 0.0; ++k) {
        if (k == 80) throw SolverError("bvp_series: shooting constant not bracketed", hi);
        lo = hi;
        f_lo = f_hi;
        hi *= 2.0;
        f_hi = miss(hi);
    }
    if (lo > hi) {
        std::swap(lo, hi);
        std::swap(f_lo, f_hi);
    }
    std::uintmax_t max_iter = 300;
    auto tol = [&](double a, double b) { return std::abs(b - a) <= options.tol * std::max(1e-300, std::abs(a)); };
    const auto [left, right] = boost::math::tools::toms748_solve(miss, lo, hi, f_lo, f_hi, tol, max_iter);
    const double C = 0.5 * (left + right);
    const OrderZero z = integrate_order_zero(model, xi, C / A_xi, t_prime, steps);
    if (!z.finite || std::abs(z.X - x) > 1e-9 * std::max(1.0, std::abs(x))) {
        std::ostringstream msg;
        msg << "bvp_series: shooting did not converge (endpoint " << z.X << " vs " << x << ")";
        throw SolverError(msg.str(), C);
    }
    out.conserved = C;
    out.S0 = z.S0;

    if (order >= 1) {
        // The rescaled system has no explicit ν, so the order-1 problem is the
        // homogeneous linearization; X1(t′) = 0 fixes P1(0) = 0 unless t′ is a
        // conjugate point.
        const OrderOne unit = integrate_order_one(model, xi, C / A_xi, t_prime, steps);
        if (std::abs(unit.X1_end) < 1e-14) throw SolverError("bvp_series: conjugate point at t'", C);
        const double forcing_response = 0.0;
        const double P1_start = -forcing_response / unit.X1_end;
        out.S1 = P1_start == 0.0 ? 0.0 : P1_start * unit.S1;
    }
    return out;
}

double s_small_t(const HamiltonianModel& model, double x, double xi, double t, int order,
                 const SmallTimeOptions& options) {
    if (!(t > 0.0)) throw DomainError("s_small_t: t must be > 0");
    return bvp_series(model, x, xi, t, 1.0, order, options).exponent();
}

double delta_regime_exponent(double x, double beta) {
    if (!(beta > 0.0 && beta < 1.0)) throw DomainError("delta_regime_exponent: beta must lie in (0, 1)");
    return x * x / (2.0 * (1.0 - beta));
}

}  // namespace wkbgreen
