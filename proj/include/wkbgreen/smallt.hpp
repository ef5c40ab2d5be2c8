#pragma once

#include "wkbgreen/hamiltonian.hpp"

namespace wkbgreen {

/// Coefficients of S(x, t, ξ) = S0/ν + S1 + O(ν) at t = ν t′.
struct SmallTimeSeries {
    double nu = 0.0;
    double t_prime = 0.0;
    double S0 = 0.0;
    double S1 = 0.0;
    double P0 = 0.0;        // leading initial momentum from H_p(ξ, P0) = (x − ξ)/(ν t′)
    double conserved = 0.0; // shooting constant C = A(X) P of the order-0 problem
    int order = 0;

    /// S0/ν + S1 (S1 only when order ≥ 1).
    double exponent() const { return S0 / nu + (order >= 1 ? S1 : 0.0); }
};

struct SmallTimeOptions {
    int steps = 2000;      // RK4 steps on σ ∈ [0, t′]
    double tol = 1e-13;    // relative tolerance on the shooting endpoint
};

/// Solves H_p(ξ, P0) = (x − ξ)/(ν t′). Throws DeltaRegimeError for ξ = 0 on
/// models fixing the origin.
double p0_leading(const HamiltonianModel& model, double x, double xi, double nu, double t_prime);

/// Rescaled two-point problem X(0) = ξ, X(t′) = x for dX/dσ = H_p(X, P),
/// dP/dσ = −H_x(X, P), shot on the conserved constant; order 1 adds the
/// linearized problem with X1(0) = X1(t′) = 0.
SmallTimeSeries bvp_series(const HamiltonianModel& model, double x, double xi, double nu, double t_prime,
                           int order = 1, const SmallTimeOptions& options = {});

/// Small-t exponent with ν = t, t′ = 1.
double s_small_t(const HamiltonianModel& model, double x, double xi, double t, int order = 1,
                 const SmallTimeOptions& options = {});

/// The origin regime: S(x, β) = x²/(2(1 − β)), unbounded as β → 1−0.
double delta_regime_exponent(double x, double beta);

}  // namespace wkbgreen
