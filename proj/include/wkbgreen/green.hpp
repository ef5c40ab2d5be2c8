#pragma once

#include "wkbgreen/hamiltonian.hpp"
#include "wkbgreen/phase.hpp"

#include <span>
#include <string_view>
#include <vector>

namespace wkbgreen {

enum class GreenKind {
    density,          // finite leading-order density
    delta_at_origin,  // source at the fixed origin: G = mass_factor · δ(x)
    unreachable,      // no characteristic reaches x; leading density is zero
};

std::string_view to_string(GreenKind kind);

/// Leading-order Green's function G ≈ prefactor · amplitude · e^{−exponent/h}.
struct GreenValue {
    GreenKind kind = GreenKind::density;
    double value = 0.0;
    double exponent = 0.0;
    double amplitude = 0.0;  // e^{M/2}/√J
    double prefactor = 0.0;  // 1/√(2πh)
    double beta = 0.0;       // regularization used; 1 for an extrapolated limit
    bool is_limit = false;
    bool converged = true;
    double h = 0.0;
    double mass_factor = 1.0;  // only meaningful for delta_at_origin
    double x0 = 0.0;
    double y_hat = 0.0;
    double J = 0.0;
    double J0 = 0.0;

    /// log(value), finite even when value underflows.
    double log_value() const;

    /// Only the leading WKB term is assembled; the result carries a 1 + O(h) factor.
    static constexpr std::string_view truncation_note = "leading term only; relative error O(h)";
};

enum class AssemblyPath {
    extended_jacobian,  // e^{−E/h} e^{M/2}/√J with J = det ∂(x, y − p_y)/∂(x0, y)
    phase_hessian,      // e^{(ŷ²/2 − Φ_β(ŷ))/h} e^{M/2}/(√J0 √(1 − Φ_yy))
};

/// Green's function at a fixed β < 1 (no limit taken).
GreenValue assemble(const HamiltonianModel& model, double x, double xi, double t, double h, double beta,
                    AssemblyPath path = AssemblyPath::extended_jacobian, const BoundaryOptions& options = {});

enum class Extrapolation { last, richardson };

struct BetaSchedule {
    std::vector<double> betas;
    Extrapolation extrapolation = Extrapolation::richardson;
    double tol = 1e-6;

    /// β_k = 1 − 2^{−k}, k = 10..17, Richardson, tol 1e-6 on log G.
    static BetaSchedule standard();
    void validate() const;
};

/// β → 1−0 limit: the exponent and the log-amplitude are extrapolated
/// separately as polynomials in 1 − β. Non-convergence is reported through
/// GreenValue::converged, not thrown.
GreenValue beta_limit(const HamiltonianModel& model, double x, double xi, double t, double h,
                      const BetaSchedule& schedule = BetaSchedule::standard(),
                      const BoundaryOptions& options = {});

/// Value at ε = 0 of the interpolating polynomial through (eps[i], values[i]).
double extrapolate_to_zero(std::span<const double> eps, std::span<const double> values);

/// (4πht)^{-1/2} e^{−(x−ξ)²/(4th)}
double heat_exact(double x, double xi, double t, double h);
double heat_exact_log(double x, double xi, double t, double h);

/// Regularized degenerate kernel at x = 0: e^{−βξ²/(2(1−β)h)}/(√(2πh)√(1−β)).
double gbeta_at_origin(double xi, double t, double h, double beta);

/// Atom carried by the origin when the source sits there: e^{2 a(0)² h t}.
double origin_mass_factor(const HamiltonianModel& model, double t, double h);

struct QuadratureResult {
    double value = 0.0;
    double error_estimate = 0.0;
};

/// Trapezoid rule for ∫ g(ξ) u0(ξ) dξ on a uniform grid with a coarse-grid
/// error estimate. Throws DomainError when the estimate exceeds tol · |value|.
QuadratureResult convolve_samples(std::span<const double> xi_grid, std::span<const double> green,
                                  std::span<const double> u0, double tol);

/// u(x, t) = ∫ G(x, ξ, t, h) u0(ξ) dξ with G from beta_limit on each grid node.
double convolve(const HamiltonianModel& model, std::span<const double> xi_grid, std::span<const double> u0,
                double x, double t, double h, double tol = 1e-6,
                const BetaSchedule& schedule = BetaSchedule::standard(), const BoundaryOptions& options = {});

}  // namespace wkbgreen
