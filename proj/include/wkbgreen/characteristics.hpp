#pragma once

#include "wkbgreen/hamiltonian.hpp"

#include <array>
#include <iosfwd>
#include <vector>

namespace wkbgreen {

/// Point of the extended phase space (x, y, p_x, p_y) together with the
/// integrals carried along the characteristic.
struct ExtendedState {
    double x = 0.0;
    double y = 0.0;
    double p_x = 0.0;
    double p_y = 0.0;
    double action = 0.0;  // ∫(p H_p − H) dτ
    double mixed = 0.0;   // ∫ H_xp dτ
    /// ∂(x, p_x, p_y)/∂(x0, y)
    std::array<std::array<double, 2>, 3> V{};

    double dx_dx0() const { return V[0][0]; }
    double dx_dy() const { return V[0][1]; }
};

struct FlowParams {
    double x0 = 0.0;
    double xi = 0.0;
    double y = 0.0;
    double beta = 1.0;
    double t_final = 0.0;
    int steps = 0;
};

struct ExtendedTrajectory {
    std::vector<double> times;
    std::vector<ExtendedState> states;
    FlowParams params;

    const ExtendedState& final_state() const { return states.back(); }
};

/// Initial point of the extended system for the Gaussian datum β(x − ξ − y)²/2.
ExtendedState initial_state(double x0, double xi, double y, double beta);

/// Classical RK4 integration of the extended system, the action and mixed
/// integrals, and the variational matrix, all in one right-hand side.
///
/// Samples every `stride` steps (the final state is always kept).
/// Throws BlowUpError if |x| exceeds 1e12 or the state becomes non-finite.
ExtendedTrajectory flow(const HamiltonianModel& model, double x0, double xi, double y,
                        double beta, double t, int steps, int stride = 1);

/// flow() with the step-doubling check: repeats at 2× steps until the final
/// (x, p_x, action, mixed, V) agree to `tol` relative, up to `max_doublings`.
ExtendedTrajectory flow_converged(const HamiltonianModel& model, double x0, double xi, double y,
                                  double beta, double t, int steps, double tol = 1e-8,
                                  int max_doublings = 8, int stride = 1);

/// Writes τ, x, y, p_x, p_y, A, M and the six V entries as CSV with a header.
void write_csv(std::ostream& out, const ExtendedTrajectory& trajectory);

// ─── Closed forms for H = x²p² ───────────────────────────────────────────────

struct PhasePoint {
    double x;
    double p;
};

PhasePoint closed_degenerate(double x0, double xi, double y, double beta, double t);

/// ∂x/∂x0 with y eliminated through the diagonal y = p_y. Requires β ∈ (0,1).
double jacobian_degenerate(double x0, double xi, double beta, double t);

/// ∂x/∂x0 at fixed y; its zero set is the fold of the y = const section.
double jacobian_degenerate_yconst(double x0, double xi, double y, double beta, double t);

// ─── H = x² a(x)² p² ─────────────────────────────────────────────────────────

/// Endpoint x of the characteristic from x0 with y eliminated, from
/// ∫_{x0}^{x} ds/(s a(s)) = 2βt x0 a(x0)(x0 − ξ)/(1 − β).
double closed_general(const HamiltonianModel& model, double x0, double xi, double beta, double t);

/// ∂x/∂x0 for closed_general; x must be its output. Rejects x0 = 0.
double jacobian_general(const HamiltonianModel& model, double x0, double xi, double beta,
                        double t, double x);

}  // namespace wkbgreen
