#pragma once

#include "wkbgreen/characteristics.hpp"
#include "wkbgreen/hamiltonian.hpp"

#include <json.hpp>

#include <iosfwd>
#include <vector>

namespace wkbgreen {

struct BoundaryOptions {
    int steps = 128;        // initial RK4 step count, doubled until converged
    double tol = 1e-10;     // residual tolerance for both boundary conditions
    int max_iter = 60;      // Newton iterations per attempt
    double flow_tol = 1e-8; // step-doubling agreement of the final trajectory
    int record_stride = 0;  // 0: keep only the trajectory endpoints
};

/// Preimage (x0, ŷ) of a target point under the projection onto (x, y = p_y).
struct BoundarySolution {
    double x0 = 0.0;
    double y_hat = 0.0;
    ExtendedTrajectory trajectory;
    double J0 = 0.0;        // ∂x/∂x0 at fixed y
    double J = 0.0;         // det ∂(x, y − p_y)/∂(x0, y)
    double exponent = 0.0;  // Φ_β(ŷ) − ŷ²/2
    double action = 0.0;    // ∫(pH_p − H)dτ
    double mixed = 0.0;     // ∫H_xp dτ
    double residual_x = 0.0;
    double residual_diagonal = 0.0;
    int steps = 0;
};

/// Solves x(x0, y) = x and y = p_y by damped Newton with the variational
/// Jacobian, falling back to continuation in t and then in β.
///
/// Throws DeltaRegimeError for ξ = 0 on models fixing the origin, DomainError
/// when x and ξ lie on opposite sides of a fixed origin, SolverError when every
/// strategy fails, FoldError when the solution has J = 0.
BoundarySolution solve_boundary(const HamiltonianModel& model, double x, double xi, double beta, double t,
                                const BoundaryOptions& options = {});

/// E = Φ_β(ŷ) − ŷ²/2 = β(x0 − ξ)²/(2(1 − β)) + ∫(pH_p − H)dτ on the diagonal.
double phase_exponent(const BoundarySolution& solution, double xi, double beta);

struct PhaseEvaluation {
    double phi = 0.0;     // Φ_β(x, ξ, y, t)
    double phi_y = 0.0;   // equals p_y of the characteristic through (x, y)
    double phi_yy = 0.0;  // central difference of phi_y in y
    double x0 = 0.0;      // y-fixed preimage of x
    double J0 = 0.0;
    double action = 0.0;
    double mixed = 0.0;
};

/// Phase of the symbol at fixed y via the y-fixed preimage x0(x, y).
PhaseEvaluation phase_field(const HamiltonianModel& model, double x, double xi, double y, double beta,
                            double t, const BoundaryOptions& options = {});

struct ManifoldSample {
    double x0;
    double x;
    double p_x;
    double J0_yconst;
};

struct ManifoldSection {
    std::vector<ManifoldSample> samples;
    std::vector<double> caustics;  // x0 where J0_yconst changes sign
};

/// Samples the y = const section of the Lagrangian manifold on [x0_min, x0_max]
/// and refines each sign change of ∂x/∂x0 to 1e-10.
ManifoldSection manifold_section(const HamiltonianModel& model, double xi, double y, double beta, double t,
                                 double x0_min, double x0_max, int n, int steps = 1024);

void write_csv(std::ostream& out, const ManifoldSection& section);
nlohmann::json caustics_json(const ManifoldSection& section);

}  // namespace wkbgreen
