#pragma once

#include "wkbgreen/hamiltonian.hpp"

#include <json.hpp>

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace wkbgreen {

struct Grid1D {
    double x_min = 0.0;
    double x_max = 1.0;
    int n = 3;
    double dx = 0.5;
    double dt = 0.5;  // requested time step; the solver rounds it down to divide t_final
    double h = 1.0;

    /// Validates n ≥ 3, x_min < x_max, dt > 0, h > 0 and fills dx.
    static Grid1D make(double x_min, double x_max, int n, double dt, double h);

    double node(int i) const { return x_min + i * dx; }
    std::vector<double> nodes() const;
};

struct FieldSolution {
    Grid1D grid;
    std::vector<double> times;
    std::vector<std::vector<double>> frames;
    HamiltonianKind diffusion = HamiltonianKind::heat;
    int steps = 0;
    double dt = 0.0;        // step actually taken
    double leakage = 0.0;   // ∫|h D u_x| dt through both ends, relative to the initial mass
    bool leakage_warning = false;

    const std::vector<double>& final_frame() const { return frames.back(); }

    /// Value at x by four-point Lagrange interpolation on `frame`.
    double sample(double x, std::size_t frame) const;
};

/// Crank–Nicolson for u_t = h D(x) u_xx (non-divergence form) with zero
/// Dirichlet ends; one Thomas solve per step. `frame_count` ≥ 2 snapshots
/// are kept at equally spaced times including 0 and t_final.
FieldSolution crank_nicolson(const HamiltonianModel& model, const Grid1D& grid, const std::vector<double>& u0,
                             double t_final, int frame_count = 2);

/// m_k(t) = ∫ x^k u dx for every stored frame (trapezoid).
std::vector<double> moment_check(const FieldSolution& solution, int k);

/// Trapezoid mass of |u| on {x < bound} in the given frame.
double mass_below(const FieldSolution& solution, double bound, std::size_t frame);

/// Unit-mass Gaussian of width sigma centred at xi, sampled on the grid.
std::vector<double> gaussian_datum(const Grid1D& grid, double xi, double sigma);

/// Grid covering 6 kernel widths around ξ (log scale when the origin is
/// fixed) and the target x, with dt ≤ min(dx, σ²/(2 h D(ξ))).
Grid1D auto_grid(const HamiltonianModel& model, double x, double xi, double t, double h, double sigma, int n);

/// max(5 dx, √h / 20).
double default_sigma(double dx, double h);

struct ErrorReport {
    double x = 0.0;
    double xi = 0.0;
    double t = 0.0;
    double h = 0.0;
    double sigma = 0.0;
    Grid1D grid;
    int steps = 0;
    double wkb_value = 0.0;           // beta_limit at (x, ξ)
    double wkb_smoothed = 0.0;        // beta_limit convolved with the initial Gaussian
    double oracle_value = 0.0;        // Crank–Nicolson at (x, t)
    double rel_error = 0.0;           // |oracle − wkb_value| / |oracle|
    double rel_error_smoothed = 0.0;  // |oracle − wkb_smoothed| / |oracle|
    std::optional<double> exact_value;          // heat only: exact kernel smoothed by the Gaussian
    std::optional<double> rel_error_exact;
    double leakage = 0.0;
    bool underflow = false;           // exponent/h > 40: comparison skipped
    std::string tag;                  // "ok" or "underflow regime"

    /// Deviation used for acceptance: the smoothed comparison.
    double deviation() const { return rel_error_smoothed; }
};

/// Solves from a unit-mass Gaussian of width sigma at ξ (sigma ≤ 0 picks
/// default_sigma) and compares with the WKB Green's function at (x, t).
ErrorReport compare_green(const HamiltonianModel& model, double x, double xi, double t, double h, double sigma = 0.0,
                          int n = 4001);

void write_frames_csv(std::ostream& out, const FieldSolution& solution);
nlohmann::json to_json(const ErrorReport& report);

}  // namespace wkbgreen
