#include "wkbgreen/green.hpp"

#include "wkbgreen/errors.hpp"
#include "wkbgreen/parallel.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace wkbgreen {

std::string_view to_string(GreenKind kind) {
    switch (kind) {
        case GreenKind::density: return "density";
        case GreenKind::delta_at_origin: return "delta-at-origin";
        case GreenKind::unreachable: return "unreachable";
    }
    return "unknown";
}

double GreenValue::log_value() const {
    if (kind != GreenKind::density) return -std::numeric_limits<double>::infinity();
    return std::log(prefactor) + std::log(amplitude) - exponent / h;
}

namespace {

double prefactor_for(double h) { return 1.0 / std::sqrt(2.0 * std::numbers::pi * h); }

void check_th(double t, double h) {
    if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("t must be finite and > 0");
    if (!(h > 0.0) || !std::isfinite(h)) throw DomainError("h must be finite and > 0");
}

GreenValue delta_sentinel(const HamiltonianModel& model, double t, double h, double beta, bool limit) {
    GreenValue g;
    g.kind = GreenKind::delta_at_origin;
    g.value = 0.0;
    g.exponent = std::numeric_limits<double>::infinity();
    g.prefactor = prefactor_for(h);
    g.beta = beta;
    g.is_limit = limit;
    g.h = h;
    g.mass_factor = origin_mass_factor(model, t, h);
    return g;
}

GreenValue unreachable_value(double x, double xi, double h, double beta, bool limit) {
    GreenValue g;
    g.kind = GreenKind::unreachable;
    g.value = 0.0;
    g.exponent = std::numeric_limits<double>::infinity();
    g.prefactor = prefactor_for(h);
    g.beta = beta;
    g.is_limit = limit;
    g.h = h;
    g.x0 = x == 0.0 ? 0.0 : xi;
    return g;
}

}  // namespace

double origin_mass_factor(const HamiltonianModel& model, double t, double h) {
    if (!model.fixes_origin()) return 1.0;
    const double a0 = model.a(0.0);
    return std::exp(2.0 * a0 * a0 * h * t);
}

GreenValue assemble(const HamiltonianModel& model, double x, double xi, double t, double h, double beta,
                    AssemblyPath path, const BoundaryOptions& options) {
    check_th(t, h);
    if (!(beta > 0.0 && beta < 1.0)) throw DomainError("assemble: beta must lie in (0, 1)");
    if (model.fixes_origin() && xi == 0.0) return delta_sentinel(model, t, h, beta, false);

    const BoundarySolution sol = solve_boundary(model, x, xi, beta, t, options);
    if (!(sol.J > 0.0)) throw FoldError("assemble: extended Jacobian J <= 0 (fold or singular fiber)");

    GreenValue g;
    g.prefactor = prefactor_for(h);
    g.beta = beta;
    g.h = h;
    g.x0 = sol.x0;
    g.y_hat = sol.y_hat;
    g.J = sol.J;
    g.J0 = sol.J0;

    if (path == AssemblyPath::extended_jacobian) {
        g.exponent = sol.exponent;
        g.amplitude = std::exp(0.5 * sol.mixed) / std::sqrt(sol.J);
    } else {
        const PhaseEvaluation pf = phase_field(model, x, xi, sol.y_hat, beta, t, options);
        const double hess = 1.0 - pf.phi_yy;
        if (!(pf.J0 > 0.0) || !(hess > 0.0)) {
            throw FoldError("assemble: J0 <= 0 or 1 - Phi_yy <= 0 on the phase-hessian path");
        }
        g.exponent = pf.phi - 0.5 * sol.y_hat * sol.y_hat;
        g.amplitude = std::exp(0.5 * pf.mixed) / (std::sqrt(pf.J0) * std::sqrt(hess));
        g.J0 = pf.J0;
    }
    g.value = g.prefactor * g.amplitude * std::exp(-g.exponent / h);
    return g;
}

// ─── β-limit ─────────────────────────────────────────────────────────────────

BetaSchedule BetaSchedule::standard() {
    BetaSchedule s;
    for (int k = 10; k <= 17; ++k) s.betas.push_back(1.0 - std::ldexp(1.0, -k));
    return s;
}

void BetaSchedule::validate() const {
    if (betas.empty()) throw ConfigError("beta schedule is empty");
    for (std::size_t i = 0; i < betas.size(); ++i) {
        if (!(betas[i] > 0.0 && betas[i] < 1.0)) throw ConfigError("beta schedule entries must lie in (0, 1)");
        if (i > 0 && !(betas[i] > betas[i - 1])) throw ConfigError("beta schedule must be strictly increasing");
    }
    if (!(tol > 0.0)) throw ConfigError("beta schedule tolerance must be positive");
}

double extrapolate_to_zero(std::span<const double> eps, std::span<const double> values) {
    std::vector<double> p(values.begin(), values.end());
    const std::size_t n = p.size();
    for (std::size_t m = 1; m < n; ++m) {
        for (std::size_t i = 0; i + m < n; ++i) {
            p[i] = (eps[i] * p[i + 1] - eps[i + m] * p[i]) / (eps[i] - eps[i + m]);
        }
    }
    return p.empty() ? 0.0 : p[0];
}

GreenValue beta_limit(const HamiltonianModel& model, double x, double xi, double t, double h,
                      const BetaSchedule& schedule, const BoundaryOptions& options) {
    check_th(t, h);
    schedule.validate();
    if (model.fixes_origin()) {
        if (xi == 0.0) return delta_sentinel(model, t, h, 1.0, true);
        // x = 0 is reached only from x0 = 0, whose exponent βξ²/(2(1−β)) diverges.
        if (x == 0.0 || (x > 0.0) != (xi > 0.0)) return unreachable_value(x, xi, h, 1.0, true);
    }

    const std::size_t n = schedule.betas.size();
    std::vector<double> eps(n), E(n), LA(n), X0(n), Y(n), J(n), J0(n);
    for (std::size_t i = 0; i < n; ++i) {
        const GreenValue g = assemble(model, x, xi, t, h, schedule.betas[i], AssemblyPath::extended_jacobian, options);
        eps[i] = 1.0 - schedule.betas[i];
        E[i] = g.exponent;
        LA[i] = std::log(g.amplitude);
        X0[i] = g.x0;
        Y[i] = g.y_hat;
        J[i] = g.J;
        J0[i] = g.J0;
    }

    GreenValue out;
    out.prefactor = prefactor_for(h);
    out.beta = 1.0;
    out.is_limit = true;
    out.h = h;
    const double log_pref = std::log(out.prefactor);

    double E_lim, LA_lim, log_prev;
    if (schedule.extrapolation == Extrapolation::richardson && n >= 2) {
        E_lim = extrapolate_to_zero(eps, E);
        LA_lim = extrapolate_to_zero(eps, LA);
        out.x0 = extrapolate_to_zero(eps, X0);
        out.y_hat = extrapolate_to_zero(eps, Y);
        out.J = extrapolate_to_zero(eps, J);
        out.J0 = extrapolate_to_zero(eps, J0);
        const auto tail = std::span<const double>(eps).subspan(1);
        log_prev = log_pref + extrapolate_to_zero(tail, std::span<const double>(LA).subspan(1)) -
                   extrapolate_to_zero(tail, std::span<const double>(E).subspan(1)) / h;
    } else {
        // No extrapolation: report the largest β actually used.
        out.beta = schedule.betas.back();
        out.is_limit = false;
        E_lim = E.back();
        LA_lim = LA.back();
        out.x0 = X0.back();
        out.y_hat = Y.back();
        out.J = J.back();
        out.J0 = J0.back();
        log_prev = n >= 2 ? log_pref + LA[n - 2] - E[n - 2] / h : std::numeric_limits<double>::quiet_NaN();
    }
    out.exponent = E_lim;
    out.amplitude = std::exp(LA_lim);
    out.value = out.prefactor * out.amplitude * std::exp(-E_lim / h);
    const double log_now = log_pref + LA_lim - E_lim / h;
    out.converged = std::isfinite(log_now) && std::abs(log_now - log_prev) <= schedule.tol;
    return out;
}

// ─── Closed forms ────────────────────────────────────────────────────────────

double heat_exact_log(double x, double xi, double t, double h) {
    check_th(t, h);
    const double d = x - xi;
    return -0.5 * std::log(4.0 * std::numbers::pi * h * t) - d * d / (4.0 * t * h);
}

double heat_exact(double x, double xi, double t, double h) { return std::exp(heat_exact_log(x, xi, t, h)); }

double gbeta_at_origin(double xi, double /*t*/, double h, double beta) {
    if (!(beta > 0.0 && beta < 1.0)) throw DomainError("gbeta_at_origin: beta must lie in (0, 1)");
    if (!(h > 0.0)) throw DomainError("gbeta_at_origin: h must be > 0");
    const double eps = 1.0 - beta;
    return std::exp(-beta * xi * xi / (2.0 * eps * h)) / (std::sqrt(2.0 * std::numbers::pi * h) * std::sqrt(eps));
}

// ─── Convolution ─────────────────────────────────────────────────────────────

QuadratureResult convolve_samples(std::span<const double> xi_grid, std::span<const double> green,
                                  std::span<const double> u0, double tol) {
    const std::size_t n = xi_grid.size();
    if (n < 3 || green.size() != n || u0.size() != n) {
        throw DomainError("convolve: need at least 3 nodes and matching sample sizes");
    }
    const double dx = (xi_grid[n - 1] - xi_grid[0]) / static_cast<double>(n - 1);
    if (!(dx > 0.0)) throw DomainError("convolve: grid must be increasing");
    for (std::size_t i = 1; i < n; ++i) {
        if (std::abs(xi_grid[i] - xi_grid[i - 1] - dx) > 1e-9 * dx) throw DomainError("convolve: grid must be uniform");
    }

    std::vector<double> f(n);
    for (std::size_t i = 0; i < n; ++i) f[i] = green[i] * u0[i];

    double fine = 0.0;
    for (std::size_t i = 0; i < n; ++i) fine += f[i];
    fine = dx * (fine - 0.5 * (f[0] + f[n - 1]));

    // Coarse rule on every other node; an odd leftover interval uses the fine spacing.
    const std::size_t last_even = (n - 1) % 2 == 0 ? n - 1 : n - 2;
    double coarse = 0.0;
    for (std::size_t i = 0; i <= last_even; i += 2) coarse += f[i];
    coarse = 2.0 * dx * (coarse - 0.5 * (f[0] + f[last_even]));
    if (last_even != n - 1) coarse += 0.5 * dx * (f[n - 2] + f[n - 1]);

    QuadratureResult r{fine, std::abs(fine - coarse) / 3.0};
    if (r.error_estimate > tol * std::abs(r.value) && r.error_estimate > 0.0) {
        throw DomainError("convolve: grid too coarse (estimated quadrature error " + std::to_string(r.error_estimate) +
                          " exceeds tolerance)");
    }
    return r;
}

double convolve(const HamiltonianModel& model, std::span<const double> xi_grid, std::span<const double> u0,
                double x, double t, double h, double tol, const BetaSchedule& schedule,
                const BoundaryOptions& options) {
    if (u0.size() != xi_grid.size()) throw DomainError("convolve: u0 and grid sizes differ");
    const auto green = parallel_map(xi_grid.size(), [&](std::size_t i) {
        if (u0[i] == 0.0) return 0.0;
        return beta_limit(model, x, xi_grid[i], t, h, schedule, options).value;
    });
    return convolve_samples(xi_grid, green, u0, tol).value;
}

}  // namespace wkbgreen
