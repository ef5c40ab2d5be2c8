#include "wkbgreen/phase.hpp"

#include "wkbgreen/errors.hpp"

#include <boost/math/tools/toms748_solve.hpp>

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>

namespace wkbgreen {

namespace {

constexpr int kMaxDoublings = 8;

std::optional<ExtendedState> endpoint(const HamiltonianModel& model, double x0, double xi, double y,
                                      double beta, double t, int steps) {
    try {
        return flow(model, x0, xi, y, beta, t, steps, steps).final_state();
    } catch (const BlowUpError&) {
        return std::nullopt;
    }
}

bool states_agree(const ExtendedState& a, const ExtendedState& b, double tol) {
    auto close = [tol](double u, double v) { return std::abs(u - v) <= tol * std::max(1.0, std::abs(v)); };
    return close(a.x, b.x) && close(a.p_x, b.p_x) && close(a.action, b.action) && close(a.mixed, b.mixed) &&
           close(a.V[0][0], b.V[0][0]) && close(a.V[0][1], b.V[0][1]);
}

// Diffusion-like coefficient for the frozen-coefficient (heat) initial guess.
double local_diffusion(const HamiltonianModel& model, double x, double xi) {
    double d = model.coefficient(x) * model.coefficient(xi);
    if (!(d > 0.0) || !std::isfinite(d)) d = model.diffusion(xi);
    if (!(d > 0.0) || !std::isfinite(d)) d = 1.0;
    return d;
}

bool same_side(const HamiltonianModel& model, double target, double candidate) {
    if (!model.fixes_origin() || target == 0.0) return true;
    return candidate != 0.0 && (candidate > 0.0) == (target > 0.0);
}

struct DiagonalProblem {
    const HamiltonianModel& model;
    double x;
    double xi;
    double beta;
    double t;
    double tol;
    int max_iter;

    // Damped Newton on F(x0, y) = (x(x0, y) − x, y − p_y).
    bool solve(int steps, double& x0, double& y) const {
        auto residual = [&](double a, double b, ExtendedState& s) {
            auto e = endpoint(model, a, xi, b, beta, t, steps);
            if (!e) return false;
            s = *e;
            return true;
        };
        const double sx = std::max(1.0, std::abs(x));
        auto merit = [&](const ExtendedState& s, double yy) {
            const double f1 = (s.x - x) / sx;
            const double f2 = (yy - s.p_y) / std::max(1.0, std::abs(yy));
            return f1 * f1 + f2 * f2;
        };

        ExtendedState s;
        if (!residual(x0, y, s)) return false;
        for (int it = 0; it < max_iter; ++it) {
            const double f1 = s.x - x;
            const double f2 = y - s.p_y;
            if (std::abs(f1) <= tol * sx && std::abs(f2) <= tol * std::max(1.0, std::abs(y))) return true;

            const double a = s.V[0][0];
            const double b = s.V[0][1];
            const double c = beta;
            const double d = 1.0 - beta;
            const double det = a * d - b * c;
            if (!std::isfinite(det) || det == 0.0) return false;
            const double dx0 = (-f1 * d + b * f2) / det;
            const double dy = (-a * f2 + c * f1) / det;

            const double m0 = merit(s, y);
            double lambda = 1.0;
            bool accepted = false;
            for (int k = 0; k < 40; ++k, lambda *= 0.5) {
                const double tx0 = x0 + lambda * dx0;
                const double ty = y + lambda * dy;
                if (!same_side(model, x, tx0)) continue;
                ExtendedState ts;
                if (!residual(tx0, ty, ts)) continue;
                if (merit(ts, ty) < m0) {
                    x0 = tx0;
                    y = ty;
                    s = ts;
                    accepted = true;
                    break;
                }
            }
            if (!accepted) return false;
        }
        const double f1 = s.x - x;
        const double f2 = y - s.p_y;
        return std::abs(f1) <= tol * sx && std::abs(f2) <= tol * std::max(1.0, std::abs(y));
    }

    void initial_guess(double t_now, double beta_now, double& x0, double& y) const {
        const double q = 2.0 * beta_now * local_diffusion(model, x, xi) * t_now;
        const double den = 1.0 - beta_now + q;
        x0 = (x * (1.0 - beta_now) + q * xi) / den;
        y = -beta_now * (x - xi) / den;
    }
};

}  // namespace

BoundarySolution solve_boundary(const HamiltonianModel& model, double x, double xi, double beta, double t,
                                const BoundaryOptions& options) {
    if (!(beta > 0.0 && beta < 1.0)) throw DomainError("solve_boundary: beta must lie in (0, 1)");
    if (!(t >= 0.0) || !std::isfinite(t)) throw DomainError("solve_boundary: t must be finite and >= 0");
    if (!std::isfinite(x) || !std::isfinite(xi)) throw DomainError("solve_boundary: non-finite x or xi");
    if (model.fixes_origin()) {
        if (xi == 0.0) {
            throw DeltaRegimeError("source at the fixed origin: the kernel is a delta at x = 0, not a density");
        }
        if (x != 0.0 && (x > 0.0) != (xi > 0.0)) {
            throw DomainError("x and xi lie on opposite sides of the invariant origin; no characteristic connects them");
        }
        if (!model.domain_admits(x) || !model.domain_admits(xi)) {
            throw DomainError("x or xi outside the verified domain of a(x)");
        }
    }

    DiagonalProblem problem{model, x, xi, beta, t, options.tol, options.max_iter};
    int steps = std::max(options.steps, 1);

    double x0 = 0.0, y = 0.0;
    problem.initial_guess(t, beta, x0, y);
    bool ok = problem.solve(steps, x0, y);

    if (!ok) {
        // Continuation in t from (near) 0, where the guess is exact.
        ok = true;
        problem.initial_guess(t / 128.0, beta, x0, y);
        for (int k = 1; k <= 8 && ok; ++k) {
            DiagonalProblem sub = problem;
            sub.t = t * std::ldexp(1.0, k - 8);
            ok = sub.solve(steps, x0, y);
        }
    }
    if (!ok && beta > 0.5) {
        // Continuation in β from 0.5, itself reached by continuation in t.
        ok = true;
        problem.initial_guess(t / 128.0, 0.5, x0, y);
        for (int k = 1; k <= 8 && ok; ++k) {
            DiagonalProblem sub = problem;
            sub.beta = 0.5;
            sub.t = t * std::ldexp(1.0, k - 8);
            ok = sub.solve(steps, x0, y);
        }
        for (int k = 1; k <= 8 && ok; ++k) {
            DiagonalProblem sub = problem;
            sub.beta = 0.5 + (beta - 0.5) * k / 8.0;
            ok = sub.solve(steps, x0, y);
        }
    }
    if (!ok) {
        std::ostringstream msg;
        msg << "solve_boundary: Newton diverged for x=" << x << " xi=" << xi << " beta=" << beta << " t=" << t
            << " (last iterate x0=" << x0 << ", y=" << y << ")";
        throw SolverError(msg.str(), x0, y);
    }

    // Refine the integrator until the endpoint is resolved to flow_tol.
    for (int k = 0;; ++k) {
        const auto coarse = endpoint(model, x0, xi, y, beta, t, steps);
        const auto fine = endpoint(model, x0, xi, y, beta, t, 2 * steps);
        if (coarse && fine && states_agree(*coarse, *fine, options.flow_tol)) break;
        if (k == kMaxDoublings) {
            throw SolverError("solve_boundary: trajectory did not converge under step doubling", x0, y);
        }
        steps *= 2;
        if (!problem.solve(steps, x0, y)) {
            throw SolverError("solve_boundary: Newton lost convergence after step refinement", x0, y);
        }
    }

    BoundarySolution sol;
    sol.x0 = x0;
    sol.y_hat = y;
    sol.steps = steps;
    const int stride = options.record_stride > 0 ? options.record_stride : steps;
    sol.trajectory = flow(model, x0, xi, y, beta, t, steps, stride);
    const auto& s = sol.trajectory.final_state();
    sol.J0 = s.V[0][0];
    sol.J = s.V[0][0] * (1.0 - beta) - beta * s.V[0][1];
    sol.action = s.action;
    sol.mixed = s.mixed;
    sol.residual_x = std::abs(s.x - x);
    sol.residual_diagonal = std::abs(y - s.p_y);
    sol.exponent = phase_exponent(sol, xi, beta);
    if (!std::isfinite(sol.J) || std::abs(sol.J) < 1e-12) {
        throw FoldError("solve_boundary: the solution lies on a singular fiber (J = 0)");
    }
    return sol;
}

double phase_exponent(const BoundarySolution& solution, double xi, double beta) {
    const double d = solution.x0 - xi;
    return beta * d * d / (2.0 * (1.0 - beta)) + solution.action;
}

// ─── phase_field ─────────────────────────────────────────────────────────────

namespace {

struct PreimageResult {
    double x0;
    ExtendedState state;
};

// Newton on x(x0; y) = x at fixed y. A sign change of ∂x/∂x0 between iterates
// means the search crossed a fold.
PreimageResult y_fixed_preimage(const HamiltonianModel& model, double x, double xi, double y, double beta,
                                double t, int steps, double tol, int max_iter, double x0) {
    const double sx = std::max(1.0, std::abs(x));
    tol = std::max(tol, 32.0 * std::numeric_limits<double>::epsilon());
    auto s = endpoint(model, x0, xi, y, beta, t, steps);
    if (!s) throw SolverError("phase_field: characteristic from the initial guess blew up", x0, y);
    const double j_sign = s->V[0][0];
    for (int it = 0; it < max_iter; ++it) {
        const double f = s->x - x;
        if (std::abs(f) <= tol * sx) return {x0, *s};
        const double d = s->V[0][0];
        if (d == 0.0 || !std::isfinite(d)) break;
        if ((d > 0.0) != (j_sign > 0.0)) {
            throw FoldError("phase_field: y-fixed preimage search crossed a fold (J0 changed sign)");
        }
        const double step = -f / d;
        double lambda = 1.0;
        bool accepted = false;
        for (int k = 0; k < 40; ++k, lambda *= 0.5) {
            const double trial = x0 + lambda * step;
            if (!same_side(model, x, trial)) continue;
            auto ts = endpoint(model, trial, xi, y, beta, t, steps);
            if (!ts) continue;
            if (std::abs(ts->x - x) < std::abs(f)) {
                x0 = trial;
                s = ts;
                accepted = true;
                break;
            }
        }
        if (!accepted) break;
    }
    if (std::abs(s->x - x) <= tol * sx) return {x0, *s};
    std::ostringstream msg;
    msg << "phase_field: y-fixed preimage not found for x=" << x << " y=" << y;
    throw SolverError(msg.str(), x0, y);
}

}  // namespace

PhaseEvaluation phase_field(const HamiltonianModel& model, double x, double xi, double y, double beta, double t,
                            const BoundaryOptions& options) {
    if (!(beta > 0.0 && beta <= 1.0)) throw DomainError("phase_field: beta must lie in (0, 1]");
    if (!(t >= 0.0) || !std::isfinite(t)) throw DomainError("phase_field: t must be finite and >= 0");
    if (model.fixes_origin() && x != 0.0 && xi != 0.0 && (x > 0.0) != (xi > 0.0)) {
        throw DomainError("phase_field: x and xi on opposite sides of the invariant origin");
    }

    const double q = 2.0 * beta * local_diffusion(model, x, xi) * t;
    const double guess = (x + q * (xi + y)) / (1.0 + q);
    int steps = std::max(options.steps, 1);

    PreimageResult pre = y_fixed_preimage(model, x, xi, y, beta, t, steps, options.tol, options.max_iter, guess);
    for (int k = 0;; ++k) {
        const auto fine = endpoint(model, pre.x0, xi, y, beta, t, 2 * steps);
        if (fine && states_agree(pre.state, *fine, options.flow_tol)) break;
        if (k == kMaxDoublings) throw SolverError("phase_field: trajectory did not converge", pre.x0, y);
        steps *= 2;
        pre = y_fixed_preimage(model, x, xi, y, beta, t, steps, options.tol, options.max_iter, pre.x0);
    }

    PhaseEvaluation out;
    out.x0 = pre.x0;
    const double m = pre.x0 - xi - y;
    out.phi = 0.5 * beta * m * m + pre.state.action;
    out.phi_y = pre.state.p_y;
    out.J0 = pre.state.V[0][0];
    out.action = pre.state.action;
    out.mixed = pre.state.mixed;

    const double dy = 1e-5 * std::max(1.0, std::abs(y));
    const auto plus = y_fixed_preimage(model, x, xi, y + dy, beta, t, steps, options.tol * 1e-3,
                                       options.max_iter, pre.x0);
    const auto minus = y_fixed_preimage(model, x, xi, y - dy, beta, t, steps, options.tol * 1e-3,
                                        options.max_iter, pre.x0);
    out.phi_yy = (plus.state.p_y - minus.state.p_y) / (2.0 * dy);
    return out;
}

// ─── Manifold sections ───────────────────────────────────────────────────────

ManifoldSection manifold_section(const HamiltonianModel& model, double xi, double y, double beta, double t,
                                 double x0_min, double x0_max, int n, int steps) {
    if (n < 2) throw DomainError("manifold_section: need at least 2 samples");
    if (!(x0_max > x0_min)) throw DomainError("manifold_section: empty x0 range");

    ManifoldSection section;
    section.samples.reserve(static_cast<std::size_t>(n));
    int used_steps = steps;
    for (int i = 0; i < n; ++i) {
        const double x0 = x0_min + (x0_max - x0_min) * i / (n - 1);
        const auto traj = flow_converged(model, x0, xi, y, beta, t, steps, 1e-10, kMaxDoublings, 1 << 30);
        used_steps = std::max(used_steps, traj.params.steps);
        const auto& s = traj.final_state();
        section.samples.push_back({x0, s.x, s.p_x, s.V[0][0]});
    }

    auto jacobian = [&](double x0) { return flow(model, x0, xi, y, beta, t, used_steps, used_steps).final_state().V[0][0]; };
    for (std::size_t i = 1; i < section.samples.size(); ++i) {
        const auto& a = section.samples[i - 1];
        const auto& b = section.samples[i];
        if (a.J0_yconst == 0.0) {
            section.caustics.push_back(a.x0);
            continue;
        }
        if ((a.J0_yconst > 0.0) == (b.J0_yconst > 0.0) || b.J0_yconst == 0.0) continue;
        std::uintmax_t max_iter = 200;
        auto tol = [](double lo, double hi) { return std::abs(hi - lo) <= 1e-12; };
        const auto [lo, hi] = boost::math::tools::toms748_solve(jacobian, a.x0, b.x0, a.J0_yconst, b.J0_yconst,
                                                                tol, max_iter);
        section.caustics.push_back(0.5 * (lo + hi));
    }
    if (section.samples.back().J0_yconst == 0.0) section.caustics.push_back(section.samples.back().x0);
    return section;
}

void write_csv(std::ostream& out, const ManifoldSection& section) {
    out << "x0,x,p_x,J0\n";
    const auto old_precision = out.precision(17);
    for (const auto& s : section.samples) {
        out << s.x0 << ',' << s.x << ',' << s.p_x << ',' << s.J0_yconst << '\n';
    }
    out.precision(old_precision);
}

nlohmann::json caustics_json(const ManifoldSection& section) {
    nlohmann::json j;
    j["caustics"] = section.caustics;
    j["count"] = section.caustics.size();
    return j;
}

}  // namespace wkbgreen
