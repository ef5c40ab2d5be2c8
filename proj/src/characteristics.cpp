#include "wkbgreen/characteristics.hpp"

#include "wkbgreen/errors.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include <cmath>
#include <cstdint>
#include <ostream>
#include <sstream>

namespace wkbgreen {

namespace {

constexpr double kBlowUp = 1e12;

using Packed = std::array<double, 12>;

Packed pack(const ExtendedState& s) {
    return {s.x, s.y, s.p_x, s.p_y, s.action, s.mixed,
            s.V[0][0], s.V[0][1], s.V[1][0], s.V[1][1], s.V[2][0], s.V[2][1]};
}

ExtendedState unpack(const Packed& u) {
    ExtendedState s;
    s.x = u[0];
    s.y = u[1];
    s.p_x = u[2];
    s.p_y = u[3];
    s.action = u[4];
    s.mixed = u[5];
    s.V = {{{u[6], u[7]}, {u[8], u[9]}, {u[10], u[11]}}};
    return s;
}

Packed rhs(const HamiltonianModel& model, const Packed& u) {
    const Derivatives d = model.derivatives(u[0], u[2]);
    Packed du{};
    du[0] = d.H_p;
    du[2] = -d.H_x;
    du[4] = u[2] * d.H_p - d.H;
    du[5] = d.H_xp;
    for (int j = 0; j < 2; ++j) {
        const double vx = u[6 + j];
        const double vp = u[8 + j];
        du[6 + j] = d.H_xp * vx + d.H_pp * vp;
        du[8 + j] = -d.H_xx * vx - d.H_xp * vp;
    }
    return du;
}

Packed axpy(const Packed& u, double a, const Packed& k) {
    Packed r;
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = u[i] + a * k[i];
    return r;
}

bool finite_and_bounded(const Packed& u) {
    for (double v : u) {
        if (!std::isfinite(v)) return false;
    }
    return std::abs(u[0]) <= kBlowUp;
}

bool close(double a, double b, double tol) { return std::abs(a - b) <= tol * std::max(1.0, std::abs(b)); }

}  // namespace

ExtendedState initial_state(double x0, double xi, double y, double beta) {
    ExtendedState s;
    const double p0 = beta * (x0 - y - xi);
    s.x = x0;
    s.y = y;
    s.p_x = p0;
    s.p_y = -p0;
    s.V = {{{1.0, 0.0}, {beta, -beta}, {-beta, beta}}};
    return s;
}

ExtendedTrajectory flow(const HamiltonianModel& model, double x0, double xi, double y, double beta,
                        double t, int steps, int stride) {
    if (!(t >= 0.0) || !std::isfinite(t)) throw DomainError("flow: t must be finite and >= 0");
    if (!(beta > 0.0 && beta <= 1.0)) throw DomainError("flow: beta must lie in (0, 1]");
    if (steps < 1) throw DomainError("flow: steps must be >= 1");
    if (!std::isfinite(x0) || !std::isfinite(xi) || !std::isfinite(y)) {
        throw DomainError("flow: non-finite initial data");
    }
    stride = std::max(stride, 1);

    ExtendedTrajectory traj;
    traj.params = FlowParams{x0, xi, y, beta, t, steps};
    const std::size_t expected = static_cast<std::size_t>(steps / stride) + 2;
    traj.times.reserve(expected);
    traj.states.reserve(expected);

    Packed u = pack(initial_state(x0, xi, y, beta));
    traj.times.push_back(0.0);
    traj.states.push_back(unpack(u));

    const double dt = t / steps;
    for (int i = 1; i <= steps; ++i) {
        const Packed k1 = rhs(model, u);
        const Packed k2 = rhs(model, axpy(u, 0.5 * dt, k1));
        const Packed k3 = rhs(model, axpy(u, 0.5 * dt, k2));
        const Packed k4 = rhs(model, axpy(u, dt, k3));
        for (std::size_t c = 0; c < u.size(); ++c) {
            u[c] += dt / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
        }
        const double tau = (i == steps) ? t : dt * i;
        if (!finite_and_bounded(u)) {
            std::ostringstream msg;
            msg << "characteristic from x0=" << x0 << " blew up at t=" << tau;
            throw BlowUpError(msg.str(), tau);
        }
        if (i % stride == 0 || i == steps) {
            traj.times.push_back(tau);
            traj.states.push_back(unpack(u));
        }
    }
    return traj;
}

ExtendedTrajectory flow_converged(const HamiltonianModel& model, double x0, double xi, double y,
                                  double beta, double t, int steps, double tol, int max_doublings,
                                  int stride) {
    ExtendedTrajectory coarse = flow(model, x0, xi, y, beta, t, steps, stride);
    for (int k = 0; k < max_doublings; ++k) {
        steps *= 2;
        ExtendedTrajectory fine = flow(model, x0, xi, y, beta, t, steps, stride);
        const auto& a = coarse.final_state();
        const auto& b = fine.final_state();
        bool ok = close(a.x, b.x, tol) && close(a.p_x, b.p_x, tol) && close(a.action, b.action, tol) &&
                  close(a.mixed, b.mixed, tol);
        for (int r = 0; r < 2 && ok; ++r) {
            for (int c = 0; c < 2 && ok; ++c) ok = close(a.V[r][c], b.V[r][c], tol);
        }
        if (ok) return fine;
        coarse = std::move(fine);
    }
    std::ostringstream msg;
    msg << "flow from x0=" << x0 << " did not converge to " << tol << " within " << steps << " steps";
    throw SolverError(msg.str(), x0, y);
}

void write_csv(std::ostream& out, const ExtendedTrajectory& trajectory) {
    out << "tau,x,y,p_x,p_y,A,M,V_x_x0,V_x_y,V_px_x0,V_px_y,V_py_x0,V_py_y\n";
    const auto old_precision = out.precision(17);
    for (std::size_t i = 0; i < trajectory.states.size(); ++i) {
        const auto& s = trajectory.states[i];
        out << trajectory.times[i] << ',' << s.x << ',' << s.y << ',' << s.p_x << ',' << s.p_y << ','
            << s.action << ',' << s.mixed;
        for (const auto& row : s.V) out << ',' << row[0] << ',' << row[1];
        out << '\n';
    }
    out.precision(old_precision);
}

// ─── Closed forms ────────────────────────────────────────────────────────────

PhasePoint closed_degenerate(double x0, double xi, double y, double beta, double t) {
    const double m = beta * (x0 - xi - y);
    const double e = std::exp(2.0 * x0 * m * t);
    return {x0 * e, m / e};
}

double jacobian_degenerate(double x0, double xi, double beta, double t) {
    if (!(beta > 0.0 && beta < 1.0)) throw DomainError("jacobian_degenerate: beta must lie in (0, 1)");
    const double k = 2.0 * beta * t / (1.0 - beta);
    return std::exp(k * x0 * (x0 - xi)) * (1.0 + k * (2.0 * x0 * x0 - x0 * xi));
}

double jacobian_degenerate_yconst(double x0, double xi, double y, double beta, double t) {
    const double q = 2.0 * beta * t;
    return std::exp(q * x0 * (x0 - xi - y)) * (1.0 + q * x0 * (2.0 * x0 - xi - y));
}

double closed_general(const HamiltonianModel& model, double x0, double xi, double beta, double t) {
    if (model.kind() == HamiltonianKind::heat) throw DomainError("closed_general needs a degenerate-family model");
    if (!(beta > 0.0 && beta < 1.0)) throw DomainError("closed_general: beta must lie in (0, 1)");
    if (x0 == 0.0) return 0.0;
    if (!model.domain_admits(x0)) throw DomainError("closed_general: x0 outside the verified domain of a(x)");

    const double a0 = model.a(x0);
    const double rhs = 2.0 * beta * t * x0 * a0 * (x0 - xi) / (1.0 - beta);
    if (rhs == 0.0) return x0;

    // With x = x0 e^u the integral becomes ∫_0^u dv / a(x0 e^v), free of the
    // singularity at the origin and monotone in u while a keeps its sign.
    auto integrand = [&](double v) { return 1.0 / model.a(x0 * std::exp(v)); };
    auto g = [&](double u) {
        using Quad = boost::math::quadrature::gauss_kronrod<double, 31>;
        if (u == 0.0) return -rhs;
        if (u > 0.0) return Quad::integrate(integrand, 0.0, u, 20, 1e-14) - rhs;
        return -Quad::integrate(integrand, u, 0.0, 20, 1e-14) - rhs;
    };
    auto check_sign = [&](double lo, double hi) {
        constexpr int samples = 64;
        for (int i = 0; i <= samples; ++i) {
            const double x = x0 * std::exp(lo + (hi - lo) * i / samples);
            const double a = model.a(x);
            if (!(a * a0 > 0.0) || std::abs(a) < 1e-12) {
                std::ostringstream msg;
                msg << "closed_general: a(x) vanished in bracket near x = " << x;
                throw DomainError(msg.str());
            }
        }
    };

    const double direction = (rhs * a0 > 0.0) ? 1.0 : -1.0;
    double lo = 0.0;
    double hi = direction * 0.5;
    constexpr double u_limit = 27.6;  // |log x/x0| beyond the blow-up bound
    while (true) {
        check_sign(lo, hi);
        if (g(hi) * g(lo) <= 0.0) break;
        lo = hi;
        hi *= 2.0;
        if (std::abs(hi) > u_limit) {
            throw SolverError("closed_general: root not bracketed, the characteristic left the domain", x0, hi);
        }
    }
    if (lo > hi) std::swap(lo, hi);
    std::uintmax_t max_iter = 200;
    const auto [left, right] =
        boost::math::tools::toms748_solve(g, lo, hi, boost::math::tools::eps_tolerance<double>(48), max_iter);
    return x0 * std::exp(0.5 * (left + right));
}

double jacobian_general(const HamiltonianModel& model, double x0, double xi, double beta, double t,
                        double x) {
    if (x0 == 0.0) throw DomainError("jacobian_general: x0 = 0 is the fixed point; the formula is 0/0 there");
    if (!(beta > 0.0 && beta < 1.0)) throw DomainError("jacobian_general: beta must lie in (0, 1)");
    const double a0 = model.a(x0);
    const double da0 = model.a_prime(x0);
    const double bracket = a0 * (2.0 * x0 - xi) + x0 * da0 * (x0 - xi);
    const double k = 2.0 * beta * t * x0 * a0 / (1.0 - beta);
    return (x * model.a(x)) / (x0 * a0) * (1.0 + k * bracket);
}

}  // namespace wkbgreen
