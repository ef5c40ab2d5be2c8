#include "wkbgreen/oracle.hpp"

#include "wkbgreen/csv.hpp"
#include "wkbgreen/errors.hpp"
#include "wkbgreen/green.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

namespace wkbgreen {

Grid1D Grid1D::make(double x_min, double x_max, int n, double dt, double h) {
    if (n < 3) throw ConfigError("grid needs n >= 3");
    if (!(x_max > x_min) || !std::isfinite(x_min) || !std::isfinite(x_max)) {
        throw ConfigError("grid needs finite x_min < x_max");
    }
    if (!(dt > 0.0)) throw ConfigError("grid needs dt > 0");
    if (!(h > 0.0)) throw ConfigError("grid needs h > 0");
    Grid1D g;
    g.x_min = x_min;
    g.x_max = x_max;
    g.n = n;
    g.dx = (x_max - x_min) / (n - 1);
    g.dt = dt;
    g.h = h;
    return g;
}

std::vector<double> Grid1D::nodes() const {
    std::vector<double> xs(n);
    for (int i = 0; i < n; ++i) xs[i] = node(i);
    return xs;
}

double FieldSolution::sample(double x, std::size_t frame) const {
    const auto& u = frames.at(frame);
    if (x < grid.x_min || x > grid.x_max) return 0.0;
    int i = static_cast<int>(std::floor((x - grid.x_min) / grid.dx));
    i = std::clamp(i - 1, 0, grid.n - 4);
    double value = 0.0;
    for (int j = 0; j < 4; ++j) {
        double w = 1.0;
        for (int k = 0; k < 4; ++k) {
            if (k != j) w *= (x - grid.node(i + k)) / (grid.node(i + j) - grid.node(i + k));
        }
        value += w * u[i + j];
    }
    return value;
}

namespace {

double trapezoid(const Grid1D& grid, const std::vector<double>& f) {
    double s = 0.5 * (f.front() + f.back());
    for (int i = 1; i < grid.n - 1; ++i) s += f[i];
    return s * grid.dx;
}

}  // namespace

FieldSolution crank_nicolson(const HamiltonianModel& model, const Grid1D& grid, const std::vector<double>& u0,
                             double t_final, int frame_count) {
    if (static_cast<int>(u0.size()) != grid.n) throw ConfigError("u0 must be sampled on the grid");
    if (!(t_final >= 0.0)) throw DomainError("t_final must be >= 0");
    frame_count = std::max(frame_count, 2);

    FieldSolution sol;
    sol.grid = grid;
    sol.diffusion = model.spec().kind;
    const int n = grid.n;
    const int steps = t_final > 0.0 ? static_cast<int>(std::ceil(t_final / grid.dt - 1e-9)) : 0;
    const double dt = steps > 0 ? t_final / steps : 0.0;
    sol.steps = steps;
    sol.dt = dt;

    std::vector<double> u = u0;
    u.front() = 0.0;
    u.back() = 0.0;

    std::vector<double> r(n, 0.0);
    for (int i = 1; i < n - 1; ++i) r[i] = grid.h * model.diffusion(grid.node(i)) * dt / (2.0 * grid.dx * grid.dx);

    // Forward sweep of the constant tridiagonal (−r, 1 + 2r, −r) on interior nodes.
    std::vector<double> c_prime(n, 0.0), denom(n, 1.0);
    for (int i = 1; i < n - 1; ++i) {
        const double lower = i > 1 ? -r[i] : 0.0;
        denom[i] = (1.0 + 2.0 * r[i]) - lower * c_prime[i - 1];
        c_prime[i] = (i < n - 2 ? -r[i] : 0.0) / denom[i];
    }

    std::vector<std::size_t> frame_steps(frame_count);
    for (int k = 0; k < frame_count; ++k) {
        frame_steps[k] = static_cast<std::size_t>(std::llround(static_cast<double>(k) * steps / (frame_count - 1)));
    }
    std::size_t next_frame = 0;
    auto record = [&](int step) {
        while (next_frame < frame_steps.size() && frame_steps[next_frame] == static_cast<std::size_t>(step)) {
            sol.times.push_back(step * dt);
            sol.frames.push_back(u);
            ++next_frame;
        }
    };
    record(0);

    double initial_mass = 0.0;
    {
        std::vector<double> a(n);
        std::transform(u.begin(), u.end(), a.begin(), [](double v) { return std::abs(v); });
        initial_mass = trapezoid(grid, a);
    }
    const double D_left = model.diffusion(grid.x_min);
    const double D_right = model.diffusion(grid.x_max);
    double leaked = 0.0;

    std::vector<double> d(n, 0.0);
    for (int step = 1; step <= steps; ++step) {
        for (int i = 1; i < n - 1; ++i) d[i] = r[i] * u[i - 1] + (1.0 - 2.0 * r[i]) * u[i] + r[i] * u[i + 1];
        // Boundary values are pinned to zero, so they drop out of the first and last rows.
        d[1] /= denom[1];
        for (int i = 2; i < n - 1; ++i) d[i] = (d[i] + r[i] * d[i - 1]) / denom[i];
        u[n - 2] = d[n - 2];
        for (int i = n - 3; i >= 1; --i) u[i] = d[i] - c_prime[i] * u[i + 1];

        const double ux_left = (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * grid.dx);
        const double ux_right = (3.0 * u[n - 1] - 4.0 * u[n - 2] + u[n - 3]) / (2.0 * grid.dx);
        leaked += grid.h * dt * (D_left * std::abs(ux_left) + D_right * std::abs(ux_right));
        record(step);
    }
    for (const auto& frame : sol.frames) {
        for (double v : frame) {
            if (!std::isfinite(v)) throw SolverError("crank_nicolson: non-finite field", 0.0);
        }
    }
    sol.leakage = initial_mass > 0.0 ? leaked / initial_mass : 0.0;
    sol.leakage_warning = sol.leakage > 0.01;
    return sol;
}

std::vector<double> moment_check(const FieldSolution& solution, int k) {
    if (k < 0 || k > 2) throw DomainError("moment_check: k must be 0, 1 or 2");
    const auto xs = solution.grid.nodes();
    std::vector<double> out;
    out.reserve(solution.frames.size());
    std::vector<double> f(xs.size());
    for (const auto& u : solution.frames) {
        for (std::size_t i = 0; i < xs.size(); ++i) f[i] = std::pow(xs[i], k) * u[i];
        out.push_back(trapezoid(solution.grid, f));
    }
    return out;
}

double mass_below(const FieldSolution& solution, double bound, std::size_t frame) {
    const auto& u = solution.frames.at(frame);
    const Grid1D& g = solution.grid;
    double s = 0.0;
    for (int i = 0; i + 1 < g.n; ++i) {
        const double a = g.node(i);
        if (a >= bound) break;
        const double b = std::min(g.node(i + 1), bound);
        s += 0.5 * (std::abs(u[i]) + std::abs(u[i + 1])) * (b - a);
    }
    return s;
}

std::vector<double> gaussian_datum(const Grid1D& grid, double xi, double sigma) {
    if (!(sigma > 0.0)) throw DomainError("gaussian_datum: sigma must be > 0");
    std::vector<double> u(grid.n);
    const double norm = 1.0 / (sigma * std::sqrt(2.0 * std::numbers::pi));
    for (int i = 0; i < grid.n; ++i) {
        const double z = (grid.node(i) - xi) / sigma;
        u[i] = norm * std::exp(-0.5 * z * z);
    }
    return u;
}

double default_sigma(double dx, double h) { return std::max(5.0 * dx, std::sqrt(h) / 20.0); }

Grid1D auto_grid(const HamiltonianModel& model, double x, double xi, double t, double h, double sigma, int n) {
    if (!(t > 0.0) || !(h > 0.0) || !(sigma > 0.0)) throw DomainError("auto_grid: t, h, sigma must be > 0");
    double lo = 0.0;
    double hi = 0.0;
    if (!model.fixes_origin()) {
        const double s = std::sqrt(sigma * sigma + 2.0 * h * t * model.diffusion(xi));
        lo = std::min(x, xi) - 6.0 * s;
        hi = std::max(x, xi) + 6.0 * s;
    } else {
        if (xi == 0.0) throw DomainError("auto_grid: source at the fixed origin needs an explicit grid");
        if (x * xi <= 0.0) throw DomainError("auto_grid: x and xi must lie on the same side of the origin");
        // In s = ln|x| the equation is close to a heat equation with rate h a(ξ)² and drift −h a(ξ)².
        const double c2 = std::pow(model.a(xi), 2);
        const double w = std::sqrt(2.0 * h * t * c2 + std::pow(sigma / xi, 2));
        const double ax = std::abs(x);
        const double axi = std::abs(xi);
        const double m_lo = std::min(ax, axi) * std::exp(-6.0 * w - h * t * c2);
        const double m_hi = std::max(ax, axi) * std::exp(6.0 * w);
        lo = xi > 0.0 ? m_lo : -m_hi;
        hi = xi > 0.0 ? m_hi : -m_lo;
    }
    const double dx = (hi - lo) / (n - 1);
    const double D = std::max(model.diffusion(xi), 1e-300);
    const double dt = std::min({dx, 0.25 * sigma * sigma / (h * D), t / 50.0});
    return Grid1D::make(lo, hi, n, dt, h);
}

ErrorReport compare_green(const HamiltonianModel& model, double x, double xi, double t, double h, double sigma,
                          int n) {
    if (!(t > 0.0) || !(h > 0.0)) throw DomainError("compare_green: t and h must be > 0");
    ErrorReport rep;
    rep.x = x;
    rep.xi = xi;
    rep.t = t;
    rep.h = h;

    const GreenValue g = beta_limit(model, x, xi, t, h);
    if (g.kind != GreenKind::density) {
        throw DomainError(std::string("compare_green: no density to compare (") + std::string(to_string(g.kind)) + ")");
    }
    rep.wkb_value = g.value;
    if (g.exponent / h > 40.0) {
        rep.underflow = true;
        rep.tag = "underflow regime";
        return rep;
    }

    if (!(sigma > 0.0)) {
        const Grid1D probe = auto_grid(model, x, xi, t, h, std::sqrt(h) / 20.0, n);
        sigma = default_sigma(probe.dx, h);
    }
    rep.sigma = sigma;
    rep.grid = auto_grid(model, x, xi, t, h, sigma, n);

    const FieldSolution sol = crank_nicolson(model, rep.grid, gaussian_datum(rep.grid, xi, sigma), t);
    rep.steps = sol.steps;
    rep.leakage = sol.leakage;
    rep.oracle_value = sol.sample(x, sol.frames.size() - 1);

    // The same Gaussian smoothing applied to the asymptotic kernel.
    const int m = 49;
    std::vector<double> eta(m), weight(m);
    for (int i = 0; i < m; ++i) {
        eta[i] = xi + sigma * (-6.0 + 12.0 * i / (m - 1));
        const double z = (eta[i] - xi) / sigma;
        weight[i] = std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * std::numbers::pi));
    }
    if (model.fixes_origin() && eta.front() * eta.back() <= 0.0) {
        throw DomainError("compare_green: sigma too wide for a source this close to the origin");
    }
    rep.wkb_smoothed = convolve(model, eta, weight, x, t, h, 1e-6);

    const double denom = std::abs(rep.oracle_value);
    rep.rel_error = std::abs(rep.oracle_value - rep.wkb_value) / denom;
    rep.rel_error_smoothed = std::abs(rep.oracle_value - rep.wkb_smoothed) / denom;
    if (model.spec().kind == HamiltonianKind::heat) {
        rep.exact_value = heat_exact(x, xi, t + sigma * sigma / (2.0 * h), h);
        rep.rel_error_exact = std::abs(rep.oracle_value - *rep.exact_value) / *rep.exact_value;
    }
    rep.tag = "ok";
    return rep;
}

void write_frames_csv(std::ostream& out, const FieldSolution& solution) {
    csv::header(out, {"t", "x", "u"});
    for (std::size_t f = 0; f < solution.frames.size(); ++f) {
        for (int i = 0; i < solution.grid.n; ++i) {
            csv::row(out, {solution.times[f], solution.grid.node(i), solution.frames[f][i]});
        }
    }
}

nlohmann::json to_json(const ErrorReport& r) {
    nlohmann::json j;
    j["inputs"] = {{"x", r.x}, {"xi", r.xi}, {"t", r.t}, {"h", r.h}, {"sigma", r.sigma}};
    j["wkb_value"] = r.wkb_value;
    j["wkb_smoothed"] = r.wkb_smoothed;
    j["oracle_value"] = r.oracle_value;
    j["rel_error"] = r.rel_error;
    j["rel_error_smoothed"] = r.rel_error_smoothed;
    j["exact_value"] = r.exact_value ? nlohmann::json(*r.exact_value) : nlohmann::json(nullptr);
    j["rel_error_exact"] = r.rel_error_exact ? nlohmann::json(*r.rel_error_exact) : nlohmann::json(nullptr);
    j["grid"] = {{"x_min", r.grid.x_min}, {"x_max", r.grid.x_max}, {"n", r.grid.n},
                 {"dx", r.grid.dx},       {"dt", r.grid.dt},         {"steps", r.steps}};
    j["leakage"] = r.leakage;
    j["tag"] = r.tag;
    return j;
}

}  // namespace wkbgreen
