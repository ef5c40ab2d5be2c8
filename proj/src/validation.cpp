#include "wkbgreen/validation.hpp"

#include "wkbgreen/characteristics.hpp"
#include "wkbgreen/errors.hpp"
#include "wkbgreen/green.hpp"
#include "wkbgreen/oracle.hpp"
#include "wkbgreen/phase.hpp"
#include "wkbgreen/smallt.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <random>
#include <sstream>

namespace wkbgreen {

namespace {

using json = nlohmann::json;

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

std::string fmt(double v) {
    std::ostringstream s;
    s.precision(3);
    s << v;
    return s.str();
}

/// Least-squares slope of log|d| against log t.
double loglog_slope(const std::vector<double>& t, const std::vector<double>& d) {
    const std::size_t n = t.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double lx = std::log(t[i]);
        const double ly = std::log(std::max(std::abs(d[i]), 1e-300));
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

CriterionResult heat_exactness() {
    CriterionResult r{1, "heat-kernel exactness of the beta limit", false, 0.0, "", json::array()};
    const auto model = make_heat();
    const auto start = std::chrono::steady_clock::now();
    double worst = 0.0;
    for (double d : {0.0, 0.5, 1.0, 2.0}) {
        for (double t : {0.1, 0.5, 1.0}) {
            for (double h : {1.0, 0.1, 0.01}) {
                const GreenValue g = beta_limit(model, d, 0.0, t, h);
                // Compared in log space: at (2, 0.1, 0.01) both values underflow.
                const double err = std::abs(std::expm1(g.log_value() - heat_exact_log(d, 0.0, t, h)));
                worst = std::max(worst, err);
                r.details.push_back({{"dx", d}, {"t", t}, {"h", h}, {"rel_error", err}, {"converged", g.converged}});
            }
        }
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    r.passed = worst <= 1e-6 && secs < 5.0;
    r.summary = "max rel error " + fmt(worst) + " (tol 1e-6), runtime " + fmt(secs) + " s (limit 5 s)";
    return r;
}

CriterionResult heat_intermediates() {
    CriterionResult r{2, "heat phase, amplitude and extended Jacobian", false, 0.0, "", json::object()};
    const auto model = make_heat();
    double worst_phi = 0.0, worst_amp = 0.0, worst_J = 0.0;
    for (double t : {0.1, 0.5, 1.0}) {
        for (double xi : {-0.5, 0.0, 1.0}) {
            for (double x : {-1.0, 0.3, 2.0}) {
                for (double y : {-0.7, 0.0, 0.4}) {
                    const PhaseEvaluation p = phase_field(model, x, xi, y, 1.0, t);
                    const double m = x - xi - y;
                    worst_phi = std::max(worst_phi, std::abs(p.phi - m * m / (2.0 * (1.0 + 2.0 * t))));
                    const double amp = std::exp(0.5 * p.mixed) / std::sqrt(p.J0);
                    worst_amp = std::max(worst_amp, std::abs(amp - 1.0 / std::sqrt(1.0 + 2.0 * t)));
                }
                for (double beta : {0.1, 0.5, 0.9, 0.99}) {
                    const BoundarySolution s = solve_boundary(model, x, xi, beta, t);
                    worst_J = std::max(worst_J, std::abs(s.J - (1.0 - beta + 2.0 * beta * t)));
                }
            }
        }
    }
    r.passed = worst_phi <= 1e-10 && worst_amp <= 1e-10 && worst_J <= 1e-10;
    r.details = {{"phi_error", worst_phi}, {"phi0_error", worst_amp}, {"J_error", worst_J}};
    r.summary = "max abs error phi " + fmt(worst_phi) + ", phi0 " + fmt(worst_amp) + ", J " + fmt(worst_J) +
                " (tol 1e-10)";
    return r;
}

CriterionResult degenerate_characteristics() {
    CriterionResult r{3, "degenerate characteristics, Jacobians and caustics", false, 0.0, "", json::object()};
    const auto model = make_degenerate();
    double worst_flow = 0.0, worst_jac = 0.0, worst_jac_y = 0.0;
    int checked_diagonal = 0, skipped_diagonal = 0;
    const double grid[] = {-2.0, -1.0, -0.3, 0.0, 0.4, 1.0, 2.0};
    for (double x0 : grid) {
        for (double xi : grid) {
            for (double t : {0.1, 0.5, 1.0}) {
                for (double beta : {0.3, 0.9}) {
                    const double y = 0.25;
                    const auto traj = flow_converged(model, x0, xi, y, beta, t, 256, 1e-11, 10, 1 << 20);
                    const auto& s = traj.final_state();
                    const PhasePoint c = closed_degenerate(x0, xi, y, beta, t);
                    worst_flow = std::max({worst_flow, std::abs(s.x - c.x) / std::max(std::abs(c.x), 1e-12),
                                           std::abs(s.p_x - c.p) / std::max(std::abs(c.p), 1e-12)});
                    const double jy = jacobian_degenerate_yconst(x0, xi, y, beta, t);
                    if (std::abs(jy) > 1e-12) worst_jac_y = std::max(worst_jac_y, rel(s.V[0][0], jy));

                    // Along the diagonal y = −β(x0 − ξ)/(1 − β): dx/dx0 = J/(1 − β).
                    const double yd = -beta * (x0 - xi) / (1.0 - beta);
                    // x = x0 e^{2ct} with c = x0 p0; past |x| ~ 1e9 the flow would stop as a blow-up.
                    if (std::abs(2.0 * t * x0 * beta * (x0 - xi - yd)) > 20.0) {
                        ++skipped_diagonal;
                        continue;
                    }
                    ++checked_diagonal;
                    const auto td = flow_converged(model, x0, xi, yd, beta, t, 256, 1e-11, 10, 1 << 20);
                    const auto& sd = td.final_state();
                    const double J = sd.V[0][0] * (1.0 - beta) - beta * sd.V[0][1];
                    const double expect = jacobian_degenerate(x0, xi, beta, t);
                    if (std::abs(expect) > 1e-12) worst_jac = std::max(worst_jac, rel(J / (1.0 - beta), expect));
                }
            }
        }
    }
    const ManifoldSection sec = manifold_section(model, 3.0, 0.0, 1.0, 2.0 / 3.0, 0.0, 1.5, 301);
    const double r1 = (3.0 - std::sqrt(3.0)) / 4.0;
    const double r2 = (3.0 + std::sqrt(3.0)) / 4.0;
    double caustic_err = 1.0;
    if (sec.caustics.size() == 2) {
        caustic_err = std::max(std::abs(sec.caustics[0] - r1), std::abs(sec.caustics[1] - r2));
    }
    r.passed = worst_flow <= 1e-7 && worst_jac <= 1e-6 && worst_jac_y <= 1e-6 && caustic_err <= 1e-8;
    r.details = {{"flow_rel_error", worst_flow},
                 {"jacobian_diagonal_rel_error", worst_jac},
                 {"jacobian_yconst_rel_error", worst_jac_y},
                 {"diagonal_points", checked_diagonal},
                 {"diagonal_points_beyond_overflow", skipped_diagonal},
                 {"caustics", sec.caustics},
                 {"caustic_error", caustic_err}};
    r.summary = "flow " + fmt(worst_flow) + " (1e-7), JAC " + fmt(worst_jac) + " / y-const " + fmt(worst_jac_y) +
                " (1e-6), caustic roots " + fmt(caustic_err) + " (1e-8)";
    return r;
}

CriterionResult beta_lemma() {
    CriterionResult r{4, "beta-limit lemma: mass of the origin kernel", false, 0.0, "", json::array()};
    const double h = 0.1, t = 0.5;
    double worst = 0.0;
    std::vector<double> eps, mass;
    for (double beta : {0.9, 0.99, 0.999}) {
        const double w = std::sqrt((1.0 - beta) * h / beta);
        auto f = [&](double xi) { return gbeta_at_origin(xi, t, h, beta); };
        double err_est = 0.0;
        const double I =
            boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, -14.0 * w, 14.0 * w, 15, 1e-14, &err_est);
        const double e = std::abs(I - 1.0 / std::sqrt(beta));
        worst = std::max(worst, e);
        eps.push_back(1.0 - beta);
        mass.push_back(I);
        r.details.push_back({{"beta", beta}, {"integral", I}, {"expected", 1.0 / std::sqrt(beta)}, {"error", e}});
    }
    const double limit = extrapolate_to_zero(eps, mass);
    const bool approaching = std::abs(mass[2] - 1.0) < std::abs(mass[1] - 1.0) &&
                             std::abs(mass[1] - 1.0) < std::abs(mass[0] - 1.0);
    r.passed = worst <= 1e-6 && approaching && std::abs(limit - 1.0) <= 1e-5;
    r.summary = "max error " + fmt(worst) + " (tol 1e-6), extrapolated limit " + fmt(limit);
    return r;
}

CriterionResult small_time() {
    CriterionResult r{5, "small-t consistency of the exponent", false, 0.0, "", json::object()};
    const auto model = make_degenerate();
    const double xi = 1.0;
    const std::vector<double> ts = {0.1, 0.05, 0.025, 0.0125};
    double min_slope = 1e300, worst_shoot = 0.0;
    json rows = json::array();
    for (double x : {0.9, 1.1, 1.25}) {
        std::vector<double> diffs;
        for (double t : ts) {
            const GreenValue g = beta_limit(model, x, xi, t, 0.1);
            const double s1 = s_small_t(model, x, xi, t, 1);
            diffs.push_back(g.exponent - s1);
            const double closed = std::pow(std::log(x / xi), 2) / (4.0 * t);
            worst_shoot = std::max(worst_shoot, rel(s_small_t(model, x, xi, t, 0), closed));
        }
        const double slope = loglog_slope(ts, diffs);
        min_slope = std::min(min_slope, slope);
        rows.push_back({{"x", x}, {"t", ts}, {"difference", diffs}, {"slope", slope}});
    }
    r.passed = min_slope >= 1.9 && worst_shoot <= 1e-8;
    r.details = {{"series", rows}, {"min_slope", min_slope}, {"shooting_rel_error", worst_shoot}};
    r.summary = "min log-log slope " + fmt(min_slope) + " (need >= 1.9), order-0 shooting error " +
                fmt(worst_shoot) + " (1e-8)";
    return r;
}

CriterionResult oracle_agreement() {
    CriterionResult r{6, "agreement with Crank-Nicolson", false, 0.0, "", json::object()};
    const auto start = std::chrono::steady_clock::now();
    const ErrorReport heat = compare_green(make_heat(), 0.5, 0.0, 0.5, 0.1, 0.01, 4001);
    const auto deg = make_degenerate();
    std::vector<double> devs;
    json rows = json::array();
    for (double h : {0.1, 0.05, 0.025}) {
        const ErrorReport rep = compare_green(deg, 1.2, 1.0, 0.2, h, 0.0, 4001);
        devs.push_back(rep.deviation());
        rows.push_back(to_json(rep));
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool monotone = devs[0] > devs[1] && devs[1] > devs[2];
    r.passed = heat.deviation() <= 0.02 && monotone && secs < 60.0;
    r.details = {{"heat", to_json(heat)}, {"degenerate", rows}, {"seconds", secs}};
    r.summary = "heat deviation " + fmt(heat.deviation()) + " (2%), degenerate h=0.1,0.05,0.025: " + fmt(devs[0]) +
                ", " + fmt(devs[1]) + ", " + fmt(devs[2]) + ", runtime " + fmt(secs) + " s";
    return r;
}

CriterionResult moment_law() {
    CriterionResult r{7, "second-moment law and support confinement", false, 0.0, "", json::object()};
    const auto model = make_degenerate();
    double worst = 0.0;
    json rows = json::array();
    for (auto [h, t] : {std::pair{0.05, 0.5}, std::pair{0.1, 1.0}, std::pair{0.2, 0.5}, std::pair{0.02, 2.0}}) {
        const double sigma = 0.05;
        const Grid1D grid = auto_grid(model, 1.0, 1.0, t, h, sigma, 4001);
        const FieldSolution sol = crank_nicolson(model, grid, gaussian_datum(grid, 1.0, sigma), t);
        const auto m2 = moment_check(sol, 2);
        const double ratio = m2.back() / m2.front();
        const double e = rel(ratio, std::exp(12.0 * h * t));
        worst = std::max(worst, e);
        rows.push_back({{"h", h}, {"t", t}, {"ratio", ratio}, {"expected", std::exp(12.0 * h * t)}, {"rel_error", e}});
    }

    // Smooth bump supported in [0.5, 1.5]; characteristics keep it away from the origin.
    const double h = 0.02, t = 0.25, c = 1.0;
    const Grid1D grid = Grid1D::make(0.0, 3.0, 4001, 3.0 / 4000, h);
    std::vector<double> u0(grid.n, 0.0);
    for (int i = 0; i < grid.n; ++i) {
        const double z = (grid.node(i) - 1.0) / 0.5;
        if (std::abs(z) < 1.0) u0[i] = std::pow(1.0 - z * z, 4);
    }
    double mass0 = 0.0;
    for (double v : u0) mass0 += v * grid.dx;
    for (double& v : u0) v /= mass0;
    const FieldSolution sol = crank_nicolson(model, grid, u0, t, 11);
    double worst_mass = 0.0;
    for (std::size_t f = 0; f < sol.frames.size(); ++f) {
        worst_mass = std::max(worst_mass, mass_below(sol, 0.25 * std::exp(-c * sol.times[f]), f));
    }
    r.passed = worst <= 0.01 && worst_mass < 1e-8;
    r.details = {{"moments", rows}, {"excluded_mass", worst_mass}, {"h", h}, {"t", t}, {"c", c}};
    r.summary = "max moment-ratio error " + fmt(worst) + " (1%), excluded-region mass " + fmt(worst_mass) + " (1e-8)";
    return r;
}

CriterionResult property_suites(std::uint64_t seed) {
    CriterionResult r{8, "positivity and assembly path consistency", false, 0.0, "", json::object()};
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const auto heat = make_heat();
    const auto deg = make_degenerate();

    int samples = 0, negative = 0, skipped = 0;
    double min_E = 1e300;
    while (samples < 1000) {
        const bool use_heat = samples % 2 == 0;
        const double beta = 0.05 + 0.94 * unit(rng);
        const double t = 0.02 + 0.98 * unit(rng);
        double x, xi;
        if (use_heat) {
            x = -3.0 + 6.0 * unit(rng);
            xi = -3.0 + 6.0 * unit(rng);
        } else {
            const double sign = unit(rng) < 0.5 ? -1.0 : 1.0;
            x = sign * (0.2 + 2.8 * unit(rng));
            xi = sign * (0.2 + 2.8 * unit(rng));
        }
        try {
            const GreenValue g = assemble(use_heat ? heat : deg, x, xi, t, 0.1, beta);
            min_E = std::min(min_E, g.exponent);
            if (g.exponent < 0.0) ++negative;
            ++samples;
        } catch (const FoldError&) {
            ++skipped;
        } catch (const SolverError&) {
            ++skipped;
        }
    }

    double worst_path = 0.0;
    int paths = 0;
    for (int k = 0; k < 40; ++k) {
        const bool use_heat = k % 2 == 0;
        const double beta = 0.2 + 0.79 * unit(rng);
        const double t = 0.05 + 0.45 * unit(rng);
        const double x = use_heat ? -2.0 + 4.0 * unit(rng) : 0.4 + 1.6 * unit(rng);
        const double xi = use_heat ? -2.0 + 4.0 * unit(rng) : 0.4 + 1.6 * unit(rng);
        const auto& m = use_heat ? heat : deg;
        const GreenValue a = assemble(m, x, xi, t, 0.1, beta, AssemblyPath::extended_jacobian);
        const GreenValue b = assemble(m, x, xi, t, 0.1, beta, AssemblyPath::phase_hessian);
        worst_path = std::max(worst_path, std::abs(std::expm1(a.log_value() - b.log_value())));
        ++paths;
    }
    r.passed = negative == 0 && worst_path <= 1e-6;
    r.details = {{"seed", seed},       {"samples", samples},         {"skipped", skipped}, {"negative", negative},
                 {"min_exponent", min_E}, {"path_pairs", paths}, {"path_rel_error", worst_path}};
    r.summary = std::to_string(samples) + " samples, " + std::to_string(negative) + " with E < 0 (min E " +
                fmt(min_E) + "), path mismatch " + fmt(worst_path) + " (1e-6)";
    return r;
}

}  // namespace

CriterionResult run_criterion(int id, std::uint64_t seed) {
    static const std::function<CriterionResult(std::uint64_t)> table[] = {
        [](std::uint64_t) { return heat_exactness(); },
        [](std::uint64_t) { return heat_intermediates(); },
        [](std::uint64_t) { return degenerate_characteristics(); },
        [](std::uint64_t) { return beta_lemma(); },
        [](std::uint64_t) { return small_time(); },
        [](std::uint64_t) { return oracle_agreement(); },
        [](std::uint64_t) { return moment_law(); },
        [](std::uint64_t s) { return property_suites(s); },
    };
    if (id < 1 || id > criterion_count) throw ConfigError("unknown criterion " + std::to_string(id));
    const auto start = std::chrono::steady_clock::now();
    CriterionResult r;
    try {
        r = table[id - 1](seed);
    } catch (const Error& e) {
        r.id = id;
        r.passed = false;
        r.summary = std::string("error: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
}

std::vector<int> suite_members(std::string_view suite) {
    if (suite == "heat") return {1, 2};
    if (suite == "degenerate") return {3, 4, 8};
    if (suite == "smallt") return {5};
    if (suite == "oracle") return {6, 7};
    if (suite == "all") return {1, 2, 3, 4, 5, 6, 7, 8};
    throw ConfigError("unknown suite '" + std::string(suite) + "' (heat, degenerate, smallt, oracle, all)");
}

std::vector<CriterionResult> run_suite(std::string_view suite, std::uint64_t seed) {
    std::vector<CriterionResult> out;
    for (int id : suite_members(suite)) out.push_back(run_criterion(id, seed));
    return out;
}

nlohmann::json summary_json(std::string_view suite, std::uint64_t seed, const std::vector<CriterionResult>& results) {
    json j;
    j["suite"] = suite;
    j["seed"] = seed;
    json list = json::array();
    bool all = true;
    for (const auto& r : results) {
        all = all && r.passed;
        list.push_back({{"id", r.id},
                        {"title", r.title},
                        {"passed", r.passed},
                        {"seconds", r.seconds},
                        {"summary", r.summary},
                        {"details", r.details}});
    }
    j["passed"] = all;
    j["criteria"] = list;
    return j;
}

}  // namespace wkbgreen
