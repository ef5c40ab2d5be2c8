#include "cli.hpp"

#include "wkbgreen/csv.hpp"
#include "wkbgreen/errors.hpp"
#include "wkbgreen/green.hpp"
#include "wkbgreen/oracle.hpp"
#include "wkbgreen/parallel.hpp"
#include "wkbgreen/phase.hpp"
#include "wkbgreen/smallt.hpp"
#include "wkbgreen/validation.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <functional>
#include <list>
#include <ostream>
#include <set>
#include <sstream>
#include <string>

namespace wkbgreen::cli {

namespace {

using json = nlohmann::json;

std::string flag_name(const std::string& key) {
    std::string f = "--" + key;
    for (auto& c : f) {
        if (c == '_') c = '-';
    }
    return f;
}

/// Options of one subcommand together with the keys they fill in the resolved config.
class Registry {
public:
    explicit Registry(CLI::App* app) : app_(app) {}

    void number(const std::string& key, const std::string& help) { bind(key, doubles_.emplace_back(), help); }
    void integer(const std::string& key, const std::string& help) { bind(key, ints_.emplace_back(), help); }
    void text(const std::string& key, const std::string& help) { bind(key, strings_.emplace_back(), help); }
    void list(const std::string& key, const std::string& help) {
        auto& slot = vectors_.emplace_back();
        CLI::Option* o = app_->add_option(flag_name(key), slot, help)->delimiter(',');
        keys_.insert(key);
        apply_.push_back([o, &slot, key](json& j) {
            if (o->count() > 0) j[key] = slot;
        });
    }
    void flag(const std::string& key, const std::string& help) {
        auto& slot = flags_.emplace_back(false);
        CLI::Option* o = app_->add_flag(flag_name(key), slot, help);
        keys_.insert(key);
        apply_.push_back([o, &slot, key](json& j) {
            if (o->count() > 0) j[key] = slot;
        });
    }
    void positional(const std::string& key, const std::string& help) {
        auto& slot = strings_.emplace_back();
        CLI::Option* o = app_->add_option(key, slot, help);
        keys_.insert(key);
        apply_.push_back([o, &slot, key](json& j) {
            if (o->count() > 0) j[key] = slot;
        });
    }

    void apply(json& config) const {
        for (const auto& f : apply_) f(config);
    }
    bool knows(const std::string& key) const { return keys_.count(key) > 0; }
    CLI::App* app() const { return app_; }

private:
    template <class T>
    void bind(const std::string& key, T& slot, const std::string& help) {
        CLI::Option* o = app_->add_option(flag_name(key), slot, help);
        keys_.insert(key);
        apply_.push_back([o, &slot, key](json& j) {
            if (o->count() > 0) j[key] = slot;
        });
    }

    CLI::App* app_;
    std::list<double> doubles_;
    std::list<long long> ints_;
    std::list<std::string> strings_;
    std::list<std::vector<double>> vectors_;
    std::list<bool> flags_;
    std::set<std::string> keys_;
    std::vector<std::function<void(json&)>> apply_;
};

void add_common(Registry& r) {
    r.text("config", "JSON config file; command-line flags override its values");
    r.text("hamiltonian", "heat | degenerate | general");
    r.list("a_poly", "coefficients of a(x) = a0 + a1 x + ..., comma separated (general)");
    r.text("domain_sign", "positive | negative | both (general)");
    r.text("format", "csv | json");
    r.text("output", "write results to this file instead of stdout");
}

/// Error raised when a required value is absent; the usage text of the subcommand follows it.
struct MissingValue : ConfigError {
    using ConfigError::ConfigError;
};

double number(const json& c, const std::string& key) {
    if (!c.contains(key) || c[key].is_null()) throw MissingValue("missing " + flag_name(key));
    if (!c[key].is_number()) throw ConfigError(flag_name(key) + " must be a number");
    const double v = c[key].get<double>();
    if (!std::isfinite(v)) throw ConfigError(flag_name(key) + " must be finite");
    return v;
}

int integer(const json& c, const std::string& key) {
    const double v = number(c, key);
    if (v != std::floor(v)) throw ConfigError(flag_name(key) + " must be an integer");
    return static_cast<int>(v);
}

std::string text(const json& c, const std::string& key) {
    if (!c.contains(key) || !c[key].is_string()) throw MissingValue("missing " + flag_name(key));
    return c[key].get<std::string>();
}

bool has(const json& c, const std::string& key) { return c.contains(key) && !c[key].is_null(); }

/// Defaults, then the config file, then explicit flags. The Hamiltonian ends up
/// as a full object under "hamiltonian".
json resolve(const Registry& reg, json defaults) {
    json c = std::move(defaults);
    json flags = json::object();
    reg.apply(flags);
    const std::string path = flags.contains("config") ? flags["config"].get<std::string>() : "";
    if (!path.empty()) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot read config file '" + path + "'");
        json file;
        try {
            file = json::parse(in);
        } catch (const json::exception& e) {
            throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
        }
        if (!file.is_object()) throw ConfigError("config file must hold a JSON object");
        for (auto it = file.begin(); it != file.end(); ++it) {
            if (!reg.knows(it.key())) throw ConfigError("unknown config key '" + it.key() + "'");
            c[it.key()] = it.value();
        }
    }
    for (auto it = flags.begin(); it != flags.end(); ++it) {
        if (it.key() == "hamiltonian" && c.contains("hamiltonian") && c["hamiltonian"].is_object()) {
            c["hamiltonian"]["kind"] = it.value();
        } else {
            c[it.key()] = it.value();
        }
    }
    c.erase("config");

    json h = c.contains("hamiltonian") ? c["hamiltonian"] : json("heat");
    if (h.is_string()) h = json{{"kind", h}};
    if (c.contains("a_poly")) h["a_poly"] = c["a_poly"];
    if (c.contains("domain_sign")) h["domain_sign"] = c["domain_sign"];
    c.erase("a_poly");
    c.erase("domain_sign");
    c["hamiltonian"] = to_json(HamiltonianModel(spec_from_json(h)).spec());
    return c;
}

HamiltonianModel model_of(const json& c) { return HamiltonianModel(spec_from_json(c["hamiltonian"])); }

/// Writes to --output when given, otherwise to `out`.
template <class F>
void emit(const json& c, std::ostream& out, F&& write) {
    if (has(c, "output")) {
        std::ofstream file(text(c, "output"));
        if (!file) throw ConfigError("cannot write '" + text(c, "output") + "'");
        write(file);
    } else {
        write(out);
    }
}

std::string format_of(const json& c) {
    const std::string f = text(c, "format");
    if (f != "csv" && f != "json") throw ConfigError("--format must be csv or json");
    return f;
}

json green_json(const GreenValue& g, double x, double xi, double t) {
    return {{"x", x},
            {"xi", xi},
            {"t", t},
            {"h", g.h},
            {"beta", g.beta},
            {"kind", std::string(to_string(g.kind))},
            {"value", g.value},
            {"log_value", g.log_value()},
            {"exponent", g.exponent},
            {"amplitude", g.amplitude},
            {"J", g.J},
            {"J0", g.J0},
            {"x0", g.x0},
            {"y_hat", g.y_hat},
            {"converged", g.converged},
            {"mass_factor", g.mass_factor}};
}

int cmd_green(const json& c, std::ostream& out) {
    const auto model = model_of(c);
    const double xi = number(c, "xi");
    const double t = number(c, "t");
    const double h = number(c, "h");
    if (!(t > 0.0)) throw ConfigError("--t must be > 0");
    if (!(h > 0.0)) throw ConfigError("--h must be > 0");
    const bool fixed_beta = has(c, "beta");
    if (fixed_beta && c.value("beta_limit", false)) throw ConfigError("--beta and --beta-limit are exclusive");

    std::vector<double> xs;
    if (has(c, "x")) {
        xs.push_back(number(c, "x"));
    } else if (has(c, "x_min") || has(c, "x_max")) {
        const double lo = number(c, "x_min");
        const double hi = number(c, "x_max");
        const int n = integer(c, "n");
        if (n < 1 || !(hi >= lo)) throw ConfigError("grid needs n >= 1 and x_max >= x_min");
        for (int i = 0; i < n; ++i) xs.push_back(n == 1 ? lo : lo + (hi - lo) * i / (n - 1));
    } else {
        throw MissingValue("missing --x (or --x-min/--x-max)");
    }

    const double beta = fixed_beta ? number(c, "beta") : 1.0;
    const auto values = parallel_map(xs.size(), [&](std::size_t i) {
        return fixed_beta ? assemble(model, xs[i], xi, t, h, beta) : beta_limit(model, xs[i], xi, t, h);
    });

    emit(c, out, [&](std::ostream& o) {
        if (format_of(c) == "json") {
            json rows = json::array();
            for (std::size_t i = 0; i < xs.size(); ++i) rows.push_back(green_json(values[i], xs[i], xi, t));
            o << json{{"config", c}, {"note", std::string(GreenValue::truncation_note)}, {"rows", rows}}.dump(2)
              << '\n';
            return;
        }
        csv::header(o, {"x", "xi", "t", "h", "beta_or_limit", "kind", "exponent", "amplitude", "value", "log_value",
                        "J", "J0", "x0", "y_hat", "converged", "mass_factor"});
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const GreenValue& g = values[i];
            o << csv::number(xs[i]) << ',' << csv::number(xi) << ',' << csv::number(t) << ',' << csv::number(h)
              << ',' << (g.is_limit ? std::string("limit") : csv::number(g.beta)) << ',' << to_string(g.kind) << ','
              << csv::number(g.exponent) << ',' << csv::number(g.amplitude) << ',' << csv::number(g.value) << ','
              << csv::number(g.log_value()) << ',' << csv::number(g.J) << ',' << csv::number(g.J0) << ','
              << csv::number(g.x0) << ',' << csv::number(g.y_hat) << ',' << (g.converged ? "true" : "false") << ','
              << csv::number(g.mass_factor) << '\n';
        }
    });
    return ok;
}

int cmd_manifold(const json& c, std::ostream& out) {
    const auto model = model_of(c);
    const ManifoldSection sec =
        manifold_section(model, number(c, "xi"), number(c, "y"), number(c, "beta"), number(c, "t"),
                         number(c, "x0_min"), number(c, "x0_max"), integer(c, "n"), integer(c, "steps"));
    if (has(c, "caustics")) {
        std::ofstream file(text(c, "caustics"));
        if (!file) throw ConfigError("cannot write '" + text(c, "caustics") + "'");
        file << json{{"config", c}, {"caustics", caustics_json(sec)}}.dump(2) << '\n';
    }
    emit(c, out, [&](std::ostream& o) {
        if (format_of(c) == "json") {
            json samples = json::array();
            for (const auto& s : sec.samples) {
                samples.push_back({{"x0", s.x0}, {"x", s.x}, {"p_x", s.p_x}, {"J0", s.J0_yconst}});
            }
            o << json{{"config", c}, {"caustics", caustics_json(sec)}, {"samples", samples}}.dump(2) << '\n';
        } else {
            write_csv(o, sec);
        }
    });
    return ok;
}

int cmd_smallt(const json& c, std::ostream& out) {
    const auto model = model_of(c);
    const double x = number(c, "x");
    const double xi = number(c, "xi");
    const double t = number(c, "t");
    if (!(t > 0.0)) throw ConfigError("--t must be > 0");
    SmallTimeOptions opts;
    opts.steps = integer(c, "steps");
    const SmallTimeSeries s = bvp_series(model, x, xi, t, 1.0, integer(c, "order"), opts);
    emit(c, out, [&](std::ostream& o) {
        if (format_of(c) == "json") {
            o << json{{"config", c},       {"S", s.exponent()}, {"S0", s.S0},
                      {"S1", s.S1},        {"P0", s.P0},        {"conserved", s.conserved},
                      {"nu", s.nu},        {"t_prime", s.t_prime}}
                     .dump(2)
              << '\n';
        } else {
            csv::header(o, {"x", "xi", "t", "S_leading", "S0", "S1", "P0", "S", "order"});
            csv::row(o, {x, xi, t, s.S0 / s.nu, s.S0, s.S1, s.P0, s.exponent(), static_cast<double>(s.order)});
        }
    });
    return ok;
}

int cmd_oracle(const json& c, std::ostream& out) {
    const auto model = model_of(c);
    const double t = number(c, "t");
    const double h = number(c, "h");
    const int n = integer(c, "n");
    if (!has(c, "moment")) {
        const ErrorReport rep = compare_green(model, number(c, "x"), number(c, "xi"), t, h,
                                              has(c, "sigma") ? number(c, "sigma") : 0.0, n);
        emit(c, out, [&](std::ostream& o) {
            json j = to_json(rep);
            j["config"] = c;
            o << j.dump(2) << '\n';
        });
        return ok;
    }

    const int k = integer(c, "moment");
    const double xi = has(c, "xi") ? number(c, "xi") : 1.0;
    const double sigma = has(c, "sigma") ? number(c, "sigma") : 0.05;
    const Grid1D grid = auto_grid(model, xi, xi, t, h, sigma, n);
    const FieldSolution sol = crank_nicolson(model, grid, gaussian_datum(grid, xi, sigma), t, integer(c, "frame_count"));
    const auto m = moment_check(sol, k);
    if (has(c, "frames")) {
        std::ofstream file(text(c, "frames"));
        if (!file) throw ConfigError("cannot write '" + text(c, "frames") + "'");
        write_frames_csv(file, sol);
    }
    json j{{"config", c},     {"times", sol.times}, {"moments", m},
           {"ratio", m.back() / m.front()},         {"leakage", sol.leakage},
           {"grid", {{"x_min", grid.x_min}, {"x_max", grid.x_max}, {"n", grid.n}, {"dx", grid.dx}, {"dt", sol.dt}}}};
    if (k == 2 && model.spec().kind == HamiltonianKind::degenerate) {
        j["expected_ratio"] = std::exp(12.0 * h * t);
    } else if (k == 2 && model.spec().kind == HamiltonianKind::heat) {
        const auto m0 = moment_check(sol, 0);
        j["expected_ratio"] = (m.front() + 2.0 * h * t * m0.front()) / m.front();
    }
    if (j.contains("expected_ratio")) {
        j["rel_error"] = std::abs(j["ratio"].get<double>() / j["expected_ratio"].get<double>() - 1.0);
    }
    emit(c, out, [&](std::ostream& o) { o << j.dump(2) << '\n'; });
    return ok;
}

int cmd_validate(const json& c, std::ostream& out, std::ostream& err) {
    const std::string suite = text(c, "suite");
    const double seed_value = number(c, "seed");
    if (seed_value < 0 || seed_value != std::floor(seed_value)) throw ConfigError("--seed must be a non-negative integer");
    const auto seed = static_cast<std::uint64_t>(seed_value);
    const auto results = run_suite(suite, seed);
    json summary = summary_json(suite, seed, results);
    summary["config"] = c;
    emit(c, out, [&](std::ostream& o) { o << summary.dump(2) << '\n'; });
    bool all = true;
    for (const auto& r : results) {
        if (!r.passed) {
            all = false;
            err << "criterion " << r.id << " failed: " << r.title << ": " << r.summary << '\n';
        }
    }
    return all ? ok : criterion_failed;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Small-h asymptotics of Green's functions for degenerate parabolic equations"};
    app.require_subcommand(1);
    // -h is taken by the semiclassical parameter --h.
    app.set_help_flag("--help", "print this help message and exit");
    app.set_help_all_flag("--help-all", "print help for all subcommands and exit");

    auto* green = app.add_subcommand("green", "leading-order Green's function at a point or on a grid");
    Registry rg(green);
    add_common(rg);
    for (auto k : {"x", "xi", "t", "h", "beta", "x_min", "x_max"}) rg.number(k, std::string("value of ") + k);
    rg.integer("n", "grid points between --x-min and --x-max");
    rg.flag("beta_limit", "extrapolate beta -> 1 (default when --beta is absent)");

    auto* manifold = app.add_subcommand("manifold", "y = const section of the Lagrangian manifold and its caustics");
    Registry rm(manifold);
    add_common(rm);
    for (auto k : {"xi", "y", "beta", "t", "x0_min", "x0_max"}) rm.number(k, std::string("value of ") + k);
    rm.integer("n", "samples in x0");
    rm.integer("steps", "RK4 steps per trajectory");
    rm.text("caustics", "write the caustics JSON to this file");

    auto* smallt = app.add_subcommand("smallt", "small-time expansion of the exponent");
    Registry rs(smallt);
    add_common(rs);
    for (auto k : {"x", "xi", "t"}) rs.number(k, std::string("value of ") + k);
    rs.integer("order", "0 or 1");
    rs.integer("steps", "RK4 steps of the shooting problem");

    auto* oracle = app.add_subcommand("oracle", "Crank-Nicolson comparison or moment law");
    Registry ro(oracle);
    add_common(ro);
    for (auto k : {"x", "xi", "t", "h", "sigma"}) ro.number(k, std::string("value of ") + k);
    ro.integer("n", "grid points");
    ro.integer("moment", "report m_k(t) = integral of x^k u for k = 0, 1, 2");
    ro.integer("frame_count", "stored frames (moment mode)");
    ro.text("frames", "write the frames as CSV (t, x, u) to this file");

    auto* validate = app.add_subcommand("validate", "run acceptance suites and print a JSON summary");
    Registry rv(validate);
    rv.text("config", "JSON config file; command-line flags override its values");
    rv.text("output", "write the summary to this file instead of stdout");
    rv.positional("suite", "heat | degenerate | smallt | oracle | all");
    rv.integer("seed", "seed of the randomized property sweep");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        app.exit(e, out, err);
        return ok;
    } catch (const CLI::CallForAllHelp& e) {
        app.exit(e, out, err);
        return ok;
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return config_error;
    }

    CLI::App* sub = app.get_subcommands().front();
    try {
        if (sub == green) {
            return cmd_green(resolve(rg, {{"hamiltonian", "heat"}, {"xi", 0.0}, {"n", 101}, {"format", "csv"}}),
                             out);
        }
        if (sub == manifold) {
            return cmd_manifold(resolve(rm,
                                        {{"hamiltonian", "degenerate"},
                                         {"y", 0.0},
                                         {"beta", 1.0},
                                         {"x0_min", -2.0},
                                         {"x0_max", 2.0},
                                         {"n", 401},
                                         {"steps", 1024},
                                         {"format", "csv"}}),
                                out);
        }
        if (sub == smallt) {
            return cmd_smallt(
                resolve(rs, {{"hamiltonian", "degenerate"}, {"order", 1}, {"steps", 2000}, {"format", "json"}}),
                out);
        }
        if (sub == oracle) {
            return cmd_oracle(
                resolve(ro, {{"hamiltonian", "degenerate"}, {"n", 4001}, {"frame_count", 11}, {"format", "json"}}),
                out);
        }
        json c = resolve(rv, {{"suite", "all"}, {"seed", default_seed}});
        c.erase("hamiltonian");
        return cmd_validate(c, out, err);
    } catch (const MissingValue& e) {
        err << "error: " << e.what() << "\n\n" << sub->help();
        return config_error;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return config_error;
    } catch (const nlohmann::json::exception& e) {
        err << "config error: " << e.what() << '\n';
        return config_error;
    } catch (const DomainError& e) {
        err << "invalid input: " << e.what() << '\n';
        return config_error;
    } catch (const Error& e) {
        err << "solver error: " << e.what() << '\n';
        return solver_error;
    }
}

}  // namespace wkbgreen::cli
