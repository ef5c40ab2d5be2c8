#include "wkbgreen/hamiltonian.hpp"

#include "wkbgreen/errors.hpp"

#include <cmath>
#include <sstream>

namespace wkbgreen {

std::string_view to_string(HamiltonianKind kind) {
    switch (kind) {
        case HamiltonianKind::heat: return "heat";
        case HamiltonianKind::degenerate: return "degenerate";
        case HamiltonianKind::general: return "general";
    }
    return "unknown";
}

std::string_view to_string(DomainSign sign) {
    switch (sign) {
        case DomainSign::positive: return "positive";
        case DomainSign::negative: return "negative";
        case DomainSign::both: return "both";
    }
    return "unknown";
}

// ─── Polynomial ──────────────────────────────────────────────────────────────

Polynomial::Polynomial(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) {}

Polynomial::Eval Polynomial::evaluate(double x) const {
    double v = 0.0, d1 = 0.0, d2 = 0.0;
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) {
        d2 = d2 * x + 2.0 * d1;
        d1 = d1 * x + v;
        v = v * x + *it;
    }
    return {v, d1, d2};
}

Polynomial Polynomial::shifted_up() const {
    std::vector<double> c;
    c.reserve(coeffs_.size() + 1);
    c.push_back(0.0);
    c.insert(c.end(), coeffs_.begin(), coeffs_.end());
    return Polynomial(std::move(c));
}

// ─── HamiltonianModel ────────────────────────────────────────────────────────

namespace {

// Samples a on [lo, hi]; true when it keeps a strict sign.
bool nonvanishing_on(const Polynomial& a, double lo, double hi) {
    constexpr int samples = 4001;
    const double first = a(lo);
    for (int i = 0; i < samples; ++i) {
        const double x = lo + (hi - lo) * i / (samples - 1);
        const double v = a(x);
        if (!std::isfinite(v) || std::abs(v) < 1e-12 || (v > 0) != (first > 0)) return false;
    }
    return true;
}

}  // namespace

HamiltonianModel::HamiltonianModel(HamiltonianSpec spec) : spec_(std::move(spec)) {
    if (!(spec_.window > 0.0) || !std::isfinite(spec_.window)) {
        throw ConfigError("window must be a positive finite number");
    }
    switch (spec_.kind) {
        case HamiltonianKind::heat:
            if (!spec_.a_poly.empty()) throw ConfigError("a_poly is only valid for kind=general");
            a_ = Polynomial({1.0});
            coefficient_ = Polynomial({1.0});
            break;
        case HamiltonianKind::degenerate:
            if (!spec_.a_poly.empty()) throw ConfigError("a_poly is only valid for kind=general");
            a_ = Polynomial({1.0});
            coefficient_ = a_.shifted_up();
            break;
        case HamiltonianKind::general:
            if (spec_.a_poly.empty()) throw ConfigError("kind=general requires a non-empty a_poly");
            for (double c : spec_.a_poly) {
                if (!std::isfinite(c)) throw ConfigError("a_poly coefficients must be finite");
            }
            a_ = Polynomial(spec_.a_poly);
            positive_ok_ = nonvanishing_on(a_, 0.0, spec_.window);
            negative_ok_ = nonvanishing_on(a_, -spec_.window, 0.0);
            if (spec_.domain_sign) {
                const bool ok = *spec_.domain_sign == DomainSign::positive ? positive_ok_
                              : *spec_.domain_sign == DomainSign::negative ? negative_ok_
                              : nonvanishing_on(a_, -spec_.window, spec_.window);
                if (!ok) {
                    throw ConfigError("a(x) vanishes on the declared domain (" +
                                      std::string(to_string(*spec_.domain_sign)) + ")");
                }
                positive_ok_ = *spec_.domain_sign != DomainSign::negative;
                negative_ok_ = *spec_.domain_sign != DomainSign::positive;
            } else if (!positive_ok_ && !negative_ok_) {
                throw ConfigError("a(x) vanishes on both half-lines of the working window");
            }
            coefficient_ = a_.shifted_up();
            break;
    }
}

Derivatives HamiltonianModel::derivatives(double x, double p) const {
    const auto [A, dA, d2A] = coefficient_.evaluate(x);
    const double p2 = p * p;
    return Derivatives{
        .H = A * A * p2,
        .H_x = 2.0 * A * dA * p2,
        .H_p = 2.0 * A * A * p,
        .H_pp = 2.0 * A * A,
        .H_xp = 4.0 * A * dA * p,
        .H_xx = 2.0 * (dA * dA + A * d2A) * p2,
    };
}

double HamiltonianModel::H(double x, double p) const {
    const double A = coefficient_(x);
    return A * A * p * p;
}

double HamiltonianModel::coefficient(double x) const { return coefficient_(x); }

double HamiltonianModel::a(double x) const {
    if (spec_.kind == HamiltonianKind::heat) throw DomainError("a(x) is undefined for the heat model");
    return a_(x);
}

double HamiltonianModel::a_prime(double x) const {
    if (spec_.kind == HamiltonianKind::heat) throw DomainError("a(x) is undefined for the heat model");
    return a_.evaluate(x).d1;
}

bool HamiltonianModel::domain_admits(double x) const {
    if (spec_.kind != HamiltonianKind::general) return true;
    if (x > 0) return positive_ok_;
    if (x < 0) return negative_ok_;
    return positive_ok_ && negative_ok_;
}

double HamiltonianModel::diffusion(double x) const {
    const double A = coefficient_(x);
    return A * A;
}

// ─── Config ──────────────────────────────────────────────────────────────────

HamiltonianSpec spec_from_json(const nlohmann::json& config) {
    if (!config.is_object()) throw ConfigError("hamiltonian config must be a JSON object");
    HamiltonianSpec spec;
    if (!config.contains("kind") || !config["kind"].is_string()) {
        throw ConfigError("hamiltonian config needs a string field 'kind'");
    }
    const auto kind = config["kind"].get<std::string>();
    if (kind == "heat") {
        spec.kind = HamiltonianKind::heat;
    } else if (kind == "degenerate") {
        spec.kind = HamiltonianKind::degenerate;
    } else if (kind == "general") {
        spec.kind = HamiltonianKind::general;
    } else {
        throw ConfigError("unknown hamiltonian kind '" + kind + "'");
    }
    if (config.contains("a_poly")) {
        const auto& arr = config["a_poly"];
        if (!arr.is_array()) throw ConfigError("a_poly must be an array of numbers");
        for (const auto& c : arr) {
            if (!c.is_number()) throw ConfigError("a_poly must be an array of numbers");
            spec.a_poly.push_back(c.get<double>());
        }
        if (spec.kind == HamiltonianKind::general && spec.a_poly.empty()) {
            throw ConfigError("kind=general requires a non-empty a_poly");
        }
    }
    if (config.contains("domain_sign")) {
        const auto s = config["domain_sign"].get<std::string>();
        if (s == "positive") spec.domain_sign = DomainSign::positive;
        else if (s == "negative") spec.domain_sign = DomainSign::negative;
        else if (s == "both") spec.domain_sign = DomainSign::both;
        else throw ConfigError("unknown domain_sign '" + s + "'");
    }
    if (config.contains("window")) spec.window = config["window"].get<double>();
    return spec;
}

nlohmann::json to_json(const HamiltonianSpec& spec) {
    nlohmann::json j;
    j["kind"] = std::string(to_string(spec.kind));
    if (spec.kind == HamiltonianKind::general) j["a_poly"] = spec.a_poly;
    if (spec.domain_sign) j["domain_sign"] = std::string(to_string(*spec.domain_sign));
    j["window"] = spec.window;
    return j;
}

HamiltonianModel parse_spec(std::string_view config_text) {
    nlohmann::json config;
    try {
        config = nlohmann::json::parse(config_text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("invalid hamiltonian JSON: ") + e.what());
    }
    try {
        return HamiltonianModel(spec_from_json(config));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("invalid hamiltonian config: ") + e.what());
    }
}

HamiltonianModel make_heat() { return HamiltonianModel(HamiltonianSpec{}); }

HamiltonianModel make_degenerate(std::optional<DomainSign> sign) {
    return HamiltonianModel(HamiltonianSpec{HamiltonianKind::degenerate, {}, sign, 2.0});
}

HamiltonianModel make_general(std::vector<double> a_poly, std::optional<DomainSign> sign) {
    return HamiltonianModel(HamiltonianSpec{HamiltonianKind::general, std::move(a_poly), sign, 2.0});
}

}  // namespace wkbgreen
