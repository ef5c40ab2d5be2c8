#pragma once

#include <json.hpp>

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace wkbgreen {

enum class HamiltonianKind { heat, degenerate, general };
enum class DomainSign { positive, negative, both };

std::string_view to_string(HamiltonianKind kind);
std::string_view to_string(DomainSign sign);

/// Dense polynomial c0 + c1 x + ... + cm x^m.
class Polynomial {
public:
    Polynomial() = default;
    explicit Polynomial(std::vector<double> coeffs);

    struct Eval {
        double value;
        double d1;
        double d2;
    };

    /// Value and first two derivatives by a single Horner pass.
    Eval evaluate(double x) const;
    double operator()(double x) const { return evaluate(x).value; }

    /// x * p(x)
    Polynomial shifted_up() const;
    const std::vector<double>& coefficients() const { return coeffs_; }

private:
    std::vector<double> coeffs_;
};

struct HamiltonianSpec {
    HamiltonianKind kind = HamiltonianKind::heat;
    std::vector<double> a_poly;  // only for kind=general
    // Unset: each half-line is checked separately and use sites follow the
    // sign of the source point.
    std::optional<DomainSign> domain_sign;
    double window = 2.0;  // half-width of the working window used for domain checks
};

/// Everything the characteristic, transport and variational systems need at (x, p).
struct Derivatives {
    double H;
    double H_x;
    double H_p;
    double H_pp;
    double H_xp;
    double H_xx;
};

/// Hamiltonians of the form H(x,p) = A(x)^2 p^2 with A = 1 (heat), A = x
/// (degenerate) or A = x a(x) (general, polynomial a).
///
/// Immutable after construction; every member is a pure function.
class HamiltonianModel {
public:
    explicit HamiltonianModel(HamiltonianSpec spec);

    const HamiltonianSpec& spec() const { return spec_; }
    HamiltonianKind kind() const { return spec_.kind; }

    Derivatives derivatives(double x, double p) const;
    double H(double x, double p) const;

    /// A(x) with H = A(x)^2 p^2; A(x)p is conserved along characteristics.
    double coefficient(double x) const;
    Polynomial::Eval coefficient_eval(double x) const { return coefficient_.evaluate(x); }

    /// a(x) and a'(x) for the degenerate family (A = x a). Throws for heat.
    double a(double x) const;
    double a_prime(double x) const;

    /// Whether x lies on a half-line where a(x) was verified nonzero.
    bool domain_admits(double x) const;

    /// True when x = 0 is a fixed point of every characteristic.
    bool fixes_origin() const { return spec_.kind != HamiltonianKind::heat; }

    /// Diffusion coefficient D(x) of u_t = h D(x) u_xx, i.e. A(x)^2.
    double diffusion(double x) const;

private:
    HamiltonianSpec spec_;
    Polynomial a_;            // a(x); identically 1 for the degenerate kind
    Polynomial coefficient_;  // A(x)
    bool positive_ok_ = true;
    bool negative_ok_ = true;
};

HamiltonianSpec spec_from_json(const nlohmann::json& config);
nlohmann::json to_json(const HamiltonianSpec& spec);

/// Parses {"kind": ..., "a_poly": [...], "domain_sign": ...} and validates it.
HamiltonianModel parse_spec(std::string_view config_text);

HamiltonianModel make_heat();
HamiltonianModel make_degenerate(std::optional<DomainSign> sign = std::nullopt);
HamiltonianModel make_general(std::vector<double> a_poly,
                              std::optional<DomainSign> sign = std::nullopt);

}  // namespace wkbgreen
