#pragma once

#include "circlefact/common.hpp"

#include <optional>

namespace circlefact {

// Closed-form magnitude rule r_n = c * n^p for n >= first (zero below),
// with constant phase: w_n = r_n * exp(i*phase).
struct MagnitudeRule {
    double c = 0.0;
    double p = -1.0;
    std::size_t first = 1;
    double phase = 0.0;

    double radius(std::size_t n) const;
    cplx term(std::size_t n) const;
    std::string tag() const;

    // Accepts "0", "c/n", "c/sqrt(n)", "c*n^p", "n^p", optionally with
    // a trailing "@k" giving the first nonzero index.
    static MagnitudeRule parse(const std::string& text);
};

// Ordered root subgroup coordinates. Explicit terms w_1..w_M take
// precedence; beyond M the magnitude rule (if any) supplies w_n.
class RootCoordinateSequence {
public:
    RootCoordinateSequence() = default;
    explicit RootCoordinateSequence(std::vector<cplx> terms,
                                    std::optional<MagnitudeRule> rule = std::nullopt,
                                    std::vector<std::size_t> ordering = {});

    static RootCoordinateSequence from_rule(const MagnitudeRule& rule);

    // w_n for n >= 1.
    cplx coefficient(std::size_t n) const;
    double magnitude(std::size_t n) const { return std::abs(coefficient(n)); }

    // Index n' of the factor applied at step k (1-based).
    std::size_t slot(std::size_t k) const;

    // Largest index that can carry a nonzero term; SIZE_MAX under a rule.
    std::size_t support() const;

    const std::vector<cplx>& terms() const { return terms_; }
    const std::optional<MagnitudeRule>& rule() const { return rule_; }
    const std::vector<std::size_t>& ordering() const { return ordering_; }

    // Rejects any unit-modulus term among the first N applied factors.
    void require_open_disk(std::size_t N) const;

private:
    std::vector<cplx> terms_;
    std::optional<MagnitudeRule> rule_;
    std::vector<std::size_t> ordering_;
};

struct PhiValue {
    cplx z;
    bool jump = false;
};

// Lift of phi_n(w): theta - (2/n) * polar angle of 1 + w e^{i n theta}.
// For |w| = 1 the right-continuous step value is returned.
double phi_lift(unsigned n, cplx w, double theta);
bool phi_is_jump(unsigned n, cplx w, double theta);
// (1 - |w|^2) / |1 + w z^n|^2, valid for |w| < 1.
double phi_lift_derivative(unsigned n, cplx w, double theta);

PhiValue phi_eval(unsigned n, cplx w, cplx z);
cplx phi_inverse_param(unsigned n, cplx w);

struct CircleLift {
    std::vector<double> theta;
    std::vector<double> values;
    std::size_t truncation = 0;
    double tail_bound = 0.0;

    bool is_monotone(double slack = 1e-12) const;
    // Checks monotonicity and the wrap condition at the grid end.
    void validate(double slack = 1e-12) const;
};

// Sigma_N = Phi_{N'} o ... o Phi_{1'} on the given angles. When steps is
// non-null it receives Sigma_0..Sigma_N per angle (steps[k][i]).
CircleLift sigma_lift_eval(const RootCoordinateSequence& coords, std::size_t N,
                           const std::vector<double>& thetas,
                           std::vector<std::vector<double>>* steps = nullptr);

double sigma_at(const RootCoordinateSequence& coords, std::size_t N, double theta);

// Upper bound on sup |Sigma - Sigma_N|; kInfinity when the series diverges.
double tail_bound(const RootCoordinateSequence& coords, std::size_t N);

struct LimitValue {
    double value = 0.0;
    std::size_t certificate_n = 0;
    double bound = 0.0;
};

LimitValue sigma_limit_eval(const RootCoordinateSequence& coords, double theta, double tol);

// A composition Rot(rotation) o Phi_{n_k}(w_k) o ... o Phi_{n_1}(w_1), with
// steps stored in application order.
struct ChainStep {
    unsigned n = 1;
    cplx w{};
};

struct LiftJet {
    double value = 0.0;
    double d1 = 1.0;
    double d2 = 0.0;
};

struct CompositionChain {
    double rotation = 0.0;
    std::vector<ChainStep> steps;

    double lift(double theta) const;
    LiftJet jet(double theta) const;
    bool open_disk() const;

    // outer o (*this), with the inner rotation commuted to the left.
    CompositionChain then(const CompositionChain& outer) const;
};

CompositionChain chain_from(const RootCoordinateSequence& coords, std::size_t N);

} // namespace circlefact
