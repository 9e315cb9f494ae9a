#pragma once

// Special functions and the variable-exponent memory kernel.
//
// The kernel k(t) = t^{-alpha(t)} / Gamma(1 - alpha(t)) is neither positive
// nor monotone in general. The solver never touches it directly; it works
// with the smoothed kernel q = beta_{alpha0} * k, written as
//
//   q(t) = 1/Gamma(alpha0) * int_0^1 G(t s) / Gamma(1 - alpha(t s))
//                            * (1 - s)^{alpha0 - 1} s^{-alpha0} ds,
//
// with G(t) = t^{alpha0 - alpha(t)}. The endpoint singularities are absorbed
// by a Gauss-Jacobi rule, so q and q' reduce to finite sums.

#include <functional>
#include <vector>

namespace vebs {

double gamma(double x);

/// Gamma'(x)/Gamma(x) for x > 0.
double digamma(double x);

/// beta_mu(t) = t^{mu-1} / Gamma(mu).
double beta_density(double mu, double t);

/// Time-dependent fractional order alpha(t) on [0, horizon].
///
/// Construction samples alpha on a dense grid and rejects exponents that
/// leave (0, 1). `flat_at_zero()` reports alpha'(0) == 0, the hypothesis
/// under which q' stays bounded near t = 0.
class VariableExponent {
public:
    using Fn = std::function<double(double)>;

    VariableExponent(Fn alpha, Fn deriv, Fn second_deriv, double horizon);

    static VariableExponent constant(double alpha0, double horizon);

    double operator()(double t) const { return alpha_(t); }
    double eval(double t) const { return alpha_(t); }
    double eval_deriv(double t) const { return deriv_(t); }
    double eval_second_deriv(double t) const { return second_deriv_(t); }

    double alpha0() const { return alpha0_; }
    double horizon() const { return horizon_; }
    bool flat_at_zero() const { return flat_at_zero_; }
    /// Largest sampled value; the alpha* < 1 bound.
    double sampled_max() const { return sampled_max_; }

private:
    Fn alpha_;
    Fn deriv_;
    Fn second_deriv_;
    double horizon_;
    double alpha0_;
    bool flat_at_zero_;
    double sampled_max_;
};

/// Gauss-Jacobi rule on (0,1) for the weight s^{-alpha0} (1-s)^{alpha0-1}.
struct JacobiRule {
    std::vector<double> nodes;
    std::vector<double> weights;
    double exponent_left = 0.0;   // -alpha0
    double exponent_right = 0.0;  // alpha0 - 1

    std::size_t size() const { return nodes.size(); }
};

/// Gauss-Legendre rule on (-1,1).
struct LegendreRule {
    std::vector<double> nodes;
    std::vector<double> weights;

    std::size_t size() const { return nodes.size(); }
};

inline constexpr int kDefaultJacobiNodes = 32;
inline constexpr int kDefaultLegendreNodes = 8;

/// Golub-Welsch construction; exact to degree 2*count-1.
JacobiRule build_jacobi_rule(double alpha0, int count);

LegendreRule build_legendre_rule(int count);

/// G(t) = t^{alpha0 - alpha(t)}, with G(0) = 1.
double eval_G(const VariableExponent& alpha, double t);

/// d/dt G(t); zero at t = 0 (requires alpha'(0) = 0 to be the true limit).
double eval_G_deriv(const VariableExponent& alpha, double t);

/// q(t) by the Jacobi rule; exactly 1 at t = 0.
double eval_q(const VariableExponent& alpha, const JacobiRule& rule, double t);

/// q'(t) by differentiating the Jacobi sum term by term.
///
/// Throws PreconditionError unless alpha is flat at zero. The unchecked
/// variant evaluates the same sum for t > 0 regardless; with alpha'(0) != 0
/// it grows like |ln t| as t -> 0.
double eval_q_prime(const VariableExponent& alpha, const JacobiRule& rule, double t);
double eval_q_prime_unchecked(const VariableExponent& alpha, const JacobiRule& rule,
                              double t);

} // namespace vebs
