#include "vebs/kernel.hpp"

#include "vebs/errors.hpp"

#include <Eigen/Eigenvalues>
#include <boost/math/special_functions/digamma.hpp>

#include <cmath>
#include <numbers>
#include <string>

namespace vebs {

double gamma(double x)
{
    if (!(x > 0.0))
        throw DomainError("gamma: argument must be positive, got " + std::to_string(x));
    return std::tgamma(x);
}

double digamma(double x)
{
    if (!(x > 0.0))
        throw DomainError("digamma: argument must be positive, got " + std::to_string(x));
    return boost::math::digamma(x);
}

double beta_density(double mu, double t)
{
    if (!(t > 0.0))
        throw DomainError("beta_density: t must be positive");
    if (mu == 1.0)
        return 1.0;
    return std::pow(t, mu - 1.0) / gamma(mu);
}

VariableExponent::VariableExponent(Fn alpha, Fn deriv, Fn second_deriv, double horizon)
    : alpha_(std::move(alpha))
    , deriv_(std::move(deriv))
    , second_deriv_(std::move(second_deriv))
    , horizon_(horizon)
{
    if (!(horizon_ > 0.0))
        throw DomainError("VariableExponent: horizon must be positive");
    alpha0_ = alpha_(0.0);
    flat_at_zero_ = deriv_(0.0) == 0.0;

    constexpr int samples = 4096;
    sampled_max_ = 0.0;
    for (int i = 0; i <= samples; ++i) {
        const double t = horizon_ * i / samples;
        const double a = alpha_(t);
        if (!(a > 0.0 && a < 1.0))
            throw DomainError("VariableExponent: alpha(" + std::to_string(t) + ") = " +
                              std::to_string(a) + " leaves (0,1)");
        sampled_max_ = std::max(sampled_max_, a);
    }
}

VariableExponent VariableExponent::constant(double alpha0, double horizon)
{
    return VariableExponent([alpha0](double) { return alpha0; },
                            [](double) { return 0.0; },
                            [](double) { return 0.0; },
                            horizon);
}

JacobiRule build_jacobi_rule(double alpha0, int count)
{
    if (!(alpha0 > 0.0 && alpha0 < 1.0))
        throw DomainError("build_jacobi_rule: alpha0 must lie in (0,1)");
    if (count < 4)
        throw DomainError("build_jacobi_rule: need at least 4 nodes");

    // Jacobi weight (1-x)^a (1+x)^b on [-1,1] with a = alpha0-1, b = -alpha0.
    // Since a + b + 1 = 0 the map s = (1+x)/2 leaves the weights unscaled
    // and the recurrence simplifies; the k = 1 off-diagonal is the usual
    // special case of the general formula.
    const double a = alpha0 - 1.0;
    const double b = -alpha0;
    const std::size_t n = static_cast<std::size_t>(count);

    Eigen::VectorXd diag(n);
    Eigen::VectorXd sub(n - 1);
    diag(0) = 0.5 * (1.0 + (b - a));  // alpha_0 = (b-a)/(a+b+2)
    for (std::size_t k = 1; k < n; ++k) {
        const double kk = static_cast<double>(k);
        const double s = 2.0 * kk - 1.0;  // 2k + a + b
        diag(k) = 0.5 * (1.0 + (b * b - a * a) / (s * (s + 2.0)));
        const double beta = k == 1 ? 2.0 * alpha0 * (1.0 - alpha0)
                                   : (kk + a) * (kk + b) / (s * s);
        sub(k - 1) = 0.5 * std::sqrt(beta);
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig;
    eig.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    if (eig.info() != Eigen::Success)
        throw NumericalError("build_jacobi_rule: eigen decomposition failed");

    const double mass = gamma(alpha0) * gamma(1.0 - alpha0);
    JacobiRule rule;
    rule.exponent_left = -alpha0;
    rule.exponent_right = alpha0 - 1.0;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        rule.nodes[i] = eig.eigenvalues()(static_cast<Eigen::Index>(i));
        const double v0 = eig.eigenvectors()(0, static_cast<Eigen::Index>(i));
        rule.weights[i] = mass * v0 * v0;
    }
    return rule;
}

LegendreRule build_legendre_rule(int count)
{
    if (count < 1)
        throw DomainError("build_legendre_rule: need at least 1 node");
    const std::size_t n = static_cast<std::size_t>(count);
    LegendreRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                            (static_cast<double>(n) + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0;
            double p1 = x;
            for (std::size_t k = 2; k <= n; ++k) {
                const double kk = static_cast<double>(k);
                const double p2 = ((2.0 * kk - 1.0) * x * p1 - (kk - 1.0) * p0) / kk;
                p0 = p1;
                p1 = p2;
            }
            dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16)
                break;
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1)
        rule.nodes[n / 2] = 0.0;
    return rule;
}

double eval_G(const VariableExponent& alpha, double t)
{
    if (t < 0.0)
        throw DomainError("eval_G: t must be nonnegative");
    if (t == 0.0)
        return 1.0;
    return std::exp((alpha.alpha0() - alpha(t)) * std::log(t));
}

double eval_G_deriv(const VariableExponent& alpha, double t)
{
    if (t < 0.0)
        throw DomainError("eval_G_deriv: t must be nonnegative");
    if (t == 0.0)
        return 0.0;
    const double lt = std::log(t);
    const double gap = alpha.alpha0() - alpha(t);
    return std::exp(gap * lt) * (-alpha.eval_deriv(t) * lt + gap / t);
}

double eval_q(const VariableExponent& alpha, const JacobiRule& rule, double t)
{
    if (t < 0.0)
        throw DomainError("eval_q: t must be nonnegative");
    if (t == 0.0)
        return 1.0;
    double sum = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i) {
        const double s = t * rule.nodes[i];
        sum += rule.weights[i] * eval_G(alpha, s) / std::tgamma(1.0 - alpha(s));
    }
    return sum / gamma(alpha.alpha0());
}

double eval_q_prime_unchecked(const VariableExponent& alpha, const JacobiRule& rule,
                              double t)
{
    if (t < 0.0)
        throw DomainError("eval_q_prime: t must be nonnegative");
    if (t == 0.0) {
        if (!alpha.flat_at_zero())
            throw DomainError("eval_q_prime: q'(0) is unbounded when alpha'(0) != 0");
        return 0.0;
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i) {
        const double c = rule.nodes[i];
        const double s = t * c;
        const double arg = 1.0 - alpha(s);
        const double g = eval_G(alpha, s);
        const double dg = eval_G_deriv(alpha, s);
        const double term = c * (dg + g * alpha.eval_deriv(s) * digamma(arg)) / std::tgamma(arg);
        sum += rule.weights[i] * term;
    }
    return sum / gamma(alpha.alpha0());
}

double eval_q_prime(const VariableExponent& alpha, const JacobiRule& rule, double t)
{
    if (!alpha.flat_at_zero())
        throw PreconditionError("eval_q_prime: requires alpha'(0) = 0");
    return eval_q_prime_unchecked(alpha, rule, t);
}

} // namespace vebs
