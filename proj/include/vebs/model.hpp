#pragma once

// Model data and the transformation chain from the terminal-value pricing
// problem to the homogeneous Volterra problem for omega:
//
//   omega + q' * omega - sigma^2/2 beta * omega_xx + lambda beta * omega = F,
//   omega = 0 on the boundary and at t = 0.
//
// Steps: time reversal t -> T - t, log price x = ln S, homogenization by the
// linear interpolant L of the boundary data, the exponential weight
// u = exp(kappa x) phi with kappa = 1/2 - r/sigma^2, and the shift
// omega = phi - c*.

#include "vebs/kernel.hpp"

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace vebs {

struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    double length() const { return hi - lo; }
    bool contains(double x) const { return x >= lo && x <= hi; }
};

using Fn1 = std::function<double(double)>;
using Fn2 = std::function<double(double, double)>;

/// Financial inputs of the pricing problem.
///
/// Boundary data are functions of calendar time t in [0, T]; the payoff is a
/// function of the asset price S. The forcing acts on the log-price problem
/// and is a function of (x, time to expiry). Optional derivatives avoid
/// finite-difference fallbacks.
struct ModelSpec {
    double sigma = 0.0;
    double rate = 0.0;
    double expiry = 0.0;
    Interval s_domain;
    Interval x_domain;
    Fn1 terminal_payoff;
    Fn1 left_boundary;
    Fn1 right_boundary;
    Fn2 forcing;

    /// d/dx c_t(e^x).
    Fn1 payoff_log_slope;
    /// dc_l/dt and dc_r/dt in calendar time.
    Fn1 left_boundary_rate;
    Fn1 right_boundary_rate;

    void validate() const;
};

/// u = exp(kappa x) phi with kappa = 1/2 - r/sigma^2.
struct SpatialTransformWeight {
    double exponent_coeff = 0.0;

    double apply(double x, double value) const;
    double apply_inverse(double x, double value) const;
};

/// Linear-in-x lift of the reversed boundary data.
struct Homogenization {
    Interval x_domain;
    Fn1 left;       // c_l(T - t)
    Fn1 right;      // c_r(T - t)
    Fn1 left_rate;  // d/dt c_l(T - t)
    Fn1 right_rate;

    double left_shape(double x) const { return (x_domain.hi - x) / x_domain.length(); }
    double right_shape(double x) const { return (x - x_domain.lo) / x_domain.length(); }
    double lift(double x, double t) const;
    double lift_dt(double x, double t) const;
};

/// The omega-problem handed to the discretization.
///
/// The forcing F is kept in three parts:
///   static  B1(t) [sigma^2/2 c*'' - lambda c*], paired weakly through
///           (c_star, c_star_prime);
///   chi     beta * chi, chi possibly time dependent;
///   lift    -exp(-kappa x) (q * dL/dt), present only with nonzero
///           boundary data.
struct TransformedProblem {
    double sigma = 0.0;
    double rate = 0.0;
    double lambda = 0.0;
    double expiry = 0.0;
    Interval x_domain;
    SpatialTransformWeight weight;
    VariableExponent alpha;

    Fn2 chi;
    bool chi_time_dependent = true;
    Fn1 c_star;
    Fn1 c_star_prime;
    /// Reversed payoff c_t(e^x), used to rebuild u without a round trip
    /// through the exponential weight.
    Fn1 initial_u;
    std::optional<Homogenization> homogenization;

    bool slope_from_finite_difference = false;
    std::vector<std::string> diagnostics;

    /// Boundary value of u at time t (zero without homogenization).
    double left_value(double t) const;
    double right_value(double t) const;
};

/// lambda = (sigma/2 + r/sigma)^2 / 2.
double lambda_coeff(double sigma, double rate);

TransformedProblem build_transformed_problem(const ModelSpec& spec,
                                             const VariableExponent& alpha);

/// U_j = exp(kappa x_j) (W_j + c*(x_j)) + L(x_j, t), evaluated as
/// exp(kappa x_j) W_j + (c_t(x_j) - L(x_j, 0)) + L(x_j, t).
std::vector<double> reconstruct_u(std::span<const double> w_values,
                                  const TransformedProblem& problem,
                                  std::span<const double> x_nodes, double t);

struct SolutionGrid;

/// Option prices v(S, t) = u(ln S, T - t) on the solver's time levels.
class PriceSurface {
public:
    PriceSurface(std::vector<double> x_nodes, std::vector<std::vector<double>> u_rows,
                 double expiry, double tau);

    std::size_t levels() const { return rows_.size(); }
    /// Calendar time of reversed level n.
    double calendar_time(std::size_t n) const;
    /// Price at asset level S on reversed level n, linear in ln S.
    double price(double S, std::size_t n) const;
    /// Price at a calendar time that coincides with a grid level.
    double price_at(double S, double t) const;

    std::span<const double> x_nodes() const { return x_; }

private:
    std::vector<double> x_;
    std::vector<std::vector<double>> rows_;
    double expiry_;
    double tau_;
};

PriceSurface reconstruct_option_price(const SolutionGrid& grid, const TransformedProblem& problem);

} // namespace vebs
