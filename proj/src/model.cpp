#include "vebs/model.hpp"

#include "vebs/errors.hpp"
#include "vebs/solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace vebs {

namespace {

Fn1 central_difference(Fn1 f, double h)
{
    return [f = std::move(f), h](double x) { return (f(x + h) - f(x - h)) / (2.0 * h); };
}

bool vanishes_on(const Fn1& f, double lo, double hi)
{
    if (!f)
        return true;
    constexpr int samples = 64;
    for (int i = 0; i <= samples; ++i) {
        if (f(lo + (hi - lo) * i / samples) != 0.0)
            return false;
    }
    return true;
}

} // namespace

void ModelSpec::validate() const
{
    if (!(sigma > 0.0))
        throw DomainError("ModelSpec: sigma must be positive");
    if (!(rate >= 0.0))
        throw DomainError("ModelSpec: rate must be nonnegative");
    if (!(expiry > 0.0))
        throw DomainError("ModelSpec: expiry must be positive");
    if (!(std::isfinite(x_domain.lo) && std::isfinite(x_domain.hi) && x_domain.lo < x_domain.hi))
        throw DomainError("ModelSpec: x_domain must be a bounded interval with lo < hi");
    if (!terminal_payoff)
        throw ConfigurationError("ModelSpec: terminal payoff is required");
}

double SpatialTransformWeight::apply(double x, double value) const
{
    return value * std::exp(exponent_coeff * x);
}

double SpatialTransformWeight::apply_inverse(double x, double value) const
{
    return value * std::exp(-exponent_coeff * x);
}

double Homogenization::lift(double x, double t) const
{
    return left_shape(x) * left(t) + right_shape(x) * right(t);
}

double Homogenization::lift_dt(double x, double t) const
{
    return left_shape(x) * left_rate(t) + right_shape(x) * right_rate(t);
}

double TransformedProblem::left_value(double t) const
{
    return homogenization ? homogenization->left(t) : 0.0;
}

double TransformedProblem::right_value(double t) const
{
    return homogenization ? homogenization->right(t) : 0.0;
}

double lambda_coeff(double sigma, double rate)
{
    if (!(sigma > 0.0))
        throw DomainError("lambda_coeff: sigma must be positive");
    if (!(rate >= 0.0))
        throw DomainError("lambda_coeff: rate must be nonnegative");
    const double s = 0.5 * sigma + rate / sigma;
    return 0.5 * s * s;
}

TransformedProblem build_transformed_problem(const ModelSpec& spec, const VariableExponent& alpha)
{
    spec.validate();
    if (alpha.horizon() < spec.expiry)
        throw ConfigurationError("build_transformed_problem: exponent horizon shorter than expiry");

    const double T = spec.expiry;
    const double sigma = spec.sigma;
    const double r = spec.rate;
    const double kappa = 0.5 - r / (sigma * sigma);
    const Interval dom = spec.x_domain;

    TransformedProblem p{
        .sigma = sigma,
        .rate = r,
        .lambda = lambda_coeff(sigma, r),
        .expiry = T,
        .x_domain = dom,
        .weight = SpatialTransformWeight{kappa},
        .alpha = alpha,
        .chi = {},
        .chi_time_dependent = true,
        .c_star = {},
        .c_star_prime = {},
        .initial_u = {},
        .homogenization = std::nullopt,
        .slope_from_finite_difference = false,
        .diagnostics = {},
    };

    // Log transform of the payoff.
    Fn1 payoff = spec.terminal_payoff;
    Fn1 cbar = [payoff](double x) { return payoff(std::exp(x)); };
    Fn1 cbar_slope = spec.payoff_log_slope;
    if (!cbar_slope) {
        cbar_slope = central_difference(cbar, 1e-6 * dom.length());
        p.slope_from_finite_difference = true;
        p.diagnostics.emplace_back("payoff slope approximated by central difference");
    }
    p.initial_u = cbar;

    // Time reversal and homogenization.
    const bool has_boundary = !vanishes_on(spec.left_boundary, 0.0, T) ||
                              !vanishes_on(spec.right_boundary, 0.0, T);
    if (has_boundary) {
        auto reversed = [T](Fn1 f) -> Fn1 {
            if (!f)
                return [](double) { return 0.0; };
            return [f = std::move(f), T](double t) { return f(T - t); };
        };
        auto reversed_rate = [T, &p](Fn1 f, Fn1 rate) -> Fn1 {
            if (!f)
                return [](double) { return 0.0; };
            if (!rate) {
                rate = central_difference(f, 1e-6 * T);
                p.diagnostics.emplace_back("boundary rate approximated by central difference");
            }
            return [rate = std::move(rate), T](double t) { return -rate(T - t); };
        };
        p.homogenization = Homogenization{
            .x_domain = dom,
            .left = reversed(spec.left_boundary),
            .right = reversed(spec.right_boundary),
            .left_rate = reversed_rate(spec.left_boundary, spec.left_boundary_rate),
            .right_rate = reversed_rate(spec.right_boundary, spec.right_boundary_rate),
        };
    }

    const std::optional<Homogenization> hom = p.homogenization;
    auto lift = [hom](double x, double t) { return hom ? hom->lift(x, t) : 0.0; };
    auto lift_slope = [hom](double t) {
        return hom ? (hom->right(t) - hom->left(t)) / hom->x_domain.length() : 0.0;
    };

    // Corner compatibility between payoff and boundary data.
    {
        const double left_gap = cbar(dom.lo) - (hom ? hom->left(0.0) : 0.0);
        const double right_gap = cbar(dom.hi) - (hom ? hom->right(0.0) : 0.0);
        const double tol = 1e-12;
        if (std::abs(left_gap) > tol * (1.0 + std::abs(cbar(dom.lo))) ||
            std::abs(right_gap) > tol * (1.0 + std::abs(cbar(dom.hi)))) {
            std::ostringstream os;
            os << "payoff and boundary data disagree at the expiry corners (left "
               << left_gap << ", right " << right_gap << ")";
            p.diagnostics.push_back(os.str());
        }
    }

    // Exponential weight applied to the shifted initial data.
    p.c_star = [cbar, lift, kappa](double x) {
        return std::exp(-kappa * x) * (cbar(x) - lift(x, 0.0));
    };
    p.c_star_prime = [cbar, cbar_slope, lift, lift_slope, kappa](double x) {
        const double v = cbar(x) - lift(x, 0.0);
        const double dv = cbar_slope(x) - lift_slope(0.0);
        return std::exp(-kappa * x) * (dv - kappa * v);
    };

    // chi collects the forcing and the spatial operator applied to the lift;
    // the lift has no curvature in x.
    Fn2 forcing = spec.forcing;
    const double advection = r - 0.5 * sigma * sigma;
    p.chi = [forcing, lift, lift_slope, kappa, advection, r](double x, double t) {
        double rhs = forcing ? forcing(x, t) : 0.0;
        rhs += advection * lift_slope(t) - r * lift(x, t);
        return std::exp(-kappa * x) * rhs;
    };
    return p;
}

std::vector<double> reconstruct_u(std::span<const double> w_values,
                                  const TransformedProblem& problem,
                                  std::span<const double> x_nodes, double t)
{
    if (w_values.size() != x_nodes.size())
        throw ConfigurationError("reconstruct_u: node count mismatch");
    std::vector<double> u(w_values.size());
    const auto& hom = problem.homogenization;
    for (std::size_t j = 0; j < u.size(); ++j) {
        const double x = x_nodes[j];
        double v = problem.initial_u(x);
        if (w_values[j] != 0.0)
            v += problem.weight.apply(x, w_values[j]);
        if (hom)
            v += hom->lift(x, t) - hom->lift(x, 0.0);
        u[j] = v;
    }
    return u;
}

PriceSurface::PriceSurface(std::vector<double> x_nodes, std::vector<std::vector<double>> u_rows,
                           double expiry, double tau)
    : x_(std::move(x_nodes))
    , rows_(std::move(u_rows))
    , expiry_(expiry)
    , tau_(tau)
{
    for (const auto& row : rows_) {
        if (row.size() != x_.size())
            throw ConfigurationError("PriceSurface: row length mismatch");
    }
}

double PriceSurface::calendar_time(std::size_t n) const
{
    if (n + 1 == rows_.size())
        return 0.0;
    return expiry_ - static_cast<double>(n) * tau_;
}

double PriceSurface::price(double S, std::size_t n) const
{
    if (n >= rows_.size())
        throw OutOfDomainError("PriceSurface: time level out of range");
    if (!(S > 0.0))
        throw OutOfDomainError("PriceSurface: asset price must be positive");
    const double x = std::log(S);
    const double lo = x_.front();
    const double hi = x_.back();
    const double slack = 1e-12 * (hi - lo);
    if (x < lo - slack || x > hi + slack)
        throw OutOfDomainError("PriceSurface: S outside the truncated domain");

    const auto& row = rows_[n];
    auto it = std::upper_bound(x_.begin(), x_.end(), x);
    std::size_t k = it == x_.begin() ? 0 : static_cast<std::size_t>(it - x_.begin()) - 1;
    k = std::min(k, x_.size() - 2);
    if (x == x_[k])
        return row[k];
    const double theta = std::clamp((x - x_[k]) / (x_[k + 1] - x_[k]), 0.0, 1.0);
    return (1.0 - theta) * row[k] + theta * row[k + 1];
}

double PriceSurface::price_at(double S, double t) const
{
    const double reversed = (expiry_ - t) / tau_;
    const double level = std::round(reversed);
    if (std::abs(reversed - level) > 1e-9 || level < 0.0 ||
        level >= static_cast<double>(rows_.size()))
        throw OutOfDomainError("PriceSurface: t is not a grid time");
    return price(S, static_cast<std::size_t>(level));
}

PriceSurface reconstruct_option_price(const SolutionGrid& grid, const TransformedProblem& problem)
{
    const std::size_t N = static_cast<std::size_t>(grid.meta.N);
    const std::size_t interior = static_cast<std::size_t>(grid.meta.M) - 1;
    const double tau = problem.expiry / static_cast<double>(N);

    std::vector<double> x(interior + 2);
    for (std::size_t j = 0; j < x.size(); ++j)
        x[j] = grid.x_nodes[j];

    std::vector<std::vector<double>> rows(N + 1);
    for (std::size_t n = 0; n <= N; ++n) {
        const double t = n == N ? problem.expiry : static_cast<double>(n) * tau;
        auto& row = rows[n];
        row.resize(interior + 2);
        row.front() = n == 0 ? problem.initial_u(x.front()) : problem.left_value(t);
        row.back() = n == 0 ? problem.initial_u(x.back()) : problem.right_value(t);
        const auto u = grid.u_row(n);
        std::copy(u.begin(), u.end(), row.begin() + 1);
    }
    return PriceSurface(std::move(x), std::move(rows), problem.expiry, tau);
}

} // namespace vebs
