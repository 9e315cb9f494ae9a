#include "vebs/solver.hpp"

#include "vebs/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace vebs {

StepSystem::StepSystem(double a, double b, const FemSpace& fem)
    : a_(a)
    , b_(b)
{
    if (!(a > 0.0)) {
        std::ostringstream os;
        os << "step matrix is not positive definite (a_n = " << a
           << "); reduce the time step";
        throw NumericalError(os.str());
    }
    const std::size_t n = fem.interior_size();
    matrix_.diag.resize(n);
    matrix_.off.resize(n - 1);
    for (std::size_t i = 0; i < n; ++i)
        matrix_.diag[i] = a * fem.mass.diag[i] + b * fem.stiffness.diag[i];
    for (std::size_t i = 0; i + 1 < n; ++i)
        matrix_.off[i] = a * fem.mass.off[i] + b * fem.stiffness.off[i];

    d_.resize(n);
    l_.resize(n > 0 ? n - 1 : 0);
    d_[0] = matrix_.diag[0];
    for (std::size_t i = 0; i < n; ++i) {
        if (i > 0) {
            l_[i - 1] = matrix_.off[i - 1] / d_[i - 1];
            d_[i] = matrix_.diag[i] - l_[i - 1] * matrix_.off[i - 1];
        }
        if (!(d_[i] > 0.0))
            throw NumericalError("step matrix lost positive definiteness during factorization");
    }
}

std::vector<double> StepSystem::solve(std::span<const double> rhs) const
{
    const std::size_t n = d_.size();
    std::vector<double> x(rhs.begin(), rhs.end());
    for (std::size_t i = 1; i < n; ++i)
        x[i] -= l_[i - 1] * x[i - 1];
    for (std::size_t i = 0; i < n; ++i)
        x[i] /= d_[i];
    for (std::size_t i = n - 1; i-- > 0;)
        x[i] -= l_[i] * x[i + 1];
    return x;
}

StepSystem make_step_system(const TransformedProblem& problem, const FemSpace& fem,
                            const LagWeights& weights)
{
    const double a = 1.0 + weights.q_lags[0] + problem.lambda * weights.beta_lags[0];
    const double b = 0.5 * problem.sigma * problem.sigma * weights.beta_lags[0];
    return StepSystem(a, b, fem);
}

namespace {

std::vector<double> advance(int n, const SolutionGrid& state, const TransformedProblem& problem,
                            const FemSpace& fem, const LagWeights& weights,
                            const StepSystem& system, std::span<const double> load)
{
    const std::size_t size = fem.interior_size();
    if (load.size() != size)
        throw ConfigurationError("step: load vector has the wrong size");

    const double half_var = 0.5 * problem.sigma * problem.sigma;
    std::vector<double> mass_hist(size, 0.0);
    std::vector<double> stiff_hist(size, 0.0);
    for (int j = 1; j < n; ++j) {
        const double cm = weights.q(n, j) + problem.lambda * weights.beta(n, j);
        const double ck = half_var * weights.beta(n, j);
        const auto wj = state.w_row(j);
        for (std::size_t i = 0; i < size; ++i) {
            mass_hist[i] += cm * wj[i];
            stiff_hist[i] += ck * wj[i];
        }
    }
    std::vector<double> rhs(load.begin(), load.end());
    fem.mass.multiply_add(mass_hist, -1.0, rhs);
    fem.stiffness.multiply_add(stiff_hist, -1.0, rhs);
    return system.solve(rhs);
}

SolutionGrid empty_grid(const TransformedProblem& problem, const FemSpace& fem, int N, int M,
                        const SolverOptions& options)
{
    SolutionGrid grid;
    grid.meta.N = N;
    grid.meta.M = M;
    grid.meta.alpha0 = problem.alpha.alpha0();
    grid.meta.sigma = problem.sigma;
    grid.meta.rate = problem.rate;
    grid.meta.expiry = problem.expiry;
    grid.meta.jacobi_nodes = options.jacobi_nodes;
    grid.meta.legendre_nodes = options.legendre_nodes;
    grid.meta.warnings = problem.diagnostics;
    grid.x_nodes = fem.nodes;
    const std::size_t cells = static_cast<std::size_t>(N + 1) * fem.interior_size();
    grid.w.assign(cells, 0.0);
    grid.u.assign(cells, 0.0);
    return grid;
}

void check_sizes(int N, int M)
{
    if (N < 1)
        throw ConfigurationError("solver: N must be at least 1");
    if (M < 2)
        throw ConfigurationError("solver: M must be at least 2");
}

void finish(SolutionGrid& grid, const TransformedProblem& problem, const FemSpace& fem,
            const TimeGrid& time)
{
    for (int n = 0; n <= time.count(); ++n) {
        const auto w = grid.w_row(n);
        for (double v : w) {
            if (!std::isfinite(v))
                throw NumericalError("solver produced a non-finite value");
        }
        const auto u = reconstruct_u(w, problem, fem.interior_nodes(), time.node(n));
        std::copy(u.begin(), u.end(), grid.u_row(n).begin());
    }
}

} // namespace

std::vector<double> step(int n, const SolutionGrid& state, const TransformedProblem& problem,
                         const FemSpace& fem, const LagWeights& weights,
                         std::span<const double> load)
{
    if (n < 1 || static_cast<std::size_t>(n) > weights.q_lags.size())
        throw DomainError("step: level out of range");
    const StepSystem system = make_step_system(problem, fem, weights);
    return advance(n, state, problem, fem, weights, system, load);
}

SolutionGrid solve_all(const TransformedProblem& problem, int N, int M, const SolverOptions& options)
{
    check_sizes(N, M);
    const auto& alpha = problem.alpha;
    if (!alpha.flat_at_zero() && !options.allow_nonflat_exponent)
        throw PreconditionError("solve_all: alpha'(0) != 0; enable allow_nonflat_exponent to run anyway");

    const TimeGrid time(N, problem.expiry);
    const FemSpace fem = assemble_fem(M, problem.x_domain);
    const JacobiRule jacobi = build_jacobi_rule(alpha.alpha0(), options.jacobi_nodes);
    const LegendreRule legendre = build_legendre_rule(options.legendre_nodes);
    const LagWeights weights = build_lag_weights(alpha, time, jacobi, legendre,
                                                 problem.homogenization.has_value(), true);

    SolutionGrid grid = empty_grid(problem, fem, N, M, options);
    if (!alpha.flat_at_zero())
        grid.meta.warnings.emplace_back("alpha'(0) != 0: q' is unbounded near t = 0");

    double bound = 0.0;
    for (double w : weights.q_lags)
        bound = std::max(bound, std::abs(w));
    grid.meta.q_lag_bound = bound / time.step();
    grid.meta.step_size_ok = 2.0 * bound < 1.0;
    if (!grid.meta.step_size_ok)
        grid.meta.warnings.emplace_back("time step exceeds the stability bound tau < 1/(2C)");

    const LoadAssembler loads(problem, fem, time, weights);
    const StepSystem system = make_step_system(problem, fem, weights);
    for (int n = 1; n <= N; ++n) {
        const auto b = loads.load(n);
        const auto wn = advance(n, grid, problem, fem, weights, system, b);
        std::copy(wn.begin(), wn.end(), grid.w_row(n).begin());
    }
    finish(grid, problem, fem, time);
    return grid;
}

} // namespace vebs
