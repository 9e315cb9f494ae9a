#include "vebs/errors.hpp"
#include "vebs/solver.hpp"

#include <Eigen/Dense>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <algorithm>
#include <cmath>

namespace vebs {

namespace {

using boost::math::quadrature::tanh_sinh;

constexpr double kTolerance = 1e-13;

// Weights w(n,j) = 1/tau int_{t_{n-1}}^{t_n} int_{t_{j-1}}^{min(t,t_j)} K(t-s) ds dt
// with the inner integral written in the lag variable u = t - s.
class DoubleIntegralWeights {
public:
    DoubleIntegralWeights(const TimeGrid& grid)
        : grid_(grid)
    {}

    template <typename Kernel>
    double operator()(Kernel&& kernel, int n, int j) const
    {
        const double tau = grid_.step();
        const double t_lo = grid_.node(n - 1);
        const double t_hi = grid_.node(n);
        const double s_lo = grid_.node(j - 1);
        const double s_hi = grid_.node(j);
        auto inner = [&](double t) {
            const double u_lo = t - std::min(t, s_hi);
            const double u_hi = t - s_lo;
            if (!(u_hi > u_lo))
                return 0.0;
            return integrator_.integrate(
                [&](double u) { return kernel(std::max(u, 1e-300)); }, u_lo, u_hi, kTolerance);
        };
        return integrator_.integrate(inner, t_lo, t_hi, kTolerance) / tau;
    }

private:
    const TimeGrid& grid_;
    mutable tanh_sinh<double> integrator_;
};

// int_0^{t_n} K(t_n - s) phi_j(s) ds for the hat phi_j at t_j, j = 0..n,
// written in the lag u = t_n - s so that the singular end sits at u = 0.
template <typename Kernel>
double hat_weight(Kernel&& kernel, const TimeGrid& grid, int n, int j,
                  tanh_sinh<double>& integrator)
{
    const double tau = grid.step();
    const int k = n - j;
    const double uk = grid.node(k);
    double total = 0.0;
    if (j > 0) {
        const double hi = grid.node(k + 1);
        total += integrator.integrate(
            [&](double u) { return kernel(std::max(u, 1e-300)) * (hi - u) / tau; }, uk, hi,
            kTolerance);
    }
    if (j < n) {
        const double lo = grid.node(k - 1);
        total += integrator.integrate(
            [&](double u) { return kernel(std::max(u, 1e-300)) * (u - lo) / tau; }, lo, uk,
            kTolerance);
    }
    return total;
}

Eigen::MatrixXd dense_element_matrix(const FemSpace& fem, bool stiffness)
{
    const Eigen::Index n = static_cast<Eigen::Index>(fem.interior_size());
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
    const double h = fem.h;
    Eigen::Matrix2d local;
    if (stiffness)
        local << 1.0 / h, -1.0 / h, -1.0 / h, 1.0 / h;
    else
        local << h / 3.0, h / 6.0, h / 6.0, h / 3.0;
    for (int c = 0; c < fem.cell_count; ++c) {
        const int idx[2] = {c - 1, c};  // interior indices of the cell's nodes
        for (int a = 0; a < 2; ++a) {
            for (int b = 0; b < 2; ++b) {
                if (idx[a] < 0 || idx[a] >= n || idx[b] < 0 || idx[b] >= n)
                    continue;
                A(idx[a], idx[b]) += local(a, b);
            }
        }
    }
    return A;
}

// (f, phi_i) and (f, phi_i') basis by basis over the hat's support.
template <typename F>
Eigen::VectorXd basis_pairing(const FemSpace& fem, F&& f, bool slope)
{
    const Eigen::Index n = static_cast<Eigen::Index>(fem.interior_size());
    Eigen::VectorXd out(n);
    const double h = fem.h;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double xi = fem.nodes[static_cast<std::size_t>(i + 1)];
        double sum = 0.0;
        for (int side = 0; side < 2; ++side) {
            const double x0 = side == 0 ? xi - h : xi;
            for (int k = 0; k < CellRule::points; ++k) {
                const double r = CellRule::nodes[k];
                const double x = x0 + h * r;
                double basis;
                if (slope)
                    basis = side == 0 ? 1.0 / h : -1.0 / h;
                else
                    basis = side == 0 ? r : 1.0 - r;
                sum += CellRule::weights[k] * h * f(x) * basis;
            }
        }
        out(i) = sum;
    }
    return out;
}

} // namespace

SolutionGrid dense_oracle_solve(const TransformedProblem& problem, int N, int M,
                                const SolverOptions& options)
{
    if (N < 1 || M < 2)
        throw ConfigurationError("dense_oracle_solve: N >= 1 and M >= 2 required");
    if (static_cast<long>(N) * M > kDenseOracleCap)
        throw ConfigurationError("dense_oracle_solve: N*M exceeds the oracle size cap");

    const auto& alpha = problem.alpha;
    if (!alpha.flat_at_zero() && !options.allow_nonflat_exponent)
        throw PreconditionError("dense_oracle_solve: alpha'(0) != 0");

    const double alpha0 = alpha.alpha0();
    const TimeGrid time(N, problem.expiry);
    const FemSpace fem = assemble_fem(M, problem.x_domain);
    const JacobiRule jacobi = build_jacobi_rule(alpha0, options.jacobi_nodes);
    const double gamma0 = std::tgamma(alpha0);

    auto q_prime = [&](double u) { return eval_q_prime_unchecked(alpha, jacobi, u); };
    auto q_value = [&](double u) { return eval_q(alpha, jacobi, u); };
    auto beta = [&](double u) { return std::pow(u, alpha0 - 1.0) / gamma0; };

    const DoubleIntegralWeights weight(time);
    tanh_sinh<double> integrator;

    const Eigen::MatrixXd mass = dense_element_matrix(fem, false);
    const Eigen::MatrixXd stiff = dense_element_matrix(fem, true);
    const Eigen::Index size = mass.rows();
    const double half_var = 0.5 * problem.sigma * problem.sigma;

    // Data pairings.
    const Eigen::VectorXd static_part =
        -half_var * basis_pairing(fem, problem.c_star_prime, true) -
        problem.lambda * basis_pairing(fem, problem.c_star, false);
    std::vector<Eigen::VectorXd> chi(static_cast<std::size_t>(N) + 1);
    for (int j = 0; j <= N; ++j) {
        const double t = time.node(j);
        chi[static_cast<std::size_t>(j)] =
            basis_pairing(fem, [&](double x) { return problem.chi(x, t); }, false);
    }
    Eigen::VectorXd lift_left, lift_right;
    const auto& hom = problem.homogenization;
    if (hom) {
        const double kappa = problem.weight.exponent_coeff;
        lift_left = basis_pairing(
            fem, [&](double x) { return std::exp(-kappa * x) * hom->left_shape(x); }, false);
        lift_right = basis_pairing(
            fem, [&](double x) { return std::exp(-kappa * x) * hom->right_shape(x); }, false);
    }

    // Blocks A(n,j), j <= n, and loads.
    std::vector<std::vector<Eigen::MatrixXd>> blocks(static_cast<std::size_t>(N) + 1);
    std::vector<Eigen::VectorXd> loads(static_cast<std::size_t>(N) + 1);
    for (int n = 1; n <= N; ++n) {
        auto& row = blocks[static_cast<std::size_t>(n)];
        row.resize(static_cast<std::size_t>(n) + 1);
        Eigen::VectorXd b = std::pow(time.node(n), alpha0) / std::tgamma(alpha0 + 1.0) * static_part;
        for (int j = 1; j <= n; ++j) {
            const double wq = weight(q_prime, n, j);
            const double wb = weight(beta, n, j);
            Eigen::MatrixXd A = (wq + problem.lambda * wb) * mass + half_var * wb * stiff;
            if (j == n)
                A += mass;
            row[static_cast<std::size_t>(j)] = std::move(A);
            b += hat_weight(beta, time, n, j, integrator) * chi[static_cast<std::size_t>(j)];
        }
        b += hat_weight(beta, time, n, 0, integrator) * chi[0];
        if (hom) {
            double left = 0.0;
            double right = 0.0;
            for (int j = 0; j <= n; ++j) {
                const double w = hat_weight(q_value, time, n, j, integrator);
                left += w * hom->left_rate(time.node(j));
                right += w * hom->right_rate(time.node(j));
            }
            b -= left * lift_left + right * lift_right;
        }
        loads[static_cast<std::size_t>(n)] = std::move(b);
    }

    SolutionGrid grid;
    grid.meta.N = N;
    grid.meta.M = M;
    grid.meta.alpha0 = alpha0;
    grid.meta.sigma = problem.sigma;
    grid.meta.rate = problem.rate;
    grid.meta.expiry = problem.expiry;
    grid.meta.jacobi_nodes = options.jacobi_nodes;
    grid.meta.legendre_nodes = 0;
    grid.meta.warnings = problem.diagnostics;
    grid.x_nodes = fem.nodes;
    grid.w.assign(static_cast<std::size_t>(N + 1) * static_cast<std::size_t>(size), 0.0);
    grid.u.assign(grid.w.size(), 0.0);

    // Forward block substitution.
    std::vector<Eigen::VectorXd> W(static_cast<std::size_t>(N) + 1, Eigen::VectorXd::Zero(size));
    for (int n = 1; n <= N; ++n) {
        const auto& row = blocks[static_cast<std::size_t>(n)];
        Eigen::VectorXd rhs = loads[static_cast<std::size_t>(n)];
        for (int j = 1; j < n; ++j)
            rhs -= row[static_cast<std::size_t>(j)] * W[static_cast<std::size_t>(j)];
        W[static_cast<std::size_t>(n)] = row[static_cast<std::size_t>(n)].partialPivLu().solve(rhs);
        auto dst = grid.w_row(n);
        for (Eigen::Index i = 0; i < size; ++i)
            dst[static_cast<std::size_t>(i)] = W[static_cast<std::size_t>(n)](i);
    }
    for (int n = 0; n <= N; ++n) {
        const auto u = reconstruct_u(grid.w_row(n), problem, fem.interior_nodes(), time.node(n));
        std::copy(u.begin(), u.end(), grid.u_row(n).begin());
    }
    return grid;
}

} // namespace vebs
