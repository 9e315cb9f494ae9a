#include "vebs/discretization.hpp"

#include "vebs/errors.hpp"

#include <cmath>

namespace vebs {

const double CellRule::nodes[CellRule::points] = {
    0.5 - 0.3872983346207416885,  // sqrt(15)/10
    0.5,
    0.5 + 0.3872983346207416885,
};
const double CellRule::weights[CellRule::points] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};

TimeGrid::TimeGrid(int count, double expiry)
    : count_(count)
    , expiry_(expiry)
    , step_(expiry / count)
{
    if (count < 1)
        throw DomainError("TimeGrid: need at least one step");
    if (!(expiry > 0.0))
        throw DomainError("TimeGrid: expiry must be positive");
}

double TimeGrid::node(int n) const
{
    if (n == count_)
        return expiry_;
    return n * step_;
}

namespace {

// n^p - (n-1)^p without cancellation for large n.
double power_gap(double n, double p)
{
    if (n == 1.0)
        return 1.0;
    return -std::pow(n, p) * std::expm1(p * std::log1p(-1.0 / n));
}

// (l+1)^p - 2 l^p + (l-1)^p for l >= 1.
double power_second_difference(double l, double p)
{
    const double inv = 1.0 / l;
    const double down = l == 1.0 ? -1.0 : std::expm1(p * std::log1p(-inv));
    return std::pow(l, p) * (std::expm1(p * std::log1p(inv)) + down);
}

} // namespace

double beta_step_response(double alpha0, double t)
{
    if (t <= 0.0)
        return 0.0;
    return std::pow(t, alpha0) / std::tgamma(alpha0 + 1.0);
}

double beta_ramp_response(double alpha0, double t)
{
    if (t <= 0.0)
        return 0.0;
    return std::pow(t, alpha0 + 1.0) / std::tgamma(alpha0 + 2.0);
}

BetaWeights beta_lag_weights(double alpha0, const TimeGrid& grid)
{
    if (!(alpha0 > 0.0 && alpha0 < 1.0))
        throw DomainError("beta_lag_weights: alpha0 must lie in (0,1)");
    const int N = grid.count();
    const double tau = grid.step();
    const double p = alpha0 + 1.0;
    // B2(l tau) / tau = scale * l^p
    const double scale = std::pow(tau, alpha0) / std::tgamma(alpha0 + 2.0);

    BetaWeights w;
    w.lags.resize(static_cast<std::size_t>(N));
    w.lags[0] = scale;
    for (int l = 1; l < N; ++l)
        w.lags[static_cast<std::size_t>(l)] = scale * power_second_difference(l, p);

    // Hat at t_0 seen from t_n: B1(t_n) - (B2(t_n) - B2(t_{n-1})) / tau.
    w.node0.assign(static_cast<std::size_t>(N) + 1, 0.0);
    for (int n = 1; n <= N; ++n) {
        w.node0[static_cast<std::size_t>(n)] =
            beta_step_response(alpha0, grid.node(n)) - scale * power_gap(n, p);
    }
    return w;
}

QTable tabulate_q(const VariableExponent& alpha, const JacobiRule& rule, const TimeGrid& grid,
                  const LegendreRule& gl)
{
    QTable table;
    const std::size_t K = gl.size();
    table.unit_nodes.resize(K);
    table.unit_weights.resize(K);
    for (std::size_t k = 0; k < K; ++k) {
        table.unit_nodes[k] = 0.5 * (gl.nodes[k] + 1.0);
        table.unit_weights[k] = 0.5 * gl.weights[k];
    }
    const int N = grid.count();
    const double tau = grid.step();
    table.values.assign(static_cast<std::size_t>(N), std::vector<double>(K));
    for (int m = 0; m < N; ++m) {
        for (std::size_t k = 0; k < K; ++k) {
            const double t = (m + table.unit_nodes[k]) * tau;
            table.values[static_cast<std::size_t>(m)][k] = eval_q(alpha, rule, t);
        }
    }
    // Pieces [2^-(g+1), 2^-g] for g < kFirstCellGrading, then [0, 2^-G].
    for (int g = 0; g <= kFirstCellGrading; ++g) {
        const double hi = std::ldexp(1.0, -g);
        const double lo = g == kFirstCellGrading ? 0.0 : 0.5 * hi;
        for (std::size_t k = 0; k < K; ++k) {
            const double theta = lo + (hi - lo) * table.unit_nodes[k];
            table.first_nodes.push_back(theta);
            table.first_weights.push_back((hi - lo) * table.unit_weights[k]);
            table.first_values.push_back(eval_q(alpha, rule, theta * tau));
        }
    }
    return table;
}

std::vector<double> q_lag_weights(const QTable& table)
{
    const std::size_t N = table.values.size();
    const std::size_t K = table.unit_weights.size();
    std::vector<double> w(N, 0.0);
    double first = 0.0;
    for (std::size_t k = 0; k < table.first_weights.size(); ++k)
        first += table.first_weights[k] * (table.first_values[k] - 1.0);
    if (N > 0)
        w[0] = first;
    for (std::size_t l = 1; l < N; ++l) {
        double s = 0.0;
        for (std::size_t k = 0; k < K; ++k) {
            const double prev = l == 1 ? 0.0 : table.values[l - 1][k] - 1.0;
            s += table.unit_weights[k] * (table.values[l][k] - 1.0 - prev);
        }
        w[l] = l == 1 ? s - first : s;
    }
    return w;
}

std::vector<double> q_lag_weights(const VariableExponent& alpha, const TimeGrid& grid,
                                  const LegendreRule& gl, const JacobiRule& rule,
                                  bool allow_nonflat)
{
    if (!alpha.flat_at_zero() && !allow_nonflat)
        throw PreconditionError("q_lag_weights: requires alpha'(0) = 0");
    return q_lag_weights(tabulate_q(alpha, rule, grid, gl));
}

QHatWeights q_hat_weights(const QTable& table, const TimeGrid& grid)
{
    const std::size_t N = table.values.size();
    const std::size_t K = table.unit_weights.size();
    const double tau = grid.step();
    const auto& q = table.values;
    const auto& th = table.unit_nodes;
    const auto& wk = table.unit_weights;

    QHatWeights w;
    w.lags.assign(N, 0.0);
    w.node0.assign(N + 1, 0.0);
    // Moments int q(theta tau) (1 - theta) and int q(theta tau) theta per cell.
    std::vector<double> down(N, 0.0);
    std::vector<double> up(N, 0.0);
    for (std::size_t k = 0; k < table.first_weights.size(); ++k) {
        const double v = table.first_weights[k] * table.first_values[k];
        down[0] += v * (1.0 - table.first_nodes[k]);
        up[0] += v * table.first_nodes[k];
    }
    for (std::size_t m = 1; m < N; ++m) {
        for (std::size_t k = 0; k < K; ++k) {
            down[m] += wk[k] * q[m][k] * (1.0 - th[k]);
            up[m] += wk[k] * q[m][k] * th[k];
        }
    }
    w.lags[0] = tau * down[0];
    for (std::size_t l = 1; l < N; ++l)
        w.lags[l] = tau * (up[l - 1] + down[l]);
    for (std::size_t n = 1; n <= N; ++n)
        w.node0[n] = tau * up[n - 1];
    return w;
}

LagWeights build_lag_weights(const VariableExponent& alpha, const TimeGrid& grid,
                             const JacobiRule& rule, const LegendreRule& gl, bool with_q_hat,
                             bool allow_nonflat)
{
    if (!alpha.flat_at_zero() && !allow_nonflat)
        throw PreconditionError("build_lag_weights: requires alpha'(0) = 0");
    const QTable table = tabulate_q(alpha, rule, grid, gl);
    BetaWeights beta = beta_lag_weights(alpha.alpha0(), grid);

    LagWeights w;
    w.q_lags = q_lag_weights(table);
    w.beta_lags = std::move(beta.lags);
    w.beta_node0 = std::move(beta.node0);
    if (with_q_hat) {
        QHatWeights hat = q_hat_weights(table, grid);
        w.q_hat_lags = std::move(hat.lags);
        w.q_hat_node0 = std::move(hat.node0);
    }
    return w;
}

void Tridiagonal::multiply_add(std::span<const double> x, double scale, std::span<double> y) const
{
    const std::size_t n = diag.size();
    for (std::size_t i = 0; i < n; ++i) {
        double v = diag[i] * x[i];
        if (i > 0)
            v += off[i - 1] * x[i - 1];
        if (i + 1 < n)
            v += off[i] * x[i + 1];
        y[i] += scale * v;
    }
}

FemSpace assemble_fem(int M, Interval x_domain)
{
    if (M < 2)
        throw DomainError("assemble_fem: need at least two cells");
    if (!(x_domain.lo < x_domain.hi))
        throw DomainError("assemble_fem: empty domain");

    FemSpace fem;
    fem.cell_count = M;
    fem.x_domain = x_domain;
    fem.h = x_domain.length() / M;
    fem.nodes.resize(static_cast<std::size_t>(M) + 1);
    for (int i = 0; i <= M; ++i)
        fem.nodes[static_cast<std::size_t>(i)] = i == M ? x_domain.hi : x_domain.lo + i * fem.h;

    const std::size_t n = fem.interior_size();
    const double h = fem.h;
    fem.mass.diag.assign(n, 4.0 * h / 6.0);
    fem.mass.off.assign(n - 1, h / 6.0);
    fem.stiffness.diag.assign(n, 2.0 / h);
    fem.stiffness.off.assign(n - 1, -1.0 / h);
    return fem;
}

namespace {

// (f, Lambda_i) for every interior hat, three-point Gauss per cell.
template <typename F>
std::vector<double> project(const FemSpace& fem, F&& f)
{
    const std::size_t n = fem.interior_size();
    std::vector<double> out(n, 0.0);
    const double h = fem.h;
    for (int c = 0; c < fem.cell_count; ++c) {
        const double x0 = fem.nodes[static_cast<std::size_t>(c)];
        double left = 0.0;
        double right = 0.0;
        for (int k = 0; k < CellRule::points; ++k) {
            const double xi = CellRule::nodes[k];
            const double wv = CellRule::weights[k] * h * f(x0 + h * xi);
            left += wv * (1.0 - xi);
            right += wv * xi;
        }
        if (c >= 1)
            out[static_cast<std::size_t>(c - 1)] += left;
        if (c + 1 <= fem.cell_count - 1)
            out[static_cast<std::size_t>(c)] += right;
    }
    return out;
}

// (f, Lambda_i') for every interior hat.
template <typename F>
std::vector<double> project_slope(const FemSpace& fem, F&& f)
{
    const std::size_t n = fem.interior_size();
    std::vector<double> out(n, 0.0);
    const double h = fem.h;
    for (int c = 0; c < fem.cell_count; ++c) {
        const double x0 = fem.nodes[static_cast<std::size_t>(c)];
        double integral = 0.0;
        for (int k = 0; k < CellRule::points; ++k)
            integral += CellRule::weights[k] * h * f(x0 + h * CellRule::nodes[k]);
        // Left node's hat falls with slope -1/h, right node's rises.
        if (c >= 1)
            out[static_cast<std::size_t>(c - 1)] -= integral / h;
        if (c + 1 <= fem.cell_count - 1)
            out[static_cast<std::size_t>(c)] += integral / h;
    }
    return out;
}

} // namespace

LoadAssembler::LoadAssembler(const TransformedProblem& problem, const FemSpace& fem,
                             const TimeGrid& grid, const LagWeights& weights)
    : problem_(problem)
    , fem_(fem)
    , grid_(grid)
    , weights_(weights)
{
    if (static_cast<int>(weights.beta_lags.size()) != grid.count())
        throw ConfigurationError("LoadAssembler: weights do not match the time grid");

    const double half_var = 0.5 * problem.sigma * problem.sigma;
    const auto slope = project_slope(fem, problem.c_star_prime);
    const auto value = project(fem, problem.c_star);
    static_part_.resize(fem.interior_size());
    for (std::size_t i = 0; i < static_part_.size(); ++i)
        static_part_[i] = -half_var * slope[i] - problem.lambda * value[i];

    chi_proj_.resize(static_cast<std::size_t>(grid.count()) + 1);
    for (int j = 0; j <= grid.count(); ++j) {
        const double t = grid.node(j);
        chi_proj_[static_cast<std::size_t>(j)] =
            project(fem, [&](double x) { return problem.chi(x, t); });
    }

    if (problem.homogenization) {
        if (weights.q_hat_lags.empty())
            throw ConfigurationError("LoadAssembler: boundary lift needs q hat weights");
        const auto& hom = *problem.homogenization;
        const double kappa = problem.weight.exponent_coeff;
        lift_left_proj_ =
            project(fem, [&](double x) { return std::exp(-kappa * x) * hom.left_shape(x); });
        lift_right_proj_ =
            project(fem, [&](double x) { return std::exp(-kappa * x) * hom.right_shape(x); });
    }
}

std::vector<double> LoadAssembler::load(int n) const
{
    if (n < 1 || n > grid_.count())
        throw DomainError("assemble_load: level out of range");
    const std::size_t size = fem_.interior_size();
    std::vector<double> b(size);

    const double step = beta_step_response(problem_.alpha.alpha0(), grid_.node(n));
    for (std::size_t i = 0; i < size; ++i)
        b[i] = step * static_part_[i];

    auto axpy = [&](double a, const std::vector<double>& x) {
        if (a == 0.0)
            return;
        for (std::size_t i = 0; i < size; ++i)
            b[i] += a * x[i];
    };

    for (int j = 1; j <= n; ++j)
        axpy(weights_.beta(n, j), chi_proj_[static_cast<std::size_t>(j)]);
    axpy(weights_.beta_node0[static_cast<std::size_t>(n)], chi_proj_[0]);

    if (problem_.homogenization) {
        const auto& hom = *problem_.homogenization;
        double left = weights_.q_hat_node0[static_cast<std::size_t>(n)] * hom.left_rate(0.0);
        double right = weights_.q_hat_node0[static_cast<std::size_t>(n)] * hom.right_rate(0.0);
        for (int j = 1; j <= n; ++j) {
            const double w = weights_.q_hat_lags[static_cast<std::size_t>(n - j)];
            const double t = grid_.node(j);
            left += w * hom.left_rate(t);
            right += w * hom.right_rate(t);
        }
        axpy(-left, lift_left_proj_);
        axpy(-right, lift_right_proj_);
    }
    return b;
}

std::vector<double> assemble_load(const TransformedProblem& problem, const FemSpace& fem,
                                  const TimeGrid& grid, const LagWeights& weights, int n)
{
    return LoadAssembler(problem, fem, grid, weights).load(n);
}

} // namespace vebs
