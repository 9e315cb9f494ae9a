#include "vebs/errors.hpp"
#include "vebs/harness.hpp"
#include "vebs/solver.hpp"

#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <cstring>
#include <numbers>

using namespace vebs;

namespace {

SolverOptions permissive()
{
    SolverOptions o;
    o.allow_nonflat_exponent = true;
    return o;
}

double max_difference(const std::vector<double>& a, const std::vector<double>& b)
{
    REQUIRE(a.size() == b.size());
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

TransformedProblem zero_problem(const VariableExponent& alpha)
{
    ModelSpec spec = example_model(2);
    spec.terminal_payoff = [](double) { return 0.0; };
    spec.payoff_log_slope = [](double) { return 0.0; };
    return build_transformed_problem(spec, alpha);
}

Eigen::MatrixXd dense(const Tridiagonal& t)
{
    const Eigen::Index n = static_cast<Eigen::Index>(t.size());
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        A(i, i) = t.diag[static_cast<std::size_t>(i)];
        if (i + 1 < n)
            A(i, i + 1) = A(i + 1, i) = t.off[static_cast<std::size_t>(i)];
    }
    return A;
}

} // namespace

TEST_CASE("step with zero load and history")
{
    const auto p = example_problem(2, 0.5);
    const int N = 3;
    const int M = 5;
    const TimeGrid g(N, 1.0);
    const auto fem = assemble_fem(M, p.x_domain);
    const auto w = build_lag_weights(p.alpha, g, build_jacobi_rule(0.5, 32), build_legendre_rule(8), false);
    SolutionGrid state;
    state.meta.N = N;
    state.meta.M = M;
    state.w.assign(static_cast<std::size_t>((N + 1) * (M - 1)), 0.0);
    const auto out = step(2, state, p, fem, w, std::vector<double>(M - 1, 0.0));
    for (double v : out)
        CHECK(v == 0.0);
}

TEST_CASE("single interior node")
{
    const auto p = example_problem(2, 0.5);
    const auto grid = solve_all(p, 1, 2);
    const TimeGrid g(1, 1.0);
    const auto fem = assemble_fem(2, p.x_domain);
    const auto w = build_lag_weights(p.alpha, g, build_jacobi_rule(0.5, 32), build_legendre_rule(8), false);
    const double a = 1.0 + w.q_lags[0] + p.lambda * w.beta_lags[0];
    const double b = 0.5 * p.sigma * p.sigma * w.beta_lags[0];
    const double h = 0.5;
    const double load = assemble_load(p, fem, g, w, 1)[0];
    CHECK(grid.w_row(1)[0] == doctest::Approx(load / (a * 4.0 * h / 6.0 + b * 2.0 / h)).epsilon(1e-14));
    CHECK(grid.w_row(0)[0] == 0.0);
}

TEST_CASE("two-step recursion by hand at N = 2, M = 3")
{
    for (int id : {1, 2, 3}) {
        const auto p = example_problem(id, 0.6);
        const auto grid = solve_all(p, 2, 3, permissive());
        const TimeGrid g(2, 1.0);
        const auto fem = assemble_fem(3, p.x_domain);
        const auto w = build_lag_weights(p.alpha, g, build_jacobi_rule(0.6, 32), build_legendre_rule(8),
                                         false, true);
        const Eigen::MatrixXd Mass = dense(fem.mass);
        const Eigen::MatrixXd K = dense(fem.stiffness);
        const double hv = 0.5 * p.sigma * p.sigma;
        auto block = [&](int l) {
            return ((w.q_lags[static_cast<std::size_t>(l)] + p.lambda * w.beta_lags[static_cast<std::size_t>(l)]) * Mass +
                    hv * w.beta_lags[static_cast<std::size_t>(l)] * K).eval();
        };
        const Eigen::MatrixXd A0 = Mass + block(0);
        const Eigen::MatrixXd A1 = block(1);
        const auto b1v = assemble_load(p, fem, g, w, 1);
        const auto b2v = assemble_load(p, fem, g, w, 2);
        const Eigen::Vector2d b1(b1v[0], b1v[1]);
        const Eigen::Vector2d b2(b2v[0], b2v[1]);
        const Eigen::Vector2d W1 = A0.inverse() * b1;
        const Eigen::Vector2d W2 = A0.inverse() * (b2 - A1 * W1);
        for (int i = 0; i < 2; ++i) {
            CHECK(grid.w_row(1)[static_cast<std::size_t>(i)] == doctest::Approx(W1(i)).epsilon(1e-13));
            CHECK(grid.w_row(2)[static_cast<std::size_t>(i)] == doctest::Approx(W2(i)).epsilon(1e-13));
        }
    }
}

TEST_CASE("agreement with the dense oracle")
{
    for (int id : {1, 2, 3}) {
        for (double a0 : {0.8}) {
            const auto p = example_problem(id, a0);
            for (auto [N, M] : {std::pair{2, 3}, std::pair{4, 4}, std::pair{8, 8}}) {
                const auto fast = solve_all(p, N, M, permissive());
                const auto slow = dense_oracle_solve(p, N, M, permissive());
                CHECK(max_difference(fast.w, slow.w) <= 1e-10);
                CHECK(max_difference(fast.u, slow.u) <= 1e-10);
            }
        }
    }
}

TEST_CASE("dense oracle refuses large instances")
{
    const auto p = example_problem(2, 0.5);
    CHECK_THROWS_AS(dense_oracle_solve(p, 128, 64), ConfigurationError);
}

TEST_CASE("zero data stays zero")
{
    const auto p = zero_problem(VariableExponent::constant(0.5, 1.0));
    const auto grid = solve_all(p, 16, 8);
    for (double v : grid.w)
        CHECK(v == 0.0);
    for (double v : grid.u)
        CHECK(v == 0.0);
    const auto slow = dense_oracle_solve(p, 4, 4);
    for (double v : slow.w)
        CHECK(v == 0.0);
}

TEST_CASE("constant data with reaction balanced by forcing")
{
    // u = 1 solves the log-price problem with f = r and unit boundary data.
    auto spec = example_model(2);
    spec.terminal_payoff = [](double) { return 1.0; };
    spec.payoff_log_slope = [](double) { return 0.0; };
    spec.left_boundary = [](double) { return 1.0; };
    spec.right_boundary = [](double) { return 1.0; };
    spec.left_boundary_rate = [](double) { return 0.0; };
    spec.right_boundary_rate = [](double) { return 0.0; };
    spec.forcing = [r = spec.rate](double, double) { return r; };
    const auto p = build_transformed_problem(spec, example_exponent(2, 0.5));
    const auto grid = solve_all(p, 8, 8);
    for (double v : grid.u)
        CHECK(v == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("moving boundary data converges")
{
    // u = (1 + t) x with constant alpha; the forcing follows from
    // d^alpha t = t^{1-alpha} / Gamma(2 - alpha).
    const double a0 = 0.5;
    auto spec = example_model(2);
    const double r = spec.rate;
    const double s2 = spec.sigma * spec.sigma;
    spec.terminal_payoff = [](double S) { return std::log(S); };
    spec.payoff_log_slope = [](double) { return 1.0; };
    spec.right_boundary = [](double t) { return 2.0 - t; };  // calendar time
    spec.right_boundary_rate = [](double) { return -1.0; };
    spec.forcing = [=](double x, double t) {
        return x * std::pow(t, 1.0 - a0) / std::tgamma(2.0 - a0) - (r - 0.5 * s2) * (1.0 + t) +
               r * x * (1.0 + t);
    };
    const auto p = build_transformed_problem(spec, VariableExponent::constant(a0, 1.0));
    REQUIRE(p.homogenization.has_value());
    double previous = 1.0;
    for (int N : {8, 32, 128}) {
        const auto grid = solve_all(p, N, 8);
        double err = 0.0;
        for (int n = 0; n <= N; ++n) {
            const double t = static_cast<double>(n) / N;
            const auto u = grid.u_row(n);
            for (std::size_t j = 0; j < u.size(); ++j)
                err = std::max(err, std::abs(u[j] - (1.0 + t) * grid.x_nodes[j + 1]));
        }
        CHECK(err < 0.5 * previous);
        previous = err;
    }
    CHECK(previous < 1e-3);
}

TEST_CASE("constant exponent code paths agree bitwise")
{
    const auto spec = example_model(2);
    const auto a = build_transformed_problem(spec, VariableExponent::constant(0.5, 1.0));
    const auto b = build_transformed_problem(
        spec, VariableExponent([](double t) { return 0.5 - 0.0 * t; }, [](double) { return 0.0; },
                               [](double) { return 0.0; }, 1.0));
    const auto ga = solve_all(a, 16, 8);
    const auto gb = solve_all(b, 16, 8);
    REQUIRE(ga.u.size() == gb.u.size());
    CHECK(std::memcmp(ga.u.data(), gb.u.data(), ga.u.size() * sizeof(double)) == 0);
}

TEST_CASE("non-flat exponents need consent")
{
    const auto p = example_problem(1, 0.4);
    CHECK_THROWS_AS(solve_all(p, 4, 4), PreconditionError);
    const auto grid = solve_all(p, 4, 4, permissive());
    CHECK_FALSE(grid.meta.warnings.empty());
}

TEST_CASE("step matrices of the presets are positive definite")
{
    for (int id : {1, 2, 3}) {
        for (double a0 : {0.1, 0.4, 0.7, 0.9}) {
            const auto p = example_problem(id, a0);
            for (int N : {4, 64, 512}) {
                const TimeGrid g(N, 1.0);
                const auto fem = assemble_fem(16, p.x_domain);
                const auto w = build_lag_weights(p.alpha, g, build_jacobi_rule(a0, 32),
                                                 build_legendre_rule(8), false, true);
                CHECK_NOTHROW(make_step_system(p, fem, w));
                CHECK(make_step_system(p, fem, w).a() > 0.0);
            }
            CHECK(solve_all(p, 64, 8, permissive()).meta.step_size_ok);
        }
    }
    const auto fem = assemble_fem(4, {0.0, 1.0});
    CHECK_THROWS_AS(StepSystem(-0.1, 0.5, fem), NumericalError);
}

TEST_CASE("discrete stability under time refinement")
{
    for (int id : {1, 2, 3}) {
        const auto p = example_problem(id, 0.5);
        double previous = 0.0;
        for (int N = 16; N <= 256; N *= 2) {
            const auto grid = solve_all(p, N, 16, permissive());
            const double tau = 1.0 / N;
            const double h = 1.0 / 16;
            double sum = 0.0;
            for (int n = 1; n <= N; ++n)
                for (double v : grid.u_row(n))
                    sum += h * v * v;
            const double norm = std::sqrt(tau * sum);
            if (previous > 0.0)
                CHECK(norm <= 1.05 * previous);
            previous = norm;
        }
    }
}

TEST_CASE("solution grid invariants")
{
    const auto p = example_problem(3, 0.7);
    const auto grid = solve_all(p, 8, 8);
    for (double v : grid.w_row(0))
        CHECK(v == 0.0);
    for (double v : grid.u)
        CHECK(std::isfinite(v));
    CHECK(grid.meta.N == 8);
    CHECK(grid.x_nodes.size() == 9);
    CHECK_THROWS_AS(solve_all(p, 0, 8), ConfigurationError);
    CHECK_THROWS_AS(solve_all(p, 8, 1), ConfigurationError);
}
