#pragma once

// Time stepping for the fully discrete scheme: at each level n solve
//
//   [a M + b K] W^n = F^n - sum_{j<n} [(w_{n-j} + lambda w~_{n-j}) M
//                                      + sigma^2/2 w~_{n-j} K] W^j
//
// with a = 1 + w_0 + lambda w~_0 and b = sigma^2/2 w~_0. M and K are the P1
// mass and stiffness matrices on interior nodes.

#include "vebs/discretization.hpp"
#include "vebs/model.hpp"

#include <span>
#include <string>
#include <vector>

namespace vebs {

struct SolverOptions {
    int jacobi_nodes = kDefaultJacobiNodes;
    int legendre_nodes = kDefaultLegendreNodes;
    /// Run exponents with alpha'(0) != 0; a warning is recorded.
    bool allow_nonflat_exponent = false;
};

struct SolutionMeta {
    int N = 0;
    int M = 0;
    double alpha0 = 0.0;
    double sigma = 0.0;
    double rate = 0.0;
    double expiry = 0.0;
    int jacobi_nodes = 0;
    int legendre_nodes = 0;
    /// max_l |w_l| / tau, the constant in |w_l| <= C tau.
    double q_lag_bound = 0.0;
    /// tau < 1 / (2 C), the step-size condition of the stability argument.
    bool step_size_ok = false;
    std::vector<std::string> warnings;
};

struct SolutionGrid {
    SolutionMeta meta;
    std::vector<double> x_nodes;  // all M+1 mesh nodes
    std::vector<double> w;        // (N+1) x (M-1), row-major
    std::vector<double> u;

    std::size_t interior() const { return static_cast<std::size_t>(meta.M - 1); }
    std::span<const double> w_row(int n) const { return row(w, n); }
    std::span<const double> u_row(int n) const { return row(u, n); }
    std::span<double> w_row(int n) { return row(w, n); }
    std::span<double> u_row(int n) { return row(u, n); }

private:
    std::span<const double> row(const std::vector<double>& v, int n) const
    {
        return std::span<const double>(v).subspan(static_cast<std::size_t>(n) * interior(),
                                                  interior());
    }
    std::span<double> row(std::vector<double>& v, int n)
    {
        return std::span<double>(v).subspan(static_cast<std::size_t>(n) * interior(), interior());
    }
};

/// a M + b K, factored once as L D L^T.
class StepSystem {
public:
    StepSystem(double a, double b, const FemSpace& fem);

    double a() const { return a_; }
    double b() const { return b_; }
    const Tridiagonal& matrix() const { return matrix_; }

    std::vector<double> solve(std::span<const double> rhs) const;

private:
    double a_;
    double b_;
    Tridiagonal matrix_;
    std::vector<double> d_;
    std::vector<double> l_;
};

StepSystem make_step_system(const TransformedProblem& problem, const FemSpace& fem,
                            const LagWeights& weights);

/// One level of the scheme; rows 1..n-1 of `state.w` must be filled.
std::vector<double> step(int n, const SolutionGrid& state, const TransformedProblem& problem,
                         const FemSpace& fem, const LagWeights& weights,
                         std::span<const double> load);

SolutionGrid solve_all(const TransformedProblem& problem, int N, int M,
                       const SolverOptions& options = {});

/// Largest N*M accepted by the dense oracle.
inline constexpr int kDenseOracleCap = 4096;

/// Independent reference solve for small instances: every weight w(n,j) is
/// recomputed by adaptive double quadrature of its defining integral, the
/// block lower-triangular system is assembled with dense blocks and solved
/// by forward block substitution.
SolutionGrid dense_oracle_solve(const TransformedProblem& problem, int N, int M,
                                const SolverOptions& options = {});

} // namespace vebs
