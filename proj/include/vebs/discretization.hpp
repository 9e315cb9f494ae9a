#pragma once

// Uniform time grid, product-quadrature convolution weights and the P1
// finite element space.
//
// On a uniform grid the convolution weights depend only on the lag
// l = n - j. For a kernel K with antiderivatives K1, K2,
//
//   sum_j w(n,j) v(t_j) = int_0^{t_n} K(t_n - s) v_I(s) ds,
//
// where v_I is the piecewise-linear interpolant of v. The weights
//   w(n,j) = 1/tau int_{t_{n-1}}^{t_n} int_{t_{j-1}}^{min(t,t_j)} K(t-s) ds dt
// are exactly these hat-function integrals.

#include "vebs/kernel.hpp"
#include "vebs/model.hpp"

#include <span>
#include <vector>

namespace vebs {

class TimeGrid {
public:
    TimeGrid(int count, double expiry);

    int count() const { return count_; }
    double step() const { return step_; }
    double expiry() const { return expiry_; }
    /// t_n = n tau, with t_N = T exactly.
    double node(int n) const;

private:
    int count_;
    double expiry_;
    double step_;
};

struct LagWeights {
    /// w_l for the q' convolution, l = 0..N-1.
    std::vector<double> q_lags;
    /// w~_l for the beta_{alpha0} convolution, l = 0..N-1.
    std::vector<double> beta_lags;
    /// Weight of the t_0 value in the beta convolution at level n; index n,
    /// entry 0 unused.
    std::vector<double> beta_node0;
    /// Hat weights of q itself (boundary lift); empty when not needed.
    std::vector<double> q_hat_lags;
    std::vector<double> q_hat_node0;

    double q(int n, int j) const { return q_lags[static_cast<std::size_t>(n - j)]; }
    double beta(int n, int j) const { return beta_lags[static_cast<std::size_t>(n - j)]; }
};

/// B1(t) = t^{alpha0} / Gamma(alpha0 + 1), the convolution of beta_{alpha0}
/// with a unit step.
double beta_step_response(double alpha0, double t);

/// B2(t) = t^{alpha0 + 1} / Gamma(alpha0 + 2).
double beta_ramp_response(double alpha0, double t);

struct BetaWeights {
    std::vector<double> lags;
    std::vector<double> node0;
};

/// Closed-form beta weights through B1 and B2.
BetaWeights beta_lag_weights(double alpha0, const TimeGrid& grid);

/// Values of q on the Gauss-Legendre points of every time cell,
/// q_table[m][k] = q(m tau + theta_k), m = 0..N-1.
struct QTable {
    std::vector<std::vector<double>> values;
    std::vector<double> unit_nodes;  // theta_k / tau in (0,1)
    std::vector<double> unit_weights;  // sum to 1
    // The first cell is graded geometrically towards t = 0, where q is
    // only Hoelder continuous.
    std::vector<double> first_nodes;
    std::vector<double> first_weights;
    std::vector<double> first_values;
};

inline constexpr int kFirstCellGrading = 24;

QTable tabulate_q(const VariableExponent& alpha, const JacobiRule& rule, const TimeGrid& grid,
                  const LegendreRule& gl);

/// w_0 = 1/tau int_0^tau (q - 1), w_l = 1/tau int_0^tau [q(.+l tau) - q(.+(l-1) tau)].
///
/// alpha'(0) = 0 is required unless `allow_nonflat` is set; the weights
/// only use q, which stays bounded either way.
std::vector<double> q_lag_weights(const VariableExponent& alpha, const TimeGrid& grid,
                                  const LegendreRule& gl, const JacobiRule& rule,
                                  bool allow_nonflat = false);
std::vector<double> q_lag_weights(const QTable& table);

struct QHatWeights {
    std::vector<double> lags;
    std::vector<double> node0;
};

/// Hat-function weights of q for the convolution q * g.
QHatWeights q_hat_weights(const QTable& table, const TimeGrid& grid);

LagWeights build_lag_weights(const VariableExponent& alpha, const TimeGrid& grid,
                             const JacobiRule& rule, const LegendreRule& gl, bool with_q_hat,
                             bool allow_nonflat = false);

/// Symmetric tridiagonal matrix on interior nodes.
struct Tridiagonal {
    std::vector<double> diag;
    std::vector<double> off;  // off[i] couples i and i+1

    std::size_t size() const { return diag.size(); }
    void multiply_add(std::span<const double> x, double scale, std::span<double> y) const;
};

/// P1 elements on a uniform mesh with Dirichlet rows removed.
struct FemSpace {
    int cell_count = 0;
    double h = 0.0;
    Interval x_domain;
    std::vector<double> nodes;  // x_0..x_M, boundary included
    Tridiagonal mass;
    Tridiagonal stiffness;

    std::size_t interior_size() const { return static_cast<std::size_t>(cell_count - 1); }
    std::span<const double> interior_nodes() const
    {
        return std::span<const double>(nodes).subspan(1, interior_size());
    }
};

FemSpace assemble_fem(int M, Interval x_domain);

/// Load vectors (F^n, Lambda) for n = 1..N.
///
/// Spatial projections of the data are computed once with three-point
/// Gauss-Legendre per cell; each level then combines them with the lag
/// weights.
class LoadAssembler {
public:
    LoadAssembler(const TransformedProblem& problem, const FemSpace& fem, const TimeGrid& grid,
                  const LagWeights& weights);

    std::vector<double> load(int n) const;

private:
    const TransformedProblem& problem_;
    const FemSpace& fem_;
    const TimeGrid& grid_;
    const LagWeights& weights_;
    std::vector<double> static_part_;                 // -s^2/2 (c*',L') - lambda (c*,L)
    std::vector<std::vector<double>> chi_proj_;       // (chi(., t_j), L), j = 0..N
    std::vector<double> lift_left_proj_;              // (e^{-kx} left_shape, L)
    std::vector<double> lift_right_proj_;
};

std::vector<double> assemble_load(const TransformedProblem& problem, const FemSpace& fem,
                                  const TimeGrid& grid, const LagWeights& weights, int n);

/// Three-point Gauss-Legendre on [0,1].
struct CellRule {
    static constexpr int points = 3;
    static const double nodes[points];
    static const double weights[points];
};

} // namespace vebs
