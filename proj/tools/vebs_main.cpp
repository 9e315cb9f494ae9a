// Command-line driver for the convergence studies.
//
//   vebs --example 1 --alpha0 0.4 --axis time --levels 4 --out ex1.csv
//
// Exit codes: 0 success, 2 configuration error, 3 numerical failure,
// 1 I/O failure.

#include "vebs/errors.hpp"
#include "vebs/harness.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <iostream>

namespace {

// Starting sizes of the reference ladders.
int default_N(int example, vebs::RefineAxis axis)
{
    if (axis == vebs::RefineAxis::space)
        return 32;
    return example == 1 ? 16 : example == 2 ? 32 : 4;
}

int default_M(int example, vebs::RefineAxis axis)
{
    if (axis == vebs::RefineAxis::time)
        return 32;
    return example == 3 ? 4 : 32;
}

double oracle_check(const vebs::ExperimentConfig& config)
{
    constexpr int N = 4;
    constexpr int M = 4;
    const auto problem = vebs::example_problem(config.example_id, config.alpha0, config.forcing);
    const auto options = vebs::solver_options(config);
    const auto fast = vebs::solve_all(problem, N, M, options);
    const auto slow = vebs::dense_oracle_solve(problem, N, M, options);
    double diff = 0.0;
    for (std::size_t i = 0; i < fast.u.size(); ++i)
        diff = std::max(diff, std::abs(fast.u[i] - slow.u[i]));
    return diff;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Variable-exponent subdiffusive Black-Scholes solver: convergence studies"};

    int example = 1;
    double alpha0 = 0.4;
    std::string axis_text = "time";
    std::string forcing_text = "stated";
    int N = 0;
    int M = 0;
    int levels = 4;
    std::string out;
    int jacobi_nodes = vebs::kDefaultJacobiNodes;
    int legendre_nodes = vebs::kDefaultLegendreNodes;
    bool oracle = false;

    app.add_option("--example", example, "Reference example")->check(CLI::IsMember({1, 2, 3}));
    app.add_option("--alpha0", alpha0, "Initial fractional order alpha(0)");
    app.add_option("--axis", axis_text, "Refinement axis")->check(CLI::IsMember({"time", "space"}));
    app.add_option("--forcing", forcing_text, "Forcing of examples 1 and 3")
        ->check(CLI::IsMember({"stated", "balanced"}));
    app.add_option("--N", N, "Time steps on the coarsest level");
    app.add_option("--M", M, "Spatial cells on the coarsest level");
    app.add_option("--levels", levels, "Number of ladder levels")->check(CLI::PositiveNumber);
    app.add_option("--out", out, "CSV output path");
    app.add_option("--jacobi-nodes", jacobi_nodes, "Gauss-Jacobi nodes for q")->check(CLI::Range(4, 512));
    app.add_option("--legendre-nodes", legendre_nodes, "Gauss-Legendre nodes per time cell")
        ->check(CLI::Range(1, 64));
    app.add_flag("--oracle", oracle, "Cross-check against the dense oracle at N = M = 4");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        vebs::ExperimentConfig config;
        config.example_id = example;
        config.alpha0 = alpha0;
        config.axis = vebs::parse_axis(axis_text);
        config.forcing = vebs::parse_forcing(forcing_text);
        config.N = N > 0 ? N : default_N(example, config.axis);
        config.M = M > 0 ? M : default_M(example, config.axis);
        config.levels = levels;
        config.output_path = out;
        config.jacobi_nodes = jacobi_nodes;
        config.legendre_nodes = legendre_nodes;

        const auto report = vebs::convergence_study(config);
        for (const auto& w : report.warnings)
            std::cerr << "warning: " << w << '\n';
        if (out.empty())
            std::cout << vebs::format_table(report);
        else
            vebs::emit_report(report, out, std::cout);

        if (oracle) {
            const double diff = oracle_check(config);
            std::cout << "dense oracle max |difference| at N = M = 4: " << diff << '\n';
            if (!(diff <= 1e-10)) {
                std::cerr << "error: dense oracle disagrees\n";
                return 3;
            }
        }
    } catch (const vebs::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 3;
    } catch (const std::ios_base::failure& e) {
        std::cerr << "I/O error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
