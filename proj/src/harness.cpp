#include "vebs/harness.hpp"

#include "vebs/errors.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <future>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <sstream>

namespace vebs {

const char* to_string(RefineAxis axis)
{
    return axis == RefineAxis::time ? "time" : "space";
}

RefineAxis parse_axis(const std::string& text)
{
    if (text == "time")
        return RefineAxis::time;
    if (text == "space")
        return RefineAxis::space;
    throw ConfigurationError("unknown refinement axis '" + text + "'");
}

const char* to_string(Forcing forcing)
{
    return forcing == Forcing::stated ? "stated" : "balanced";
}

Forcing parse_forcing(const std::string& text)
{
    if (text == "stated")
        return Forcing::stated;
    if (text == "balanced")
        return Forcing::balanced;
    throw ConfigurationError("unknown forcing variant '" + text + "'");
}

ModelSpec example_model(int id, Forcing forcing)
{
    constexpr double pi = std::numbers::pi;
    ModelSpec spec;
    spec.expiry = 1.0;
    spec.x_domain = {0.0, 1.0};
    spec.s_domain = {1.0, std::numbers::e};
    spec.terminal_payoff = [](double S) { return std::sin(pi * std::log(S)); };
    spec.payoff_log_slope = [](double x) { return pi * std::cos(pi * x); };

    switch (id) {
    case 1:
        spec.sigma = 0.45;
        spec.rate = 0.03;
        break;
    case 2:
        spec.sigma = 0.5;
        spec.rate = 0.25;
        break;
    case 3:
        spec.sigma = 0.4;
        spec.rate = 0.1;
        break;
    default:
        throw ConfigurationError("unknown example " + std::to_string(id));
    }
    if (id != 2) {
        const double s2 = spec.sigma * spec.sigma;
        double amplitude = (spec.rate / (s2 * s2) - 1.0 / (2.0 * s2)) * pi;
        if (forcing == Forcing::balanced)
            amplitude = -(spec.rate - 0.5 * s2) * pi;
        spec.forcing = [amplitude](double x, double) { return amplitude * std::cos(pi * x); };
    }
    return spec;
}

VariableExponent example_exponent(int id, double alpha0)
{
    constexpr double c = 1.0 / 11.0;
    switch (id) {
    case 1:
        return VariableExponent([=](double t) { return alpha0 - c * t; },
                                [=](double) { return -c; },
                                [](double) { return 0.0; }, 1.0);
    case 2:
        return VariableExponent([=](double t) { return alpha0 - c * t * t; },
                                [=](double t) { return -2.0 * c * t; },
                                [=](double) { return -2.0 * c; }, 1.0);
    case 3:
        return VariableExponent([=](double t) { return alpha0 + c * t * t * t; },
                                [=](double t) { return 3.0 * c * t * t; },
                                [=](double t) { return 6.0 * c * t; }, 1.0);
    default:
        throw ConfigurationError("unknown example " + std::to_string(id));
    }
}

TransformedProblem example_problem(int id, double alpha0, Forcing forcing)
{
    return build_transformed_problem(example_model(id, forcing), example_exponent(id, alpha0));
}

std::string ExperimentConfig::example_label() const
{
    if (example_id == 0)
        return "custom";
    std::string label = std::to_string(example_id);
    if (forcing == Forcing::balanced && example_id != 2)
        label += "-balanced";
    return label;
}

double theory_order(RefineAxis axis, double alpha0)
{
    return axis == RefineAxis::time ? 0.5 + 1.5 * alpha0 : 2.0;
}

namespace {

void check_pair(const SolutionGrid& coarse, const SolutionGrid& fine)
{
    const auto& a = coarse.x_nodes;
    const auto& b = fine.x_nodes;
    if (a.empty() || b.empty() || a.front() != b.front() || a.back() != b.back())
        throw ConfigurationError("two-mesh error: solutions live on different domains");
    if (coarse.meta.expiry != fine.meta.expiry)
        throw ConfigurationError("two-mesh error: solutions have different horizons");
}

} // namespace

double two_mesh_error_time(const SolutionGrid& coarse, const SolutionGrid& fine)
{
    check_pair(coarse, fine);
    if (fine.meta.N != 2 * coarse.meta.N || fine.meta.M != coarse.meta.M)
        throw ConfigurationError("two-mesh time error: expected (2N, M) against (N, M)");
    const int N = coarse.meta.N;
    const double tau = coarse.meta.expiry / N;
    const double h = (coarse.x_nodes.back() - coarse.x_nodes.front()) / coarse.meta.M;
    double sum = 0.0;
    for (int n = 1; n <= N; ++n) {
        const auto uc = coarse.u_row(n);
        const auto uf = fine.u_row(2 * n);
        double level = 0.0;
        for (std::size_t j = 0; j < uc.size(); ++j) {
            const double d = uf[j] - uc[j];
            level += d * d;
        }
        sum += h * level;
    }
    return std::sqrt(tau * sum);
}

double two_mesh_error_space(const SolutionGrid& coarse, const SolutionGrid& fine)
{
    check_pair(coarse, fine);
    if (fine.meta.M != 2 * coarse.meta.M || fine.meta.N != coarse.meta.N)
        throw ConfigurationError("two-mesh space error: expected (N, 2M) against (N, M)");
    const int N = coarse.meta.N;
    const double tau = coarse.meta.expiry / N;
    const double h = (coarse.x_nodes.back() - coarse.x_nodes.front()) / coarse.meta.M;
    double sum = 0.0;
    for (int n = 1; n <= N; ++n) {
        const auto uc = coarse.u_row(n);
        const auto uf = fine.u_row(n);
        double level = 0.0;
        // Coarse interior index j-1 holds node j; fine node 2j is index 2j-1.
        for (std::size_t j = 1; j <= uc.size(); ++j) {
            const double d = uf[2 * j - 1] - uc[j - 1];
            level += d * d;
        }
        sum += h * level;
    }
    return std::sqrt(tau * sum);
}

double two_mesh_error_time(const TransformedProblem& problem, int N, int M,
                           const SolverOptions& options)
{
    return two_mesh_error_time(solve_all(problem, N, M, options),
                               solve_all(problem, 2 * N, M, options));
}

double two_mesh_error_space(const TransformedProblem& problem, int N, int M,
                            const SolverOptions& options)
{
    return two_mesh_error_space(solve_all(problem, N, M, options),
                                solve_all(problem, N, 2 * M, options));
}

SolverOptions solver_options(const ExperimentConfig& config)
{
    SolverOptions options;
    options.jacobi_nodes = config.jacobi_nodes;
    options.legendre_nodes = config.legendre_nodes;
    // Example 1 deliberately uses alpha'(0) != 0; the run records a warning.
    options.allow_nonflat_exponent = true;
    return options;
}

ConvergenceReport convergence_study(const ExperimentConfig& config)
{
    if (config.levels < 1)
        throw ConfigurationError("convergence_study: need at least one level");
    if (config.N < 1 || config.M < 2)
        throw ConfigurationError("convergence_study: N >= 1 and M >= 2 required");

    std::shared_ptr<const TransformedProblem> problem = config.custom_problem;
    if (config.example_id != 0)
        problem = std::make_shared<TransformedProblem>(example_problem(config.example_id, config.alpha0, config.forcing));
    if (!problem)
        throw ConfigurationError("convergence_study: custom example without a problem");

    const SolverOptions options = solver_options(config);
    const bool in_time = config.axis == RefineAxis::time;

    // Level k compares solve k with solve k+1.
    std::vector<std::future<SolutionGrid>> jobs;
    for (int k = 0; k <= config.levels; ++k) {
        const int N = in_time ? config.N << k : config.N;
        const int M = in_time ? config.M : config.M << k;
        jobs.push_back(std::async(std::launch::async,
                                  [problem, N, M, options] { return solve_all(*problem, N, M, options); }));
    }
    std::vector<SolutionGrid> solves;
    solves.reserve(jobs.size());
    for (auto& job : jobs)
        solves.push_back(job.get());

    ConvergenceReport report;
    report.example = config.example_label();
    report.alpha0 = problem->alpha.alpha0();
    report.axis = config.axis;
    report.theory_order = theory_order(config.axis, report.alpha0);
    report.warnings = solves.front().meta.warnings;
    for (int k = 0; k < config.levels; ++k) {
        const auto& coarse = solves[static_cast<std::size_t>(k)];
        const auto& fine = solves[static_cast<std::size_t>(k) + 1];
        ConvergenceRow row;
        row.N = coarse.meta.N;
        row.M = coarse.meta.M;
        row.error = in_time ? two_mesh_error_time(coarse, fine) : two_mesh_error_space(coarse, fine);
        if (!report.rows.empty())
            row.order = std::log2(report.rows.back().error / row.error);
        report.rows.push_back(row);
    }
    return report;
}

std::string format_double(double value)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, res.ptr);
}

std::string report_csv(const ConvergenceReport& report)
{
    std::ostringstream os;
    os << kCsvHeader << '\n';
    for (const auto& row : report.rows) {
        os << report.example << ',' << format_double(report.alpha0) << ',' << to_string(report.axis)
           << ',' << row.N << ',' << row.M << ',' << format_double(row.error) << ',';
        if (row.order)
            os << format_double(*row.order);
        os << ',' << format_double(report.theory_order) << '\n';
    }
    return os.str();
}

namespace {

double parse_number(const std::string& field)
{
    double v = 0.0;
    const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
    if (res.ec != std::errc() || res.ptr != field.data() + field.size())
        throw ConfigurationError("CSV: bad number '" + field + "'");
    return v;
}

int parse_int(const std::string& field)
{
    int v = 0;
    const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
    if (res.ec != std::errc() || res.ptr != field.data() + field.size())
        throw ConfigurationError("CSV: bad integer '" + field + "'");
    return v;
}

std::vector<std::string> split(const std::string& line)
{
    std::vector<std::string> out;
    std::string field;
    std::istringstream is(line);
    while (std::getline(is, field, ','))
        out.push_back(field);
    if (!line.empty() && line.back() == ',')
        out.emplace_back();
    return out;
}

} // namespace

ConvergenceReport parse_report_csv(const std::string& text)
{
    std::istringstream is(text);
    std::string line;
    if (!std::getline(is, line) || line != kCsvHeader)
        throw ConfigurationError("CSV: missing or unexpected header");
    ConvergenceReport report;
    bool first = true;
    while (std::getline(is, line)) {
        if (line.empty())
            continue;
        const auto f = split(line);
        if (f.size() != 8)
            throw ConfigurationError("CSV: expected 8 fields in '" + line + "'");
        if (first) {
            report.example = f[0];
            report.alpha0 = parse_number(f[1]);
            report.axis = parse_axis(f[2]);
            report.theory_order = parse_number(f[7]);
            first = false;
        }
        ConvergenceRow row;
        row.N = parse_int(f[3]);
        row.M = parse_int(f[4]);
        row.error = parse_number(f[5]);
        if (!f[6].empty())
            row.order = parse_number(f[6]);
        report.rows.push_back(row);
    }
    return report;
}

std::string format_table(const ConvergenceReport& report)
{
    const bool in_time = report.axis == RefineAxis::time;
    std::ostringstream os;
    os << "Example " << report.example << ", alpha0 = " << format_double(report.alpha0) << ", ";
    if (in_time)
        os << "temporal convergence, M = " << (report.rows.empty() ? 0 : report.rows.front().M);
    else
        os << "spatial convergence, N = " << (report.rows.empty() ? 0 : report.rows.front().N);
    os << '\n';
    os << std::setw(8) << (in_time ? "N" : "M") << std::setw(20)
       << (in_time ? "Error_tau(N,M)" : "Error_h(N,M)") << std::setw(10)
       << (in_time ? "Order_tau" : "Order_h") << '\n';
    for (const auto& row : report.rows) {
        std::ostringstream err;
        err << std::scientific << std::setprecision(4) << row.error;
        os << std::setw(8) << (in_time ? row.N : row.M) << std::setw(20) << err.str();
        if (row.order) {
            std::ostringstream ord;
            ord << std::fixed << std::setprecision(2) << *row.order;
            os << std::setw(10) << ord.str();
        } else {
            os << std::setw(10) << "*";
        }
        os << '\n';
    }
    std::ostringstream th;
    th << std::fixed << std::setprecision(2) << report.theory_order;
    os << std::setw(8) << "Theory" << std::setw(20) << "" << std::setw(10) << th.str() << '\n';
    return os.str();
}

void emit_report(const ConvergenceReport& report, const std::string& path, std::ostream& table_out)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw std::ios_base::failure("cannot open '" + path + "' for writing");
    out << report_csv(report);
    out.flush();
    if (!out)
        throw std::ios_base::failure("failed writing '" + path + "'");
    table_out << format_table(report);
}

} // namespace vebs
