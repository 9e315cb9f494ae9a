#include "vebs/errors.hpp"
#include "vebs/harness.hpp"

#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace vebs;

namespace {

SolutionGrid synthetic(int N, int M, double value)
{
    SolutionGrid g;
    g.meta.N = N;
    g.meta.M = M;
    g.meta.expiry = 1.0;
    for (int j = 0; j <= M; ++j)
        g.x_nodes.push_back(static_cast<double>(j) / M);
    g.w.assign(static_cast<std::size_t>((N + 1) * (M - 1)), 0.0);
    g.u.assign(g.w.size(), value);
    return g;
}

ExperimentConfig small_config()
{
    ExperimentConfig c;
    c.example_id = 2;
    c.alpha0 = 0.6;
    c.N = 4;
    c.M = 8;
    c.levels = 3;
    return c;
}

} // namespace

TEST_CASE("two-mesh error of identical data is zero")
{
    CHECK(two_mesh_error_time(synthetic(4, 8, 0.3), synthetic(8, 8, 0.3)) == 0.0);
    CHECK(two_mesh_error_space(synthetic(4, 8, 0.3), synthetic(4, 16, 0.3)) == 0.0);
}

TEST_CASE("two-mesh error of a constant offset")
{
    const double c = 0.125;
    for (int M : {4, 16}) {
        const double expected = std::sqrt(1.0 * 1.0 * (M - 1.0) / M) * c;
        CHECK(two_mesh_error_time(synthetic(4, M, 0.0), synthetic(8, M, c)) ==
              doctest::Approx(expected).epsilon(1e-14));
        CHECK(two_mesh_error_space(synthetic(4, M, 0.0), synthetic(4, 2 * M, c)) ==
              doctest::Approx(expected).epsilon(1e-14));
    }
}

TEST_CASE("two-mesh error rejects mismatched pairs")
{
    CHECK_THROWS_AS(two_mesh_error_time(synthetic(4, 8, 0.0), synthetic(4, 8, 0.0)), ConfigurationError);
    CHECK_THROWS_AS(two_mesh_error_space(synthetic(4, 8, 0.0), synthetic(8, 16, 0.0)), ConfigurationError);
    auto other = synthetic(8, 8, 0.0);
    other.meta.expiry = 2.0;
    CHECK_THROWS_AS(two_mesh_error_time(synthetic(4, 8, 0.0), other), ConfigurationError);
}

TEST_CASE("theory orders")
{
    CHECK(theory_order(RefineAxis::time, 0.4) == doctest::Approx(1.1));
    CHECK(theory_order(RefineAxis::space, 0.4) == 2.0);
}

TEST_CASE("convergence report and CSV")
{
    const auto report = convergence_study(small_config());
    REQUIRE(report.rows.size() == 3);
    CHECK_FALSE(report.rows[0].order.has_value());
    for (std::size_t k = 1; k < report.rows.size(); ++k) {
        REQUIRE(report.rows[k].order.has_value());
        CHECK(*report.rows[k].order ==
              doctest::Approx(std::log2(report.rows[k - 1].error / report.rows[k].error)));
    }
    CHECK(report.rows[1].N == 8);
    CHECK(report.rows[1].M == 8);

    const std::string csv = report_csv(report);
    CHECK(csv.rfind(kCsvHeader, 0) == 0);
    std::istringstream lines(csv);
    std::string header, first;
    std::getline(lines, header);
    std::getline(lines, first);
    CHECK(first.find(",,") != std::string::npos);  // empty order

    const auto back = parse_report_csv(csv);
    REQUIRE(back.rows.size() == report.rows.size());
    CHECK(back.example == "2");
    CHECK(back.axis == RefineAxis::time);
    for (std::size_t k = 0; k < report.rows.size(); ++k) {
        CHECK(std::memcmp(&back.rows[k].error, &report.rows[k].error, sizeof(double)) == 0);
        CHECK(back.rows[k].order.has_value() == report.rows[k].order.has_value());
    }
    CHECK(report_csv(back) == csv);
    CHECK(report_csv(convergence_study(small_config())) == csv);
}

TEST_CASE("single level has no orders")
{
    auto config = small_config();
    config.levels = 1;
    config.axis = RefineAxis::space;
    const auto report = convergence_study(config);
    REQUIRE(report.rows.size() == 1);
    CHECK_FALSE(report.rows[0].order.has_value());
    config.levels = 0;
    CHECK_THROWS_AS(convergence_study(config), ConfigurationError);
}

TEST_CASE("format_double round trips")
{
    for (double v : {0.1, 1.0 / 3.0, 4.7357e-4, 1e-300})
        CHECK(std::stod(format_double(v)) == v);
}

TEST_CASE("CSV parser rejects malformed input")
{
    CHECK_THROWS_AS(parse_report_csv("nope\n"), ConfigurationError);
    CHECK_THROWS_AS(parse_report_csv(std::string(kCsvHeader) + "\n1,0.4,time,4\n"), ConfigurationError);
    CHECK_THROWS_AS(parse_report_csv(std::string(kCsvHeader) + "\n1,x,time,4,8,1,,1.1\n"),
                    ConfigurationError);
}

TEST_CASE("emit_report")
{
    const auto report = convergence_study(small_config());
    const auto path = std::filesystem::temp_directory_path() / "vebs_emit_report.csv";
    std::ostringstream table;
    emit_report(report, path.string(), table);
    std::ifstream in(path);
    std::stringstream content;
    content << in.rdbuf();
    CHECK(content.str() == report_csv(report));
    CHECK_FALSE(table.str().empty());
    std::filesystem::remove(path);

    CHECK_THROWS_AS(emit_report(report, "/nonexistent-dir/x/out.csv", table), std::ios_base::failure);
}

TEST_CASE("forcing variants")
{
    CHECK(parse_forcing("stated") == Forcing::stated);
    CHECK(parse_forcing("balanced") == Forcing::balanced);
    CHECK_THROWS_AS(parse_forcing("other"), ConfigurationError);
    CHECK_THROWS_AS(parse_axis("diagonal"), ConfigurationError);
    ExperimentConfig c;
    c.example_id = 3;
    c.forcing = Forcing::balanced;
    CHECK(c.example_label() == "3-balanced");
    c.example_id = 2;
    CHECK(c.example_label() == "2");
    c.example_id = 0;
    CHECK(c.example_label() == "custom");
    CHECK_THROWS_AS(example_model(4), ConfigurationError);
}

TEST_CASE("custom problems")
{
    auto config = small_config();
    config.example_id = 0;
    CHECK_THROWS_AS(convergence_study(config), ConfigurationError);
    config.custom_problem = std::make_shared<TransformedProblem>(example_problem(2, 0.6));
    const auto custom = convergence_study(config);
    const auto preset = convergence_study(small_config());
    CHECK(custom.example == "custom");
    CHECK(custom.rows[2].error == preset.rows[2].error);
}
