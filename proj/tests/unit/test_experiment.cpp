#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"

#include "entstop/errors.hpp"
#include "entstop/experiment.hpp"

using namespace entstop;

namespace {

ExperimentConfig smoke_config() {
    ExperimentConfig cfg = table1_config(2000, 3);
    cfg.steps = 10;
    cfg.s0_values = {100.0};
    cfg.record_timing = false;
    for (auto& sel : cfg.schemes) {
        sel.n_values = {10.0};
        sel.binomial_steps = 50;
    }
    return cfg;
}

std::string csv_of(const ExperimentReport& r) {
    std::ostringstream out;
    write_report_csv(r, out);
    return out.str();
}

}  // namespace

TEST_SUITE("experiment") {

TEST_CASE("table 1 configuration") {
    const auto cfg = table1_config();
    CHECK(cfg.n_paths == 100000);
    CHECK(cfg.s0_values == std::vector<double>{90.0, 100.0, 110.0});
    CHECK(cfg.payoff.strike == 100.0);
    CHECK(cfg.steps == 100);
    REQUIRE(cfg.schemes.size() == 4);
    CHECK(cfg.schemes[0].kind == SchemeKind::implicit);
    CHECK(cfg.schemes[0].config.newton_max_iter == 20);
    CHECK(cfg.schemes[1].config.pia_iterations == 10);
    CHECK(cfg.schemes[3].kind == SchemeKind::binomial);
}

TEST_CASE("row layout and determinism") {
    const auto cfg = smoke_config();
    const auto a = run_experiment(cfg);
    REQUIRE(a.rows.size() == 4);
    CHECK(a.rows[0].scheme == "implicit");
    CHECK(a.rows[0].lambda.value() == doctest::Approx(0.1));
    CHECK(a.rows[2].scheme == "classical");
    CHECK_FALSE(a.rows[2].lambda.has_value());
    CHECK(a.rows[3].scheme == "binomial");
    CHECK_FALSE(a.rows[3].n.has_value());
    CHECK_FALSE(a.has_errors());
    CHECK(csv_of(a) == csv_of(run_experiment(cfg)));
}

TEST_CASE("binomial-only run") {
    ExperimentConfig cfg;
    cfg.s0_values = {100.0};
    cfg.schemes = {SchemeSelector{SchemeKind::binomial, {}, std::nullopt, {}, 100}};
    const auto r = run_experiment(cfg);
    REQUIRE(r.rows.size() == 1);
    CHECK(std::abs(r.rows[0].price - 14.211) <= 0.02);
}

TEST_CASE("a failing row is marked and the rest still run") {
    auto cfg = smoke_config();
    cfg.schemes[0].lambda = 5.0;  // outside (0, 1]
    const auto r = run_experiment(cfg);
    REQUIRE(r.rows.size() == 4);
    CHECK(r.rows[0].error);
    CHECK(r.rows[0].flags.rfind("error=", 0) == 0);
    CHECK(r.rows[0].flags.find(',') == std::string::npos);
    CHECK_FALSE(r.rows[1].error);
    CHECK(r.has_errors());
}

TEST_CASE("CSV format and round trip") {
    ExperimentReport empty;
    CHECK(csv_of(empty) == std::string(kReportHeader) + "\n");

    ExperimentReport one;
    one.rows.push_back(ReportRow{100.0, 10.0, 0.1, "implicit", 13.2461234, 0.00531, 1234.5678,
                                 "newton_warnings=0", false});
    const std::string text = csv_of(one);
    CHECK(text == std::string(kReportHeader) +
                      "\n100,10,0.1,implicit,13.2461,0.00531,1234.57,newton_warnings=0\n");

    const auto r = run_experiment(smoke_config());
    std::istringstream in(csv_of(r));
    const auto back = read_report_csv(in);
    REQUIRE(back.rows.size() == r.rows.size());
    CHECK(csv_of(back) == csv_of(r));
    for (std::size_t i = 0; i < r.rows.size(); ++i) {
        CHECK(back.rows[i].price == doctest::Approx(r.rows[i].price).epsilon(1e-5));
        CHECK(back.rows[i].scheme == r.rows[i].scheme);
        CHECK(back.rows[i].n.has_value() == r.rows[i].n.has_value());
    }

    std::istringstream bad("s0,n\n1,2\n");
    CHECK_THROWS_AS(read_report_csv(bad), ConfigError);
}

TEST_CASE("emit_report writes the file and names the path on failure") {
    const auto dir = std::filesystem::temp_directory_path();
    const auto path = (dir / "entstop_emit_test.csv").string();
    ExperimentReport one;
    one.rows.push_back(ReportRow{90.0, std::nullopt, std::nullopt, "binomial", 8.2811, 0.0, 0.0,
                                 "steps=400", false});
    std::ostringstream table;
    emit_report(one, path, table);
    std::ifstream in(path);
    std::stringstream content;
    content << in.rdbuf();
    CHECK(content.str() == std::string(kReportHeader) + "\n90,,,binomial,8.2811,0,0,steps=400\n");
    CHECK(table.str().find("binomial") != std::string::npos);
    std::filesystem::remove(path);

    const std::string unwritable = "/nonexistent-dir/x.csv";
    try {
        emit_report(one, unwritable, table);
        FAIL("expected IoError");
    } catch (const IoError& e) {
        CHECK(e.path() == unwritable);
        CHECK(std::string(e.what()).find(unwritable) != std::string::npos);
    }
}

TEST_CASE("JSON configuration") {
    const auto cfg = parse_experiment_config(R"({
        "market": {"s0": [90, 110], "dim": 2, "r": 0.04, "delta": 0.1, "sigma": 0.25, "T": 2},
        "payoff": {"kind": "max_call", "strike": 95},
        "grid": {"steps": 50},
        "paths": 5000, "seed": 11, "output": "out.csv", "record_timing": false,
        "regression": {"degree": 2, "payoff_terms": false, "itm_only": true},
        "schemes": [
            {"kind": "implicit", "n": [10, 100], "theta": 0.5, "newton_max_iter": 30},
            {"kind": "pia", "n": 50, "lambda": 0.2, "iterations": 4},
            {"kind": "binomial", "steps": 300}
        ]})");
    CHECK(cfg.s0_values == std::vector<double>{90.0, 110.0});
    CHECK(cfg.market.r == 0.04);
    CHECK(cfg.market.sigma == 0.25);
    CHECK(cfg.market.T == 2.0);
    CHECK(cfg.payoff.strike == 95.0);
    CHECK(cfg.steps == 50);
    CHECK(cfg.n_paths == 5000);
    CHECK(cfg.seed == 11);
    CHECK(cfg.output_path == "out.csv");
    CHECK_FALSE(cfg.record_timing);
    CHECK(cfg.basis_degree == 2);
    CHECK_FALSE(cfg.basis_payoff_terms);
    CHECK(cfg.regress_itm_only);
    REQUIRE(cfg.schemes.size() == 3);
    CHECK(cfg.schemes[0].n_values == std::vector<double>{10.0, 100.0});
    CHECK(cfg.schemes[0].config.theta == 0.5);
    CHECK(cfg.schemes[0].config.newton_max_iter == 30);
    CHECK(cfg.schemes[1].lambda.value() == 0.2);
    CHECK(cfg.schemes[1].config.pia_iterations == 4);
    CHECK(cfg.schemes[2].binomial_steps == 300);

    CHECK_THROWS_AS(parse_experiment_config("{"), ConfigError);
    CHECK_THROWS_AS(parse_experiment_config(R"({"schemes": []})"), ConfigError);
    CHECK_THROWS_AS(parse_experiment_config(R"({"schemes": [{"kind": "lsm", "n": [1]}]})"), ConfigError);
    CHECK_THROWS_AS(parse_experiment_config(R"({"paths": "many", "schemes": [{"kind": "binomial"}]})"),
                    ConfigError);
    CHECK_THROWS_AS(load_experiment_config("/nonexistent/config.json"), IoError);
}

}  // TEST_SUITE
