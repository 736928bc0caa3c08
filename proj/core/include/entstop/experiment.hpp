#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "entstop/market.hpp"
#include "entstop/schemes.hpp"

namespace entstop {

enum class SchemeKind { implicit, pia, classical, binomial };

std::string to_string(SchemeKind kind);
SchemeKind scheme_kind_from_string(const std::string& name);

// One scheme column of an experiment. For Monte Carlo schemes one row is
// produced per entry of n_values; lambda defaults to 1/n when unset.
struct SchemeSelector {
    SchemeKind kind = SchemeKind::implicit;
    std::vector<double> n_values;
    std::optional<double> lambda;
    SchemeConfig config;        // theta, Newton and PIA settings
    int binomial_steps = 400;   // binomial only
};

struct ExperimentConfig {
    MarketConfig market;              // s0 is replaced by each entry of s0_values
    std::vector<double> s0_values{100.0};
    PayoffSpec payoff;
    int steps = 100;
    std::vector<SchemeSelector> schemes;
    std::size_t n_paths = 100000;
    std::uint64_t seed = 20240601;
    std::string output_path;
    int basis_degree = 3;
    bool basis_payoff_terms = true;
    bool regress_itm_only = false;
    bool record_timing = true;  // runtime_ms is written as 0 when off

    void validate() const;
};

struct ReportRow {
    double s0 = 0.0;
    std::optional<double> n;
    std::optional<double> lambda;
    std::string scheme;
    double price = 0.0;
    double std_error = 0.0;
    double runtime_ms = 0.0;
    std::string flags;
    bool error = false;
};

struct ExperimentReport {
    std::vector<ReportRow> rows;

    bool has_errors() const;
};

// Simulates one PathGrid per S0 and runs every selected scheme on it. A
// failing row is kept with error = true; the remaining rows still run.
ExperimentReport run_experiment(const ExperimentConfig& config);

inline constexpr const char* kReportHeader = "s0,n,lambda,scheme,price,std_error,runtime_ms,flags";

void write_report_csv(const ExperimentReport& report, std::ostream& out);
ExperimentReport read_report_csv(std::istream& in);
void print_report_table(const ExperimentReport& report, std::ostream& out);

// Writes the CSV to `path` (IoError on failure) and the aligned table to `table_out`.
void emit_report(const ExperimentReport& report, const std::string& path, std::ostream& table_out);

// Parameters of the max-call study: S0 in {90, 100, 110}, n in {10, 100, 1000},
// lambda = 1/n, K = 100, r = 0.05, delta = 0.1, sigma = 0.2, T = 3, N = 100.
ExperimentConfig table1_config(std::size_t n_paths = 100000, std::uint64_t seed = 20240601);

// JSON configuration file; see README for the schema.
ExperimentConfig load_experiment_config(const std::string& path);
ExperimentConfig parse_experiment_config(const std::string& json_text);

}  // namespace entstop
