#include "entstop/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <map>
#include <memory>
#include <sstream>

#include "json.hpp"

#include "entstop/binomial.hpp"
#include "entstop/errors.hpp"

namespace entstop {

std::string to_string(SchemeKind kind) {
    switch (kind) {
        case SchemeKind::implicit: return "implicit";
        case SchemeKind::pia: return "pia";
        case SchemeKind::classical: return "classical";
        case SchemeKind::binomial: return "binomial";
    }
    return "unknown";
}

SchemeKind scheme_kind_from_string(const std::string& name) {
    if (name == "implicit") return SchemeKind::implicit;
    if (name == "pia") return SchemeKind::pia;
    if (name == "classical") return SchemeKind::classical;
    if (name == "binomial") return SchemeKind::binomial;
    throw ConfigError("unknown scheme '" + name + "' (implicit, pia, classical, binomial)");
}

void ExperimentConfig::validate() const {
    if (schemes.empty()) {
        throw ConfigError("experiment: select at least one scheme");
    }
    if (s0_values.empty()) {
        throw ConfigError("experiment: at least one S0 is required");
    }
    if (market.dim() < 1) {
        throw ConfigError("experiment: market dimension must be >= 1");
    }
    market.validate();
    for (double s : s0_values) {
        if (!(s > 0.0)) {
            throw ConfigError("experiment: S0 values must be positive");
        }
    }
    payoff.validate();
    if (steps < 1) {
        throw ConfigError("experiment: steps must be >= 1");
    }
    for (const auto& sel : schemes) {
        if (sel.kind == SchemeKind::binomial) {
            if (sel.binomial_steps < 1) {
                throw ConfigError("experiment: binomial steps must be >= 1");
            }
            continue;
        }
        if (sel.n_values.empty()) {
            throw ConfigError("experiment: scheme " + to_string(sel.kind) + " has no n values");
        }
        sel.config.validate();
    }
}

bool ExperimentReport::has_errors() const {
    return std::any_of(rows.begin(), rows.end(), [](const ReportRow& r) { return r.error; });
}

namespace {

std::string sanitize(std::string text) {
    std::replace(text.begin(), text.end(), ',', ';');
    std::replace(text.begin(), text.end(), '\n', ' ');
    return text;
}

class RowTimer {
public:
    explicit RowTimer(bool enabled) : enabled_(enabled), start_(std::chrono::steady_clock::now()) {}
    double elapsed_ms() const {
        if (!enabled_) {
            return 0.0;
        }
        const auto d = std::chrono::steady_clock::now() - start_;
        return std::chrono::duration<double, std::milli>(d).count();
    }

private:
    bool enabled_;
    std::chrono::steady_clock::time_point start_;
};

ReportRow run_mc_row(ContinuationEstimator& est, const SchemeSelector& sel, double s0, double n,
                     double r, bool timing) {
    ReportRow row;
    row.s0 = s0;
    row.n = n;
    row.scheme = to_string(sel.kind);
    SchemeConfig cfg = sel.config;
    cfg.couple_lambda_n = false;
    const double lambda = sel.lambda.value_or(1.0 / n);
    cfg.params = DriverParams{lambda, n, r};
    if (sel.kind != SchemeKind::classical) {
        row.lambda = lambda;
    }

    const RowTimer timer(timing);
    try {
        ValueSurface s;
        switch (sel.kind) {
            case SchemeKind::implicit: s = entropy_implicit(est, cfg); break;
            case SchemeKind::pia: s = pia(est, cfg); break;
            case SchemeKind::classical: s = classical_penalization(est, cfg); break;
            case SchemeKind::binomial: break;
        }
        row.price = s.price;
        row.std_error = s.std_error;
        row.flags = format_diagnostics(s.diagnostics);
    } catch (const std::exception& e) {
        row.error = true;
        row.price = std::numeric_limits<double>::quiet_NaN();
        row.std_error = std::numeric_limits<double>::quiet_NaN();
        row.flags = "error=" + sanitize(e.what());
    }
    row.runtime_ms = timer.elapsed_ms();
    return row;
}

ReportRow run_binomial_row(const ExperimentConfig& config, const MarketConfig& market,
                           const SchemeSelector& sel, double s0) {
    ReportRow row;
    row.s0 = s0;
    row.scheme = "binomial";
    const RowTimer timer(config.record_timing);
    try {
        BinomialConfig bc;
        bc.steps = sel.binomial_steps;
        bc.market = market;
        bc.payoff = config.payoff;
        row.price = binomial_price(bc);
        row.flags = "steps=" + std::to_string(bc.steps);
    } catch (const std::exception& e) {
        row.error = true;
        row.price = std::numeric_limits<double>::quiet_NaN();
        row.flags = "error=" + sanitize(e.what());
    }
    row.runtime_ms = timer.elapsed_ms();
    return row;
}

ReportRow error_row(double s0, const std::string& scheme, const std::string& message) {
    ReportRow row;
    row.s0 = s0;
    row.scheme = scheme;
    row.error = true;
    row.price = std::numeric_limits<double>::quiet_NaN();
    row.std_error = std::numeric_limits<double>::quiet_NaN();
    row.flags = "error=" + sanitize(message);
    return row;
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& config) {
    config.validate();
    ExperimentReport report;

    const bool needs_paths = std::any_of(config.schemes.begin(), config.schemes.end(),
                                         [](const auto& s) { return s.kind != SchemeKind::binomial; });

    for (double s0 : config.s0_values) {
        MarketConfig market = config.market;
        std::fill(market.s0.begin(), market.s0.end(), s0);

        std::unique_ptr<PathGrid> paths;
        std::map<bool, std::unique_ptr<ContinuationEstimator>> estimators;
        std::string setup_error;
        if (needs_paths) {
            try {
                paths = std::make_unique<PathGrid>(simulate_paths(
                    market, TimeGrid(market.T, config.steps), config.n_paths, config.seed));
            } catch (const std::exception& e) {
                setup_error = e.what();
            }
        }

        for (const auto& sel : config.schemes) {
            if (sel.kind == SchemeKind::binomial) {
                report.rows.push_back(run_binomial_row(config, market, sel, s0));
                continue;
            }
            const bool itm = config.regress_itm_only || sel.config.regress_itm_only;
            if (setup_error.empty() && !estimators.contains(itm)) {
                try {
                    BasisSpec basis = BasisSpec::default_for(market.dim(), config.payoff.strike);
                    basis.degree = config.basis_degree;
                    basis.include_payoff_terms = config.basis_payoff_terms;
                    estimators[itm] = std::make_unique<ContinuationEstimator>(
                        *paths, config.payoff, basis, itm, sel.config.min_paths_per_feature);
                } catch (const std::exception& e) {
                    setup_error = e.what();
                }
            }
            for (double n : sel.n_values) {
                if (!setup_error.empty()) {
                    ReportRow row = error_row(s0, to_string(sel.kind), setup_error);
                    row.n = n;
                    report.rows.push_back(row);
                    continue;
                }
                report.rows.push_back(run_mc_row(*estimators.at(itm), sel, s0, n, market.r,
                                                 config.record_timing));
            }
        }
    }
    return report;
}

// ---------------------------------------------------------------------------
// CSV

namespace {

void put_number(std::ostream& out, double x) {
    if (std::isnan(x)) {
        out << "nan";
    } else {
        out << x;
    }
}

std::optional<double> parse_optional(const std::string& field) {
    if (field.empty()) {
        return std::nullopt;
    }
    return std::stod(field);
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) {
        fields.push_back(field);
    }
    if (!line.empty() && line.back() == ',') {
        fields.emplace_back();
    }
    return fields;
}

}  // namespace

void write_report_csv(const ExperimentReport& report, std::ostream& out) {
    const auto old_precision = out.precision(6);
    const auto old_flags = out.flags();
    out.unsetf(std::ios::floatfield);
    out << kReportHeader << '\n';
    for (const auto& row : report.rows) {
        put_number(out, row.s0);
        out << ',';
        if (row.n) put_number(out, *row.n);
        out << ',';
        if (row.lambda) put_number(out, *row.lambda);
        out << ',' << row.scheme << ',';
        put_number(out, row.price);
        out << ',';
        put_number(out, row.std_error);
        out << ',';
        put_number(out, row.runtime_ms);
        out << ',' << row.flags << '\n';
    }
    out.precision(old_precision);
    out.flags(old_flags);
}

ExperimentReport read_report_csv(std::istream& in) {
    ExperimentReport report;
    std::string line;
    if (!std::getline(in, line) || line != kReportHeader) {
        throw ConfigError("report CSV: missing or unexpected header");
    }
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        const auto f = split_csv_line(line);
        if (f.size() != 8) {
            throw ConfigError("report CSV: expected 8 fields in line '" + line + "'");
        }
        ReportRow row;
        row.s0 = std::stod(f[0]);
        row.n = parse_optional(f[1]);
        row.lambda = parse_optional(f[2]);
        row.scheme = f[3];
        row.price = std::stod(f[4]);
        row.std_error = std::stod(f[5]);
        row.runtime_ms = std::stod(f[6]);
        row.flags = f[7];
        row.error = row.flags.rfind("error=", 0) == 0;
        report.rows.push_back(std::move(row));
    }
    return report;
}

void print_report_table(const ExperimentReport& report, std::ostream& out) {
    const auto old_flags = out.flags();
    const auto old_precision = out.precision();
    out << std::left << std::setw(8) << "S0" << std::setw(8) << "n" << std::setw(10) << "lambda"
        << std::setw(11) << "scheme" << std::right << std::setw(11) << "price" << std::setw(11)
        << "std_err" << std::setw(12) << "runtime_ms" << "  flags\n";
    out << std::string(80, '-') << '\n';
    for (const auto& row : report.rows) {
        std::ostringstream n;
        std::ostringstream lambda;
        if (row.n) n << *row.n;
        if (row.lambda) lambda << *row.lambda;
        out << std::setprecision(6) << std::left << std::setw(8) << row.s0 << std::setw(8) << n.str() << std::setw(10)
            << lambda.str() << std::setw(11) << row.scheme << std::right << std::fixed
            << std::setprecision(4) << std::setw(11) << row.price << std::setw(11)
            << row.std_error << std::setprecision(1) << std::setw(12) << row.runtime_ms << "  "
            << row.flags << '\n';
        out.unsetf(std::ios::floatfield);
    }
    out.flags(old_flags);
    out.precision(old_precision);
}

void emit_report(const ExperimentReport& report, const std::string& path, std::ostream& table_out) {
    std::ofstream file(path);
    if (!file) {
        throw IoError(path, "cannot open report for writing");
    }
    write_report_csv(report, file);
    file.flush();
    if (!file) {
        throw IoError(path, "failed writing report");
    }
    print_report_table(report, table_out);
}

// ---------------------------------------------------------------------------
// Configuration

ExperimentConfig table1_config(std::size_t n_paths, std::uint64_t seed) {
    ExperimentConfig cfg;
    cfg.market = MarketConfig{{100.0, 100.0}, 0.05, 0.1, 0.2, 3.0};
    cfg.s0_values = {90.0, 100.0, 110.0};
    cfg.payoff = PayoffSpec{PayoffKind::max_call, 100.0};
    cfg.steps = 100;
    cfg.n_paths = n_paths;
    cfg.seed = seed;

    SchemeConfig base;
    base.theta = 1.0;
    base.newton_max_iter = 20;
    base.pia_iterations = 10;
    const std::vector<double> levels{10.0, 100.0, 1000.0};
    cfg.schemes = {
        SchemeSelector{SchemeKind::implicit, levels, std::nullopt, base, 400},
        SchemeSelector{SchemeKind::pia, levels, std::nullopt, base, 400},
        SchemeSelector{SchemeKind::classical, levels, std::nullopt, base, 400},
        SchemeSelector{SchemeKind::binomial, {}, std::nullopt, base, 400},
    };
    return cfg;
}

namespace {

using nlohmann::json;

template <class T>
void read_opt(const json& j, const char* key, T& out) {
    if (j.contains(key)) {
        out = j.at(key).get<T>();
    }
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }

    ExperimentConfig cfg;
    cfg.schemes.clear();
    try {
        if (root.contains("market")) {
            const auto& m = root.at("market");
            std::size_t dim = 2;
            read_opt(m, "dim", dim);
            if (m.contains("s0")) {
                const auto& s0 = m.at("s0");
                cfg.s0_values = s0.is_array() ? s0.get<std::vector<double>>()
                                              : std::vector<double>{s0.get<double>()};
            }
            cfg.market.s0.assign(dim, cfg.s0_values.empty() ? 100.0 : cfg.s0_values.front());
            read_opt(m, "r", cfg.market.r);
            read_opt(m, "delta", cfg.market.delta);
            read_opt(m, "sigma", cfg.market.sigma);
            read_opt(m, "T", cfg.market.T);
        }
        if (root.contains("payoff")) {
            const auto& p = root.at("payoff");
            std::string kind = "max_call";
            read_opt(p, "kind", kind);
            if (kind != "max_call") {
                throw ConfigError("config: unsupported payoff kind '" + kind + "'");
            }
            read_opt(p, "strike", cfg.payoff.strike);
        }
        if (root.contains("grid")) {
            read_opt(root.at("grid"), "steps", cfg.steps);
        }
        read_opt(root, "paths", cfg.n_paths);
        read_opt(root, "seed", cfg.seed);
        read_opt(root, "output", cfg.output_path);
        read_opt(root, "record_timing", cfg.record_timing);
        if (root.contains("regression")) {
            const auto& r = root.at("regression");
            read_opt(r, "degree", cfg.basis_degree);
            read_opt(r, "payoff_terms", cfg.basis_payoff_terms);
            read_opt(r, "itm_only", cfg.regress_itm_only);
        }
        if (root.contains("schemes")) {
            for (const auto& s : root.at("schemes")) {
                SchemeSelector sel;
                sel.kind = scheme_kind_from_string(s.at("kind").get<std::string>());
                if (s.contains("n")) {
                    const auto& n = s.at("n");
                    sel.n_values = n.is_array() ? n.get<std::vector<double>>()
                                                : std::vector<double>{n.get<double>()};
                }
                if (s.contains("lambda")) {
                    sel.lambda = s.at("lambda").get<double>();
                }
                read_opt(s, "theta", sel.config.theta);
                read_opt(s, "newton_max_iter", sel.config.newton_max_iter);
                read_opt(s, "newton_tol", sel.config.newton_tol);
                read_opt(s, "iterations", sel.config.pia_iterations);
                read_opt(s, "steps", sel.binomial_steps);
                cfg.schemes.push_back(std::move(sel));
            }
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError(path, "cannot open config");
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_experiment_config(buffer.str());
}

}  // namespace entstop
