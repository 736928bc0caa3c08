// entstop: command-line driver for the entropy-regularized stopping engine.
//
//   entstop price --scheme implicit --s0 100 --n 100
//   entstop table1 --paths 100000 --output table1.csv
//   entstop nsweep --lambda 0.1 --n 2 --n 4 --n 8
//   entstop defaultcheck --lambda 0.5 --eps 0.25 --eps 0.05
//   entstop proptest
//
// Exit codes: 0 ok, 2 configuration, 3 numeric, 4 I/O.

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "entstop/binomial.hpp"
#include "entstop/driver_properties.hpp"
#include "entstop/errors.hpp"
#include "entstop/experiment.hpp"
#include "entstop/singular.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitIo = 4;

struct SharedOptions {
    std::optional<double> s0;
    std::vector<double> n;
    std::optional<double> lambda;
    std::optional<std::size_t> paths;
    std::optional<int> steps;
    std::optional<std::uint64_t> seed;
    std::optional<double> theta;
    std::string output;
    std::string config;
    bool no_timing = false;
};

void add_shared(CLI::App* cmd, SharedOptions& o) {
    cmd->add_option("--s0", o.s0, "Initial price of every asset");
    cmd->add_option("--n", o.n, "Truncation level(s) n");
    cmd->add_option("--lambda", o.lambda, "Temperature lambda (default 1/n)");
    cmd->add_option("--paths", o.paths, "Number of Monte Carlo paths");
    cmd->add_option("--steps", o.steps, "Number of time steps N");
    cmd->add_option("--seed", o.seed, "Random seed");
    cmd->add_option("--theta", o.theta, "Implicit weight theta in [0,1]");
    cmd->add_option("--output", o.output, "CSV output path");
    cmd->add_option("--config", o.config, "JSON experiment configuration")->check(CLI::ExistingFile);
    cmd->add_flag("--no-timing", o.no_timing, "Write runtime_ms as 0 (bit-reproducible CSV)");
}

void apply_shared(const SharedOptions& o, entstop::ExperimentConfig& cfg) {
    if (o.s0) cfg.s0_values = {*o.s0};
    if (o.paths) cfg.n_paths = *o.paths;
    if (o.steps) cfg.steps = *o.steps;
    if (o.seed) cfg.seed = *o.seed;
    if (!o.output.empty()) cfg.output_path = o.output;
    if (o.no_timing) cfg.record_timing = false;
    for (auto& sel : cfg.schemes) {
        if (!o.n.empty() && sel.kind != entstop::SchemeKind::binomial) sel.n_values = o.n;
        if (o.lambda) sel.lambda = *o.lambda;
        if (o.theta) sel.config.theta = *o.theta;
    }
}

int report_and_exit(const entstop::ExperimentReport& report, const std::string& output) {
    if (output.empty()) {
        entstop::print_report_table(report, std::cout);
    } else {
        entstop::emit_report(report, output, std::cout);
    }
    return report.has_errors() ? kExitNumeric : 0;
}

entstop::SimulationSetup setup_from(const SharedOptions& o, std::size_t default_paths) {
    entstop::SimulationSetup setup;
    if (!o.config.empty()) {
        const auto cfg = entstop::load_experiment_config(o.config);
        setup.market = cfg.market;
        setup.payoff = cfg.payoff;
        setup.steps = cfg.steps;
        setup.n_paths = cfg.n_paths;
        setup.seed = cfg.seed;
        std::fill(setup.market.s0.begin(), setup.market.s0.end(), cfg.s0_values.front());
    } else {
        setup.n_paths = default_paths;
    }
    if (o.s0) std::fill(setup.market.s0.begin(), setup.market.s0.end(), *o.s0);
    if (o.paths) setup.n_paths = *o.paths;
    if (o.steps) setup.steps = *o.steps;
    if (o.seed) setup.seed = *o.seed;
    if (o.theta) setup.scheme.theta = *o.theta;
    setup.basis = entstop::BasisSpec::default_for(setup.market.dim(), setup.payoff.strike);
    return setup;
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw entstop::IoError(path, "cannot open output for writing");
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Entropy-regularized penalization engine for American options"};
    app.require_subcommand(1);

    // price ------------------------------------------------------------------
    SharedOptions price_opt;
    std::string scheme = "implicit";
    int newton_iter = 20;
    int pia_iter = 10;
    int binomial_steps = 400;
    std::string export_paths;
    std::string dump_coefficients;
    auto* price = app.add_subcommand("price", "Price with a single scheme");
    add_shared(price, price_opt);
    price->add_option("--scheme", scheme, "implicit | pia | classical | binomial")
        ->check(CLI::IsMember({"implicit", "pia", "classical", "binomial"}));
    price->add_option("--newton-iter", newton_iter, "Newton iterations per implicit solve");
    price->add_option("--pia-iter", pia_iter, "PIA iterations");
    price->add_option("--binomial-steps", binomial_steps, "Binomial tree steps");
    price->add_option("--export-paths", export_paths, "Write simulated paths as CSV");
    price->add_option("--dump-coefficients", dump_coefficients,
                      "Write regression coefficients of the last backward pass as CSV");

    // table1 -----------------------------------------------------------------
    SharedOptions table_opt;
    auto* table1 = app.add_subcommand("table1", "Reproduce the max-call price table");
    add_shared(table1, table_opt);

    // nsweep -----------------------------------------------------------------
    SharedOptions sweep_opt;
    auto* nsweep = app.add_subcommand("nsweep", "entropy_implicit price over increasing n at fixed lambda");
    add_shared(nsweep, sweep_opt);

    // defaultcheck -----------------------------------------------------------
    SharedOptions dc_opt;
    std::vector<double> eps_values;
    double dc_r = 0.0;
    double dc_T = 0.5;
    double dc_cap = entstop::kDefaultIntensityCap;
    bool dc_discounted = false;
    std::uint64_t dc_clock_seed = 7;
    auto* defaultcheck = app.add_subcommand(
        "defaultcheck", "Defaultable-claim check of the hitting rule on a one-asset market");
    add_shared(defaultcheck, dc_opt);
    defaultcheck->add_option("--eps", eps_values, "Stopping thresholds epsilon_stop (absolute)");
    defaultcheck->add_option("--r", dc_r, "Interest rate");
    defaultcheck->add_option("--T", dc_T, "Maturity");
    defaultcheck->add_option("--cap", dc_cap, "Intensity cap");
    defaultcheck->add_option("--clock-seed", dc_clock_seed, "Seed of the default clock");
    defaultcheck->add_flag("--discounted", dc_discounted, "Discount the claim at r");

    // proptest ---------------------------------------------------------------
    auto* proptest = app.add_subcommand("proptest", "Run the driver property suite");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (*price) {
            entstop::ExperimentConfig cfg = price_opt.config.empty()
                                                ? entstop::table1_config(10000)
                                                : entstop::load_experiment_config(price_opt.config);
            if (price_opt.config.empty()) {
                cfg.s0_values = {100.0};
            }
            entstop::SchemeSelector sel;
            sel.kind = entstop::scheme_kind_from_string(scheme);
            sel.n_values = {100.0};
            sel.config.newton_max_iter = newton_iter;
            sel.config.pia_iterations = pia_iter;
            sel.binomial_steps = binomial_steps;
            cfg.schemes = {sel};
            apply_shared(price_opt, cfg);

            if (!export_paths.empty() || !dump_coefficients.empty()) {
                cfg.validate();
                entstop::MarketConfig market = cfg.market;
                std::fill(market.s0.begin(), market.s0.end(), cfg.s0_values.front());
                const auto paths = entstop::simulate_paths(
                    market, entstop::TimeGrid(market.T, cfg.steps), cfg.n_paths, cfg.seed);
                if (!export_paths.empty()) {
                    auto out = open_output(export_paths);
                    entstop::write_paths_csv(paths, out);
                }
                if (!dump_coefficients.empty() && sel.kind != entstop::SchemeKind::binomial) {
                    const auto& s = cfg.schemes.front();
                    entstop::SchemeConfig sc = s.config;
                    const double n = s.n_values.front();
                    sc.params = entstop::DriverParams{s.lambda.value_or(1.0 / n), n, market.r};
                    const auto basis =
                        entstop::BasisSpec::default_for(market.dim(), cfg.payoff.strike);
                    entstop::ValueSurface surface;
                    switch (s.kind) {
                        case entstop::SchemeKind::implicit:
                            surface = entstop::entropy_implicit(paths, cfg.payoff, sc, basis);
                            break;
                        case entstop::SchemeKind::pia:
                            surface = entstop::pia(paths, cfg.payoff, sc, basis);
                            break;
                        default:
                            surface = entstop::classical_penalization(paths, cfg.payoff, sc, basis);
                            break;
                    }
                    auto out = open_output(dump_coefficients);
                    surface.model.write_csv(out);
                }
            }
            return report_and_exit(entstop::run_experiment(cfg), cfg.output_path);
        }

        if (*table1) {
            entstop::ExperimentConfig cfg = table_opt.config.empty()
                                                ? entstop::table1_config()
                                                : entstop::load_experiment_config(table_opt.config);
            apply_shared(table_opt, cfg);
            return report_and_exit(entstop::run_experiment(cfg), cfg.output_path);
        }

        if (*nsweep) {
            const auto setup = setup_from(sweep_opt, 10000);
            const double lambda = sweep_opt.lambda.value_or(0.1);
            const std::vector<double> ns =
                sweep_opt.n.empty() ? std::vector<double>{2, 4, 8, 16, 32, 64} : sweep_opt.n;
            const auto rep = entstop::n_sweep(setup, lambda, ns);

            auto write = [&](std::ostream& out) {
                out << std::setprecision(6) << "lambda,n,price,std_error\n";
                for (std::size_t i = 0; i < rep.n_values.size(); ++i) {
                    out << rep.lambda << ',' << rep.n_values[i] << ',' << rep.prices[i] << ','
                        << rep.std_errors[i] << '\n';
                }
            };
            write(std::cout);
            std::cout << "monotone_violation=" << rep.monotone_violation << '\n';
            if (!sweep_opt.output.empty()) {
                auto out = open_output(sweep_opt.output);
                write(out);
            }
            return 0;
        }

        if (*defaultcheck) {
            entstop::SimulationSetup setup = setup_from(dc_opt, 10000);
            if (dc_opt.config.empty()) {
                setup.market = entstop::MarketConfig{{100.0}, dc_r, 0.0, 0.2, dc_T};
                if (dc_opt.s0) setup.market.s0 = {*dc_opt.s0};
                setup.steps = dc_opt.steps.value_or(50);
                setup.basis = entstop::BasisSpec::default_for(1, setup.payoff.strike);
            }
            const double lambda = dc_opt.lambda.value_or(0.5);
            const double n_proxy = dc_opt.n.empty() ? 1000.0 : dc_opt.n.front();
            if (eps_values.empty()) {
                eps_values = {0.5 * lambda, 0.1 * lambda, 0.01 * lambda};
            }
            entstop::DefaultCheckOptions options;
            options.intensity_cap = dc_cap;
            options.discounted = dc_discounted;

            std::ostringstream csv;
            csv << std::setprecision(6)
                << "lambda,n_proxy,epsilon_stop,v_lambda_0,estimate,std_error,cap_engagements,"
                   "survival_gap,survival_tolerance\n";
            for (double eps : eps_values) {
                const auto rep = entstop::defaultable_mc_check(setup, lambda, n_proxy, eps,
                                                               dc_clock_seed, options);
                csv << lambda << ',' << n_proxy << ',' << rep.epsilon_stop << ','
                    << rep.v_lambda_0 << ',' << rep.rep_estimate << ',' << rep.std_error << ','
                    << rep.cap_engagements << ',' << rep.survival_gap << ','
                    << rep.survival_tolerance << '\n';
            }
            std::cout << csv.str();
            if (!dc_opt.output.empty()) {
                open_output(dc_opt.output) << csv.str();
            }
            return 0;
        }

        if (*proptest) {
            bool ok = true;
            for (const auto& r : entstop::run_driver_properties()) {
                std::cout << (r.passed ? "PASS " : "FAIL ") << std::left << std::setw(36)
                          << r.name << " worst=" << r.worst;
                if (!r.detail.empty()) std::cout << "  " << r.detail;
                std::cout << '\n';
                ok = ok && r.passed;
            }
            return ok ? 0 : kExitNumeric;
        }
    } catch (const entstop::IoError& e) {
        std::cerr << "I/O error: " << e.what() << '\n';
        return kExitIo;
    } catch (const entstop::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "numeric error: " << e.what() << '\n';
        return kExitNumeric;
    }
    return 0;
}
