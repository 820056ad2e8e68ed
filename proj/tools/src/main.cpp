#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"

int main(int argc, char** argv) {
    using namespace dpusim::cli;

    CLI::App app{"dpusim: DES + analytic model of a host pipeline time-sharing one "
                 "DNN accelerator"};
    app.require_subcommand(1);

    SimulateArgs sim_args;
    auto* sim = app.add_subcommand("simulate", "Run one scenario and print metrics");
    sim->add_option("--scenario", sim_args.scenario, "builtin scenario id");
    sim->add_option("--config", sim_args.config_path, "scenario file");
    sim->add_option("--params", sim_args.params_path, "fitted params file");
    sim->add_option("--csv", sim_args.csv_path, "write the metrics report CSV here");
    sim->add_option("--trace", sim_args.trace_path, "write the event trace CSV here");
    sim->add_flag("--dump-config", sim_args.dump_config,
                  "print the resolved scenario file and exit");

    SweepArgs sweep_args;
    auto* sweep = app.add_subcommand("sweep", "Simulate a size/frequency/worker grid");
    sweep->add_option("--scenario", sweep_args.scenario, "builtin scenario id");
    sweep->add_option("--config", sweep_args.config_path, "scenario file");
    sweep->add_option("--params", sweep_args.params_path, "fitted params file");
    sweep->add_option("--size", sweep_args.sizes, "comma list of ops/cycle");
    sweep->add_option("--freq", sweep_args.freqs, "comma list of MHz");
    sweep->add_option("--workers", sweep_args.workers, "comma list of worker counts");
    sweep->add_option("--out", sweep_args.out_path, "output CSV (default stdout)");

    CalibrateArgs cal_args;
    auto* cal = app.add_subcommand("calibrate", "Fit latency/camera parameters to tables");
    cal->add_option("--tables", cal_args.tables, "'builtin' or comma list of CSV files");
    cal->add_option("--out", cal_args.out_path, "fitted params file (default fitted.params)");
    cal->add_option("--report", cal_args.report_path, "fit report CSV");
    cal->add_option("--seed", cal_args.seed, "optimizer seed");
    cal->add_option("--max-iters", cal_args.max_iters, "objective evaluation budget");

    AnalyzeArgs ana_args;
    auto* ana = app.add_subcommand("analyze", "Analytic throughput bounds over a grid");
    ana->add_option("--scenario", ana_args.scenario, "builtin scenario id");
    ana->add_option("--config", ana_args.config_path, "scenario file");
    ana->add_option("--params", ana_args.params_path, "fitted params file");
    ana->add_option("--size", ana_args.sizes, "comma list of ops/cycle");
    ana->add_option("--freq", ana_args.freqs, "comma list of MHz");
    ana->add_option("--workers", ana_args.workers, "comma list of worker counts");
    ana->add_option("--out", ana_args.out_path, "output CSV (default stdout)");

    ReportArgs rep_args;
    auto* rep = app.add_subcommand("report", "Markdown comparison against the bundled tables");
    rep->add_flag("--against-paper", rep_args.against_paper,
                  "compare simulation with the bundled reference measurements");
    rep->add_option("--params", rep_args.params_path, "fitted params file");
    rep->add_option("--out", rep_args.out_path, "output file (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitValidation;
    }

    if (sim->parsed()) return cmd_simulate(sim_args, std::cout, std::cerr);
    if (sweep->parsed()) return cmd_sweep(sweep_args, std::cout, std::cerr);
    if (cal->parsed()) return cmd_calibrate(cal_args, std::cout, std::cerr);
    if (ana->parsed()) return cmd_analyze(ana_args, std::cout, std::cerr);
    if (rep->parsed()) return cmd_report(rep_args, std::cout, std::cerr);
    return kExitValidation;
}
