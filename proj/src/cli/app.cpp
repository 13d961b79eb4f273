#include <CLI11.hpp>

#include <exception>
#include <ostream>

#include "commands.hpp"
#include "qsafe/cli.hpp"

namespace qsafe::cli {

namespace {

void add_case_options(CLI::App& cmd, CaseOptions& input) {
    cmd.add_option("file", input.file, ".qcase file")->required();
    cmd.add_option("--mode", input.mode, "Confidence handling: paper or bonferroni")
        ->check(CLI::IsMember({"paper", "bonferroni"}));
    cmd.add_option("--interval", input.interval, "Interval method: cp, wilson or normal (only cp is conservative)")
        ->check(CLI::IsMember({"cp", "clopper-pearson", "wilson", "normal", "wald"}));
    cmd.add_option("--at-time", input.at_time, "Mission time in hours for a scope profile");
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Quantitative safety budgets for data-driven components", "qsafe"};
    app.require_subcommand(1);

    CheckOptions check;
    CLI::App* check_cmd = app.add_subcommand("check", "Evaluate the composed bound against the target");
    add_case_options(*check_cmd, check.input);
    check_cmd->add_option("--format", check.format, "text, md or json")
        ->check(CLI::IsMember({"text", "md", "json"}));

    DeriveOptions derive;
    CLI::App* derive_cmd = app.add_subcommand("derive", "Derive the bound the test campaign has to demonstrate");
    add_case_options(*derive_cmd, derive.input);
    derive_cmd->add_option("--format", derive.format, "text, md or json")
        ->check(CLI::IsMember({"text", "md", "json"}));
    derive_cmd->add_option("--solve-for", derive.solve_for, "failures or samples")
        ->check(CLI::IsMember({"failures", "samples"}));
    derive_cmd->add_option("--expected-rate", derive.expected_rate, "Expected failure rate for sample planning")
        ->check(CLI::Range(0.0, 1.0));
    derive_cmd->add_option("--sample-cap", derive.sample_cap, "Largest sample size considered")
        ->check(CLI::PositiveNumber);

    SensitivityOptions sens;
    CLI::App* sens_cmd = app.add_subcommand("sensitivity", "Sweep one parameter and tabulate the bound");
    add_case_options(*sens_cmd, sens.input);
    sens_cmd->add_option("--vary", sens.vary, "p_oos, p_detect_srf, p_detect_oos, p_lf, samples, failures or cl")
        ->required();
    sens_cmd->add_option("--from", sens.from, "First value")->required();
    sens_cmd->add_option("--to", sens.to, "Last value")->required();
    sens_cmd->add_option("--steps", sens.steps, "Number of values (>= 2)");
    sens_cmd->add_option("--out", sens.out, "csv or json")->check(CLI::IsMember({"csv", "json"}));

    SimulateOptions sim;
    CLI::App* sim_cmd = app.add_subcommand("simulate", "Measure empirical coverage by Monte Carlo simulation");
    sim_cmd->add_option("--true-srf", sim.truth.p_srf, "True failure rate within scope")->check(CLI::Range(0.0, 1.0));
    sim_cmd->add_option("--true-oos", sim.truth.p_oos, "True out-of-scope rate")->check(CLI::Range(0.0, 1.0));
    sim_cmd->add_option("--true-detect-srf", sim.truth.p_detect_srf, "True failure detection rate")
        ->check(CLI::Range(0.0, 1.0));
    sim_cmd->add_option("--true-detect-oos", sim.truth.p_detect_oos, "True out-of-scope detection rate")
        ->check(CLI::Range(0.0, 1.0));
    sim_cmd->add_option("--true-lf", sim.truth.p_lf, "True label fault rate")->check(CLI::Range(0.0, 1.0));
    sim_cmd->add_option("--n", sim.n, "Test samples per campaign")->check(CLI::PositiveNumber);
    sim_cmd->add_option("--n-detect", sim.n_detect, "Fixed detection campaign size (default: simulated failures)");
    sim_cmd->add_option("--cl", sim.cl, "Confidence level")->check(CLI::Range(0.0, 1.0));
    sim_cmd->add_option("--case", sim.case_id, "B, C, D, E, optionally with +F");
    sim_cmd->add_option("--mode", sim.mode, "paper or bonferroni")->check(CLI::IsMember({"paper", "bonferroni"}));
    sim_cmd->add_option("--runs", sim.runs, "Simulated campaigns")->check(CLI::PositiveNumber);
    sim_cmd->add_option("--seed", sim.seed, "Experiment seed")->required();
    sim_cmd->add_option("--workers", sim.workers, "Worker threads (results do not depend on it)")
        ->check(CLI::Range(1u, 256u));
    sim_cmd->add_option("--truth-form", sim.truth_form, "factored or linearized true value")
        ->check(CLI::IsMember({"factored", "linearized"}));
    sim_cmd->add_flag("--grid", sim.grid, "Run the standard coverage grid and print CSV");

    RenderOptions render;
    CLI::App* render_cmd = app.add_subcommand("render", "Export the assurance argument");
    add_case_options(*render_cmd, render.input);
    render_cmd->add_option("--format", render.format, "dot or json")->check(CLI::IsMember({"dot", "json"}));

    std::vector<std::string> argv_storage{"qsafe"};
    argv_storage.insert(argv_storage.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (const auto& a : argv_storage) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kSatisfied : kUsageError;
    }

    const Streams io{out, err};
    try {
        if (check_cmd->parsed()) return cmd_check(check, io);
        if (derive_cmd->parsed()) return cmd_derive(derive, io);
        if (sens_cmd->parsed()) return cmd_sensitivity(sens, io);
        if (sim_cmd->parsed()) return cmd_simulate(sim, io);
        if (render_cmd->parsed()) return cmd_render(render, io);
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        return kInternalError;
    }
    err << "internal error: no command dispatched\n";
    return kInternalError;
}

} // namespace qsafe::cli
