#include <filesystem>
#include <iostream>

#include "CLI11.hpp"
#include "degenlab/lab.hpp"

namespace {

int run_command(const std::string& source, const degenlab::RunOptions& options) {
    using namespace degenlab;
    ExperimentConfig config;
    try {
        if (std::filesystem::exists(source)) {
            config = load_config(source);
        } else if (const Scenario* s = find_scenario(source)) {
            config = parse_config(s->yaml, "scenario:" + s->name);
        } else {
            std::cerr << "dlab: " << source << ": no such config file or packaged scenario\n";
            return 1;
        }
        config = apply_overrides(std::move(config), options);
    } catch (const std::exception& e) {
        std::cerr << "dlab: invalid config: " << e.what() << "\n";
        return 1;
    }

    RunReport report;
    try {
        report = run_experiment(config);
    } catch (const std::exception& e) {
        std::cerr << "dlab: run failed: " << e.what() << "\n";
        return 1;
    }
    std::filesystem::path dir = config.output.empty() ? std::filesystem::path("dlab-out") / config.scenario
                                                      : std::filesystem::path(config.output);
    try {
        write_report(report, dir);
    } catch (const std::exception& e) {
        std::cerr << "dlab: " << e.what() << "\n";
        return 1;
    }
    const int code = exit_code(report);
    std::cout << config.scenario << ": " << report.records.size() << " records, " << report.certified_failures
              << " certified failures, " << report.continuum_failures << " continuum failures -> " << dir.string()
              << "\n";
    for (const AuditRecord& r : report.records)
        if (!r.pass && r.kind != RecordKind::observational)
            std::cout << "  FAIL " << to_string(r.kind) << " " << r.audit << " [" << r.subject << "] left=" << r.left
                      << " right=" << r.right << "\n";
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Audits for heat and wave propagators of degenerate divergence-form operators"};
    app.require_subcommand(1);

    degenlab::RunOptions options;
    std::string source;
    auto* run = app.add_subcommand("run", "Run a config file or packaged scenario");
    run->add_option("config", source, "Config path or packaged scenario name")->required();
    run->add_option("--grid-override", options.grid_override, "Replace the grid sizes with a single n");
    run->add_option("--out", options.output, "Output directory");
    run->add_option("--jobs", options.jobs, "Worker threads (0: hardware parallelism)");
    run->add_option("--seed", options.seed, "Random seed");

    app.add_subcommand("list-scenarios", "List packaged scenarios");

    std::string name;
    auto* describe = app.add_subcommand("describe", "Print a packaged scenario");
    describe->add_option("scenario", name, "Scenario name")->required();

    CLI11_PARSE(app, argc, argv);

    if (app.got_subcommand("list-scenarios")) {
        for (const auto& s : degenlab::packaged_scenarios()) std::cout << s.name << "\t" << s.summary << "\n";
        return 0;
    }
    if (app.got_subcommand("describe")) {
        const degenlab::Scenario* s = degenlab::find_scenario(name);
        if (!s) {
            std::cerr << "dlab: unknown scenario '" << name << "'\n";
            return 1;
        }
        std::cout << "# " << s->summary << "\n" << s->yaml;
        return 0;
    }
    return run_command(source, options);
}
