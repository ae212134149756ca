// Command-line front end. Links only against the C API.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "bornlab/bornlab.h"

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

bool is_scenario_preset(const std::string& name) {
    for (std::size_t i = 0; i < bornlab_preset_count(); ++i)
        if (name == bornlab_preset_name(i) && std::string(bornlab_preset_kind(i)) == "scenario") return true;
    return false;
}

int report_error(bornlab_status status) {
    std::fprintf(stderr, "bornlab: %s\n", bornlab_last_error());
    switch (status) {
        case BORNLAB_PARSE_ERROR:
        case BORNLAB_VALIDATION_ERROR:
        case BORNLAB_IO_ERROR:
        case BORNLAB_INVALID_ARGUMENT: return kExitUsage;
        default: return kExitFailure;
    }
}

int finish(bornlab_report* report) {
    std::fputs(bornlab_report_text(report), stdout);
    for (size_t i = 0; i < bornlab_report_file_count(report); ++i) std::printf("wrote %s\n", bornlab_report_file(report, i));
    const int code = bornlab_report_passed(report) ? 0 : kExitFailure;
    bornlab_report_destroy(report);
    return code;
}

int list_presets() {
    for (size_t i = 0; i < bornlab_preset_count(); ++i)
        std::printf("%-10s %-22s %s\n", bornlab_preset_kind(i), bornlab_preset_name(i), bornlab_preset_description(i));
    return 0;
}

int show_preset(const std::string& name) {
    bornlab_scenario* s = nullptr;
    if (bornlab_status st = bornlab_scenario_from_preset(name.c_str(), &s); st != BORNLAB_OK) return report_error(st);
    std::fputs(bornlab_scenario_to_text(s), stdout);
    bornlab_scenario_destroy(s);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"bornlab: stochastic state-reduction laboratory"};
    app.require_subcommand(0, 1);

    std::string scenario_path;
    std::optional<std::uint64_t> seed, trajectories;
    std::optional<std::string> out_prefix;
    unsigned threads = 0;
    app.add_option("scenario", scenario_path, "Scenario file (JSON) or scenario preset name");
    app.add_option("--seed", seed, "Override the master seed");
    app.add_option("--trajectories", trajectories, "Override the trajectory count")->check(CLI::PositiveNumber);
    app.add_option("--out", out_prefix, "Override the output path prefix");
    app.add_option("--threads", threads, "Worker threads (default: BORNLAB_THREADS or all cores)");

    auto* verify = app.add_subcommand("verify", "Run the built-in property suite");
    unsigned verify_threads = 0;
    verify->add_option("--threads", verify_threads, "Worker threads");

    auto* preset = app.add_subcommand("preset", "Inspect built-in presets");
    preset->require_subcommand(1);
    preset->add_subcommand("list", "List presets");
    auto* show = preset->add_subcommand("show", "Print a scenario preset as a scenario file");
    std::string show_name;
    show->add_option("name", show_name, "Scenario preset name")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    if (verify->parsed()) {
        bornlab_report* report = nullptr;
        if (bornlab_status st = bornlab_verify(verify_threads ? verify_threads : threads, &report); st != BORNLAB_OK)
            return report_error(st);
        return finish(report);
    }
    if (preset->parsed()) {
        if (show->parsed()) return show_preset(show_name);
        return list_presets();
    }
    if (scenario_path.empty()) {
        std::fputs(app.help().c_str(), stderr);
        return kExitUsage;
    }

    bornlab_scenario* scenario = nullptr;
    // a bare preset name works when no such file exists
    const bool use_preset = !std::filesystem::exists(scenario_path) && is_scenario_preset(scenario_path);
    if (bornlab_status st = use_preset ? bornlab_scenario_from_preset(scenario_path.c_str(), &scenario)
                                       : bornlab_scenario_from_file(scenario_path.c_str(), &scenario);
        st != BORNLAB_OK)
        return report_error(st);
    bornlab_status st = BORNLAB_OK;
    if (seed) st = bornlab_scenario_set_seed(scenario, *seed);
    if (st == BORNLAB_OK && trajectories) st = bornlab_scenario_set_trajectories(scenario, *trajectories);
    if (st == BORNLAB_OK && out_prefix) st = bornlab_scenario_set_output(scenario, out_prefix->c_str());
    if (st != BORNLAB_OK) {
        bornlab_scenario_destroy(scenario);
        return report_error(st);
    }
    bornlab_report* report = nullptr;
    st = bornlab_run(scenario, threads, &report);
    bornlab_scenario_destroy(scenario);
    if (st != BORNLAB_OK) return report_error(st);
    return finish(report);
}
