#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>

#include "evx/harness/report.hpp"
#include "evx/harness/scenario.hpp"

using namespace evx;

namespace {

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::uint32_t> runs;
    std::string guard;
};

harness::Scenario resolve(const std::string& target, const Overrides& o) {
    harness::Scenario s = harness::is_preset(target) ? harness::preset(target) : harness::load_scenario(target);
    if (o.seed) s.seed = *o.seed;
    if (o.runs) s.runs = *o.runs;
    if (o.guard == "on") s.world.guard_enabled = true;
    if (o.guard == "off") s.world.guard_enabled = false;
    s.validate();
    return s;
}

void add_overrides(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--seed", o.seed, "Base seed (run i uses seed + i)");
    cmd->add_option("--runs", o.runs, "Number of runs")->check(CLI::PositiveNumber);
    cmd->add_option("--guard", o.guard, "Force the distance-bounding guard on or off")
        ->check(CLI::IsMember({"on", "off"}));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"EV charging relay-attack lab"};
    app.require_subcommand(1);

    std::string target;
    std::string out_dir = "out";
    std::string format = "csv";
    Overrides overrides;

    auto* run = app.add_subcommand("run", "Run a scenario file or preset and write its report");
    run->add_option("target", target, "Scenario file or preset name")->required();
    run->add_option("--out", out_dir, "Output directory");
    run->add_option("--format", format, "Report format")->check(CLI::IsMember({"csv", "text"}));
    add_overrides(run, overrides);

    auto* list = app.add_subcommand("list-presets", "List the built-in scenarios");

    std::string export_out;
    auto* exp = app.add_subcommand("export", "Print a preset or scenario file in the scenario file format");
    exp->add_option("target", target, "Scenario file or preset name")->required();
    exp->add_option("--out", export_out, "Directory to write <name>.ini into instead of stdout");
    add_overrides(exp, overrides);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*list) {
            for (const auto& s : harness::list_presets()) {
                std::printf("%-12s %-16s %s\n", s.name.c_str(), harness::to_string(s.world.topology).c_str(),
                            s.is_attack() ? harness::to_string(s.world.peer.kind).c_str() : "-");
            }
            return 0;
        }
        if (*exp) {
            const harness::Scenario s = resolve(target, overrides);
            if (export_out.empty()) {
                harness::write_scenario(std::cout, s);
                return 0;
            }
            std::filesystem::create_directories(export_out);
            const auto path = std::filesystem::path(export_out) / (s.name + ".ini");
            std::ofstream out(path);
            if (!out) throw harness::IoError("cannot write " + path.string());
            harness::write_scenario(out, s);
            std::printf("%s\n", path.string().c_str());
            return 0;
        }
        const harness::Scenario s = resolve(target, overrides);
        const harness::ScenarioReport report = harness::run_scenario(s);
        const auto fmt = format == "text" ? harness::ReportFormat::Text : harness::ReportFormat::Csv;
        for (const auto& p : harness::emit_report(report, fmt, out_dir)) std::fprintf(stderr, "wrote %s\n", p.c_str());
        std::fputs(harness::summary_text(report).c_str(), stdout);
        return 0;
    } catch (const harness::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
