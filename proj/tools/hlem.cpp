#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "hlem/pipeline.hpp"

namespace {

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw hlem::Error("cannot read config " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Mine high-level events from event logs"};
    app.require_subcommand(1, 1);

    std::string config_path;
    std::vector<std::string> overrides;
    std::string out_dir;
    const std::map<std::string, std::string> help{
        {"detect", "Detect high-level events (hle.csv)"},
        {"cascades", "Link high-level events into cascades (edges.csv, cascades.json)"},
        {"threads", "Enumerate threads and their variants (threads.csv)"},
        {"interplay", "Rank thread variants and test case attributes (interplay.csv)"},
        {"robustness", "Disruptions, resolution scopes and waiting-time robustness (robustness.csv)"},
        {"export", "Write the high-level event log (hl_log.csv)"},
        {"simulate", "Generate a synthetic log with ground truth (log.csv, truth.json)"},
        {"plotdata", "Per-window aspect series for plotting (series.csv)"},
    };
    for (const auto& name : hlem::kCommands) {
        auto* sub = app.add_subcommand(name, help.at(name));
        sub->add_option("-c,--config", config_path, "JSON config file");
        sub->add_option("-s,--set", overrides, "Override a config key, e.g. thresholds.percentile=95");
        sub->add_option("-o,--out", out_dir, "Output directory (overrides output.dir)");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        const std::string command = app.get_subcommands().front()->get_name();
        std::string text = config_path.empty() ? "{}" : read_text(config_path);
        for (const auto& o : overrides) hlem::apply_override(text, o);
        const std::string base =
            config_path.empty() ? "." : std::filesystem::path(config_path).parent_path().string();
        auto config = hlem::parse_config(text, base.empty() ? "." : base);
        if (!out_dir.empty()) config.output_dir = out_dir;
        const auto output = hlem::run_command(command, config);
        hlem::write_outputs(config.output_dir, output);
        for (const auto& [name, _] : output.files)
            std::cout << (std::filesystem::path(config.output_dir) / name).string() << "\n";
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
