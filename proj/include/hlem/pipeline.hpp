#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hlem/hl_export.hpp"
#include "hlem/interplay.hpp"
#include "hlem/robustness.hpp"
#include "hlem/simgen.hpp"

namespace hlem {

/// Everything one run needs, parsed from a JSON config.
struct Config {
    std::string input_path;
    CsvSchema schema;
    double width = 86400.0;
    std::optional<double> origin;
    std::vector<Aspect> aspects;
    /// False when the config left `aspects` out; resource-based aspects are
    /// then skipped for logs without resources instead of failing.
    bool aspects_explicit = false;
    ThresholdPolicy thresholds;
    ProximityMethod method = ProximityMethod::Link;
    double lambda = 0.5;
    ThreadPruning pruning;
    std::vector<std::string> interplay_attributes;
    std::size_t bins = 4;
    RankWeights weights;
    RobustnessPolicy robustness;
    TimestampMode timestamp_mode = TimestampMode::WindowEnd;
    unsigned parallelism = 0;
    std::uint64_t seed = 42;
    std::string output_dir = "out";
    /// Scenario file for `simulate`; the citizenship preset when empty.
    std::string scenario_path;

    /// Canonical JSON of the effective config; parallelism is left out so the
    /// hash does not depend on it.
    std::string canonical_json() const;
};

/// Sets a dotted key ("thresholds.percentile=95"). The value is read as JSON
/// when it parses, as a string otherwise.
void apply_override(std::string& json_text, const std::string& assignment);

/// Parses and validates; throws one Error listing every problem found.
Config parse_config(const std::string& json_text, const std::string& base_dir = ".");

/// 64-bit FNV-1a, printed as 16 hex digits.
std::string fnv1a_hex(const std::string& data);

inline const std::vector<std::string> kCommands{"detect",     "cascades", "threads",  "interplay",
                                                "robustness", "export",   "simulate", "plotdata"};

struct RunOutput {
    /// file name -> content, including manifest.json.
    std::map<std::string, std::string> files;
};

/// Runs one subcommand fully in memory. Nothing touches the disk until every
/// stage succeeded.
RunOutput run_command(const std::string& command, const Config& config);

/// Creates the directory and writes every file.
void write_outputs(const std::filesystem::path& dir, const RunOutput& output);

}  // namespace hlem
