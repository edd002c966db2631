#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hlem/event_log.hpp"

namespace hlem::sim {

struct Route {
    std::string to;  // empty ends the case
    double probability = 0.0;
};

struct ActivityConfig {
    std::string name;
    std::vector<std::string> resources;
    double service_mean = 60.0;  // seconds, exponential
    std::vector<Route> routing;   // empty: the case ends here
};

struct BurstConfig {
    double multiplier = 1.0;
    /// Explicit burst windows; when empty, `count` windows are drawn at random
    /// at least `min_gap` windows apart and away from both ends.
    std::vector<std::int64_t> windows;
    std::size_t count = 0;
    std::size_t min_gap = 5;
};

/// Service at `activity` takes `multiplier` times longer when more than
/// `queue_cutoff` tasks are waiting for it when service starts.
struct SlowdownRule {
    std::string activity;
    std::size_t queue_cutoff = 0;
    double multiplier = 1.0;
};

struct ScenarioConfig {
    std::uint64_t seed = 42;
    double start = 0.0;     // epoch seconds of window 0
    double width = 3600.0;  // window width in seconds
    std::int64_t horizon = 100;  // arrivals happen in windows [0, horizon)
    double arrival_rate = 10.0;  // expected new cases per window
    std::string start_activity;
    std::vector<ActivityConfig> activities;
    BurstConfig bursts;
    std::vector<SlowdownRule> slowdowns;
    /// attribute -> (value -> probability)
    std::map<std::string, std::map<std::string, double>> case_attributes;
    /// A window counts as burst-affected at an activity when the injected
    /// cases' arrivals there reach this share of the base arrival rate.
    double truth_min_share = 1.0;
    std::string timestamp_format = "iso8601";

    /// Throws listing the first problem found.
    void validate() const;
};

/// The citizenship application process: submit, review, optional update
/// loops, then approve or deny. Jane handles submit and update; Mike and Sarah
/// review and decide.
ScenarioConfig citizenship_preset();

/// Parses a JSON scenario; missing keys keep the preset's values.
ScenarioConfig parse_scenario(const std::string& json_text);
std::string scenario_to_json(const ScenarioConfig& config);

struct GroundTruth {
    double origin = 0.0;
    double width = 0.0;
    std::int64_t horizon = 0;
    double burst_multiplier = 1.0;
    std::vector<std::int64_t> burst_windows;
    /// activity -> windows where injected arrivals reached the truth share.
    std::map<std::string, std::vector<std::int64_t>> activity_burst_windows;
    /// "a->b" -> windows in which a slowed service at b completed.
    std::map<std::string, std::vector<std::int64_t>> slowdown_windows;
    std::size_t injected_cases = 0;
};

std::string truth_to_json(const GroundTruth& truth);
GroundTruth parse_truth(const std::string& json_text);

struct Simulation {
    std::vector<EventRecord> records;  // sorted by (time, emission order)
    std::vector<std::string> attribute_names;
    GroundTruth truth;

    EventLog log() const;
};

Simulation generate(const ScenarioConfig& config);

/// Columns case, activity, timestamp, resource and one per case attribute.
void write_csv(std::ostream& out, const Simulation& sim, const std::string& timestamp_format);

}  // namespace hlem::sim
