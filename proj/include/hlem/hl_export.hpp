#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hlem/propagation.hpp"

namespace hlem {

enum class TimestampMode : std::uint8_t { WindowStart, WindowEnd };

TimestampMode parse_timestamp_mode(std::string_view text);
std::string_view to_string(TimestampMode mode);

struct HLLogRecord {
    NodeIndex hle = 0;
    std::uint32_t cascade = 0;
    std::string activity;  // "aspect@component"
    double time = 0.0;
    double value = 0.0;
    std::size_t n_events = 0;
};

/// One record per high-level event: the cascade is the case, the window
/// start or end the timestamp. Sorted by (case, timestamp, activity label).
std::vector<HLLogRecord> hl_log_records(const EventLog& log, std::span<const HighLevelEvent> hles,
                                        std::span<const Cascade> cascades, const Framing& framing,
                                        TimestampMode mode);

/// Writes the records as CSV (case, activity, timestamp, value, n_events),
/// with timestamps in the source log's format.
void write_hl_log(std::ostream& out, std::span<const HLLogRecord> records, const std::string& timestamp_format);

void export_hl_log(const EventLog& log, std::span<const HighLevelEvent> hles, std::span<const Cascade> cascades,
                   const Framing& framing, TimestampMode mode, const std::filesystem::path& path);

}  // namespace hlem
