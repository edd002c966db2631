#include "hlem/hl_export.hpp"

#include <algorithm>
#include <fstream>
#include <ostream>

#include "hlem/csv.hpp"

namespace hlem {

TimestampMode parse_timestamp_mode(std::string_view text) {
    if (text == "window_start") return TimestampMode::WindowStart;
    if (text == "window_end") return TimestampMode::WindowEnd;
    throw Error("export.timestamp_mode must be window_start or window_end, got '" + std::string(text) + "'");
}

std::string_view to_string(TimestampMode mode) {
    return mode == TimestampMode::WindowStart ? "window_start" : "window_end";
}

std::vector<HLLogRecord> hl_log_records(const EventLog& log, std::span<const HighLevelEvent> hles,
                                        std::span<const Cascade> cascades, const Framing& framing,
                                        TimestampMode mode) {
    std::vector<HLLogRecord> out;
    out.reserve(hles.size());
    for (const auto& c : cascades) {
        for (NodeIndex n : c.members()) {
            if (n >= hles.size()) throw Error("cascade refers to an unknown high-level event");
            const auto& h = hles[n];
            const auto w = framing.window(h.window);
            out.push_back({n, c.id, label(log, h.activity()), mode == TimestampMode::WindowStart ? w.start : w.end,
                           h.value, h.events.size()});
        }
    }
    if (out.size() != hles.size()) throw Error("cascades do not cover every high-level event exactly once");
    std::sort(out.begin(), out.end(), [](const HLLogRecord& a, const HLLogRecord& b) {
        if (a.cascade != b.cascade) return a.cascade < b.cascade;
        if (a.time != b.time) return a.time < b.time;
        if (a.activity != b.activity) return a.activity < b.activity;
        return a.hle < b.hle;
    });
    return out;
}

void write_hl_log(std::ostream& out, std::span<const HLLogRecord> records, const std::string& timestamp_format) {
    csv::write_row(out, {"case", "activity", "timestamp", "value", "n_events"});
    for (const auto& r : records)
        csv::write_row(out, {std::to_string(r.cascade), r.activity, format_timestamp(r.time, timestamp_format),
                             csv::format_number(r.value), std::to_string(r.n_events)});
}

void export_hl_log(const EventLog& log, std::span<const HighLevelEvent> hles, std::span<const Cascade> cascades,
                   const Framing& framing, TimestampMode mode, const std::filesystem::path& path) {
    const auto records = hl_log_records(log, hles, cascades, framing, mode);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    write_hl_log(out, records, log.timestamp_format());
    out.flush();
    if (!out) throw Error("failed writing " + path.string());
}

}  // namespace hlem
