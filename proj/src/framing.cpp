#include "hlem/framing.hpp"

#include <charconv>
#include <cmath>
#include <string>

#include "hlem/event_log.hpp"

namespace hlem {

Framing::Framing(double origin, double width, WindowIndex first, WindowIndex last)
    : origin_(origin), width_(width), first_(first), last_(last) {
    if (!(width > 0.0) || !std::isfinite(width)) throw Error("window width must be positive");
    if (last < first) throw Error("empty window range");
}

WindowIndex Framing::window_of(double t) const {
    return static_cast<WindowIndex>(std::floor((t - origin_) / width_));
}

TimeWindow Framing::window(WindowIndex w) const {
    double start = origin_ + static_cast<double>(w) * width_;
    return {w, start, start + width_};
}

std::vector<TimeWindow> Framing::windows() const {
    std::vector<TimeWindow> out;
    out.reserve(window_count());
    for (WindowIndex w = first_; w <= last_; ++w) out.push_back(window(w));
    return out;
}

Framing make_framing(const EventLog& log, double width, std::optional<double> origin) {
    if (!(width > 0.0)) throw Error("window width must be positive");
    if (log.empty()) throw Error("cannot frame an empty log");
    double o = origin.value_or(log.min_time());
    if (o > log.min_time()) throw Error("framing origin lies after the earliest event");
    Framing probe(o, width, 0, 0);
    return Framing(o, width, probe.window_of(log.min_time()), probe.window_of(log.max_time()));
}

double parse_duration(std::string_view text) {
    while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
    while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
    double value = 0.0;
    auto res = std::from_chars(text.data(), text.data() + text.size(), value);
    if (res.ec != std::errc{}) throw Error("bad duration '" + std::string(text) + "'");
    std::string_view unit(res.ptr, static_cast<std::size_t>(text.data() + text.size() - res.ptr));
    double scale;
    if (unit.empty() || unit == "s") {
        scale = 1.0;
    } else if (unit == "ms") {
        scale = 0.001;
    } else if (unit == "m" || unit == "min") {
        scale = 60.0;
    } else if (unit == "h") {
        scale = 3600.0;
    } else if (unit == "d") {
        scale = 86400.0;
    } else if (unit == "w") {
        scale = 7 * 86400.0;
    } else {
        throw Error("bad duration unit in '" + std::string(text) + "'");
    }
    double seconds = value * scale;
    if (!(seconds > 0.0) || !std::isfinite(seconds)) throw Error("duration must be positive: '" + std::string(text) + "'");
    return seconds;
}

}  // namespace hlem
