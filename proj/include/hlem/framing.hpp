#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "hlem/common.hpp"

namespace hlem {

class EventLog;

/// Half-open window [start, end) with end - start == width.
struct TimeWindow {
    WindowIndex index = 0;
    double start = 0.0;
    double end = 0.0;
};

/// Fixed-width partition of the time axis, plus the contiguous window range
/// W that a log occupies.
class Framing {
public:
    Framing(double origin, double width, WindowIndex first, WindowIndex last);

    double origin() const { return origin_; }
    double width() const { return width_; }

    /// floor((t - origin) / width).
    WindowIndex window_of(double t) const;
    TimeWindow window(WindowIndex w) const;

    WindowIndex first() const { return first_; }
    WindowIndex last() const { return last_; }
    std::size_t window_count() const { return static_cast<std::size_t>(last_ - first_ + 1); }
    bool contains(WindowIndex w) const { return w >= first_ && w <= last_; }
    /// Position of window w inside W (0-based).
    std::size_t slot(WindowIndex w) const { return static_cast<std::size_t>(w - first_); }
    std::vector<TimeWindow> windows() const;

private:
    double origin_;
    double width_;
    WindowIndex first_;
    WindowIndex last_;
};

/// Frames `log` with windows of `width` seconds. The origin defaults to the
/// earliest event; an explicit origin may not lie after it.
Framing make_framing(const EventLog& log, double width, std::optional<double> origin = std::nullopt);

/// "1d", "4h", "30m", "600s", "250ms" or a bare number of seconds.
double parse_duration(std::string_view text);

}  // namespace hlem
