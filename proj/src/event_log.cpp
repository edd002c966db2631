#include "hlem/event_log.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <map>
#include <numeric>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "hlem/csv.hpp"

namespace hlem {

std::string_view to_string(ComponentKind kind) {
    switch (kind) {
        case ComponentKind::Activity: return "activity";
        case ComponentKind::Resource: return "resource";
        case ComponentKind::Segment: return "segment";
    }
    return "?";
}

namespace {

// Sorted unique names plus a lookup from name to its position.
struct Interner {
    std::vector<std::string> names;
    std::unordered_map<std::string, NameIndex> index;

    void build(std::vector<std::string> raw) {
        std::sort(raw.begin(), raw.end());
        raw.erase(std::unique(raw.begin(), raw.end()), raw.end());
        names = std::move(raw);
        index.clear();
        for (std::size_t i = 0; i < names.size(); ++i) index.emplace(names[i], static_cast<NameIndex>(i));
    }
};

template <class Vec>
std::optional<NameIndex> lookup_sorted(const Vec& names, std::string_view name) {
    auto it = std::lower_bound(names.begin(), names.end(), name,
                               [](const std::string& a, std::string_view b) { return a < b; });
    if (it == names.end() || *it != name) return std::nullopt;
    return static_cast<NameIndex>(it - names.begin());
}

// Days since 1970-01-01 for a proleptic Gregorian date.
std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, std::int64_t& y, unsigned& m, unsigned& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = doy - (153 * mp + 2) / 5 + 1;
    m = mp < 10 ? mp + 3 : mp - 9;
    y += m <= 2;
}

class Cursor {
public:
    explicit Cursor(std::string_view s) : s_(s) {}
    bool done() const { return pos_ >= s_.size(); }
    char peek() const { return done() ? '\0' : s_[pos_]; }
    bool accept(char c) {
        if (peek() != c) return false;
        ++pos_;
        return true;
    }
    bool digits(int count, int& out) {
        if (pos_ + count > s_.size()) return false;
        int v = 0;
        for (int i = 0; i < count; ++i) {
            char c = s_[pos_ + i];
            if (c < '0' || c > '9') return false;
            v = v * 10 + (c - '0');
        }
        pos_ += count;
        out = v;
        return true;
    }
    std::string_view rest() const { return s_.substr(pos_); }
    void skip(std::size_t n) { pos_ += n; }

private:
    std::string_view s_;
    std::size_t pos_ = 0;
};

std::optional<double> parse_iso8601(std::string_view text) {
    Cursor c(text);
    int year, month, day;
    if (!c.digits(4, year) || !c.accept('-') || !c.digits(2, month) || !c.accept('-') || !c.digits(2, day))
        return std::nullopt;
    if (month < 1 || month > 12 || day < 1 || day > 31) return std::nullopt;
    int hour = 0, minute = 0, second = 0;
    double frac = 0.0;
    double offset = 0.0;
    if (!c.done()) {
        if (!c.accept('T') && !c.accept(' ')) return std::nullopt;
        if (!c.digits(2, hour) || !c.accept(':') || !c.digits(2, minute)) return std::nullopt;
        if (c.accept(':')) {
            if (!c.digits(2, second)) return std::nullopt;
            if (c.accept('.') || c.accept(',')) {
                double scale = 0.1;
                bool any = false;
                while (c.peek() >= '0' && c.peek() <= '9') {
                    frac += scale * (c.peek() - '0');
                    scale /= 10.0;
                    c.skip(1);
                    any = true;
                }
                if (!any) return std::nullopt;
            }
        }
        if (hour > 23 || minute > 59 || second > 60) return std::nullopt;
        if (c.accept('Z')) {
        } else if (c.peek() == '+' || c.peek() == '-') {
            int sign = c.peek() == '-' ? -1 : 1;
            c.skip(1);
            int oh, om = 0;
            if (!c.digits(2, oh)) return std::nullopt;
            c.accept(':');
            if (!c.done() && !c.digits(2, om)) return std::nullopt;
            offset = sign * (oh * 3600.0 + om * 60.0);
        }
        if (!c.done()) return std::nullopt;
    }
    double days = static_cast<double>(days_from_civil(year, static_cast<unsigned>(month), static_cast<unsigned>(day)));
    return days * 86400.0 + hour * 3600.0 + minute * 60.0 + second + frac - offset;
}

std::optional<double> parse_seconds(std::string_view text) {
    while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
    while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
    double v = 0.0;
    auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

std::optional<double> parse_pattern(std::string_view text, const std::string& pattern) {
    std::tm tm{};
    std::istringstream in{std::string(text)};
    in >> std::get_time(&tm, pattern.c_str());
    if (in.fail()) return std::nullopt;
    in >> std::ws;
    if (!in.eof()) return std::nullopt;
    double days = static_cast<double>(
        days_from_civil(tm.tm_year + 1900, static_cast<unsigned>(tm.tm_mon + 1), static_cast<unsigned>(tm.tm_mday)));
    return days * 86400.0 + tm.tm_hour * 3600.0 + tm.tm_min * 60.0 + tm.tm_sec;
}

}  // namespace

double parse_timestamp(std::string_view text, const std::string& format) {
    std::optional<double> v;
    if (format == "iso8601") {
        v = parse_iso8601(text);
    } else if (format == "seconds") {
        v = parse_seconds(text);
    } else {
        v = parse_pattern(text, format);
    }
    if (!v) throw Error("cannot parse timestamp '" + std::string(text) + "' as " + format);
    return *v;
}

std::string format_timestamp(double seconds, const std::string& format) {
    if (format == "seconds") return csv::format_number(seconds);
    // Millisecond resolution for everything calendar-based.
    auto total_ms = static_cast<std::int64_t>(std::llround(seconds * 1000.0));
    std::int64_t ms = total_ms % 1000;
    std::int64_t secs = total_ms / 1000;
    if (ms < 0) {
        ms += 1000;
        secs -= 1;
    }
    std::int64_t days = secs / 86400;
    std::int64_t rem = secs % 86400;
    if (rem < 0) {
        rem += 86400;
        days -= 1;
    }
    std::int64_t y;
    unsigned m, d;
    civil_from_days(days, y, m, d);
    if (format != "iso8601") {
        std::tm tm{};
        tm.tm_year = static_cast<int>(y - 1900);
        tm.tm_mon = static_cast<int>(m) - 1;
        tm.tm_mday = static_cast<int>(d);
        tm.tm_hour = static_cast<int>(rem / 3600);
        tm.tm_min = static_cast<int>((rem % 3600) / 60);
        tm.tm_sec = static_cast<int>(rem % 60);
        std::ostringstream out;
        out << std::put_time(&tm, format.c_str());
        return out.str();
    }
    char buf[48];
    int n = std::snprintf(buf, sizeof(buf), "%04lld-%02u-%02uT%02lld:%02lld:%02lld", static_cast<long long>(y), m, d,
                          static_cast<long long>(rem / 3600), static_cast<long long>((rem % 3600) / 60),
                          static_cast<long long>(rem % 60));
    std::string out(buf, static_cast<std::size_t>(n));
    if (ms != 0) {
        std::snprintf(buf, sizeof(buf), ".%03lld", static_cast<long long>(ms));
        out += buf;
    }
    return out;
}

EventLog EventLog::from_records(std::vector<EventRecord> records, bool has_resources, std::string timestamp_format) {
    EventLog log;
    log.has_resources_ = has_resources;
    log.timestamp_format_ = std::move(timestamp_format);
    const std::size_t n = records.size();

    Interner cases, acts, res;
    {
        std::vector<std::string> c, a, r;
        c.reserve(n);
        a.reserve(n);
        for (const auto& rec : records) {
            c.push_back(rec.case_id);
            a.push_back(rec.activity);
            if (has_resources && rec.resource && !rec.resource->empty()) r.push_back(*rec.resource);
        }
        cases.build(std::move(c));
        acts.build(std::move(a));
        res.build(std::move(r));
    }

    std::map<std::string, std::size_t> attr_slots;
    for (const auto& rec : records)
        for (const auto& [key, _] : rec.extra) attr_slots.emplace(key, 0);
    for (auto& [key, slot] : attr_slots) {
        slot = log.attribute_names_.size();
        log.attribute_names_.push_back(key);
    }
    log.attribute_values_.assign(log.attribute_names_.size(), std::vector<std::string>(n));

    log.ids_.reserve(n);
    log.case_.reserve(n);
    log.activity_.reserve(n);
    log.resource_.reserve(n);
    log.time_.reserve(n);
    std::unordered_set<std::string> seen_ids;
    for (std::size_t i = 0; i < n; ++i) {
        auto& rec = records[i];
        if (rec.id.empty()) rec.id = "e" + std::to_string(i + 1);
        if (!seen_ids.insert(rec.id).second) throw Error("duplicate event id '" + rec.id + "'");
        if (!std::isfinite(rec.time)) throw Error("non-finite timestamp for event '" + rec.id + "'");
        log.ids_.push_back(std::move(rec.id));
        log.case_.push_back(cases.index.at(rec.case_id));
        log.activity_.push_back(acts.index.at(rec.activity));
        if (has_resources && rec.resource && !rec.resource->empty())
            log.resource_.push_back(res.index.at(*rec.resource));
        else
            log.resource_.push_back(kNoName);
        log.time_.push_back(rec.time);
        for (auto& [key, value] : rec.extra) log.attribute_values_[attr_slots.at(key)][i] = std::move(value);
    }
    log.case_names_ = std::move(cases.names);
    log.activity_names_ = std::move(acts.names);
    log.resource_names_ = std::move(res.names);

    log.traces_.assign(log.case_names_.size(), {});
    for (EventIndex e = 0; e < n; ++e) log.traces_[log.case_[e]].push_back(e);
    for (auto& trace : log.traces_) {
        // Canonical order: timestamp, then input row.
        std::stable_sort(trace.begin(), trace.end(),
                         [&](EventIndex a, EventIndex b) { return log.time_[a] < log.time_[b]; });
    }

    log.next_.assign(n, kNoEvent);
    log.prev_.assign(n, kNoEvent);
    std::vector<Segment> segs;
    for (const auto& trace : log.traces_) {
        for (std::size_t i = 0; i + 1 < trace.size(); ++i) {
            log.next_[trace[i]] = trace[i + 1];
            log.prev_[trace[i + 1]] = trace[i];
            segs.emplace_back(log.activity_[trace[i]], log.activity_[trace[i + 1]]);
        }
    }
    std::sort(segs.begin(), segs.end());
    segs.erase(std::unique(segs.begin(), segs.end()), segs.end());
    log.segments_ = std::move(segs);

    if (n > 0) {
        auto [lo, hi] = std::minmax_element(log.time_.begin(), log.time_.end());
        log.min_time_ = *lo;
        log.max_time_ = *hi;
    }
    return log;
}

std::optional<NameIndex> EventLog::resource(EventIndex e) const {
    if (resource_[e] == kNoName) return std::nullopt;
    return resource_[e];
}

std::optional<NameIndex> EventLog::find_activity(std::string_view name) const {
    return lookup_sorted(activity_names_, name);
}

std::optional<NameIndex> EventLog::find_resource(std::string_view name) const {
    return lookup_sorted(resource_names_, name);
}

std::optional<CaseIndex> EventLog::find_case(std::string_view name) const {
    return lookup_sorted(case_names_, name);
}

std::optional<EventIndex> EventLog::find_event(std::string_view id) const {
    for (EventIndex e = 0; e < ids_.size(); ++e)
        if (ids_[e] == id) return e;
    return std::nullopt;
}

std::vector<std::pair<EventIndex, EventIndex>> EventLog::steps() const {
    std::vector<std::pair<EventIndex, EventIndex>> out;
    for (EventIndex e = 0; e < size(); ++e)
        if (next_[e] != kNoEvent) out.emplace_back(e, next_[e]);
    return out;
}

bool EventLog::has_segment(NameIndex a, NameIndex b) const {
    return std::binary_search(segments_.begin(), segments_.end(), Segment{a, b});
}

std::vector<ComponentId> EventLog::components() const {
    std::vector<ComponentId> out;
    for (NameIndex a = 0; a < activity_names_.size(); ++a) out.push_back(ComponentId::activity(a));
    if (has_resources_)
        for (NameIndex r = 0; r < resource_names_.size(); ++r) out.push_back(ComponentId::resource(r));
    for (const auto& [a, b] : segments_) out.push_back(ComponentId::segment(a, b));
    return out;
}

std::string EventLog::component_label(const ComponentId& c) const {
    switch (c.kind) {
        case ComponentKind::Activity: return activity_names_.at(c.first);
        case ComponentKind::Resource: return resource_names_.at(c.first);
        case ComponentKind::Segment: return activity_names_.at(c.first) + "->" + activity_names_.at(c.second);
    }
    return {};
}

ComponentId EventLog::parse_component(ComponentKind kind, std::string_view label) const {
    switch (kind) {
        case ComponentKind::Activity:
            if (auto a = find_activity(label)) return ComponentId::activity(*a);
            throw Error("unknown activity '" + std::string(label) + "'");
        case ComponentKind::Resource:
            if (!has_resources_) throw Error("the log has no resource attribute");
            if (auto r = find_resource(label)) return ComponentId::resource(*r);
            throw Error("unknown resource '" + std::string(label) + "'");
        case ComponentKind::Segment:
            for (const auto& [a, b] : segments_)
                if (activity_names_[a] + "->" + activity_names_[b] == label) return ComponentId::segment(a, b);
            throw Error("unknown segment '" + std::string(label) + "'");
    }
    throw Error("bad component kind");
}

void EventLog::require_component(const ComponentId& c) const {
    switch (c.kind) {
        case ComponentKind::Activity:
            if (c.first >= activity_names_.size()) throw Error("unknown activity");
            return;
        case ComponentKind::Resource:
            if (!has_resources_) throw Error("the log has no resource attribute");
            if (c.first >= resource_names_.size()) throw Error("unknown resource");
            return;
        case ComponentKind::Segment:
            if (!has_segment(c.first, c.second)) throw Error("unknown segment");
            return;
    }
}

std::optional<std::size_t> EventLog::attribute_slot(std::string_view name) const {
    for (std::size_t i = 0; i < attribute_names_.size(); ++i)
        if (attribute_names_[i] == name) return i;
    return std::nullopt;
}

std::optional<std::string_view> EventLog::attribute(EventIndex e, std::string_view name) const {
    auto slot = attribute_slot(name);
    if (!slot) return std::nullopt;
    const auto& v = attribute_values_[*slot][e];
    if (v.empty()) return std::nullopt;
    return std::string_view(v);
}

bool EventLog::is_case_attribute(std::string_view name) const {
    auto slot = attribute_slot(name);
    if (!slot) return false;
    const auto& values = attribute_values_[*slot];
    for (const auto& trace : traces_) {
        const std::string* first = nullptr;
        for (EventIndex e : trace) {
            const auto& v = values[e];
            if (v.empty()) continue;
            if (!first)
                first = &v;
            else if (*first != v)
                return false;
        }
    }
    return true;
}

std::vector<std::optional<std::string>> EventLog::case_attribute(std::string_view name) const {
    auto slot = attribute_slot(name);
    if (!slot) throw Error("unknown attribute '" + std::string(name) + "'");
    if (!is_case_attribute(name))
        throw Error("attribute '" + std::string(name) + "' is not constant within cases");
    std::vector<std::optional<std::string>> out(case_names_.size());
    const auto& values = attribute_values_[*slot];
    for (CaseIndex c = 0; c < traces_.size(); ++c)
        for (EventIndex e : traces_[c])
            if (!values[e].empty()) {
                out[c] = values[e];
                break;
            }
    return out;
}

EventLog load_csv(const std::filesystem::path& path, const CsvSchema& schema) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open event log '" + path.string() + "'");
    auto rows = csv::read(in, schema.delimiter);
    if (rows.empty()) throw Error("empty file: '" + path.string() + "' has no header");
    if (rows.size() == 1) throw Error("empty file: '" + path.string() + "' has no data rows");

    const auto& header = rows.front();
    auto column = [&](const std::string& name) -> std::optional<std::size_t> {
        if (name.empty()) return std::nullopt;
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        return std::nullopt;
    };
    auto required = [&](const std::string& name, const char* role) {
        auto c = column(name);
        if (!c) throw Error(std::string("missing mandatory ") + role + " column '" + name + "'");
        return *c;
    };
    const std::size_t case_col = required(schema.case_column, "case");
    const std::size_t act_col = required(schema.activity_column, "activity");
    const std::size_t time_col = required(schema.timestamp_column, "timestamp");
    const auto res_col = column(schema.resource_column);
    std::optional<std::size_t> id_col;
    if (!schema.id_column.empty()) id_col = required(schema.id_column, "id");

    std::vector<EventRecord> records;
    records.reserve(rows.size() - 1);
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        const std::size_t line = r + 1;
        if (row.size() != header.size())
            throw Error("row " + std::to_string(line) + ": expected " + std::to_string(header.size()) +
                        " fields, found " + std::to_string(row.size()));
        EventRecord rec;
        rec.case_id = row[case_col];
        rec.activity = row[act_col];
        if (rec.case_id.empty()) throw Error("row " + std::to_string(line) + ": empty case id");
        if (rec.activity.empty()) throw Error("row " + std::to_string(line) + ": empty activity");
        try {
            rec.time = parse_timestamp(row[time_col], schema.timestamp_format);
        } catch (const Error& err) {
            throw Error("row " + std::to_string(line) + ": " + err.what());
        }
        if (res_col && !row[*res_col].empty()) rec.resource = row[*res_col];
        if (id_col) rec.id = row[*id_col];
        for (std::size_t c = 0; c < header.size(); ++c) {
            if (c == case_col || c == act_col || c == time_col || (res_col && c == *res_col) || (id_col && c == *id_col))
                continue;
            rec.extra.emplace_back(header[c], row[c]);
        }
        records.push_back(std::move(rec));
    }
    return EventLog::from_records(std::move(records), res_col.has_value(), schema.timestamp_format);
}

}  // namespace hlem
