#pragma once

#include <compare>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hlem/common.hpp"

namespace hlem {

/// Column mapping used by load_csv. Column names are matched exactly against
/// the header row.
struct CsvSchema {
    std::string case_column = "case";
    std::string activity_column = "activity";
    std::string timestamp_column = "timestamp";
    /// Optional. When the column is missing from the file the log has no
    /// resource attribute at all.
    std::string resource_column = "resource";
    /// Optional. Without it events are named e1, e2, ... by data row.
    std::string id_column;
    /// "iso8601", "seconds" (numeric), or a strptime pattern such as
    /// "%d.%m.%Y %H:%M:%S".
    std::string timestamp_format = "iso8601";
    char delimiter = ',';
};

/// One raw row, before indexing.
struct EventRecord {
    std::string id;
    std::string case_id;
    std::string activity;
    double time = 0.0;
    std::optional<std::string> resource;
    std::vector<std::pair<std::string, std::string>> extra;
};

enum class ComponentKind : std::uint8_t { Activity, Resource, Segment };

std::string_view to_string(ComponentKind kind);

/// An activity, a resource, or a segment (activity pair). Names are interned
/// in the owning EventLog; indexes follow lexicographic name order, so the
/// natural ordering of ComponentId is kind-then-name.
struct ComponentId {
    ComponentKind kind = ComponentKind::Activity;
    NameIndex first = 0;
    NameIndex second = 0;

    static ComponentId activity(NameIndex a) { return {ComponentKind::Activity, a, 0}; }
    static ComponentId resource(NameIndex r) { return {ComponentKind::Resource, r, 0}; }
    static ComponentId segment(NameIndex a, NameIndex b) { return {ComponentKind::Segment, a, b}; }

    auto operator<=>(const ComponentId&) const = default;
};

using Segment = std::pair<NameIndex, NameIndex>;

/// Immutable, fully indexed event log. Events keep their input order
/// (EventIndex == data row), traces are ordered by (timestamp, row).
class EventLog {
public:
    /// Builds and indexes a log. `has_resources` is the log-wide presence of
    /// the resource attribute; `timestamp_format` is remembered so exports can
    /// be written in the same dialect.
    static EventLog from_records(std::vector<EventRecord> records, bool has_resources,
                                 std::string timestamp_format = "seconds");

    std::size_t size() const { return time_.size(); }
    bool empty() const { return time_.empty(); }

    const std::string& id(EventIndex e) const { return ids_[e]; }
    CaseIndex case_of(EventIndex e) const { return case_[e]; }
    NameIndex activity(EventIndex e) const { return activity_[e]; }
    std::optional<NameIndex> resource(EventIndex e) const;
    double time(EventIndex e) const { return time_[e]; }
    EventIndex next(EventIndex e) const { return next_[e]; }
    EventIndex prev(EventIndex e) const { return prev_[e]; }

    std::size_t case_count() const { return case_names_.size(); }
    std::size_t activity_count() const { return activity_names_.size(); }
    std::size_t resource_count() const { return resource_names_.size(); }
    const std::string& case_name(CaseIndex c) const { return case_names_[c]; }
    const std::string& activity_name(NameIndex a) const { return activity_names_[a]; }
    const std::string& resource_name(NameIndex r) const { return resource_names_[r]; }
    std::optional<NameIndex> find_activity(std::string_view name) const;
    std::optional<NameIndex> find_resource(std::string_view name) const;
    std::optional<CaseIndex> find_case(std::string_view name) const;
    std::optional<EventIndex> find_event(std::string_view id) const;

    bool has_resources() const { return has_resources_; }
    const std::string& timestamp_format() const { return timestamp_format_; }

    std::span<const EventIndex> trace(CaseIndex c) const { return traces_[c]; }
    const std::vector<std::vector<EventIndex>>& traces() const { return traces_; }
    std::vector<std::pair<EventIndex, EventIndex>> steps() const;
    /// Sorted, duplicate-free.
    const std::vector<Segment>& segments() const { return segments_; }
    bool has_segment(NameIndex a, NameIndex b) const;

    double min_time() const { return min_time_; }
    double max_time() const { return max_time_; }

    /// A(L) ∪ R(L) ∪ S(L), sorted. Resources are omitted when the attribute is
    /// absent from the log.
    std::vector<ComponentId> components() const;
    /// "review", "Jane", "submit->review".
    std::string component_label(const ComponentId& c) const;
    /// Inverse of component_label for the given kind; throws on unknown names.
    ComponentId parse_component(ComponentKind kind, std::string_view label) const;
    void require_component(const ComponentId& c) const;

    const std::vector<std::string>& attribute_names() const { return attribute_names_; }
    /// Empty optional when the event has no (or an empty) value.
    std::optional<std::string_view> attribute(EventIndex e, std::string_view name) const;
    /// True when every case carries at most one distinct value.
    bool is_case_attribute(std::string_view name) const;
    /// Per-case value of a case-level attribute; throws if the attribute is
    /// unknown or varies within some case.
    std::vector<std::optional<std::string>> case_attribute(std::string_view name) const;

private:
    std::vector<std::string> ids_;
    std::vector<CaseIndex> case_;
    std::vector<NameIndex> activity_;
    std::vector<NameIndex> resource_;  // kNoName when undefined
    std::vector<double> time_;
    std::vector<EventIndex> next_;
    std::vector<EventIndex> prev_;

    std::vector<std::string> case_names_;
    std::vector<std::string> activity_names_;
    std::vector<std::string> resource_names_;
    std::vector<std::vector<EventIndex>> traces_;
    std::vector<Segment> segments_;

    std::vector<std::string> attribute_names_;
    std::vector<std::vector<std::string>> attribute_values_;  // [attribute][event]

    bool has_resources_ = false;
    std::string timestamp_format_;
    double min_time_ = 0.0;
    double max_time_ = 0.0;

    static constexpr NameIndex kNoName = static_cast<NameIndex>(-1);
    std::optional<std::size_t> attribute_slot(std::string_view name) const;
};

/// Reads a CSV event log. Errors name the offending row (1-based, header is
/// row 1).
EventLog load_csv(const std::filesystem::path& path, const CsvSchema& schema);

/// Seconds since the Unix epoch (or raw seconds for the "seconds" format).
double parse_timestamp(std::string_view text, const std::string& format);
std::string format_timestamp(double seconds, const std::string& format);

}  // namespace hlem
