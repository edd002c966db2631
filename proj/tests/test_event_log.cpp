#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "fixtures.hpp"
#include "hlem/csv.hpp"
#include "oracle.hpp"

using namespace hlem;

namespace {

std::filesystem::path write_temp(const std::string& name, const std::string& content) {
    auto path = std::filesystem::temp_directory_path() / ("hlem_test_" + name);
    std::ofstream(path, std::ios::binary) << content;
    return path;
}

std::string error_of(const std::string& content, const CsvSchema& schema = fixtures::seconds_schema()) {
    try {
        load_csv(write_temp("err.csv", content), schema);
    } catch (const Error& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST_CASE("L0 loads with traces ordered by time") {
    const auto log = fixtures::load_l0();
    CHECK(log.size() == 9);
    CHECK(log.case_count() == 3);
    CHECK(log.activity_count() == 4);
    CHECK(log.resource_count() == 3);
    const auto c3 = *log.find_case("c3");
    std::vector<std::string> acts;
    for (auto e : log.trace(c3)) acts.push_back(log.activity_name(log.activity(e)));
    CHECK(acts == std::vector<std::string>{"submit", "review", "approve"});
    const auto e1 = *log.find_event("e1");
    CHECK(log.id(log.next(e1)) == "e4");
    CHECK(log.prev(e1) == kNoEvent);
    CHECK(log.segments().size() == 3);
    // 4 activities, 3 resources and 3 segments.
    CHECK(log.components().size() == 10);
    CHECK(log.component_label(log.parse_component(ComponentKind::Segment, "submit->review")) == "submit->review");
    CHECK(log.steps().size() == 6);
}

TEST_CASE("next/prev match a brute-force successor search") {
    std::mt19937_64 rng(7);
    for (int round = 0; round < 30; ++round) {
        auto records = oracle::random_log(rng);
        const auto raw = oracle::index(records);
        const auto log = EventLog::from_records(records, true);
        for (EventIndex e = 0; e < log.size(); ++e) {
            const EventIndex expect = raw.next[e] < 0 ? kNoEvent : static_cast<EventIndex>(raw.next[e]);
            REQUIRE(log.next(e) == expect);
            const EventIndex expect_prev = raw.prev[e] < 0 ? kNoEvent : static_cast<EventIndex>(raw.prev[e]);
            REQUIRE(log.prev(e) == expect_prev);
        }
    }
}

TEST_CASE("load_csv reports malformed input") {
    CHECK(error_of("").find("empty file") != std::string::npos);
    CHECK(error_of("case,activity,timestamp\n").find("empty file") != std::string::npos);
    CHECK(error_of("case,timestamp\nc1,1\n").find("missing mandatory activity column") != std::string::npos);
    CHECK(error_of("case,activity,timestamp\nc1,a,1\nc1,b\n").find("row 3") != std::string::npos);
    CHECK(error_of("case,activity,timestamp\nc1,a,xx\n").find("row 2") != std::string::npos);
    CHECK(error_of("case,activity,timestamp\n,a,1\n").find("empty case") != std::string::npos);
    CsvSchema with_id = fixtures::seconds_schema();
    with_id.id_column = "id";
    CHECK(error_of("id,case,activity,timestamp\nx,c1,a,1\nx,c1,b,2\n", with_id).find("duplicate") != std::string::npos);
}

TEST_CASE("resource column is optional and attributes are read") {
    const auto path = write_temp("attrs.csv",
                                 "\xEF\xBB\xBF" "case,activity,timestamp,channel,amount\r\n"
                                 "c1,a,1,\"web, mobile\",10\r\n"
                                 "c1,b,2,\"web, mobile\",10\r\n"
                                 "c2,a,3,desk,\r\n");
    const auto log = load_csv(path, fixtures::seconds_schema());
    CHECK_FALSE(log.has_resources());
    CHECK(log.is_case_attribute("channel"));
    const auto channel = log.case_attribute("channel");
    CHECK(*channel[*log.find_case("c1")] == "web, mobile");
    const auto amount = log.case_attribute("amount");
    CHECK_FALSE(amount[*log.find_case("c2")].has_value());
    CHECK_THROWS_AS(log.case_attribute("nope"), Error);
}

TEST_CASE("ISO timestamps parse and format") {
    CHECK(parse_timestamp("1970-01-01T00:00:00Z", "iso8601") == 0.0);
    CHECK(parse_timestamp("1970-01-02", "iso8601") == 86400.0);
    CHECK(parse_timestamp("2024-03-01 12:30", "iso8601") == parse_timestamp("2024-03-01T12:30:00Z", "iso8601"));
    CHECK(parse_timestamp("2024-03-01T12:30:00+01:00", "iso8601") ==
          parse_timestamp("2024-03-01T11:30:00Z", "iso8601"));
    CHECK(parse_timestamp("2024-03-01T12:30:00.250Z", "iso8601") ==
          doctest::Approx(parse_timestamp("2024-03-01T12:30:00Z", "iso8601") + 0.25));
    const double t = parse_timestamp("2000-02-29T23:59:59.125Z", "iso8601");
    CHECK(parse_timestamp(format_timestamp(t, "iso8601"), "iso8601") == t);
    CHECK(parse_timestamp("01.02.2024 10:00:00", "%d.%m.%Y %H:%M:%S") ==
          parse_timestamp("2024-02-01T10:00:00Z", "iso8601"));
    CHECK_THROWS_AS(parse_timestamp("yesterday", "iso8601"), Error);
}

TEST_CASE("CSV writer round-trips through the reader") {
    std::ostringstream out;
    csv::write_row(out, {"plain", "with,comma", "with \"quote\"", "multi\nline", ""});
    std::istringstream in(out.str());
    const auto rows = csv::read(in, ',');
    REQUIRE(rows.size() == 1);
    CHECK(rows[0] == std::vector<std::string>{"plain", "with,comma", "with \"quote\"", "multi\nline", ""});
}
