#include <doctest.h>

#include "fixtures.hpp"

using namespace hlem;

TEST_CASE("L0 framing with origin 0 and width 10") {
    const auto log = fixtures::load_l0();
    const auto fr = fixtures::l0_framing(log);
    CHECK(fr.first() == 0);
    CHECK(fr.last() == 3);
    CHECK(fr.window_count() == 4);
    CHECK(fr.window_of(9.999) == 0);
    CHECK(fr.window_of(10.0) == 1);  // half-open
    const auto w1 = fr.window(1);
    CHECK(w1.start == 10.0);
    CHECK(w1.end == 20.0);
    std::size_t in_w1 = 0;
    for (EventIndex e = 0; e < log.size(); ++e) in_w1 += fr.window_of(log.time(e)) == 1;
    CHECK(in_w1 == 3);
}

TEST_CASE("framing defaults and errors") {
    const auto log = fixtures::load_l0();
    const auto fr = make_framing(log, 10.0);
    CHECK(fr.origin() == 1.0);
    CHECK(fr.window_count() == 4);
    CHECK_THROWS_AS(make_framing(log, 10.0, 5.0), Error);
    CHECK_THROWS_AS(make_framing(log, 0.0), Error);
    CHECK_THROWS_AS(Framing(0.0, -1.0, 0, 1), Error);
}

TEST_CASE("window_of is monotone and windows tile the axis") {
    Framing fr(-7.5, 2.5, -10, 10);
    double prev = -1e9;
    WindowIndex last = fr.window_of(prev);
    for (double t = -30.0; t < 30.0; t += 0.37) {
        const auto w = fr.window_of(t);
        CHECK(w >= last);
        const auto win = fr.window(w);
        CHECK(win.start <= t);
        CHECK(t < win.end);
        last = w;
        prev = t;
    }
}

TEST_CASE("durations") {
    CHECK(parse_duration("1d") == 86400.0);
    CHECK(parse_duration("4h") == 14400.0);
    CHECK(parse_duration("30m") == 1800.0);
    CHECK(parse_duration("30min") == 1800.0);
    CHECK(parse_duration("600s") == 600.0);
    CHECK(parse_duration("250ms") == 0.25);
    CHECK(parse_duration("1w") == 604800.0);
    CHECK(parse_duration("12.5") == 12.5);
    CHECK_THROWS_AS(parse_duration("soon"), Error);
}
