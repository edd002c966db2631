#pragma once

#include <string>

#include "hlem/aspects.hpp"

namespace fixtures {

inline hlem::CsvSchema seconds_schema() {
    hlem::CsvSchema s;
    s.timestamp_format = "seconds";
    return s;
}

inline hlem::EventLog load_l0() { return hlem::load_csv(std::string(HLEM_TEST_DATA) + "/L0.csv", seconds_schema()); }

inline hlem::Framing l0_framing(const hlem::EventLog& log) { return hlem::make_framing(log, 10.0, 0.0); }

}  // namespace fixtures
