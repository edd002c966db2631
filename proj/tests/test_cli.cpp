#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("hlem_cli_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void spit(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

struct Run {
    int status;
    std::string output;
};

Run run(const std::string& args, const fs::path& dir) {
    const auto log = dir / "stdout.txt";
    const std::string cmd = std::string(HLEM_CLI) + " " + args + " > \"" + log.string() + "\" 2>&1";
    const int raw = std::system(cmd.c_str());
    return {raw, slurp(log)};
}

std::string l0_config() {
    return R"({"input": {"path": ")" + std::string(HLEM_TEST_DATA) + R"(/L0.csv",
                         "schema": {"timestamp_format": "seconds"}},
               "framing": {"width": 10, "origin": 0},
               "aspects": ["exec"], "thresholds": {"percentile": 100}})";
}

// Output files of one run, with the run-dependent manifest fields removed.
std::map<std::string, std::string> outputs(const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& f : fs::directory_iterator(dir)) {
        auto text = slurp(f.path());
        if (f.path().filename() == "manifest.json") {
            auto j = nlohmann::json::parse(text);
            j.erase("timings_ms");
            j.erase("parallelism");
            text = j.dump();
        }
        out[f.path().filename().string()] = text;
    }
    return out;
}

}  // namespace

TEST_CASE("detect on L0") {
    const auto dir = scratch("l0");
    spit(dir / "config.json", l0_config());
    const auto r = run("detect -c " + (dir / "config.json").string() + " -o " + (dir / "out").string(), dir);
    REQUIRE(r.status == 0);
    const auto csv = slurp(dir / "out" / "hle.csv");
    CHECK(csv.find("exec,review,1,10,20,2,2,2,c1 c2") != std::string::npos);
    std::size_t review_rows = 0;
    for (std::size_t p = csv.find(",review,"); p != std::string::npos; p = csv.find(",review,", p + 1)) ++review_rows;
    CHECK(review_rows == 1);
    CHECK(fs::exists(dir / "out" / "manifest.json"));
}

TEST_CASE("errors exit non-zero without writing outputs") {
    const auto dir = scratch("errors");
    spit(dir / "config.json", l0_config());
    const std::string cfg = " -c " + (dir / "config.json").string();
    auto r = run("detect" + cfg + " -o " + (dir / "a").string() + " -s input.path=/does/not/exist.csv", dir);
    CHECK(r.status != 0);
    CHECK(r.output.find("does not exist") != std::string::npos);
    CHECK_FALSE(fs::exists(dir / "a"));

    r = run("detect" + cfg + " -o " + (dir / "b").string() + " -s bogus=1 -s proximity.lambda=2", dir);
    CHECK(r.status != 0);
    CHECK(r.output.find("bogus: unknown key") != std::string::npos);
    CHECK(r.output.find("proximity.lambda") != std::string::npos);
    CHECK_FALSE(fs::exists(dir / "b"));

    r = run("teleport" + cfg, dir);
    CHECK(r.status != 0);
}

TEST_CASE("simulate, then analyse deterministically") {
    const auto dir = scratch("sim");
    spit(dir / "scenario.json", R"({"horizon": 30, "bursts": {"multiplier": 5, "count": 1}})");
    spit(dir / "sim.json", R"({"simulate": {"scenario": "scenario.json"}, "seed": 5})");
    auto r = run("simulate -c " + (dir / "sim.json").string() + " -o " + (dir / "sim").string(), dir);
    REQUIRE(r.status == 0);
    REQUIRE(fs::exists(dir / "sim" / "log.csv"));
    const auto truth = nlohmann::json::parse(slurp(dir / "sim" / "truth.json"));
    CHECK(truth["burst_windows"].size() == 1);

    spit(dir / "run.json", R"({"input": {"path": "sim/log.csv"},
                               "framing": {"width": 3600, "origin": "2024-01-01T00:00:00Z"},
                               "aspects": ["exec", "enqueue", "queue", "delayEnd"],
                               "thresholds": {"percentile": 95},
                               "interplay": {"attributes": ["submitter"]}})");
    for (const std::string cmd : {"detect", "cascades", "threads", "interplay", "robustness", "export", "plotdata"}) {
        const std::string base = cmd + " -c " + (dir / "run.json").string();
        auto one = run(base + " -s parallelism=1 -o " + (dir / (cmd + "1")).string(), dir);
        auto many = run(base + " -s parallelism=4 -o " + (dir / (cmd + "4")).string(), dir);
        REQUIRE_MESSAGE(one.status == 0, one.output);
        REQUIRE(many.status == 0);
        const auto a = outputs(dir / (cmd + "1"));
        CHECK(a.size() >= 2);
        CHECK(a == outputs(dir / (cmd + "4")));
    }
    CHECK(slurp(dir / "detect1" / "hle.csv").size() > 100);
}

TEST_CASE("default aspects skip resource aspects on logs without resources") {
    const auto dir = scratch("nores");
    spit(dir / "log.csv", "case,activity,timestamp\nc1,a,1\nc1,b,5\nc2,a,2\nc2,b,14\n");
    spit(dir / "config.json", R"({"input": {"path": "log.csv", "schema": {"timestamp_format": "seconds"}},
                                  "framing": {"width": 10, "origin": 0}})");
    auto r = run("detect -c " + (dir / "config.json").string() + " -o " + (dir / "out").string(), dir);
    REQUIRE_MESSAGE(r.status == 0, r.output);
    const auto csv = slurp(dir / "out" / "hle.csv");
    CHECK(csv.find(",exec,") != std::string::npos);
    CHECK(csv.find("workload") == std::string::npos);

    r = run("detect -c " + (dir / "config.json").string() + " -o " + (dir / "out2").string() +
                " -s 'aspects=[\"do\"]'",
            dir);
    CHECK(r.status != 0);
    CHECK(r.output.find("resource") != std::string::npos);
}
