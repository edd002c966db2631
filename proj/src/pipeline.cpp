#include "hlem/pipeline.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include <json.hpp>

#include "hlem/csv.hpp"

namespace hlem {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
        if (ch == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

json parse_json(const std::string& text, const std::string& what) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw Error(what + " is not valid JSON: " + e.what());
    }
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

void apply_override(std::string& json_text, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw Error("override '" + assignment + "' is not of the form key=value");
    const auto keys = split(assignment.substr(0, eq), '.');
    const std::string raw = assignment.substr(eq + 1);
    json value;
    try {
        value = json::parse(raw);
    } catch (const json::exception&) {
        value = raw;
    }
    json root = json_text.empty() ? json::object() : parse_json(json_text, "config");
    json* node = &root;
    for (std::size_t i = 0; i < keys.size(); ++i) {
        if (keys[i].empty()) throw Error("override '" + assignment + "' has an empty key segment");
        if (node->is_null()) *node = json::object();
        if (!node->is_object()) throw Error("override '" + assignment + "' descends into a non-object");
        if (i + 1 == keys.size()) (*node)[keys[i]] = value;
        else node = &(*node)[keys[i]];
    }
    json_text = root.dump();
}

std::string fnv1a_hex(const std::string& data) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char ch : data) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

namespace {

const std::set<std::string> kTopKeys{"input",  "framing",    "aspects", "thresholds", "proximity", "threads",
                                     "interplay", "robustness", "export",  "parallelism", "seed",     "output",
                                     "simulate"};

// Collects every problem instead of stopping at the first one.
struct Checker {
    std::vector<std::string> errors;

    template <class Fn>
    void guard(const std::string& key, Fn&& fn) {
        try {
            fn();
        } catch (const json::exception& e) {
            errors.push_back(key + ": wrong type (" + std::string(e.what()) + ")");
        } catch (const std::exception& e) {
            errors.push_back(key + ": " + e.what());
        }
    }
};

void unknown_keys(Checker& ck, const json& obj, const std::string& prefix, const std::set<std::string>& allowed) {
    if (!obj.is_object()) {
        ck.errors.push_back(prefix + ": expected an object");
        return;
    }
    for (const auto& [k, _] : obj.items())
        if (!allowed.count(k)) ck.errors.push_back((prefix.empty() ? "" : prefix + ".") + k + ": unknown key");
}

}  // namespace

Config parse_config(const std::string& json_text, const std::string& base_dir) {
    const json j = parse_json(json_text, "config");
    if (!j.is_object()) throw Error("config must be a JSON object");
    Config c;
    Checker ck;
    unknown_keys(ck, j, "", kTopKeys);
    auto resolve = [&](const std::string& p) {
        std::filesystem::path path(p);
        return path.is_absolute() ? path.string() : (std::filesystem::path(base_dir) / path).lexically_normal().string();
    };

    if (j.contains("input")) {
        const auto& in = j["input"];
        unknown_keys(ck, in, "input", {"path", "schema"});
        if (in.contains("path")) ck.guard("input.path", [&] { c.input_path = resolve(in["path"].get<std::string>()); });
        if (in.contains("schema")) {
            const auto& s = in["schema"];
            unknown_keys(ck, s, "input.schema",
                         {"case", "activity", "timestamp", "resource", "id", "timestamp_format", "delimiter"});
            ck.guard("input.schema", [&] {
                if (s.contains("case")) c.schema.case_column = s["case"].get<std::string>();
                if (s.contains("activity")) c.schema.activity_column = s["activity"].get<std::string>();
                if (s.contains("timestamp")) c.schema.timestamp_column = s["timestamp"].get<std::string>();
                if (s.contains("resource")) c.schema.resource_column = s["resource"].get<std::string>();
                if (s.contains("id")) c.schema.id_column = s["id"].get<std::string>();
                if (s.contains("timestamp_format")) c.schema.timestamp_format = s["timestamp_format"].get<std::string>();
                if (s.contains("delimiter")) {
                    const auto d = s["delimiter"].get<std::string>();
                    if (d.size() != 1) throw Error("delimiter must be a single character");
                    c.schema.delimiter = d[0];
                }
            });
        }
    }
    if (j.contains("framing")) {
        const auto& f = j["framing"];
        unknown_keys(ck, f, "framing", {"width", "origin"});
        if (f.contains("width"))
            ck.guard("framing.width", [&] {
                c.width = f["width"].is_number() ? f["width"].get<double>() : parse_duration(f["width"].get<std::string>());
                if (!(c.width > 0.0)) throw Error("must be positive");
            });
        if (f.contains("origin"))
            ck.guard("framing.origin", [&] {
                const auto& o = f["origin"];
                c.origin = o.is_number() ? o.get<double>() : parse_timestamp(o.get<std::string>(), "iso8601");
            });
    }
    ck.guard("aspects", [&] {
        if (!j.contains("aspects")) {
            for (const auto& a : kAspects) c.aspects.push_back(a.aspect);
            return;
        }
        c.aspects_explicit = true;
        for (const auto& a : j["aspects"]) c.aspects.push_back(parse_aspect(a.get<std::string>()));
        if (c.aspects.empty()) throw Error("at least one aspect is required");
    });
    if (j.contains("thresholds")) {
        const auto& t = j["thresholds"];
        unknown_keys(ck, t, "thresholds", {"percentile", "direction", "min_case_count", "overrides", "min_coverage"});
        if (t.contains("percentile")) ck.guard("thresholds.percentile", [&] { c.thresholds.percentile = t["percentile"].get<double>(); });
        if (t.contains("direction"))
            ck.guard("thresholds.direction", [&] { c.thresholds.direction = parse_direction(t["direction"].get<std::string>()); });
        if (t.contains("min_case_count"))
            ck.guard("thresholds.min_case_count", [&] { c.thresholds.min_case_count = t["min_case_count"].get<std::size_t>(); });
        if (t.contains("min_coverage"))
            ck.guard("thresholds.min_coverage", [&] { c.thresholds.min_coverage = t["min_coverage"].get<double>(); });
        if (t.contains("overrides"))
            ck.guard("thresholds.overrides", [&] {
                for (const auto& [key, v] : t["overrides"].items()) {
                    const auto at = key.find('@');
                    if (at == std::string::npos) {
                        parse_aspect(key);
                        c.thresholds.aspect_overrides[key] = v.get<double>();
                    } else {
                        parse_aspect(key.substr(0, at));
                        c.thresholds.overrides[{key.substr(0, at), key.substr(at + 1)}] = v.get<double>();
                    }
                }
            });
        ck.guard("thresholds", [&] { c.thresholds.validate(); });
    }
    if (j.contains("proximity")) {
        const auto& p = j["proximity"];
        unknown_keys(ck, p, "proximity", {"method", "lambda"});
        if (p.contains("method"))
            ck.guard("proximity.method", [&] { c.method = parse_proximity_method(p["method"].get<std::string>()); });
        if (p.contains("lambda"))
            ck.guard("proximity.lambda", [&] {
                c.lambda = p["lambda"].get<double>();
                if (!(c.lambda >= 0.0 && c.lambda <= 1.0)) throw Error("must lie in [0, 1]");
            });
    }
    if (j.contains("threads")) {
        const auto& t = j["threads"];
        unknown_keys(ck, t, "threads", {"min_first_last_case_share", "max_length", "max_count"});
        ck.guard("threads", [&] {
            if (t.contains("min_first_last_case_share"))
                c.pruning.min_first_last_case_share = t["min_first_last_case_share"].get<double>();
            if (t.contains("max_length")) c.pruning.max_length = t["max_length"].get<std::size_t>();
            if (t.contains("max_count")) c.pruning.max_count = t["max_count"].get<std::size_t>();
            c.pruning.validate();
        });
    }
    if (j.contains("interplay")) {
        const auto& i = j["interplay"];
        unknown_keys(ck, i, "interplay", {"attributes", "bins", "weights"});
        if (i.contains("attributes"))
            ck.guard("interplay.attributes", [&] { c.interplay_attributes = i["attributes"].get<std::vector<std::string>>(); });
        if (i.contains("bins"))
            ck.guard("interplay.bins", [&] {
                c.bins = i["bins"].get<std::size_t>();
                if (c.bins == 0) throw Error("must be positive");
            });
        if (i.contains("weights")) {
            const auto& w = i["weights"];
            unknown_keys(ck, w, "interplay.weights", {"size", "frequency", "reach"});
            ck.guard("interplay.weights", [&] {
                if (w.contains("size")) c.weights.size = w["size"].get<double>();
                if (w.contains("frequency")) c.weights.frequency = w["frequency"].get<double>();
                if (w.contains("reach")) c.weights.reach = w["reach"].get<double>();
                c.weights.validate();
            });
        }
    }
    if (j.contains("robustness")) {
        const auto& r = j["robustness"];
        unknown_keys(ck, r, "robustness", {"q_percentile", "p", "t", "tr", "overrides"});
        ck.guard("robustness", [&] {
            if (r.contains("q_percentile")) c.robustness.q_percentile = r["q_percentile"].get<double>();
            if (r.contains("p")) c.robustness.p = r["p"].get<double>();
            if (r.contains("t")) c.robustness.t = r["t"].get<double>();
            if (r.contains("tr")) c.robustness.tr = r["tr"].get<double>();
            if (r.contains("overrides"))
                for (const auto& [act, o] : r["overrides"].items()) {
                    ActivityThresholds th;
                    if (o.contains("q")) th.q = o["q"].get<double>();
                    if (o.contains("p")) th.p = o["p"].get<double>();
                    if (o.contains("t")) th.t = o["t"].get<double>();
                    if (o.contains("tr")) th.tr = o["tr"].get<double>();
                    c.robustness.overrides[act] = th;
                }
            c.robustness.validate();
        });
    }
    if (j.contains("export")) {
        const auto& e = j["export"];
        unknown_keys(ck, e, "export", {"timestamp_mode"});
        if (e.contains("timestamp_mode"))
            ck.guard("export.timestamp_mode",
                     [&] { c.timestamp_mode = parse_timestamp_mode(e["timestamp_mode"].get<std::string>()); });
    }
    if (j.contains("parallelism")) ck.guard("parallelism", [&] { c.parallelism = j["parallelism"].get<unsigned>(); });
    if (j.contains("seed")) ck.guard("seed", [&] { c.seed = j["seed"].get<std::uint64_t>(); });
    if (j.contains("output")) {
        const auto& o = j["output"];
        unknown_keys(ck, o, "output", {"dir"});
        if (o.contains("dir")) ck.guard("output.dir", [&] { c.output_dir = resolve(o["dir"].get<std::string>()); });
    } else {
        c.output_dir = resolve(c.output_dir);
    }
    if (j.contains("simulate")) {
        const auto& s = j["simulate"];
        unknown_keys(ck, s, "simulate", {"scenario"});
        if (s.contains("scenario"))
            ck.guard("simulate.scenario", [&] { c.scenario_path = resolve(s["scenario"].get<std::string>()); });
    }

    if (!ck.errors.empty()) {
        std::string msg = "invalid config:";
        for (const auto& e : ck.errors) msg += "\n  " + e;
        throw Error(msg);
    }
    return c;
}

std::string Config::canonical_json() const {
    ordered_json j;
    j["input"] = {{"path", input_path},
                  {"schema",
                   {{"case", schema.case_column},
                    {"activity", schema.activity_column},
                    {"timestamp", schema.timestamp_column},
                    {"resource", schema.resource_column},
                    {"id", schema.id_column},
                    {"timestamp_format", schema.timestamp_format},
                    {"delimiter", std::string(1, schema.delimiter)}}}};
    j["framing"] = {{"width", width}};
    if (origin) j["framing"]["origin"] = *origin;
    j["aspects"] = ordered_json::array();
    for (auto a : aspects) j["aspects"].push_back(std::string(to_string(a)));
    ordered_json overrides = ordered_json::object();
    for (const auto& [k, v] : thresholds.aspect_overrides) overrides[k] = v;
    for (const auto& [k, v] : thresholds.overrides) overrides[k.first + "@" + k.second] = v;
    j["thresholds"] = {{"percentile", thresholds.percentile},
                       {"direction", thresholds.direction == Direction::High ? "high" : "low"},
                       {"min_case_count", thresholds.min_case_count},
                       {"min_coverage", thresholds.min_coverage},
                       {"overrides", overrides}};
    j["proximity"] = {{"method", std::string(to_string(method))}, {"lambda", lambda}};
    j["threads"] = {{"min_first_last_case_share", pruning.min_first_last_case_share},
                    {"max_length", pruning.max_length},
                    {"max_count", pruning.max_count}};
    j["interplay"] = {{"attributes", interplay_attributes},
                      {"bins", bins},
                      {"weights", {{"size", weights.size}, {"frequency", weights.frequency}, {"reach", weights.reach}}}};
    ordered_json rob = {{"q_percentile", robustness.q_percentile}, {"p", robustness.p}, {"tr", robustness.tr}};
    if (robustness.t) rob["t"] = *robustness.t;
    ordered_json rob_over = ordered_json::object();
    for (const auto& [act, o] : robustness.overrides) {
        ordered_json x = ordered_json::object();
        if (o.q) x["q"] = *o.q;
        if (o.p) x["p"] = *o.p;
        if (o.t) x["t"] = *o.t;
        if (o.tr) x["tr"] = *o.tr;
        rob_over[act] = x;
    }
    rob["overrides"] = rob_over;
    j["robustness"] = rob;
    j["export"] = {{"timestamp_mode", std::string(to_string(timestamp_mode))}};
    j["seed"] = seed;
    j["simulate"] = {{"scenario", scenario_path}};
    return j.dump();
}

namespace {

using Clock = std::chrono::steady_clock;

struct Stages {
    ordered_json timings = ordered_json::object();
    ordered_json counts = ordered_json::object();

    template <class Fn>
    auto time(const std::string& name, Fn&& fn) {
        const auto t0 = Clock::now();
        if constexpr (std::is_void_v<decltype(fn())>) {
            fn();
            timings[name] = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
        } else {
            auto result = fn();
            timings[name] = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
            return result;
        }
    }
};

std::string num(double v) { return csv::format_number(v); }

std::string opt_num(const std::optional<double>& v) { return v ? num(*v) : "undefined"; }

std::string to_csv(const std::vector<std::vector<std::string>>& rows) {
    std::ostringstream out;
    for (const auto& r : rows) csv::write_row(out, r);
    return out.str();
}

// Lazily computed pipeline state shared by the subcommands.
class Session {
public:
    Session(const Config& config, Stages& stages) : config_(config), stages_(stages) {}

    const EventLog& log() {
        if (!log_) {
            if (config_.input_path.empty()) throw Error("input.path is not set");
            if (!std::filesystem::exists(config_.input_path))
                throw Error("input file " + config_.input_path + " does not exist");
            log_ = stages_.time("load", [&] { return load_csv(config_.input_path, config_.schema); });
            stages_.counts["events"] = log_->size();
            stages_.counts["cases"] = log_->case_count();
        }
        return *log_;
    }
    const Framing& framing() {
        if (!framing_) {
            framing_ = make_framing(log(), config_.width, config_.origin);
            stages_.counts["windows"] = framing_->window_count();
        }
        return *framing_;
    }
    const AspectEvaluator& evaluator() {
        if (!evaluator_) evaluator_.emplace(log(), framing());
        return *evaluator_;
    }
    const std::vector<HighLevelEvent>& hles() {
        if (!hles_) {
            const auto& ev = evaluator();
            std::vector<Aspect> aspects;
            for (Aspect a : config_.aspects)
                if (config_.aspects_explicit || log().has_resources() || !needs_resources(a)) aspects.push_back(a);
            hles_ = stages_.time("detect", [&] { return detect(ev, aspects, config_.thresholds, config_.parallelism); });
            stages_.counts["high_level_events"] = hles_->size();
            node_cases_.clear();
            for (const auto& h : *hles_) node_cases_.push_back(cases_of(log(), h));
        }
        return *hles_;
    }
    const std::vector<std::vector<CaseIndex>>& node_cases() {
        hles();
        return node_cases_;
    }
    const PropagationGraph& graph() {
        if (!graph_) {
            const auto& h = hles();
            Proximity prox(log(), config_.method);
            graph_ = stages_.time("connect", [&] { return build_graph(h, prox, config_.lambda, config_.parallelism); });
            stages_.counts["edges"] = graph_->edges().size();
        }
        return *graph_;
    }
    const std::vector<Cascade>& cascade_list() {
        if (!cascades_) {
            const auto& g = graph();
            cascades_ = cascades(g, std::span<const HighLevelEvent>(hles()));
            stages_.counts["cascades"] = cascades_->size();
        }
        return *cascades_;
    }
    const ThreadSet& thread_set() {
        if (!threads_) {
            const auto& g = graph();
            const auto& nc = node_cases();
            threads_ = stages_.time("threads", [&] { return threads(g, nc, config_.pruning, config_.parallelism); });
            stages_.counts["threads"] = threads_->threads.size();
            stages_.counts["threads_truncated"] = threads_->truncated;
        }
        return *threads_;
    }

private:
    const Config& config_;
    Stages& stages_;
    std::optional<EventLog> log_;
    std::optional<Framing> framing_;
    std::optional<AspectEvaluator> evaluator_;
    std::optional<std::vector<HighLevelEvent>> hles_;
    std::vector<std::vector<CaseIndex>> node_cases_;
    std::optional<PropagationGraph> graph_;
    std::optional<std::vector<Cascade>> cascades_;
    std::optional<ThreadSet> threads_;
};

std::string case_names(const EventLog& log, const std::vector<CaseIndex>& cases) {
    std::vector<std::string> names;
    for (auto c : cases) names.push_back(log.case_name(c));
    std::sort(names.begin(), names.end());
    std::string out;
    for (std::size_t i = 0; i < names.size(); ++i) out += (i ? " " : "") + names[i];
    return out;
}

std::string hle_csv(Session& s) {
    const auto& log = s.log();
    const auto& fr = s.framing();
    const auto& hles = s.hles();
    const auto& nc = s.node_cases();
    std::vector<std::vector<std::string>> rows{{"hle", "aspect", "component", "window_index", "window_start",
                                                "window_end", "value", "threshold", "n_events", "case_ids"}};
    for (std::size_t i = 0; i < hles.size(); ++i) {
        const auto& h = hles[i];
        const auto w = fr.window(h.window);
        rows.push_back({std::to_string(i), std::string(to_string(h.aspect)), log.component_label(h.component),
                        std::to_string(h.window), format_timestamp(w.start, log.timestamp_format()),
                        format_timestamp(w.end, log.timestamp_format()), num(h.value), num(h.threshold),
                        std::to_string(h.events.size()), case_names(log, nc[i])});
    }
    return to_csv(rows);
}

std::string edges_csv(Session& s) {
    std::vector<std::vector<std::string>> rows{{"from", "to", "proximity"}};
    for (const auto& e : s.graph().edges())
        rows.push_back({std::to_string(e.from), std::to_string(e.to), num(e.proximity)});
    return to_csv(rows);
}

std::string cascades_json(Session& s) {
    const auto& log = s.log();
    const auto& hles = s.hles();
    const auto& fr = s.framing();
    ordered_json out = ordered_json::array();
    for (const auto& c : s.cascade_list()) {
        ordered_json groups = ordered_json::array();
        for (std::size_t g = 0; g < c.groups.size(); ++g) {
            ordered_json members = ordered_json::array();
            for (NodeIndex n : c.groups[g])
                members.push_back({{"hle", n}, {"activity", label(log, hles[n].activity())}});
            groups.push_back({{"window", c.windows[g]},
                              {"window_start", format_timestamp(fr.window(c.windows[g]).start, log.timestamp_format())},
                              {"members", members}});
        }
        out.push_back({{"cascade", c.id},
                       {"size", c.members().size()},
                       {"variant", variant_label(log, variant_of(c, hles))},
                       {"groups", groups},
                       {"maximal_threads", ordered_json::array()}});
    }
    const auto& ts = s.thread_set();
    for (const auto& t : ts.threads) {
        if (!t.maximal) continue;
        out[t.cascade]["maximal_threads"].push_back(
            {{"hles", t.nodes}, {"variant", variant_label(log, variant_of(t, hles))}, {"case_share", t.case_share}});
    }
    return out.dump(2) + "\n";
}

std::string threads_csv(Session& s) {
    const auto& log = s.log();
    const auto& hles = s.hles();
    std::vector<std::vector<std::string>> rows{
        {"thread", "cascade", "length", "maximal", "case_share", "n_cases", "variant", "hles"}};
    const auto& ts = s.thread_set();
    for (std::size_t i = 0; i < ts.threads.size(); ++i) {
        const auto& t = ts.threads[i];
        std::string nodes;
        for (std::size_t k = 0; k < t.nodes.size(); ++k) nodes += (k ? " " : "") + std::to_string(t.nodes[k]);
        rows.push_back({std::to_string(i), std::to_string(t.cascade), std::to_string(t.nodes.size()),
                        t.maximal ? "true" : "false", num(t.case_share),
                        std::to_string(participating_cases(t, s.node_cases()).size()),
                        variant_label(log, variant_of(t, hles)), nodes});
    }
    return to_csv(rows);
}

std::string interplay_csv(Session& s, const Config& config) {
    const auto& log = s.log();
    for (const auto& a : config.interplay_attributes)
        if (!log.is_case_attribute(a))
            throw Error("interplay attribute '" + a + "' is not a case attribute of the log");
    const auto& ts = s.thread_set();
    const auto variants = summarize_variants(log, ts.threads, s.hles(), s.node_cases());
    std::vector<std::vector<std::string>> rows{{"rank", "variant", "score", "size", "frequency", "reach", "n_participating",
                                                "n_control", "attribute", "status", "counts", "chi2", "dof", "p_value",
                                                "significant", "low_expected"}};
    if (variants.empty()) return to_csv(rows);

    std::vector<VariantRank> ranks(variants.size());
    std::vector<std::optional<std::size_t>> control_size(variants.size());
    parallel_for(variants.size(), config.parallelism, [&](std::size_t i) {
        const auto& v = variants[i];
        ranks[i] = {v.label, v.size(), v.frequency(), reach(log, v), 0.0};
        if (is_segment_chain(v.variant)) control_size[i] = control_group(log, v).size();
    });
    std::map<std::string, std::size_t> by_label;
    for (std::size_t i = 0; i < variants.size(); ++i) by_label[variants[i].label] = i;
    const auto ranked = rank_variants(ranks, config.weights);

    struct Cell {
        std::size_t variant;
        std::string attribute;
        std::string status;
        std::optional<ContingencyResult> result;
    };
    std::vector<Cell> cells;
    for (const auto& r : ranked)
        for (const auto& a : config.interplay_attributes) cells.push_back({by_label.at(r.label), a, "", std::nullopt});
    parallel_for(cells.size(), config.parallelism, [&](std::size_t k) {
        auto& cell = cells[k];
        const auto& v = variants[cell.variant];
        if (!is_segment_chain(v.variant)) {
            cell.status = "out of scope: not a location-chained segment variant";
            return;
        }
        if (*control_size[cell.variant] == 0) {
            cell.status = "untestable: empty control group";
            return;
        }
        try {
            cell.result = chi_square(log, v, cell.attribute, config.bins);
            cell.status = "tested";
        } catch (const Error& e) {
            cell.status = std::string("untestable: ") + e.what();
        }
    });

    auto base_row = [&](std::size_t rank_pos) {
        const auto& r = ranked[rank_pos];
        const auto i = by_label.at(r.label);
        return std::vector<std::string>{std::to_string(rank_pos + 1),
                                        r.label,
                                        num(r.score),
                                        std::to_string(r.size),
                                        std::to_string(r.frequency),
                                        opt_num(r.reach),
                                        std::to_string(variants[i].cases.size()),
                                        control_size[i] ? std::to_string(*control_size[i]) : ""};
    };
    std::size_t k = 0;
    for (std::size_t pos = 0; pos < ranked.size(); ++pos) {
        if (config.interplay_attributes.empty()) {
            auto row = base_row(pos);
            row.insert(row.end(), {"", "", "", "", "", "", "", ""});
            rows.push_back(row);
            continue;
        }
        for (std::size_t a = 0; a < config.interplay_attributes.size(); ++a, ++k) {
            const auto& cell = cells[k];
            auto row = base_row(pos);
            row.push_back(cell.attribute);
            row.push_back(cell.status);
            if (cell.result) {
                const auto& res = *cell.result;
                std::string counts;
                for (std::size_t c = 0; c < res.categories.size(); ++c)
                    counts += (c ? ";" : "") + res.categories[c] + "=" + std::to_string(res.counts[c][0]) + "/" +
                              std::to_string(res.counts[c][1]);
                row.insert(row.end(), {counts, num(res.chi2), std::to_string(res.dof), num(res.p_value),
                                       res.significant ? "true" : "false", res.low_expected ? "true" : "false"});
            } else {
                row.insert(row.end(), {"", "", "", "", "", ""});
            }
            rows.push_back(row);
        }
    }
    return to_csv(rows);
}

std::string robustness_csv(Session& s, const Config& config, Stages& stages) {
    const auto& log = s.log();
    const auto& ev = s.evaluator();
    const auto reports =
        stages.time("robustness", [&] { return analyze_robustness(ev, config.robustness, config.parallelism); });
    std::vector<std::vector<std::string>> rows{{"activity", "q", "p", "t", "tr", "disruptions", "disruption_windows",
                                                "scope_lengths", "affected", "unaffected", "wt_affected",
                                                "wt_unaffected", "r_wt", "reading"}};
    std::size_t disruptions = 0;
    for (const auto& r : reports) {
        std::string windows, lengths;
        for (std::size_t i = 0; i < r.scopes.size(); ++i) {
            windows += (i ? " " : "") + std::to_string(r.scopes[i].disruption.window);
            lengths += (i ? " " : "") + std::to_string(r.scopes[i].windows.size());
        }
        disruptions += r.scopes.size();
        rows.push_back({log.activity_name(r.activity), num(r.thresholds.q), num(r.thresholds.p), num(r.thresholds.t),
                        num(r.thresholds.tr), std::to_string(r.scopes.size()), windows, lengths,
                        std::to_string(r.affected), std::to_string(r.unaffected), opt_num(r.wt_affected),
                        opt_num(r.wt_unaffected), opt_num(r.r_wt), r.reading()});
    }
    stages.counts["disruptions"] = disruptions;
    return to_csv(rows);
}

std::string export_csv(Session& s, const Config& config) {
    const auto& cs = s.cascade_list();
    const auto records = hl_log_records(s.log(), s.hles(), cs, s.framing(), config.timestamp_mode);
    std::ostringstream out;
    write_hl_log(out, records, s.log().timestamp_format());
    return out.str();
}

std::string series_csv(Session& s, const Config& config) {
    const auto& log = s.log();
    const auto& fr = s.framing();
    const auto& ev = s.evaluator();
    std::vector<std::pair<Aspect, ComponentId>> pairs;
    for (Aspect a : config.aspects) {
        if (needs_resources(a) && !log.has_resources()) continue;
        for (const auto& c : ev.components_for(a)) pairs.emplace_back(a, c);
    }
    std::vector<std::string> parts(pairs.size());
    parallel_for(pairs.size(), config.parallelism, [&](std::size_t i) {
        std::ostringstream out;
        for (const auto& e : ev.series(pairs[i].first, pairs[i].second))
            csv::write_row(out, {std::string(to_string(e.aspect)), log.component_label(e.component),
                                 std::to_string(e.window),
                                 format_timestamp(fr.window(e.window).start, log.timestamp_format()),
                                 e.value ? num(*e.value) : "", std::to_string(e.events.size())});
        parts[i] = out.str();
    });
    std::string all = to_csv({{"aspect", "component", "window", "window_start", "value", "n_events"}});
    for (const auto& p : parts) all += p;
    return all;
}

}  // namespace

RunOutput run_command(const std::string& command, const Config& config) {
    if (std::find(kCommands.begin(), kCommands.end(), command) == kCommands.end())
        throw Error("unknown subcommand '" + command + "'");
    RunOutput out;
    Stages stages;
    const auto t0 = Clock::now();

    if (command == "simulate") {
        sim::ScenarioConfig scenario =
            config.scenario_path.empty() ? sim::citizenship_preset() : sim::parse_scenario(read_file(config.scenario_path));
        scenario.seed = config.seed;
        const auto result = stages.time("simulate", [&] { return sim::generate(scenario); });
        std::ostringstream log_csv;
        sim::write_csv(log_csv, result, scenario.timestamp_format);
        out.files["log.csv"] = log_csv.str();
        out.files["truth.json"] = sim::truth_to_json(result.truth);
        out.files["scenario.json"] = sim::scenario_to_json(scenario);
        stages.counts["events"] = result.records.size();
        stages.counts["burst_windows"] = result.truth.burst_windows.size();
    } else {
        Session s(config, stages);
        if (command == "detect") {
            out.files["hle.csv"] = hle_csv(s);
        } else if (command == "cascades") {
            out.files["hle.csv"] = hle_csv(s);
            out.files["edges.csv"] = edges_csv(s);
            out.files["cascades.json"] = cascades_json(s);
        } else if (command == "threads") {
            out.files["hle.csv"] = hle_csv(s);
            out.files["threads.csv"] = threads_csv(s);
        } else if (command == "interplay") {
            out.files["hle.csv"] = hle_csv(s);
            out.files["interplay.csv"] = stages.time("interplay", [&] { return interplay_csv(s, config); });
        } else if (command == "robustness") {
            out.files["robustness.csv"] = robustness_csv(s, config, stages);
        } else if (command == "export") {
            out.files["hl_log.csv"] = export_csv(s, config);
        } else if (command == "plotdata") {
            out.files["series.csv"] = stages.time("plotdata", [&] { return series_csv(s, config); });
        }
    }

    stages.timings["total"] = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
    ordered_json manifest;
    manifest["command"] = command;
    manifest["config_hash"] = fnv1a_hex(config.canonical_json());
    manifest["parallelism"] = resolve_parallelism(config.parallelism);
    manifest["counts"] = stages.counts;
    ordered_json files = ordered_json::array();
    for (const auto& [name, _] : out.files) files.push_back(name);
    manifest["files"] = files;
    manifest["timings_ms"] = stages.timings;
    out.files["manifest.json"] = manifest.dump(2) + "\n";
    return out;
}

void write_outputs(const std::filesystem::path& dir, const RunOutput& output) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error("cannot create output directory " + dir.string() + ": " + ec.message());
    for (const auto& [name, content] : output.files) {
        const auto path = dir / name;
        std::ofstream f(path, std::ios::binary);
        if (!f) throw Error("cannot write " + path.string());
        f << content;
        f.flush();
        if (!f) throw Error("failed writing " + path.string());
    }
}

}  // namespace hlem
