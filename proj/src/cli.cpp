#include "bns/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "bns/export.hpp"
#include "bns/impact.hpp"
#include "bns/rolling.hpp"
#include "bns/synth.hpp"
#include "bns/time_util.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace bns {

namespace {

// ---------------------------------------------------------------------------
// Spec execution: every command is driven by a JSON spec; the CLI builds the
// spec from flags + config file, `rerun` replays a previously written
// manifest. Manifests are the spec plus resolved defaults, with nothing
// nondeterministic, so a rerun reproduces outputs byte for byte.
// ---------------------------------------------------------------------------

json resolved_defaults(const FeatureOptions& opts) {
    json j;
    j["bin_edges"] = opts.bin_edges;
    j["scaler_population"] = "background+event";
    j["std_convention"] = "population";
    j["percentile_rule"] = "linear interpolation at rank q*(n-1)";
    j["classification_thresholds"] = {1.0, 1.9, 2.9};
    return j;
}

json chart_gap_diagnostics(const AttributeStore& store, std::int64_t from, std::int64_t to) {
    json j = json::object();
    for (ChartSeries series : kAllChartSeries) {
        AttributeKey key = attribute_key_for(series);
        auto span = store.query_window(key, std::max(from, store.coverage_begin()),
                                       std::min(to, store.coverage_end() + 1));
        double expected = static_cast<double>(to - from) / kSecondsPerMinute;
        j[to_string(key)] = {{"samples", span.size()},
                             {"expected_minutes", expected},
                             {"fill_ratio", expected <= 0.0 ? 0.0
                                                            : static_cast<double>(span.size()) / expected}};
    }
    return j;
}

void write_manifest(const fs::path& out_dir, json spec, std::vector<std::string> outputs,
                    const json& diagnostics = {}) {
    spec["resolved_defaults"] = resolved_defaults(FeatureOptions{});
    std::sort(outputs.begin(), outputs.end());
    spec["outputs"] = outputs;
    if (!diagnostics.is_null()) spec["diagnostics"] = diagnostics;
    atomic_write(out_dir / "manifest.json", spec.dump(2) + "\n");
}

ImpactConfig impact_config_from(const json& spec) {
    ImpactConfig cfg;
    cfg.event_time = spec.at("event_time").get<std::int64_t>();
    cfg.data_frame_hours = spec.value("data_frame_hours", cfg.data_frame_hours);
    cfg.gap_hours = spec.value("gap_hours", cfg.gap_hours);
    cfg.background_days = spec.value("background_days", cfg.background_days);
    cfg.step_hours = spec.value("step_hours", cfg.step_hours);
    if (spec.contains("feature_set")) {
        cfg.feature_set = feature_set_from_string(spec.at("feature_set").get<std::string>());
    }
    if (spec.contains("distance")) {
        cfg.distance = distance_from_string(spec.at("distance").get<std::string>());
    }
    cfg.exclude_event_pairs = spec.value("exclude_event_pairs", false);
    return cfg;
}

int run_ingest(const json& spec) {
    StoreBuilder builder;
    bool any_input = false;
    std::size_t issue_count = 0;
    if (spec.contains("blocks")) {
        for (const auto& jpath : spec.at("blocks")) {
            std::string path = jpath.get<std::string>();
            std::ifstream in(path);
            if (!in) throw IoError("cannot open block file " + path);
            any_input = true;
            BlockParseResult parsed = parse_block_records(in);
            for (const auto& issue : parsed.issues) {
                std::cerr << path << ":" << issue.line << ": " << issue.reason << "\n";
                ++issue_count;
            }
            for (const auto& b : parsed.blocks) builder.add_block(b);
            for (const auto& tx : parsed.transactions) builder.add_transaction(tx);
        }
    }
    if (spec.contains("charts")) {
        for (const auto& [series_name, jpath] : spec.at("charts").items()) {
            ChartSeries series = chart_series_from_string(series_name);
            std::string path = jpath.get<std::string>();
            std::ifstream in(path);
            if (!in) throw IoError("cannot open chart file " + path);
            any_input = true;
            for (const auto& sample : parse_chart_series(in, series)) builder.add_chart(sample);
        }
    }
    if (!any_input) throw EmptyInput("no input files given");
    if (issue_count > 0) {
        std::cerr << issue_count << " malformed line(s); store not written\n";
        return 2;
    }
    AttributeStore store = builder.seal();
    std::string store_path = spec.at("store").get<std::string>();
    store.save(store_path);
    write_manifest(store_path, spec, {"(store columns)"});
    std::cout << "ingested " << store.record_count() << " records; coverage ["
              << format_time_utc(store.coverage_begin()) << ", " << format_time_utc(store.coverage_end())
              << "]\n";
    return 0;
}

int run_synth(const json& spec) {
    Scenario scenario = parse_scenario(spec.at("scenario").dump());
    fs::path out_dir = spec.at("out").get<std::string>();
    IngestBatch batch = generate(scenario.params, scenario.effects);
    replay(batch, out_dir.string());
    write_manifest(out_dir, spec,
                   {"blocks.ndjson", "mempool_size_bytes.csv", "mempool_count.csv",
                    "mempool_growth_bytes_per_sec.csv", "tx_per_second.csv"});
    std::cout << "generated " << batch.blocks.size() << " blocks, " << batch.transactions.size()
              << " confirmed transactions, " << batch.mempool_remainder.size() << " left in mempool\n";
    return 0;
}

int run_impact(const json& spec) {
    AttributeStore store = AttributeStore::load(spec.at("store").get<std::string>());
    ImpactConfig cfg = impact_config_from(spec);
    ImpactResult result = impact_score(store, cfg);
    fs::path out_dir = spec.at("out").get<std::string>();
    atomic_write(out_dir / "impact.json", impact_result_json(result));
    std::int64_t half_bg = cfg.background_days * kSecondsPerDay / 2;
    write_manifest(out_dir, spec, {"impact.json"},
                   chart_gap_diagnostics(store, cfg.event_time - half_bg, cfg.event_time + half_bg));
    std::cout << "I-Score " << format_double(result.i_score) << " (" << to_string(result.classification)
              << ") at delay " << format_double(result.delay_hours) << " h\n";
    return 0;
}

int run_sweep(const json& spec) {
    AttributeStore store = AttributeStore::load(spec.at("store").get<std::string>());
    ImpactConfig base = impact_config_from(spec);
    SweepOptions sweep;
    sweep.max_delay_hours = spec.value("max_delay_hours", sweep.max_delay_hours);
    sweep.delay_step_hours = spec.value("delay_step_hours", sweep.delay_step_hours);
    bool svg = spec.value("svg", false);
    sweep.with_spline = svg;

    std::vector<std::string> sets;
    for (const auto& s : spec.at("feature_sets")) sets.push_back(s.get<std::string>());
    if (sets.empty()) throw InvalidConfig("sweep needs at least one feature set");

    fs::path out_dir = spec.at("out").get<std::string>();
    std::vector<std::string> outputs;
    json summary;
    summary["event_time"] = base.event_time;
    summary["event_time_utc"] = format_time_utc(base.event_time);
    json per_set = json::object();
    for (const std::string& set_name : sets) {
        ImpactConfig cfg = base;
        cfg.feature_set = feature_set_from_string(set_name);
        TemporalCurve curve = temporal_sweep(store, cfg, sweep);
        std::string csv_name = "curve_" + set_name + ".csv";
        atomic_write(out_dir / csv_name, curve_to_csv(curve));
        outputs.push_back(csv_name);
        json entry;
        entry["argmax_delay_hours"] = curve.argmax_delay;
        entry["max_i_score"] = curve.max_i_score;
        entry["points"] = curve.points.size();
        if (!curve.skipped.empty()) {
            json sk = json::array();
            for (const auto& [d, why] : curve.skipped) sk.push_back({{"delay", d}, {"reason", why}});
            entry["skipped"] = sk;
        }
        per_set[set_name] = entry;
        if (svg) {
            SvgSeries raw;
            for (auto [d, i] : curve.points) {
                raw.x.push_back(d);
                raw.y.push_back(i);
            }
            SvgSeries overlay;
            for (auto [d, i] : curve.spline) {
                overlay.x.push_back(d);
                overlay.y.push_back(i);
            }
            std::string svg_name = "sweep_" + set_name + ".svg";
            atomic_write(out_dir / svg_name,
                         line_chart_svg(raw, overlay.x.empty() ? nullptr : &overlay, {},
                                        "delay (hours after event)", "I-Score"));
            outputs.push_back(svg_name);
        }
    }
    summary["sets"] = per_set;
    atomic_write(out_dir / "sweep.json", summary.dump(2) + "\n");
    outputs.push_back("sweep.json");
    std::int64_t half_bg = base.background_days * kSecondsPerDay / 2;
    std::int64_t max_gap = hours_to_seconds(2 * sweep.max_delay_hours);
    write_manifest(out_dir, spec, outputs,
                   chart_gap_diagnostics(store, base.event_time - half_bg - max_gap,
                                         base.event_time + half_bg + max_gap));
    for (const auto& [name, entry] : per_set.items()) {
        std::cout << name << ": max I " << format_double(entry.at("max_i_score").get<double>())
                  << " at delay " << format_double(entry.at("argmax_delay_hours").get<double>())
                  << " h\n";
    }
    return 0;
}

int run_scan(const json& spec) {
    AttributeStore store = AttributeStore::load(spec.at("store").get<std::string>());
    ScanConfig cfg;
    cfg.from = spec.at("from").get<std::int64_t>();
    cfg.to = spec.at("to").get<std::int64_t>();
    cfg.data_frame_hours = spec.value("data_frame_hours", cfg.data_frame_hours);
    cfg.step_hours = spec.value("step_hours", cfg.step_hours);
    if (spec.contains("feature_set")) {
        cfg.feature_set = feature_set_from_string(spec.at("feature_set").get<std::string>());
    }
    double threshold = spec.value("threshold", 0.4);
    std::int64_t min_sep = spec.value("min_separation_hours", std::int64_t{48});

    ScanSeries series = rolling_scan(store, cfg);
    series.spikes = detect_spikes(series, threshold, min_sep);

    fs::path out_dir = spec.at("out").get<std::string>();
    std::vector<std::string> outputs = {"scan.csv", "spikes.json"};
    atomic_write(out_dir / "scan.csv", scan_to_csv(series));
    atomic_write(out_dir / "spikes.json", spikes_json(series, threshold, min_sep));
    if (spec.value("svg", false)) {
        SvgSeries raw;
        for (std::size_t i = 0; i < series.centers.size(); ++i) {
            raw.x.push_back(static_cast<double>(series.centers[i]) / kSecondsPerDay);
            raw.y.push_back(series.distances[i]);
        }
        std::vector<std::pair<double, double>> markers;
        for (const auto& s : series.spikes) {
            markers.emplace_back(static_cast<double>(s.time) / kSecondsPerDay, s.distance);
        }
        atomic_write(out_dir / "scan.svg",
                     line_chart_svg(raw, nullptr, markers, "time (days since epoch)",
                                    "scaled squared Euclidean distance"));
        outputs.push_back("scan.svg");
    }
    write_manifest(out_dir, spec, outputs,
                   chart_gap_diagnostics(store, cfg.from - hours_to_seconds(cfg.data_frame_hours),
                                         cfg.to + hours_to_seconds(cfg.data_frame_hours)));
    std::cout << series.centers.size() << " scan points, " << series.spikes.size()
              << " spike(s) above " << format_double(threshold) << "\n";
    return 0;
}

int run_export(const json& spec) {
    AttributeStore store = AttributeStore::load(spec.at("store").get<std::string>());
    FeatureSetId set = feature_set_from_string(spec.at("feature_set").get<std::string>());
    std::int64_t from = spec.at("from").get<std::int64_t>();
    std::int64_t to = spec.at("to").get<std::int64_t>();
    std::int64_t l_df = hours_to_seconds(spec.value("data_frame_hours", std::int64_t{96}));
    std::int64_t step = hours_to_seconds(spec.value("step_hours", std::int64_t{1}));
    if (to < from) throw InvalidConfig("export range end precedes start");
    WindowGrid grid;
    grid.start0 = from;
    grid.step = step;
    grid.length = l_df;
    grid.count = static_cast<std::size_t>((to - from) / step) + 1;
    std::vector<BNSVector> vectors = build_vector_series(store, set, grid);
    fs::path out_dir = spec.at("out").get<std::string>();
    atomic_write(out_dir / "vectors.csv", vectors_to_csv(vectors));
    atomic_write(out_dir / "vectors.json", vectors_manifest_json(vectors));
    write_manifest(out_dir, spec, {"vectors.csv", "vectors.json"});
    std::cout << "exported " << vectors.size() << " vectors (" << to_string(set) << ")\n";
    return 0;
}

int run_spec(const json& spec) {
    std::string command = spec.at("command").get<std::string>();
    if (command == "ingest") return run_ingest(spec);
    if (command == "synth") return run_synth(spec);
    if (command == "impact") return run_impact(spec);
    if (command == "sweep") return run_sweep(spec);
    if (command == "scan") return run_scan(spec);
    if (command == "export") return run_export(spec);
    throw InvalidConfig("unknown command in manifest: " + command);
}

// ---------------------------------------------------------------------------
// Flag/config plumbing
// ---------------------------------------------------------------------------

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
        return json::parse(ss.str());
    } catch (const json::parse_error& e) {
        throw InvalidConfig(path + " is not valid JSON: " + e.what());
    }
}

// Resolves an event time from --time or from the config's event list.
std::int64_t resolve_event_time(const json& config, const std::string& time_flag,
                                const std::string& event_name, json& spec) {
    if (!time_flag.empty()) return parse_time_utc(time_flag);
    if (!config.contains("events")) {
        throw InvalidConfig("give --time or a config file with an events list");
    }
    for (const auto& e : config.at("events")) {
        std::string name = e.value("name", "");
        if (!event_name.empty() && name != event_name) continue;
        if (e.contains("type")) {
            std::string type = e.at("type").get<std::string>();
            if (type != "Global" && type != "Financial" && type != "Regulatory") {
                throw InvalidConfig("event '" + name + "' has unknown type '" + type + "'");
            }
            spec["event_type"] = type;
        }
        spec["event_name"] = name;
        if (e.contains("background_days")) spec["background_days"] = e.at("background_days");
        const json& jt = e.at("time");
        return jt.is_string() ? parse_time_utc(jt.get<std::string>()) : jt.get<std::int64_t>();
    }
    throw InvalidConfig(event_name.empty() ? "config has no events"
                                           : "event '" + event_name + "' not found in config");
}

void apply_analysis_defaults(const json& config, json& spec) {
    if (!config.contains("analysis")) return;
    const json& a = config.at("analysis");
    for (const char* field : {"data_frame_hours", "step_hours", "background_days", "distance"}) {
        if (a.contains(field) && !spec.contains(field)) spec[field] = a.at(field);
    }
    if (a.contains("sweep")) {
        const json& sw = a.at("sweep");
        if (sw.contains("max_delay_hours") && !spec.contains("max_delay_hours")) {
            spec["max_delay_hours"] = sw.at("max_delay_hours");
        }
        if (sw.contains("delay_step_hours") && !spec.contains("delay_step_hours")) {
            spec["delay_step_hours"] = sw.at("delay_step_hours");
        }
    }
}

std::string pick_store(const json& config, const std::string& store_flag) {
    if (!store_flag.empty()) return store_flag;
    if (config.contains("store")) return config.at("store").get<std::string>();
    throw InvalidConfig("no --store given (and no store in config)");
}

std::string pick_out(const json& config, const std::string& out_flag) {
    if (!out_flag.empty()) return out_flag;
    if (config.contains("output_dir")) return config.at("output_dir").get<std::string>();
    throw InvalidConfig("no --out given (and no output_dir in config)");
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
    verify_layout_arithmetic();

    CLI::App app{"Blockchain network structure change analysis"};
    app.require_subcommand(1);

    std::string config_path, store_flag, out_flag, time_flag, event_flag;
    std::string feature_set_flag, distance_flag, scenario_path, manifest_path;
    std::vector<std::string> block_files, chart_specs, feature_sets;
    std::int64_t gap_hours = 0, l_df = 96, l_b = 120, step_hours = 1;
    std::int64_t max_delay = 240, delay_step = 2, seed_flag = -1;
    std::int64_t min_sep = 48;
    std::string from_flag, to_flag;
    double threshold = 0.4;
    bool svg = false, exclude_event_pairs = false;

    auto add_common = [&](CLI::App* cmd, bool needs_store) {
        cmd->add_option("--config", config_path, "run config JSON");
        if (needs_store) cmd->add_option("--store", store_flag, "attribute store directory");
        cmd->add_option("--out", out_flag, "output directory");
    };

    CLI::App* ingest = app.add_subcommand("ingest", "parse inputs into an attribute store");
    ingest->add_option("--config", config_path, "run config JSON");
    ingest->add_option("--store", store_flag, "store directory to create")->required();
    ingest->add_option("--blocks", block_files, "block NDJSON file(s)");
    ingest->add_option("--chart", chart_specs, "chart input as <series>=<csv path>");

    CLI::App* synth = app.add_subcommand("synth", "generate synthetic data from a scenario");
    synth->add_option("--scenario", scenario_path, "scenario JSON file")->required();
    synth->add_option("--out", out_flag, "output directory")->required();
    synth->add_option("--seed", seed_flag, "override the scenario seed");

    CLI::App* impact = app.add_subcommand("impact", "I-Score for one event configuration");
    add_common(impact, true);
    impact->add_option("--time", time_flag, "event time (ISO-8601 or epoch seconds)");
    impact->add_option("--event", event_flag, "event name from the config's event list");
    impact->add_option("--feature-set", feature_set_flag, "full|overall|activity|transaction|fee");
    impact->add_option("--gap-hours", gap_hours, "gap length l_g");
    impact->add_option("--l-df", l_df, "data frame length in hours");
    impact->add_option("--background-days", l_b, "background length in days");
    impact->add_option("--step-hours", step_hours, "rolling step s");
    impact->add_option("--distance", distance_flag, "distance measure");
    impact->add_flag("--exclude-event-pairs", exclude_event_pairs,
                     "drop background pairs spanning the event time (non-default)");

    CLI::App* sweep = app.add_subcommand("sweep", "I-Score temporal sweep over gap lengths");
    add_common(sweep, true);
    sweep->add_option("--time", time_flag, "event time (ISO-8601 or epoch seconds)");
    sweep->add_option("--event", event_flag, "event name from the config's event list");
    sweep->add_option("--feature-set", feature_sets, "feature set(s); repeatable");
    sweep->add_option("--l-df", l_df, "data frame length in hours");
    sweep->add_option("--background-days", l_b, "background length in days");
    sweep->add_option("--step-hours", step_hours, "rolling step s");
    sweep->add_option("--distance", distance_flag, "distance measure");
    sweep->add_option("--max-delay", max_delay, "largest delay in hours");
    sweep->add_option("--delay-step", delay_step, "delay grid step in hours");
    sweep->add_flag("--svg", svg, "emit SVG plots with spline overlay");

    CLI::App* scan = app.add_subcommand("scan", "retrospective rolling distance scan");
    add_common(scan, true);
    scan->add_option("--from", from_flag, "first center time (ISO-8601 or epoch)")->required();
    scan->add_option("--to", to_flag, "last center time (ISO-8601 or epoch)")->required();
    scan->add_option("--feature-set", feature_set_flag, "feature set (default overall)");
    scan->add_option("--l-df", l_df, "window length in hours");
    scan->add_option("--step-hours", step_hours, "scan grid step in hours");
    scan->add_option("--threshold", threshold, "spike threshold on the distance");
    scan->add_option("--min-separation", min_sep, "minimum spike separation in hours");
    scan->add_flag("--svg", svg, "emit an SVG of the scan");

    CLI::App* exp = app.add_subcommand("export", "export BNS vectors over a window grid");
    add_common(exp, true);
    exp->add_option("--feature-set", feature_set_flag, "feature set")->required();
    exp->add_option("--from", from_flag, "first window start (ISO-8601 or epoch)")->required();
    exp->add_option("--to", to_flag, "last window start (ISO-8601 or epoch)")->required();
    exp->add_option("--l-df", l_df, "window length in hours");
    exp->add_option("--step-hours", step_hours, "grid step in hours");

    CLI::App* rerun = app.add_subcommand("rerun", "re-execute a run from its manifest");
    rerun->add_option("manifest", manifest_path, "manifest.json from a previous run")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        json config = config_path.empty() ? json::object() : load_json_file(config_path);
        json spec;

        if (*ingest) {
            spec["command"] = "ingest";
            spec["store"] = store_flag;
            json blocks = json::array();
            for (const auto& b : block_files) blocks.push_back(b);
            if (config.contains("inputs") && config.at("inputs").contains("blocks")) {
                for (const auto& b : config.at("inputs").at("blocks")) blocks.push_back(b);
            }
            spec["blocks"] = blocks;
            json charts = json::object();
            if (config.contains("inputs") && config.at("inputs").contains("charts")) {
                charts = config.at("inputs").at("charts");
            }
            for (const auto& cs : chart_specs) {
                auto eq = cs.find('=');
                if (eq == std::string::npos) throw InvalidConfig("--chart wants <series>=<path>");
                charts[cs.substr(0, eq)] = cs.substr(eq + 1);
            }
            spec["charts"] = charts;
            return run_spec(spec);
        }
        if (*synth) {
            std::ifstream in(scenario_path);
            if (!in) throw IoError("cannot open scenario " + scenario_path);
            std::ostringstream ss;
            ss << in.rdbuf();
            Scenario scenario = parse_scenario(ss.str());
            if (seed_flag >= 0) scenario.params.seed = static_cast<std::uint64_t>(seed_flag);
            spec["command"] = "synth";
            spec["out"] = out_flag;
            spec["scenario"] = json::parse(scenario_to_json(scenario));
            return run_spec(spec);
        }
        if (*impact || *sweep) {
            spec["command"] = *impact ? "impact" : "sweep";
            spec["store"] = pick_store(config, store_flag);
            spec["out"] = pick_out(config, out_flag);
            if (impact->count("--gap-hours") || *impact) spec["gap_hours"] = gap_hours;
            auto set_if = [&](CLI::App* cmd, const char* flag, const char* field, auto value) {
                if (cmd->count(flag)) spec[field] = value;
            };
            CLI::App* cmd = *impact ? impact : sweep;
            set_if(cmd, "--l-df", "data_frame_hours", l_df);
            set_if(cmd, "--background-days", "background_days", l_b);
            set_if(cmd, "--step-hours", "step_hours", step_hours);
            if (!distance_flag.empty()) spec["distance"] = distance_flag;
            if (*impact) {
                if (!feature_set_flag.empty()) spec["feature_set"] = feature_set_flag;
                if (exclude_event_pairs) spec["exclude_event_pairs"] = true;
            } else {
                set_if(sweep, "--max-delay", "max_delay_hours", max_delay);
                set_if(sweep, "--delay-step", "delay_step_hours", delay_step);
                if (svg) spec["svg"] = true;
                json sets = json::array();
                if (feature_sets.empty()) {
                    if (config.contains("analysis") && config.at("analysis").contains("feature_sets")) {
                        sets = config.at("analysis").at("feature_sets");
                    } else {
                        sets.push_back("overall");
                    }
                } else {
                    for (const auto& s : feature_sets) sets.push_back(s);
                }
                spec["feature_sets"] = sets;
            }
            spec["event_time"] = resolve_event_time(config, time_flag, event_flag, spec);
            apply_analysis_defaults(config, spec);
            if (*impact && !spec.contains("feature_set") && config.contains("analysis") &&
                config.at("analysis").contains("feature_sets")) {
                spec["feature_set"] = config.at("analysis").at("feature_sets").at(0);
            }
            return run_spec(spec);
        }
        if (*scan) {
            spec["command"] = "scan";
            spec["store"] = pick_store(config, store_flag);
            spec["out"] = pick_out(config, out_flag);
            spec["from"] = parse_time_utc(from_flag);
            spec["to"] = parse_time_utc(to_flag);
            if (scan->count("--l-df")) spec["data_frame_hours"] = l_df;
            if (scan->count("--step-hours")) spec["step_hours"] = step_hours;
            if (!feature_set_flag.empty()) spec["feature_set"] = feature_set_flag;
            if (scan->count("--threshold")) spec["threshold"] = threshold;
            if (scan->count("--min-separation")) spec["min_separation_hours"] = min_sep;
            if (svg) spec["svg"] = true;
            if (config.contains("scan")) {
                for (const auto& [k, v] : config.at("scan").items()) {
                    if (!spec.contains(k)) spec[k] = v;
                }
            }
            return run_spec(spec);
        }
        if (*exp) {
            spec["command"] = "export";
            spec["store"] = pick_store(config, store_flag);
            spec["out"] = pick_out(config, out_flag);
            spec["feature_set"] = feature_set_flag;
            spec["from"] = parse_time_utc(from_flag);
            spec["to"] = parse_time_utc(to_flag);
            spec["data_frame_hours"] = l_df;
            spec["step_hours"] = step_hours;
            return run_spec(spec);
        }
        if (*rerun) {
            return run_spec(load_json_file(manifest_path));
        }
        throw InvalidConfig("no subcommand");
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.exit_code();
    } catch (const json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 4;
    }
}

}  // namespace bns
