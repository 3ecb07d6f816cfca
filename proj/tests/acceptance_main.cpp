// Acceptance suite: prints one PASS/FAIL line per criterion and exits with
// the number of failures. Run with --only N to execute a single criterion,
// --real-data DIR to enable the optional real-data smoke check.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <vector>

#include "bns/export.hpp"
#include "bns/impact.hpp"
#include "bns/rolling.hpp"
#include "bns/synth.hpp"
#include "bns/time_util.hpp"
#include "test_helpers.hpp"

namespace fs = std::filesystem;
using namespace bns;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

// The standard drifting background: secular adoption growth plus value/fee
// regime evolution, so min-max feature ranges are set by slow structure
// rather than sampling noise (the regime the 0.4 scan threshold targets).
SynthParams background_params(std::uint64_t seed, double days, double rate) {
    SynthParams p;
    p.seed = seed;
    p.duration_days = days;
    p.tx_rate = rate;
    p.drift.tx_rate_mult = 2.0;
    p.drift.value_mu_shift = -0.8;
    p.drift.fee_rate_mult = 2.5;
    p.drift.size_mult = 1.3;
    p.drift.nonstandard_mult = 3.0;
    return p;
}

// ---------------------------------------------------------------------------
// 1. Feature arithmetic
// ---------------------------------------------------------------------------

bool c1_feature_arithmetic(std::ostream& log) {
    verify_layout_arithmetic();
    bool ok = layout(FeatureSetId::full).size() == 99 && layout(FeatureSetId::activity).size() == 40 &&
              layout(FeatureSetId::transaction).size() == 37 && layout(FeatureSetId::fee).size() == 27 &&
              layout(FeatureSetId::overall).size() == 23;
    log << "layout sizes full=99 activity=40 transaction=37 fee=27 overall=23";
    return ok;
}

// ---------------------------------------------------------------------------
// 2. Pairing oracle
// ---------------------------------------------------------------------------

bool c2_pairing_oracle(std::ostream& log) {
    std::mt19937_64 rng(20240901);
    int configs = 0, mismatches = 0;

    auto check_config = [&](const ImpactConfig& cfg, const std::vector<BNSVector>& vectors) {
        auto dist = background_distribution(vectors, cfg);
        auto brute = bnstest::brute_force_background(vectors, dist.scaler,
                                                     hours_to_seconds(cfg.gap_hours), cfg.distance);
        if (dist.distances.size() != brute.size()) {
            ++mismatches;
            return;
        }
        for (std::size_t i = 0; i < brute.size(); ++i) {
            if (dist.distances[i] != brute[i]) {
                ++mismatches;
                return;
            }
        }
    };

    while (configs < 200) {
        ImpactConfig cfg;
        cfg.step_hours = std::vector<std::int64_t>{1, 2, 4}[rng() % 3];
        cfg.data_frame_hours = 2 + static_cast<std::int64_t>(rng() % 95);
        cfg.gap_hours = static_cast<std::int64_t>(rng() % 49);
        std::int64_t rem = (cfg.data_frame_hours + cfg.gap_hours) % cfg.step_hours;
        cfg.gap_hours += rem == 0 ? 0 : cfg.step_hours - rem;
        cfg.background_days =
            (2 * cfg.data_frame_hours + cfg.gap_hours) / 24 + 1 + static_cast<std::int64_t>(rng() % 4);
        if (cfg.background_days * 24 < 2 * cfg.data_frame_hours + cfg.gap_hours) continue;
        cfg.event_time = static_cast<std::int64_t>(rng() % 2000000);
        cfg.distance = static_cast<DistanceMeasure>(rng() % 5);

        WindowGrid grid = background_grid(cfg);
        if (grid.count <= static_cast<std::size_t>(pair_offset(cfg))) continue;
        std::size_t m = 1 + rng() % 8;
        std::uniform_real_distribution<double> unif(-5.0, 15.0);
        std::vector<BNSVector> vectors(grid.count);
        for (std::size_t i = 0; i < grid.count; ++i) {
            vectors[i].window = grid.window(i);
            vectors[i].values.resize(m);
            for (auto& x : vectors[i].values) x = unif(rng);
        }
        check_config(cfg, vectors);
        ++configs;
    }

    // A few configurations through real synthetic stores.
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
        SynthParams params = background_params(6000 + seed, 3.0, 0.25);
        AttributeStore store = generate_store(params);
        ImpactConfig cfg;
        cfg.event_time = params.start_time + static_cast<std::int64_t>(36 * kSecondsPerHour);
        cfg.data_frame_hours = 4 + static_cast<std::int64_t>(seed) * 3;
        cfg.gap_hours = (seed % 2) * 2;
        cfg.background_days = 2;
        cfg.step_hours = 1;
        cfg.feature_set = seed % 2 ? FeatureSetId::overall : FeatureSetId::fee;
        check_config(cfg, rolling_vectors(store, cfg));
        ++configs;
    }

    log << configs << " randomized configs, " << mismatches << " mismatches";
    return mismatches == 0;
}

// ---------------------------------------------------------------------------
// 3. Statistics oracle
// ---------------------------------------------------------------------------

bool c3_stats_oracle(std::ostream& log) {
    // Exact fixture values.
    SummaryStats fx = summary_stats(std::vector<double>{1, 2, 3, 4, 5});
    bool fixture_ok = fx.std_dev == std::sqrt(2.0) && fx.kurtosis == -1.3 && fx.p10 == 1.4 &&
                      fx.p90 == 4.6 && fx.skew == 0.0 && fx.mean == 3.0 && fx.median == 3.0;

    std::mt19937_64 rng(7777);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::lognormal_distribution<double> heavy(0.0, 2.0);
    std::normal_distribution<double> shifted(250.0, 4.0);
    std::exponential_distribution<double> expo(0.3);
    std::size_t failures = 0;
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        std::size_t n = 1 + rng() % 600;
        std::vector<double> values(n);
        for (auto& v : values) {
            switch (trial % 4) {
                case 0: v = unif(rng); break;
                case 1: v = heavy(rng); break;
                case 2: v = shifted(rng); break;
                default: v = expo(rng); break;
            }
        }
        SummaryStats got = summary_stats(values);
        bnstest::RefStats want = bnstest::reference_stats(values);
        double err = std::max({bnstest::rel_err(got.std_dev, want.std_dev),
                               bnstest::rel_err(got.skew, want.skew),
                               bnstest::rel_err(got.kurtosis, want.kurtosis),
                               bnstest::rel_err(got.median, want.median),
                               bnstest::rel_err(got.p10, want.p10),
                               bnstest::rel_err(got.p25, want.p25),
                               bnstest::rel_err(got.p75, want.p75),
                               bnstest::rel_err(got.p90, want.p90)});
        worst = std::max(worst, err);
        if (err > 1e-9) ++failures;
    }
    log << "fixture " << (fixture_ok ? "exact" : "WRONG") << "; 1000 samples, worst rel err "
        << worst;
    return fixture_ok && failures == 0;
}

// ---------------------------------------------------------------------------
// 4. I-Score formula
// ---------------------------------------------------------------------------

bool c4_iscore_formula(std::ostream& log) {
    BackgroundDistribution dist;
    dist.distances = {1, 2, 3, 4, 5};
    dist.median = 3.0;
    dist.std_dev = std::sqrt(2.0);
    dist.pair_count = 5;
    double i6 = i_score_from(dist, 6.0);
    double want = 3.0 / std::sqrt(2.0);
    bool ok = std::abs(i6 - want) <= 1e-12 && i_score_from(dist, 3.0) == 0.0;
    // And through the full accumulation path.
    std::vector<double> raw = {1, 2, 3, 4, 5};
    SummaryStats s = summary_stats(raw);
    ok = ok && s.median == 3.0 && s.std_dev == std::sqrt(2.0);
    log << "I(6 | {1..5}) = " << i6 << " vs " << want << ", I(MD) = " << i_score_from(dist, 3.0);
    return ok;
}

// ---------------------------------------------------------------------------
// 5. Affine invariance
// ---------------------------------------------------------------------------

bool c5_affine_invariance(std::ostream& log) {
    std::mt19937_64 rng(31337);
    ImpactConfig cfg;
    cfg.event_time = 0;
    cfg.data_frame_hours = 6;
    cfg.gap_hours = 2;
    cfg.background_days = 2;
    cfg.step_hours = 1;
    int bad = 0;
    for (int trial = 0; trial < 50; ++trial) {
        std::size_t m = 2 + rng() % 7;
        WindowGrid grid = background_grid(cfg);
        std::vector<BNSVector> vectors(grid.count);
        for (std::size_t i = 0; i < grid.count; ++i) {
            vectors[i].window = grid.window(i);
            vectors[i].values.resize(m);
            // Integer-valued features keep the affine map and min-max
            // cancellation exact in floating point, which is what makes a
            // bitwise comparison meaningful.
            for (auto& x : vectors[i].values) x = static_cast<double>(rng() % 100000);
        }
        auto base = background_distribution(vectors, cfg);

        std::size_t f = rng() % m;
        double a = static_cast<double>(1 + rng() % 1024);
        double b = static_cast<double>(rng() % 100000) - 50000.0;
        auto moved = vectors;
        for (auto& v : moved) v.values[f] = a * v.values[f] + b;
        auto shifted = background_distribution(moved, cfg);

        bool same = base.distances == shifted.distances && base.median == shifted.median &&
                    base.std_dev == shifted.std_dev;
        if (same && base.std_dev > 0.0) {
            same = i_score_from(base, base.distances.back()) ==
                   i_score_from(shifted, shifted.distances.back());
        }
        if (!same) ++bad;
    }
    log << "50 trials, " << bad << " with any bit difference";
    return bad == 0;
}

// ---------------------------------------------------------------------------
// 6. Detection power
// ---------------------------------------------------------------------------

struct PowerOutcome {
    int shock_hits = 0;
    int null_hits = 0;
    int runs = 0;
};

bool c6_detection_power(std::ostream& log) {
    const int seeds = 50;
    PowerOutcome out;
    for (int s = 0; s < seeds; ++s) {
        SynthParams params = background_params(1000 + s, 20.0, 0.3);
        std::int64_t t_event = params.start_time + 10 * kSecondsPerDay;
        ImpactConfig cfg;
        cfg.event_time = t_event;
        cfg.data_frame_hours = 48;
        cfg.gap_hours = 0;
        cfg.background_days = 16;
        cfg.step_hours = 1;
        cfg.feature_set = FeatureSetId::overall;

        EventEffect shock;
        shock.onset = t_event;
        shock.duration_hours = 96.0;
        shock.shift.tx_rate_mult = 3.0;

        AttributeStore shocked = generate_store(params, std::vector<EventEffect>{shock});
        double i_shock = impact_score(shocked, cfg).i_score;
        if (i_shock > 1.9) ++out.shock_hits;

        AttributeStore null_store = generate_store(params);
        double i_null = impact_score(null_store, cfg).i_score;
        if (i_null > 1.9) ++out.null_hits;
        ++out.runs;
    }
    double shock_rate = static_cast<double>(out.shock_hits) / seeds;
    double null_rate = static_cast<double>(out.null_hits) / seeds;
    log << "shock I>1.9 in " << out.shock_hits << "/" << seeds << ", null I>1.9 in " << out.null_hits
        << "/" << seeds;
    return shock_rate >= 0.90 && null_rate <= 0.10;
}

// ---------------------------------------------------------------------------
// 7. Subnetwork selectivity
// ---------------------------------------------------------------------------

bool c7_subnetwork_selectivity(std::ostream& log) {
    const int seeds = 30;
    int fee_wins = 0;
    for (int s = 0; s < seeds; ++s) {
        SynthParams params = background_params(3000 + s, 20.0, 0.3);
        std::int64_t t_event = params.start_time + 10 * kSecondsPerDay;
        EventEffect shock;
        shock.onset = t_event;
        shock.duration_hours = 72.0;
        shock.shift.fee_rate_mult = 3.0;  // fees only; arrival rate untouched
        AttributeStore store = generate_store(params, std::vector<EventEffect>{shock});

        ImpactConfig cfg;
        cfg.event_time = t_event;
        cfg.data_frame_hours = 24;
        cfg.background_days = 16;
        cfg.step_hours = 1;
        SweepOptions sweep;
        sweep.max_delay_hours = 24;
        sweep.delay_step_hours = 4;

        cfg.feature_set = FeatureSetId::fee;
        double fee_max = temporal_sweep(store, cfg, sweep).max_i_score;
        cfg.feature_set = FeatureSetId::activity;
        double activity_max = temporal_sweep(store, cfg, sweep).max_i_score;
        if (fee_max > activity_max) ++fee_wins;
    }
    log << "fee-set max I exceeded activity-set max I in " << fee_wins << "/" << seeds;
    return fee_wins >= 24;  // >= 80%
}

// ---------------------------------------------------------------------------
// 8. Scan robustness
// ---------------------------------------------------------------------------

bool c8_scan_robustness(std::ostream& log) {
    const double duration_days = 98.0;
    const std::vector<double> event_days = {25.0, 50.0, 75.0};

    auto scan_store = [&](const AttributeStore& store, std::int64_t start) {
        ScanConfig cfg;
        cfg.from = start + hours_to_seconds(96);
        cfg.to = start + static_cast<std::int64_t>(duration_days * kSecondsPerDay) -
                 hours_to_seconds(96);
        cfg.data_frame_hours = 96;
        cfg.step_hours = 2;
        ScanSeries series = rolling_scan(store, cfg);
        series.spikes = detect_spikes(series, 0.4, 48);
        return series;
    };

    int event_runs_ok = 0;
    const int event_seeds = 5;
    for (int s = 0; s < event_seeds; ++s) {
        SynthParams params = background_params(4000 + s, duration_days, 0.25);
        std::vector<EventEffect> effects;
        for (double day : event_days) {
            EventEffect e;
            e.onset = params.start_time + static_cast<std::int64_t>(day * kSecondsPerDay);
            e.duration_hours = 96.0;
            e.shift.tx_rate_mult = 3.0;
            effects.push_back(e);
        }
        AttributeStore store = generate_store(params, effects);
        ScanSeries series = scan_store(store, params.start_time);
        bool all_found = series.spikes.size() >= event_days.size();
        for (const auto& e : effects) {
            bool found = false;
            for (const auto& spike : series.spikes) {
                if (std::abs(spike.time - e.onset) <= hours_to_seconds(96)) found = true;
            }
            all_found = all_found && found;
        }
        if (all_found) ++event_runs_ok;
    }

    int clean_nulls = 0;
    const int null_seeds = 20;
    std::size_t worst_spikes = 0;
    for (int s = 0; s < null_seeds; ++s) {
        SynthParams params = background_params(5000 + s, duration_days, 0.25);
        AttributeStore store = generate_store(params);
        ScanSeries series = scan_store(store, params.start_time);
        if (series.spikes.empty()) {
            ++clean_nulls;
        } else {
            worst_spikes = std::max(worst_spikes, series.spikes.size());
        }
    }
    log << "events located in " << event_runs_ok << "/" << event_seeds << " runs; clean nulls "
        << clean_nulls << "/" << null_seeds;
    return event_runs_ok == event_seeds &&
           clean_nulls >= static_cast<int>(std::ceil(0.95 * null_seeds));
}

// ---------------------------------------------------------------------------
// 9. Performance envelope
// ---------------------------------------------------------------------------

bool c9_performance(std::ostream& log) {
    // Paper-scale configuration over 124 days of synthetic data.
    SynthParams params = background_params(9100, 124.0, 0.5);
    Clock::time_point t0 = Clock::now();
    AttributeStore store = generate_store(params);
    double gen_s = seconds_since(t0);

    ImpactConfig cfg;
    cfg.event_time = params.start_time + 62 * kSecondsPerDay;
    cfg.data_frame_hours = 96;
    cfg.gap_hours = 0;
    cfg.background_days = 120;
    cfg.step_hours = 1;  // overlap o = 95
    cfg.feature_set = FeatureSetId::full;

    t0 = Clock::now();
    ImpactResult result = impact_score(store, cfg);
    double full_s = seconds_since(t0);

    // Linearity in the vector count n (o = l_df - 1): doubling l_b should
    // roughly double the work. Generous bands absorb timer noise.
    auto timed_run = [&](std::int64_t days) {
        ImpactConfig c = cfg;
        c.background_days = days;
        Clock::time_point t = Clock::now();
        impact_score(store, c);
        return seconds_since(t);
    };
    double t20 = timed_run(20);
    double t40 = timed_run(40);
    double t80 = timed_run(80);
    double r1 = t40 / t20;
    double r2 = t80 / t40;

    log << "gen " << gen_s << " s (" << store.column(AttributeKey::tx_value).ts.size()
        << " txs); full-set analysis " << full_s << " s (n=2785, I=" << result.i_score
        << "); scaling t20=" << t20 << " t40=" << t40 << " t80=" << t80 << " ratios " << r1 << ", "
        << r2;
    bool linearish = r1 < 3.2 && r2 < 3.2 && (t80 / t20) < 7.5;
    return full_s <= 60.0 && linearish;
}

// ---------------------------------------------------------------------------
// 10. Determinism via manifests
// ---------------------------------------------------------------------------

struct Cli {
    static int run(const std::string& args, std::string* out = nullptr) {
        std::string cmd = std::string(BNS_CLI_PATH) + " " + args + " 2>&1";
        FILE* pipe = popen(cmd.c_str(), "r");
        if (!pipe) return -1;
        std::string text;
        char buf[4096];
        while (std::size_t n = std::fread(buf, 1, sizeof(buf), pipe)) text.append(buf, n);
        int status = pclose(pipe);
        if (out) *out = text;
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool c10_determinism(std::ostream& log) {
    fs::path root = fs::temp_directory_path() / "bns_acceptance_det";
    fs::remove_all(root);
    fs::create_directories(root);
    {
        std::ofstream scenario(root / "scenario.json");
        scenario << R"({"params": {"seed": 910, "duration_days": 5.0, "tx_rate": 0.35,
                     "start_time": "2017-05-01T00:00:00Z",
                     "drift": {"tx_rate_mult": 1.5, "value_mu_shift": -0.4,
                               "fee_rate_mult": 1.6, "size_mult": 1.15,
                               "nonstandard_mult": 2.0}}, "effects": []})";
    }
    auto fail = [&](const char* what) {
        log << what;
        return false;
    };
    std::string out;
    if (Cli::run("synth --scenario " + (root / "scenario.json").string() + " --out " +
                 (root / "data").string(), &out) != 0) {
        return fail("synth failed");
    }
    std::string data_dir = (root / "data").string();
    if (Cli::run("ingest --store " + (root / "store.bns-store").string() + " --blocks " + data_dir +
                     "/blocks.ndjson --chart mempool_size_bytes=" + data_dir +
                     "/mempool_size_bytes.csv --chart mempool_count=" + data_dir +
                     "/mempool_count.csv --chart mempool_growth_bytes_per_sec=" + data_dir +
                     "/mempool_growth_bytes_per_sec.csv --chart tx_per_second=" + data_dir +
                     "/tx_per_second.csv",
                 &out) != 0) {
        return fail("ingest failed");
    }

    // impact, sweep, scan: run, snapshot, rerun from the manifest, compare.
    struct Step {
        const char* name;
        std::string args;
        std::vector<std::string> files;
    };
    std::string store = (root / "store.bns-store").string();
    std::vector<Step> steps = {
        {"impact",
         "impact --store " + store + " --time 2017-05-03T00:00:00Z --feature-set overall "
         "--gap-hours 2 --l-df 12 --background-days 3 --out " + (root / "impact").string(),
         {"impact.json", "manifest.json"}},
        {"sweep",
         "sweep --store " + store + " --time 2017-05-03T00:00:00Z --feature-set fee --l-df 8 "
         "--background-days 3 --max-delay 8 --delay-step 2 --svg --out " + (root / "sweep").string(),
         {"curve_fee.csv", "sweep.json", "sweep_fee.svg", "manifest.json"}},
        {"scan",
         "scan --store " + store + " --from 2017-05-02T00:00:00Z --to 2017-05-04T00:00:00Z "
         "--l-df 12 --step-hours 2 --out " + (root / "scan").string(),
         {"scan.csv", "spikes.json", "manifest.json"}},
        {"synth-rerun", "rerun " + (root / "data/manifest.json").string(),
         {"blocks.ndjson", "tx_per_second.csv", "manifest.json"}},
    };
    for (const auto& step : steps) {
        fs::path dir = std::string(step.name) == "synth-rerun" ? root / "data"
                                                               : root / fs::path(step.name);
        if (std::string(step.name) != "synth-rerun") {
            if (Cli::run(step.args, &out) != 0) return fail(step.name);
        }
        std::vector<std::string> before;
        for (const auto& f : step.files) before.push_back(slurp(dir / f));
        if (Cli::run("rerun " + (dir / "manifest.json").string(), &out) != 0) {
            return fail("rerun failed");
        }
        for (std::size_t i = 0; i < step.files.size(); ++i) {
            if (slurp(dir / step.files[i]) != before[i]) {
                log << step.name << ": " << step.files[i] << " changed on rerun";
                return false;
            }
        }
    }
    fs::remove_all(root);
    log << "impact/sweep/scan/synth reruns byte-identical";
    return true;
}

// ---------------------------------------------------------------------------
// 11. Optional real-data smoke check
// ---------------------------------------------------------------------------

bool c11_real_data(std::ostream& log, const std::string& dir) {
    StoreBuilder builder;
    std::ifstream blocks(fs::path(dir) / "blocks.ndjson");
    if (!blocks) {
        log << "blocks.ndjson missing under " << dir;
        return false;
    }
    auto parsed = parse_block_records(blocks);
    for (const auto& b : parsed.blocks) builder.add_block(b);
    for (const auto& tx : parsed.transactions) builder.add_transaction(tx);
    for (ChartSeries series : kAllChartSeries) {
        std::ifstream csv(fs::path(dir) / (std::string(to_string(series)) + ".csv"));
        if (!csv) {
            log << to_string(series) << ".csv missing";
            return false;
        }
        for (const auto& s : parse_chart_series(csv, series)) builder.add_chart(s);
    }
    AttributeStore store = builder.seal();

    ImpactConfig cfg;
    cfg.event_time = parse_time_utc("2016-11-09T08:00:00Z");
    cfg.data_frame_hours = 96;
    cfg.background_days = 120;
    cfg.step_hours = 1;
    cfg.feature_set = FeatureSetId::overall;
    SweepOptions sweep;
    sweep.max_delay_hours = 240;
    sweep.delay_step_hours = 2;
    TemporalCurve curve = temporal_sweep(store, cfg, sweep);
    log << "max I " << curve.max_i_score << " at delay " << curve.argmax_delay << " h";
    return curve.max_i_score > 0.0 && curve.argmax_delay >= 36.0 && curve.argmax_delay <= 96.0;
}

}  // namespace

int main(int argc, char** argv) {
    int only = 0;
    std::string real_data_dir;
    for (int i = 1; i < argc; ++i) {
        std::string arg = argv[i];
        if (arg == "--only" && i + 1 < argc) only = std::atoi(argv[++i]);
        if (arg == "--real-data" && i + 1 < argc) real_data_dir = argv[++i];
    }

    struct Criterion {
        int id;
        const char* title;
        std::function<bool(std::ostream&)> run;
    };
    std::vector<Criterion> criteria = {
        {1, "feature arithmetic (99/40/37/27 and 23)", c1_feature_arithmetic},
        {2, "pairing oracle vs brute force", c2_pairing_oracle},
        {3, "statistics oracle (1e-9, exact fixture)", c3_stats_oracle},
        {4, "I-Score formula fixtures (1e-12)", c4_iscore_formula},
        {5, "affine invariance (bit-identical)", c5_affine_invariance},
        {6, "detection power (x3 rate shock, overall set)", c6_detection_power},
        {7, "subnetwork selectivity (fee shock)", c7_subnetwork_selectivity},
        {8, "scan robustness (3 events, null runs)", c8_scan_robustness},
        {9, "performance envelope (120d/96h/o=95)", c9_performance},
        {10, "determinism (rerun from manifests)", c10_determinism},
    };

    int failures = 0;
    for (const auto& c : criteria) {
        if (only != 0 && only != c.id) continue;
        std::ostringstream detail;
        Clock::time_point t0 = Clock::now();
        bool ok = false;
        try {
            ok = c.run(detail);
        } catch (const std::exception& e) {
            detail << " exception: " << e.what();
        }
        std::printf("%s  #%-2d %s — %s  [%.1f s]\n", ok ? "PASS" : "FAIL", c.id, c.title,
                    detail.str().c_str(), seconds_since(t0));
        std::fflush(stdout);
        if (!ok) ++failures;
    }

    if (only == 0 || only == 11) {
        if (real_data_dir.empty()) {
            std::printf(
                "SKIP  #11 real-data smoke check — optional; pass --real-data DIR with NDJSON/CSV "
                "exports covering 2016-11-09 +/-60d\n");
        } else {
            std::ostringstream detail;
            bool ok = false;
            try {
                ok = c11_real_data(detail, real_data_dir);
            } catch (const std::exception& e) {
                detail << "exception: " << e.what();
            }
            std::printf("%s  #11 real-data smoke check — %s\n", ok ? "PASS" : "FAIL",
                        detail.str().c_str());
            if (!ok) ++failures;
        }
    }
    return failures;
}
