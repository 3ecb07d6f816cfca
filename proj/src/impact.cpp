#include "bns/impact.hpp"

#include <algorithm>
#include <cmath>

#include "bns/time_util.hpp"

namespace bns {

// ---------------------------------------------------------------------------
// Names and config validation
// ---------------------------------------------------------------------------

const char* to_string(DistanceMeasure m) {
    switch (m) {
        case DistanceMeasure::euclidean: return "euclidean";
        case DistanceMeasure::squared_euclidean: return "squared_euclidean";
        case DistanceMeasure::cosine: return "cosine";
        case DistanceMeasure::canberra: return "canberra";
        case DistanceMeasure::chebyshev: return "chebyshev";
    }
    return "?";
}

DistanceMeasure distance_from_string(const std::string& name) {
    for (DistanceMeasure m : {DistanceMeasure::euclidean, DistanceMeasure::squared_euclidean,
                              DistanceMeasure::cosine, DistanceMeasure::canberra,
                              DistanceMeasure::chebyshev}) {
        if (name == to_string(m)) return m;
    }
    throw InvalidConfig("unknown distance measure '" + name + "'");
}

void ImpactConfig::validate() const {
    if (data_frame_hours <= 0) throw InvalidConfig("data frame length must be > 0 hours");
    if (gap_hours < 0) throw InvalidConfig("gap length must be >= 0 hours");
    if (step_hours < 1) throw InvalidConfig("step must be >= 1 hour");
    if (background_days * 24 < 2 * data_frame_hours + gap_hours) {
        throw InvalidConfig("background too short: need l_b*24 >= 2*l_df + l_g (got " +
                            std::to_string(background_days * 24) + "h < " +
                            std::to_string(2 * data_frame_hours + gap_hours) + "h)");
    }
    if ((data_frame_hours + gap_hours) % step_hours != 0) {
        throw InvalidConfig("(l_df + l_g) must be divisible by the step");
    }
}

const char* to_string(ImpactClass c) {
    switch (c) {
        case ImpactClass::none: return "none";
        case ImpactClass::discernible: return "discernible";
        case ImpactClass::substantial: return "substantial";
        case ImpactClass::significant: return "significant";
    }
    return "?";
}

ImpactClass classify_impact(double i_score) {
    if (i_score > 2.9) return ImpactClass::significant;
    if (i_score > 1.9) return ImpactClass::substantial;
    if (i_score > 1.0) return ImpactClass::discernible;
    return ImpactClass::none;
}

// ---------------------------------------------------------------------------
// Distances
// ---------------------------------------------------------------------------

double distance(std::span<const double> p, std::span<const double> q, DistanceMeasure m) {
    if (p.size() != q.size()) {
        throw DimensionMismatch("distance: dimension mismatch " + std::to_string(p.size()) + " vs " +
                                std::to_string(q.size()));
    }
    switch (m) {
        case DistanceMeasure::squared_euclidean: {
            double acc = 0.0;
            for (std::size_t i = 0; i < p.size(); ++i) {
                double d = p[i] - q[i];
                acc += d * d;
            }
            return acc;
        }
        case DistanceMeasure::euclidean: {
            double acc = 0.0;
            for (std::size_t i = 0; i < p.size(); ++i) {
                double d = p[i] - q[i];
                acc += d * d;
            }
            return std::sqrt(acc);
        }
        case DistanceMeasure::chebyshev: {
            double best = 0.0;
            for (std::size_t i = 0; i < p.size(); ++i) {
                best = std::max(best, std::abs(p[i] - q[i]));
            }
            return best;
        }
        case DistanceMeasure::canberra: {
            // 0/0 terms contribute nothing (matching the usual convention).
            double acc = 0.0;
            for (std::size_t i = 0; i < p.size(); ++i) {
                double denom = std::abs(p[i]) + std::abs(q[i]);
                if (denom > 0.0) acc += std::abs(p[i] - q[i]) / denom;
            }
            return acc;
        }
        case DistanceMeasure::cosine: {
            double dot = 0.0, np = 0.0, nq = 0.0;
            bool identical = true;
            for (std::size_t i = 0; i < p.size(); ++i) {
                dot += p[i] * q[i];
                np += p[i] * p[i];
                nq += q[i] * q[i];
                identical &= p[i] == q[i];
            }
            if (identical) return 0.0;               // covers the two-zero-vector convention
            if (np == 0.0 || nq == 0.0) return 1.0;  // one zero vector: no alignment
            return std::max(0.0, 1.0 - dot / (std::sqrt(np) * std::sqrt(nq)));
        }
    }
    throw InvalidConfig("bad distance measure");
}

// ---------------------------------------------------------------------------
// Scaler
// ---------------------------------------------------------------------------

void MinMaxScaler::fit(const std::vector<const BNSVector*>& vectors) {
    if (vectors.empty()) throw InvalidConfig("scaler fit needs at least one vector");
    std::size_t m = vectors.front()->values.size();
    mins_.assign(m, 0.0);
    maxs_.assign(m, 0.0);
    for (std::size_t f = 0; f < m; ++f) {
        double lo = vectors.front()->values[f];
        double hi = lo;
        for (const BNSVector* v : vectors) {
            if (v->values.size() != m) throw DimensionMismatch("scaler fit over mixed dimensions");
            double x = v->values[f];
            lo = std::min(lo, x);
            hi = std::max(hi, x);
        }
        mins_[f] = lo;
        maxs_[f] = hi;
    }
}

void MinMaxScaler::apply_into(std::span<const double> values, std::vector<double>& out) const {
    if (values.size() != mins_.size()) throw DimensionMismatch("scaler applied to wrong dimension");
    out.resize(values.size());
    for (std::size_t f = 0; f < values.size(); ++f) {
        double range = maxs_[f] - mins_[f];
        out[f] = range == 0.0 ? 0.0 : (values[f] - mins_[f]) / range;
    }
}

std::vector<double> MinMaxScaler::apply(std::span<const double> values) const {
    std::vector<double> out;
    apply_into(values, out);
    return out;
}

// ---------------------------------------------------------------------------
// Background series and pairing
// ---------------------------------------------------------------------------

WindowGrid background_grid(const ImpactConfig& cfg) {
    // Only the rolling-series preconditions; the pair/event feasibility
    // invariant (l_b*24 >= 2*l_df + l_g) is enforced where pairs are formed.
    if (cfg.data_frame_hours <= 0) throw InvalidConfig("data frame length must be > 0 hours");
    if (cfg.step_hours < 1) throw InvalidConfig("step must be >= 1 hour");
    if (cfg.background_days * 24 < cfg.data_frame_hours) {
        throw InvalidConfig("background shorter than one data frame");
    }
    std::int64_t half_bg = cfg.background_days * kSecondsPerDay / 2;
    std::int64_t l_df = hours_to_seconds(cfg.data_frame_hours);
    std::int64_t step = hours_to_seconds(cfg.step_hours);
    WindowGrid grid;
    grid.start0 = cfg.event_time - half_bg;
    grid.step = step;
    grid.length = l_df;
    grid.count = static_cast<std::size_t>((2 * half_bg - l_df) / step) + 1;
    return grid;
}

std::vector<BNSVector> rolling_vectors(const AttributeStore& store, const ImpactConfig& cfg) {
    return build_vector_series(store, cfg.feature_set, background_grid(cfg), cfg.features);
}

std::int64_t pair_offset(const ImpactConfig& cfg) {
    if ((cfg.data_frame_hours + cfg.gap_hours) % cfg.step_hours != 0) {
        throw InvalidConfig("(l_df + l_g) must be divisible by the step for index pairing");
    }
    return (cfg.data_frame_hours + cfg.gap_hours) / cfg.step_hours;
}

namespace {

double median_of(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    RankSplit s = split_rank(0.5, values.size());
    return interpolate_rank(values[s.lo], values[s.hi], s.frac);
}

double population_std(std::span<const double> values) {
    NeumaierSum total;
    for (double v : values) total.add(v);
    double mean = total.value() / static_cast<double>(values.size());
    NeumaierSum sq;
    for (double v : values) {
        double d = v - mean;
        sq.add(d * d);
    }
    return std::sqrt(std::max(0.0, sq.value() / static_cast<double>(values.size())));
}

}  // namespace

BackgroundDistribution background_distribution(const std::vector<BNSVector>& vectors,
                                               const ImpactConfig& cfg,
                                               const std::vector<const BNSVector*>& extra) {
    cfg.validate();
    std::int64_t p = pair_offset(cfg);
    if (static_cast<std::int64_t>(vectors.size()) <= p) {
        throw InsufficientWindows("need more than " + std::to_string(p) + " background vectors, have " +
                                  std::to_string(vectors.size()));
    }
    BackgroundDistribution out;
    std::vector<const BNSVector*> population;
    population.reserve(vectors.size() + extra.size());
    for (const auto& v : vectors) population.push_back(&v);
    for (const BNSVector* v : extra) population.push_back(v);
    out.scaler.fit(population);

    std::vector<std::vector<double>> scaled(vectors.size());
    for (std::size_t i = 0; i < vectors.size(); ++i) out.scaler.apply_into(vectors[i].values, scaled[i]);

    std::size_t pairs = vectors.size() - static_cast<std::size_t>(p);
    out.distances.reserve(pairs);
    for (std::size_t i = 0; i < pairs; ++i) {
        std::size_t j = i + static_cast<std::size_t>(p);
        if (cfg.exclude_event_pairs) {
            // Drop pairs whose combined span contains the event time.
            if (vectors[i].window.start <= cfg.event_time && cfg.event_time < vectors[j].window.end) {
                continue;
            }
        }
        out.distances.push_back(distance(scaled[i], scaled[j], cfg.distance));
    }
    if (out.distances.empty()) {
        throw InsufficientWindows("event-pair exclusion removed every background pair");
    }
    out.pair_count = out.distances.size();
    out.median = median_of(out.distances);
    out.std_dev = population_std(out.distances);
    return out;
}

// ---------------------------------------------------------------------------
// Impact score
// ---------------------------------------------------------------------------

double i_score_from(const BackgroundDistribution& background, double event_distance) {
    if (background.std_dev == 0.0) {
        throw DegenerateBackground("background distances have zero standard deviation");
    }
    return (event_distance - background.median) / background.std_dev;
}

WindowSpec event_window_before(const ImpactConfig& cfg) {
    std::int64_t half_gap = cfg.gap_hours * (kSecondsPerHour / 2);
    std::int64_t l_df = hours_to_seconds(cfg.data_frame_hours);
    return {cfg.event_time - half_gap - l_df, cfg.event_time - half_gap};
}

WindowSpec event_window_after(const ImpactConfig& cfg) {
    std::int64_t half_gap = cfg.gap_hours * (kSecondsPerHour / 2);
    std::int64_t l_df = hours_to_seconds(cfg.data_frame_hours);
    return {cfg.event_time + half_gap, cfg.event_time + half_gap + l_df};
}

ImpactResult impact_score(const AttributeStore& store, const ImpactConfig& cfg) {
    cfg.validate();
    std::vector<BNSVector> background = rolling_vectors(store, cfg);
    BNSVector before = build_bns_vector(store, cfg.feature_set, event_window_before(cfg), cfg.features);
    BNSVector after = build_bns_vector(store, cfg.feature_set, event_window_after(cfg), cfg.features);
    BackgroundDistribution dist = background_distribution(background, cfg, {&before, &after});

    double event_distance =
        distance(dist.scaler.apply(before.values), dist.scaler.apply(after.values), cfg.distance);

    ImpactResult result;
    result.config = cfg;
    result.event_distance = event_distance;
    result.background_median = dist.median;
    result.background_std = dist.std_dev;
    result.background_pairs = dist.pair_count;
    result.i_score = i_score_from(dist, event_distance);
    result.classification = classify_impact(result.i_score);
    result.delay_hours = static_cast<double>(cfg.gap_hours) / 2.0;
    return result;
}

// ---------------------------------------------------------------------------
// Temporal sweep
// ---------------------------------------------------------------------------

TemporalCurve temporal_sweep(const AttributeStore& store, const ImpactConfig& base,
                             const SweepOptions& sweep) {
    if (sweep.delay_step_hours < 1 || sweep.max_delay_hours < 0) {
        throw InvalidConfig("sweep grid needs max delay >= 0 and step >= 1");
    }
    ImpactConfig zero_gap = base;
    zero_gap.gap_hours = 0;
    zero_gap.validate();

    // The background series does not depend on the gap; build it once, and
    // build the event windows for every delay as two small grids.
    std::vector<BNSVector> background = rolling_vectors(store, zero_gap);

    std::vector<std::int64_t> delays;
    for (std::int64_t d = 0; d <= sweep.max_delay_hours; d += sweep.delay_step_hours) {
        delays.push_back(d);
    }
    std::int64_t l_df = hours_to_seconds(base.data_frame_hours);
    std::int64_t step = hours_to_seconds(sweep.delay_step_hours);

    // Before-windows end at t - d: starts descend as d grows; build ascending.
    WindowGrid before_grid;
    before_grid.start0 = base.event_time - hours_to_seconds(delays.back()) - l_df;
    before_grid.step = step;
    before_grid.length = l_df;
    before_grid.count = delays.size();
    std::vector<BNSVector> before = build_vector_series(store, base.feature_set, before_grid, base.features);

    WindowGrid after_grid;
    after_grid.start0 = base.event_time;
    after_grid.step = step;
    after_grid.length = l_df;
    after_grid.count = delays.size();
    std::vector<BNSVector> after = build_vector_series(store, base.feature_set, after_grid, base.features);

    TemporalCurve curve;
    bool first = true;
    for (std::size_t di = 0; di < delays.size(); ++di) {
        std::int64_t d = delays[di];
        ImpactConfig cfg = base;
        cfg.gap_hours = 2 * d;
        const BNSVector& v_before = before[delays.size() - 1 - di];
        const BNSVector& v_after = after[di];
        try {
            cfg.validate();
            BackgroundDistribution dist =
                background_distribution(background, cfg, {&v_before, &v_after});
            double event_distance = distance(dist.scaler.apply(v_before.values),
                                             dist.scaler.apply(v_after.values), cfg.distance);
            double i = i_score_from(dist, event_distance);
            curve.points.emplace_back(static_cast<double>(d), i);
            if (first || i > curve.max_i_score) {
                curve.max_i_score = i;
                curve.argmax_delay = static_cast<double>(d);
                first = false;
            }
        } catch (const Error& e) {
            curve.skipped.emplace_back(static_cast<double>(d), e.what());
        }
    }
    if (curve.points.empty()) {
        throw InsufficientWindows("temporal sweep produced no valid points");
    }

    if (sweep.with_spline && curve.points.size() >= 2) {
        std::vector<double> xs, ys;
        for (auto [x, y] : curve.points) {
            xs.push_back(x);
            ys.push_back(y);
        }
        CubicSpline spline(xs, ys);
        for (double x = xs.front(); x <= xs.back();
             x += static_cast<double>(sweep.spline_step_hours)) {
            curve.spline.emplace_back(x, spline(x));
        }
    }
    return curve;
}

// ---------------------------------------------------------------------------
// Rolling scan and spike detection
// ---------------------------------------------------------------------------

ScanSeries rolling_scan(const AttributeStore& store, const ScanConfig& cfg) {
    if (cfg.step_hours < 1) throw InvalidConfig("scan step must be >= 1 hour");
    if (cfg.data_frame_hours < 1) throw InvalidConfig("scan data frame must be >= 1 hour");
    if (cfg.to < cfg.from) throw InvalidConfig("scan range end precedes start");
    std::int64_t l_df = hours_to_seconds(cfg.data_frame_hours);
    std::int64_t step = hours_to_seconds(cfg.step_hours);
    std::size_t centers = static_cast<std::size_t>((cfg.to - cfg.from) / step) + 1;

    ScanSeries out;
    out.centers.reserve(centers);
    out.distances.reserve(centers);

    if (l_df % step == 0) {
        // One grid covers both window roles: window starting at T - l_df is
        // `offset` grid slots before the window starting at T.
        std::size_t offset = static_cast<std::size_t>(l_df / step);
        WindowGrid grid;
        grid.start0 = cfg.from - l_df;
        grid.step = step;
        grid.length = l_df;
        grid.count = centers + offset;
        std::vector<BNSVector> vectors = build_vector_series(store, cfg.feature_set, grid, cfg.features);
        MinMaxScaler scaler;
        std::vector<const BNSVector*> all;
        for (const auto& v : vectors) all.push_back(&v);
        scaler.fit(all);
        std::vector<std::vector<double>> scaled(vectors.size());
        for (std::size_t i = 0; i < vectors.size(); ++i) scaler.apply_into(vectors[i].values, scaled[i]);
        for (std::size_t c = 0; c < centers; ++c) {
            out.centers.push_back(cfg.from + static_cast<std::int64_t>(c) * step);
            out.distances.push_back(
                distance(scaled[c], scaled[c + offset], DistanceMeasure::squared_euclidean));
        }
    } else {
        WindowGrid before_grid{cfg.from - l_df, step, l_df, centers};
        WindowGrid after_grid{cfg.from, step, l_df, centers};
        std::vector<BNSVector> before = build_vector_series(store, cfg.feature_set, before_grid, cfg.features);
        std::vector<BNSVector> after = build_vector_series(store, cfg.feature_set, after_grid, cfg.features);
        MinMaxScaler scaler;
        std::vector<const BNSVector*> all;
        for (const auto& v : before) all.push_back(&v);
        for (const auto& v : after) all.push_back(&v);
        scaler.fit(all);
        for (std::size_t c = 0; c < centers; ++c) {
            out.centers.push_back(cfg.from + static_cast<std::int64_t>(c) * step);
            out.distances.push_back(distance(scaler.apply(before[c].values), scaler.apply(after[c].values),
                                             DistanceMeasure::squared_euclidean));
        }
    }
    return out;
}

std::vector<Spike> detect_spikes(const ScanSeries& series, double threshold,
                                 std::int64_t min_separation_hours) {
    const auto& d = series.distances;
    std::int64_t min_sep = hours_to_seconds(min_separation_hours);
    std::vector<std::size_t> maxima;
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (d[i] <= threshold) continue;
        bool left_ok = i == 0 || d[i] > d[i - 1];
        bool right_ok = i + 1 == d.size() || d[i] > d[i + 1];
        if (left_ok && right_ok) maxima.push_back(i);
    }
    std::stable_sort(maxima.begin(), maxima.end(),
                     [&](std::size_t a, std::size_t b) { return d[a] > d[b]; });
    std::vector<Spike> kept;
    for (std::size_t i : maxima) {
        std::int64_t t = series.centers[i];
        bool clash = false;
        for (const Spike& s : kept) {
            if (std::abs(t - s.time) < min_sep) {
                clash = true;
                break;
            }
        }
        if (!clash) kept.push_back({t, d[i]});
    }
    std::sort(kept.begin(), kept.end(), [](const Spike& a, const Spike& b) { return a.time < b.time; });
    return kept;
}

}  // namespace bns
