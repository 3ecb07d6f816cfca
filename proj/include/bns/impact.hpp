#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bns/features.hpp"
#include "bns/rolling.hpp"

namespace bns {

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

enum class DistanceMeasure { euclidean, squared_euclidean, cosine, canberra, chebyshev };

const char* to_string(DistanceMeasure m);
DistanceMeasure distance_from_string(const std::string& name);

struct ImpactConfig {
    std::int64_t event_time = 0;      // t, epoch seconds
    std::int64_t data_frame_hours = 96;   // l_df
    std::int64_t gap_hours = 0;           // l_g
    std::int64_t background_days = 120;   // l_b
    std::int64_t step_hours = 1;          // s; overlap o = l_df - s
    FeatureSetId feature_set = FeatureSetId::overall;
    DistanceMeasure distance = DistanceMeasure::squared_euclidean;
    // Non-default: drop background pairs whose combined span contains the
    // event time before computing the background median/std.
    bool exclude_event_pairs = false;
    FeatureOptions features;

    void validate() const;  // throws InvalidConfig
};

// ---------------------------------------------------------------------------
// Distances and scaling
// ---------------------------------------------------------------------------

double distance(std::span<const double> p, std::span<const double> q, DistanceMeasure m);

// Per-feature [min,max] -> [0,1] rescaling; constant features map to 0.
class MinMaxScaler {
public:
    void fit(const std::vector<const BNSVector*>& vectors);
    std::vector<double> apply(std::span<const double> values) const;
    void apply_into(std::span<const double> values, std::vector<double>& out) const;
    std::size_t dimensions() const { return mins_.size(); }
    std::span<const double> mins() const { return mins_; }
    std::span<const double> maxs() const { return maxs_; }

private:
    std::vector<double> mins_, maxs_;
};

// ---------------------------------------------------------------------------
// Background fluctuation
// ---------------------------------------------------------------------------

struct BackgroundDistribution {
    std::vector<double> distances;  // B_d in pair order
    double median = 0.0;
    double std_dev = 0.0;  // population
    std::size_t pair_count = 0;
    MinMaxScaler scaler;
};

// Chronological series of BNS vectors covering the background period:
// v_0 starts at t - l_b/2, starts advance by s, v_n ends at t + l_b/2.
std::vector<BNSVector> rolling_vectors(const AttributeStore& store, const ImpactConfig& cfg);
WindowGrid background_grid(const ImpactConfig& cfg);

// Index offset p with Phi(v_{i+p}) - Omega(v_i) = l_g, i.e. (l_df + l_g)/s.
std::int64_t pair_offset(const ImpactConfig& cfg);

// Fits the scaler over vectors ∪ extra, pairs vectors at offset p, and
// collects the pair distances with their median and population std.
BackgroundDistribution background_distribution(const std::vector<BNSVector>& vectors,
                                               const ImpactConfig& cfg,
                                               const std::vector<const BNSVector*>& extra = {});

// ---------------------------------------------------------------------------
// Impact score
// ---------------------------------------------------------------------------

enum class ImpactClass { none, discernible, substantial, significant };
const char* to_string(ImpactClass c);

// Thresholds: > 1.0 discernible, > 1.9 substantial, > 2.9 significant.
ImpactClass classify_impact(double i_score);

struct ImpactResult {
    ImpactConfig config;
    double event_distance = 0.0;
    double background_median = 0.0;
    double background_std = 0.0;
    std::size_t background_pairs = 0;
    double i_score = 0.0;
    ImpactClass classification = ImpactClass::none;
    double delay_hours = 0.0;  // l_g / 2
};

// I from an existing background and a measured event distance.
double i_score_from(const BackgroundDistribution& background, double event_distance);

WindowSpec event_window_before(const ImpactConfig& cfg);
WindowSpec event_window_after(const ImpactConfig& cfg);

ImpactResult impact_score(const AttributeStore& store, const ImpactConfig& cfg);

// ---------------------------------------------------------------------------
// Temporal sweep
// ---------------------------------------------------------------------------

struct SweepOptions {
    std::int64_t max_delay_hours = 240;
    std::int64_t delay_step_hours = 2;
    bool with_spline = false;
    std::int64_t spline_step_hours = 1;
};

struct TemporalCurve {
    std::vector<std::pair<double, double>> points;  // (delay hours, i_score)
    std::vector<std::pair<double, double>> spline;  // presentation only
    std::vector<std::pair<double, std::string>> skipped;  // (delay, reason)
    double argmax_delay = 0.0;
    double max_i_score = 0.0;
};

// Runs impact_score for every delay d in the grid with l_g = 2d. The argmax
// always comes from computed points, never from the spline.
TemporalCurve temporal_sweep(const AttributeStore& store, const ImpactConfig& base,
                             const SweepOptions& sweep);

// ---------------------------------------------------------------------------
// Retrospective rolling scan
// ---------------------------------------------------------------------------

struct ScanConfig {
    std::int64_t from = 0;  // first center time
    std::int64_t to = 0;    // last center time (inclusive grid end)
    std::int64_t data_frame_hours = 96;
    std::int64_t step_hours = 1;
    FeatureSetId feature_set = FeatureSetId::overall;
    FeatureOptions features;
};

struct Spike {
    std::int64_t time = 0;
    double distance = 0.0;
};

struct ScanSeries {
    std::vector<std::int64_t> centers;
    std::vector<double> distances;  // squared Euclidean on scaled vectors
    std::vector<Spike> spikes;
};

// Distance between the adjacent windows [T - l_df, T) and [T, T + l_df) for
// each grid center T; the scaler is fitted over all windows in the scan.
ScanSeries rolling_scan(const AttributeStore& store, const ScanConfig& cfg);

// Local maxima strictly above `threshold`, greedily kept in descending height
// with `min_separation` enforced; result sorted by time.
std::vector<Spike> detect_spikes(const ScanSeries& series, double threshold = 0.4,
                                 std::int64_t min_separation_hours = 48);

}  // namespace bns
