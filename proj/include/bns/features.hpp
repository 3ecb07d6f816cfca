#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bns/data.hpp"
#include "bns/numeric.hpp"

namespace bns {

// ---------------------------------------------------------------------------
// Windows and summary statistics
// ---------------------------------------------------------------------------

struct WindowSpec {
    std::int64_t start = 0;  // inclusive
    std::int64_t end = 0;    // exclusive
    std::int64_t length() const { return end - start; }
};

// Population moments, excess kurtosis, percentiles by linear interpolation at
// rank q*(n-1). Declared conventions: n==1 => skew = kurtosis = 0; n==0 =>
// every field 0 and the window counts as empty; zero variance => skew and
// kurtosis 0.
struct SummaryStats {
    std::size_t count = 0;
    double mean = 0.0;
    double median = 0.0;
    double std_dev = 0.0;
    double kurtosis = 0.0;  // excess
    double skew = 0.0;
    double p10 = 0.0;
    double p25 = 0.0;
    double p75 = 0.0;
    double p90 = 0.0;
    bool empty() const { return count == 0; }
};

SummaryStats summary_stats(std::span<const double> values);

// Ten (lo, hi] bins over BTC amounts; zero-value amounts land in the first
// bin; the last bin is open-ended above the final edge.
inline constexpr std::size_t kValueBinCount = 10;

struct FeatureOptions {
    std::array<double, kValueBinCount - 1> bin_edges = {1e-4, 1e-3, 1e-2, 1e-1, 1.0,
                                                        10.0, 100.0, 1e3, 1e4};
};

using ValueDistribution = std::array<double, kValueBinCount>;

ValueDistribution bin_distribution(std::span<const double> values, const FeatureOptions& opts = {});
std::size_t value_bin_index(double value, const FeatureOptions& opts);

// ---------------------------------------------------------------------------
// Feature layouts
// ---------------------------------------------------------------------------

enum class FeatureSetId { full, overall, activity, transaction, fee };

const char* to_string(FeatureSetId id);
FeatureSetId feature_set_from_string(const std::string& name);

enum class StatKind : int { mean = 0, median, std_dev, kurtosis, skew, p10, p25, p75, p90 };
inline constexpr std::array<StatKind, 9> kAllStats = {
    StatKind::mean, StatKind::median, StatKind::std_dev, StatKind::kurtosis, StatKind::skew,
    StatKind::p10,  StatKind::p25,    StatKind::p75,     StatKind::p90};

const char* to_string(StatKind s);

struct Feature {
    enum class Kind { stream_stat, value_bin, pct_nonstandard, unique_addresses };
    Kind kind = Kind::stream_stat;
    AttributeKey key = AttributeKey::tx_value;  // stream_stat only
    StatKind stat = StatKind::mean;             // stream_stat only
    std::size_t bin = 0;                        // value_bin only
    std::string name;
};

struct FeatureLayout {
    FeatureSetId id;
    std::vector<Feature> features;
    std::size_t size() const { return features.size(); }
    std::vector<std::string> names() const;
};

const FeatureLayout& layout(FeatureSetId id);

// Asserts the layout-count identities (99 = 81+10+6+2, 40 = 9*4+3+1,
// 37 = 10+9*3, 27 = 3*9, overall 23). Called at CLI startup and from tests.
void verify_layout_arithmetic();

// ---------------------------------------------------------------------------
// BNS vector
// ---------------------------------------------------------------------------

struct BNSVector {
    FeatureSetId feature_set = FeatureSetId::overall;
    WindowSpec window;
    std::vector<double> values;
};

// Window values feeding one attribute: per-block attributes yield one value
// per block timestamped in the window, chart attributes yield the samples in
// the window, nonstandard_flag yields one 0/1 per transaction. For
// address_event use window_address_ids / unique_address_count.
std::vector<double> window_attribute_values(const AttributeStore& store, AttributeKey key,
                                            const WindowSpec& window);
std::span<const double> window_address_ids(const AttributeStore& store, const WindowSpec& window);
std::size_t unique_address_count(const AttributeStore& store, const WindowSpec& window);

BNSVector build_bns_vector(const AttributeStore& store, FeatureSetId set, const WindowSpec& window,
                           const FeatureOptions& opts = {});

// ---------------------------------------------------------------------------
// Canonical windowed aggregation (shared between the one-shot builder above
// and the rolling engine)
// ---------------------------------------------------------------------------

// Power sums of (value - column.shift) accumulated in time order with
// compensated summation. Windows are decomposed into their intersections
// with absolute hour cells; each cell's sums are accumulated independently
// and the cell results combined in time order. Every code path follows this
// one decomposition so identical windows give bit-identical statistics.
struct MomentSums {
    std::size_t n = 0;
    double s1 = 0.0, s2 = 0.0, s3 = 0.0, s4 = 0.0;
};

MomentSums accumulate_piece(const AttributeStore::Column& col, std::size_t lo, std::size_t hi);

class WindowMomentCombiner {
public:
    void add(const MomentSums& piece);
    MomentSums finalize() const;

private:
    std::size_t n_ = 0;
    NeumaierSum s1_, s2_, s3_, s4_;
};

MomentSums window_moments(const AttributeStore::Column& col, std::int64_t start, std::int64_t end);

struct MomentStats {
    std::size_t n = 0;
    double mean = 0.0, m2 = 0.0, m3 = 0.0, m4 = 0.0;
};

// Central moments from shifted power sums; clamps m2 at zero.
MomentStats finalize_moments(const MomentSums& sums, double shift);

double stat_from(const MomentStats& m, StatKind kind);  // mean/std/skew/kurtosis only

struct BinCounts {
    std::array<std::uint64_t, kValueBinCount> counts{};
    std::uint64_t total = 0;
};

BinCounts accumulate_bins(const AttributeStore::Column& col, std::size_t lo, std::size_t hi,
                          const FeatureOptions& opts);
BinCounts window_bins(const AttributeStore::Column& col, std::int64_t start, std::int64_t end,
                      const FeatureOptions& opts);

// Quantile ensemble required by stream stats: p10, p25, median, p75, p90.
struct QuantileValues {
    double p10 = 0.0, p25 = 0.0, median = 0.0, p75 = 0.0, p90 = 0.0;
};
inline constexpr std::array<double, 5> kQuantileFractions = {0.10, 0.25, 0.50, 0.75, 0.90};

// Fills the ensemble from a callable returning the k-th smallest value
// (0-based) of an n-element multiset.
template <typename KthFn>
QuantileValues quantiles_from_kth(std::size_t n, KthFn&& kth) {
    QuantileValues q;
    if (n == 0) return q;
    double* slots[5] = {&q.p10, &q.p25, &q.median, &q.p75, &q.p90};
    for (std::size_t i = 0; i < 5; ++i) {
        RankSplit split = split_rank(kQuantileFractions[i], n);
        double lo = kth(split.lo);
        double hi = split.frac == 0.0 ? lo : kth(split.hi);
        *slots[i] = interpolate_rank(lo, hi, split.frac);
    }
    return q;
}

QuantileValues window_quantiles(const AttributeStore& store, AttributeKey key, std::int64_t start,
                                std::int64_t end);

// Assembles the shared stat ensemble for one attribute window.
SummaryStats make_summary(const MomentStats& m, const QuantileValues& q);

}  // namespace bns
