#include "bns/features.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "bns/time_util.hpp"

namespace bns {

// ---------------------------------------------------------------------------
// Pure summary statistics (two-pass central moments, sorted percentiles)
// ---------------------------------------------------------------------------

SummaryStats summary_stats(std::span<const double> values) {
    SummaryStats out;
    out.count = values.size();
    if (values.empty()) return out;

    NeumaierSum total;
    for (double v : values) total.add(v);
    double mean = total.value() / static_cast<double>(values.size());

    NeumaierSum c2, c3, c4;
    for (double v : values) {
        double d = v - mean;
        double d2 = d * d;
        c2.add(d2);
        c3.add(d2 * d);
        c4.add(d2 * d2);
    }
    double n = static_cast<double>(values.size());
    MomentStats m;
    m.n = values.size();
    m.mean = mean;
    m.m2 = std::max(0.0, c2.value() / n);
    m.m3 = c3.value() / n;
    m.m4 = c4.value() / n;

    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    QuantileValues q = quantiles_from_kth(sorted.size(), [&](std::size_t k) { return sorted[k]; });
    return make_summary(m, q);
}

SummaryStats make_summary(const MomentStats& m, const QuantileValues& q) {
    SummaryStats out;
    out.count = m.n;
    if (m.n == 0) return out;
    out.mean = m.mean;
    out.median = q.median;
    out.p10 = q.p10;
    out.p25 = q.p25;
    out.p75 = q.p75;
    out.p90 = q.p90;
    out.std_dev = std::sqrt(m.m2);
    if (m.n >= 2 && m.m2 > 0.0) {
        out.skew = m.m3 / (m.m2 * out.std_dev);
        out.kurtosis = m.m4 / (m.m2 * m.m2) - 3.0;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Value bins
// ---------------------------------------------------------------------------

std::size_t value_bin_index(double value, const FeatureOptions& opts) {
    const auto& e = opts.bin_edges;
    return static_cast<std::size_t>(std::lower_bound(e.begin(), e.end(), value) - e.begin());
}

ValueDistribution bin_distribution(std::span<const double> values, const FeatureOptions& opts) {
    ValueDistribution out{};
    if (values.empty()) return out;
    std::array<std::uint64_t, kValueBinCount> counts{};
    for (double v : values) ++counts[value_bin_index(v, opts)];
    for (std::size_t i = 0; i < kValueBinCount; ++i) {
        out[i] = static_cast<double>(counts[i]) / static_cast<double>(values.size());
    }
    return out;
}

// ---------------------------------------------------------------------------
// Layouts
// ---------------------------------------------------------------------------

const char* to_string(FeatureSetId id) {
    switch (id) {
        case FeatureSetId::full: return "full";
        case FeatureSetId::overall: return "overall";
        case FeatureSetId::activity: return "activity";
        case FeatureSetId::transaction: return "transaction";
        case FeatureSetId::fee: return "fee";
    }
    return "?";
}

FeatureSetId feature_set_from_string(const std::string& name) {
    for (FeatureSetId id : {FeatureSetId::full, FeatureSetId::overall, FeatureSetId::activity,
                            FeatureSetId::transaction, FeatureSetId::fee}) {
        if (name == to_string(id)) return id;
    }
    throw InvalidConfig("unknown feature set '" + name + "'");
}

const char* to_string(StatKind s) {
    switch (s) {
        case StatKind::mean: return "mean";
        case StatKind::median: return "median";
        case StatKind::std_dev: return "std";
        case StatKind::kurtosis: return "kurtosis";
        case StatKind::skew: return "skew";
        case StatKind::p10: return "p10";
        case StatKind::p25: return "p25";
        case StatKind::p75: return "p75";
        case StatKind::p90: return "p90";
    }
    return "?";
}

namespace {

// The nine per-event / per-minute streams that receive the full stat
// ensemble in the full set. Order is part of the canonical layout.
constexpr std::array<AttributeKey, 9> kStreamAttributes = {
    AttributeKey::tx_value,      AttributeKey::tx_size,      AttributeKey::tx_fee_rate,
    AttributeKey::tx_fees_paid,  AttributeKey::tx_fee_percent, AttributeKey::tx_per_second,
    AttributeKey::mempool_size,  AttributeKey::mempool_growth, AttributeKey::mempool_count,
};

Feature stream_stat(AttributeKey key, StatKind stat) {
    Feature f;
    f.kind = Feature::Kind::stream_stat;
    f.key = key;
    f.stat = stat;
    f.name = std::string(to_string(key)) + "_" + to_string(stat);
    return f;
}

Feature value_bin(std::size_t i) {
    Feature f;
    f.kind = Feature::Kind::value_bin;
    f.bin = i;
    f.name = "value_bin_" + std::to_string(i + 1);
    return f;
}

Feature single(Feature::Kind kind, const char* name) {
    Feature f;
    f.kind = kind;
    f.name = name;
    return f;
}

void push_all_stats(std::vector<Feature>& fs, AttributeKey key) {
    for (StatKind s : kAllStats) fs.push_back(stream_stat(key, s));
}

void push_block_stats(std::vector<Feature>& fs, AttributeKey key) {
    for (StatKind s : {StatKind::mean, StatKind::median, StatKind::std_dev}) {
        fs.push_back(stream_stat(key, s));
    }
}

void push_bins(std::vector<Feature>& fs) {
    for (std::size_t i = 0; i < kValueBinCount; ++i) fs.push_back(value_bin(i));
}

FeatureLayout make_layout(FeatureSetId id) {
    FeatureLayout out;
    out.id = id;
    auto& fs = out.features;
    switch (id) {
        case FeatureSetId::full:
            for (AttributeKey key : kStreamAttributes) push_all_stats(fs, key);
            push_bins(fs);
            push_block_stats(fs, AttributeKey::tx_per_block);
            push_block_stats(fs, AttributeKey::block_size);
            fs.push_back(single(Feature::Kind::pct_nonstandard, "pct_nonstandard"));
            fs.push_back(single(Feature::Kind::unique_addresses, "unique_addresses"));
            break;
        case FeatureSetId::overall:
            for (AttributeKey key : kStreamAttributes) fs.push_back(stream_stat(key, StatKind::mean));
            push_bins(fs);
            fs.push_back(stream_stat(AttributeKey::tx_per_block, StatKind::mean));
            fs.push_back(stream_stat(AttributeKey::block_size, StatKind::mean));
            fs.push_back(single(Feature::Kind::pct_nonstandard, "pct_nonstandard"));
            fs.push_back(single(Feature::Kind::unique_addresses, "unique_addresses"));
            break;
        case FeatureSetId::activity:
            push_block_stats(fs, AttributeKey::block_size);
            fs.push_back(single(Feature::Kind::unique_addresses, "unique_addresses"));
            for (AttributeKey key : {AttributeKey::tx_per_second, AttributeKey::mempool_count,
                                     AttributeKey::mempool_growth, AttributeKey::mempool_size}) {
                push_all_stats(fs, key);
            }
            break;
        case FeatureSetId::transaction:
            push_bins(fs);
            for (AttributeKey key :
                 {AttributeKey::tx_size, AttributeKey::tx_per_second, AttributeKey::tx_value}) {
                push_all_stats(fs, key);
            }
            break;
        case FeatureSetId::fee:
            for (AttributeKey key : {AttributeKey::tx_fee_rate, AttributeKey::tx_fees_paid,
                                     AttributeKey::tx_fee_percent}) {
                push_all_stats(fs, key);
            }
            break;
    }
    return out;
}

}  // namespace

const FeatureLayout& layout(FeatureSetId id) {
    static const FeatureLayout full = make_layout(FeatureSetId::full);
    static const FeatureLayout overall = make_layout(FeatureSetId::overall);
    static const FeatureLayout activity = make_layout(FeatureSetId::activity);
    static const FeatureLayout transaction = make_layout(FeatureSetId::transaction);
    static const FeatureLayout fee = make_layout(FeatureSetId::fee);
    switch (id) {
        case FeatureSetId::full: return full;
        case FeatureSetId::overall: return overall;
        case FeatureSetId::activity: return activity;
        case FeatureSetId::transaction: return transaction;
        case FeatureSetId::fee: return fee;
    }
    throw InvalidConfig("bad feature set id");
}

std::vector<std::string> FeatureLayout::names() const {
    std::vector<std::string> out;
    out.reserve(features.size());
    for (const auto& f : features) out.push_back(f.name);
    return out;
}

void verify_layout_arithmetic() {
    auto expect = [](bool ok, const char* what) {
        if (!ok) throw Error(ErrorKind::internal, std::string("layout self-check failed: ") + what);
    };
    expect(layout(FeatureSetId::full).size() == 99, "full == 81 + 10 + 6 + 2 == 99");
    expect(layout(FeatureSetId::overall).size() == 23, "overall == 13 + 10 == 23");
    expect(layout(FeatureSetId::activity).size() == 40, "activity == 9*4 + 3 + 1 == 40");
    expect(layout(FeatureSetId::transaction).size() == 37, "transaction == 10 + 9*3 == 37");
    expect(layout(FeatureSetId::fee).size() == 27, "fee == 3*9 == 27");
    expect(9 * 9 + kValueBinCount + 2 * 3 + 2 == 99, "full arithmetic identity");
}

// ---------------------------------------------------------------------------
// Canonical windowed aggregation
// ---------------------------------------------------------------------------

MomentSums accumulate_piece(const AttributeStore::Column& col, std::size_t lo, std::size_t hi) {
    MomentSums out;
    out.n = hi - lo;
    NeumaierSum s1, s2, s3, s4;
    for (std::size_t i = lo; i < hi; ++i) {
        double d = col.val[i] - col.shift;
        double d2 = d * d;
        s1.add(d);
        s2.add(d2);
        s3.add(d2 * d);
        s4.add(d2 * d2);
    }
    out.s1 = s1.value();
    out.s2 = s2.value();
    out.s3 = s3.value();
    out.s4 = s4.value();
    return out;
}

void WindowMomentCombiner::add(const MomentSums& piece) {
    n_ += piece.n;
    s1_.add(piece.s1);
    s2_.add(piece.s2);
    s3_.add(piece.s3);
    s4_.add(piece.s4);
}

MomentSums WindowMomentCombiner::finalize() const {
    return {n_, s1_.value(), s2_.value(), s3_.value(), s4_.value()};
}

namespace {

// Calls piece_fn(cell_start, cell_end) for each intersection of [start, end)
// with the absolute hour grid, in time order.
template <typename Fn>
void for_each_hour_piece(std::int64_t start, std::int64_t end, Fn&& piece_fn) {
    std::int64_t cell = start - ((start % kSecondsPerHour) + kSecondsPerHour) % kSecondsPerHour;
    while (cell < end) {
        std::int64_t cell_end = cell + kSecondsPerHour;
        piece_fn(std::max(start, cell), std::min(end, cell_end));
        cell = cell_end;
    }
}

std::pair<std::size_t, std::size_t> range_in(const AttributeStore::Column& col, std::int64_t start,
                                             std::int64_t end) {
    auto lo = std::lower_bound(col.ts.begin(), col.ts.end(), start);
    auto hi = std::lower_bound(lo, col.ts.end(), end);
    return {static_cast<std::size_t>(lo - col.ts.begin()), static_cast<std::size_t>(hi - col.ts.begin())};
}

}  // namespace

MomentSums window_moments(const AttributeStore::Column& col, std::int64_t start, std::int64_t end) {
    WindowMomentCombiner combiner;
    auto [win_lo, win_hi] = range_in(col, start, end);
    std::size_t cursor = win_lo;
    for_each_hour_piece(start, end, [&](std::int64_t piece_start, std::int64_t piece_end) {
        (void)piece_start;
        std::size_t piece_hi = cursor;
        while (piece_hi < win_hi && col.ts[piece_hi] < piece_end) ++piece_hi;
        combiner.add(accumulate_piece(col, cursor, piece_hi));
        cursor = piece_hi;
    });
    return combiner.finalize();
}

MomentStats finalize_moments(const MomentSums& sums, double shift) {
    MomentStats out;
    out.n = sums.n;
    if (sums.n == 0) return out;
    double n = static_cast<double>(sums.n);
    double d = sums.s1 / n;
    out.mean = shift + d;
    double r2 = sums.s2 / n;
    double r3 = sums.s3 / n;
    double r4 = sums.s4 / n;
    out.m2 = std::max(0.0, r2 - d * d);
    out.m3 = r3 - 3.0 * d * r2 + 2.0 * d * d * d;
    out.m4 = r4 - 4.0 * d * r3 + 6.0 * d * d * r2 - 3.0 * d * d * d * d;
    return out;
}

double stat_from(const MomentStats& m, StatKind kind) {
    switch (kind) {
        case StatKind::mean: return m.n == 0 ? 0.0 : m.mean;
        case StatKind::std_dev: return std::sqrt(m.m2);
        case StatKind::skew:
            return (m.n >= 2 && m.m2 > 0.0) ? m.m3 / (m.m2 * std::sqrt(m.m2)) : 0.0;
        case StatKind::kurtosis: return (m.n >= 2 && m.m2 > 0.0) ? m.m4 / (m.m2 * m.m2) - 3.0 : 0.0;
        default: throw Error(ErrorKind::internal, "stat_from handles moment stats only");
    }
}

BinCounts accumulate_bins(const AttributeStore::Column& col, std::size_t lo, std::size_t hi,
                          const FeatureOptions& opts) {
    BinCounts out;
    out.total = hi - lo;
    for (std::size_t i = lo; i < hi; ++i) ++out.counts[value_bin_index(col.val[i], opts)];
    return out;
}

BinCounts window_bins(const AttributeStore::Column& col, std::int64_t start, std::int64_t end,
                      const FeatureOptions& opts) {
    auto [lo, hi] = range_in(col, start, end);
    return accumulate_bins(col, lo, hi, opts);
}

QuantileValues window_quantiles(const AttributeStore& store, AttributeKey key, std::int64_t start,
                                std::int64_t end) {
    auto span = store.query_window(key, start, end);
    std::vector<double> scratch(span.begin(), span.end());
    // Gather the distinct ranks needed, select them in one pass, then feed the
    // shared interpolation.
    std::size_t n = scratch.size();
    if (n == 0) return {};
    std::vector<std::size_t> ranks;
    for (double q : kQuantileFractions) {
        RankSplit s = split_rank(q, n);
        ranks.push_back(s.lo);
        if (s.frac != 0.0) ranks.push_back(s.hi);
    }
    std::sort(ranks.begin(), ranks.end());
    ranks.erase(std::unique(ranks.begin(), ranks.end()), ranks.end());
    std::vector<double> selected(ranks.size());
    multi_select(scratch, ranks, selected);
    auto kth = [&](std::size_t k) {
        auto it = std::lower_bound(ranks.begin(), ranks.end(), k);
        return selected[static_cast<std::size_t>(it - ranks.begin())];
    };
    return quantiles_from_kth(n, kth);
}

// ---------------------------------------------------------------------------
// Window accessors and the one-shot vector builder
// ---------------------------------------------------------------------------

std::vector<double> window_attribute_values(const AttributeStore& store, AttributeKey key,
                                            const WindowSpec& window) {
    if (key == AttributeKey::address_event) {
        throw InvalidConfig("address_event yields addresses; use window_address_ids");
    }
    auto span = store.query_window(key, window.start, window.end);
    return {span.begin(), span.end()};
}

std::span<const double> window_address_ids(const AttributeStore& store, const WindowSpec& window) {
    return store.query_window(AttributeKey::address_event, window.start, window.end);
}

std::size_t unique_address_count(const AttributeStore& store, const WindowSpec& window) {
    auto ids = window_address_ids(store, window);
    std::unordered_set<std::uint64_t> seen;
    seen.reserve(ids.size());
    for (double id : ids) seen.insert(static_cast<std::uint64_t>(id));
    return seen.size();
}

BNSVector build_bns_vector(const AttributeStore& store, FeatureSetId set, const WindowSpec& window,
                           const FeatureOptions& opts) {
    store.require_coverage(window.start, window.end);
    const FeatureLayout& lay = layout(set);
    BNSVector out;
    out.feature_set = set;
    out.window = window;
    out.values.assign(lay.size(), 0.0);

    // Per-attribute caches so multi-stat attributes aggregate once.
    std::array<bool, kAttributeKeyCount> have_moments{};
    std::array<MomentStats, kAttributeKeyCount> moments;
    std::array<bool, kAttributeKeyCount> have_quantiles{};
    std::array<QuantileValues, kAttributeKeyCount> quantiles;
    BinCounts bins;
    bool have_bins = false;

    for (std::size_t i = 0; i < lay.size(); ++i) {
        const Feature& f = lay.features[i];
        switch (f.kind) {
            case Feature::Kind::stream_stat: {
                int k = static_cast<int>(f.key);
                const auto& col = store.column(f.key);
                if (f.stat == StatKind::median || f.stat >= StatKind::p10) {
                    if (!have_quantiles[k]) {
                        quantiles[k] = window_quantiles(store, f.key, window.start, window.end);
                        have_quantiles[k] = true;
                    }
                    const QuantileValues& q = quantiles[k];
                    double v = f.stat == StatKind::median ? q.median
                               : f.stat == StatKind::p10  ? q.p10
                               : f.stat == StatKind::p25  ? q.p25
                               : f.stat == StatKind::p75  ? q.p75
                                                          : q.p90;
                    out.values[i] = v;
                } else {
                    if (!have_moments[k]) {
                        moments[k] = finalize_moments(window_moments(col, window.start, window.end),
                                                      col.shift);
                        have_moments[k] = true;
                    }
                    out.values[i] = stat_from(moments[k], f.stat);
                }
                break;
            }
            case Feature::Kind::value_bin: {
                if (!have_bins) {
                    bins = window_bins(store.column(AttributeKey::tx_value), window.start, window.end,
                                       opts);
                    have_bins = true;
                }
                out.values[i] = bins.total == 0 ? 0.0
                                                : static_cast<double>(bins.counts[f.bin]) /
                                                      static_cast<double>(bins.total);
                break;
            }
            case Feature::Kind::pct_nonstandard: {
                const auto& col = store.column(AttributeKey::nonstandard_flag);
                MomentStats m = finalize_moments(window_moments(col, window.start, window.end), col.shift);
                out.values[i] = m.n == 0 ? 0.0 : 100.0 * m.mean;
                break;
            }
            case Feature::Kind::unique_addresses:
                out.values[i] = static_cast<double>(unique_address_count(store, window));
                break;
        }
    }
    return out;
}

}  // namespace bns
