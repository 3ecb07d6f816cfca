#include "bns/synth.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <filesystem>
#include <fstream>
#include <queue>

#include <json.hpp>

#include "bns/export.hpp"
#include "bns/time_util.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace bns {

// ---------------------------------------------------------------------------
// Rng
// ---------------------------------------------------------------------------

std::uint64_t Rng::next_u64() {
    // splitmix64
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double Rng::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::exponential(double mean) {
    double u;
    do {
        u = uniform();
    } while (u == 0.0);
    return -mean * std::log(u);
}

double Rng::normal() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    double u, v, s;
    do {
        u = 2.0 * uniform() - 1.0;
        v = 2.0 * uniform() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    double factor = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * factor;
    have_spare_ = true;
    return u * factor;
}

double Rng::lognormal(double mu, double sigma) { return std::exp(mu + sigma * normal()); }

std::uint64_t Rng::uniform_int(std::uint64_t n) {
    // Multiply-shift; bias is negligible for the pool sizes used here.
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(next_u64()) * n) >> 64);
}

// ---------------------------------------------------------------------------
// Params
// ---------------------------------------------------------------------------

std::int64_t SynthParams::end_time() const {
    return start_time + static_cast<std::int64_t>(std::llround(duration_days * kSecondsPerDay));
}

namespace {

constexpr std::int64_t kMaxTxBytes = 100000;

void validate_shift(const ParamShift& s, const char* what) {
    if (s.tx_rate_mult <= 0.0 || s.size_mult <= 0.0 || s.fee_rate_mult <= 0.0 ||
        s.nonstandard_mult < 0.0) {
        throw InvalidParams(std::string(what) + ": multipliers must be positive");
    }
}

}  // namespace

void SynthParams::validate() const {
    if (duration_days <= 0.0) throw InvalidParams("duration must be positive");
    if (tx_rate <= 0.0) throw InvalidParams("tx rate must be positive");
    if (value_sigma <= 0.0 || size_sigma <= 0.0 || fee_rate_sigma <= 0.0) {
        throw InvalidParams("distribution sigmas must be positive");
    }
    if (size_median_bytes < 60.0) throw InvalidParams("transaction size median must be >= 60 bytes");
    if (fee_rate_median <= 0.0) throw InvalidParams("fee rate median must be positive");
    if (block_interval_mean <= 0.0) throw InvalidParams("block interval must be positive");
    if (block_cap_mb * 1e6 <= static_cast<double>(kMaxTxBytes)) {
        throw InvalidParams("block cap must exceed the largest possible transaction");
    }
    if (nonstandard_prob < 0.0 || nonstandard_prob > 1.0) {
        throw InvalidParams("nonstandard probability must be in [0, 1]");
    }
    if (addresses_min < 1 || addresses_max < addresses_min) {
        throw InvalidParams("address count range is invalid");
    }
    if (address_reuse < 0.0 || address_reuse > 1.0) throw InvalidParams("address reuse must be in [0, 1]");
    if (chart_noise < 0.0) throw InvalidParams("chart noise must be >= 0");
    validate_shift(drift, "drift");
}

// ---------------------------------------------------------------------------
// Effect envelope
// ---------------------------------------------------------------------------

namespace {

// Activity of one effect at time t: 0 before onset, linear ramp to 1, then 1
// until the duration (when set) elapses.
double effect_activity(const EventEffect& e, std::int64_t t) {
    if (t < e.onset) return 0.0;
    if (e.duration_hours && static_cast<double>(t - e.onset) >= *e.duration_hours * kSecondsPerHour) {
        return 0.0;
    }
    if (e.ramp_hours <= 0.0) return 1.0;
    double ramp_s = e.ramp_hours * kSecondsPerHour;
    return std::min(1.0, static_cast<double>(t - e.onset) / ramp_s);
}

double blend_mult(double mult, double activity) { return 1.0 + (mult - 1.0) * activity; }

struct EffectiveParams {
    double tx_rate;
    double value_mu;
    double size_median;
    double fee_rate_median;
    double nonstandard_prob;
};

class ShiftTimeline {
public:
    ShiftTimeline(const SynthParams& base, std::span<const EventEffect> effects)
        : base_(base), effects_(effects.begin(), effects.end()) {
        duration_ = static_cast<double>(base.end_time() - base.start_time);
    }

    EffectiveParams at(std::int64_t t) const {
        double drift_a = duration_ <= 0.0
                             ? 0.0
                             : std::clamp(static_cast<double>(t - base_.start_time) / duration_, 0.0, 1.0);
        double rate_mult = blend_mult(base_.drift.tx_rate_mult, drift_a);
        double mu_shift = base_.drift.value_mu_shift * drift_a;
        double size_mult = blend_mult(base_.drift.size_mult, drift_a);
        double fee_mult = blend_mult(base_.drift.fee_rate_mult, drift_a);
        double nonstd_mult = blend_mult(base_.drift.nonstandard_mult, drift_a);
        for (const auto& e : effects_) {
            double a = effect_activity(e, t);
            if (a == 0.0) continue;
            rate_mult *= blend_mult(e.shift.tx_rate_mult, a);
            mu_shift += e.shift.value_mu_shift * a;
            size_mult *= blend_mult(e.shift.size_mult, a);
            fee_mult *= blend_mult(e.shift.fee_rate_mult, a);
            nonstd_mult *= blend_mult(e.shift.nonstandard_mult, a);
        }
        EffectiveParams p;
        p.tx_rate = base_.tx_rate * rate_mult;
        p.value_mu = base_.value_mu + mu_shift;
        p.size_median = base_.size_median_bytes * size_mult;
        p.fee_rate_median = base_.fee_rate_median * fee_mult;
        p.nonstandard_prob = std::clamp(base_.nonstandard_prob * nonstd_mult, 0.0, 1.0);
        return p;
    }

    // Upper bound of the arrival rate over the whole run, for thinning.
    double max_rate() const {
        double mult = std::max(1.0, base_.drift.tx_rate_mult);
        for (const auto& e : effects_) mult *= std::max(1.0, e.shift.tx_rate_mult);
        return base_.tx_rate * mult;
    }

private:
    SynthParams base_;
    std::vector<EventEffect> effects_;
    double duration_;
};

std::string hex_txid(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t z = seed ^ (0x9e3779b97f4a7c15ULL * (index + 1));
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    z ^= z >> 31;
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(z));
    return buf;
}

std::string address_name(std::uint64_t id) {
    // Short base-36 tag; stays within SSO.
    char buf[16];
    int pos = 15;
    buf[pos] = '\0';
    std::uint64_t v = id;
    do {
        std::uint64_t digit = v % 36;
        buf[--pos] = digit < 10 ? static_cast<char>('0' + digit) : static_cast<char>('a' + digit - 10);
        v /= 36;
    } while (v != 0 && pos > 1);
    buf[--pos] = 'a';
    return std::string(buf + pos);
}

// Mempool entry ordering: fee-rate priority with FIFO tie-break.
struct PendingTx {
    double fee_rate;
    std::uint64_t arrival_index;
    RawTransaction tx;
};

struct PendingOrder {
    bool operator()(const PendingTx& a, const PendingTx& b) const {
        if (a.fee_rate != b.fee_rate) return a.fee_rate < b.fee_rate;  // max-heap on fee rate
        return a.arrival_index > b.arrival_index;                      // FIFO among equals
    }
};

}  // namespace

// ---------------------------------------------------------------------------
// Generator
// ---------------------------------------------------------------------------

void generate_into(const SynthParams& params, std::span<const EventEffect> effects, BatchSink& sink) {
    params.validate();
    std::int64_t start = params.start_time;
    std::int64_t end = params.end_time();
    for (const auto& e : effects) {
        validate_shift(e.shift, "effect");
        if (e.onset < start || e.onset >= end) throw InvalidParams("effect onset outside generated range");
        if (e.ramp_hours < 0.0) throw InvalidParams("effect ramp must be >= 0");
        if (e.duration_hours && *e.duration_hours <= 0.0) {
            throw InvalidParams("effect duration must be positive when set");
        }
    }

    ShiftTimeline timeline(params, effects);
    Rng rng(params.seed);
    const double rate_max = timeline.max_rate();
    const double cap_bytes = params.block_cap_mb * 1e6;

    std::priority_queue<PendingTx, std::vector<PendingTx>, PendingOrder> mempool;
    std::uint64_t mempool_bytes = 0;
    std::uint64_t tx_counter = 0;
    std::uint64_t address_counter = 0;
    std::vector<std::uint64_t> address_pool;

    auto draw_address = [&]() -> std::uint64_t {
        if (!address_pool.empty() && rng.uniform() < params.address_reuse) {
            return address_pool[rng.uniform_int(address_pool.size())];
        }
        std::uint64_t id = address_counter++;
        address_pool.push_back(id);
        return id;
    };

    double next_candidate = static_cast<double>(start) + rng.exponential(1.0 / rate_max);
    std::int64_t next_block = start + static_cast<std::int64_t>(
                                          std::llround(rng.exponential(params.block_interval_mean)));
    std::int64_t next_minute = start;
    std::int64_t height = params.start_height;

    double prev_sample_bytes = 0.0;
    std::uint64_t arrivals_since_sample = 0;

    auto noisy = [&](double v, bool clamp_zero) {
        if (params.chart_noise <= 0.0) return v;
        double out = v * (1.0 + params.chart_noise * rng.normal());
        return clamp_zero ? std::max(0.0, out) : out;
    };

    std::vector<RawTransaction> block_txs;
    while (true) {
        std::int64_t tx_time = static_cast<std::int64_t>(next_candidate);
        bool tx_due = next_candidate < static_cast<double>(end);
        bool block_due = next_block < end;

        // Minute boundaries first (charts read state strictly before same-
        // second activity), then blocks, then arrivals.
        if (next_minute <= end &&
            (!block_due || next_minute <= next_block) &&
            (!tx_due || next_minute <= tx_time)) {
            double bytes_now = static_cast<double>(mempool_bytes);
            ChartSample size_sample{ChartSeries::mempool_size_bytes, next_minute,
                                    noisy(bytes_now, true)};
            ChartSample count_sample{ChartSeries::mempool_count, next_minute,
                                     noisy(static_cast<double>(mempool.size()), true)};
            double growth =
                next_minute == start ? 0.0 : (bytes_now - prev_sample_bytes) / kSecondsPerMinute;
            ChartSample growth_sample{ChartSeries::mempool_growth_bytes_per_sec, next_minute,
                                      noisy(growth, false)};
            ChartSample rate_sample{ChartSeries::tx_per_second, next_minute,
                                    noisy(static_cast<double>(arrivals_since_sample) / kSecondsPerMinute,
                                          true)};
            sink.on_chart(size_sample);
            sink.on_chart(count_sample);
            sink.on_chart(growth_sample);
            sink.on_chart(rate_sample);
            prev_sample_bytes = bytes_now;
            arrivals_since_sample = 0;
            if (next_minute == end) break;
            next_minute = std::min<std::int64_t>(next_minute + kSecondsPerMinute, end);
            continue;
        }

        if (block_due && (!tx_due || next_block <= tx_time)) {
            // Mine: drain by fee-rate priority up to the cap.
            block_txs.clear();
            RawTransaction coinbase;
            coinbase.txid = hex_txid(params.seed ^ 0xb10cULL, static_cast<std::uint64_t>(height));
            coinbase.timestamp = next_block;
            coinbase.size = 250;
            coinbase.is_coinbase = true;
            coinbase.addresses.push_back(address_name(draw_address()));
            coinbase.block_height = height;
            std::uint64_t used_bytes = static_cast<std::uint64_t>(coinbase.size);
            double fees = 0.0;
            while (!mempool.empty()) {
                const PendingTx& top = mempool.top();
                std::uint64_t tx_bytes = static_cast<std::uint64_t>(top.tx.size);
                if (static_cast<double>(used_bytes + tx_bytes) > cap_bytes) break;
                used_bytes += tx_bytes;
                fees += top.tx.fee.value_or(0.0);
                block_txs.push_back(top.tx);
                block_txs.back().block_height = height;
                mempool_bytes -= tx_bytes;
                mempool.pop();
            }
            coinbase.total_output_value = 12.5 + fees;
            block_txs.insert(block_txs.begin(), coinbase);

            RawBlock block;
            block.height = height;
            block.timestamp = next_block;
            block.size_mb = static_cast<double>(used_bytes) / 1e6;
            block.tx_count = static_cast<std::int64_t>(block_txs.size());
            sink.on_block(block, block_txs);
            ++height;
            next_block += static_cast<std::int64_t>(
                std::llround(rng.exponential(params.block_interval_mean)));
            continue;
        }

        if (!tx_due) {
            // No events remain before `end`; fast-forward the minute cursor.
            if (next_minute <= end) continue;
            break;
        }

        // Candidate arrival (Poisson thinning against rate_max).
        double accept = rng.uniform();
        double advance = rng.exponential(1.0 / rate_max);
        EffectiveParams p = timeline.at(tx_time);
        if (accept * rate_max < p.tx_rate) {
            RawTransaction tx;
            tx.txid = hex_txid(params.seed, tx_counter);
            tx.timestamp = tx_time;
            tx.total_output_value = rng.lognormal(p.value_mu, params.value_sigma);
            double size_draw = rng.lognormal(std::log(p.size_median), params.size_sigma);
            tx.size = std::clamp<std::int64_t>(static_cast<std::int64_t>(std::llround(size_draw)), 60,
                                               kMaxTxBytes);
            double fee_rate = rng.lognormal(std::log(p.fee_rate_median), params.fee_rate_sigma);
            tx.fee = fee_rate * static_cast<double>(tx.size) / 1e8;
            tx.is_nonstandard = rng.uniform() < p.nonstandard_prob;
            int n_addr = params.addresses_min +
                         static_cast<int>(rng.uniform_int(
                             static_cast<std::uint64_t>(params.addresses_max - params.addresses_min + 1)));
            for (int a = 0; a < n_addr; ++a) tx.addresses.push_back(address_name(draw_address()));
            ++tx_counter;
            ++arrivals_since_sample;
            mempool_bytes += static_cast<std::uint64_t>(tx.size);
            mempool.push({fee_rate, tx_counter, std::move(tx)});
        }
        next_candidate += advance;
    }

    std::vector<RawTransaction> remainder;
    remainder.reserve(mempool.size());
    while (!mempool.empty()) {
        remainder.push_back(mempool.top().tx);
        mempool.pop();
    }
    std::sort(remainder.begin(), remainder.end(),
              [](const RawTransaction& a, const RawTransaction& b) { return a.timestamp < b.timestamp; });
    sink.on_mempool_remainder(remainder);
}

namespace {

class CollectSink : public BatchSink {
public:
    explicit CollectSink(IngestBatch& batch) : batch_(batch) {}
    void on_block(const RawBlock& block, std::span<const RawTransaction> txs) override {
        batch_.blocks.push_back(block);
        batch_.transactions.insert(batch_.transactions.end(), txs.begin(), txs.end());
    }
    void on_chart(const ChartSample& sample) override { batch_.charts.push_back(sample); }
    void on_mempool_remainder(std::span<const RawTransaction> txs) override {
        batch_.mempool_remainder.assign(txs.begin(), txs.end());
    }

private:
    IngestBatch& batch_;
};

class StoreSink : public BatchSink {
public:
    void on_block(const RawBlock& block, std::span<const RawTransaction> txs) override {
        builder.add_block(block);
        for (const auto& tx : txs) builder.add_transaction(tx);
    }
    void on_chart(const ChartSample& sample) override { builder.add_chart(sample); }
    StoreBuilder builder;
};

}  // namespace

IngestBatch generate(const SynthParams& params, std::span<const EventEffect> effects) {
    IngestBatch batch;
    CollectSink sink(batch);
    generate_into(params, effects, sink);
    return batch;
}

AttributeStore store_from_batch(const IngestBatch& batch) {
    StoreBuilder builder;
    for (const auto& b : batch.blocks) builder.add_block(b);
    for (const auto& tx : batch.transactions) builder.add_transaction(tx);
    for (const auto& s : batch.charts) builder.add_chart(s);
    return builder.seal();
}

AttributeStore generate_store(const SynthParams& params, std::span<const EventEffect> effects) {
    StoreSink sink;
    generate_into(params, effects, sink);
    return sink.builder.seal();
}

// ---------------------------------------------------------------------------
// Replay
// ---------------------------------------------------------------------------

void replay(const IngestBatch& batch, const std::string& directory) {
    fs::create_directories(directory);
    std::string ndjson;
    std::size_t tx_cursor = 0;
    for (const auto& block : batch.blocks) {
        json jtxs = json::array();
        for (std::int64_t i = 0; i < block.tx_count; ++i) {
            const RawTransaction& tx = batch.transactions.at(tx_cursor++);
            json jtx;
            jtx["txid"] = tx.txid;
            jtx["time"] = tx.timestamp;
            jtx["value_btc"] = tx.total_output_value;
            jtx["size_b"] = tx.size;
            if (tx.fee) {
                jtx["fee_btc"] = *tx.fee;
            } else {
                jtx["fee_btc"] = nullptr;
            }
            jtx["coinbase"] = tx.is_coinbase;
            jtx["nonstandard"] = tx.is_nonstandard;
            jtx["addresses"] = tx.addresses;
            jtxs.push_back(std::move(jtx));
        }
        json jblock;
        jblock["height"] = block.height;
        jblock["time"] = block.timestamp;
        jblock["size_mb"] = block.size_mb;
        jblock["tx"] = std::move(jtxs);
        ndjson += jblock.dump();
        ndjson += '\n';
    }
    atomic_write(fs::path(directory) / "blocks.ndjson", ndjson);

    for (ChartSeries series : kAllChartSeries) {
        std::string csv = "timestamp,value\n";
        for (const auto& s : batch.charts) {
            if (s.series != series) continue;
            csv += std::to_string(s.timestamp);
            csv += ',';
            csv += format_double(s.value);
            csv += '\n';
        }
        atomic_write(fs::path(directory) / (std::string(to_string(series)) + ".csv"), csv);
    }
}

// ---------------------------------------------------------------------------
// Scenario JSON
// ---------------------------------------------------------------------------

namespace {

void shift_from_json(const json& j, ParamShift& shift) {
    shift.tx_rate_mult = j.value("tx_rate_mult", shift.tx_rate_mult);
    shift.value_mu_shift = j.value("value_mu_shift", shift.value_mu_shift);
    shift.size_mult = j.value("size_mult", shift.size_mult);
    shift.fee_rate_mult = j.value("fee_rate_mult", shift.fee_rate_mult);
    shift.nonstandard_mult = j.value("nonstandard_mult", shift.nonstandard_mult);
}

json shift_to_json(const ParamShift& shift) {
    json j;
    j["tx_rate_mult"] = shift.tx_rate_mult;
    j["value_mu_shift"] = shift.value_mu_shift;
    j["size_mult"] = shift.size_mult;
    j["fee_rate_mult"] = shift.fee_rate_mult;
    j["nonstandard_mult"] = shift.nonstandard_mult;
    return j;
}

}  // namespace

Scenario parse_scenario(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw InvalidParams(std::string("scenario is not valid JSON: ") + e.what());
    }
    Scenario s;
    SynthParams& p = s.params;
    const json& jp = j.contains("params") ? j.at("params") : json::object();
    p.seed = jp.value("seed", p.seed);
    p.duration_days = jp.value("duration_days", p.duration_days);
    if (jp.contains("start_time")) {
        const json& st = jp.at("start_time");
        p.start_time = st.is_string() ? parse_time_utc(st.get<std::string>()) : st.get<std::int64_t>();
    }
    p.start_height = jp.value("start_height", p.start_height);
    p.tx_rate = jp.value("tx_rate", p.tx_rate);
    p.value_mu = jp.value("value_mu", p.value_mu);
    p.value_sigma = jp.value("value_sigma", p.value_sigma);
    p.size_median_bytes = jp.value("size_median_bytes", p.size_median_bytes);
    p.size_sigma = jp.value("size_sigma", p.size_sigma);
    p.fee_rate_median = jp.value("fee_rate_median", p.fee_rate_median);
    p.fee_rate_sigma = jp.value("fee_rate_sigma", p.fee_rate_sigma);
    p.block_interval_mean = jp.value("block_interval_mean", p.block_interval_mean);
    p.block_cap_mb = jp.value("block_cap_mb", p.block_cap_mb);
    p.nonstandard_prob = jp.value("nonstandard_prob", p.nonstandard_prob);
    p.addresses_min = jp.value("addresses_min", p.addresses_min);
    p.addresses_max = jp.value("addresses_max", p.addresses_max);
    p.address_reuse = jp.value("address_reuse", p.address_reuse);
    p.chart_noise = jp.value("chart_noise", p.chart_noise);
    if (jp.contains("drift")) shift_from_json(jp.at("drift"), p.drift);

    if (j.contains("effects")) {
        for (const auto& je : j.at("effects")) {
            EventEffect e;
            const json& jo = je.at("onset");
            e.onset = jo.is_string() ? parse_time_utc(jo.get<std::string>()) : jo.get<std::int64_t>();
            e.ramp_hours = je.value("ramp_hours", 0.0);
            if (je.contains("duration_hours") && !je.at("duration_hours").is_null()) {
                e.duration_hours = je.at("duration_hours").get<double>();
            }
            shift_from_json(je, e.shift);
            s.effects.push_back(e);
        }
    }
    s.params.validate();
    return s;
}

std::string scenario_to_json(const Scenario& scenario) {
    json j;
    const SynthParams& p = scenario.params;
    json jp;
    jp["seed"] = p.seed;
    jp["duration_days"] = p.duration_days;
    jp["start_time"] = p.start_time;
    jp["start_height"] = p.start_height;
    jp["tx_rate"] = p.tx_rate;
    jp["value_mu"] = p.value_mu;
    jp["value_sigma"] = p.value_sigma;
    jp["size_median_bytes"] = p.size_median_bytes;
    jp["size_sigma"] = p.size_sigma;
    jp["fee_rate_median"] = p.fee_rate_median;
    jp["fee_rate_sigma"] = p.fee_rate_sigma;
    jp["block_interval_mean"] = p.block_interval_mean;
    jp["block_cap_mb"] = p.block_cap_mb;
    jp["nonstandard_prob"] = p.nonstandard_prob;
    jp["addresses_min"] = p.addresses_min;
    jp["addresses_max"] = p.addresses_max;
    jp["address_reuse"] = p.address_reuse;
    jp["chart_noise"] = p.chart_noise;
    if (!p.drift.is_identity()) jp["drift"] = shift_to_json(p.drift);
    j["params"] = jp;
    json jeffects = json::array();
    for (const auto& e : scenario.effects) {
        json je = shift_to_json(e.shift);
        je["onset"] = e.onset;
        je["ramp_hours"] = e.ramp_hours;
        if (e.duration_hours) {
            je["duration_hours"] = *e.duration_hours;
        } else {
            je["duration_hours"] = nullptr;
        }
        jeffects.push_back(je);
    }
    j["effects"] = jeffects;
    return j.dump(2) + "\n";
}

}  // namespace bns
