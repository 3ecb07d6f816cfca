#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bns/data.hpp"

namespace bns {

// ---------------------------------------------------------------------------
// Deterministic RNG (self-contained so fixtures survive toolchain changes)
// ---------------------------------------------------------------------------

class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}
    std::uint64_t next_u64();
    double uniform();  // [0, 1)
    double exponential(double mean);
    double normal();  // standard, Marsaglia polar
    double lognormal(double mu, double sigma);
    std::uint64_t uniform_int(std::uint64_t n);  // [0, n)

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

// ---------------------------------------------------------------------------
// Parameters and effects
// ---------------------------------------------------------------------------

// Multipliers/shifts applied on top of the base parameters. Used both for
// injected events and for the secular drift that makes long backgrounds
// non-stationary.
struct ParamShift {
    double tx_rate_mult = 1.0;
    double value_mu_shift = 0.0;
    double size_mult = 1.0;
    double fee_rate_mult = 1.0;
    double nonstandard_mult = 1.0;

    bool is_identity() const {
        return tx_rate_mult == 1.0 && value_mu_shift == 0.0 && size_mult == 1.0 &&
               fee_rate_mult == 1.0 && nonstandard_mult == 1.0;
    }
};

struct EventEffect {
    std::int64_t onset = 0;                  // epoch seconds, inside the generated range
    double ramp_hours = 0.0;                 // 0 = step
    std::optional<double> duration_hours;    // absent = open-ended
    ParamShift shift;
};

struct SynthParams {
    std::uint64_t seed = 1;
    double duration_days = 30.0;
    std::int64_t start_time = 0;  // epoch seconds of sample 0
    std::int64_t start_height = 500000;

    double tx_rate = 3.0;              // mean tx/s, Poisson arrivals
    double value_mu = -2.0;            // log-normal BTC value
    double value_sigma = 2.0;
    double size_median_bytes = 250.0;  // log-normal size
    double size_sigma = 0.6;
    double fee_rate_median = 20.0;     // log-normal satoshi/byte
    double fee_rate_sigma = 0.8;
    double block_interval_mean = 600.0;  // seconds, exponential
    double block_cap_mb = 1.0;
    double nonstandard_prob = 0.001;
    int addresses_min = 2;
    int addresses_max = 4;
    double address_reuse = 0.8;  // probability of drawing from the existing pool

    ParamShift drift;          // linearly ramped over the full duration
    double chart_noise = 0.0;  // fractional Gaussian noise on chart reads

    std::int64_t end_time() const;
    void validate() const;  // throws InvalidParams
};

// ---------------------------------------------------------------------------
// Generation
// ---------------------------------------------------------------------------

// Streaming consumer; blocks arrive in chain order with their confirmed
// transactions, chart samples per series in time order.
class BatchSink {
public:
    virtual ~BatchSink() = default;
    virtual void on_block(const RawBlock& block, std::span<const RawTransaction> txs) = 0;
    virtual void on_chart(const ChartSample& sample) = 0;
    virtual void on_mempool_remainder(std::span<const RawTransaction>) {}
};

struct IngestBatch {
    std::vector<RawBlock> blocks;
    std::vector<RawTransaction> transactions;  // confirmed, in block order
    std::vector<ChartSample> charts;
    std::vector<RawTransaction> mempool_remainder;  // still unconfirmed at the end
};

void generate_into(const SynthParams& params, std::span<const EventEffect> effects, BatchSink& sink);
IngestBatch generate(const SynthParams& params, std::span<const EventEffect> effects = {});

// Writes blocks.ndjson plus one <series>.csv per chart series; the files
// round-trip through the parsers.
void replay(const IngestBatch& batch, const std::string& directory);

// Builds a sealed store from confirmed blocks/transactions and charts
// without touching the filesystem.
AttributeStore store_from_batch(const IngestBatch& batch);

// Streams generated data straight into a sealed store.
AttributeStore generate_store(const SynthParams& params, std::span<const EventEffect> effects = {});

// ---------------------------------------------------------------------------
// Scenario files: JSON {"params": {...}, "effects": [...]}
// ---------------------------------------------------------------------------

struct Scenario {
    SynthParams params;
    std::vector<EventEffect> effects;
};

Scenario parse_scenario(const std::string& json_text);
std::string scenario_to_json(const Scenario& scenario);

}  // namespace bns
