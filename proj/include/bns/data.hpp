#pragma once

#include <array>
#include <cstdint>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "bns/errors.hpp"

namespace bns {

// ---------------------------------------------------------------------------
// Ground-truth records
// ---------------------------------------------------------------------------

struct RawTransaction {
    std::string txid;
    std::int64_t timestamp = 0;        // broadcast time, UTC epoch seconds
    double total_output_value = 0.0;   // BTC
    std::int64_t size = 0;             // bytes
    std::optional<double> fee;         // BTC; absent for coinbase
    bool is_coinbase = false;
    bool is_nonstandard = false;
    std::vector<std::string> addresses;  // inputs ∪ outputs
    std::optional<std::int64_t> block_height;
};

struct RawBlock {
    std::int64_t height = 0;
    std::int64_t timestamp = 0;
    double size_mb = 0.0;
    std::int64_t tx_count = 0;
};

enum class ChartSeries : int {
    mempool_size_bytes = 0,
    mempool_count = 1,
    mempool_growth_bytes_per_sec = 2,
    tx_per_second = 3,
};

inline constexpr std::array<ChartSeries, 4> kAllChartSeries = {
    ChartSeries::mempool_size_bytes,
    ChartSeries::mempool_count,
    ChartSeries::mempool_growth_bytes_per_sec,
    ChartSeries::tx_per_second,
};

const char* to_string(ChartSeries s);
ChartSeries chart_series_from_string(const std::string& name);

struct ChartSample {
    ChartSeries series = ChartSeries::mempool_size_bytes;
    std::int64_t timestamp = 0;
    double value = 0.0;
};

// ---------------------------------------------------------------------------
// Attribute streams
// ---------------------------------------------------------------------------

enum class AttributeKey : int {
    tx_value = 0,
    tx_size,
    tx_fee_rate,    // satoshi per byte
    tx_fees_paid,   // BTC
    tx_fee_percent,
    tx_per_second,
    mempool_size,
    mempool_growth,
    mempool_count,
    tx_per_block,
    block_size,
    nonstandard_flag,
    address_event,
};

inline constexpr int kAttributeKeyCount = 13;

const char* to_string(AttributeKey key);
AttributeKey attribute_key_from_string(const std::string& name);
AttributeKey attribute_key_for(ChartSeries series);

// One derived attribute record. `address` is set only for address_event;
// numeric keys use `value` (nonstandard_flag encodes the flag as 0/1).
struct AttributeRecord {
    AttributeKey key;
    std::int64_t timestamp;
    double value;
    std::string address;
};

// Emits the attribute records of one validated transaction. Fee-family
// records are omitted for coinbase (and fee-less) transactions; fee percent
// additionally requires a positive output value.
std::vector<AttributeRecord> derive_tx_attributes(const RawTransaction& tx);

template <typename Sink>
void derive_tx_attributes(const RawTransaction& tx, Sink&& sink) {
    sink(AttributeKey::tx_value, tx.timestamp, tx.total_output_value);
    sink(AttributeKey::tx_size, tx.timestamp, static_cast<double>(tx.size));
    if (!tx.is_coinbase && tx.fee.has_value()) {
        double fee = *tx.fee;
        sink(AttributeKey::tx_fees_paid, tx.timestamp, fee);
        sink(AttributeKey::tx_fee_rate, tx.timestamp, fee * 1e8 / static_cast<double>(tx.size));
        if (tx.total_output_value > 0.0) {
            sink(AttributeKey::tx_fee_percent, tx.timestamp, fee / tx.total_output_value);
        }
    }
    sink(AttributeKey::nonstandard_flag, tx.timestamp, tx.is_nonstandard ? 1.0 : 0.0);
}

// ---------------------------------------------------------------------------
// AttributeStore
// ---------------------------------------------------------------------------

// Immutable once sealed; concurrent read-only queries are safe. Addresses are
// dictionary-encoded: address_event values hold the dictionary id (exact for
// ids below 2^53), and the dictionary maps ids back to strings.
class AttributeStore {
public:
    struct Column {
        std::vector<std::int64_t> ts;
        std::vector<double> val;
        std::int64_t min_ts = 0;  // data extent, valid when !ts.empty()
        std::int64_t max_ts = 0;
        double shift = 0.0;  // column mean; centering constant for moment sums
    };

    const Column& column(AttributeKey key) const { return columns_[static_cast<int>(key)]; }

    // Sealed coverage: one observation interval for the whole batch. Within
    // it, an empty query result means "no events occurred"; outside it, the
    // data does not exist and queries raise CoverageError.
    std::int64_t coverage_begin() const { return coverage_begin_; }
    std::int64_t coverage_end() const { return coverage_end_; }  // inclusive last observed second
    bool covers(std::int64_t start, std::int64_t end) const {
        return start >= coverage_begin_ && end <= coverage_end_ + 1;
    }
    void require_coverage(std::int64_t start, std::int64_t end) const;

    // Values with timestamp in [start, end), in time order.
    std::span<const double> query_window(AttributeKey key, std::int64_t start, std::int64_t end) const;
    // Index range [lo, hi) of the column's records inside [start, end).
    std::pair<std::size_t, std::size_t> window_range(AttributeKey key, std::int64_t start,
                                                     std::int64_t end) const;

    const std::vector<std::string>& address_dictionary() const { return addresses_; }
    std::size_t record_count() const;

    void save(const std::string& directory) const;
    static AttributeStore load(const std::string& directory);

private:
    friend class StoreBuilder;
    std::array<Column, kAttributeKeyCount> columns_;
    std::vector<std::string> addresses_;
    std::int64_t coverage_begin_ = 0;
    std::int64_t coverage_end_ = -1;
    void reseal();
};

// Single-writer streaming builder; seal() sorts, fixes coverage and centering
// constants, and produces the immutable store.
class StoreBuilder {
public:
    void add_block(const RawBlock& block);
    void add_transaction(const RawTransaction& tx);
    void add_chart(const ChartSample& sample);
    AttributeStore seal();  // throws EmptyInput when nothing was added

private:
    AttributeStore store_;
    std::unordered_map<std::string, std::uint64_t> address_ids_;
    std::uint64_t intern(const std::string& address);
};

// ---------------------------------------------------------------------------
// Parsers
// ---------------------------------------------------------------------------

struct ParseIssue {
    std::uint64_t line;
    std::string reason;
};

struct BlockParseResult {
    std::vector<RawBlock> blocks;
    std::vector<RawTransaction> transactions;
    std::vector<ParseIssue> issues;  // malformed lines, with line numbers
};

// Newline-delimited JSON, one block object per line (see README for the
// schema). Well-formed lines always parse; malformed lines are collected as
// issues. Throws EmptyInput when the stream holds no non-blank lines.
BlockParseResult parse_block_records(std::istream& in);

// `timestamp,value` rows, optional header. Strict: malformed rows and
// non-increasing timestamps throw.
std::vector<ChartSample> parse_chart_series(std::istream& in, ChartSeries series);

// ---------------------------------------------------------------------------
// Fetching seam
// ---------------------------------------------------------------------------

// Data acquisition interface so a remote chain/chart client can replace the
// bundled file-based source without touching ingestion.
class RemoteFetcher {
public:
    virtual ~RemoteFetcher() = default;
    virtual BlockParseResult fetch_blocks(std::int64_t height_begin, std::int64_t height_end) = 0;
    virtual std::vector<ChartSample> fetch_chart(ChartSeries series, std::int64_t t_begin,
                                                 std::int64_t t_end) = 0;
};

// Serves from a directory laid out like `replay` output: blocks.ndjson plus
// one `<series>.csv` per chart series.
class DirectoryFetcher : public RemoteFetcher {
public:
    explicit DirectoryFetcher(std::string directory) : dir_(std::move(directory)) {}
    BlockParseResult fetch_blocks(std::int64_t height_begin, std::int64_t height_end) override;
    std::vector<ChartSample> fetch_chart(ChartSeries series, std::int64_t t_begin,
                                         std::int64_t t_end) override;

private:
    std::string dir_;
};

}  // namespace bns
