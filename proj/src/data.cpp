#include "bns/data.hpp"

#include <algorithm>
#include <charconv>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "bns/numeric.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace bns {

// ---------------------------------------------------------------------------
// Enum names
// ---------------------------------------------------------------------------

const char* to_string(ChartSeries s) {
    switch (s) {
        case ChartSeries::mempool_size_bytes: return "mempool_size_bytes";
        case ChartSeries::mempool_count: return "mempool_count";
        case ChartSeries::mempool_growth_bytes_per_sec: return "mempool_growth_bytes_per_sec";
        case ChartSeries::tx_per_second: return "tx_per_second";
    }
    return "?";
}

ChartSeries chart_series_from_string(const std::string& name) {
    for (ChartSeries s : kAllChartSeries) {
        if (name == to_string(s)) return s;
    }
    // Convenience aliases matching the attribute key names.
    if (name == "mempool_size") return ChartSeries::mempool_size_bytes;
    if (name == "mempool_growth") return ChartSeries::mempool_growth_bytes_per_sec;
    throw InvalidConfig("unknown chart series '" + name + "'");
}

const char* to_string(AttributeKey key) {
    switch (key) {
        case AttributeKey::tx_value: return "tx_value";
        case AttributeKey::tx_size: return "tx_size";
        case AttributeKey::tx_fee_rate: return "tx_fee_rate";
        case AttributeKey::tx_fees_paid: return "tx_fees_paid";
        case AttributeKey::tx_fee_percent: return "tx_fee_percent";
        case AttributeKey::tx_per_second: return "tx_per_second";
        case AttributeKey::mempool_size: return "mempool_size";
        case AttributeKey::mempool_growth: return "mempool_growth";
        case AttributeKey::mempool_count: return "mempool_count";
        case AttributeKey::tx_per_block: return "tx_per_block";
        case AttributeKey::block_size: return "block_size";
        case AttributeKey::nonstandard_flag: return "nonstandard_flag";
        case AttributeKey::address_event: return "address_event";
    }
    return "?";
}

AttributeKey attribute_key_from_string(const std::string& name) {
    for (int i = 0; i < kAttributeKeyCount; ++i) {
        auto key = static_cast<AttributeKey>(i);
        if (name == to_string(key)) return key;
    }
    throw InvalidConfig("unknown attribute key '" + name + "'");
}

AttributeKey attribute_key_for(ChartSeries series) {
    switch (series) {
        case ChartSeries::mempool_size_bytes: return AttributeKey::mempool_size;
        case ChartSeries::mempool_count: return AttributeKey::mempool_count;
        case ChartSeries::mempool_growth_bytes_per_sec: return AttributeKey::mempool_growth;
        case ChartSeries::tx_per_second: return AttributeKey::tx_per_second;
    }
    throw InvalidConfig("unmapped chart series");
}

// ---------------------------------------------------------------------------
// Attribute derivation
// ---------------------------------------------------------------------------

std::vector<AttributeRecord> derive_tx_attributes(const RawTransaction& tx) {
    std::vector<AttributeRecord> out;
    out.reserve(6 + tx.addresses.size());
    derive_tx_attributes(tx, [&](AttributeKey key, std::int64_t ts, double value) {
        out.push_back({key, ts, value, {}});
    });
    for (const auto& addr : tx.addresses) {
        out.push_back({AttributeKey::address_event, tx.timestamp, 0.0, addr});
    }
    return out;
}

// ---------------------------------------------------------------------------
// AttributeStore
// ---------------------------------------------------------------------------

void AttributeStore::require_coverage(std::int64_t start, std::int64_t end) const {
    if (!covers(start, end)) {
        throw CoverageError("window [" + std::to_string(start) + ", " + std::to_string(end) +
                            ") outside store coverage [" + std::to_string(coverage_begin_) + ", " +
                            std::to_string(coverage_end_) + "]");
    }
}

std::pair<std::size_t, std::size_t> AttributeStore::window_range(AttributeKey key, std::int64_t start,
                                                                 std::int64_t end) const {
    if (start >= end) throw InvalidConfig("window start must precede end");
    require_coverage(start, end);
    const auto& ts = column(key).ts;
    auto lo = std::lower_bound(ts.begin(), ts.end(), start);
    auto hi = std::lower_bound(lo, ts.end(), end);
    return {static_cast<std::size_t>(lo - ts.begin()), static_cast<std::size_t>(hi - ts.begin())};
}

std::span<const double> AttributeStore::query_window(AttributeKey key, std::int64_t start,
                                                     std::int64_t end) const {
    auto [lo, hi] = window_range(key, start, end);
    const auto& val = column(key).val;
    return {val.data() + lo, hi - lo};
}

std::size_t AttributeStore::record_count() const {
    std::size_t n = 0;
    for (const auto& c : columns_) n += c.ts.size();
    return n;
}

void AttributeStore::reseal() {
    bool any = false;
    std::int64_t lo = 0, hi = 0;
    for (auto& c : columns_) {
        if (c.ts.empty()) continue;
        c.min_ts = c.ts.front();
        c.max_ts = c.ts.back();
        if (!any) {
            lo = c.min_ts;
            hi = c.max_ts;
            any = true;
        } else {
            lo = std::min(lo, c.min_ts);
            hi = std::max(hi, c.max_ts);
        }
        NeumaierSum mean_sum;
        for (double v : c.val) mean_sum.add(v);
        c.shift = mean_sum.value() / static_cast<double>(c.val.size());
    }
    if (!any) throw EmptyInput();
    coverage_begin_ = lo;
    coverage_end_ = hi;
}

// ---------------------------------------------------------------------------
// StoreBuilder
// ---------------------------------------------------------------------------

namespace {

void append(AttributeStore::Column& col, std::int64_t ts, double value) {
    col.ts.push_back(ts);
    col.val.push_back(value);
}

void validate_tx(const RawTransaction& tx) {
    if (tx.size < 1) throw InvalidParams("transaction size must be >= 1 byte");
    if (tx.total_output_value < 0.0) throw InvalidParams("transaction value must be non-negative");
    if (tx.fee.has_value() && *tx.fee < 0.0) throw InvalidParams("fee must be non-negative");
    if (tx.is_coinbase && tx.fee.has_value()) throw InvalidParams("coinbase transactions carry no fee");
}

}  // namespace

std::uint64_t StoreBuilder::intern(const std::string& address) {
    auto [it, inserted] = address_ids_.try_emplace(address, store_.addresses_.size());
    if (inserted) store_.addresses_.push_back(address);
    return it->second;
}

void StoreBuilder::add_block(const RawBlock& block) {
    if (block.size_mb <= 0.0) throw InvalidParams("block size must be positive");
    if (block.tx_count < 1) throw InvalidParams("block tx count must be positive");
    append(store_.columns_[static_cast<int>(AttributeKey::tx_per_block)], block.timestamp,
           static_cast<double>(block.tx_count));
    append(store_.columns_[static_cast<int>(AttributeKey::block_size)], block.timestamp, block.size_mb);
}

void StoreBuilder::add_transaction(const RawTransaction& tx) {
    validate_tx(tx);
    derive_tx_attributes(tx, [&](AttributeKey key, std::int64_t ts, double value) {
        append(store_.columns_[static_cast<int>(key)], ts, value);
    });
    auto& addr_col = store_.columns_[static_cast<int>(AttributeKey::address_event)];
    for (const auto& a : tx.addresses) {
        append(addr_col, tx.timestamp, static_cast<double>(intern(a)));
    }
}

void StoreBuilder::add_chart(const ChartSample& sample) {
    append(store_.columns_[static_cast<int>(attribute_key_for(sample.series))], sample.timestamp,
           sample.value);
}

AttributeStore StoreBuilder::seal() {
    for (auto& col : store_.columns_) {
        if (std::is_sorted(col.ts.begin(), col.ts.end())) continue;
        std::vector<std::size_t> perm(col.ts.size());
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        std::stable_sort(perm.begin(), perm.end(),
                         [&](std::size_t a, std::size_t b) { return col.ts[a] < col.ts[b]; });
        std::vector<std::int64_t> ts(col.ts.size());
        std::vector<double> val(col.val.size());
        for (std::size_t i = 0; i < perm.size(); ++i) {
            ts[i] = col.ts[perm[i]];
            val[i] = col.val[perm[i]];
        }
        col.ts = std::move(ts);
        col.val = std::move(val);
    }
    store_.reseal();
    return std::move(store_);
}

// ---------------------------------------------------------------------------
// Store persistence: one columnar file per key, magic "BNS1", little-endian
// i64 timestamp column followed by f64 value column.
// ---------------------------------------------------------------------------

namespace {

constexpr char kMagic[4] = {'B', 'N', 'S', '1'};

void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint64_t get_u64(const char* p) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(p[i])) << (8 * i);
    return v;
}

std::uint64_t f64_bits(double d) {
    std::uint64_t v;
    std::memcpy(&v, &d, 8);
    return v;
}

double bits_f64(std::uint64_t v) {
    double d;
    std::memcpy(&d, &v, 8);
    return d;
}

void write_file(const fs::path& path, const std::string& content) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw IoError("short write to " + tmp.string());
    }
    fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

void AttributeStore::save(const std::string& directory) const {
    fs::path dir(directory);
    fs::create_directories(dir);
    for (int i = 0; i < kAttributeKeyCount; ++i) {
        const Column& col = columns_[i];
        std::string blob;
        blob.reserve(16 + col.ts.size() * 16);
        blob.append(kMagic, 4);
        std::uint32_t key_id = static_cast<std::uint32_t>(i);
        for (int b = 0; b < 4; ++b) blob.push_back(static_cast<char>((key_id >> (8 * b)) & 0xff));
        put_u64(blob, col.ts.size());
        for (std::int64_t t : col.ts) put_u64(blob, static_cast<std::uint64_t>(t));
        for (double v : col.val) put_u64(blob, f64_bits(v));
        write_file(dir / (std::string(to_string(static_cast<AttributeKey>(i))) + ".bin"), blob);
    }
    std::string dict;
    for (const auto& a : addresses_) {
        dict += a;
        dict += '\n';
    }
    write_file(dir / "addresses.dict", dict);

    json manifest;
    manifest["format"] = "BNS1";
    manifest["coverage"] = {{"begin", coverage_begin_}, {"end", coverage_end_}};
    json keys = json::object();
    for (int i = 0; i < kAttributeKeyCount; ++i) {
        const Column& col = columns_[i];
        json k;
        k["count"] = col.ts.size();
        if (!col.ts.empty()) {
            k["min_ts"] = col.min_ts;
            k["max_ts"] = col.max_ts;
        }
        keys[to_string(static_cast<AttributeKey>(i))] = k;
    }
    manifest["keys"] = keys;
    manifest["addresses"] = addresses_.size();
    write_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

AttributeStore AttributeStore::load(const std::string& directory) {
    fs::path dir(directory);
    if (!fs::is_directory(dir)) throw IoError("store directory not found: " + directory);
    AttributeStore store;
    for (int i = 0; i < kAttributeKeyCount; ++i) {
        fs::path path = dir / (std::string(to_string(static_cast<AttributeKey>(i))) + ".bin");
        std::string blob = read_file(path);
        if (blob.size() < 16 || std::memcmp(blob.data(), kMagic, 4) != 0) {
            throw IoError("bad magic in " + path.string());
        }
        std::uint64_t count = get_u64(blob.data() + 8);
        if (blob.size() != 16 + count * 16) throw IoError("truncated column file " + path.string());
        Column& col = store.columns_[i];
        col.ts.resize(count);
        col.val.resize(count);
        const char* p = blob.data() + 16;
        for (std::uint64_t j = 0; j < count; ++j, p += 8) {
            col.ts[j] = static_cast<std::int64_t>(get_u64(p));
        }
        for (std::uint64_t j = 0; j < count; ++j, p += 8) {
            col.val[j] = bits_f64(get_u64(p));
        }
        if (!std::is_sorted(col.ts.begin(), col.ts.end())) {
            throw IoError("column not time-sorted: " + path.string());
        }
    }
    std::ifstream dict(dir / "addresses.dict");
    if (!dict) throw IoError("missing addresses.dict in " + directory);
    std::string line;
    while (std::getline(dict, line)) store.addresses_.push_back(line);
    store.reseal();
    return store;
}

// ---------------------------------------------------------------------------
// Block NDJSON parser
// ---------------------------------------------------------------------------

namespace {

double require_number(const json& obj, const char* field) {
    auto it = obj.find(field);
    if (it == obj.end() || !it->is_number()) {
        throw std::runtime_error(std::string("missing or non-numeric field \"") + field + "\"");
    }
    return it->get<double>();
}

std::int64_t require_int(const json& obj, const char* field) {
    auto it = obj.find(field);
    if (it == obj.end() || !it->is_number_integer()) {
        throw std::runtime_error(std::string("missing or non-integer field \"") + field + "\"");
    }
    return it->get<std::int64_t>();
}

RawTransaction parse_tx(const json& jtx, std::int64_t block_height) {
    RawTransaction tx;
    auto txid = jtx.find("txid");
    if (txid == jtx.end() || !txid->is_string()) throw std::runtime_error("missing tx field \"txid\"");
    tx.txid = txid->get<std::string>();
    tx.timestamp = require_int(jtx, "time");
    tx.total_output_value = require_number(jtx, "value_btc");
    tx.size = require_int(jtx, "size_b");
    auto coinbase = jtx.find("coinbase");
    tx.is_coinbase = coinbase != jtx.end() && coinbase->is_boolean() && coinbase->get<bool>();
    auto fee = jtx.find("fee_btc");
    if (fee == jtx.end()) throw std::runtime_error("missing tx field \"fee_btc\" (use null for coinbase)");
    if (!fee->is_null()) {
        if (!fee->is_number()) throw std::runtime_error("field \"fee_btc\" must be a number or null");
        tx.fee = fee->get<double>();
    }
    auto nonstd = jtx.find("nonstandard");
    tx.is_nonstandard = nonstd != jtx.end() && nonstd->is_boolean() && nonstd->get<bool>();
    auto addrs = jtx.find("addresses");
    if (addrs == jtx.end() || !addrs->is_array()) throw std::runtime_error("missing tx field \"addresses\"");
    for (const auto& a : *addrs) {
        if (!a.is_string()) throw std::runtime_error("addresses must be strings");
        tx.addresses.push_back(a.get<std::string>());
    }
    tx.block_height = block_height;

    if (tx.size < 1) throw std::runtime_error("tx size_b must be >= 1");
    if (tx.total_output_value < 0.0) throw std::runtime_error("tx value_btc must be >= 0");
    if (tx.fee.has_value() && *tx.fee < 0.0) throw std::runtime_error("tx fee_btc must be >= 0");
    if (tx.is_coinbase && tx.fee.has_value()) throw std::runtime_error("coinbase tx must have null fee_btc");
    return tx;
}

}  // namespace

BlockParseResult parse_block_records(std::istream& in) {
    BlockParseResult result;
    std::string line;
    std::uint64_t line_no = 0;
    std::uint64_t content_lines = 0;
    bool have_prev_height = false;
    std::int64_t prev_height = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        ++content_lines;
        try {
            json jblock = json::parse(line);
            if (!jblock.is_object()) throw std::runtime_error("line is not a JSON object");
            RawBlock block;
            block.height = require_int(jblock, "height");
            block.timestamp = require_int(jblock, "time");
            block.size_mb = require_number(jblock, "size_mb");
            if (block.size_mb <= 0.0) throw std::runtime_error("size_mb must be > 0");
            auto jtxs = jblock.find("tx");
            if (jtxs == jblock.end() || !jtxs->is_array()) throw std::runtime_error("missing field \"tx\"");
            if (have_prev_height && block.height <= prev_height) {
                throw std::runtime_error("block heights must be strictly increasing (got " +
                                         std::to_string(block.height) + " after " +
                                         std::to_string(prev_height) + ")");
            }
            std::vector<RawTransaction> txs;
            txs.reserve(jtxs->size());
            for (const auto& jtx : *jtxs) txs.push_back(parse_tx(jtx, block.height));
            block.tx_count = static_cast<std::int64_t>(txs.size());
            if (block.tx_count < 1) throw std::runtime_error("block carries no transactions");
            have_prev_height = true;
            prev_height = block.height;
            result.blocks.push_back(block);
            for (auto& tx : txs) result.transactions.push_back(std::move(tx));
        } catch (const std::exception& e) {
            result.issues.push_back({line_no, e.what()});
        }
    }
    if (content_lines == 0) throw EmptyInput("block stream contains no records");
    return result;
}

// ---------------------------------------------------------------------------
// Chart CSV parser
// ---------------------------------------------------------------------------

std::vector<ChartSample> parse_chart_series(std::istream& in, ChartSeries series) {
    std::vector<ChartSample> out;
    std::string line;
    std::uint64_t line_no = 0;
    bool allow_negative = series == ChartSeries::mempool_growth_bytes_per_sec;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto comma = line.find(',');
        if (comma == std::string::npos) throw MalformedRecord(line_no, "expected `timestamp,value`");
        std::string_view ts_text(line.data(), comma);
        std::string_view val_text(line.data() + comma + 1, line.size() - comma - 1);
        std::int64_t ts = 0;
        auto [tp, tec] = std::from_chars(ts_text.begin(), ts_text.end(), ts);
        if (tec != std::errc{} || tp != ts_text.end()) {
            if (line_no == 1 && out.empty()) continue;  // optional header row
            throw MalformedRecord(line_no, "bad timestamp");
        }
        double value = 0.0;
        auto [vp, vec] = std::from_chars(val_text.begin(), val_text.end(), value);
        if (vec != std::errc{} || vp != val_text.end()) throw MalformedRecord(line_no, "bad value");
        if (!allow_negative && value < 0.0) {
            throw MalformedRecord(line_no, std::string(to_string(series)) + " values must be >= 0");
        }
        if (!out.empty() && ts <= out.back().timestamp) {
            throw NonMonotonicTimestamps(line_no, "timestamp " + std::to_string(ts) +
                                                      " does not increase past " +
                                                      std::to_string(out.back().timestamp));
        }
        out.push_back({series, ts, value});
    }
    if (out.empty()) throw EmptyInput("chart stream contains no samples");
    return out;
}

// ---------------------------------------------------------------------------
// DirectoryFetcher
// ---------------------------------------------------------------------------

BlockParseResult DirectoryFetcher::fetch_blocks(std::int64_t height_begin, std::int64_t height_end) {
    std::ifstream in(fs::path(dir_) / "blocks.ndjson");
    if (!in) throw IoError("missing blocks.ndjson under " + dir_);
    BlockParseResult all = parse_block_records(in);
    BlockParseResult filtered;
    filtered.issues = all.issues;
    for (const auto& b : all.blocks) {
        if (b.height >= height_begin && b.height < height_end) filtered.blocks.push_back(b);
    }
    for (auto& tx : all.transactions) {
        if (tx.block_height && *tx.block_height >= height_begin && *tx.block_height < height_end) {
            filtered.transactions.push_back(std::move(tx));
        }
    }
    return filtered;
}

std::vector<ChartSample> DirectoryFetcher::fetch_chart(ChartSeries series, std::int64_t t_begin,
                                                       std::int64_t t_end) {
    std::ifstream in(fs::path(dir_) / (std::string(to_string(series)) + ".csv"));
    if (!in) throw IoError(std::string("missing chart csv for ") + to_string(series) + " under " + dir_);
    auto all = parse_chart_series(in, series);
    std::vector<ChartSample> out;
    for (const auto& s : all) {
        if (s.timestamp >= t_begin && s.timestamp < t_end) out.push_back(s);
    }
    return out;
}

}  // namespace bns
