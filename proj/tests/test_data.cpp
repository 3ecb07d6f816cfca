#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "bns/data.hpp"
#include "bns/synth.hpp"
#include "test_helpers.hpp"

using namespace bns;

namespace {

const char* kBlockLine =
    R"({"height":100,"time":1000,"size_mb":0.5,"tx":[)"
    R"({"txid":"aa","time":990,"value_btc":1.5,"size_b":250,"fee_btc":0.0001,"coinbase":false,"nonstandard":false,"addresses":["x1","x2"]},)"
    R"({"txid":"bb","time":995,"value_btc":0.0,"size_b":300,"fee_btc":null,"coinbase":true,"nonstandard":false,"addresses":["m1"]}]})";

std::string block_line(std::int64_t height, std::int64_t time) {
    std::ostringstream os;
    os << R"({"height":)" << height << R"(,"time":)" << time << R"(,"size_mb":0.3,"tx":[)"
       << R"({"txid":"t)" << height << R"(","time":)" << time
       << R"(,"value_btc":1.0,"size_b":200,"fee_btc":0.0002,"coinbase":false,"nonstandard":false,"addresses":["a"]}]})";
    return os.str();
}

}  // namespace

TEST_CASE("parse_block_records maps fields") {
    std::istringstream in(kBlockLine);
    auto result = parse_block_records(in);
    REQUIRE(result.issues.empty());
    REQUIRE(result.blocks.size() == 1);
    REQUIRE(result.transactions.size() == 2);
    CHECK(result.blocks[0].height == 100);
    CHECK(result.blocks[0].tx_count == 2);
    CHECK(result.blocks[0].size_mb == 0.5);
    const auto& tx = result.transactions[0];
    CHECK(tx.txid == "aa");
    CHECK(tx.fee.has_value());
    CHECK(tx.addresses.size() == 2);
    CHECK(*tx.block_height == 100);
    const auto& cb = result.transactions[1];
    CHECK(cb.is_coinbase);
    CHECK_FALSE(cb.fee.has_value());
}

TEST_CASE("parse_block_records reports malformed lines with numbers") {
    std::string bad = R"({"height":101,"time":2000,"tx":[]})";  // missing size_mb
    std::istringstream in(std::string(kBlockLine) + "\n" + bad + "\n");
    auto result = parse_block_records(in);
    REQUIRE(result.issues.size() == 1);
    CHECK(result.issues[0].line == 2);
    CHECK(result.issues[0].reason.find("size_mb") != std::string::npos);
    CHECK(result.blocks.size() == 1);
}

TEST_CASE("parse_block_records three-block fixture") {
    std::ostringstream fixture;
    fixture << block_line(100, 1000) << "\n" << block_line(101, 1600) << "\n"
            << block_line(102, 2200) << "\n";
    std::istringstream in(fixture.str());
    auto result = parse_block_records(in);
    REQUIRE(result.issues.empty());
    REQUIRE(result.blocks.size() == 3);
    CHECK(result.blocks[0].height == 100);
    CHECK(result.blocks[1].height == 101);
    CHECK(result.blocks[2].height == 102);
    std::int64_t tx_total = 0;
    for (const auto& b : result.blocks) tx_total += b.tx_count;
    CHECK(tx_total == static_cast<std::int64_t>(result.transactions.size()));
}

TEST_CASE("parse_block_records rejects decreasing heights and empty input") {
    std::istringstream in(block_line(101, 1000) + "\n" + block_line(100, 1600) + "\n");
    auto result = parse_block_records(in);
    CHECK(result.issues.size() == 1);
    CHECK(result.issues[0].line == 2);

    std::istringstream empty("\n  \n");
    CHECK_THROWS_AS(parse_block_records(empty), EmptyInput);
}

TEST_CASE("parse_block_records rejects coinbase with fee") {
    std::string bad =
        R"({"height":1,"time":10,"size_mb":0.1,"tx":[{"txid":"c","time":10,"value_btc":12.5,)"
        R"("size_b":250,"fee_btc":0.1,"coinbase":true,"nonstandard":false,"addresses":["m"]}]})";
    std::istringstream in(bad);
    auto result = parse_block_records(in);
    REQUIRE(result.issues.size() == 1);
    CHECK(result.issues[0].reason.find("coinbase") != std::string::npos);
}

TEST_CASE("parse_chart_series basics") {
    std::istringstream ok("0,5\n60,6\n");
    auto samples = parse_chart_series(ok, ChartSeries::mempool_count);
    REQUIRE(samples.size() == 2);
    CHECK(samples[0].timestamp == 0);
    CHECK(samples[1].value == 6.0);

    std::istringstream backwards("60,6\n0,5\n");
    CHECK_THROWS_AS(parse_chart_series(backwards, ChartSeries::mempool_count),
                    NonMonotonicTimestamps);

    std::istringstream dup("60,6\n60,7\n");
    CHECK_THROWS_AS(parse_chart_series(dup, ChartSeries::mempool_count), NonMonotonicTimestamps);

    std::istringstream header("timestamp,value\n0,5\n");
    CHECK(parse_chart_series(header, ChartSeries::mempool_count).size() == 1);

    std::istringstream junk("0,5\nnot,a,row\n");
    CHECK_THROWS_AS(parse_chart_series(junk, ChartSeries::mempool_count), MalformedRecord);

    std::istringstream neg("0,-5\n");
    CHECK_THROWS_AS(parse_chart_series(neg, ChartSeries::mempool_count), MalformedRecord);
    std::istringstream growth_neg("0,-5\n");
    CHECK(parse_chart_series(growth_neg, ChartSeries::mempool_growth_bytes_per_sec).size() == 1);
}

TEST_CASE("parse_chart_series day fixture coverage") {
    std::ostringstream day;
    for (int i = 0; i < 1440; ++i) day << i * 60 << "," << (i % 7) << "\n";
    std::istringstream in(day.str());
    auto samples = parse_chart_series(in, ChartSeries::tx_per_second);
    REQUIRE(samples.size() == 1440);
    CHECK(samples.front().timestamp == 0);
    CHECK(samples.back().timestamp == 86340);
}

TEST_CASE("derive_tx_attributes fee family rules") {
    RawTransaction tx = bnstest::simple_tx(100, 2.0, 250, 0.0001, {"p", "q"});
    auto records = derive_tx_attributes(tx);

    auto find = [&](AttributeKey key) -> const AttributeRecord* {
        for (const auto& r : records) {
            if (r.key == key) return &r;
        }
        return nullptr;
    };
    // fee_rate = 0.0001 BTC * 1e8 / 250 B = 40 satoshi/byte
    REQUIRE(find(AttributeKey::tx_fee_rate) != nullptr);
    CHECK(find(AttributeKey::tx_fee_rate)->value == doctest::Approx(40.0).epsilon(1e-12));
    REQUIRE(find(AttributeKey::tx_fee_percent) != nullptr);
    CHECK(find(AttributeKey::tx_fee_percent)->value == doctest::Approx(0.00005).epsilon(1e-12));
    CHECK(find(AttributeKey::tx_value)->value == 2.0);
    CHECK(find(AttributeKey::tx_size)->value == 250.0);
    CHECK(find(AttributeKey::nonstandard_flag)->value == 0.0);
    std::size_t addr_records = 0;
    for (const auto& r : records) {
        if (r.key == AttributeKey::address_event) ++addr_records;
    }
    CHECK(addr_records == 2);
}

TEST_CASE("derive_tx_attributes fee percent example") {
    RawTransaction tx = bnstest::simple_tx(100, 2.0, 250, 0.002);
    auto records = derive_tx_attributes(tx);
    bool found = false;
    for (const auto& r : records) {
        if (r.key == AttributeKey::tx_fee_percent) {
            CHECK(r.value == doctest::Approx(0.001).epsilon(1e-15));
            found = true;
        }
    }
    CHECK(found);
}

TEST_CASE("derive_tx_attributes omits fee family for coinbase and fee_percent for zero value") {
    RawTransaction coinbase;
    coinbase.txid = "cb";
    coinbase.timestamp = 10;
    coinbase.total_output_value = 12.5;
    coinbase.size = 250;
    coinbase.is_coinbase = true;
    for (const auto& r : derive_tx_attributes(coinbase)) {
        CHECK(r.key != AttributeKey::tx_fees_paid);
        CHECK(r.key != AttributeKey::tx_fee_rate);
        CHECK(r.key != AttributeKey::tx_fee_percent);
    }

    RawTransaction zero = bnstest::simple_tx(10, 0.0, 250, 0.0001);
    bool fee_percent_seen = false, fees_paid_seen = false;
    for (const auto& r : derive_tx_attributes(zero)) {
        fee_percent_seen |= r.key == AttributeKey::tx_fee_percent;
        fees_paid_seen |= r.key == AttributeKey::tx_fees_paid;
    }
    CHECK_FALSE(fee_percent_seen);
    CHECK(fees_paid_seen);
}

TEST_CASE("query_window half-open semantics and coverage") {
    auto store = bnstest::make_store(0, 100, [](StoreBuilder& b) {
        for (std::int64_t t : {10, 20, 30}) {
            b.add_chart({ChartSeries::mempool_count, t, double(t)});
        }
    });
    auto got = store.query_window(AttributeKey::mempool_count, 10, 30);
    REQUIRE(got.size() == 2);
    CHECK(got[0] == 10.0);
    CHECK(got[1] == 20.0);

    CHECK(store.query_window(AttributeKey::mempool_count, 15, 16).empty());
    CHECK_THROWS_AS(store.query_window(AttributeKey::mempool_count, 90, 102), CoverageError);
    CHECK_THROWS_AS(store.query_window(AttributeKey::mempool_count, -5, 10), CoverageError);
}

TEST_CASE("query_window partition property") {
    std::mt19937_64 rng(11);
    auto store = bnstest::make_store(0, 10000, [&](StoreBuilder& b) {
        std::int64_t t = 1;
        while (t < 10000) {
            b.add_chart({ChartSeries::mempool_size_bytes, t, static_cast<double>(rng() % 1000)});
            t += 1 + static_cast<std::int64_t>(rng() % 40);
        }
    });
    for (int trial = 0; trial < 50; ++trial) {
        std::int64_t a = static_cast<std::int64_t>(rng() % 5000);
        std::int64_t c = a + 1 + static_cast<std::int64_t>(rng() % 4000);
        std::int64_t b_split = a + 1 + static_cast<std::int64_t>(rng() % (c - a));
        auto whole = store.query_window(AttributeKey::mempool_size, a, c);
        auto left = store.query_window(AttributeKey::mempool_size, a, b_split);
        auto right = store.query_window(AttributeKey::mempool_size, b_split, c);
        REQUIRE(whole.size() == left.size() + right.size());
        for (std::size_t i = 0; i < left.size(); ++i) CHECK(whole[i] == left[i]);
        for (std::size_t i = 0; i < right.size(); ++i) CHECK(whole[left.size() + i] == right[i]);
    }
}

TEST_CASE("store queries are pure") {
    auto store = bnstest::make_store(0, 1000, [](StoreBuilder& b) {
        for (std::int64_t t = 0; t < 1000; t += 7) {
            b.add_chart({ChartSeries::mempool_count, t, double(t % 13)});
        }
    });
    auto a = store.query_window(AttributeKey::mempool_count, 100, 900);
    auto b = store.query_window(AttributeKey::mempool_count, 100, 900);
    REQUIRE(a.size() == b.size());
    CHECK(a.data() == b.data());  // same immutable storage
}

TEST_CASE("store save/load round-trip") {
    SynthParams params;
    params.seed = 42;
    params.duration_days = 0.5;
    params.tx_rate = 0.3;
    auto batch = generate(params);
    AttributeStore store = store_from_batch(batch);

    auto dir = std::filesystem::temp_directory_path() / "bns_store_test.bns-store";
    std::filesystem::remove_all(dir);
    store.save(dir.string());

    std::ifstream bin(dir / "tx_value.bin", std::ios::binary);
    char magic[4];
    bin.read(magic, 4);
    CHECK(std::string(magic, 4) == "BNS1");

    AttributeStore loaded = AttributeStore::load(dir.string());
    CHECK(loaded.coverage_begin() == store.coverage_begin());
    CHECK(loaded.coverage_end() == store.coverage_end());
    CHECK(loaded.record_count() == store.record_count());
    for (int k = 0; k < kAttributeKeyCount; ++k) {
        auto key = static_cast<AttributeKey>(k);
        const auto& a = store.column(key);
        const auto& b = loaded.column(key);
        REQUIRE(a.ts.size() == b.ts.size());
        CHECK(a.ts == b.ts);
        CHECK(a.val == b.val);
        CHECK(a.shift == b.shift);
    }
    CHECK(store.address_dictionary() == loaded.address_dictionary());
    std::filesystem::remove_all(dir);
}

TEST_CASE("round-trip: parse(replay(batch)) reproduces records") {
    SynthParams params;
    params.seed = 5;
    params.duration_days = 0.25;
    params.tx_rate = 0.4;
    auto batch = generate(params);

    auto dir = std::filesystem::temp_directory_path() / "bns_replay_test";
    std::filesystem::remove_all(dir);
    replay(batch, dir.string());

    std::ifstream blocks(dir / "blocks.ndjson");
    auto parsed = parse_block_records(blocks);
    REQUIRE(parsed.issues.empty());
    REQUIRE(parsed.blocks.size() == batch.blocks.size());
    REQUIRE(parsed.transactions.size() == batch.transactions.size());
    for (std::size_t i = 0; i < parsed.blocks.size(); ++i) {
        CHECK(parsed.blocks[i].height == batch.blocks[i].height);
        CHECK(parsed.blocks[i].timestamp == batch.blocks[i].timestamp);
        CHECK(parsed.blocks[i].size_mb == batch.blocks[i].size_mb);
        CHECK(parsed.blocks[i].tx_count == batch.blocks[i].tx_count);
    }
    for (std::size_t i = 0; i < parsed.transactions.size(); ++i) {
        const auto& a = parsed.transactions[i];
        const auto& b = batch.transactions[i];
        CHECK(a.txid == b.txid);
        CHECK(a.timestamp == b.timestamp);
        CHECK(a.total_output_value == b.total_output_value);
        CHECK(a.size == b.size);
        CHECK(a.fee.has_value() == b.fee.has_value());
        if (a.fee && b.fee) CHECK(*a.fee == *b.fee);
        CHECK(a.is_coinbase == b.is_coinbase);
        CHECK(a.addresses == b.addresses);
    }
    for (ChartSeries series : kAllChartSeries) {
        std::ifstream csv(dir / (std::string(to_string(series)) + ".csv"));
        auto samples = parse_chart_series(csv, series);
        std::size_t want = 0;
        for (const auto& s : batch.charts) {
            if (s.series != series) continue;
            REQUIRE(want < samples.size());
            CHECK(samples[want].timestamp == s.timestamp);
            CHECK(samples[want].value == s.value);
            ++want;
        }
        CHECK(samples.size() == want);
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("DirectoryFetcher filters by height and time") {
    SynthParams params;
    params.seed = 9;
    params.duration_days = 0.2;
    params.tx_rate = 0.3;
    auto batch = generate(params);
    auto dir = std::filesystem::temp_directory_path() / "bns_fetch_test";
    std::filesystem::remove_all(dir);
    replay(batch, dir.string());

    DirectoryFetcher fetcher(dir.string());
    std::int64_t h0 = batch.blocks.front().height;
    auto some = fetcher.fetch_blocks(h0, h0 + 3);
    CHECK(some.blocks.size() == std::min<std::size_t>(3, batch.blocks.size()));
    for (const auto& tx : some.transactions) {
        CHECK(*tx.block_height >= h0);
        CHECK(*tx.block_height < h0 + 3);
    }
    auto chart = fetcher.fetch_chart(ChartSeries::mempool_count, params.start_time,
                                     params.start_time + 3600);
    CHECK(chart.size() == 60);  // samples at minutes 0..59
    std::filesystem::remove_all(dir);
}
