#include "bns/rolling.hpp"

#include <algorithm>
#include <cstring>

#include "bns/parallel.hpp"
#include "bns/time_util.hpp"

namespace bns {

namespace {

// Fenwick tree over a dense value universe; supports count updates and
// k-th order statistic queries.
class Fenwick {
public:
    explicit Fenwick(std::size_t n) : tree_(n + 1, 0), log2_(0) {
        while ((std::size_t{1} << (log2_ + 1)) <= n) ++log2_;
    }
    void add(std::size_t i, int delta) {
        for (std::size_t j = i + 1; j < tree_.size(); j += j & (~j + 1)) {
            tree_[j] = static_cast<std::uint32_t>(static_cast<std::int64_t>(tree_[j]) + delta);
        }
    }
    // Index of the (k+1)-th smallest element (0-based k); requires k < total.
    std::size_t kth(std::size_t k) const {
        std::size_t pos = 0;
        std::uint64_t remaining = k + 1;
        for (std::size_t step = std::size_t{1} << log2_; step > 0; step >>= 1) {
            std::size_t next = pos + step;
            if (next < tree_.size() && tree_[next] < remaining) {
                remaining -= tree_[next];
                pos = next;
            }
        }
        return pos;  // 0-based universe index
    }

private:
    std::vector<std::uint32_t> tree_;
    std::size_t log2_;
};

std::pair<std::size_t, std::size_t> range_of(const AttributeStore::Column& col, std::int64_t start,
                                             std::int64_t end) {
    auto lo = std::lower_bound(col.ts.begin(), col.ts.end(), start);
    auto hi = std::lower_bound(lo, col.ts.end(), end);
    return {static_cast<std::size_t>(lo - col.ts.begin()), static_cast<std::size_t>(hi - col.ts.begin())};
}

std::int64_t floor_hour(std::int64_t t) {
    return t - ((t % kSecondsPerHour) + kSecondsPerHour) % kSecondsPerHour;
}

// Precomputed hour-cell aggregates covering the grid span of one column.
template <typename Agg, typename AccumFn>
struct CellCache {
    std::int64_t cell0 = 0;
    std::vector<std::size_t> offsets;  // n_cells + 1 column indices
    std::vector<Agg> cells;

    void build(const AttributeStore::Column& col, std::int64_t span_start, std::int64_t span_end,
               const AccumFn& accumulate) {
        cell0 = floor_hour(span_start);
        std::size_t n_cells =
            static_cast<std::size_t>((span_end - cell0 + kSecondsPerHour - 1) / kSecondsPerHour);
        offsets.resize(n_cells + 1);
        auto [span_lo, span_hi] = range_of(col, cell0, span_end);
        std::size_t cursor = span_lo;
        for (std::size_t c = 0; c < n_cells; ++c) {
            offsets[c] = cursor;
            std::int64_t cell_end = cell0 + static_cast<std::int64_t>(c + 1) * kSecondsPerHour;
            while (cursor < span_hi && col.ts[cursor] < cell_end) ++cursor;
        }
        offsets[n_cells] = cursor;
        cells.resize(n_cells);
        parallel_stripes(n_cells, [&](std::size_t lo, std::size_t hi) {
            for (std::size_t c = lo; c < hi; ++c) {
                cells[c] = accumulate(col, offsets[c], offsets[c + 1]);
            }
        });
    }

    // Combines the window's hour pieces in time order; full cells from the
    // cache, partial edge pieces re-accumulated over their index subrange.
    template <typename Combine>
    void combine_window(const AttributeStore::Column& col, std::int64_t start, std::int64_t end,
                        const AccumFn& accumulate, Combine&& combine) const {
        std::int64_t first_cell = (start - cell0) / kSecondsPerHour;
        std::int64_t cell = cell0 + first_cell * kSecondsPerHour;
        std::size_t ci = static_cast<std::size_t>(first_cell);
        while (cell < end) {
            std::int64_t cell_end = cell + kSecondsPerHour;
            std::int64_t piece_start = std::max(start, cell);
            std::int64_t piece_end = std::min(end, cell_end);
            if (piece_start == cell && piece_end == cell_end) {
                combine(cells[ci]);
            } else {
                std::size_t lo = offsets[ci];
                std::size_t hi = offsets[ci + 1];
                auto first = col.ts.begin() + static_cast<std::ptrdiff_t>(lo);
                auto last = col.ts.begin() + static_cast<std::ptrdiff_t>(hi);
                auto plo = piece_start == cell ? first : std::lower_bound(first, last, piece_start);
                auto phi = piece_end == cell_end ? last : std::lower_bound(plo, last, piece_end);
                combine(accumulate(col, static_cast<std::size_t>(plo - col.ts.begin()),
                                   static_cast<std::size_t>(phi - col.ts.begin())));
            }
            cell = cell_end;
            ++ci;
        }
    }
};

struct StatColumn {
    StatKind stat;
    std::size_t col;
};

struct MomentTask {
    AttributeKey key;
    std::vector<StatColumn> stats;
    std::size_t pct_col = SIZE_MAX;  // write 100*mean here (nonstandard flag)
};

struct QuantTask {
    AttributeKey key;
    std::vector<StatColumn> stats;
};

struct BinTask {
    std::vector<std::pair<std::size_t, std::size_t>> cols;  // (bin index, matrix column)
};

class Matrix {
public:
    Matrix(std::size_t rows, std::size_t cols) : cols_(cols), data_(rows * cols, 0.0) {}
    double* row(std::size_t r) { return data_.data() + r * cols_; }
    std::vector<double> take_row(std::size_t r) {
        return {row(r), row(r) + cols_};
    }

private:
    std::size_t cols_;
    std::vector<double> data_;
};

void run_moment_task(const AttributeStore& store, const MomentTask& task, const WindowGrid& grid,
                     Matrix& matrix) {
    const auto& col = store.column(task.key);
    using MomentAccum = MomentSums (*)(const AttributeStore::Column&, std::size_t, std::size_t);
    MomentAccum accum = &accumulate_piece;
    CellCache<MomentSums, MomentAccum> cache;
    cache.build(col, grid.first_start(), grid.last_end(), accum);
    parallel_stripes(grid.count, [&](std::size_t wlo, std::size_t whi) {
        for (std::size_t w = wlo; w < whi; ++w) {
            WindowSpec win = grid.window(w);
            WindowMomentCombiner combiner;
            cache.combine_window(col, win.start, win.end, accum,
                                 [&](const MomentSums& piece) { combiner.add(piece); });
            MomentStats m = finalize_moments(combiner.finalize(), col.shift);
            double* row = matrix.row(w);
            for (const auto& sc : task.stats) row[sc.col] = stat_from(m, sc.stat);
            if (task.pct_col != SIZE_MAX) row[task.pct_col] = m.n == 0 ? 0.0 : 100.0 * m.mean;
        }
    });
}

void run_bin_task(const AttributeStore& store, const BinTask& task, const WindowGrid& grid,
                  const FeatureOptions& opts, Matrix& matrix) {
    const auto& col = store.column(AttributeKey::tx_value);
    auto accum = [&opts](const AttributeStore::Column& c, std::size_t lo, std::size_t hi) {
        return accumulate_bins(c, lo, hi, opts);
    };
    CellCache<BinCounts, decltype(accum)> cache;
    cache.build(col, grid.first_start(), grid.last_end(), accum);
    parallel_stripes(grid.count, [&](std::size_t wlo, std::size_t whi) {
        for (std::size_t w = wlo; w < whi; ++w) {
            WindowSpec win = grid.window(w);
            BinCounts total;
            cache.combine_window(col, win.start, win.end, accum, [&](const BinCounts& piece) {
                total.total += piece.total;
                for (std::size_t b = 0; b < kValueBinCount; ++b) total.counts[b] += piece.counts[b];
            });
            double* row = matrix.row(w);
            for (const auto& [bin, mcol] : task.cols) {
                row[mcol] = total.total == 0 ? 0.0
                                             : static_cast<double>(total.counts[bin]) /
                                                   static_cast<double>(total.total);
            }
        }
    });
}

void run_quantile_task(const AttributeStore& store, const QuantTask& task, const WindowGrid& grid,
                       Matrix& matrix) {
    const auto& col = store.column(task.key);
    parallel_stripes(grid.count, [&](std::size_t wlo, std::size_t whi) {
        std::int64_t stripe_start = grid.window(wlo).start;
        std::int64_t stripe_end = grid.window(whi - 1).end;
        auto [slice_lo, slice_hi] = range_of(col, stripe_start, stripe_end);

        std::vector<double> universe(col.val.begin() + static_cast<std::ptrdiff_t>(slice_lo),
                                     col.val.begin() + static_cast<std::ptrdiff_t>(slice_hi));
        std::sort(universe.begin(), universe.end());
        universe.erase(std::unique(universe.begin(), universe.end()), universe.end());
        Fenwick counts(universe.size());
        auto universe_index = [&](double v) {
            return static_cast<std::size_t>(
                std::lower_bound(universe.begin(), universe.end(), v) - universe.begin());
        };

        std::size_t a = 0, b = 0;  // current column index range in the tree
        std::size_t n = 0;
        auto add_range = [&](std::size_t lo, std::size_t hi) {
            for (std::size_t i = lo; i < hi; ++i) counts.add(universe_index(col.val[i]), +1);
            n += hi - lo;
        };
        auto remove_range = [&](std::size_t lo, std::size_t hi) {
            for (std::size_t i = lo; i < hi; ++i) counts.add(universe_index(col.val[i]), -1);
            n -= hi - lo;
        };

        for (std::size_t w = wlo; w < whi; ++w) {
            WindowSpec win = grid.window(w);
            auto [na, nb] = range_of(col, win.start, win.end);
            if (w == wlo) {
                a = na;
                b = nb;
                add_range(a, b);
            } else if (na >= b) {
                remove_range(a, b);
                add_range(na, nb);
                a = na;
                b = nb;
            } else {
                remove_range(a, na);
                add_range(b, nb);
                a = na;
                b = nb;
            }
            QuantileValues q =
                quantiles_from_kth(n, [&](std::size_t k) { return universe[counts.kth(k)]; });
            double* row = matrix.row(w);
            for (const auto& sc : task.stats) {
                double v = sc.stat == StatKind::median ? q.median
                           : sc.stat == StatKind::p10  ? q.p10
                           : sc.stat == StatKind::p25  ? q.p25
                           : sc.stat == StatKind::p75  ? q.p75
                                                       : q.p90;
                row[sc.col] = v;
            }
        }
    });
}

void run_distinct_task(const AttributeStore& store, std::size_t matrix_col, const WindowGrid& grid,
                       Matrix& matrix) {
    const auto& col = store.column(AttributeKey::address_event);
    std::size_t dict_size = store.address_dictionary().size();
    parallel_stripes(grid.count, [&](std::size_t wlo, std::size_t whi) {
        std::vector<std::uint32_t> refcount(dict_size, 0);
        std::size_t distinct = 0;
        auto add_range = [&](std::size_t lo, std::size_t hi) {
            for (std::size_t i = lo; i < hi; ++i) {
                auto id = static_cast<std::size_t>(col.val[i]);
                if (refcount[id]++ == 0) ++distinct;
            }
        };
        auto remove_range = [&](std::size_t lo, std::size_t hi) {
            for (std::size_t i = lo; i < hi; ++i) {
                auto id = static_cast<std::size_t>(col.val[i]);
                if (--refcount[id] == 0) --distinct;
            }
        };
        std::size_t a = 0, b = 0;
        for (std::size_t w = wlo; w < whi; ++w) {
            WindowSpec win = grid.window(w);
            auto [na, nb] = range_of(col, win.start, win.end);
            if (w == wlo) {
                add_range(na, nb);
            } else if (na >= b) {
                remove_range(a, b);
                add_range(na, nb);
            } else {
                remove_range(a, na);
                add_range(b, nb);
            }
            a = na;
            b = nb;
            matrix.row(w)[matrix_col] = static_cast<double>(distinct);
        }
    });
}

}  // namespace

std::vector<BNSVector> build_vector_series(const AttributeStore& store, FeatureSetId set,
                                           const WindowGrid& grid, const FeatureOptions& opts) {
    if (grid.count == 0) return {};
    if (grid.step <= 0 || grid.length <= 0) throw InvalidConfig("window grid needs positive step/length");
    store.require_coverage(grid.first_start(), grid.last_end());

    const FeatureLayout& lay = layout(set);
    Matrix matrix(grid.count, lay.size());

    std::array<MomentTask, kAttributeKeyCount> moment_tasks;
    std::array<QuantTask, kAttributeKeyCount> quant_tasks;
    BinTask bin_task;
    std::size_t distinct_col = SIZE_MAX;
    for (int k = 0; k < kAttributeKeyCount; ++k) {
        moment_tasks[k].key = static_cast<AttributeKey>(k);
        quant_tasks[k].key = static_cast<AttributeKey>(k);
    }
    for (std::size_t i = 0; i < lay.size(); ++i) {
        const Feature& f = lay.features[i];
        switch (f.kind) {
            case Feature::Kind::stream_stat: {
                int k = static_cast<int>(f.key);
                if (f.stat == StatKind::median || f.stat >= StatKind::p10) {
                    quant_tasks[k].stats.push_back({f.stat, i});
                } else {
                    moment_tasks[k].stats.push_back({f.stat, i});
                }
                break;
            }
            case Feature::Kind::value_bin:
                bin_task.cols.emplace_back(f.bin, i);
                break;
            case Feature::Kind::pct_nonstandard:
                moment_tasks[static_cast<int>(AttributeKey::nonstandard_flag)].pct_col = i;
                break;
            case Feature::Kind::unique_addresses:
                distinct_col = i;
                break;
        }
    }

    for (const auto& task : moment_tasks) {
        if (!task.stats.empty() || task.pct_col != SIZE_MAX) {
            run_moment_task(store, task, grid, matrix);
        }
    }
    for (const auto& task : quant_tasks) {
        if (!task.stats.empty()) run_quantile_task(store, task, grid, matrix);
    }
    if (!bin_task.cols.empty()) run_bin_task(store, bin_task, grid, opts, matrix);
    if (distinct_col != SIZE_MAX) run_distinct_task(store, distinct_col, grid, matrix);

    std::vector<BNSVector> out(grid.count);
    for (std::size_t w = 0; w < grid.count; ++w) {
        out[w].feature_set = set;
        out[w].window = grid.window(w);
        out[w].values = matrix.take_row(w);
    }
    return out;
}

}  // namespace bns
