#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace bns {

// Compensated (Neumaier) accumulator. Summation order is part of every
// canonical result in this codebase, so all window aggregation goes through
// this type with a documented ordering.
class NeumaierSum {
public:
    void add(double x) {
        double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

inline double neumaier_total(std::span<const double> xs) {
    NeumaierSum s;
    for (double x : xs) s.add(x);
    return s.value();
}

// Shared interpolation rule for order statistics: rank r = q*(n-1), linear
// interpolation between the floor and ceil order statistics. Both the sorted
// path and the sliding (Fenwick) path feed exact multiset elements through
// this single formula so results agree bitwise.
inline double interpolate_rank(double lo_value, double hi_value, double frac) {
    if (frac == 0.0) return lo_value;
    return lo_value + frac * (hi_value - lo_value);
}

struct RankSplit {
    std::size_t lo;
    std::size_t hi;
    double frac;
};

inline RankSplit split_rank(double q, std::size_t n) {
    double r = q * static_cast<double>(n - 1);
    auto lo = static_cast<std::size_t>(r);
    if (lo >= n - 1) return {n - 1, n - 1, 0.0};
    return {lo, lo + 1, r - static_cast<double>(lo)};
}

// Selects the values at each requested rank (0-based, ascending, unique) by
// recursive partitioning; `data` is permuted. O(n log k) versus a full sort.
void multi_select(std::span<double> data, std::span<const std::size_t> ranks, std::span<double> out);

// Natural cubic spline through (x, y) points with strictly increasing x.
// Evaluation outside [x.front(), x.back()] clamps to the boundary cubic.
class CubicSpline {
public:
    CubicSpline(std::vector<double> x, std::vector<double> y);
    double operator()(double at) const;
    std::size_t size() const { return x_.size(); }

private:
    std::vector<double> x_, y_, m_;  // m_ = second derivatives
};

}  // namespace bns
