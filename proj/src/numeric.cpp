#include "bns/numeric.hpp"

#include "bns/errors.hpp"

namespace bns {

namespace {

void select_rec(std::span<double> data, std::size_t base, std::span<const std::size_t> ranks,
                std::span<double> out) {
    if (ranks.empty() || data.empty()) return;
    std::size_t mid = ranks.size() / 2;
    std::size_t k = ranks[mid] - base;
    auto nth = data.begin() + static_cast<std::ptrdiff_t>(k);
    std::nth_element(data.begin(), nth, data.end());
    out[mid] = *nth;
    select_rec(data.subspan(0, k), base, ranks.subspan(0, mid), out.subspan(0, mid));
    select_rec(data.subspan(k + 1), base + k + 1, ranks.subspan(mid + 1), out.subspan(mid + 1));
}

}  // namespace

void multi_select(std::span<double> data, std::span<const std::size_t> ranks, std::span<double> out) {
    if (ranks.size() != out.size()) throw DimensionMismatch("multi_select: ranks/out size mismatch");
    select_rec(data, 0, ranks, out);
}

CubicSpline::CubicSpline(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)) {
    std::size_t n = x_.size();
    if (n != y_.size() || n < 2) throw InvalidConfig("spline needs >= 2 points with matching sizes");
    m_.assign(n, 0.0);
    if (n == 2) return;
    // Tridiagonal solve for natural boundary conditions (m_0 = m_{n-1} = 0).
    std::vector<double> c(n, 0.0), d(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        double h0 = x_[i] - x_[i - 1];
        double h1 = x_[i + 1] - x_[i];
        double diag = 2.0 * (h0 + h1) - h0 * c[i - 1];
        c[i] = h1 / diag;
        double rhs = 6.0 * ((y_[i + 1] - y_[i]) / h1 - (y_[i] - y_[i - 1]) / h0) - h0 * d[i - 1];
        d[i] = rhs / diag;
    }
    for (std::size_t i = n - 2; i >= 1; --i) {
        m_[i] = d[i] - c[i] * m_[i + 1];
    }
}

double CubicSpline::operator()(double at) const {
    std::size_t n = x_.size();
    std::size_t hi = static_cast<std::size_t>(std::upper_bound(x_.begin(), x_.end(), at) - x_.begin());
    hi = std::clamp<std::size_t>(hi, 1, n - 1);
    std::size_t lo = hi - 1;
    double h = x_[hi] - x_[lo];
    double a = (x_[hi] - at) / h;
    double b = (at - x_[lo]) / h;
    return a * y_[lo] + b * y_[hi] +
           ((a * a * a - a) * m_[lo] + (b * b * b - b) * m_[hi]) * (h * h) / 6.0;
}

}  // namespace bns
