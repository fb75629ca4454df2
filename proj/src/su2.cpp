#include "swspin/su2.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace swspin {

namespace {

constexpr int kDefaultFactorialBound = 1024;

const LogFactorialTable& shared_table() {
    static const LogFactorialTable table(kDefaultFactorialBound);
    return table;
}

bool valid_pair(int tj, int tm) { return tj >= 0 && std::abs(tm) <= tj && (tj - tm) % 2 == 0; }

}  // namespace

LogFactorialTable::LogFactorialTable(int bound) : values_(static_cast<std::size_t>(std::max(bound, 1)) + 1) {
    values_[0] = 0.0;
    for (std::size_t k = 1; k < values_.size(); ++k) values_[k] = values_[k - 1] + std::log(static_cast<double>(k));
}

double LogFactorialTable::operator()(int n) const {
    if (n < 0) throw DomainError("log_factorial: negative argument " + std::to_string(n));
    if (n <= bound()) return values_[static_cast<std::size_t>(n)];
    return std::lgamma(static_cast<double>(n) + 1.0);
}

double log_factorial(int n) { return shared_table()(n); }

double clebsch_gordan(int tj1, int tm1, int tj2, int tm2, int tJ, int tM) {
    if (!valid_pair(tj1, tm1) || !valid_pair(tj2, tm2) || !valid_pair(tJ, tM))
        throw DomainError("clebsch_gordan: inconsistent (j, m) pair");
    if (tM != tm1 + tm2) return 0.0;
    if (tJ < std::abs(tj1 - tj2) || tJ > tj1 + tj2) return 0.0;
    if ((tj1 + tj2 + tJ) % 2 != 0) throw DomainError("clebsch_gordan: j1 + j2 + J must be an integer");

    const auto& lf = shared_table();
    const int a = (tJ + tj1 - tj2) / 2;
    const int b = (tJ - tj1 + tj2) / 2;
    const int c = (tj1 + tj2 - tJ) / 2;
    const int d = (tj1 + tj2 + tJ) / 2 + 1;

    const double log_prefactor =
        0.5 * (std::log(tJ + 1.0) + lf(a) + lf(b) + lf(c) - lf(d) + lf((tJ + tM) / 2) + lf((tJ - tM) / 2) +
               lf((tj1 - tm1) / 2) + lf((tj1 + tm1) / 2) + lf((tj2 - tm2) / 2) + lf((tj2 + tm2) / 2));

    const int e1 = (tj1 - tm1) / 2;
    const int e2 = (tj2 + tm2) / 2;
    const int e3 = (tJ - tj2 + tm1) / 2;
    const int e4 = (tJ - tj1 - tm2) / 2;
    const int k_min = std::max({0, -e3, -e4});
    const int k_max = std::min({c, e1, e2});

    double sum = 0.0;
    for (int k = k_min; k <= k_max; ++k) {
        const double log_term =
            log_prefactor - (lf(k) + lf(c - k) + lf(e1 - k) + lf(e2 - k) + lf(e3 + k) + lf(e4 + k));
        const double term = std::exp(log_term);
        sum += (k % 2 == 0) ? term : -term;
    }
    return sum;
}

SpinMatrices spin_matrices(const SpinContext& ctx) {
    const int n = ctx.hilbert_dim();
    const double s = ctx.spin();
    SpinMatrices out;
    out.s3 = CMatrix::Zero(n, n);
    out.s_plus = CMatrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        const double m = s - i;
        out.s3(i, i) = m;
        // S+ |m> = sqrt(S(S+1) - m(m+1)) |m+1>, and m+1 sits at index i-1.
        if (i > 0) out.s_plus(i - 1, i) = std::sqrt(s * (s + 1.0) - m * (m + 1.0));
    }
    out.s_minus = out.s_plus.adjoint();
    out.s1 = 0.5 * (out.s_plus + out.s_minus);
    out.s2 = (out.s_plus - out.s_minus) / (2.0 * kI);
    return out;
}

CMatrix tensor_operator(const SpinContext& ctx, int l, int m) {
    if (l < 0 || l > ctx.twice_s()) throw DomainError("tensor_operator: l must satisfy 0 <= l <= 2S");
    if (std::abs(m) > l) throw DomainError("tensor_operator: |m| > l");
    const int n = ctx.hilbert_dim();
    const int ts = ctx.twice_s();
    const double norm = std::sqrt((2.0 * l + 1.0) / n);
    CMatrix t = CMatrix::Zero(n, n);
    for (int col = 0; col < n; ++col) {
        const int row = col - m;
        if (row < 0 || row >= n) continue;
        const int tm_in = ts - 2 * col;
        const int tm_out = ts - 2 * row;
        t(row, col) = norm * clebsch_gordan(ts, tm_in, 2 * l, 2 * m, ts, tm_out);
    }
    return t;
}

CMatrix rotation_z(const SpinContext& ctx, double angle) {
    const int n = ctx.hilbert_dim();
    CMatrix u = CMatrix::Zero(n, n);
    for (int i = 0; i < n; ++i) u(i, i) = std::exp(-kI * angle * (ctx.spin() - i));
    return u;
}

TensorBasis::TensorBasis(const SpinContext& ctx) : ctx_(ctx) {
    const int n = ctx.hilbert_dim();
    const int ts = ctx.twice_s();
    entries_.assign(static_cast<std::size_t>(ctx.symbol_dim()) * n, 0.0);
    for (int l = 0; l <= ts; ++l) {
        const double norm = std::sqrt((2.0 * l + 1.0) / n);
        for (int m = -l; m <= l; ++m) {
            const std::size_t base = static_cast<std::size_t>(l * l + l + m) * n;
            for (int col = 0; col < n; ++col) {
                const int row = col - m;
                if (row < 0 || row >= n) continue;
                entries_[base + col] = norm * clebsch_gordan(ts, ts - 2 * col, 2 * l, 2 * m, ts, ts - 2 * row);
            }
        }
    }
}

double TensorBasis::entry(int l, int m, int col) const {
    return entries_[static_cast<std::size_t>(l * l + l + m) * ctx_.hilbert_dim() + col];
}

CVector TensorBasis::expand(const CMatrix& a) const {
    const int n = ctx_.hilbert_dim();
    if (a.rows() != n || a.cols() != n) throw DomainError("TensorBasis::expand: dimension mismatch");
    CVector out(ctx_.symbol_dim());
    for (int l = 0; l <= ctx_.twice_s(); ++l) {
        for (int m = -l; m <= l; ++m) {
            Complex acc = 0.0;
            for (int col = std::max(0, m); col < std::min(n, n + m); ++col) acc += entry(l, m, col) * a(col - m, col);
            out(l * l + l + m) = acc;
        }
    }
    return out;
}

CMatrix TensorBasis::resum(const CVector& a) const {
    const int n = ctx_.hilbert_dim();
    CMatrix out = CMatrix::Zero(n, n);
    const int band = static_cast<int>(std::lround(std::sqrt(static_cast<double>(a.size())))) - 1;
    for (int l = 0; l <= std::min(band, ctx_.twice_s()); ++l) {
        for (int m = -l; m <= l; ++m) {
            const Complex c = a(l * l + l + m);
            if (c == Complex(0.0)) continue;
            for (int col = std::max(0, m); col < std::min(n, n + m); ++col) out(col - m, col) += c * entry(l, m, col);
        }
    }
    return out;
}

}  // namespace swspin
