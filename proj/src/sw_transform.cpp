#include "swspin/sw_transform.hpp"

#include <cmath>

namespace swspin {

namespace {

void check_shell(const SpinContext& ctx, int l) {
    if (l < 0 || l > ctx.twice_s()) throw DomainError("cg_weight: l must satisfy 0 <= l <= 2S");
}

}  // namespace

double log_cg_weight(const SpinContext& ctx, int l) {
    check_shell(ctx, l);
    // Stretched coupling <S,S; l,0 | S,S>: the Racah sum has a single term,
    // sqrt((2S+1) (2S)! (2S)! / ((2S+l+1)! (2S-l)!)).
    const int ts = ctx.twice_s();
    return 0.5 * (std::log(ts + 1.0) + 2.0 * log_factorial(ts) - log_factorial(ts + l + 1) - log_factorial(ts - l));
}

double cg_weight(const SpinContext& ctx, int l) { return std::exp(log_cg_weight(ctx, l)); }

double symbol_scale(const SpinContext& ctx, Ordering sigma, int l) {
    return std::sqrt(4.0 * kPi / ctx.hilbert_dim()) * std::exp(-sigma.value() * log_cg_weight(ctx, l));
}

SwTransform::SwTransform(const SpinContext& ctx) : basis_(ctx) {}

SymbolCoefficients SwTransform::to_symbol(const CMatrix& a, Ordering sigma) const {
    const SpinContext& ctx = context();
    CVector c = basis_.expand(a);
    for (int l = 0; l <= ctx.twice_s(); ++l) {
        const double s = symbol_scale(ctx, sigma, l);
        c.segment(l * l, 2 * l + 1) *= s;
    }
    return {ctx.band_limit(), std::move(c)};
}

CMatrix SwTransform::to_operator(const SymbolCoefficients& c, Ordering sigma) const {
    const SpinContext& ctx = context();
    if (c.band_limit() > ctx.band_limit())
        throw DomainError("symbol_to_operator: band limit exceeds 2S, no Hilbert-space preimage");
    CVector a = c.coefficients();
    for (int l = 0; l <= c.band_limit(); ++l) a.segment(l * l, 2 * l + 1) /= symbol_scale(ctx, sigma, l);
    return basis_.resum(a);
}

CMatrix SwTransform::symbol_map_matrix(Ordering sigma) const {
    const int n = context().hilbert_dim();
    const int d = n * n;
    CMatrix out(d, d);
    for (int col = 0; col < n; ++col)
        for (int row = 0; row < n; ++row) {
            CMatrix e = CMatrix::Zero(n, n);
            e(row, col) = 1.0;
            out.col(col * n + row) = to_symbol(e, sigma).coefficients();
        }
    return out;
}

SymbolCoefficients operator_to_symbol(const CMatrix& a, Ordering sigma) {
    if (a.rows() != a.cols() || a.rows() < 2) throw DomainError("operator_to_symbol: operator must be square with dim >= 2");
    return SwTransform(SpinContext(static_cast<int>(a.rows()) - 1)).to_symbol(a, sigma);
}

CMatrix symbol_to_operator(const SymbolCoefficients& c, Ordering sigma, const SpinContext& ctx) {
    return SwTransform(ctx).to_operator(c, sigma);
}

SymbolCoefficients change_ordering(const SymbolCoefficients& c, const SpinContext& ctx, Ordering from, Ordering to) {
    if (c.band_limit() > ctx.band_limit()) throw DomainError("change_ordering: band limit exceeds 2S");
    SymbolCoefficients out = c;
    for (int l = 0; l <= c.band_limit(); ++l)
        out.coefficients().segment(l * l, 2 * l + 1) *= std::exp((from.value() - to.value()) * log_cg_weight(ctx, l));
    return out;
}

CMatrix kernel_eval(const SpinContext& ctx, Ordering sigma, double theta, double phi) {
    const int band = ctx.band_limit();
    const RVector p = normalized_legendre(band, theta);
    // Delta = sum_lm scale(l) T_lm conj(Y_lm); assemble the conj(Y) weights
    // as a coefficient vector and resum over the tensor basis.
    CVector w(coeff_count(band));
    for (int l = 0; l <= band; ++l) {
        const double s = symbol_scale(ctx, sigma, l);
        for (int m = -l; m <= l; ++m) {
            const int am = std::abs(m);
            Complex y = p(lm_index(l, am)) * std::exp(kI * (am * phi));
            if (m < 0) y = ((am % 2 == 0) ? 1.0 : -1.0) * std::conj(y);
            w(lm_index(l, m)) = s * std::conj(y);
        }
    }
    return TensorBasis(ctx).resum(w);
}

Complex expectation(const SymbolCoefficients& symbol_a, const SymbolCoefficients& symbol_rho, const SpinContext& ctx) {
    if (symbol_a.band_limit() > ctx.band_limit() || symbol_rho.band_limit() > ctx.band_limit())
        throw DomainError("expectation: symbol band limit exceeds 2S of the context");
    const int band = std::min(symbol_a.band_limit(), symbol_rho.band_limit());
    Complex acc = 0.0;
    for (int l = 0; l <= band; ++l)
        for (int m = -l; m <= l; ++m) acc += ((m % 2 == 0) ? 1.0 : -1.0) * symbol_a(l, m) * symbol_rho(l, -m);
    return measure_constant(ctx) * acc;
}

}  // namespace swspin
