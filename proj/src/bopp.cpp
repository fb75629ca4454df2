#include "swspin/bopp.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace swspin {

namespace {

// ln F(l), F(l) = sqrt((2S+l+1)! (2S-l)!), for 0 <= l <= 2S.
double log_f(const SpinContext& ctx, int l) {
    const int ts = ctx.twice_s();
    return 0.5 * (log_factorial(ts + l + 1) + log_factorial(ts - l));
}

CMatrix shell_diagonal(const RVector& table, int band_limit) {
    const int n = coeff_count(band_limit);
    CMatrix d = CMatrix::Zero(n, n);
    for (int l = 0; l <= band_limit && l < table.size(); ++l)
        for (int m = -l; m <= l; ++m) d(lm_index(l, m), lm_index(l, m)) = table(l);
    return d;
}

// Band limit for forming products of `degree` factors that must be exact on
// l <= band_limit.
int padded_band(const SpinContext& ctx, int band_limit, int degree) {
    return std::min(ctx.band_limit(), band_limit + std::max(degree - 1, 0));
}

}  // namespace

double f_ratio(const SpinContext& ctx, int l, int direction) {
    const int ts = ctx.twice_s();
    if (direction == 1) {
        if (l < 0 || l > ts) throw DomainError("f_ratio: l outside [0, 2S]");
        return std::sqrt(static_cast<double>(ts - l) / (ts + l + 2));
    }
    if (direction == -1) {
        if (l < 1 || l > ts) throw DomainError("f_ratio: l outside [1, 2S] for direction -1");
        return std::sqrt(static_cast<double>(ts + l + 1) / (ts - l + 1));
    }
    throw DomainError("f_ratio: direction must be +1 or -1");
}

BoppCoefficients::BoppCoefficients(const SpinContext& ctx, Ordering sigma)
    : ctx_(ctx), sigma_(sigma), f1_(ctx.twice_s() + 1), f2_(ctx.twice_s() + 1) {
    const double ts = ctx.twice_s();
    const double p = 0.5 * (1.0 - sigma.value());
    for (int l = 0; l <= ctx.twice_s(); ++l) {
        const double up = std::pow(ts - l, p) * std::pow(ts + l + 2.0, 1.0 - p);
        const double down = std::pow(ts + l + 1.0, p) * std::pow(ts + 1.0 - l, 1.0 - p);
        const double denom = 2.0 * (2.0 * l + 1.0);
        f1_(l) = (up * (l + 1.0) + down * l) / denom;
        f2_(l) = (up - down) / denom;
    }
}

CMatrix BoppCoefficients::f1_diagonal(int band_limit) const { return shell_diagonal(f1_, band_limit); }
CMatrix BoppCoefficients::f2_diagonal(int band_limit) const { return shell_diagonal(f2_, band_limit); }

AsymptoticCoefficients asymptotic_coefficients(const SpinContext& ctx, Ordering sigma, int l) {
    const double s = sigma.value();
    const double n = ctx.hilbert_dim();
    const double corr = (s * s - 1.0) / (2.0 * n);
    const double two_f1 = n + s + (static_cast<double>(l) * (l + 1) + 1.0) * corr;
    const double two_f2 = s + corr;
    return {0.5 * two_f1, 0.5 * two_f2};
}

BoppOperators bopp_matrices(const SpinContext& ctx, Ordering sigma) {
    return bopp_matrices(ctx, sigma, ctx.band_limit());
}

BoppOperators bopp_matrices(const SpinContext& ctx, Ordering sigma, int band_limit) {
    if (band_limit < 0 || band_limit > ctx.band_limit()) throw DomainError("bopp_matrices: band limit must be in [0, 2S]");
    const BoppCoefficients coeffs(ctx, sigma);
    const PositionOperators pos = position_operators(band_limit);
    const AngularOperators ang = angular_operators(band_limit);
    const CMatrix f1 = coeffs.f1_diagonal(band_limit);
    const CMatrix f2 = coeffs.f2_diagonal(band_limit);
    BoppOperators out;
    for (int i = 0; i < 3; ++i) {
        const auto k = static_cast<std::size_t>(i);
        CMatrix b = pos.m[k].matrix() * f1 + pos.k[k].matrix() * f2 + 0.5 * ang[i].matrix();
        out.b[k] = {band_limit, std::move(b)};
    }
    return out;
}

PhaseSpaceOperator left_mult_superoperator(const CMatrix& a, Ordering sigma) {
    if (a.rows() != a.cols() || a.rows() < 2) throw DomainError("left_mult_superoperator: operator must be square");
    const SpinContext ctx(static_cast<int>(a.rows()) - 1);
    const SwTransform sw(ctx);
    const int band = ctx.band_limit();
    CMatrix out(ctx.symbol_dim(), ctx.symbol_dim());
    for (int l = 0; l <= band; ++l)
        for (int m = -l; m <= l; ++m) {
            const CMatrix x = sw.to_operator(SymbolCoefficients::unit(band, l, m), sigma);
            out.col(lm_index(l, m)) = sw.to_symbol(a * x, sigma).coefficients();
        }
    return {band, std::move(out)};
}

SymbolCoefficients star_product(const SymbolCoefficients& a, const SymbolCoefficients& b, Ordering sigma,
                                const SpinContext& ctx) {
    const SwTransform sw(ctx);
    return sw.to_symbol(sw.to_operator(a, sigma) * sw.to_operator(b, sigma), sigma);
}

SpinExpression::SpinExpression(std::vector<Term> terms) : terms_(std::move(terms)) {
    for (const Term& t : terms_) {
        if (!std::isfinite(t.coeff.real()) || !std::isfinite(t.coeff.imag()))
            throw DomainError("SpinExpression: non-finite coefficient");
        for (int axis : t.word)
            if (axis < 0 || axis > 2) throw DomainError("SpinExpression: axis must be 0, 1 or 2");
    }
}

SpinExpression SpinExpression::identity(Complex coeff) { return SpinExpression({{coeff, {}}}); }

SpinExpression SpinExpression::component(int axis, Complex coeff) { return SpinExpression({{coeff, {axis}}}); }

SpinExpression SpinExpression::linear(const std::array<double, 3>& v) {
    SpinExpression e;
    for (int i = 0; i < 3; ++i)
        if (v[static_cast<std::size_t>(i)] != 0.0) e.add(v[static_cast<std::size_t>(i)], {i});
    return e;
}

SpinExpression SpinExpression::quadratic(const std::array<std::array<double, 3>, 3>& d, const std::array<double, 3>& b) {
    SpinExpression e;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            const double dij = d[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
            if (dij != 0.0) e.add(-dij, {i, j});
        }
    for (int i = 0; i < 3; ++i)
        if (b[static_cast<std::size_t>(i)] != 0.0) e.add(-b[static_cast<std::size_t>(i)], {i});
    return e;
}

std::vector<int> SpinExpression::parse_word(const std::string& word) {
    std::vector<int> out;
    std::string token;
    auto flush = [&]() {
        if (token.empty()) return;
        std::string t;
        for (char ch : token) t += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
        if (t == "s1" || t == "sx" || t == "x") out.push_back(0);
        else if (t == "s2" || t == "sy" || t == "y") out.push_back(1);
        else if (t == "s3" || t == "sz" || t == "z") out.push_back(2);
        else if (t == "1" || t == "i" || t == "id") {
        } else
            throw DomainError("SpinExpression: unknown factor '" + token + "'");
        token.clear();
    };
    for (char ch : word) {
        if (std::isspace(static_cast<unsigned char>(ch)) || ch == '*') flush();
        else token += ch;
    }
    flush();
    return out;
}

int SpinExpression::degree() const {
    int d = 0;
    for (const Term& t : terms_) d = std::max(d, static_cast<int>(t.word.size()));
    return d;
}

SpinExpression& SpinExpression::add(Complex coeff, std::vector<int> word) {
    SpinExpression single({{coeff, std::move(word)}});
    terms_.push_back(std::move(single.terms_.front()));
    return *this;
}

SpinExpression& SpinExpression::operator+=(const SpinExpression& o) {
    terms_.insert(terms_.end(), o.terms_.begin(), o.terms_.end());
    return *this;
}

SpinExpression& SpinExpression::operator*=(Complex s) {
    for (Term& t : terms_) t.coeff *= s;
    return *this;
}

SpinExpression operator+(SpinExpression a, const SpinExpression& b) { return a += b; }
SpinExpression operator*(Complex s, SpinExpression a) { return a *= s; }

SpinExpression operator*(const SpinExpression& a, const SpinExpression& b) {
    SpinExpression out;
    for (const auto& ta : a.terms())
        for (const auto& tb : b.terms()) {
            std::vector<int> w = ta.word;
            w.insert(w.end(), tb.word.begin(), tb.word.end());
            out.add(ta.coeff * tb.coeff, std::move(w));
        }
    return out;
}

CMatrix SpinExpression::to_operator(const SpinContext& ctx) const {
    const SpinMatrices s = spin_matrices(ctx);
    const int n = ctx.hilbert_dim();
    CMatrix out = CMatrix::Zero(n, n);
    for (const Term& t : terms_) {
        CMatrix prod = CMatrix::Identity(n, n);
        for (int axis : t.word) prod = prod * s[axis];
        out += t.coeff * prod;
    }
    return out;
}

bool SpinExpression::is_hermitian(const SpinContext& ctx, double tol) const {
    const CMatrix a = to_operator(ctx);
    return (a - a.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

PhaseSpaceOperator evaluate_expression(const SpinExpression& expr, const BoppOperators& bopp) {
    const int band = bopp.band_limit();
    const int n = coeff_count(band);
    CMatrix out = CMatrix::Zero(n, n);
    for (const auto& t : expr.terms()) {
        CMatrix prod = CMatrix::Identity(n, n);
        for (int axis : t.word) prod = prod * bopp[axis].matrix();
        out += t.coeff * prod;
    }
    return {band, std::move(out)};
}

PhaseSpaceOperator evaluate_expression(const SpinExpression& expr, const SpinContext& ctx, Ordering sigma, int band_limit) {
    if (band_limit < 0 || band_limit > ctx.band_limit())
        throw DomainError("evaluate_expression: band limit must be in [0, 2S]");
    const int work = padded_band(ctx, band_limit, expr.degree());
    return evaluate_expression(expr, bopp_matrices(ctx, sigma, work)).restricted(band_limit);
}

PhaseSpaceOperator evaluate_expression(const SpinExpression& expr, const SpinContext& ctx, Ordering sigma) {
    return evaluate_expression(expr, ctx, sigma, ctx.band_limit());
}

SymbolCoefficients s3_star_ylm(const SpinContext& ctx, Ordering sigma, int l, int m) {
    const int band = ctx.band_limit();
    if (l < 0 || l > band || std::abs(m) > l) throw DomainError("s3_star_ylm: requires |m| <= l <= 2S");
    const double s = ctx.spin();
    const double sig = sigma.value();
    const int ts = ctx.twice_s();

    // W_{S3} = c cos(theta), c = (S/(S+1))^{-sigma/2} sqrt(S(S+1)).
    const double log_c = -0.5 * sig * std::log(s / (s + 1.0)) + 0.5 * std::log(s * (s + 1.0));
    // N_S = sqrt(2S+1) F(0)^sigma, a_0 = 1/(2S+1)!, a_1 = -1/(2S+2)!.
    const double log_ns = 0.5 * std::log(ts + 1.0) + sig * log_f(ctx, 0);
    const double log_a0 = -log_factorial(ts + 1);
    const double a1_over_a0 = -std::exp(log_factorial(ts + 1) - log_factorial(ts + 2));
    // F~^{1-sigma} acts on the l = 1 factor cos(theta) and on Y_lm.
    const double prefactor = std::exp(log_ns + log_a0 + (1.0 - sig) * log_f(ctx, 1) + log_c);

    // F^{1-sigma}(l) F^{sigma-1}(l') for the shells reached by the product;
    // F(2S+1) is infinite, so that shell vanishes unless sigma = 1, where it
    // lies outside the band anyway.
    auto shell_ratio = [&](int lp) { return std::exp((1.0 - sig) * (log_f(ctx, l) - log_f(ctx, lp))); };

    const AlphaBeta ab = alpha_beta(l, m);
    SymbolCoefficients out(band);
    // j = 0: cos(theta) Y_lm. j = 1: (S^{+(1)} cos) (S^{-(1)} Y_lm) = -sin d_theta Y_lm - m Y_lm.
    if (l + 1 <= band) out(l + 1, m) = prefactor * shell_ratio(l + 1) * (ab.alpha1 - a1_over_a0 * ab.beta1);
    if (l >= 1 && std::abs(m) <= l - 1)
        out(l - 1, m) = prefactor * shell_ratio(l - 1) * (ab.alpha2 - a1_over_a0 * ab.beta2);
    out(l, m) += prefactor * a1_over_a0 * (-static_cast<double>(m));
    return out;
}

}  // namespace swspin
