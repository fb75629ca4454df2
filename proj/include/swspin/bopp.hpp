#pragma once

#include <array>
#include <string>
#include <vector>

#include "swspin/sphere.hpp"
#include "swspin/sw_transform.hpp"

namespace swspin {

/// F(l)/F(l+1) (direction +1) or F(l)/F(l-1) (direction -1) with
/// F(l) = sqrt((2S+l+1)! (2S-l)!). F(2S)/F(2S+1) is 0.
double f_ratio(const SpinContext& ctx, int l, int direction);

/// Per-shell Bopp coefficient tables f1(l), f2(l), l = 0..2S.
///
/// Built from the ratios F(l)/F(l+-1) only, written as
///   r_+^{1-sigma} (2S+l+2) = (2S-l)^p (2S+l+2)^{1-p}
///   r_-^{1-sigma} (2S+1-l) = (2S+l+1)^p (2S+1-l)^{1-p},   p = (1-sigma)/2,
/// which keeps sigma = +-1 in exact integer arithmetic and the l = 2S shell
/// finite.
class BoppCoefficients {
public:
    BoppCoefficients(const SpinContext& ctx, Ordering sigma);

    const SpinContext& context() const { return ctx_; }
    Ordering ordering() const { return sigma_; }
    double f1(int l) const { return f1_(l); }
    double f2(int l) const { return f2_(l); }
    const RVector& f1_table() const { return f1_; }
    const RVector& f2_table() const { return f2_; }

    /// diag(f(l)) on the coefficient space of the given band limit; shells
    /// beyond 2S are set to zero.
    CMatrix f1_diagonal(int band_limit) const;
    CMatrix f2_diagonal(int band_limit) const;

private:
    SpinContext ctx_;
    Ordering sigma_;
    RVector f1_, f2_;
};

inline BoppCoefficients bopp_coefficients(const SpinContext& ctx, Ordering sigma) { return {ctx, sigma}; }

struct AsymptoticCoefficients {
    double f1, f2;
};

/// Two-term large-S expansion of f1, f2.
AsymptoticCoefficients asymptotic_coefficients(const SpinContext& ctx, Ordering sigma, int l);

/// Bopp operators B_i = M_i f1(Lambda^2) + K_i f2(Lambda^2) + L_i / 2 on the
/// coefficients with l <= band_limit (band_limit <= 2S). At band_limit = 2S
/// they act exactly as left star-multiplication by W_{S_i}; at smaller band
/// limits they are the compression of that action.
struct BoppOperators {
    std::array<PhaseSpaceOperator, 3> b;

    const PhaseSpaceOperator& operator[](int axis) const { return b[static_cast<std::size_t>(axis)]; }
    int band_limit() const { return b[0].band_limit(); }
};

BoppOperators bopp_matrices(const SpinContext& ctx, Ordering sigma);
BoppOperators bopp_matrices(const SpinContext& ctx, Ordering sigma, int band_limit);

/// Phi o (X -> A X) o Phi^{-1}: the exact symbol-space image of Hilbert-space
/// left multiplication.
PhaseSpaceOperator left_mult_superoperator(const CMatrix& a, Ordering sigma);

/// W_A * W_B = W_{AB}, computed through the Hilbert space.
SymbolCoefficients star_product(const SymbolCoefficients& a, const SymbolCoefficients& b, Ordering sigma,
                                const SpinContext& ctx);

/// A polynomial in S1, S2, S3 with explicit operator ordering:
/// sum_k coeff_k * S_{w_k[0]} S_{w_k[1]} ... (axes 0, 1, 2). An empty word is
/// the identity.
class SpinExpression {
public:
    struct Term {
        Complex coeff;
        std::vector<int> word;
    };

    SpinExpression() = default;
    explicit SpinExpression(std::vector<Term> terms);

    static SpinExpression identity(Complex coeff = 1.0);
    static SpinExpression component(int axis, Complex coeff = 1.0);
    /// sum_i v_i S_i
    static SpinExpression linear(const std::array<double, 3>& v);
    /// -sum D_ij S_i S_j - sum B_i S_i
    static SpinExpression quadratic(const std::array<std::array<double, 3>, 3>& d, const std::array<double, 3>& b);

    /// Parses a word such as "S3 S1" or "z x" (whitespace or '*' separated).
    static std::vector<int> parse_word(const std::string& word);

    const std::vector<Term>& terms() const { return terms_; }
    bool empty() const { return terms_.empty(); }
    int degree() const;

    SpinExpression& add(Complex coeff, std::vector<int> word);
    SpinExpression& operator+=(const SpinExpression& o);
    SpinExpression& operator*=(Complex s);

    CMatrix to_operator(const SpinContext& ctx) const;
    bool is_hermitian(const SpinContext& ctx, double tol = 1e-12) const;

private:
    std::vector<Term> terms_;
};

SpinExpression operator+(SpinExpression a, const SpinExpression& b);
SpinExpression operator*(Complex s, SpinExpression a);
/// Concatenates words: the operator product a b.
SpinExpression operator*(const SpinExpression& a, const SpinExpression& b);

/// The expression with each S_i replaced by the Bopp operator B_i, words
/// multiplied in order. Products are formed at a band limit padded by the
/// expression degree (capped at 2S) and then compressed, so the result is
/// exact on l <= band_limit.
PhaseSpaceOperator evaluate_expression(const SpinExpression& expr, const SpinContext& ctx, Ordering sigma,
                                       int band_limit);
PhaseSpaceOperator evaluate_expression(const SpinExpression& expr, const SpinContext& ctx, Ordering sigma);

/// Same substitution with precomputed Bopp operators; no padding.
PhaseSpaceOperator evaluate_expression(const SpinExpression& expr, const BoppOperators& bopp);

/// W_{S3} * Y_lm through the j <= 1 terms of the Klimov-Espinoza
/// differential star product, resummed with the alpha/beta recursions. An
/// independent route to column (l, m) of B_3.
SymbolCoefficients s3_star_ylm(const SpinContext& ctx, Ordering sigma, int l, int m);

}  // namespace swspin
