#pragma once

#include "swspin/sphere.hpp"
#include "swspin/su2.hpp"

namespace swspin {

/// The stretched-projection Clebsch-Gordan factor <S,S; l,0 | S,S> weighting
/// shell l of the SW kernel.
double cg_weight(const SpinContext& ctx, int l);

/// ln of cg_weight; stays finite for large S.
double log_cg_weight(const SpinContext& ctx, int l);

/// Per-shell factor relating tensor-operator and spherical-harmonic
/// coefficients: c_lm = symbol_scale(l) * a_lm.
double symbol_scale(const SpinContext& ctx, Ordering sigma, int l);

/// Operator <-> symbol maps for one spin. The SW map is diagonal in the
/// (T_lm, Y_lm) pair, so both directions are a tensor expansion followed by a
/// per-shell rescaling.
class SwTransform {
public:
    explicit SwTransform(const SpinContext& ctx);

    const SpinContext& context() const { return basis_.context(); }
    const TensorBasis& basis() const { return basis_; }

    SymbolCoefficients to_symbol(const CMatrix& a, Ordering sigma) const;
    CMatrix to_operator(const SymbolCoefficients& c, Ordering sigma) const;

    /// Matrix of A -> W_A on vec(A) (column-major), size (2S+1)^2 square.
    CMatrix symbol_map_matrix(Ordering sigma) const;

private:
    TensorBasis basis_;
};

SymbolCoefficients operator_to_symbol(const CMatrix& a, Ordering sigma);
CMatrix symbol_to_operator(const SymbolCoefficients& c, Ordering sigma, const SpinContext& ctx);

/// Converts a symbol between orderings: W^(to) from W^(from) of the same operator.
SymbolCoefficients change_ordering(const SymbolCoefficients& c, const SpinContext& ctx, Ordering from, Ordering to);

/// The SW kernel Delta^(sigma)(theta, phi).
CMatrix kernel_eval(const SpinContext& ctx, Ordering sigma, double theta, double phi);

/// <A> = integral of W_A^(sigma) W_rho^(-sigma) dmu, evaluated on coefficients.
Complex expectation(const SymbolCoefficients& symbol_a, const SymbolCoefficients& symbol_rho, const SpinContext& ctx);

/// The invariant measure constant (2S+1)/(4 pi).
inline double measure_constant(const SpinContext& ctx) { return ctx.hilbert_dim() / (4.0 * kPi); }

}  // namespace swspin
