#pragma once

#include <array>
#include <vector>

#include "swspin/types.hpp"

namespace swspin {

/// ln(n!) for n >= 0. Values up to the table bound are cached; larger n fall
/// back to lgamma.
double log_factorial(int n);

/// Cached table of ln(k!) for k = 0..bound.
class LogFactorialTable {
public:
    explicit LogFactorialTable(int bound);
    double operator()(int n) const;
    int bound() const { return static_cast<int>(values_.size()) - 1; }

private:
    std::vector<double> values_;
};

/// Condon-Shortley Clebsch-Gordan coefficient <j1 m1; j2 m2 | J M>.
/// Every argument is passed doubled (2j, 2m) so half-integers are exact.
double clebsch_gordan(int tj1, int tm1, int tj2, int tm2, int tJ, int tM);

struct SpinMatrices {
    CMatrix s1, s2, s3;
    CMatrix s_plus, s_minus;

    const CMatrix& operator[](int axis) const {
        return axis == 0 ? s1 : (axis == 1 ? s2 : s3);
    }
};

/// Spin-S matrices in the basis m = S, S-1, ..., -S (row/column 0 is m = S).
SpinMatrices spin_matrices(const SpinContext& ctx);

/// Row/column index of magnetic number m (given as 2m) in the standard basis.
inline int basis_index(const SpinContext& ctx, int twice_m) { return (ctx.twice_s() - twice_m) / 2; }

/// Orthonormal irreducible tensor operator T_lm:
/// T_lm = sqrt((2l+1)/(2S+1)) sum <S m'; l m | S m''> |S m''><S m'|.
CMatrix tensor_operator(const SpinContext& ctx, int l, int m);

/// exp(-i angle S3).
CMatrix rotation_z(const SpinContext& ctx, double angle);

/// Precomputed nonzero entries of every T_lm for a fixed spin. T_lm has
/// support only on the diagonal row = col - m (m'' = m' + m), so each
/// operator is stored as that diagonal.
class TensorBasis {
public:
    explicit TensorBasis(const SpinContext& ctx);

    const SpinContext& context() const { return ctx_; }

    /// Entry of T_lm at column index `col` (m' = S - col); row index is col - m.
    double entry(int l, int m, int col) const;

    /// a_lm = Tr(T_lm^dagger A) for all l <= 2S.
    CVector expand(const CMatrix& a) const;
    /// sum_lm a_lm T_lm.
    CMatrix resum(const CVector& a) const;

private:
    SpinContext ctx_;
    std::vector<double> entries_;  // [(l*l + l + m) * dim + col]
};

}  // namespace swspin
