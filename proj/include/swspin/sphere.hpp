#pragma once

#include <array>
#include <iosfwd>
#include <vector>

#include "swspin/types.hpp"

namespace swspin {

/// Flat index of (l, m) in a coefficient vector: l^2 + l + m.
inline int lm_index(int l, int m) { return l * l + l + m; }
/// Number of coefficients with l <= band_limit.
inline int coeff_count(int band_limit) { return (band_limit + 1) * (band_limit + 1); }

/// Spherical-harmonic coefficients c_lm of a function on the unit sphere,
/// W(theta, phi) = sum_lm c_lm Y_lm(theta, phi).
class SymbolCoefficients {
public:
    SymbolCoefficients() = default;
    explicit SymbolCoefficients(int band_limit);
    SymbolCoefficients(int band_limit, CVector coefficients);

    static SymbolCoefficients unit(int band_limit, int l, int m);

    int band_limit() const { return band_limit_; }
    const CVector& coefficients() const { return c_; }
    CVector& coefficients() { return c_; }

    Complex operator()(int l, int m) const { return c_(lm_index(l, m)); }
    Complex& operator()(int l, int m) { return c_(lm_index(l, m)); }

    /// True if the coefficients describe a real-valued function,
    /// c_{l,-m} = (-1)^m conj(c_lm).
    bool is_real(double tol = 1e-12) const;

    /// Zero-padded or truncated copy at another band limit.
    SymbolCoefficients resized(int band_limit) const;

private:
    int band_limit_ = 0;
    CVector c_ = CVector::Zero(1);
};

/// Linear operator on SymbolCoefficients of a fixed band limit.
class PhaseSpaceOperator {
public:
    PhaseSpaceOperator() = default;
    PhaseSpaceOperator(int band_limit, CMatrix matrix);

    static PhaseSpaceOperator identity(int band_limit);
    static PhaseSpaceOperator zero(int band_limit);

    int band_limit() const { return band_limit_; }
    const CMatrix& matrix() const { return m_; }

    SymbolCoefficients operator()(const SymbolCoefficients& c) const;

    /// Compression onto the coefficients with l <= band_limit.
    PhaseSpaceOperator restricted(int band_limit) const;

    PhaseSpaceOperator& operator+=(const PhaseSpaceOperator& o);
    PhaseSpaceOperator& operator-=(const PhaseSpaceOperator& o);
    PhaseSpaceOperator& operator*=(Complex s);

private:
    int band_limit_ = 0;
    CMatrix m_ = CMatrix::Zero(1, 1);
};

PhaseSpaceOperator operator+(PhaseSpaceOperator a, const PhaseSpaceOperator& b);
PhaseSpaceOperator operator-(PhaseSpaceOperator a, const PhaseSpaceOperator& b);
PhaseSpaceOperator operator*(const PhaseSpaceOperator& a, const PhaseSpaceOperator& b);
PhaseSpaceOperator operator*(Complex s, PhaseSpaceOperator a);

/// Top-left block of `op` covering l <= band_limit.
CMatrix restrict_band(const CMatrix& op, int band_limit);

/// Condon-Shortley spherical harmonic Y_lm(theta, phi).
Complex ylm_eval(int l, int m, double theta, double phi);

/// Normalized associated Legendre values Pbar_lm(cos theta) for 0 <= m <= l <= L,
/// indexed by lm_index(l, m), so that Y_lm = Pbar_lm e^{i m phi} for m >= 0.
RVector normalized_legendre(int band_limit, double theta);

struct AlphaBeta {
    double alpha1, alpha2, beta1, beta2;
};

/// Coefficients of cos(theta) Y_lm and sin(theta) d/dtheta Y_lm in Y_{l+1,m}
/// (alpha1, beta1) and Y_{l-1,m} (alpha2, beta2).
AlphaBeta alpha_beta(int l, int m);

struct AngularOperators {
    PhaseSpaceOperator l1, l2, l3, casimir;
    PhaseSpaceOperator l_plus, l_minus;

    const PhaseSpaceOperator& operator[](int axis) const { return axis == 0 ? l1 : (axis == 1 ? l2 : l3); }
};

/// Angular momentum L = -i (m x d/dm) and Lambda^2 on the coefficient space.
AngularOperators angular_operators(int band_limit);

/// Multiplication by m_i (M) and the operators K_i = i (m x L)_i
/// (K_3 = sin(theta) d/dtheta). Components pushed beyond the band limit are
/// dropped, so these are exact only on l <= band_limit - 1.
struct PositionOperators {
    std::array<PhaseSpaceOperator, 3> m;
    std::array<PhaseSpaceOperator, 3> k;
};

PositionOperators position_operators(int band_limit);

/// Sparse forms of L_i, M_i and K_i, same truncation as above.
struct SparseCoefficientOperators {
    std::array<SparseCMatrix, 3> l, m, k;
};

SparseCoefficientOperators sparse_coefficient_operators(int band_limit);

/// Coefficient representation of pointwise complex conjugation:
/// (C c)_lm = (-1)^m conj(c_{l,-m}).
SymbolCoefficients conjugate(const SymbolCoefficients& c);

/// The signed permutation J with C c = J conj(c).
RMatrix conjugation_permutation(int band_limit);

/// C O C for a complex-linear O; again complex-linear, equal to J conj(O) J.
CMatrix conjugate_operator(const CMatrix& op);

/// Gauss-Legendre nodes and weights on [-1, 1], nodes ascending.
void gauss_legendre(int n, RVector& nodes, RVector& weights);

/// Product grid: Gauss-Legendre in cos(theta) (L+1 nodes) times a uniform
/// phi grid (2L+2 nodes). Integrates spherical-harmonic degree <= 2L exactly.
class SphereGrid {
public:
    explicit SphereGrid(int band_limit, double measure_constant = 1.0);

    int band_limit() const { return band_limit_; }
    int n_theta() const { return static_cast<int>(theta_.size()); }
    int n_phi() const { return n_phi_; }
    int size() const { return n_theta() * n_phi_; }
    double theta(int i) const { return theta_(i); }
    double phi(int j) const { return 2.0 * kPi * j / n_phi_; }
    double theta_weight(int i) const { return weights_(i); }
    double measure_constant() const { return measure_; }

    /// Grid values are stored theta-major: index = i * n_phi + j.
    CVector synthesize(const SymbolCoefficients& c) const;
    SymbolCoefficients analyze(const CVector& values, int band_limit) const;
    SymbolCoefficients analyze(const CVector& values) const { return analyze(values, band_limit_); }
    /// Quadrature of the grid values against measure_constant * sin(theta) dtheta dphi.
    Complex integrate(const CVector& values) const;

    /// A copy of this grid with a different measure constant.
    SphereGrid with_measure(double measure_constant) const;

private:
    int band_limit_;
    int n_phi_;
    double measure_;
    RVector theta_;
    RVector weights_;
    std::vector<RVector> legendre_;  // per theta node
};

/// Writes `theta,phi,value_re,value_im` rows (theta-major, 17 significant digits).
void write_grid_csv(std::ostream& out, const SphereGrid& grid, const CVector& values);

}  // namespace swspin
