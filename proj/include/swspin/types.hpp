#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace swspin {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Complex = std::complex<double>;
using CMatrix = Matrix<Complex>;
using CVector = Vector<Complex>;
using RMatrix = Matrix<double>;
using RVector = Vector<double>;
using SparseCMatrix = Eigen::SparseMatrix<Complex>;

inline constexpr Complex kI{0.0, 1.0};
inline constexpr double kPi = 3.14159265358979323846;

/// Raised for arguments outside an operation's mathematical domain.
class DomainError : public std::domain_error {
public:
    explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

/// Raised when a computation produces non-finite values.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// Spin quantum number S, stored as 2S so half-integers stay exact.
class SpinContext {
public:
    explicit SpinContext(int twice_s) : twice_s_(twice_s) {
        if (twice_s < 1) throw DomainError("SpinContext: twice_s must be >= 1");
    }

    int twice_s() const { return twice_s_; }
    double spin() const { return 0.5 * twice_s_; }
    int hilbert_dim() const { return twice_s_ + 1; }
    int band_limit() const { return twice_s_; }
    int symbol_dim() const { return (twice_s_ + 1) * (twice_s_ + 1); }

    friend bool operator==(const SpinContext&, const SpinContext&) = default;

private:
    int twice_s_;
};

/// Operator ordering parameter sigma in [-1, 1].
class Ordering {
public:
    explicit Ordering(double sigma) : sigma_(sigma) {
        if (!(sigma >= -1.0 && sigma <= 1.0))
            throw DomainError("Ordering: sigma must lie in [-1, 1]");
    }

    static Ordering symmetric() { return Ordering(0.0); }
    static Ordering normal() { return Ordering(1.0); }
    static Ordering antinormal() { return Ordering(-1.0); }

    double value() const { return sigma_; }
    Ordering dual() const { return Ordering(-sigma_); }

    friend bool operator==(const Ordering&, const Ordering&) = default;

private:
    double sigma_;
};

/// Hilbert-space commutator [a, b].
template <typename DerivedA, typename DerivedB>
auto commutator(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
    using Scalar = typename DerivedA::Scalar;
    Matrix<Scalar> out = a * b - b * a;
    return out;
}

inline int levi_civita(int i, int j, int k) {
    if (i == j || j == k || i == k) return 0;
    return ((j - i + 3) % 3 == 1) ? 1 : -1;
}

}  // namespace swspin
