#include "swspin/sphere.hpp"

#include <cmath>
#include <cstdio>
#include <vector>
#include <ostream>

namespace swspin {

namespace {

int band_from_size(Eigen::Index n) {
    const int band = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n)))) - 1;
    if (coeff_count(band) != n) throw DomainError("coefficient vector length is not a perfect square");
    return band;
}

double sign_of_m(int m) { return (m % 2 == 0) ? 1.0 : -1.0; }

}  // namespace

SymbolCoefficients::SymbolCoefficients(int band_limit)
    : band_limit_(band_limit), c_(CVector::Zero(coeff_count(band_limit))) {
    if (band_limit < 0) throw DomainError("SymbolCoefficients: negative band limit");
}

SymbolCoefficients::SymbolCoefficients(int band_limit, CVector coefficients)
    : band_limit_(band_limit), c_(std::move(coefficients)) {
    if (band_limit < 0 || c_.size() != coeff_count(band_limit))
        throw DomainError("SymbolCoefficients: length must be (L+1)^2");
}

SymbolCoefficients SymbolCoefficients::unit(int band_limit, int l, int m) {
    if (l > band_limit || std::abs(m) > l) throw DomainError("SymbolCoefficients::unit: (l, m) outside band");
    SymbolCoefficients out(band_limit);
    out(l, m) = 1.0;
    return out;
}

bool SymbolCoefficients::is_real(double tol) const {
    for (int l = 0; l <= band_limit_; ++l)
        for (int m = -l; m <= l; ++m)
            if (std::abs((*this)(l, -m) - sign_of_m(m) * std::conj((*this)(l, m))) > tol) return false;
    return true;
}

SymbolCoefficients SymbolCoefficients::resized(int band_limit) const {
    SymbolCoefficients out(band_limit);
    const int n = std::min(coeff_count(band_limit), coeff_count(band_limit_));
    out.c_.head(n) = c_.head(n);
    return out;
}

PhaseSpaceOperator::PhaseSpaceOperator(int band_limit, CMatrix matrix) : band_limit_(band_limit), m_(std::move(matrix)) {
    if (m_.rows() != coeff_count(band_limit) || m_.cols() != coeff_count(band_limit))
        throw DomainError("PhaseSpaceOperator: matrix must be (L+1)^2 square");
}

PhaseSpaceOperator PhaseSpaceOperator::identity(int band_limit) {
    const int n = coeff_count(band_limit);
    return {band_limit, CMatrix::Identity(n, n)};
}

PhaseSpaceOperator PhaseSpaceOperator::zero(int band_limit) {
    const int n = coeff_count(band_limit);
    return {band_limit, CMatrix::Zero(n, n)};
}

SymbolCoefficients PhaseSpaceOperator::operator()(const SymbolCoefficients& c) const {
    if (c.band_limit() != band_limit_) throw DomainError("PhaseSpaceOperator: band-limit mismatch");
    return {band_limit_, m_ * c.coefficients()};
}

PhaseSpaceOperator PhaseSpaceOperator::restricted(int band_limit) const {
    if (band_limit > band_limit_) throw DomainError("PhaseSpaceOperator::restricted: band limit too large");
    return {band_limit, restrict_band(m_, band_limit)};
}

PhaseSpaceOperator& PhaseSpaceOperator::operator+=(const PhaseSpaceOperator& o) {
    if (o.band_limit_ != band_limit_) throw DomainError("PhaseSpaceOperator: band-limit mismatch");
    m_ += o.m_;
    return *this;
}

PhaseSpaceOperator& PhaseSpaceOperator::operator-=(const PhaseSpaceOperator& o) {
    if (o.band_limit_ != band_limit_) throw DomainError("PhaseSpaceOperator: band-limit mismatch");
    m_ -= o.m_;
    return *this;
}

PhaseSpaceOperator& PhaseSpaceOperator::operator*=(Complex s) {
    m_ *= s;
    return *this;
}

PhaseSpaceOperator operator+(PhaseSpaceOperator a, const PhaseSpaceOperator& b) { return a += b; }
PhaseSpaceOperator operator-(PhaseSpaceOperator a, const PhaseSpaceOperator& b) { return a -= b; }
PhaseSpaceOperator operator*(Complex s, PhaseSpaceOperator a) { return a *= s; }

PhaseSpaceOperator operator*(const PhaseSpaceOperator& a, const PhaseSpaceOperator& b) {
    if (a.band_limit() != b.band_limit()) throw DomainError("PhaseSpaceOperator: band-limit mismatch");
    return {a.band_limit(), a.matrix() * b.matrix()};
}

CMatrix restrict_band(const CMatrix& op, int band_limit) {
    const int n = coeff_count(band_limit);
    if (op.rows() < n || op.cols() < n) throw DomainError("restrict_band: operator smaller than requested band");
    return op.topLeftCorner(n, n);
}

RVector normalized_legendre(int band_limit, double theta) {
    const double x = std::cos(theta);
    const double s = std::sin(theta);
    RVector p = RVector::Zero(coeff_count(band_limit));
    double pmm = 1.0 / std::sqrt(4.0 * kPi);
    for (int m = 0; m <= band_limit; ++m) {
        if (m > 0) pmm *= -std::sqrt((2.0 * m + 1.0) / (2.0 * m)) * s;
        p(lm_index(m, m)) = pmm;
        if (m + 1 > band_limit) continue;
        double prev2 = pmm;
        double prev1 = x * std::sqrt(2.0 * m + 3.0) * pmm;
        p(lm_index(m + 1, m)) = prev1;
        for (int l = m + 2; l <= band_limit; ++l) {
            const double a = std::sqrt((4.0 * l * l - 1.0) / (static_cast<double>(l) * l - static_cast<double>(m) * m));
            const double b = std::sqrt((static_cast<double>(l - 1) * (l - 1) - static_cast<double>(m) * m) /
                                       (4.0 * (l - 1) * (l - 1) - 1.0));
            const double cur = a * (x * prev1 - b * prev2);
            p(lm_index(l, m)) = cur;
            prev2 = prev1;
            prev1 = cur;
        }
    }
    return p;
}

Complex ylm_eval(int l, int m, double theta, double phi) {
    if (l < 0 || std::abs(m) > l) throw DomainError("ylm_eval: requires 0 <= |m| <= l");
    const int am = std::abs(m);
    const double p = normalized_legendre(l, theta)(lm_index(l, am));
    const Complex y = p * std::exp(kI * static_cast<double>(am) * phi);
    return m >= 0 ? y : sign_of_m(am) * std::conj(y);
}

AlphaBeta alpha_beta(int l, int m) {
    const double ld = l, md = m;
    AlphaBeta ab{};
    ab.alpha1 = std::sqrt((ld - md + 1.0) * (ld + md + 1.0) / ((2.0 * ld + 1.0) * (2.0 * ld + 3.0)));
    const double rad = (ld - md) * (ld + md);
    ab.alpha2 = (l == 0 || rad <= 0.0) ? 0.0 : std::sqrt(rad / ((2.0 * ld - 1.0) * (2.0 * ld + 1.0)));
    ab.beta1 = ab.alpha1 * ld;
    ab.beta2 = -ab.alpha2 * (ld + 1.0);
    return ab;
}

AngularOperators angular_operators(int band_limit) {
    const int n = coeff_count(band_limit);
    CMatrix lp = CMatrix::Zero(n, n);
    CMatrix l3 = CMatrix::Zero(n, n);
    CMatrix cas = CMatrix::Zero(n, n);
    for (int l = 0; l <= band_limit; ++l) {
        for (int m = -l; m <= l; ++m) {
            const int i = lm_index(l, m);
            l3(i, i) = m;
            cas(i, i) = static_cast<double>(l) * (l + 1);
            if (m < l) lp(lm_index(l, m + 1), i) = std::sqrt(static_cast<double>(l) * (l + 1) - static_cast<double>(m) * (m + 1));
        }
    }
    CMatrix lm = lp.adjoint();
    AngularOperators ops;
    ops.l_plus = {band_limit, lp};
    ops.l_minus = {band_limit, lm};
    ops.l1 = {band_limit, 0.5 * (lp + lm)};
    ops.l2 = {band_limit, (lp - lm) / (2.0 * kI)};
    ops.l3 = {band_limit, l3};
    ops.casimir = {band_limit, cas};
    return ops;
}

SparseCoefficientOperators sparse_coefficient_operators(int band_limit) {
    const int n = coeff_count(band_limit);
    std::vector<Eigen::Triplet<Complex>> tp, t3, tm, tk;
    for (int l = 0; l <= band_limit; ++l) {
        for (int m = -l; m <= l; ++m) {
            const int col = lm_index(l, m);
            t3.emplace_back(col, col, m);
            if (m < l)
                tp.emplace_back(lm_index(l, m + 1), col,
                                std::sqrt(static_cast<double>(l) * (l + 1) - static_cast<double>(m) * (m + 1)));
            const AlphaBeta ab = alpha_beta(l, m);
            if (l + 1 <= band_limit) {
                tm.emplace_back(lm_index(l + 1, m), col, ab.alpha1);
                tk.emplace_back(lm_index(l + 1, m), col, ab.beta1);
            }
            if (l >= 1 && std::abs(m) <= l - 1) {
                tm.emplace_back(lm_index(l - 1, m), col, ab.alpha2);
                tk.emplace_back(lm_index(l - 1, m), col, ab.beta2);
            }
        }
    }
    auto build = [n](const std::vector<Eigen::Triplet<Complex>>& t) {
        SparseCMatrix a(n, n);
        a.setFromTriplets(t.begin(), t.end());
        return a;
    };
    const SparseCMatrix lp = build(tp);
    const SparseCMatrix lm = lp.adjoint();
    SparseCoefficientOperators out;
    out.l[0] = 0.5 * (lp + lm);
    out.l[1] = (lp - lm) * (-0.5 * kI);
    out.l[2] = build(t3);
    out.m[2] = build(tm);
    out.k[2] = build(tk);
    const auto comm = [](const SparseCMatrix& a, const SparseCMatrix& b) -> SparseCMatrix { return a * b - b * a; };
    out.m[0] = kI * comm(out.m[2], out.l[1]);
    out.m[1] = -kI * comm(out.m[2], out.l[0]);
    out.k[0] = kI * comm(out.k[2], out.l[1]);
    out.k[1] = -kI * comm(out.k[2], out.l[0]);
    for (auto* group : {&out.l, &out.m, &out.k})
        for (SparseCMatrix& a : *group) a.prune(Complex(0.0));
    return out;
}

PositionOperators position_operators(int band_limit) {
    const SparseCoefficientOperators s = sparse_coefficient_operators(band_limit);
    PositionOperators out;
    for (std::size_t i = 0; i < 3; ++i) {
        out.m[i] = {band_limit, CMatrix(s.m[i])};
        out.k[i] = {band_limit, CMatrix(s.k[i])};
    }
    return out;
}

RMatrix conjugation_permutation(int band_limit) {
    const int n = coeff_count(band_limit);
    RMatrix j = RMatrix::Zero(n, n);
    for (int l = 0; l <= band_limit; ++l)
        for (int m = -l; m <= l; ++m) j(lm_index(l, m), lm_index(l, -m)) = sign_of_m(m);
    return j;
}

SymbolCoefficients conjugate(const SymbolCoefficients& c) {
    SymbolCoefficients out(c.band_limit());
    for (int l = 0; l <= c.band_limit(); ++l)
        for (int m = -l; m <= l; ++m) out(l, m) = sign_of_m(m) * std::conj(c(l, -m));
    return out;
}

CMatrix conjugate_operator(const CMatrix& op) {
    const int band = band_from_size(op.rows());
    // J is a signed permutation, so J conj(O) J is a reindexing of conj(O).
    CMatrix out(op.rows(), op.cols());
    for (int l = 0; l <= band; ++l)
        for (int m = -l; m <= l; ++m) {
            const int row = lm_index(l, m);
            const int src_row = lm_index(l, -m);
            const double sr = sign_of_m(m);
            for (int lp = 0; lp <= band; ++lp)
                for (int mp = -lp; mp <= lp; ++mp)
                    out(row, lm_index(lp, mp)) = sr * sign_of_m(mp) * std::conj(op(src_row, lm_index(lp, -mp)));
        }
    return out;
}

void gauss_legendre(int n, RVector& nodes, RVector& weights) {
    if (n < 1) throw DomainError("gauss_legendre: n must be >= 1");
    nodes.resize(n);
    weights.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        // Recompute the derivative at the converged node for the weight.
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
            const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes(n - 1 - i) = x;
        nodes(i) = -x;
        weights(i) = w;
        weights(n - 1 - i) = w;
    }
}

SphereGrid::SphereGrid(int band_limit, double measure_constant)
    : band_limit_(band_limit), n_phi_(2 * band_limit + 2), measure_(measure_constant) {
    if (band_limit < 0) throw DomainError("SphereGrid: negative band limit");
    RVector x;
    gauss_legendre(band_limit + 1, x, weights_);
    // theta ascending means cos(theta) descending.
    theta_.resize(x.size());
    RVector w = weights_;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        theta_(i) = std::acos(x(x.size() - 1 - i));
        weights_(i) = w(x.size() - 1 - i);
    }
    legendre_.reserve(static_cast<std::size_t>(theta_.size()));
    for (Eigen::Index i = 0; i < theta_.size(); ++i) legendre_.push_back(normalized_legendre(band_limit, theta_(i)));
}

SphereGrid SphereGrid::with_measure(double measure_constant) const {
    SphereGrid g = *this;
    g.measure_ = measure_constant;
    return g;
}

CVector SphereGrid::synthesize(const SymbolCoefficients& c) const {
    const int band = c.band_limit();
    if (band > band_limit_) throw DomainError("SphereGrid::synthesize: data band limit exceeds grid band limit");
    CVector out = CVector::Zero(size());
    std::vector<Complex> g(static_cast<std::size_t>(2 * band + 1));
    for (int i = 0; i < n_theta(); ++i) {
        const RVector& p = legendre_[static_cast<std::size_t>(i)];
        for (int m = -band; m <= band; ++m) {
            const int am = std::abs(m);
            Complex acc = 0.0;
            for (int l = am; l <= band; ++l) acc += c(l, m) * p(lm_index(l, am));
            g[static_cast<std::size_t>(m + band)] = (m < 0 ? sign_of_m(am) : 1.0) * acc;
        }
        for (int j = 0; j < n_phi_; ++j) {
            Complex v = 0.0;
            for (int m = -band; m <= band; ++m) v += g[static_cast<std::size_t>(m + band)] * std::exp(kI * (m * phi(j)));
            out(i * n_phi_ + j) = v;
        }
    }
    return out;
}

SymbolCoefficients SphereGrid::analyze(const CVector& values, int band_limit) const {
    if (values.size() != size()) throw DomainError("SphereGrid::analyze: value count does not match grid");
    if (band_limit > band_limit_) throw DomainError("SphereGrid::analyze: requested band limit exceeds grid band limit");
    SymbolCoefficients out(band_limit);
    const double dphi = 2.0 * kPi / n_phi_;
    for (int i = 0; i < n_theta(); ++i) {
        const RVector& p = legendre_[static_cast<std::size_t>(i)];
        for (int m = -band_limit; m <= band_limit; ++m) {
            Complex gm = 0.0;
            for (int j = 0; j < n_phi_; ++j) gm += values(i * n_phi_ + j) * std::exp(-kI * (m * phi(j)));
            gm *= dphi * weights_(i);
            const int am = std::abs(m);
            const double sgn = m < 0 ? sign_of_m(am) : 1.0;
            for (int l = am; l <= band_limit; ++l) out(l, m) += sgn * p(lm_index(l, am)) * gm;
        }
    }
    return out;
}

Complex SphereGrid::integrate(const CVector& values) const {
    if (values.size() != size()) throw DomainError("SphereGrid::integrate: value count does not match grid");
    const double dphi = 2.0 * kPi / n_phi_;
    Complex total = 0.0;
    for (int i = 0; i < n_theta(); ++i) {
        Complex row = 0.0;
        for (int j = 0; j < n_phi_; ++j) row += values(i * n_phi_ + j);
        total += weights_(i) * row;
    }
    return measure_ * dphi * total;
}

void write_grid_csv(std::ostream& out, const SphereGrid& grid, const CVector& values) {
    if (values.size() != grid.size()) throw DomainError("write_grid_csv: value count does not match grid");
    out << "theta,phi,value_re,value_im\n";
    char line[160];
    for (int i = 0; i < grid.n_theta(); ++i)
        for (int j = 0; j < grid.n_phi(); ++j) {
            const Complex v = values(i * grid.n_phi() + j);
            std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g,%.17g\n", grid.theta(i), grid.phi(j), v.real(), v.imag());
            out << line;
        }
}

}  // namespace swspin
