#include "swspin/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#include <unsupported/Eigen/MatrixFunctions>

namespace swspin {

namespace {

CMatrix kron(const CMatrix& a, const CMatrix& b) {
    CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

// vec(A X) and vec(X B) on column-major vec.
CMatrix left_super(const CMatrix& a) { return kron(CMatrix::Identity(a.rows(), a.cols()), a); }
CMatrix right_super(const CMatrix& b) { return kron(b.transpose(), CMatrix::Identity(b.rows(), b.cols())); }

void check_band(const SpinContext& ctx, int band_limit, const char* who) {
    if (band_limit < 0 || band_limit > ctx.band_limit())
        throw DomainError(std::string(who) + ": band limit must be in [0, 2S]");
}

void require_hermitian(const SpinExpression& expr, const SpinContext& ctx, const char* who) {
    if (!expr.is_hermitian(ctx, 1e-10)) throw DomainError(std::string(who) + ": expression is not Hermitian");
}

bool all_finite(const CVector& v) {
    return v.allFinite();
}

std::array<double, 3> to_array(const Vec3& v) { return {v(0), v(1), v(2)}; }

// Im(O) = (O - C O C) / (2i).
CMatrix im_part(const CMatrix& op) { return twice_imaginary_part(op) * 0.5; }

}  // namespace

void QuadraticHamiltonian::validate() const {
    if (!d.allFinite() || !b.allFinite()) throw DomainError("QuadraticHamiltonian: non-finite entries");
    if ((d - d.transpose()).cwiseAbs().maxCoeff() > 1e-14) throw DomainError("QuadraticHamiltonian: D must be symmetric");
}

SpinExpression QuadraticHamiltonian::expression() const {
    validate();
    std::array<std::array<double, 3>, 3> dd{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) dd[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = d(i, j);
    return SpinExpression::quadratic(dd, to_array(b));
}

BathSpec BathSpec::bilinear(const Vec3& xi, double gamma, double temperature) {
    BathSpec out;
    out.coupling = SpinExpression::linear(to_array(xi));
    out.xi = xi;
    out.gamma = gamma;
    out.temperature = temperature;
    return out;
}

void BathSpec::validate(const SpinContext& ctx) const {
    if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw DomainError("BathSpec: gamma must be >= 0");
    if (!(temperature > 0.0) || !std::isfinite(temperature)) throw DomainError("BathSpec: temperature must be > 0");
    require_hermitian(coupling, ctx, "BathSpec");
}

CMatrix twice_imaginary_part(const CMatrix& op) { return (op - conjugate_operator(op)) / kI; }

PhaseSpaceOperator unitary_generator(const SpinExpression& h, const SpinContext& ctx, Ordering sigma, int band_limit) {
    check_band(ctx, band_limit, "unitary_generator");
    require_hermitian(h, ctx, "unitary_generator");
    const PhaseSpaceOperator hb = evaluate_expression(h, ctx, sigma, band_limit);
    return {band_limit, twice_imaginary_part(hb.matrix())};
}

PhaseSpaceOperator unitary_generator(const SpinExpression& h, const SpinContext& ctx, Ordering sigma) {
    return unitary_generator(h, ctx, sigma, ctx.band_limit());
}

PhaseSpaceOperator quadratic_generator(const QuadraticHamiltonian& qh, const SpinContext& ctx, Ordering sigma,
                                       int band_limit) {
    check_band(ctx, band_limit, "quadratic_generator");
    qh.validate();
    const int work = band_limit + 1;
    const AngularOperators ang = angular_operators(work);
    const PositionOperators pos = position_operators(work);
    const BoppCoefficients coeffs(ctx, sigma);
    const CMatrix f1 = coeffs.f1_diagonal(work);
    const CMatrix f2 = coeffs.f2_diagonal(work);

    const int n = coeff_count(work);
    CMatrix g = CMatrix::Zero(n, n);
    for (int j = 0; j < 3; ++j) g += kI * qh.b(j) * ang[j].matrix();
    for (int k = 0; k < 3; ++k) {
        const auto kk = static_cast<std::size_t>(k);
        const CMatrix drift = pos.m[kk].matrix() * f1 + pos.k[kk].matrix() * f2;
        for (int j = 0; j < 3; ++j) {
            if (qh.d(j, k) == 0.0) continue;
            g += 2.0 * kI * qh.d(j, k) * ang[j].matrix() * drift;
        }
    }
    return PhaseSpaceOperator(work, std::move(g)).restricted(band_limit);
}

PhaseSpaceOperator quadratic_generator(const QuadraticHamiltonian& qh, const SpinContext& ctx, Ordering sigma) {
    return quadratic_generator(qh, ctx, sigma, ctx.band_limit());
}

CMatrix master_rhs(const CMatrix& rho, const CMatrix& h, const CMatrix& f, double gamma, double temperature) {
    if (rho.rows() != rho.cols() || h.rows() != h.cols() || f.rows() != f.cols() || rho.rows() != h.rows() ||
        rho.rows() != f.rows())
        throw DomainError("master_rhs: dimension mismatch");
    if (!(temperature > 0.0)) throw DomainError("master_rhs: temperature must be > 0");
    const CMatrix hf = commutator(h, f);
    const CMatrix frho = f * rho;
    const CMatrix x = commutator(f, frho) - (0.5 / temperature) * commutator(f, CMatrix(hf * rho));
    return -kI * commutator(h, rho) - gamma * temperature * (x + x.adjoint());
}

CMatrix master_rhs(const CMatrix& rho, const CMatrix& h, const BathSpec& bath, const SpinContext& ctx) {
    bath.validate(ctx);
    return master_rhs(rho, h, bath.coupling.to_operator(ctx), bath.gamma, bath.temperature);
}

CMatrix master_superoperator(const CMatrix& h, const CMatrix& f, double gamma, double temperature) {
    if (h.rows() != h.cols() || f.rows() != f.cols() || h.rows() != f.rows())
        throw DomainError("master_superoperator: dimension mismatch");
    if (!(temperature > 0.0)) throw DomainError("master_superoperator: temperature must be > 0");
    const CMatrix c = commutator(h, f);
    const CMatrix cd = c.adjoint();
    const CMatrix ff = f * f;
    // X = F F rho - F rho F - (1/2T)(F C rho - C rho F)
    // X^dagger = rho F F - F rho F - (1/2T)(rho C^dagger F - F rho C^dagger)
    const double k = 0.5 / temperature;
    CMatrix x = left_super(ff) - left_super(f) * right_super(f) - k * (left_super(CMatrix(f * c)) - left_super(c) * right_super(f));
    CMatrix xd = right_super(ff) - left_super(f) * right_super(f) - k * (right_super(CMatrix(cd * f)) - left_super(f) * right_super(cd));
    return -kI * (left_super(h) - right_super(h)) - gamma * temperature * (x + xd);
}

PhaseSpaceOperator qfp_generator(const SpinExpression& h, const BathSpec& bath, const SpinContext& ctx, Ordering sigma,
                                 int band_limit) {
    check_band(ctx, band_limit, "qfp_generator");
    require_hermitian(h, ctx, "qfp_generator");
    bath.validate(ctx);
    const int degree = h.degree() + 2 * bath.coupling.degree();
    const int work = std::min(ctx.band_limit(), band_limit + std::max(degree - 1, 0));
    const BoppOperators bopp = bopp_matrices(ctx, sigma, work);
    const CMatrix hb = evaluate_expression(h, bopp).matrix();
    const CMatrix fb = evaluate_expression(bath.coupling, bopp).matrix();
    const CMatrix im_f = im_part(fb);
    const CMatrix im_hf = im_part(commutator(hb, fb));
    const double gt = bath.gamma * bath.temperature;
    CMatrix g = twice_imaginary_part(hb) + 4.0 * gt * (im_f * im_f - (0.5 / bath.temperature) * im_f * im_hf);
    return PhaseSpaceOperator(work, std::move(g)).restricted(band_limit);
}

PhaseSpaceOperator qfp_generator(const SpinExpression& h, const BathSpec& bath, const SpinContext& ctx, Ordering sigma) {
    return qfp_generator(h, bath, ctx, sigma, ctx.band_limit());
}

std::array<PhaseSpaceOperator, 3> m_vector_operators(const SpinContext& ctx, Ordering sigma, int band_limit) {
    check_band(ctx, band_limit, "m_vector_operators");
    const int work = band_limit + 1;
    const PositionOperators pos = position_operators(work);
    const BoppCoefficients coeffs(ctx, sigma);
    const double s = ctx.spin();
    CMatrix f1 = coeffs.f1_diagonal(work);
    // f1 - S on the shells that carry input.
    for (int l = 0; l <= band_limit; ++l)
        for (int m = -l; m <= l; ++m) f1(lm_index(l, m), lm_index(l, m)) -= s;
    const CMatrix f2 = coeffs.f2_diagonal(work);
    std::array<PhaseSpaceOperator, 3> out;
    for (std::size_t a = 0; a < 3; ++a)
        out[a] = PhaseSpaceOperator(work, (pos.m[a].matrix() * f1 + pos.k[a].matrix() * f2) / s).restricted(band_limit);
    return out;
}

Mat3 bilinear_damping_tensor(const Vec3& xi, double gamma, double spin) { return spin * gamma * xi * xi.transpose(); }

PhaseSpaceOperator isotropic_bilinear_generator(const Vec3& b, const Vec3& xi, double gamma, double temperature,
                                                const SpinContext& ctx, Ordering sigma, int band_limit) {
    check_band(ctx, band_limit, "isotropic_bilinear_generator");
    if (!(gamma >= 0.0)) throw DomainError("isotropic_bilinear_generator: gamma must be >= 0");
    if (!(temperature > 0.0)) throw DomainError("isotropic_bilinear_generator: temperature must be > 0");
    const double s = ctx.spin();
    const Vec3 b_eff = s * b;
    const Mat3 lambda = bilinear_damping_tensor(xi, gamma, s);

    const int work = band_limit + 2;
    const AngularOperators ang = angular_operators(work);
    const PositionOperators pos = position_operators(work);
    const BoppCoefficients coeffs(ctx, sigma);
    CMatrix f1s = coeffs.f1_diagonal(work);
    for (int l = 0; l <= std::min(work, ctx.band_limit()); ++l)
        for (int m = -l; m <= l; ++m) f1s(lm_index(l, m), lm_index(l, m)) -= s;
    const CMatrix f2 = coeffs.f2_diagonal(work);

    const int n = coeff_count(work);
    const CMatrix id = CMatrix::Identity(n, n);
    std::array<CMatrix, 3> mvec;
    for (std::size_t a = 0; a < 3; ++a) mvec[a] = (pos.m[a].matrix() * f1s + pos.k[a].matrix() * f2) / s;

    // V_j = [m x (B_eff + T K) + M x B_eff]_j; d/dm -> -K and m x K = -i L.
    std::array<CMatrix, 3> v;
    for (int j = 0; j < 3; ++j) {
        CMatrix acc = CMatrix::Zero(n, n);
        for (int a = 0; a < 3; ++a)
            for (int bb = 0; bb < 3; ++bb) {
                const int e = levi_civita(j, a, bb);
                if (e == 0) continue;
                const auto aa = static_cast<std::size_t>(a);
                const auto bi = static_cast<std::size_t>(bb);
                acc += e * (pos.m[aa].matrix() * (b_eff(bb) * id + temperature * pos.k[bi].matrix()) + b_eff(bb) * mvec[aa]);
            }
        v[static_cast<std::size_t>(j)] = std::move(acc);
    }

    CMatrix g = CMatrix::Zero(n, n);
    for (int k = 0; k < 3; ++k) {
        g += kI * b(k) * ang[k].matrix();
        CMatrix inner = CMatrix::Zero(n, n);
        for (int j = 0; j < 3; ++j)
            if (lambda(k, j) != 0.0) inner += lambda(k, j) * v[static_cast<std::size_t>(j)];
        g -= (kI / s) * ang[k].matrix() * inner;
    }
    return PhaseSpaceOperator(work, std::move(g)).restricted(band_limit);
}

PhaseSpaceOperator isotropic_bilinear_generator(const Vec3& b, const Vec3& xi, double gamma, double temperature,
                                                const SpinContext& ctx, Ordering sigma) {
    return isotropic_bilinear_generator(b, xi, gamma, temperature, ctx, sigma, ctx.band_limit());
}

ClassicalPolynomial ClassicalPolynomial::linear(const Vec3& v, double scale) {
    std::vector<Monomial> terms;
    for (int i = 0; i < 3; ++i) {
        if (v(i) == 0.0) continue;
        std::array<int, 3> p{0, 0, 0};
        p[static_cast<std::size_t>(i)] = 1;
        terms.push_back({scale * v(i), p});
    }
    return ClassicalPolynomial(std::move(terms));
}

int ClassicalPolynomial::degree() const {
    int d = 0;
    for (const Monomial& t : terms_) d = std::max(d, t.powers[0] + t.powers[1] + t.powers[2]);
    return d;
}

ClassicalPolynomial ClassicalPolynomial::derivative(int axis) const {
    if (axis < 0 || axis > 2) throw DomainError("ClassicalPolynomial::derivative: axis must be 0, 1 or 2");
    const auto ax = static_cast<std::size_t>(axis);
    std::vector<Monomial> out;
    for (const Monomial& t : terms_) {
        if (t.powers[ax] == 0) continue;
        Monomial d = t;
        d.coeff *= t.powers[ax];
        d.powers[ax] -= 1;
        out.push_back(d);
    }
    return ClassicalPolynomial(std::move(out));
}

double ClassicalPolynomial::operator()(const Vec3& m) const {
    double acc = 0.0;
    for (const Monomial& t : terms_)
        acc += t.coeff * std::pow(m(0), t.powers[0]) * std::pow(m(1), t.powers[1]) * std::pow(m(2), t.powers[2]);
    return acc;
}

SparseCMatrix ClassicalPolynomial::sparse_multiplication_operator(int band_limit) const {
    const int work = band_limit + degree();
    const SparseCoefficientOperators ops = sparse_coefficient_operators(work);
    const int n = coeff_count(work);
    SparseCMatrix out(n, n);
    for (const Monomial& t : terms_) {
        SparseCMatrix prod(n, n);
        prod.setIdentity();
        for (std::size_t i = 0; i < 3; ++i)
            for (int p = 0; p < t.powers[i]; ++p) prod = ops.m[i] * prod;
        out += t.coeff * prod;
    }
    const int nb = coeff_count(band_limit);
    return out.topLeftCorner(nb, nb);
}

PhaseSpaceOperator ClassicalPolynomial::multiplication_operator(int band_limit) const {
    return PhaseSpaceOperator(band_limit, CMatrix(sparse_multiplication_operator(band_limit)));
}

ClassicalPolynomial classical_symbol(const SpinExpression& expr, double spin) {
    std::map<std::array<int, 3>, double> acc;
    for (const auto& t : expr.terms()) {
        std::array<int, 3> p{0, 0, 0};
        for (int axis : t.word) ++p[static_cast<std::size_t>(axis)];
        acc[p] += t.coeff.real() * std::pow(spin, static_cast<double>(t.word.size()));
    }
    std::vector<ClassicalPolynomial::Monomial> terms;
    for (const auto& [p, c] : acc)
        if (c != 0.0) terms.push_back({c, p});
    return ClassicalPolynomial(std::move(terms));
}

SparseClassicalGenerators classical_generators_sparse(const ClassicalPolynomial& hamiltonian, const Mat3& damping,
                                                      double temperature, double spin, int band_limit) {
    if (band_limit < 0) throw DomainError("classical_generators: band limit must be >= 0");
    if (!(temperature > 0.0)) throw DomainError("classical_generators: temperature must be > 0");
    if (!(spin > 0.0)) throw DomainError("classical_generators: spin must be > 0");
    // B_eff raises l by deg(H) - 1; m x (... K) adds two more.
    const int work = band_limit + std::max(hamiltonian.degree(), 1) + 1;
    const SparseCoefficientOperators ops = sparse_coefficient_operators(work);
    const int n = coeff_count(work);

    std::array<SparseCMatrix, 3> b_eff;
    for (std::size_t k = 0; k < 3; ++k)
        b_eff[k] = -hamiltonian.derivative(static_cast<int>(k)).sparse_multiplication_operator(work);

    SparseCMatrix liouville(n, n);
    for (std::size_t k = 0; k < 3; ++k) liouville += (kI / spin) * (ops.l[k] * b_eff[k]);

    std::array<SparseCMatrix, 3> v;
    for (int j = 0; j < 3; ++j) {
        SparseCMatrix acc(n, n);
        for (int a = 0; a < 3; ++a)
            for (int bb = 0; bb < 3; ++bb) {
                const int e = levi_civita(j, a, bb);
                if (e == 0) continue;
                const auto bi = static_cast<std::size_t>(bb);
                const SparseCMatrix drift = b_eff[bi] + temperature * ops.k[bi];
                acc += static_cast<double>(e) * (ops.m[static_cast<std::size_t>(a)] * drift);
            }
        v[static_cast<std::size_t>(j)] = std::move(acc);
    }
    SparseCMatrix fp = liouville;
    for (int k = 0; k < 3; ++k) {
        SparseCMatrix inner(n, n);
        for (int j = 0; j < 3; ++j)
            if (damping(k, j) != 0.0) inner += damping(k, j) * v[static_cast<std::size_t>(j)];
        fp -= (kI / spin) * (ops.l[static_cast<std::size_t>(k)] * inner);
    }
    const int nb = coeff_count(band_limit);
    SparseClassicalGenerators out;
    out.band_limit = band_limit;
    out.liouville = liouville.topLeftCorner(nb, nb);
    out.fokker_planck = fp.topLeftCorner(nb, nb);
    return out;
}

ClassicalGenerators classical_generators(const ClassicalPolynomial& hamiltonian, const Mat3& damping, double temperature,
                                         double spin, int band_limit) {
    const SparseClassicalGenerators s = classical_generators_sparse(hamiltonian, damping, temperature, spin, band_limit);
    return {PhaseSpaceOperator(band_limit, CMatrix(s.liouville)), PhaseSpaceOperator(band_limit, CMatrix(s.fokker_planck))};
}

IntegrationMethod parse_method(const std::string& name) {
    if (name == "rk4") return IntegrationMethod::Rk4;
    if (name == "expm") return IntegrationMethod::Expm;
    throw DomainError("unknown integration method '" + name + "' (expected rk4 or expm)");
}

std::string to_string(IntegrationMethod method) { return method == IntegrationMethod::Rk4 ? "rk4" : "expm"; }

namespace {

std::vector<double> time_grid(double t_end, double dt) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw DomainError("integrate: dt must be > 0");
    if (!(t_end >= 0.0) || !std::isfinite(t_end)) throw DomainError("integrate: t_end must be >= 0");
    std::vector<double> t{0.0};
    const auto steps = static_cast<long>(std::floor(t_end / dt + 1e-9));
    for (long k = 1; k <= steps; ++k) t.push_back(std::min(k * dt, t_end));
    if (t_end - t.back() > 1e-12 * std::max(1.0, t_end)) t.push_back(t_end);
    return t;
}

void check_finite(const CVector& x, double t) {
    if (!all_finite(x)) {
        std::ostringstream msg;
        msg << "integrate: non-finite state at t = " << std::setprecision(17) << t;
        throw NumericalError(msg.str());
    }
}

}  // namespace

Trajectory integrate_rk4(const std::function<CVector(const CVector&)>& rhs, const CVector& initial, double t_end,
                         double dt) {
    Trajectory out;
    out.times = time_grid(t_end, dt);
    CVector x = initial;
    check_finite(x, 0.0);
    out.states.push_back(x);
    for (std::size_t k = 1; k < out.times.size(); ++k) {
        const double h = out.times[k] - out.times[k - 1];
        const CVector k1 = rhs(x);
        const CVector k2 = rhs(x + 0.5 * h * k1);
        const CVector k3 = rhs(x + 0.5 * h * k2);
        const CVector k4 = rhs(x + h * k3);
        x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        check_finite(x, out.times[k]);
        out.states.push_back(x);
    }
    return out;
}

Trajectory integrate(const CMatrix& generator, const CVector& initial, double t_end, double dt, IntegrationMethod method) {
    if (generator.rows() != generator.cols() || generator.rows() != initial.size())
        throw DomainError("integrate: generator and state dimensions differ");
    if (!generator.allFinite()) throw NumericalError("integrate: generator has non-finite entries");
    if (method == IntegrationMethod::Rk4)
        return integrate_rk4([&generator](const CVector& x) -> CVector { return generator * x; }, initial, t_end, dt);

    if (generator.rows() > 4096) throw DomainError("integrate: expm limited to state dimension <= 4096");
    Trajectory out;
    out.times = time_grid(t_end, dt);
    CVector x = initial;
    check_finite(x, 0.0);
    out.states.push_back(x);
    CMatrix step;
    double step_h = -1.0;
    for (std::size_t k = 1; k < out.times.size(); ++k) {
        const double h = out.times[k] - out.times[k - 1];
        if (h != step_h) {
            step = CMatrix(generator * h).exp();
            step_h = h;
        }
        x = step * x;
        check_finite(x, out.times[k]);
        out.states.push_back(x);
    }
    return out;
}

CMatrix unitary_exp(const CMatrix& hermitian, double angle) {
    const Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian);
    const CVector phases = (-kI * angle * es.eigenvalues().cast<Complex>()).array().exp();
    return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

CMatrix coherent_state(const SpinContext& ctx, double theta0, double phi0) {
    if (!std::isfinite(theta0) || !std::isfinite(phi0)) throw DomainError("coherent_state: angles must be finite");
    const SpinMatrices s = spin_matrices(ctx);
    const CMatrix u = unitary_exp(s.s3, phi0) * unitary_exp(s.s2, theta0);
    const CVector psi = u.col(0);
    return psi * psi.adjoint();
}

CMatrix stationary_state(const CMatrix& h, const CMatrix& f, double gamma, double temperature) {
    const CMatrix sup = master_superoperator(h, f, gamma, temperature);
    const Eigen::BDCSVD<CMatrix> svd(sup, Eigen::ComputeFullV);
    const Eigen::Index n = h.rows();
    const CVector v = svd.matrixV().col(sup.cols() - 1);
    CMatrix rho = Eigen::Map<const CMatrix>(v.data(), n, n);
    rho = 0.5 * (rho + rho.adjoint()).eval();
    const Complex tr = rho.trace();
    if (std::abs(tr) < 1e-14) throw NumericalError("stationary_state: null vector has zero trace");
    return rho / tr;
}

Observables observables_of(const CMatrix& rho) {
    const SpinContext ctx(static_cast<int>(rho.rows()) - 1);
    const SpinMatrices s = spin_matrices(ctx);
    return {(s.s1 * rho).trace().real(), (s.s2 * rho).trace().real(), (s.s3 * rho).trace().real(), rho.trace().real(),
            (rho * rho).trace().real()};
}

EvolutionResult evolve_symbol(const PhaseSpaceOperator& generator, const SymbolCoefficients& initial,
                              const SpinContext& ctx, Ordering sigma, double t_end, double dt,
                              IntegrationMethod method) {
    if (generator.band_limit() != initial.band_limit())
        throw DomainError("evolve_symbol: generator and state band limits differ");
    if (initial.band_limit() != ctx.band_limit()) throw DomainError("evolve_symbol: state must carry band limit 2S");
    const Trajectory traj = integrate(generator.matrix(), initial.coefficients(), t_end, dt, method);
    const SwTransform sw(ctx);
    EvolutionResult out;
    out.times = traj.times;
    for (const CVector& x : traj.states) {
        SymbolCoefficients w(ctx.band_limit(), x);
        out.observables.push_back(observables_of(sw.to_operator(w, sigma)));
        out.states.push_back(std::move(w));
    }
    return out;
}

HilbertEvolution evolve_density_matrix(const CMatrix& h, const CMatrix& f, double gamma, double temperature,
                                       const CMatrix& rho0, double t_end, double dt, IntegrationMethod method) {
    const Eigen::Index n = rho0.rows();
    if (rho0.cols() != n || h.rows() != n || f.rows() != n) throw DomainError("evolve_density_matrix: dimension mismatch");
    const CVector x0 = Eigen::Map<const CVector>(rho0.data(), n * n);
    Trajectory traj;
    if (method == IntegrationMethod::Expm) {
        traj = integrate(master_superoperator(h, f, gamma, temperature), x0, t_end, dt, method);
    } else {
        traj = integrate_rk4(
            [&](const CVector& x) -> CVector {
                const CMatrix rho = Eigen::Map<const CMatrix>(x.data(), n, n);
                const CMatrix r = master_rhs(rho, h, f, gamma, temperature);
                return Eigen::Map<const CVector>(r.data(), n * n);
            },
            x0, t_end, dt);
    }
    HilbertEvolution out;
    out.times = traj.times;
    for (const CVector& x : traj.states) {
        CMatrix rho = Eigen::Map<const CMatrix>(x.data(), n, n);
        out.observables.push_back(observables_of(rho));
        out.states.push_back(std::move(rho));
    }
    return out;
}

void write_trajectory_csv(std::ostream& out, const std::vector<double>& times, const std::vector<Observables>& obs) {
    if (times.size() != obs.size()) throw DomainError("write_trajectory_csv: length mismatch");
    out << "t,Sx,Sy,Sz,trace,purity\n" << std::setprecision(17);
    for (std::size_t k = 0; k < times.size(); ++k) {
        const Observables& o = obs[k];
        out << times[k] << ',' << o.s1 << ',' << o.s2 << ',' << o.s3 << ',' << o.trace << ',' << o.purity << '\n';
    }
}

double operator_norm(const CMatrix& op) {
    if (op.size() == 0) return 0.0;
    return Eigen::BDCSVD<CMatrix>(op).singularValues()(0);
}

double log_log_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw DomainError("log_log_slope: need at least two matching points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0)) return std::numeric_limits<double>::quiet_NaN();
        const double lx = std::log(x[i]);
        const double ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

ScanModel parse_scan_model(const std::string& name) {
    if (name == "linear_unitary") return ScanModel::LinearUnitary;
    if (name == "isotropic_bilinear") return ScanModel::IsotropicBilinear;
    if (name == "asymptotics") return ScanModel::Asymptotics;
    throw DomainError("unknown scan model '" + name + "' (expected linear_unitary, isotropic_bilinear or asymptotics)");
}

std::string to_string(ScanModel model) {
    switch (model) {
        case ScanModel::LinearUnitary: return "linear_unitary";
        case ScanModel::IsotropicBilinear: return "isotropic_bilinear";
        case ScanModel::Asymptotics: return "asymptotics";
    }
    return "";
}

LimitScanResult classical_limit_scan(const LimitScanSpec& spec) {
    if (spec.twice_s.size() < 2) throw DomainError("classical_limit_scan: need at least two spins");
    if (!std::is_sorted(spec.twice_s.begin(), spec.twice_s.end())) throw DomainError("classical_limit_scan: spins must ascend");
    if (spec.l_test < 0) throw DomainError("classical_limit_scan: l_test must be >= 0");
    const int min_ts = spec.twice_s.front();
    if (spec.model != ScanModel::Asymptotics && spec.l_test > min_ts - 2)
        throw DomainError("classical_limit_scan: l_test exceeds 2S - 2 for the smallest spin");
    if (spec.model == ScanModel::Asymptotics && spec.l_test > min_ts)
        throw DomainError("classical_limit_scan: l_test exceeds 2S for the smallest spin");
    const Ordering sigma(spec.sigma);

    LimitScanResult out;
    std::vector<double> xs, ys;
    for (int ts : spec.twice_s) {
        const SpinContext ctx(ts);
        const double s = ctx.spin();
        double dev = 0.0;
        switch (spec.model) {
            case ScanModel::LinearUnitary: {
                const SpinExpression h = -1.0 * SpinExpression::linear(to_array(spec.b));
                const PhaseSpaceOperator gq = unitary_generator(h, ctx, sigma, spec.l_test);
                const ClassicalGenerators gc =
                    classical_generators(classical_symbol(h, s), Mat3::Zero(), 1.0, s, spec.l_test);
                dev = operator_norm(gq.matrix() - gc.liouville.matrix());
                const double scale = operator_norm(gc.liouville.matrix());
                if (scale > 0.0) dev /= scale;
                break;
            }
            case ScanModel::IsotropicBilinear: {
                const double gamma = spec.gamma0 / s;
                const double temperature = spec.temperature0 * s;
                const SpinExpression h = -1.0 * SpinExpression::linear(to_array(spec.b));
                const BathSpec bath = BathSpec::bilinear(spec.xi, gamma, temperature);
                const PhaseSpaceOperator gq = qfp_generator(h, bath, ctx, sigma, spec.l_test);
                const ClassicalGenerators gc = classical_generators(
                    classical_symbol(h, s), bilinear_damping_tensor(spec.xi, gamma, s), temperature, s, spec.l_test);
                dev = operator_norm(gq.matrix() - gc.fokker_planck.matrix()) / operator_norm(gc.fokker_planck.matrix());
                break;
            }
            case ScanModel::Asymptotics: {
                const BoppCoefficients exact(ctx, sigma);
                for (int l = 0; l <= spec.l_test; ++l) {
                    const AsymptoticCoefficients a = asymptotic_coefficients(ctx, sigma, l);
                    dev = std::max({dev, std::abs(exact.f1(l) - a.f1), std::abs(exact.f2(l) - a.f2)});
                }
                break;
            }
        }
        if (!std::isfinite(dev)) throw NumericalError("classical_limit_scan: non-finite deviation");
        out.rows.push_back({ts, dev});
        xs.push_back(s);
        ys.push_back(dev);
    }
    out.slope = log_log_slope(xs, ys);
    return out;
}

}  // namespace swspin
