#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "swspin/bopp.hpp"

namespace swspin {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// H = -D_ij S_i S_j - B_i S_i with D symmetric.
struct QuadraticHamiltonian {
    Mat3 d = Mat3::Zero();
    Vec3 b = Vec3::Zero();

    void validate() const;
    SpinExpression expression() const;
};

/// System-bath coupling for the weak-coupling master equation.
struct BathSpec {
    SpinExpression coupling;
    /// Set for bilinear coupling F = xi . S.
    std::optional<Vec3> xi;
    double gamma = 0.0;
    double temperature = 1.0;

    static BathSpec bilinear(const Vec3& xi, double gamma, double temperature);

    /// Throws DomainError unless gamma >= 0, T > 0 and F is Hermitian.
    void validate(const SpinContext& ctx) const;
    /// gamma / (S T); the master equation assumes this is small.
    double validity_ratio(const SpinContext& ctx) const { return gamma / (ctx.spin() * temperature); }
};

/// 2 Im(O) as a complex-linear operator: (O - C O C) / i.
CMatrix twice_imaginary_part(const CMatrix& op);

/// d/dt W = 2 Im(H(B)) W. Same sign as d rho/dt = -i[H, rho]: for H = -B3 S3,
/// <S1> + i<S2> turns as exp(-i B3 t).
PhaseSpaceOperator unitary_generator(const SpinExpression& h, const SpinContext& ctx, Ordering sigma, int band_limit);
PhaseSpaceOperator unitary_generator(const SpinExpression& h, const SpinContext& ctx, Ordering sigma);

/// i B.L + 2i D_jk L_j (M_k f1 + K_k f2), the drift form of the
/// quadratic-Hamiltonian generator.
PhaseSpaceOperator quadratic_generator(const QuadraticHamiltonian& qh, const SpinContext& ctx, Ordering sigma,
                                       int band_limit);
PhaseSpaceOperator quadratic_generator(const QuadraticHamiltonian& qh, const SpinContext& ctx, Ordering sigma);

/// d rho/dt = -i[H, rho] - gamma T ([F, F rho] - (1/2T) [F, [H, F] rho] + h.c.)
CMatrix master_rhs(const CMatrix& rho, const CMatrix& h, const CMatrix& f, double gamma, double temperature);
CMatrix master_rhs(const CMatrix& rho, const CMatrix& h, const BathSpec& bath, const SpinContext& ctx);

/// The master equation as a matrix on vec(rho) (column-major).
CMatrix master_superoperator(const CMatrix& h, const CMatrix& f, double gamma, double temperature);

/// Phase-space form of the master equation:
/// 2 Im H(B) + 4 gamma T [Im^2 F(B) - (1/2T) Im F(B) Im [H(B), F(B)]].
PhaseSpaceOperator qfp_generator(const SpinExpression& h, const BathSpec& bath, const SpinContext& ctx, Ordering sigma,
                                 int band_limit);
PhaseSpaceOperator qfp_generator(const SpinExpression& h, const BathSpec& bath, const SpinContext& ctx, Ordering sigma);

/// The quantum correction vector M_a = [m_a (f1 - S) + K_a f2] / S of the
/// isotropic-spin Fokker-Planck equation; O(1/S) as S grows.
std::array<PhaseSpaceOperator, 3> m_vector_operators(const SpinContext& ctx, Ordering sigma, int band_limit);

/// Quantum Fokker-Planck generator for H = -B.S, F = xi.S assembled as the
/// drift-diffusion operator
///   -(1/S) d/dm . { m x B_eff - m x Lambda [ m x (B_eff - T d/dm) + M x B_eff ] }
/// with B_eff = S B and Lambda_jk = S gamma xi_j xi_k.
PhaseSpaceOperator isotropic_bilinear_generator(const Vec3& b, const Vec3& xi, double gamma, double temperature,
                                                const SpinContext& ctx, Ordering sigma, int band_limit);
PhaseSpaceOperator isotropic_bilinear_generator(const Vec3& b, const Vec3& xi, double gamma, double temperature,
                                                const SpinContext& ctx, Ordering sigma);

/// Lambda_jk = (gamma/S) dF/dm_j dF/dm_k for F = xi.S, i.e. S gamma xi_j xi_k.
Mat3 bilinear_damping_tensor(const Vec3& xi, double gamma, double spin);

/// Real polynomial in (m1, m2, m3).
class ClassicalPolynomial {
public:
    struct Monomial {
        double coeff;
        std::array<int, 3> powers;
    };

    ClassicalPolynomial() = default;
    explicit ClassicalPolynomial(std::vector<Monomial> terms) : terms_(std::move(terms)) {}

    static ClassicalPolynomial linear(const Vec3& v, double scale = 1.0);

    const std::vector<Monomial>& terms() const { return terms_; }
    int degree() const;
    ClassicalPolynomial derivative(int axis) const;
    double operator()(const Vec3& m) const;

    /// Multiplication by the polynomial, exact on l <= band_limit.
    PhaseSpaceOperator multiplication_operator(int band_limit) const;
    SparseCMatrix sparse_multiplication_operator(int band_limit) const;

private:
    std::vector<Monomial> terms_;
};

/// Leading-order classical symbol: each S_i -> S m_i (real parts of the
/// coefficients).
ClassicalPolynomial classical_symbol(const SpinExpression& expr, double spin);

struct ClassicalGenerators {
    PhaseSpaceOperator liouville;
    PhaseSpaceOperator fokker_planck;
};

/// Classical Liouville and rotational Fokker-Planck generators for the
/// Hamiltonian H(m), constant damping tensor Lambda and temperature T, exact
/// on l <= band_limit:
///   -(1/S) d/dm . { m x B_eff - m x Lambda [ m x (B_eff - T d/dm) ] },
/// B_eff = -dH/dm.
struct SparseClassicalGenerators {
    int band_limit = 0;
    SparseCMatrix liouville;
    SparseCMatrix fokker_planck;
};

/// Sparse form of classical_generators, for large band limits.
SparseClassicalGenerators classical_generators_sparse(const ClassicalPolynomial& hamiltonian, const Mat3& damping,
                                                      double temperature, double spin, int band_limit);

ClassicalGenerators classical_generators(const ClassicalPolynomial& hamiltonian, const Mat3& damping, double temperature,
                                         double spin, int band_limit);

enum class IntegrationMethod { Rk4, Expm };

IntegrationMethod parse_method(const std::string& name);
std::string to_string(IntegrationMethod method);

struct Trajectory {
    std::vector<double> times;
    std::vector<CVector> states;
};

/// x' = G x from t = 0 to t_end in steps of dt (the final step may be
/// shorter). Throws NumericalError on non-finite states.
Trajectory integrate(const CMatrix& generator, const CVector& initial, double t_end, double dt, IntegrationMethod method);

/// Classical RK4 for a general right-hand side.
Trajectory integrate_rk4(const std::function<CVector(const CVector&)>& rhs, const CVector& initial, double t_end,
                         double dt);

/// Spin coherent state U|S,S><S,S|U^dagger, U = exp(-i phi0 S3) exp(-i theta0 S2).
CMatrix coherent_state(const SpinContext& ctx, double theta0, double phi0);

/// exp(-i angle A) for Hermitian A.
CMatrix unitary_exp(const CMatrix& hermitian, double angle);

/// Stationary state of the master equation (null vector of the superoperator),
/// normalized to unit trace.
CMatrix stationary_state(const CMatrix& h, const CMatrix& f, double gamma, double temperature);

struct Observables {
    double s1, s2, s3, trace, purity;
};

struct EvolutionResult {
    std::vector<double> times;
    std::vector<SymbolCoefficients> states;
    std::vector<Observables> observables;
};

/// Integrates a phase-space generator and records <S_i>, trace and purity
/// computed from the symbols.
EvolutionResult evolve_symbol(const PhaseSpaceOperator& generator, const SymbolCoefficients& initial,
                              const SpinContext& ctx, Ordering sigma, double t_end, double dt,
                              IntegrationMethod method);

struct HilbertEvolution {
    std::vector<double> times;
    std::vector<CMatrix> states;
    std::vector<Observables> observables;
};

/// Master-equation evolution of a density matrix (the Hilbert-space oracle).
HilbertEvolution evolve_density_matrix(const CMatrix& h, const CMatrix& f, double gamma, double temperature,
                                       const CMatrix& rho0, double t_end, double dt, IntegrationMethod method);

Observables observables_of(const CMatrix& rho);

/// Writes `t,Sx,Sy,Sz,trace,purity` rows with 17 significant digits.
void write_trajectory_csv(std::ostream& out, const std::vector<double>& times, const std::vector<Observables>& obs);

/// Largest singular value.
double operator_norm(const CMatrix& op);

/// Least-squares slope of log(y) against log(x).
double log_log_slope(const std::vector<double>& x, const std::vector<double>& y);

enum class ScanModel { LinearUnitary, IsotropicBilinear, Asymptotics };

ScanModel parse_scan_model(const std::string& name);
std::string to_string(ScanModel model);

/// Parameters of a classical-limit scan. In the isotropic-bilinear model the
/// damping and temperature follow the classical scaling gamma = gamma0 / S,
/// T = T0 S, which keeps B_eff/T and the classical drift S-independent.
struct LimitScanSpec {
    ScanModel model = ScanModel::IsotropicBilinear;
    Vec3 b{0.0, 0.0, 1.0};
    Vec3 xi{1.0, 0.0, 0.0};
    double gamma0 = 1.0;
    double temperature0 = 1.0;
    std::vector<int> twice_s;
    double sigma = 0.0;
    int l_test = 3;
};

struct LimitScanRow {
    int twice_s;
    double deviation;
};

struct LimitScanResult {
    std::vector<LimitScanRow> rows;
    /// NaN when any deviation is zero.
    double slope;
};

LimitScanResult classical_limit_scan(const LimitScanSpec& spec);

}  // namespace swspin
