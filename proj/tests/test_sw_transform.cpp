#include <gtest/gtest.h>

#include <cmath>

#include "swspin/sw_transform.hpp"
#include "test_support.hpp"

using namespace swspin;

namespace {

const double kSigmas[] = {-1.0, -0.5, 0.0, 0.5, 1.0};

// Quadrature of a symbol product against the invariant measure.
Complex integrate_product(const SpinContext& ctx, const SymbolCoefficients& a, const SymbolCoefficients& b) {
    const SphereGrid grid(ctx.band_limit(), measure_constant(ctx));
    return grid.integrate(grid.synthesize(a).cwiseProduct(grid.synthesize(b)));
}

}  // namespace

TEST(CgWeight, Examples) {
    for (int ts = 1; ts <= 10; ++ts) {
        const SpinContext ctx(ts);
        EXPECT_NEAR(cg_weight(ctx, 0), 1.0, 1e-14);
        double prev = 2.0;
        for (int l = 0; l <= ts; ++l) {
            const double w = cg_weight(ctx, l);
            EXPECT_GT(w, 0.0);
            EXPECT_LT(w, prev);
            prev = w;
            EXPECT_NEAR(w, clebsch_gordan(ts, ts, 2 * l, 0, ts, ts), 1e-13);
        }
        EXPECT_THROW(cg_weight(ctx, ts + 1), DomainError);
    }
    EXPECT_NEAR(cg_weight(SpinContext(1), 1), 1.0 / std::sqrt(3.0), 1e-15);
    EXPECT_TRUE(std::isfinite(log_cg_weight(SpinContext(4000), 4000)));
}

TEST(OperatorToSymbol, IdentityIsConstantOne) {
    for (int ts = 1; ts <= 6; ++ts)
        for (double s : kSigmas) {
            const SpinContext ctx(ts);
            const SymbolCoefficients w = operator_to_symbol(CMatrix::Identity(ts + 1, ts + 1), Ordering(s));
            EXPECT_NEAR(std::abs(w(0, 0) - std::sqrt(4.0 * kPi)), 0.0, 1e-13);
            EXPECT_NEAR(w.coefficients().tail(w.coefficients().size() - 1).norm(), 0.0, 1e-13);
        }
}

TEST(OperatorToSymbol, SpinComponentSymbol) {
    for (int ts = 1; ts <= 6; ++ts)
        for (double s : kSigmas) {
            const SpinContext ctx(ts);
            const double sp = ctx.spin();
            const SymbolCoefficients w = operator_to_symbol(spin_matrices(ctx).s3, Ordering(s));
            const double amp = std::sqrt(sp * (sp + 1.0)) * std::pow(sp / (sp + 1.0), -s / 2.0);
            // amp cos(theta) = amp sqrt(4 pi / 3) Y_10
            EXPECT_NEAR(std::abs(w(1, 0) - amp * std::sqrt(4.0 * kPi / 3.0)), 0.0, 1e-12);
            EXPECT_NEAR(w.coefficients().norm(), amp * std::sqrt(4.0 * kPi / 3.0), 1e-12);
        }
    const SymbolCoefficients half = operator_to_symbol(spin_matrices(SpinContext(1)).s3, Ordering::normal());
    const SphereGrid grid(1);
    const CVector v = grid.synthesize(half);
    for (int i = 0; i < grid.n_theta(); ++i) EXPECT_NEAR(v(i * grid.n_phi()).real(), 1.5 * std::cos(grid.theta(i)), 1e-14);
}

TEST(SymbolToOperator, RoundTripAndConstant) {
    std::mt19937_64 rng(23);
    for (int ts = 1; ts <= 5; ++ts)
        for (double s : {-1.0, 0.0, 1.0}) {
            const SpinContext ctx(ts);
            const CMatrix a = testkit::random_matrix(ts + 1, rng);
            EXPECT_LT(testkit::max_abs(symbol_to_operator(operator_to_symbol(a, Ordering(s)), Ordering(s), ctx) - a), 1e-12);
            SymbolCoefficients one(ts);
            one(0, 0) = std::sqrt(4.0 * kPi);
            EXPECT_LT(testkit::max_abs(symbol_to_operator(one, Ordering(s), ctx) - CMatrix::Identity(ts + 1, ts + 1)), 1e-13);
        }
    EXPECT_THROW(symbol_to_operator(SymbolCoefficients(3), Ordering(0.0), SpinContext(2)), DomainError);
}

TEST(SymbolToOperator, DualOrderingIsNotTheInverse) {
    std::mt19937_64 rng(29);
    const SpinContext ctx(3);
    const CMatrix a = testkit::random_hermitian(4, rng);
    EXPECT_LT(testkit::max_abs(symbol_to_operator(operator_to_symbol(a, Ordering(0.0)), Ordering(0.0), ctx) - a), 1e-12);
    for (double s : {-1.0, 1.0})
        EXPECT_GT(testkit::max_abs(symbol_to_operator(operator_to_symbol(a, Ordering(s)), Ordering(-s), ctx) - a), 1e-3);
}

TEST(ChangeOrdering, MatchesDirectMap) {
    std::mt19937_64 rng(31);
    const SpinContext ctx(4);
    const CMatrix a = testkit::random_matrix(5, rng);
    const SymbolCoefficients w = change_ordering(operator_to_symbol(a, Ordering(-0.3)), ctx, Ordering(-0.3), Ordering(0.8));
    EXPECT_LT((w.coefficients() - operator_to_symbol(a, Ordering(0.8)).coefficients()).norm(), 1e-12);
}

TEST(SymbolMap, LinearAndInvertible) {
    for (int ts = 1; ts <= 20; ts += 3)
        for (double s : {-1.0, 0.0, 1.0}) {
            const SwTransform sw{SpinContext(ts)};
            const CMatrix phi = sw.symbol_map_matrix(Ordering(s));
            const Eigen::JacobiSVD<CMatrix> svd(phi);
            const double cond = svd.singularValues()(0) / svd.singularValues()(svd.singularValues().size() - 1);
            EXPECT_TRUE(std::isfinite(cond));
            EXPECT_LT(cond, 1e12);
        }
    std::mt19937_64 rng(37);
    const SpinContext ctx(3);
    const CMatrix a = testkit::random_matrix(4, rng), b = testkit::random_matrix(4, rng);
    const Complex z{0.3, -1.7};
    const Ordering s(0.4);
    EXPECT_LT((operator_to_symbol(a + z * b, s).coefficients() -
               (operator_to_symbol(a, s).coefficients() + z * operator_to_symbol(b, s).coefficients()))
                  .norm(),
              1e-12);
}

// Postulates: reality, standardization, traciality, covariance.
TEST(Postulates, RealityStandardizationTracialityCovariance) {
    std::mt19937_64 rng(41);
    for (int ts = 1; ts <= 6; ++ts)
        for (double s : kSigmas) {
            const SpinContext ctx(ts);
            const Ordering sig(s);
            const CMatrix h = testkit::random_hermitian(ts + 1, rng);
            const CMatrix a = testkit::random_matrix(ts + 1, rng), b = testkit::random_matrix(ts + 1, rng);
            EXPECT_TRUE(operator_to_symbol(h, sig).is_real(1e-12));

            SymbolCoefficients one(ts);
            one(0, 0) = std::sqrt(4.0 * kPi);
            EXPECT_NEAR(std::abs(integrate_product(ctx, operator_to_symbol(a, sig), one) - a.trace()), 0.0, 1e-10);
            EXPECT_NEAR(std::abs(integrate_product(ctx, operator_to_symbol(a, sig), operator_to_symbol(b, sig.dual())) -
                                 (a * b).trace()),
                        0.0, 1e-10);

            const double alpha = 0.77;
            const CMatrix u = rotation_z(ctx, alpha);
            const SymbolCoefficients rotated = operator_to_symbol(u * a * u.adjoint(), sig);
            SymbolCoefficients shifted = operator_to_symbol(a, sig);
            for (int l = 0; l <= ts; ++l)
                for (int m = -l; m <= l; ++m) shifted(l, m) *= std::exp(-kI * (m * alpha));
            EXPECT_LT((rotated.coefficients() - shifted.coefficients()).cwiseAbs().maxCoeff(), 1e-12);
        }
}

TEST(Kernel, HermitianUnitTraceAndConsistentWithSymbols) {
    std::mt19937_64 rng(43);
    std::uniform_real_distribution<double> ang(0.0, kPi);
    for (int ts = 1; ts <= 4; ++ts)
        for (double s : {-1.0, 0.0, 1.0}) {
            const SpinContext ctx(ts);
            const CMatrix a = testkit::random_matrix(ts + 1, rng);
            const SymbolCoefficients w = operator_to_symbol(a, Ordering(s));
            for (int k = 0; k < 5; ++k) {
                const double th = ang(rng), ph = 2.0 * ang(rng);
                const CMatrix d = kernel_eval(ctx, Ordering(s), th, ph);
                EXPECT_LT(testkit::max_abs(d - d.adjoint()), 1e-12);
                EXPECT_NEAR(std::abs(d.trace() - 1.0), 0.0, 1e-12);
                Complex synth = 0.0;
                for (int l = 0; l <= ts; ++l)
                    for (int m = -l; m <= l; ++m) synth += w(l, m) * ylm_eval(l, m, th, ph);
                EXPECT_NEAR(std::abs((a * d).trace() - synth), 0.0, 1e-12);
            }
        }
}

TEST(Kernel, IntegratesToIdentity) {
    const SpinContext ctx(2);
    const SphereGrid grid(ctx.band_limit(), measure_constant(ctx));
    CMatrix acc = CMatrix::Zero(3, 3);
    for (int i = 0; i < grid.n_theta(); ++i)
        for (int j = 0; j < grid.n_phi(); ++j) {
            CVector pick = CVector::Zero(grid.size());
            pick(i * grid.n_phi() + j) = 1.0;
            acc += grid.integrate(pick) * kernel_eval(ctx, Ordering(0.0), grid.theta(i), grid.phi(j));
        }
    EXPECT_LT(testkit::max_abs(acc - CMatrix::Identity(3, 3)), 1e-10);
}

TEST(Expectation, ExamplesAndOrderingIndependence) {
    for (int ts = 1; ts <= 5; ++ts) {
        const SpinContext ctx(ts);
        const int n = ts + 1;
        const CMatrix id = CMatrix::Identity(n, n);
        for (double s : kSigmas)
            EXPECT_NEAR(std::abs(expectation(operator_to_symbol(id, Ordering(s)),
                                             operator_to_symbol(id / static_cast<double>(n), Ordering(-s)), ctx) -
                                 1.0),
                        0.0, 1e-12);
    }
    const SpinContext one(2);
    CMatrix top = CMatrix::Zero(3, 3);
    top(0, 0) = 1.0;
    EXPECT_NEAR(std::abs(expectation(operator_to_symbol(spin_matrices(one).s3, Ordering(0.3)),
                                     operator_to_symbol(top, Ordering(-0.3)), one) -
                         1.0),
                0.0, 1e-12);

    std::mt19937_64 rng(47);
    for (int ts = 1; ts <= 5; ++ts) {
        const SpinContext ctx(ts);
        const CMatrix a = testkit::random_hermitian(ts + 1, rng);
        const CMatrix rho = testkit::random_density(ts + 1, rng);
        const Complex exact = (a * rho).trace();
        for (double s : kSigmas)
            EXPECT_NEAR(std::abs(expectation(operator_to_symbol(a, Ordering(s)), operator_to_symbol(rho, Ordering(-s)), ctx) -
                                 exact),
                        0.0, 1e-12);
    }
    EXPECT_THROW(expectation(SymbolCoefficients(3), SymbolCoefficients(3), SpinContext(2)), DomainError);
}
