#include <gtest/gtest.h>

#include <cmath>

#include "swspin/su2.hpp"
#include "test_support.hpp"

using namespace swspin;

TEST(LogFactorial, SmallValues) {
    EXPECT_EQ(log_factorial(0), 0.0);
    EXPECT_EQ(log_factorial(1), 0.0);
    EXPECT_NEAR(log_factorial(5), std::log(120.0), 1e-14);
    EXPECT_NEAR(log_factorial(5), 4.787491743, 1e-9);
}

TEST(LogFactorial, MatchesCumulativeSumBeyondTable) {
    double acc = 0.0;
    for (int n = 1; n <= 3000; ++n) {
        acc += std::log(static_cast<double>(n));
        ASSERT_NEAR(log_factorial(n), acc, 1e-13 * acc) << n;
    }
    const LogFactorialTable table(10);
    EXPECT_EQ(table.bound(), 10);
    EXPECT_NEAR(table(7), std::log(5040.0), 1e-14);
    EXPECT_NEAR(table(20), log_factorial(20), 1e-12);
}

TEST(ClebschGordan, Examples) {
    for (int tj = 0; tj <= 6; ++tj)
        for (int tm = -tj; tm <= tj; tm += 2) EXPECT_NEAR(clebsch_gordan(tj, tm, 0, 0, tj, tm), 1.0, 1e-14);
    EXPECT_NEAR(clebsch_gordan(1, 1, 1, 1, 2, 2), 1.0, 1e-14);
    EXPECT_NEAR(clebsch_gordan(1, 1, 1, -1, 2, 0), 1.0 / std::sqrt(2.0), 1e-14);
    EXPECT_NEAR(clebsch_gordan(1, -1, 1, 1, 0, 0), -1.0 / std::sqrt(2.0), 1e-14);
}

TEST(ClebschGordan, SelectionRulesGiveZero) {
    EXPECT_EQ(clebsch_gordan(2, 0, 2, 2, 2, 0), 0.0);  // M != m1 + m2
    EXPECT_EQ(clebsch_gordan(2, 0, 2, 0, 6, 0), 0.0);  // triangle
    EXPECT_EQ(clebsch_gordan(4, 0, 2, 0, 0, 0), 0.0);  // triangle
}

TEST(ClebschGordan, InconsistentLabelsRejected) {
    EXPECT_THROW(clebsch_gordan(1, 0, 1, 1, 2, 1), DomainError);
    EXPECT_THROW(clebsch_gordan(2, 1, 2, 1, 4, 2), DomainError);
    EXPECT_THROW(clebsch_gordan(2, 4, 2, 0, 4, 4), DomainError);
}

TEST(ClebschGordan, Orthogonality) {
    for (int tj1 = 0; tj1 <= 12; ++tj1)
        for (int tj2 = 0; tj1 + tj2 <= 12; ++tj2)
            for (int tJ = std::abs(tj1 - tj2); tJ <= tj1 + tj2; tJ += 2)
                for (int tJp = std::abs(tj1 - tj2); tJp <= tj1 + tj2; tJp += 2)
                    for (int tM = -std::min(tJ, tJp); tM <= std::min(tJ, tJp); tM += 2) {
                        double acc = 0.0;
                        for (int tm1 = -tj1; tm1 <= tj1; tm1 += 2) {
                            const int tm2 = tM - tm1;
                            if (std::abs(tm2) > tj2) continue;
                            acc += clebsch_gordan(tj1, tm1, tj2, tm2, tJ, tM) * clebsch_gordan(tj1, tm1, tj2, tm2, tJp, tM);
                        }
                        ASSERT_NEAR(acc, tJ == tJp ? 1.0 : 0.0, 1e-12) << tj1 << ' ' << tj2 << ' ' << tJ << ' ' << tJp;
                    }
}

// Coupled states from diagonalizing the total-spin Casimir in the product
// basis; the highest-weight phase is fixed by <j1 j1; j2 J-j1 | J J> > 0 and
// lower states follow by applying J-.
TEST(ClebschGordan, MatchesCasimirDiagonalizationOracle) {
    for (int tj1 = 1; tj1 <= 5; ++tj1)
        for (int tj2 = 1; tj2 <= 5; ++tj2) {
            const SpinMatrices a = spin_matrices(SpinContext(tj1));
            const SpinMatrices b = spin_matrices(SpinContext(tj2));
            const int n1 = tj1 + 1, n2 = tj2 + 1;
            const CMatrix i1 = CMatrix::Identity(n1, n1), i2 = CMatrix::Identity(n2, n2);
            auto kron = [](const CMatrix& x, const CMatrix& y) {
                CMatrix out(x.rows() * y.rows(), x.cols() * y.cols());
                for (int r = 0; r < x.rows(); ++r)
                    for (int c = 0; c < x.cols(); ++c) out.block(r * y.rows(), c * y.cols(), y.rows(), y.cols()) = x(r, c) * y;
                return out;
            };
            std::array<CMatrix, 3> j;
            for (int k = 0; k < 3; ++k) j[static_cast<std::size_t>(k)] = kron(a[k], i2) + kron(i1, b[k]);
            const CMatrix j2 = j[0] * j[0] + j[1] * j[1] + j[2] * j[2];
            const CMatrix jminus = kron(a.s_minus, i2) + kron(i1, b.s_minus);
            const Eigen::SelfAdjointEigenSolver<CMatrix> es(j2);
            for (int tJ = std::abs(tj1 - tj2); tJ <= tj1 + tj2; tJ += 2) {
                const double jj = 0.25 * tJ * (tJ + 2);
                // Highest weight: eigenvector of J^2 with eigenvalue J(J+1) and J3 = J.
                CMatrix proj = CMatrix::Zero(n1 * n2, n1 * n2);
                for (int k = 0; k < es.eigenvalues().size(); ++k)
                    if (std::abs(es.eigenvalues()(k) - jj) < 1e-8)
                        proj += es.eigenvectors().col(k) * es.eigenvectors().col(k).adjoint();
                // Project every J3 = J product state and keep the largest image.
                CVector hw = CVector::Zero(n1 * n2);
                for (int i = 0; i < n1; ++i)
                    for (int k = 0; k < n2; ++k) {
                        if (tj1 - 2 * i + tj2 - 2 * k != tJ) continue;
                        const CVector img = proj.col(i * n2 + k);
                        if (img.norm() > hw.norm()) hw = img;
                    }
                hw /= hw.norm();
                const int k0 = (tj2 - (tJ - tj1)) / 2;  // m1 = j1, m2 = J - j1
                hw *= std::abs(hw(k0)) / hw(k0);
                CVector state = hw;
                for (int tM = tJ; tM >= -tJ; tM -= 2) {
                    for (int i = 0; i < n1; ++i)
                        for (int k = 0; k < n2; ++k) {
                            const int tm1 = tj1 - 2 * i, tm2 = tj2 - 2 * k;
                            const double expect = tm1 + tm2 == tM ? state(i * n2 + k).real() : 0.0;
                            ASSERT_NEAR(clebsch_gordan(tj1, tm1, tj2, tm2, tJ, tM), expect, 1e-12)
                                << tj1 << ' ' << tm1 << ' ' << tj2 << ' ' << tm2 << ' ' << tJ << ' ' << tM;
                        }
                    if (tM > -tJ) {
                        state = jminus * state;
                        state /= state.norm();
                    }
                }
            }
        }
}

TEST(SpinMatrices, SpinHalf) {
    const SpinMatrices s = spin_matrices(SpinContext(1));
    CMatrix expect(2, 2);
    expect << 0.5, 0, 0, -0.5;
    EXPECT_LT(testkit::max_abs(s.s3 - expect), 1e-15);
}

TEST(SpinMatrices, AlgebraAndCasimir) {
    for (int ts = 1; ts <= 20; ++ts) {
        const SpinContext ctx(ts);
        const SpinMatrices s = spin_matrices(ctx);
        const double sp = ctx.spin();
        const CMatrix id = CMatrix::Identity(ts + 1, ts + 1);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                CMatrix rhs = CMatrix::Zero(ts + 1, ts + 1);
                for (int k = 0; k < 3; ++k) rhs += kI * static_cast<double>(levi_civita(i, j, k)) * s[k];
                ASSERT_LT(testkit::max_abs(commutator(s[i], s[j]) - rhs), 1e-12) << ts;
            }
        EXPECT_LT(testkit::max_abs(s.s1 * s.s1 + s.s2 * s.s2 + s.s3 * s.s3 - sp * (sp + 1) * id), 1e-12);
        EXPECT_LT(testkit::max_abs(s.s1 - 0.5 * (s.s_plus + s.s_minus)), 1e-15);
        EXPECT_LT(testkit::max_abs(s.s2 - (s.s_plus - s.s_minus) / (2.0 * kI)), 1e-15);
        for (int r = 0; r <= ts; ++r) EXPECT_DOUBLE_EQ(s.s3(r, r).real(), sp - r);
    }
}

TEST(TensorOperator, SpinHalfExamples) {
    const SpinContext ctx(1);
    EXPECT_LT(testkit::max_abs(tensor_operator(ctx, 0, 0) - CMatrix::Identity(2, 2) / std::sqrt(2.0)), 1e-15);
    EXPECT_LT(testkit::max_abs(tensor_operator(ctx, 1, 0) - std::sqrt(2.0) * spin_matrices(ctx).s3), 1e-15);
}

TEST(TensorOperator, OrthonormalAndAdjointRelation) {
    for (int ts = 1; ts <= 6; ++ts) {
        const SpinContext ctx(ts);
        std::vector<CMatrix> t;
        for (int l = 0; l <= ts; ++l)
            for (int m = -l; m <= l; ++m) t.push_back(tensor_operator(ctx, l, m));
        const auto n = t.size();
        ASSERT_EQ(n, static_cast<std::size_t>(ctx.symbol_dim()));
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = 0; b < n; ++b)
                ASSERT_NEAR(std::abs((t[a].adjoint() * t[b]).trace() - (a == b ? 1.0 : 0.0)), 0.0, 1e-12);
        for (int l = 0; l <= ts; ++l)
            for (int m = -l; m <= l; ++m) {
                const double sign = (m % 2 == 0) ? 1.0 : -1.0;
                ASSERT_LT(testkit::max_abs(tensor_operator(ctx, l, m).adjoint() - sign * tensor_operator(ctx, l, -m)), 1e-14);
            }
    }
}

TEST(TensorOperator, RejectsShellBeyondTwoS) {
    EXPECT_THROW(tensor_operator(SpinContext(2), 3, 0), DomainError);
    EXPECT_THROW(tensor_operator(SpinContext(2), 1, 2), DomainError);
}

TEST(TensorBasis, ExpandResumRoundTripAndDenseAgreement) {
    std::mt19937_64 rng(11);
    for (int ts = 1; ts <= 8; ++ts) {
        const SpinContext ctx(ts);
        const TensorBasis basis(ctx);
        const CMatrix a = testkit::random_hermitian(ts + 1, rng);
        EXPECT_LT(testkit::max_abs(basis.resum(basis.expand(a)) - a), 1e-12);
        const CVector c = basis.expand(a);
        for (int l = 0; l <= ts; ++l)
            for (int m = -l; m <= l; ++m)
                ASSERT_NEAR(std::abs(c(l * l + l + m) - (tensor_operator(ctx, l, m).adjoint() * a).trace()), 0.0, 1e-12);
    }
}

TEST(RotationZ, Examples) {
    for (int ts = 1; ts <= 6; ++ts) {
        const SpinContext ctx(ts);
        const int n = ts + 1;
        EXPECT_LT(testkit::max_abs(rotation_z(ctx, 0.0) - CMatrix::Identity(n, n)), 1e-15);
        const CMatrix u = rotation_z(ctx, 0.83);
        EXPECT_LT(testkit::max_abs(u * u.adjoint() - CMatrix::Identity(n, n)), 1e-12);
        const CMatrix s3 = spin_matrices(ctx).s3;
        EXPECT_LT(testkit::max_abs(u * s3 * u.adjoint() - s3), 1e-12);
    }
    EXPECT_LT(testkit::max_abs(rotation_z(SpinContext(1), 2.0 * kPi) + CMatrix::Identity(2, 2)), 1e-12);
    EXPECT_LT(testkit::max_abs(rotation_z(SpinContext(2), 2.0 * kPi) - CMatrix::Identity(3, 3)), 1e-12);
}

TEST(SpinContext, DerivedDimensions) {
    const SpinContext ctx(3);
    EXPECT_EQ(ctx.hilbert_dim(), 4);
    EXPECT_EQ(ctx.band_limit(), 3);
    EXPECT_EQ(ctx.symbol_dim(), 16);
    EXPECT_DOUBLE_EQ(ctx.spin(), 1.5);
    EXPECT_THROW(SpinContext(0), DomainError);
    EXPECT_THROW(Ordering(1.5), DomainError);
}
