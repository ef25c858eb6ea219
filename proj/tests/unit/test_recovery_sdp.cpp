#include <gtest/gtest.h>

#include <cmath>

#include "sdr/errors.hpp"
#include "sdr/recovery_sdp.hpp"
#include "test_support.hpp"

using namespace sdr;
using sdr::fixture::as_sir;

namespace {

Matrix diag2(double a, double b)
{
    Matrix m = Matrix::Zero(2, 2);
    m(0, 0) = a;
    m(1, 1) = b;
    return m;
}

void expect_feasible(const SdpSolution& sol)
{
    EXPECT_NEAR(sol.z.trace(), 1.0, 1e-8);
    EXPECT_GE(fixture::min_eigenvalue(sol.z), -1e-8);
    EXPECT_TRUE(sol.z == sol.z.transpose());
    EXPECT_GE(sol.rank1_gap, -1e-8);
    EXPECT_LE(sol.rank1_gap, 1.0 + 1e-8);
}

SdpConfig config(double lambda, SdpBackend backend = SdpBackend::SplittingMethod)
{
    SdpConfig c;
    c.lambda = lambda;
    c.backend = backend;
    c.tol = 1e-9;
    return c;
}

}  // namespace

TEST(ProjectSimplex, Examples)
{
    Vector a(2), b(2);
    a << 2, 0;
    b << 0.8, 0.8;
    EXPECT_TRUE(project_simplex(a).isApprox(Vector::Unit(2, 0)));
    EXPECT_NEAR(project_simplex(b)[0], 0.5, 1e-15);
    EXPECT_NEAR(project_simplex(b)[1], 0.5, 1e-15);
}

TEST(ProjectSpectraplex, Examples)
{
    EXPECT_LT((project_spectraplex(diag2(2, 0)) - diag2(1, 0)).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((project_spectraplex(diag2(0.8, 0.8)) - diag2(0.5, 0.5)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(ProjectSpectraplex, FeasibleIdempotentAndOptimal)
{
    Engine e = make_engine(3);
    for (int trial = 0; trial < 100; ++trial) {
        const int p = 1 + static_cast<int>(e() % 9);
        const Matrix m = 2.0 * fixture::random_symmetric(p, e());
        const Matrix z = project_spectraplex(m);
        EXPECT_NEAR(z.trace(), 1.0, 1e-10);
        EXPECT_GE(fixture::min_eigenvalue(z), -1e-10);
        EXPECT_LT((project_spectraplex(z) - z).cwiseAbs().maxCoeff(), 1e-10);
        // Variational inequality <m - z, w - z> <= 0 for feasible w.
        for (int k = 0; k < 5; ++k) {
            const Matrix w = project_spectraplex(fixture::random_psd(p, e()));
            EXPECT_LE((m - z).cwiseProduct(w - z).sum(), 1e-10);
        }
    }
}

TEST(SdpSolve, DiagonalNoPenalty)
{
    for (SdpBackend b : {SdpBackend::SplittingMethod, SdpBackend::ConditionalGradient}) {
        const SdpSolution sol = sdp_solve(diag2(2, 1), config(0.0, b));
        EXPECT_TRUE(sol.converged);
        EXPECT_LT((sol.z - diag2(1, 0)).cwiseAbs().maxCoeff(), 1e-6);
        EXPECT_NEAR(sol.objective, 2.0, 1e-8);
    }
}

TEST(SdpSolve, AllOnesNoPenalty)
{
    const Matrix a = Matrix::Ones(2, 2);
    for (SdpBackend b : {SdpBackend::SplittingMethod, SdpBackend::ConditionalGradient}) {
        const SdpSolution sol = sdp_solve(a, config(0.0, b));
        EXPECT_LT((sol.z - 0.5 * Matrix::Ones(2, 2)).cwiseAbs().maxCoeff(), 1e-6);
        EXPECT_NEAR(sol.objective, 2.0, 1e-8);
    }
}

TEST(SdpSolve, HugePenaltyPicksLargestDiagonal)
{
    for (SdpBackend b : {SdpBackend::SplittingMethod, SdpBackend::ConditionalGradient}) {
        const SdpSolution sol = sdp_solve(diag2(2, 1), config(100.0, b));
        EXPECT_LT((sol.z - diag2(1, 0)).cwiseAbs().maxCoeff(), 1e-6);
        EXPECT_NEAR(sol.objective, 2.0 - 100.0, 1e-6);
    }
}

TEST(SdpSolve, NonSymmetricRejected)
{
    Matrix a = diag2(1, 1);
    a(0, 1) = 0.5;
    EXPECT_THROW(sdp_solve(a, SdpConfig{}), InvalidArgument);
}

TEST(SdpSolve, ConfigValidation)
{
    SdpConfig c;
    c.tol = 0.0;
    EXPECT_THROW(sdp_solve(diag2(1, 0), c), InvalidArgument);
    c = SdpConfig{};
    c.max_iter = 0;
    EXPECT_THROW(sdp_solve(diag2(1, 0), c), InvalidArgument);
    c = SdpConfig{};
    c.lambda = -1.0;
    EXPECT_THROW(sdp_solve(diag2(1, 0), c), InvalidArgument);
}

TEST(SdpSolve, FeasibleEvenWhenStoppedEarly)
{
    for (int trial = 0; trial < 10; ++trial) {
        const Matrix a = fixture::random_psd(8, 600 + static_cast<std::uint64_t>(trial));
        for (SdpBackend b : {SdpBackend::SplittingMethod, SdpBackend::ConditionalGradient}) {
            SdpConfig c = config(0.1, b);
            c.max_iter = 3;
            const SdpSolution sol = sdp_solve(a, c);
            EXPECT_LE(sol.iterations, 3);
            expect_feasible(sol);
        }
    }
}

TEST(SdpSolve, NoPenaltyMatchesTopEigenvector)
{
    int checked = 0;
    for (int trial = 0; checked < 30; ++trial) {
        const Matrix a = fixture::random_symmetric(7, 800 + static_cast<std::uint64_t>(trial));
        Eigen::SelfAdjointEigenSolver<Matrix> eig(a);
        if (eig.eigenvalues()[6] - eig.eigenvalues()[5] < 0.1)
            continue;
        ++checked;
        const SdpSolution sol = sdp_solve(a, config(0.0));
        EXPECT_LT(fixture::line_angle(sdp_principal_vector(sol), eig.eigenvectors().col(6)), 1e-5);
    }
}

TEST(SdpSolve, DominatesDtSirPoint)
{
    for (int trial = 0; trial < 20; ++trial) {
        const Matrix a = fixture::random_psd(8, 900 + static_cast<std::uint64_t>(trial));
        const double lambda = default_lambda(a, 3);
        const Vector b = principal_direction(a, dt_select(as_sir(a), 3));
        const Matrix bb = b * b.transpose();
        const SdpConfig c = config(lambda);
        const SdpSolution sol = sdp_solve(a, c);
        EXPECT_GE(sol.objective, sdp_objective(a, bb, lambda) - c.tol);
    }
}

TEST(SdpSolve, PermutationEquivariance)
{
    for (int trial = 0; trial < 10; ++trial) {
        const Matrix a = fixture::random_psd(6, 1000 + static_cast<std::uint64_t>(trial));
        const auto perm = fixture::random_permutation(6, static_cast<std::uint64_t>(trial));
        SdpConfig c = config(0.05);
        c.tol = 1e-11;
        c.max_iter = 100000;
        const SdpSolution s1 = sdp_solve(a, c);
        const SdpSolution s2 = sdp_solve(fixture::permute_sym(a, perm), c);
        EXPECT_NEAR(s1.objective, s2.objective, 1e-9);
        if (s1.rank1_gap < 1e-6)
            EXPECT_LT((s2.z - fixture::permute_sym(s1.z, perm)).cwiseAbs().maxCoeff(), 1e-6);
    }
}

TEST(SdpSolve, BackendsAgree)
{
    for (int trial = 0; trial < 10; ++trial) {
        const Matrix a = fixture::random_psd(5, 1100 + static_cast<std::uint64_t>(trial));
        for (double lambda : {0.0, 0.01, 0.1}) {
            const SdpSolution s1 = sdp_solve(a, config(lambda));
            const SdpSolution s2 = sdp_solve(a, config(lambda, SdpBackend::ConditionalGradient));
            EXPECT_NEAR(s1.objective, s2.objective, 1e-4);
            expect_feasible(s1);
            expect_feasible(s2);
        }
    }
}

TEST(SignRecover, Examples)
{
    Vector b(3);
    b << 1 / std::sqrt(2.0), -1 / std::sqrt(2.0), 0;
    SdpSolution sol;
    sol.z = b * b.transpose();
    EXPECT_EQ(sdp_sign_recover(sol, 2).signs, (std::vector<int>{1, -1, 0}));

    sol.z = Matrix::Identity(9, 9) / 9.0;
    EXPECT_EQ(sdp_sign_recover(sol, 2).s_hat(), 0);

    const SdpSolution diag = sdp_solve(diag2(2, 1), config(0.0));
    EXPECT_EQ(sdp_sign_recover(diag, 1).signs, (std::vector<int>{1, 0}));
}

TEST(Certificate, ExactRankOne)
{
    Vector beta(5);
    beta << 0.5, -0.5, 0.5, 0.5, 0.0;
    const Matrix a = 2.0 * beta * beta.transpose();
    const double lambda = 0.05;
    SdpConfig c = config(lambda);
    c.tol = 1e-10;
    const SdpSolution sol = sdp_solve(a, c);
    ASSERT_LT(sol.rank1_gap, 1e-6);
    EXPECT_TRUE(check_rank1_certificate(a, lambda, sol, 1e-6));
    EXPECT_EQ(sdp_sign_recover(sol, 4).signs, (std::vector<int>{1, -1, 1, 1, 0}));
}

TEST(Certificate, UndefinedForFlatSolution)
{
    SdpSolution sol;
    sol.z = 0.5 * Matrix::Identity(2, 2);
    sol.rank1_gap = 0.5;
    EXPECT_THROW(check_rank1_certificate(diag2(1, 1), 0.1, sol, 1e-6), CertificateUndefined);
}

TEST(Certificate, LargeOffSupportEntryFails)
{
    Vector beta(4);
    beta << 1 / std::sqrt(2.0), 1 / std::sqrt(2.0), 0, 0;
    Matrix a = 4.0 * beta * beta.transpose();
    a(2, 3) = a(3, 2) = 0.5;
    SdpSolution sol;
    sol.z = beta * beta.transpose();
    sol.rank1_gap = 0.0;
    EXPECT_FALSE(check_rank1_certificate(a, 0.1, sol, 1e-6));
}

TEST(DefaultLambda, Examples)
{
    Vector d(4);
    d << 0.10, 0.02, 0.08, 0.01;
    EXPECT_DOUBLE_EQ(default_lambda(Matrix(d.asDiagonal()), 2), 0.04);
    EXPECT_DOUBLE_EQ(default_lambda(Matrix(0.3 * Matrix::Identity(5, 5)), 4), 0.15);
    EXPECT_THROW(default_lambda(Matrix(d.asDiagonal()), 5), InvalidArgument);
}

TEST(DefaultLambda, TracksSignalScale)
{
    const int p = 40, s = 4;
    const SparseDirection beta = generate_beta(p, s, BetaScheme::Fixed, 0);
    const Dataset data = sample_sim(ModelSpec::named(Link::Linear, 1.0), beta, 200000, 8);
    const SirMatrix v = compute_sir(data, 10, SirMode::Raw, 0);
    // C_V = 1/(1+sigma^2) = 1/2 for the linear link with sigma = 1.
    const double target = 0.5 / (2.0 * s);
    EXPECT_NEAR(default_lambda(v, s), target, 0.2 * target);
}

TEST(SdpBackend, ParseNames)
{
    EXPECT_EQ(parse_sdp_backend("admm"), SdpBackend::SplittingMethod);
    EXPECT_EQ(parse_sdp_backend("cg"), SdpBackend::ConditionalGradient);
    EXPECT_FALSE(parse_sdp_backend("ipm").has_value());
}
