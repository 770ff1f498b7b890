#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "specport/error.hpp"
#include "specport/optimizer.hpp"
#include "test_support.hpp"

using namespace specport;
using specport::testing::cd;

namespace {

struct Problem {
    FrequencyGrid grid;
    Eigen::Index n_assets;
    AugmentedVector mean;
    Eigen::MatrixXcd cov;
};

Problem random_problem(std::uint64_t seed, std::vector<std::int64_t> periods = {12, 6},
                       Eigen::Index n_assets = 2) {
    std::mt19937_64 rng(seed);
    Problem p{FrequencyGrid::from_periods(std::move(periods)), n_assets, {}, {}};
    const Eigen::Index K = static_cast<Eigen::Index>(p.grid.size()) * n_assets;
    p.mean = AugmentedVector::from_upper(specport::testing::random_complex(K, rng));
    p.cov = specport::testing::random_augmented_cov(K, rng);
    return p;
}

// Projected gradient ascent of Re(m^H w) over {w : w^H C w <= s^2} in the
// whitened coordinates v = C^{1/2} w, where the feasible set is a ball.
Eigen::VectorXcd pga_oracle(const Eigen::VectorXcd& m, const Eigen::MatrixXcd& C, double s) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(C);
    const Eigen::MatrixXcd Cinvhalf =
        eig.eigenvectors() * eig.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
        eig.eigenvectors().adjoint();
    const Eigen::VectorXcd grad = Cinvhalf * m;  // d/dv of Re(m^H C^{-1/2} v)
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(m.size());
    const double step = 0.1 * s / grad.norm();
    for (int it = 0; it < 5000; ++it) {
        v += step * grad;
        const double n = v.norm();
        if (n > s) v *= s / n;
    }
    return Cinvhalf * v;
}

double objective(const Eigen::VectorXcd& m, const Eigen::VectorXcd& w) { return m.dot(w).real(); }

}  // namespace

TEST(SpectralMvo, MeetsVarianceTargetAndKkt) {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto p = random_problem(seed);
        RiskSpec risk{0.05, 0.0};
        const auto sol = solve_spectral_mvo(p.grid, p.n_assets, p.mean, p.cov, risk);
        const Eigen::VectorXcd w = sol.weights.stacked();
        EXPECT_NEAR(w.dot(p.cov * w).real(), 0.05 * 0.05, 1e-10 * 0.05 * 0.05);
        // Stationarity: m = 2 lambda C w.
        const Eigen::VectorXcd m = p.mean.stacked();
        EXPECT_LE((m - 2.0 * sol.lambda * (p.cov * w)).cwiseAbs().maxCoeff(), 1e-10 * m.norm());
        EXPECT_TRUE(sol.weights.enforced_symmetric());
        EXPECT_EQ(sol.ridge, 0.0);
    }
}

TEST(SpectralMvo, AgreesWithProjectedGradientOracle) {
    for (std::uint64_t seed = 20; seed < 25; ++seed) {
        const auto p = random_problem(seed, {12, 6, 4}, 2);
        RiskSpec risk{0.02, 0.0};
        const auto sol = solve_spectral_mvo(p.grid, p.n_assets, p.mean, p.cov, risk);
        const Eigen::VectorXcd oracle = pga_oracle(p.mean.stacked(), p.cov, 0.02);
        const Eigen::VectorXcd w = sol.weights.stacked();
        const double f = objective(p.mean.stacked(), w), g = objective(p.mean.stacked(), oracle);
        EXPECT_NEAR(f, g, 1e-6 * std::abs(g));
        EXPECT_LE((w - oracle).norm(), 1e-6 * oracle.norm());
    }
}

TEST(SpectralMvo, BeatsRandomFeasiblePoints) {
    const auto p = random_problem(30);
    const auto sol = solve_spectral_mvo(p.grid, p.n_assets, p.mean, p.cov, RiskSpec{0.01, 0.0});
    const Eigen::VectorXcd m = p.mean.stacked();
    const double best = objective(m, sol.weights.stacked());
    std::mt19937_64 rng(31);
    for (int k = 0; k < 1000; ++k) {
        const Eigen::VectorXcd u = specport::testing::random_complex(p.mean.half_size(), rng);
        Eigen::VectorXcd w(2 * u.size());
        w << u, u.conjugate();
        w *= 0.01 / std::sqrt(w.dot(p.cov * w).real());
        EXPECT_LE(objective(m, w), best + 1e-15);
    }
}

TEST(SpectralMvo, ScalingProperties) {
    const auto p = random_problem(40);
    const auto base = solve_spectral_mvo(p.grid, p.n_assets, p.mean, p.cov, RiskSpec{0.01, 0.0});
    const auto bigger_mean =
        solve_spectral_mvo(p.grid, p.n_assets, p.mean.scaled(7.0), p.cov, RiskSpec{0.01, 0.0});
    EXPECT_LE((base.weights.stacked() - bigger_mean.weights.stacked()).norm(), 1e-12);
    EXPECT_NEAR(bigger_mean.lambda, 7.0 * base.lambda, 1e-10 * base.lambda);
    const auto double_sigma =
        solve_spectral_mvo(p.grid, p.n_assets, p.mean, p.cov, RiskSpec{0.02, 0.0});
    EXPECT_LE((2.0 * base.weights.stacked() - double_sigma.weights.stacked()).norm(), 1e-12);
}

TEST(SpectralMvo, RidgeDefaultsAndOverrides) {
    const auto p = random_problem(50);
    const auto sol = solve_spectral_mvo(p.grid, p.n_assets, p.mean, p.cov, RiskSpec{});
    EXPECT_DOUBLE_EQ(sol.ridge, 1e-8 * p.cov.trace().real() / p.cov.rows());
    EXPECT_DOUBLE_EQ(default_ridge(p.cov), sol.ridge);
    EXPECT_EQ(sol.sigma0, 0.01);
    const auto big = solve_spectral_mvo(p.grid, p.n_assets, p.mean, p.cov, RiskSpec{0.01, 1e3});
    // A huge ridge makes the solution nearly proportional to m.
    const Eigen::VectorXcd w = big.weights.stacked(), m = p.mean.stacked();
    EXPECT_NEAR(std::abs(w.dot(m)) / (w.norm() * m.norm()), 1.0, 1e-3);
}

TEST(SpectralMvo, ErrorPaths) {
    const auto p = random_problem(60);
    EXPECT_THROW(solve_spectral_mvo(p.grid, p.n_assets, AugmentedVector::zero(4), p.cov, RiskSpec{}),
                 DegenerateMeanError);
    EXPECT_THROW(solve_spectral_mvo(p.grid, p.n_assets, p.mean, Eigen::MatrixXcd::Zero(8, 8),
                                    RiskSpec{0.01, 0.0}),
                 SingularityError);
    EXPECT_THROW(solve_spectral_mvo(p.grid, p.n_assets, p.mean, -p.cov, RiskSpec{0.01, 0.0}),
                 SingularityError);
    EXPECT_THROW(solve_spectral_mvo(p.grid, p.n_assets, p.mean, p.cov, RiskSpec{0.0, 0.0}),
                 ValidationError);
    EXPECT_THROW(solve_spectral_mvo(p.grid, p.n_assets, p.mean, p.cov, RiskSpec{0.01, -1.0}),
                 ValidationError);
    EXPECT_THROW(solve_spectral_mvo(p.grid, 3, p.mean, p.cov, RiskSpec{}), ValidationError);
    const AugmentedVector asym(p.mean.upper(), p.mean.upper());
    EXPECT_THROW(solve_spectral_mvo(p.grid, p.n_assets, asym, p.cov, RiskSpec{}), SymmetryError);
    // A zero covariance still solves with a positive ridge.
    EXPECT_NO_THROW(solve_spectral_mvo(p.grid, p.n_assets, p.mean, Eigen::MatrixXcd::Zero(8, 8),
                                       RiskSpec{0.01, 1e-6}));
}

TEST(Retrieval, RealPeriodicAndMatchesBasis) {
    const auto p = random_problem(70, {12, 6, 4}, 3);
    const auto sol = solve_spectral_mvo(p.grid, p.n_assets, p.mean, p.cov, RiskSpec{0.01, 0.0});
    const auto path = retrieve_allocation(sol, -5, 60);
    EXPECT_LE(path.max_imaginary_residual, 1e-12);
    EXPECT_EQ(path.size(), 60);
    EXPECT_TRUE(path.covers(-5));
    EXPECT_TRUE(path.covers(54));
    EXPECT_FALSE(path.covers(55));
    for (Eigen::Index r = 0; r + 12 < 60; ++r)
        EXPECT_LE((path.values.row(r) - path.values.row(r + 12)).cwiseAbs().maxCoeff(), 1e-15);
    const std::vector<double> w{2 * std::numbers::pi / 12, 2 * std::numbers::pi / 6,
                                2 * std::numbers::pi / 4};
    for (Eigen::Index r : {0, 7, 33}) {
        const Eigen::VectorXcd expected =
            specport::testing::oracle_basis(w, -5 + r, 3) * sol.weights.stacked();
        EXPECT_LE((path.values.row(r).transpose() - expected.real()).cwiseAbs().maxCoeff(), 1e-14);
    }
    EXPECT_THROW(retrieve_allocation(sol, 0, -1), ValidationError);
    EXPECT_EQ(retrieve_allocation(sol, 0, 0).size(), 0);
}

TEST(ClassicalMvo, DiagonalCovariance) {
    Eigen::VectorXd m(2);
    m << 1.0, 1.0;
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(2, 2);
    C(0, 0) = 1.0;
    C(1, 1) = 4.0;
    const auto w = solve_classical_mvo(m, C, RiskSpec{0.1, 0.0});
    EXPECT_NEAR(w.weights(0), 0.1 / std::sqrt(1.25), 1e-15);
    EXPECT_NEAR(w.weights(1), 0.025 / std::sqrt(1.25), 1e-15);
    EXPECT_NEAR(w.weights.dot(C * w.weights), 0.01, 1e-15);
    EXPECT_EQ(w.scheme, StaticScheme::ClassicalMvo);
    EXPECT_EQ(to_string(w.scheme), "classical-mvo");
}

TEST(ClassicalMvo, Errors) {
    EXPECT_THROW(solve_classical_mvo(Eigen::VectorXd::Zero(2), Eigen::MatrixXd::Identity(2, 2), RiskSpec{}),
                 DegenerateMeanError);
    EXPECT_THROW(solve_classical_mvo(Eigen::VectorXd::Ones(2), Eigen::MatrixXd::Ones(2, 2),
                                     RiskSpec{0.01, 0.0}),
                 SingularityError);
    EXPECT_THROW(solve_classical_mvo(Eigen::VectorXd::Ones(3), Eigen::MatrixXd::Identity(2, 2), RiskSpec{}),
                 ValidationError);
}

TEST(EqualWeight, SumsToOne) {
    const auto w = equal_weight(4);
    EXPECT_DOUBLE_EQ(w.weights.sum(), 1.0);
    EXPECT_EQ(to_string(w.scheme), "equal-weight");
    EXPECT_THROW(equal_weight(0), ValidationError);
}
