#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "specport/augmented_stats.hpp"
#include "specport/diagnostics.hpp"
#include "specport/error.hpp"
#include "specport/signal_synth.hpp"
#include "test_support.hpp"

using namespace specport;
using specport::testing::cd;

namespace {

SynthSpec small_spec(std::uint64_t seed = 4) {
    std::mt19937_64 rng(seed);
    SynthSpec s;
    s.grid = FrequencyGrid::from_periods({12, 6});
    s.n_assets = 2;
    s.spectral_mean = AugmentedVector::from_upper(specport::testing::random_complex(4, rng));
    s.spectral_cov = specport::testing::random_augmented_cov(4, rng);
    s.horizon = 24;
    s.seed = seed;
    return s;
}

}  // namespace

TEST(SynthSpec, ValidationErrors) {
    EXPECT_NO_THROW(small_spec().validate());
    {
        auto s = small_spec();
        s.n_assets = 0;
        EXPECT_THROW(s.validate(), ValidationError);
    }
    {
        auto s = small_spec();
        s.spectral_mean = AugmentedVector::zero(3);
        EXPECT_THROW(s.validate(), ValidationError);
    }
    {
        auto s = small_spec();
        s.spectral_mean = AugmentedVector(s.spectral_mean.upper(), s.spectral_mean.upper());
        EXPECT_THROW(s.validate(), SymmetryError);
    }
    {
        auto s = small_spec();
        s.spectral_cov = Eigen::MatrixXcd::Identity(6, 6);
        EXPECT_THROW(s.validate(), ValidationError);
    }
    {
        auto s = small_spec();
        s.spectral_cov(0, 1) += cd(0.5, 0);
        EXPECT_THROW(s.validate(), ValidationError);
    }
    {
        auto s = small_spec();
        s.horizon = 0;
        EXPECT_THROW(s.validate(), ValidationError);
    }
    {
        auto s = small_spec();
        s.temporal_rho = 1.0;
        EXPECT_THROW(s.validate(), ValidationError);
        s.temporal_rho = -0.1;
        EXPECT_THROW(s.validate(), ValidationError);
    }
}

TEST(RealComposite, InvertsTheAugmentedMap) {
    // Build a real composite covariance, map it to (R, P) by hand, map back.
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g(0.0, 1.0);
    const Eigen::Index K = 3;
    Eigen::MatrixXd A(2 * K, 2 * K);
    for (auto& v : A.reshaped()) v = g(rng);
    const Eigen::MatrixXd C = A * A.transpose();
    const Eigen::MatrixXd Caa = C.topLeftCorner(K, K), Cbb = C.bottomRightCorner(K, K);
    const Eigen::MatrixXd Cab = C.topRightCorner(K, K), Cba = C.bottomLeftCorner(K, K);
    Eigen::MatrixXcd R(K, K), P(K, K);
    for (Eigen::Index r = 0; r < K; ++r)
        for (Eigen::Index c = 0; c < K; ++c) {
            R(r, c) = cd(Caa(r, c) + Cbb(r, c), Cba(r, c) - Cab(r, c));
            P(r, c) = cd(Caa(r, c) - Cbb(r, c), Cba(r, c) + Cab(r, c));
        }
    Eigen::MatrixXcd aug(2 * K, 2 * K);
    aug << R, P, P.conjugate(), R.conjugate();
    EXPECT_LE((real_composite_covariance(aug) - C).cwiseAbs().maxCoeff(), 1e-13);
    EXPECT_THROW(real_composite_covariance(Eigen::MatrixXcd::Zero(3, 3)), ValidationError);
}

TEST(NoiseSampler, MonteCarloCovarianceMatchesSpec) {
    const auto spec = small_spec(6);
    SpectralNoiseSampler sampler(spec);
    std::mt19937_64 rng(7);
    const int n = 40000;
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(8, 8);
    for (int k = 0; k < n; ++k) {
        const auto s = sampler.draw(rng);
        EXPECT_TRUE(s.enforced_symmetric());
        const Eigen::VectorXcd z = s.stacked();
        acc += z * z.adjoint();
    }
    acc /= n;
    const double scale = spec.spectral_cov.cwiseAbs().maxCoeff();
    // Sampling error of a second moment is about scale * sqrt(2 / n) ~ 0.007 * scale.
    EXPECT_LE((acc - spec.spectral_cov).cwiseAbs().maxCoeff(), 0.05 * scale);
}

TEST(NoiseSampler, FactorizationGuards) {
    auto spec = small_spec();
    spec.spectral_cov = -spec.spectral_cov;
    EXPECT_THROW(SpectralNoiseSampler{spec}, FactorizationError);
    try {
        SpectralNoiseSampler{spec};
    } catch (const FactorizationError& e) {
        EXPECT_LT(e.eigenvalue(), 0.0);
    }

    // Rank-one improper covariance (P = R) has a numerically zero eigenvalue
    // that may come out slightly negative; it must never throw.
    SynthSpec deg = small_spec();
    deg.n_assets = 1;
    deg.grid = FrequencyGrid::from_periods({12});
    deg.spectral_mean = AugmentedVector::zero(1);
    deg.spectral_cov = Eigen::MatrixXcd::Constant(2, 2, cd(3.0, 0));
    SpectralNoiseSampler sampler(deg);
    std::mt19937_64 rng(1);
    const auto s = sampler.draw(rng);
    EXPECT_NEAR(s.upper()(0).imag(), 0.0, 1e-7);  // P = R means s is real

    deg.spectral_cov.setZero();
    EXPECT_TRUE(SpectralNoiseSampler(deg).is_zero());
}

TEST(NoiseSampler, ClipsTinyNegativeEigenvalues) {
    SynthSpec s = small_spec();
    s.n_assets = 1;
    s.grid = FrequencyGrid::from_periods({12});
    s.spectral_mean = AugmentedVector::zero(1);
    s.spectral_cov = Eigen::MatrixXcd::Zero(2, 2);
    // Composite eigenvalues: 1 and -5e-12.
    s.spectral_cov(0, 0) = s.spectral_cov(1, 1) = cd(1.0 - 5e-12, 0);
    s.spectral_cov(0, 1) = s.spectral_cov(1, 0) = cd(1.0 + 5e-12, 0);
    WarningCapture cap;
    SpectralNoiseSampler sampler(s);
    EXPECT_TRUE(cap.contains("clipping 1"));
}

TEST(Synthesis, DeterministicAndSeedSensitive) {
    const auto spec = small_spec(8);
    const auto a = synthesize_panel(spec);
    const auto b = synthesize_panel(spec);
    EXPECT_EQ(a.returns, b.returns);
    const auto c = synthesize_realization(spec, 1);
    EXPECT_GT((a.returns - c.returns).cwiseAbs().maxCoeff(), 1e-6);
    auto shifted = spec;
    shifted.seed += 1;
    EXPECT_EQ(synthesize_panel(shifted).returns, c.returns);
    EXPECT_EQ(a.n_periods(), 24);
    EXPECT_EQ(a.n_assets(), 2);
}

TEST(Synthesis, MatchesBasisExpansion) {
    const auto spec = small_spec(9);
    const auto x = synthesize_panel(spec);
    for (std::int64_t t : {0, 5, 23}) {
        const auto noise = sample_spectral_noise(spec, t);
        const AugmentedVector total = AugmentedVector::from_upper(spec.spectral_mean.upper() + noise.upper());
        const auto oracle = specport::testing::oracle_basis({2 * std::numbers::pi / 12, 2 * std::numbers::pi / 6}, t, 2);
        const Eigen::VectorXcd xt = oracle * total.stacked();
        EXPECT_LE((x.returns.row(t).transpose() - xt.real()).cwiseAbs().maxCoeff(), 1e-12);
        EXPECT_LE(xt.imag().cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(Synthesis, Example1HarmonicsWithoutNoise) {
    auto spec = example1_scenario();
    spec.spectral_cov.setZero();
    spec.horizon = 96;
    const auto x = synthesize_panel(spec);
    const double a = example1_layout().harmonic_amplitude;
    for (int t = 0; t < 96; ++t) {
        const double expected = a * std::cos(2 * std::numbers::pi * t / 24) +
                                a * std::cos(2 * std::numbers::pi * t / 12 + std::numbers::pi / 3);
        EXPECT_NEAR(x.returns(t, 0), expected, 1e-12);
    }
}

TEST(Synthesis, Example1Layout) {
    const auto spec = example1_scenario();
    const auto lay = example1_layout();
    EXPECT_EQ(spec.grid.periods()[static_cast<std::size_t>(lay.harmonic_bins[0])], 24);
    EXPECT_EQ(spec.grid.periods()[static_cast<std::size_t>(lay.harmonic_bins[1])], 12);
    EXPECT_EQ(spec.grid.periods()[static_cast<std::size_t>(lay.improper_bin)], 4);
    const Eigen::Index M = 8, b = lay.improper_bin;
    EXPECT_EQ(spec.spectral_cov(b, M + b), spec.spectral_cov(b, b));
    // Time-domain noise power is 100 times the harmonic power.
    double noise = 0;
    for (Eigen::Index m = 0; m < M; ++m) noise += spec.spectral_cov(m, m).real() / M;
    EXPECT_NEAR(noise, 100.0 * lay.harmonic_amplitude * lay.harmonic_amplitude, 1e-9);
}

TEST(Synthesis, TemporalCorrelationKnob) {
    // Single Nyquist bin: x(t) = +-sqrt2 Re s(t), so corr(x_t, x_{t+1}) = -rho.
    WarningCapture quiet;
    SynthSpec s;
    s.grid = FrequencyGrid::from_periods({2});
    s.n_assets = 1;
    s.spectral_mean = AugmentedVector::zero(1);
    s.spectral_cov = Eigen::MatrixXcd::Identity(2, 2);
    s.horizon = 40000;
    s.seed = 3;
    s.temporal_rho = 0.8;
    const Eigen::VectorXd x = synthesize_panel(s).returns.col(0);
    const double var = x.squaredNorm() / x.size();
    const double lag = x.head(x.size() - 1).dot(x.tail(x.size() - 1)) / (x.size() - 1);
    EXPECT_NEAR(lag / var, -0.8, 0.02);
    EXPECT_NEAR(var, 1.0, 0.05);
}

TEST(Market, ShapesAndScales) {
    MarketScenario sc;
    sc.horizon = 6000;
    sc.seed = 2;
    sc.seasonal_amplitude = 0.0;
    const auto x = synthesize_market(sc);
    EXPECT_EQ(x.n_periods(), 6000);
    EXPECT_EQ(x.n_assets(), 5);
    for (Eigen::Index i = 0; i < 5; ++i) {
        const Eigen::VectorXd c = x.returns.col(i);
        const double sd = std::sqrt((c.array() - c.mean()).square().sum() / (c.size() - 1));
        EXPECT_NEAR(sd, sc.noise_volatility, 0.1 * sc.noise_volatility);
    }
    sc.drift = 0.01;
    const auto y = synthesize_market(sc);
    EXPECT_NEAR((y.returns - x.returns).mean(), 0.01, 1e-15);
    sc.n_assets = 0;
    EXPECT_THROW(synthesize_market(sc), ValidationError);
}
