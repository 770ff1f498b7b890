#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Dense>

#include "specport/panel.hpp"
#include "specport/spectral_basis.hpp"

namespace specport {

/// Generative model x(t) = Phi(t) (m + s(t)), s(t) zero-mean improper
/// complex Gaussian with augmented covariance `spectral_cov`.
struct SynthSpec {
    FrequencyGrid grid;
    Eigen::Index n_assets = 1;
    AugmentedVector spectral_mean;      // coefficient scale, length 2MN
    Eigen::MatrixXcd spectral_cov;      // 2MN x 2MN augmented covariance
    Eigen::Index horizon = 1;           // T
    std::uint64_t seed = 0;
    /// AR(1) coefficient of s(t) across t; 0 draws s independently per t.
    double temporal_rho = 0.0;

    /// Throws ValidationError when any invariant fails.
    void validate() const;
};

/// Draws s(t) through a factorization of the real-composite covariance.
/// Constructed once per spec; eigenvalues in [-1e-10, 0) are clipped with a
/// warning, more negative ones raise FactorizationError.
class SpectralNoiseSampler {
public:
    explicit SpectralNoiseSampler(const SynthSpec& spec);

    /// One independent draw; conjugate-symmetric.
    AugmentedVector draw(std::mt19937_64& rng) const;

    /// Real composite [Re s; Im s] of one draw.
    Eigen::VectorXd draw_composite(std::mt19937_64& rng) const;

    AugmentedVector from_composite(const Eigen::VectorXd& z) const;

    bool is_zero() const { return zero_; }

private:
    Eigen::MatrixXd factor_;  // 2K x 2K, factor * factor^T = composite covariance
    Eigen::Index half_ = 0;
    bool zero_ = false;
};

/// Real 2K x 2K covariance of [Re s; Im s] equivalent to the augmented one.
Eigen::MatrixXd real_composite_covariance(const Eigen::MatrixXcd& augmented);

/// One draw of s(t, w) with an RNG seeded from (spec.seed, t). Independent across t.
AugmentedVector sample_spectral_noise(const SynthSpec& spec, std::int64_t t);

/// T x N real panel with integer timestamps 0..T-1.
ReturnsPanel synthesize_panel(const SynthSpec& spec);

/// Realization r uses seed spec.seed + r.
ReturnsPanel synthesize_realization(const SynthSpec& spec, std::uint64_t realization);

/// Two harmonics embedded in cyclostationary noise whose power is 100 times
/// the harmonic power; one noise bin is maximally improper.
SynthSpec example1_scenario();

/// Grid indices of the canned scenario's components.
struct Example1Layout {
    Eigen::Index harmonic_bins[2];
    Eigen::Index improper_bin;
    double harmonic_amplitude;
};
Example1Layout example1_layout();

/// Seasonal market: N assets with a random seasonal spectral mean on the
/// given periods and correlated proper white noise of monthly scale.
struct MarketScenario {
    Eigen::Index n_assets = 5;
    std::vector<std::int64_t> periods{12, 6};
    Eigen::Index horizon = 120;
    double seasonal_amplitude = 0.006;  // per-coefficient scale of the spectral mean
    double noise_volatility = 0.02;     // per-period volatility of each asset
    double drift = 0.0;                 // constant per-period return added to every asset
    std::uint64_t seed = 0;
};
ReturnsPanel synthesize_market(const MarketScenario& scenario);

}  // namespace specport
