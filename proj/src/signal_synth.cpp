#include "specport/signal_synth.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "specport/augmented_stats.hpp"
#include "specport/diagnostics.hpp"
#include "specport/error.hpp"

namespace specport {
namespace {

constexpr double kClipTolerance = 1e-10;

std::mt19937_64 stream_for(std::uint64_t seed, std::int64_t t) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(t), static_cast<std::uint32_t>(
                                                         static_cast<std::uint64_t>(t) >> 32)};
    return std::mt19937_64(seq);
}

}  // namespace

void SynthSpec::validate() const {
    if (n_assets < 1) throw ValidationError("synthesis needs at least one asset");
    const Eigen::Index K = static_cast<Eigen::Index>(grid.size()) * n_assets;
    if (spectral_mean.half_size() != K)
        throw ValidationError("spectral mean must have length 2MN = " + std::to_string(2 * K));
    if (!spectral_mean.is_conjugate_symmetric(1e-12))
        throw SymmetryError("spectral mean is not conjugate-symmetric");
    if (spectral_cov.rows() != 2 * K || spectral_cov.cols() != 2 * K)
        throw ValidationError("spectral covariance must be " + std::to_string(2 * K) + " square");
    const double scale = std::max(1.0, spectral_cov.cwiseAbs().maxCoeff());
    if (structure_deviation(spectral_cov) > 1e-12 * scale)
        throw ValidationError("spectral covariance lacks augmented Hermitian block structure");
    if (horizon < 1) throw ValidationError("horizon must be at least 1 sample");
    if (!(temporal_rho >= 0.0 && temporal_rho < 1.0))
        throw ValidationError("temporal correlation must lie in [0, 1)");
}

Eigen::MatrixXd real_composite_covariance(const Eigen::MatrixXcd& augmented) {
    if (augmented.rows() != augmented.cols() || augmented.rows() % 2 != 0)
        throw ValidationError("augmented covariance must be square with even size");
    const Eigen::Index K = augmented.rows() / 2;
    const Eigen::MatrixXcd R = augmented.topLeftCorner(K, K);
    const Eigen::MatrixXcd P = augmented.topRightCorner(K, K);
    // s = a + jb:  R = Caa + Cbb + j(Cba - Cab),  P = Caa - Cbb + j(Cba + Cab)
    Eigen::MatrixXd C(2 * K, 2 * K);
    C.topLeftCorner(K, K) = 0.5 * (R + P).real();
    C.bottomRightCorner(K, K) = 0.5 * (R - P).real();
    C.bottomLeftCorner(K, K) = 0.5 * (R + P).imag();
    C.topRightCorner(K, K) = 0.5 * (P - R).imag();
    return 0.5 * (C + C.transpose());
}

SpectralNoiseSampler::SpectralNoiseSampler(const SynthSpec& spec) {
    spec.validate();
    half_ = spec.spectral_cov.rows() / 2;
    if (spec.spectral_cov.cwiseAbs().maxCoeff() == 0.0) {
        zero_ = true;
        factor_ = Eigen::MatrixXd::Zero(2 * half_, 2 * half_);
        return;
    }
    const Eigen::MatrixXd C = real_composite_covariance(spec.spectral_cov);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(C);
    if (eig.info() != Eigen::Success)
        throw FactorizationError("eigen-decomposition of the spectral covariance failed", 0.0);
    Eigen::VectorXd lambda = eig.eigenvalues();
    const double tol = kClipTolerance * std::max(1.0, lambda.cwiseAbs().maxCoeff());
    const double lowest = lambda.minCoeff();
    if (lowest < -tol) {
        std::ostringstream os;
        os.precision(6);
        os << "spectral covariance is not positive semi-definite: eigenvalue " << lowest;
        throw FactorizationError(os.str(), lowest);
    }
    if (lowest < 0.0) {
        std::ostringstream os;
        os << "clipping " << (lambda.array() < 0.0).count()
           << " slightly negative eigenvalue(s) of the spectral covariance (lowest " << lowest << ")";
        warn(os.str());
    }
    lambda = lambda.cwiseMax(0.0);
    factor_ = eig.eigenvectors() * lambda.cwiseSqrt().asDiagonal();
}

Eigen::VectorXd SpectralNoiseSampler::draw_composite(std::mt19937_64& rng) const {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::VectorXd g(2 * half_);
    for (Eigen::Index i = 0; i < g.size(); ++i) g(i) = gauss(rng);
    if (zero_) return Eigen::VectorXd::Zero(2 * half_);
    return factor_ * g;
}

AugmentedVector SpectralNoiseSampler::from_composite(const Eigen::VectorXd& z) const {
    Eigen::VectorXcd upper(half_);
    for (Eigen::Index i = 0; i < half_; ++i) upper(i) = cdouble(z(i), z(half_ + i));
    return AugmentedVector::from_upper(std::move(upper));
}

AugmentedVector SpectralNoiseSampler::draw(std::mt19937_64& rng) const {
    return from_composite(draw_composite(rng));
}

AugmentedVector sample_spectral_noise(const SynthSpec& spec, std::int64_t t) {
    SpectralNoiseSampler sampler(spec);
    auto rng = stream_for(spec.seed, t);
    return sampler.draw(rng);
}

ReturnsPanel synthesize_panel(const SynthSpec& spec) {
    SpectralNoiseSampler sampler(spec);
    const Eigen::Index N = spec.n_assets;
    const auto M = static_cast<Eigen::Index>(spec.grid.size());
    const Eigen::Index K = M * N;
    const double rho = spec.temporal_rho;
    const double innovation_scale = std::sqrt(1.0 - rho * rho);

    Eigen::MatrixXd x(spec.horizon, N);
    Eigen::VectorXd state;
    for (Eigen::Index t = 0; t < spec.horizon; ++t) {
        auto rng = stream_for(spec.seed, t);
        const Eigen::VectorXd innovation = sampler.draw_composite(rng);
        if (t == 0 || rho == 0.0)
            state = innovation;
        else
            state = rho * state + innovation_scale * innovation;

        // x(t) = Phi(t)(m + s) = 2 Re(sum_m ph_m (m_m + s_m))
        const Eigen::VectorXcd ph = basis_phasors(spec.grid, t);
        Eigen::VectorXd xt = Eigen::VectorXd::Zero(N);
        for (Eigen::Index m = 0; m < M; ++m) {
            for (Eigen::Index i = 0; i < N; ++i) {
                const Eigen::Index k = m * N + i;
                const cdouble coef = spec.spectral_mean.upper()(k) + cdouble(state(k), state(K + k));
                xt(i) += 2.0 * (ph(m) * coef).real();
            }
        }
        x.row(t) = xt.transpose();
    }
    return ReturnsPanel::from_matrix(std::move(x), 12, 0);
}

ReturnsPanel synthesize_realization(const SynthSpec& spec, std::uint64_t realization) {
    SynthSpec copy = spec;
    copy.seed = spec.seed + realization;
    return synthesize_panel(copy);
}

Example1Layout example1_layout() { return Example1Layout{{2, 4}, 7, 1.0}; }

SynthSpec example1_scenario() {
    // Bins by increasing frequency: periods 48, 32, 24, 16, 12, 8, 6, 4.
    FrequencyGrid grid = FrequencyGrid::from_periods({48, 32, 24, 16, 12, 8, 6, 4});
    const Example1Layout layout = example1_layout();
    const Eigen::Index M = static_cast<Eigen::Index>(grid.size());
    const double two_m = 2.0 * static_cast<double>(M);

    // a cos(w t + phi) has coefficient (a sqrt(2M) / 2) e^{j phi}.
    const double a = layout.harmonic_amplitude;
    Eigen::VectorXcd mean = Eigen::VectorXcd::Zero(M);
    mean(layout.harmonic_bins[0]) = a * std::sqrt(two_m) / 2.0;
    mean(layout.harmonic_bins[1]) = std::polar(a * std::sqrt(two_m) / 2.0, std::numbers::pi / 3.0);

    // Time-domain noise variance is (1/M) sum_m R_m; total 100x harmonic power (a^2).
    const double noise_power = 100.0 * a * a;
    const double improper_share = 0.7;
    Eigen::VectorXd r(M);
    for (Eigen::Index m = 0; m < M; ++m)
        r(m) = static_cast<double>(M) * noise_power * (1.0 - improper_share) / static_cast<double>(M - 1);
    r(layout.improper_bin) = static_cast<double>(M) * noise_power * improper_share;

    Eigen::MatrixXcd cov = Eigen::MatrixXcd::Zero(2 * M, 2 * M);
    for (Eigen::Index m = 0; m < M; ++m) {
        cov(m, m) = r(m);
        cov(M + m, M + m) = r(m);
    }
    // Maximally improper: P = R.
    cov(layout.improper_bin, M + layout.improper_bin) = r(layout.improper_bin);
    cov(M + layout.improper_bin, layout.improper_bin) = r(layout.improper_bin);

    SynthSpec spec{std::move(grid), 1, AugmentedVector::from_upper(std::move(mean)),
                   std::move(cov), 12000, 1, 0.0};
    spec.validate();
    return spec;
}

ReturnsPanel synthesize_market(const MarketScenario& sc) {
    if (sc.n_assets < 1) throw ValidationError("market needs at least one asset");
    if (sc.noise_volatility < 0.0) throw ValidationError("noise volatility must be non-negative");
    FrequencyGrid grid = FrequencyGrid::from_periods(sc.periods, "month");
    const Eigen::Index N = sc.n_assets;
    const auto M = static_cast<Eigen::Index>(grid.size());
    const Eigen::Index K = M * N;

    std::mt19937_64 rng(sc.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    Eigen::VectorXcd mean(K);
    for (Eigen::Index k = 0; k < K; ++k)
        mean(k) = sc.seasonal_amplitude * cdouble(gauss(rng), gauss(rng));

    // Random correlation with unit diagonal.
    Eigen::MatrixXd L(N, N);
    for (Eigen::Index i = 0; i < N; ++i)
        for (Eigen::Index j = 0; j < N; ++j) L(i, j) = 0.3 * gauss(rng) + (i == j ? 1.0 : 0.0);
    Eigen::MatrixXd C = L * L.transpose();
    const Eigen::VectorXd d = C.diagonal().cwiseSqrt().cwiseInverse();
    C = d.asDiagonal() * C * d.asDiagonal();

    // Proper, bin-diagonal noise: per-bin R = sigma^2 C gives time variance sigma^2 C.
    const double var = sc.noise_volatility * sc.noise_volatility;
    Eigen::MatrixXcd cov = Eigen::MatrixXcd::Zero(2 * K, 2 * K);
    for (Eigen::Index m = 0; m < M; ++m) {
        cov.block(m * N, m * N, N, N) = (var * C).cast<cdouble>();
        cov.block(K + m * N, K + m * N, N, N) = (var * C).cast<cdouble>();
    }

    SynthSpec spec{std::move(grid), N, AugmentedVector::from_upper(std::move(mean)),
                   std::move(cov), sc.horizon, sc.seed ^ 0x9e3779b97f4a7c15ULL, 0.0};
    ReturnsPanel panel = synthesize_panel(spec);
    panel.returns.array() += sc.drift;
    return panel;
}

}  // namespace specport
