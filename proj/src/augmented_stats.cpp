#include "specport/augmented_stats.hpp"

#include <cmath>

#include "specport/diagnostics.hpp"
#include "specport/error.hpp"

namespace specport {
namespace {

double two_m(const FrequencyGrid& grid) { return 2.0 * static_cast<double>(grid.size()); }

void check_panel(const ReturnsPanel& x) {
    if (x.n_periods() == 0) throw EmptyInputError("returns panel has no rows");
    if (x.n_assets() == 0) throw ValidationError("returns panel has no assets");
    if (x.n_periods() < 2) throw ValidationError("spectral estimation needs at least 2 rows");
    if (!x.returns.allFinite()) throw ValidationError("returns panel contains non-finite values");
}

const ReturnsPanel& windowed(const ReturnsPanel& x, const FrequencyGrid& grid,
                             const EstimationOptions& opts, ReturnsPanel& storage) {
    if (!opts.snap_to_commensurate) return x;
    const auto lcp = grid.least_common_period();
    if (lcp && x.n_periods() >= *lcp && x.n_periods() % *lcp == 0) return x;
    storage = commensurate_window(x, grid);
    return storage;
}

// Upper half of the mean at the plain time-average scale.
Eigen::VectorXcd literal_mean_upper(const ReturnsPanel& x, const FrequencyGrid& grid) {
    const Eigen::Index N = x.n_assets();
    const auto M = static_cast<Eigen::Index>(grid.size());
    Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(M * N);
    for (Eigen::Index t = 0; t < x.n_periods(); ++t) {
        const Eigen::VectorXcd ph = basis_phasors(grid, x.first_index + t);
        const Eigen::VectorXd xt = x.returns.row(t).transpose();
        for (Eigen::Index m = 0; m < M; ++m) acc.segment(m * N, N) += std::conj(ph(m)) * xt;
    }
    return acc / static_cast<double>(x.n_periods());
}

Eigen::MatrixXcd assemble(const Eigen::MatrixXcd& R, const Eigen::MatrixXcd& P) {
    const Eigen::Index K = R.rows();
    Eigen::MatrixXcd full(2 * K, 2 * K);
    full.topLeftCorner(K, K) = R;
    full.topRightCorner(K, K) = P;
    full.bottomLeftCorner(K, K) = P.conjugate();
    full.bottomRightCorner(K, K) = R.conjugate();
    return full;
}

SpectralMoments covariance_on_window(const ReturnsPanel& x, const FrequencyGrid& grid,
                                     const AugmentedVector& mean, const EstimationOptions& opts) {
    const Eigen::Index N = x.n_assets();
    const auto M = static_cast<Eigen::Index>(grid.size());
    const Eigen::Index K = M * N;
    if (mean.half_size() != K)
        throw ValidationError("spectral mean has length " + std::to_string(mean.size()) +
                              ", expected " + std::to_string(2 * K));
    if (!mean.is_conjugate_symmetric(1e-12))
        throw SymmetryError("spectral mean is not conjugate-symmetric");

    const double scale = opts.mode == EstimatorMode::Consistent ? two_m(grid) : 1.0;
    const Eigen::VectorXcd m_lit = mean.upper() / scale;

    Eigen::MatrixXcd R = Eigen::MatrixXcd::Zero(K, K);
    Eigen::MatrixXcd P = Eigen::MatrixXcd::Zero(K, K);
    Eigen::VectorXcd z(K);
    for (Eigen::Index t = 0; t < x.n_periods(); ++t) {
        const Eigen::VectorXcd ph = basis_phasors(grid, x.first_index + t);
        const Eigen::VectorXd xt = x.returns.row(t).transpose();
        if (opts.form == CovarianceForm::SpectralResidual) {
            for (Eigen::Index m = 0; m < M; ++m)
                z.segment(m * N, N) = std::conj(ph(m)) * xt - m_lit.segment(m * N, N);
        } else {
            // Fitted harmonic Phi(t) m = 2 Re(sum_m ph_m m_m), real by symmetry.
            Eigen::VectorXd fitted = Eigen::VectorXd::Zero(N);
            for (Eigen::Index m = 0; m < M; ++m)
                fitted += 2.0 * (ph(m) * m_lit.segment(m * N, N)).real();
            const Eigen::VectorXd s = xt - fitted;
            for (Eigen::Index m = 0; m < M; ++m) z.segment(m * N, N) = std::conj(ph(m)) * s;
        }
        R.noalias() += z * z.adjoint();
        P.noalias() += z * z.transpose();
    }
    const double inv_t = 1.0 / static_cast<double>(x.n_periods());
    Eigen::MatrixXcd cov = structure_project(assemble(R * inv_t, P * inv_t));
    if (opts.mode == EstimatorMode::Consistent) cov *= scale * scale;
    return SpectralMoments(grid, N, mean, std::move(cov), x.n_periods(), opts.mode, opts.form);
}

AugmentedVector mean_on_window(const ReturnsPanel& x, const FrequencyGrid& grid,
                               const EstimationOptions& opts) {
    Eigen::VectorXcd upper = literal_mean_upper(x, grid);
    if (opts.mode == EstimatorMode::Consistent) upper *= two_m(grid);
    return AugmentedVector::from_upper(std::move(upper));
}

}  // namespace

std::string to_string(EstimatorMode mode) {
    return mode == EstimatorMode::PaperLiteral ? "paper-literal" : "consistent";
}

std::string to_string(CovarianceForm form) {
    return form == CovarianceForm::SpectralResidual ? "spectral-residual" : "time-residual";
}

EstimatorMode parse_estimator_mode(const std::string& text) {
    if (text == "paper-literal") return EstimatorMode::PaperLiteral;
    if (text == "consistent") return EstimatorMode::Consistent;
    throw ValidationError("unknown estimator mode '" + text + "'");
}

CovarianceForm parse_covariance_form(const std::string& text) {
    if (text == "spectral-residual") return CovarianceForm::SpectralResidual;
    if (text == "time-residual") return CovarianceForm::TimeResidual;
    throw ValidationError("unknown covariance form '" + text + "'");
}

SpectralMoments::SpectralMoments(FrequencyGrid grid, Eigen::Index n_assets, AugmentedVector mean,
                                 Eigen::MatrixXcd covariance, Eigen::Index sample_count,
                                 EstimatorMode mode, CovarianceForm form)
    : grid_(std::move(grid)),
      n_assets_(n_assets),
      mean_(std::move(mean)),
      covariance_(std::move(covariance)),
      sample_count_(sample_count),
      mode_(mode),
      form_(form) {
    if (n_assets_ < 1) throw ValidationError("moments need at least one asset");
    const Eigen::Index K = half_size();
    if (mean_.half_size() != K)
        throw ValidationError("spectral mean length does not match 2MN = " +
                              std::to_string(2 * K));
    if (covariance_.rows() != 2 * K || covariance_.cols() != 2 * K)
        throw ValidationError("spectral covariance must be " + std::to_string(2 * K) + " x " +
                              std::to_string(2 * K));
    if (!mean_.is_conjugate_symmetric(1e-12))
        throw SymmetryError("spectral mean is not conjugate-symmetric");
}

Eigen::MatrixXcd SpectralMoments::R_block(Eigen::Index m, Eigen::Index n) const {
    return covariance_.block(m * n_assets_, n * n_assets_, n_assets_, n_assets_);
}

Eigen::MatrixXcd SpectralMoments::P_block(Eigen::Index m, Eigen::Index n) const {
    return covariance_.block(m * n_assets_, half_size() + n * n_assets_, n_assets_, n_assets_);
}

Eigen::Index commensurate_length(Eigen::Index T, const FrequencyGrid& grid) {
    const auto lcp = grid.least_common_period();
    if (!lcp || T < *lcp) return T;
    return (T / *lcp) * *lcp;
}

ReturnsPanel commensurate_window(const ReturnsPanel& x, const FrequencyGrid& grid) {
    const Eigen::Index T = x.n_periods();
    const auto lcp = grid.least_common_period();
    if (!lcp) {
        warn("grid has non-integer periods; estimation window cannot be made commensurate");
        return x;
    }
    if (T < *lcp) {
        warn("window of " + std::to_string(T) + " samples is shorter than the least common period " +
             std::to_string(*lcp) + "; bins will leak");
        return x;
    }
    const Eigen::Index keep = commensurate_length(T, grid);
    if (keep == T) return x;
    warn("discarding " + std::to_string(T - keep) +
         " oldest samples to make the window a multiple of " + std::to_string(*lcp));
    return x.slice(T - keep, keep);
}

AugmentedVector estimate_spectral_mean(const ReturnsPanel& x, const FrequencyGrid& grid,
                                       const EstimationOptions& opts) {
    check_panel(x);
    ReturnsPanel storage;
    return mean_on_window(windowed(x, grid, opts, storage), grid, opts);
}

SpectralMoments estimate_spectral_covariance(const ReturnsPanel& x, const FrequencyGrid& grid,
                                             const AugmentedVector& mean,
                                             const EstimationOptions& opts) {
    check_panel(x);
    ReturnsPanel storage;
    return covariance_on_window(windowed(x, grid, opts, storage), grid, mean, opts);
}

SpectralMoments estimate_moments(const ReturnsPanel& x, const FrequencyGrid& grid,
                                 const EstimationOptions& opts) {
    check_panel(x);
    ReturnsPanel storage;
    const ReturnsPanel& w = windowed(x, grid, opts, storage);
    const AugmentedVector mean = mean_on_window(w, grid, opts);
    return covariance_on_window(w, grid, mean, opts);
}

PsdMatrix compute_psd(const SpectralMoments& moments) {
    PsdMatrix out{moments.grid(), {}};
    const Eigen::Index N = moments.n_assets();
    for (Eigen::Index m = 0; m < moments.n_bins(); ++m) {
        const Eigen::VectorXcd mu = moments.mean().bin(m, N);
        Eigen::MatrixXcd psd = mu * mu.adjoint() + moments.R_block(m, m);
        out.bins.push_back(0.5 * (psd + psd.adjoint()));
    }
    return out;
}

PsdMatrix estimate_direct_psd(const ReturnsPanel& x, const FrequencyGrid& grid,
                              const EstimationOptions& opts) {
    check_panel(x);
    ReturnsPanel storage;
    const ReturnsPanel& w = windowed(x, grid, opts, storage);
    const Eigen::Index N = w.n_assets();
    const auto M = static_cast<Eigen::Index>(grid.size());

    std::vector<Eigen::MatrixXcd> acc(static_cast<std::size_t>(M), Eigen::MatrixXcd::Zero(N, N));
    for (Eigen::Index t = 0; t < w.n_periods(); ++t) {
        const Eigen::VectorXcd ph = basis_phasors(grid, w.first_index + t);
        const Eigen::VectorXd xt = w.returns.row(t).transpose();
        for (Eigen::Index m = 0; m < M; ++m) {
            const Eigen::VectorXcd y = std::conj(ph(m)) * xt;
            acc[static_cast<std::size_t>(m)].noalias() += y * y.adjoint();
        }
    }
    double scale = 1.0 / static_cast<double>(w.n_periods());
    if (opts.mode == EstimatorMode::Consistent) scale *= two_m(grid) * two_m(grid);
    PsdMatrix out{grid, {}};
    for (auto& a : acc) out.bins.push_back(a * scale);
    return out;
}

Eigen::MatrixXcd structure_project(const Eigen::MatrixXcd& raw) {
    if (raw.rows() != raw.cols() || raw.rows() % 2 != 0 || raw.rows() == 0)
        throw ValidationError("structure projection needs a non-empty square matrix of even size, got " +
                              std::to_string(raw.rows()) + " x " + std::to_string(raw.cols()));
    const Eigen::Index K = raw.rows() / 2;
    const Eigen::MatrixXcd H = 0.5 * (raw + raw.adjoint());
    const Eigen::MatrixXcd R = 0.5 * (H.topLeftCorner(K, K) + H.bottomRightCorner(K, K).conjugate());
    const Eigen::MatrixXcd P = 0.5 * (H.topRightCorner(K, K) + H.bottomLeftCorner(K, K).conjugate());
    return assemble(R, P);
}

double structure_deviation(const Eigen::MatrixXcd& m) {
    return (m - structure_project(m)).cwiseAbs().maxCoeff();
}

}  // namespace specport
