#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "specport/panel.hpp"
#include "specport/spectral_basis.hpp"

namespace specport {

/// Scale of the estimates. The plain time-average estimators return spectral
/// coefficients attenuated by 1/(2M) (mean) and 1/(2M)^2 (covariance);
/// Consistent multiplies those factors back out.
enum class EstimatorMode { PaperLiteral, Consistent };

/// How the centred spectrum entering the covariance average is formed.
///   SpectralResidual: Phi^H(t) x(t) - m_hat, the LS spectrum minus its mean.
///   TimeResidual:     Phi^H(t) (x(t) - Phi(t) m_hat), the projected time residual.
/// Both give an exactly augmented, Hermitian PSD matrix. Only the first makes
/// the absolute moment split exactly into m m^H + R.
enum class CovarianceForm { SpectralResidual, TimeResidual };

std::string to_string(EstimatorMode mode);
std::string to_string(CovarianceForm form);
EstimatorMode parse_estimator_mode(const std::string& text);
CovarianceForm parse_covariance_form(const std::string& text);

struct EstimationOptions {
    EstimatorMode mode = EstimatorMode::PaperLiteral;
    CovarianceForm form = CovarianceForm::SpectralResidual;
    /// Trim the oldest rows so T is a multiple of the grid's least common period.
    bool snap_to_commensurate = true;
};

/// Centred augmented spectral moments on a grid.
///
/// `covariance` is 2MN x 2MN with blocks [[R, P], [conj(P), conj(R)]]; the
/// N x N block (m, n) of R is the dual-frequency covariance R(w_m, w_n).
class SpectralMoments {
public:
    SpectralMoments(FrequencyGrid grid, Eigen::Index n_assets, AugmentedVector mean,
                    Eigen::MatrixXcd covariance, Eigen::Index sample_count,
                    EstimatorMode mode, CovarianceForm form = CovarianceForm::SpectralResidual);

    const FrequencyGrid& grid() const { return grid_; }
    Eigen::Index n_assets() const { return n_assets_; }
    Eigen::Index n_bins() const { return static_cast<Eigen::Index>(grid_.size()); }
    Eigen::Index half_size() const { return n_bins() * n_assets_; }
    const AugmentedVector& mean() const { return mean_; }
    const Eigen::MatrixXcd& covariance() const { return covariance_; }
    Eigen::Index sample_count() const { return sample_count_; }
    EstimatorMode mode() const { return mode_; }
    CovarianceForm form() const { return form_; }

    Eigen::MatrixXcd R() const { return covariance_.topLeftCorner(half_size(), half_size()); }
    Eigen::MatrixXcd P() const { return covariance_.topRightCorner(half_size(), half_size()); }
    Eigen::MatrixXcd R_block(Eigen::Index m, Eigen::Index n) const;
    Eigen::MatrixXcd P_block(Eigen::Index m, Eigen::Index n) const;

private:
    FrequencyGrid grid_;
    Eigen::Index n_assets_;
    AugmentedVector mean_;
    Eigen::MatrixXcd covariance_;
    Eigen::Index sample_count_;
    EstimatorMode mode_;
    CovarianceForm form_;
};

/// Per-bin N x N absolute (non-centred) second moments.
struct PsdMatrix {
    FrequencyGrid grid;
    std::vector<Eigen::MatrixXcd> bins;
};

/// Largest multiple of the grid's least common period not exceeding T, or T
/// itself when the grid has no integer periods or T is shorter than one period.
Eigen::Index commensurate_length(Eigen::Index T, const FrequencyGrid& grid);

/// Drops the oldest rows so the window is commensurate; warns with the count.
ReturnsPanel commensurate_window(const ReturnsPanel& x, const FrequencyGrid& grid);

AugmentedVector estimate_spectral_mean(const ReturnsPanel& x, const FrequencyGrid& grid,
                                       const EstimationOptions& opts = {});

/// `mean` must come from estimate_spectral_mean on the same panel, grid and options.
SpectralMoments estimate_spectral_covariance(const ReturnsPanel& x, const FrequencyGrid& grid,
                                             const AugmentedVector& mean,
                                             const EstimationOptions& opts = {});

/// Two-pass mean then covariance over a single commensurate window.
SpectralMoments estimate_moments(const ReturnsPanel& x, const FrequencyGrid& grid,
                                 const EstimationOptions& opts = {});

/// m(w) m(w)^H + R(w) for every bin.
PsdMatrix compute_psd(const SpectralMoments& moments);

/// Direct absolute-moment estimate (1/T) sum_t y_m(t) y_m(t)^H with
/// y(t) = Phi^H(t) x(t), in the scale of `opts.mode`.
PsdMatrix estimate_direct_psd(const ReturnsPanel& x, const FrequencyGrid& grid,
                              const EstimationOptions& opts = {});

/// Orthogonal projection onto Hermitian matrices with augmented block
/// structure. Idempotent; only the shape (2K x 2K) is required.
Eigen::MatrixXcd structure_project(const Eigen::MatrixXcd& raw);

/// Largest elementwise distance between `m` and its structure projection.
double structure_deviation(const Eigen::MatrixXcd& m);

}  // namespace specport
