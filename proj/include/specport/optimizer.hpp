#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "specport/augmented_stats.hpp"
#include "specport/spectral_basis.hpp"

namespace specport {

/// Variance target and covariance regularization.
struct RiskSpec {
    double sigma0 = 0.01;  // target standard deviation per sample period
    /// Added to the covariance diagonal before solving. Unset means the
    /// scale-invariant default 1e-8 * trace(R) / dim.
    std::optional<double> ridge;

    void validate() const;
};

/// Default ridge 1e-8 * trace(cov) / dim.
double default_ridge(const Eigen::MatrixXcd& cov);

struct SpectralWeights {
    FrequencyGrid grid;
    Eigen::Index n_assets = 0;
    AugmentedVector weights;  // w(w), length 2MN
    double lambda = 0.0;      // realized Lagrange multiplier
    EstimatorMode mode = EstimatorMode::PaperLiteral;
    double sigma0 = 0.0;
    double ridge = 0.0;       // ridge actually applied
};

enum class StaticScheme { ClassicalMvo, EqualWeight };
std::string to_string(StaticScheme scheme);

struct StaticWeights {
    Eigen::VectorXd weights;
    StaticScheme scheme = StaticScheme::EqualWeight;
};

/// Rows are w(t) for t = first_index, first_index + 1, ...
struct AllocationPath {
    std::int64_t first_index = 0;
    Eigen::MatrixXd values;  // T x N
    double max_imaginary_residual = 0.0;

    Eigen::Index size() const { return values.rows(); }
    bool covers(std::int64_t t) const { return t >= first_index && t < first_index + size(); }
};

/// Closed-form spectral mean-variance solution
///   w = sigma0 R^{-1} m / sqrt(m^H R^{-1} m),  lambda = sqrt(m^H R^{-1} m) / (2 sigma0)
/// with R ridge-regularized. Throws DegenerateMeanError or SingularityError.
SpectralWeights solve_spectral_mvo(const SpectralMoments& moments, const RiskSpec& risk);

/// Same solve on raw augmented inputs; used by solve_spectral_mvo.
SpectralWeights solve_spectral_mvo(const FrequencyGrid& grid, Eigen::Index n_assets,
                                   const AugmentedVector& mean, const Eigen::MatrixXcd& cov,
                                   const RiskSpec& risk,
                                   EstimatorMode mode = EstimatorMode::PaperLiteral);

/// w(t) = Phi(t) w for t in [t_begin, t_begin + count).
AllocationPath retrieve_allocation(const SpectralWeights& weights, std::int64_t t_begin,
                                   std::int64_t count);

/// Variance-targeted Markowitz: w = sigma0 R^{-1} m / sqrt(m^T R^{-1} m).
StaticWeights solve_classical_mvo(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov,
                                  const RiskSpec& risk);

StaticWeights equal_weight(Eigen::Index n_assets);

}  // namespace specport
