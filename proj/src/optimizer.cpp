#include "specport/optimizer.hpp"

#include <cmath>

#include "specport/error.hpp"

namespace specport {
namespace {

constexpr double kDegenerateMean = 1e-14;
constexpr double kMinRcond = 1e-15;

template <typename Matrix>
double applied_ridge(const RiskSpec& risk, const Matrix& cov) {
    if (risk.ridge) return *risk.ridge;
    if constexpr (std::is_same_v<Matrix, Eigen::MatrixXcd>)
        return default_ridge(cov);
    else
        return default_ridge(cov.template cast<cdouble>());
}

template <typename Matrix>
Eigen::LLT<Matrix> factorize(const Matrix& cov, double ridge) {
    Matrix reg = cov;
    reg.diagonal().array() += ridge;
    Eigen::LLT<Matrix> llt(reg);
    if (llt.info() != Eigen::Success || !(llt.rcond() > kMinRcond)) {
        if (ridge == 0.0)
            throw SingularityError("covariance is singular; supply a positive ridge");
        throw SingularityError("covariance is not positive definite even with ridge " +
                               std::to_string(ridge));
    }
    return llt;
}

}  // namespace

void RiskSpec::validate() const {
    if (!(sigma0 > 0.0) || !std::isfinite(sigma0))
        throw ValidationError("target volatility sigma0 must be positive");
    if (ridge && !(*ridge >= 0.0)) throw ValidationError("ridge must be non-negative");
}

double default_ridge(const Eigen::MatrixXcd& cov) {
    if (cov.rows() == 0) return 0.0;
    return 1e-8 * cov.trace().real() / static_cast<double>(cov.rows());
}

std::string to_string(StaticScheme scheme) {
    return scheme == StaticScheme::ClassicalMvo ? "classical-mvo" : "equal-weight";
}

SpectralWeights solve_spectral_mvo(const SpectralMoments& moments, const RiskSpec& risk) {
    return solve_spectral_mvo(moments.grid(), moments.n_assets(), moments.mean(),
                              moments.covariance(), risk, moments.mode());
}

SpectralWeights solve_spectral_mvo(const FrequencyGrid& grid, Eigen::Index n_assets,
                                   const AugmentedVector& mean, const Eigen::MatrixXcd& cov,
                                   const RiskSpec& risk, EstimatorMode mode) {
    risk.validate();
    const Eigen::Index K = static_cast<Eigen::Index>(grid.size()) * n_assets;
    if (mean.half_size() != K || cov.rows() != 2 * K || cov.cols() != 2 * K)
        throw ValidationError("spectral mean/covariance do not match 2MN = " + std::to_string(2 * K));
    if (!mean.is_conjugate_symmetric(1e-12))
        throw SymmetryError("spectral mean is not conjugate-symmetric");

    const Eigen::VectorXcd m = mean.stacked();
    if (m.norm() <= kDegenerateMean)
        throw DegenerateMeanError("spectral mean is zero; no return direction to optimize");

    const double ridge = applied_ridge(risk, cov);
    const auto llt = factorize<Eigen::MatrixXcd>(cov, ridge);
    const Eigen::VectorXcd rinv_m = llt.solve(m);
    const double q = m.dot(rinv_m).real();  // m^H R^{-1} m
    if (!(q > 0.0)) throw DegenerateMeanError("m^H R^{-1} m is not positive");

    const double root = std::sqrt(q);
    const Eigen::VectorXcd w = (risk.sigma0 / root) * rinv_m;

    SpectralWeights out;
    out.grid = grid;
    out.n_assets = n_assets;
    out.weights = AugmentedVector::from_stacked(w, /*enforce=*/true);
    out.lambda = root / (2.0 * risk.sigma0);
    out.mode = mode;
    out.sigma0 = risk.sigma0;
    out.ridge = ridge;
    return out;
}

AllocationPath retrieve_allocation(const SpectralWeights& weights, std::int64_t t_begin,
                                   std::int64_t count) {
    if (count < 0) throw ValidationError("allocation range has negative length");
    const Eigen::Index N = weights.n_assets;
    const auto M = static_cast<Eigen::Index>(weights.grid.size());
    if (weights.weights.half_size() != M * N)
        throw ValidationError("spectral weights do not match the grid");

    AllocationPath path;
    path.first_index = t_begin;
    path.values.resize(count, N);
    const auto& up = weights.weights.upper();
    const auto& lo = weights.weights.lower();
    for (std::int64_t r = 0; r < count; ++r) {
        const Eigen::VectorXcd ph = basis_phasors(weights.grid, t_begin + r);
        Eigen::VectorXcd w = Eigen::VectorXcd::Zero(N);
        for (Eigen::Index m = 0; m < M; ++m)
            w += ph(m) * up.segment(m * N, N) + std::conj(ph(m)) * lo.segment(m * N, N);
        path.max_imaginary_residual =
            std::max(path.max_imaginary_residual, w.imag().cwiseAbs().maxCoeff());
        path.values.row(r) = w.real().transpose();
    }
    return path;
}

StaticWeights solve_classical_mvo(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov,
                                  const RiskSpec& risk) {
    risk.validate();
    const Eigen::Index N = mean.size();
    if (N == 0 || cov.rows() != N || cov.cols() != N)
        throw ValidationError("mean and covariance dimensions disagree");
    if (mean.norm() <= kDegenerateMean)
        throw DegenerateMeanError("mean return vector is zero; no return direction to optimize");

    const double ridge = applied_ridge(risk, cov);
    const auto llt = factorize<Eigen::MatrixXd>(cov, ridge);
    const Eigen::VectorXd rinv_m = llt.solve(mean);
    const double q = mean.dot(rinv_m);
    if (!(q > 0.0)) throw DegenerateMeanError("m^T R^{-1} m is not positive");
    return StaticWeights{(risk.sigma0 / std::sqrt(q)) * rinv_m, StaticScheme::ClassicalMvo};
}

StaticWeights equal_weight(Eigen::Index n_assets) {
    if (n_assets < 1) throw ValidationError("equal weight needs at least one asset");
    return StaticWeights{Eigen::VectorXd::Constant(n_assets, 1.0 / static_cast<double>(n_assets)),
                         StaticScheme::EqualWeight};
}

}  // namespace specport
