#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace specport {

using cdouble = std::complex<double>;

/// Discrete set of angular frequencies 0 < w_1 < ... < w_M <= pi.
///
/// A grid built from integer periods (in samples) remembers them; phases are
/// then reduced modulo the period so that the basis is exactly periodic and
/// sums over commensurate windows are free of argument-reduction drift.
class FrequencyGrid {
public:
    /// Empty placeholder; not a valid grid for any operation.
    FrequencyGrid() = default;

    /// Periods in samples, each >= 2. Order does not matter; bins are stored
    /// by increasing frequency (decreasing period). Duplicates are rejected.
    static FrequencyGrid from_periods(std::vector<std::int64_t> periods,
                                      std::string unit = "sample");

    /// Angular frequencies in radians per sample, strictly increasing in (0, pi].
    static FrequencyGrid from_omegas(std::vector<double> omegas,
                                     std::string unit = "sample");

    std::size_t size() const { return omegas_.size(); }
    std::span<const double> omegas() const { return omegas_; }
    double omega(std::size_t m) const { return omegas_[m]; }

    /// Integer period of each bin, empty when the grid was given as
    /// frequencies that are not 2*pi/integer.
    const std::vector<std::int64_t>& periods() const { return periods_; }

    /// Least common multiple of the bin periods, when all are integers.
    std::optional<std::int64_t> least_common_period() const;

    /// Phase angle w_m * t, reduced into [0, 2*pi) when the period is known.
    double phase(std::size_t m, std::int64_t t) const;

    const std::string& unit() const { return unit_; }
    bool has_nyquist() const;

    /// Comma-separated periods ("12,6,3") or frequencies when periods are unknown.
    std::string describe() const;

    friend bool operator==(const FrequencyGrid&, const FrequencyGrid&) = default;

private:
    void validate() const;

    std::vector<double> omegas_;
    std::vector<std::int64_t> periods_;
    std::string unit_;
};

/// Stacked complex vector [upper; lower] of length 2*M*N. Entry (m, i) of the
/// upper half sits at index m*N + i.
class AugmentedVector {
public:
    AugmentedVector() = default;

    /// General pair; the conjugate-symmetry flag is cleared.
    AugmentedVector(Eigen::VectorXcd upper, Eigen::VectorXcd lower);

    /// Conjugate-symmetric vector with lower = conj(upper).
    static AugmentedVector from_upper(Eigen::VectorXcd upper);

    /// Splits a stacked 2K vector; symmetric flag is set only if `enforce`,
    /// in which case the lower half is rebuilt as conj(upper) after averaging
    /// the two halves.
    static AugmentedVector from_stacked(const Eigen::VectorXcd& stacked, bool enforce);

    static AugmentedVector zero(Eigen::Index half_size);

    const Eigen::VectorXcd& upper() const { return upper_; }
    const Eigen::VectorXcd& lower() const { return lower_; }
    Eigen::Index half_size() const { return upper_.size(); }
    Eigen::Index size() const { return 2 * upper_.size(); }

    /// True when built through a constructor that enforces lower = conj(upper).
    bool enforced_symmetric() const { return symmetric_; }
    bool is_conjugate_symmetric(double tol = 0.0) const;

    Eigen::VectorXcd stacked() const;

    /// N-vector of bin m (upper half).
    Eigen::VectorXcd bin(Eigen::Index m, Eigen::Index n_assets) const {
        return upper_.segment(m * n_assets, n_assets);
    }

    AugmentedVector scaled(double factor) const;

private:
    Eigen::VectorXcd upper_;
    Eigen::VectorXcd lower_;
    bool symmetric_ = false;
};

/// N x 2MN matrix [Phi | conj(Phi)] with Phi's m-th block
/// (1/sqrt(2M)) e^{j w_m t} I_N.
class AugmentedSpectralBasis {
public:
    AugmentedSpectralBasis(std::int64_t t, FrequencyGrid grid, Eigen::Index n_assets,
                           Eigen::MatrixXcd values);

    std::int64_t t() const { return t_; }
    const FrequencyGrid& grid() const { return grid_; }
    Eigen::Index n_assets() const { return n_assets_; }
    const Eigen::MatrixXcd& values() const { return values_; }

private:
    std::int64_t t_;
    FrequencyGrid grid_;
    Eigen::Index n_assets_;
    Eigen::MatrixXcd values_;
};

/// Scaled phasors e^{j w_m t}/sqrt(2M), one per bin. Shared by the
/// estimators so they never materialize the full basis matrix.
Eigen::VectorXcd basis_phasors(const FrequencyGrid& grid, std::int64_t t);

AugmentedSpectralBasis build_basis(std::int64_t t, const FrequencyGrid& grid,
                                   Eigen::Index n_assets);

/// x(t) = Phi(t) x(t, w). Throws SymmetryError when the spectrum is not
/// conjugate-symmetric, since the result would not be real.
Eigen::VectorXd synthesize_time_value(const AugmentedSpectralBasis& basis,
                                      const AugmentedVector& spectrum);

/// Least-squares spectrum Phi^H(t) x; rows of Phi are orthonormal so this is
/// an exact right inverse of synthesize_time_value.
AugmentedVector project_spectrum(const AugmentedSpectralBasis& basis,
                                 const Eigen::VectorXd& x);

}  // namespace specport
