#include "specport/spectral_basis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include "specport/diagnostics.hpp"
#include "specport/error.hpp"

namespace specport {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Conjugate-symmetry slack relative to the vector's magnitude.
constexpr double kSymmetryTol = 1e-12;

}  // namespace

FrequencyGrid FrequencyGrid::from_periods(std::vector<std::int64_t> periods, std::string unit) {
    if (periods.empty()) throw ValidationError("frequency grid is empty");
    for (auto p : periods) {
        if (p < 2)
            throw ValidationError("period " + std::to_string(p) +
                                  " is below 2 samples (frequency outside (0, pi])");
    }
    std::sort(periods.begin(), periods.end(), std::greater<>());
    if (std::adjacent_find(periods.begin(), periods.end()) != periods.end())
        throw ValidationError("frequency grid contains duplicate periods");

    FrequencyGrid g;
    g.periods_ = std::move(periods);
    g.omegas_.reserve(g.periods_.size());
    for (auto p : g.periods_) g.omegas_.push_back(kTwoPi / static_cast<double>(p));
    g.unit_ = std::move(unit);
    g.validate();
    return g;
}

FrequencyGrid FrequencyGrid::from_omegas(std::vector<double> omegas, std::string unit) {
    FrequencyGrid g;
    g.omegas_ = std::move(omegas);
    g.unit_ = std::move(unit);
    g.validate();

    // Recover integer periods when every frequency is 2*pi/integer.
    std::vector<std::int64_t> periods;
    for (double w : g.omegas_) {
        const double p = kTwoPi / w;
        const double r = std::round(p);
        if (std::abs(p - r) > 1e-9 * r) return g;
        periods.push_back(static_cast<std::int64_t>(r));
    }
    g.periods_ = std::move(periods);
    return g;
}

void FrequencyGrid::validate() const {
    if (omegas_.empty()) throw ValidationError("frequency grid is empty");
    for (std::size_t m = 0; m < omegas_.size(); ++m) {
        const double w = omegas_[m];
        if (!std::isfinite(w) || w <= 0.0)
            throw ValidationError("frequency " + std::to_string(w) + " is not strictly positive");
        if (w > std::numbers::pi * (1.0 + 1e-15))
            throw ValidationError("frequency " + std::to_string(w) + " exceeds pi (super-Nyquist)");
        if (m > 0 && w <= omegas_[m - 1])
            throw ValidationError("frequencies must be strictly increasing without duplicates");
    }
    if (has_nyquist())
        warn("frequency grid contains the Nyquist bin (w = pi); its conjugate pair is degenerate");
}

bool FrequencyGrid::has_nyquist() const {
    return !omegas_.empty() && std::abs(omegas_.back() - std::numbers::pi) < 1e-12;
}

std::optional<std::int64_t> FrequencyGrid::least_common_period() const {
    if (periods_.empty()) return std::nullopt;
    std::int64_t l = 1;
    for (auto p : periods_) l = std::lcm(l, p);
    return l;
}

double FrequencyGrid::phase(std::size_t m, std::int64_t t) const {
    if (!periods_.empty()) {
        const std::int64_t p = periods_[m];
        std::int64_t r = t % p;
        if (r < 0) r += p;
        return kTwoPi * static_cast<double>(r) / static_cast<double>(p);
    }
    return omegas_[m] * static_cast<double>(t);
}

std::string FrequencyGrid::describe() const {
    std::ostringstream os;
    os.precision(17);
    if (!periods_.empty()) {
        for (std::size_t i = 0; i < periods_.size(); ++i) os << (i ? "," : "") << periods_[i];
    } else {
        for (std::size_t i = 0; i < omegas_.size(); ++i) os << (i ? "," : "") << "w=" << omegas_[i];
    }
    return os.str();
}

AugmentedVector::AugmentedVector(Eigen::VectorXcd upper, Eigen::VectorXcd lower)
    : upper_(std::move(upper)), lower_(std::move(lower)), symmetric_(false) {
    if (upper_.size() != lower_.size())
        throw ValidationError("augmented vector halves differ in length");
}

AugmentedVector AugmentedVector::from_upper(Eigen::VectorXcd upper) {
    AugmentedVector v;
    v.lower_ = upper.conjugate();
    v.upper_ = std::move(upper);
    v.symmetric_ = true;
    return v;
}

AugmentedVector AugmentedVector::from_stacked(const Eigen::VectorXcd& stacked, bool enforce) {
    if (stacked.size() % 2 != 0) throw ValidationError("augmented vector length must be even");
    const auto h = stacked.size() / 2;
    if (!enforce) return AugmentedVector(stacked.head(h), stacked.tail(h));
    Eigen::VectorXcd upper = 0.5 * (stacked.head(h) + stacked.tail(h).conjugate());
    return from_upper(std::move(upper));
}

AugmentedVector AugmentedVector::zero(Eigen::Index half_size) {
    return from_upper(Eigen::VectorXcd::Zero(half_size));
}

bool AugmentedVector::is_conjugate_symmetric(double tol) const {
    if (upper_.size() == 0) return true;
    const double scale = std::max(1.0, upper_.cwiseAbs().maxCoeff());
    return (lower_ - upper_.conjugate()).cwiseAbs().maxCoeff() <= tol * scale;
}

Eigen::VectorXcd AugmentedVector::stacked() const {
    Eigen::VectorXcd s(size());
    s << upper_, lower_;
    return s;
}

AugmentedVector AugmentedVector::scaled(double factor) const {
    AugmentedVector v(upper_ * factor, lower_ * factor);
    v.symmetric_ = symmetric_;
    return v;
}

AugmentedSpectralBasis::AugmentedSpectralBasis(std::int64_t t, FrequencyGrid grid,
                                               Eigen::Index n_assets, Eigen::MatrixXcd values)
    : t_(t), grid_(std::move(grid)), n_assets_(n_assets), values_(std::move(values)) {}

Eigen::VectorXcd basis_phasors(const FrequencyGrid& grid, std::int64_t t) {
    const auto M = static_cast<Eigen::Index>(grid.size());
    const double norm = 1.0 / std::sqrt(2.0 * static_cast<double>(M));
    Eigen::VectorXcd ph(M);
    for (Eigen::Index m = 0; m < M; ++m) ph(m) = std::polar(norm, grid.phase(m, t));
    return ph;
}

AugmentedSpectralBasis build_basis(std::int64_t t, const FrequencyGrid& grid,
                                   Eigen::Index n_assets) {
    if (n_assets < 1) throw ValidationError("basis needs at least one asset");
    const auto M = static_cast<Eigen::Index>(grid.size());
    const Eigen::Index MN = M * n_assets;
    const auto ph = basis_phasors(grid, t);

    Eigen::MatrixXcd values = Eigen::MatrixXcd::Zero(n_assets, 2 * MN);
    for (Eigen::Index m = 0; m < M; ++m) {
        for (Eigen::Index i = 0; i < n_assets; ++i) {
            values(i, m * n_assets + i) = ph(m);
            values(i, MN + m * n_assets + i) = std::conj(ph(m));
        }
    }
    return AugmentedSpectralBasis(t, grid, n_assets, std::move(values));
}

Eigen::VectorXd synthesize_time_value(const AugmentedSpectralBasis& basis,
                                      const AugmentedVector& spectrum) {
    if (spectrum.size() != basis.values().cols())
        throw ValidationError("spectrum length " + std::to_string(spectrum.size()) +
                              " does not match basis width " +
                              std::to_string(basis.values().cols()));
    if (!spectrum.is_conjugate_symmetric(kSymmetryTol))
        throw SymmetryError("spectrum is not conjugate-symmetric; time value would be complex");

    const Eigen::VectorXcd x = basis.values() * spectrum.stacked();
    return x.real();
}

AugmentedVector project_spectrum(const AugmentedSpectralBasis& basis, const Eigen::VectorXd& x) {
    if (x.size() != basis.n_assets())
        throw ValidationError("time vector has " + std::to_string(x.size()) +
                              " entries, basis expects " + std::to_string(basis.n_assets()));
    const Eigen::Index MN = basis.values().cols() / 2;
    Eigen::VectorXcd upper = basis.values().leftCols(MN).adjoint() * x.cast<cdouble>();
    return AugmentedVector::from_upper(std::move(upper));
}

}  // namespace specport
