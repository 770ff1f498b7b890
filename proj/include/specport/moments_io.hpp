#pragma once

#include <iosfwd>
#include <string>

#include "specport/augmented_stats.hpp"
#include "specport/optimizer.hpp"

namespace specport {

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);
double parse_double(const std::string& text);

/// Flat CSV layout, lossless at full double precision:
///
///   # specport spectral moments v1
///   # omegas: <w_1>,...,<w_M>
///   # periods: <p_1>,...        (informational; empty when non-integer)
///   # unit: <label>
///   # n_assets: N
///   # n_bins: M
///   # sample_count: T
///   # mode: paper-literal | consistent
///   # form: spectral-residual | time-residual
///   kind,bin,asset,row,col,re,im
///   mean,<m>,<i>,,,<re>,<im>          one row per upper-half entry
///   cov,,,<r>,<c>,<re>,<im>           every entry of the 2MN x 2MN matrix
void write_moments(std::ostream& os, const SpectralMoments& moments);
SpectralMoments read_moments(std::istream& is);

/// Same conventions; header adds lambda, sigma0 and ridge, rows are
///   weight,<m>,<i>,,,<re>,<im>
void write_weights(std::ostream& os, const SpectralWeights& weights);
SpectralWeights read_weights(std::istream& is);

}  // namespace specport
