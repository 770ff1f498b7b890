#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "specport/augmented_stats.hpp"
#include "specport/optimizer.hpp"
#include "specport/panel.hpp"

namespace specport {

struct IngestOptions {
    /// Cells hold returns rather than prices: positivity is not required.
    bool values_are_returns = false;
};

struct IngestResult {
    PricePanel panel;  // for returns files, `prices` holds the returns
    std::size_t dropped_rows = 0;
    std::vector<std::string> warnings;
};

/// Reads `date,ASSET1,...,ASSETN`. Rows with a blank or non-positive cell are
/// dropped and counted; unparseable values, duplicate or decreasing
/// timestamps, and fewer than 3 usable rows raise IngestionError.
IngestResult ingest_csv(const std::filesystem::path& path, const IngestOptions& opts = {});
IngestResult ingest_csv(std::istream& is, const std::string& source, const IngestOptions& opts = {});

/// Returns file (already x(t)) as a panel with first_index 0.
ReturnsPanel ingest_returns_csv(const std::filesystem::path& path, int periods_per_year);

/// x_i(t) = (p_i(t) - p_i(t-1)) / p_i(t-1); timestamps start at the second row.
ReturnsPanel compute_returns(const PricePanel& panel, int periods_per_year);

/// In-sample rows strictly before `boundary`, out-sample rows at or after it.
/// The out-sample keeps the global time index running from the in-sample origin.
std::pair<ReturnsPanel, ReturnsPanel> split_sample(const ReturnsPanel& returns,
                                                   const Timestamp& boundary);

using Allocation = std::variant<AllocationPath, StaticWeights>;

/// r_p(t) = w(t)^T x(t) over every row of `returns`.
Eigen::VectorXd run_strategy(const ReturnsPanel& returns, const Allocation& allocation);

/// mean / sample std (T-1) * sqrt(periods_per_year); nullopt when the std is zero.
std::optional<double> sharpe_ratio(const Eigen::VectorXd& series, int periods_per_year);

/// Compounded cumulative return prod(1 + r) - 1 after each period.
Eigen::VectorXd cumulative_returns(const Eigen::VectorXd& series);

/// Named set of grid periods. Labels use the A/S/Q vocabulary when possible.
struct GridChoice {
    std::string label;
    std::vector<std::int64_t> periods;
};

/// "A,S,Q" (annual, semi-annual, quarterly relative to periods_per_year) or
/// integer periods "12,6,3". Letters and integers may be mixed.
GridChoice parse_grid_choice(const std::string& text, int periods_per_year);

struct ProtocolConfig {
    ReturnsPanel returns;
    std::vector<GridChoice> grids;
    Timestamp boundary;
    double sigma0_annual = 0.01;
    EstimationOptions estimation;
    std::optional<double> ridge;
    bool demean = false;
};

struct StrategyResult {
    std::string name;
    std::string slug;
    Eigen::VectorXd returns;     // out-of-sample portfolio returns
    Eigen::VectorXd cumulative;
    std::optional<double> sharpe;
    double volatility = 0.0;     // annualized realized volatility
    AllocationPath allocation;   // out-of-sample rows; constant for static schemes
    std::optional<SpectralMoments> moments;
    std::optional<SpectralWeights> weights;
};

struct BacktestReport {
    std::vector<StrategyResult> strategies;
    std::vector<std::string> asset_names;
    std::vector<Timestamp> out_timestamps;
    Timestamp boundary;
    Eigen::Index in_sample_size = 0;
    Eigen::Index out_sample_size = 0;
    int periods_per_year = 12;
    double sigma0_annual = 0.0;
    double sigma0_period = 0.0;
    EstimationOptions estimation;
    std::optional<double> ridge;
    bool demean = false;
    std::vector<std::string> warnings;

    const StrategyResult& strategy(const std::string& name) const;
};

/// Estimate on in-sample, solve every configured spectral grid plus classical
/// MVO and equal weight, evaluate all on out-of-sample.
BacktestReport run_protocol(const ProtocolConfig& config);

/// Writes report.txt, cumulative_returns.csv, allocations_<slug>.csv,
/// spectral_moments.csv (+ one per grid), spectral_weights_<slug>.csv,
/// plot_sharpe.csv, sharpe_table.txt and allocation_by_month.csv.
/// Returns the paths written, report first.
std::vector<std::filesystem::path> write_report(const BacktestReport& report,
                                                const std::filesystem::path& dir);

/// Key: value body of report.txt.
std::string format_report(const BacktestReport& report);

/// One header row of strategy names and one row of Sharpe ratios.
std::string format_sharpe_table(const BacktestReport& report);

/// Plain CSV with a timestamp column followed by one column per name.
void write_panel_csv(std::ostream& os, const std::string& index_label,
                     const std::vector<Timestamp>& timestamps,
                     const std::vector<std::string>& names, const Eigen::MatrixXd& values);

}  // namespace specport
