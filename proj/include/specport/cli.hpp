#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "specport/augmented_stats.hpp"

namespace specport::cli {

enum ExitCode : int { kSuccess = 0, kComputationError = 1, kUsageError = 2 };

struct SynthConfig {
    bool example1 = false;
    bool market = false;
    std::uint64_t seed = 0;
    std::int64_t horizon = 0;
    std::filesystem::path out;
    std::string kind = "returns";  // returns | prices
    std::int64_t n_assets = 5;
    std::vector<std::int64_t> periods{12, 6};
    std::string start = "2010-01-01";
    double amplitude = 0.006;
    double noise = 0.02;
    double drift = 0.0;
};

struct EstimateConfig {
    std::filesystem::path input;
    bool input_is_returns = false;
    std::string grid = "A,S,Q";
    int periods_per_year = 12;
    EstimationOptions estimation;
    bool demean = false;
    std::filesystem::path out_dir;
};

struct BacktestConfig {
    std::filesystem::path input;
    bool input_is_returns = false;
    std::vector<std::string> grids{"A", "A,S", "A,S,Q"};
    std::string boundary = "2015-01-01";
    double sigma0_annual = 0.01;
    std::optional<double> ridge;
    EstimationOptions estimation;
    bool demean = false;
    int periods_per_year = 12;
    std::uint64_t seed = 0;
    std::filesystem::path out_dir;
};

/// Each command returns the files it wrote; the config echo is always among them.
std::vector<std::filesystem::path> cmd_synth(const SynthConfig& cfg, std::ostream& out);
std::vector<std::filesystem::path> cmd_estimate(const EstimateConfig& cfg, std::ostream& out);
std::vector<std::filesystem::path> cmd_backtest(const BacktestConfig& cfg, std::ostream& out);

/// Parses argv, dispatches, and maps failures to exit codes:
/// 0 success, 1 computation error, 2 input or usage error.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace specport::cli
