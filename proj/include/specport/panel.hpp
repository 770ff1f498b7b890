#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace specport {

/// Row label of a panel: an ISO-8601 date (YYYY-MM-DD or YYYY-MM) or a plain
/// integer index. Ordering uses days since 1970-01-01 for dates.
class Timestamp {
public:
    enum class Kind { Index, Date };

    static Timestamp parse(const std::string& text);
    static Timestamp index(std::int64_t i);
    static Timestamp date(int year, unsigned month, unsigned day);

    Kind kind() const { return kind_; }
    std::int64_t key() const { return key_; }
    const std::string& text() const { return text_; }

    /// Calendar month 1..12 for dates; 0 for index timestamps.
    unsigned month() const;

    friend bool operator==(const Timestamp& a, const Timestamp& b) {
        return a.kind_ == b.kind_ && a.key_ == b.key_;
    }
    friend std::strong_ordering operator<=>(const Timestamp& a, const Timestamp& b);

private:
    Kind kind_ = Kind::Index;
    std::int64_t key_ = 0;
    std::string text_;
};

struct PricePanel {
    std::vector<Timestamp> timestamps;
    Eigen::MatrixXd prices;  // T x N, strictly positive
    std::vector<std::string> asset_names;

    Eigen::Index n_periods() const { return prices.rows(); }
    Eigen::Index n_assets() const { return prices.cols(); }
};

/// Simple returns, row t holding x(t). `first_index` is the global time index
/// of row 0; the spectral basis is evaluated at first_index + row so that the
/// phase stays aligned when a panel is split.
struct ReturnsPanel {
    std::vector<Timestamp> timestamps;
    Eigen::MatrixXd returns;  // T x N
    int periods_per_year = 12;
    std::vector<std::string> asset_names;
    std::int64_t first_index = 0;

    Eigen::Index n_periods() const { return returns.rows(); }
    Eigen::Index n_assets() const { return returns.cols(); }

    /// Wraps a raw matrix with integer timestamps first_index.. and names X1..XN.
    static ReturnsPanel from_matrix(Eigen::MatrixXd x, int periods_per_year = 12,
                                    std::int64_t first_index = 0);

    /// Rows [begin, begin + count), keeping global indices consistent.
    ReturnsPanel slice(Eigen::Index begin, Eigen::Index count) const;
};

}  // namespace specport
