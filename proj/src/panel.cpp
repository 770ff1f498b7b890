#include "specport/panel.hpp"

#include <charconv>
#include <chrono>
#include <cstdio>

#include "specport/error.hpp"

namespace specport {
namespace {

bool parse_int(std::string_view s, std::int64_t& out) {
    if (s.empty()) return false;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size();
}

}  // namespace

Timestamp Timestamp::parse(const std::string& text) {
    std::int64_t i = 0;
    if (parse_int(text, i)) {
        Timestamp ts = index(i);
        ts.text_ = text;
        return ts;
    }
    // YYYY-MM or YYYY-MM-DD
    std::int64_t y = 0, mo = 0, d = 1;
    const std::string_view sv(text);
    bool ok = sv.size() >= 7 && sv[4] == '-' && parse_int(sv.substr(0, 4), y) &&
              parse_int(sv.substr(5, 2), mo);
    if (ok && sv.size() > 7) ok = sv.size() == 10 && sv[7] == '-' && parse_int(sv.substr(8, 2), d);
    if (ok) {
        const std::chrono::year_month_day ymd{std::chrono::year(static_cast<int>(y)),
                                              std::chrono::month(static_cast<unsigned>(mo)),
                                              std::chrono::day(static_cast<unsigned>(d))};
        if (ymd.ok()) {
            Timestamp ts = date(static_cast<int>(y), static_cast<unsigned>(mo),
                                static_cast<unsigned>(d));
            ts.text_ = text;
            return ts;
        }
    }
    throw ValidationError("unparseable timestamp '" + text + "'");
}

Timestamp Timestamp::index(std::int64_t i) {
    Timestamp ts;
    ts.kind_ = Kind::Index;
    ts.key_ = i;
    ts.text_ = std::to_string(i);
    return ts;
}

Timestamp Timestamp::date(int year, unsigned month, unsigned day) {
    const std::chrono::year_month_day ymd{std::chrono::year(year), std::chrono::month(month),
                                          std::chrono::day(day)};
    if (!ymd.ok()) throw ValidationError("invalid calendar date");
    Timestamp ts;
    ts.kind_ = Kind::Date;
    ts.key_ = std::chrono::sys_days(ymd).time_since_epoch().count();
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", year, month, day);
    ts.text_ = buf;
    return ts;
}

unsigned Timestamp::month() const {
    if (kind_ != Kind::Date) return 0;
    const std::chrono::year_month_day ymd{std::chrono::sys_days(std::chrono::days(key_))};
    return static_cast<unsigned>(ymd.month());
}

std::strong_ordering operator<=>(const Timestamp& a, const Timestamp& b) {
    if (a.kind_ != b.kind_)
        throw ValidationError("cannot compare a date with an integer index ('" + a.text_ +
                              "' vs '" + b.text_ + "')");
    return a.key_ <=> b.key_;
}

ReturnsPanel ReturnsPanel::from_matrix(Eigen::MatrixXd x, int periods_per_year,
                                       std::int64_t first_index) {
    ReturnsPanel p;
    p.timestamps.reserve(static_cast<std::size_t>(x.rows()));
    for (Eigen::Index t = 0; t < x.rows(); ++t) p.timestamps.push_back(Timestamp::index(first_index + t));
    for (Eigen::Index i = 0; i < x.cols(); ++i) p.asset_names.push_back("X" + std::to_string(i + 1));
    p.returns = std::move(x);
    p.periods_per_year = periods_per_year;
    p.first_index = first_index;
    return p;
}

ReturnsPanel ReturnsPanel::slice(Eigen::Index begin, Eigen::Index count) const {
    if (begin < 0 || count < 0 || begin + count > n_periods())
        throw ValidationError("panel slice out of range");
    ReturnsPanel p;
    p.timestamps.assign(timestamps.begin() + begin, timestamps.begin() + begin + count);
    p.returns = returns.middleRows(begin, count);
    p.periods_per_year = periods_per_year;
    p.asset_names = asset_names;
    p.first_index = first_index + begin;
    return p;
}

}  // namespace specport
