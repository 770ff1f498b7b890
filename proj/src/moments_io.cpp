#include "specport/moments_io.hpp"

#include <charconv>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <vector>

#include "specport/error.hpp"

namespace specport {
namespace {

constexpr const char* kMomentsMagic = "# specport spectral moments v1";
constexpr const char* kWeightsMagic = "# specport spectral weights v1";
constexpr const char* kColumns = "kind,bin,asset,row,col,re,im";

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, sep)) out.push_back(cell);
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

std::string join_omegas(const FrequencyGrid& g) {
    std::string s;
    for (std::size_t m = 0; m < g.size(); ++m) s += (m ? "," : "") + format_double(g.omega(m));
    return s;
}

std::string join_periods(const FrequencyGrid& g) {
    std::string s;
    for (std::size_t m = 0; m < g.periods().size(); ++m)
        s += (m ? "," : "") + std::to_string(g.periods()[m]);
    return s;
}

void write_grid_header(std::ostream& os, const FrequencyGrid& g, Eigen::Index n_assets) {
    os << "# omegas: " << join_omegas(g) << '\n'
       << "# periods: " << join_periods(g) << '\n'
       << "# unit: " << g.unit() << '\n'
       << "# n_assets: " << n_assets << '\n'
       << "# n_bins: " << g.size() << '\n';
}

std::int64_t parse_int(const std::string& s) {
    std::int64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
        throw ValidationError("expected an integer, got '" + s + "'");
    return v;
}

struct Parsed {
    std::map<std::string, std::string> header;
    std::vector<std::vector<std::string>> rows;
};

Parsed parse_layout(std::istream& is, const char* magic) {
    Parsed p;
    std::string line;
    if (!std::getline(is, line) || line != magic)
        throw ValidationError(std::string("missing header line '") + magic + "'");
    bool columns_seen = false;
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line.rfind("# ", 0) == 0) {
            const auto colon = line.find(": ", 2);
            if (colon == std::string::npos) {
                const auto bare = line.find(':', 2);
                if (bare == std::string::npos) continue;
                p.header[line.substr(2, bare - 2)] = "";
                continue;
            }
            p.header[line.substr(2, colon - 2)] = line.substr(colon + 2);
            continue;
        }
        if (!columns_seen) {
            if (line != kColumns) throw ValidationError("unexpected column header '" + line + "'");
            columns_seen = true;
            continue;
        }
        auto cells = split(line, ',');
        if (cells.size() != 7) throw ValidationError("malformed row '" + line + "'");
        p.rows.push_back(std::move(cells));
    }
    return p;
}

const std::string& field(const Parsed& p, const std::string& key) {
    auto it = p.header.find(key);
    if (it == p.header.end()) throw ValidationError("missing header field '" + key + "'");
    return it->second;
}

FrequencyGrid read_grid(const Parsed& p) {
    std::vector<double> omegas;
    for (const auto& s : split(field(p, "omegas"), ',')) omegas.push_back(parse_double(s));
    std::string unit = p.header.count("unit") ? p.header.at("unit") : std::string("sample");
    return FrequencyGrid::from_omegas(std::move(omegas), std::move(unit));
}

}  // namespace

std::string format_double(double v) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, p);
}

double parse_double(const std::string& text) {
    double v = 0.0;
    auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || p != text.data() + text.size())
        throw ValidationError("expected a number, got '" + text + "'");
    return v;
}

void write_moments(std::ostream& os, const SpectralMoments& mo) {
    os << kMomentsMagic << '\n';
    write_grid_header(os, mo.grid(), mo.n_assets());
    os << "# sample_count: " << mo.sample_count() << '\n'
       << "# mode: " << to_string(mo.mode()) << '\n'
       << "# form: " << to_string(mo.form()) << '\n'
       << kColumns << '\n';
    const Eigen::Index N = mo.n_assets();
    for (Eigen::Index m = 0; m < mo.n_bins(); ++m)
        for (Eigen::Index i = 0; i < N; ++i) {
            const cdouble v = mo.mean().upper()(m * N + i);
            os << "mean," << m << ',' << i << ",,," << format_double(v.real()) << ','
               << format_double(v.imag()) << '\n';
        }
    const auto& c = mo.covariance();
    for (Eigen::Index r = 0; r < c.rows(); ++r)
        for (Eigen::Index k = 0; k < c.cols(); ++k)
            os << "cov,,," << r << ',' << k << ',' << format_double(c(r, k).real()) << ','
               << format_double(c(r, k).imag()) << '\n';
}

SpectralMoments read_moments(std::istream& is) {
    const Parsed p = parse_layout(is, kMomentsMagic);
    FrequencyGrid grid = read_grid(p);
    const auto N = static_cast<Eigen::Index>(parse_int(field(p, "n_assets")));
    const auto M = static_cast<Eigen::Index>(parse_int(field(p, "n_bins")));
    if (M != static_cast<Eigen::Index>(grid.size()) || N < 1)
        throw ValidationError("moments header is inconsistent");
    const Eigen::Index K = M * N;

    Eigen::VectorXcd mean = Eigen::VectorXcd::Zero(K);
    Eigen::MatrixXcd cov = Eigen::MatrixXcd::Zero(2 * K, 2 * K);
    Eigen::Index n_mean = 0, n_cov = 0;
    for (const auto& r : p.rows) {
        const cdouble v(parse_double(r[5]), parse_double(r[6]));
        if (r[0] == "mean") {
            const auto m = parse_int(r[1]), i = parse_int(r[2]);
            if (m < 0 || m >= M || i < 0 || i >= N) throw ValidationError("mean index out of range");
            mean(m * N + i) = v;
            ++n_mean;
        } else if (r[0] == "cov") {
            const auto a = parse_int(r[3]), b = parse_int(r[4]);
            if (a < 0 || a >= 2 * K || b < 0 || b >= 2 * K)
                throw ValidationError("covariance index out of range");
            cov(a, b) = v;
            ++n_cov;
        } else {
            throw ValidationError("unknown row kind '" + r[0] + "'");
        }
    }
    if (n_mean != K || n_cov != 4 * K * K) throw ValidationError("moments file is incomplete");
    return SpectralMoments(std::move(grid), N, AugmentedVector::from_upper(std::move(mean)),
                           std::move(cov), parse_int(field(p, "sample_count")),
                           parse_estimator_mode(field(p, "mode")),
                           parse_covariance_form(field(p, "form")));
}

void write_weights(std::ostream& os, const SpectralWeights& w) {
    os << kWeightsMagic << '\n';
    write_grid_header(os, w.grid, w.n_assets);
    os << "# lambda: " << format_double(w.lambda) << '\n'
       << "# sigma0: " << format_double(w.sigma0) << '\n'
       << "# ridge: " << format_double(w.ridge) << '\n'
       << "# mode: " << to_string(w.mode) << '\n'
       << kColumns << '\n';
    const Eigen::Index N = w.n_assets;
    for (Eigen::Index m = 0; m < static_cast<Eigen::Index>(w.grid.size()); ++m)
        for (Eigen::Index i = 0; i < N; ++i) {
            const cdouble v = w.weights.upper()(m * N + i);
            os << "weight," << m << ',' << i << ",,," << format_double(v.real()) << ','
               << format_double(v.imag()) << '\n';
        }
}

SpectralWeights read_weights(std::istream& is) {
    const Parsed p = parse_layout(is, kWeightsMagic);
    SpectralWeights w;
    w.grid = read_grid(p);
    w.n_assets = static_cast<Eigen::Index>(parse_int(field(p, "n_assets")));
    const auto M = static_cast<Eigen::Index>(w.grid.size());
    const Eigen::Index K = M * w.n_assets;
    Eigen::VectorXcd up = Eigen::VectorXcd::Zero(K);
    Eigen::Index seen = 0;
    for (const auto& r : p.rows) {
        if (r[0] != "weight") throw ValidationError("unknown row kind '" + r[0] + "'");
        const auto m = parse_int(r[1]), i = parse_int(r[2]);
        if (m < 0 || m >= M || i < 0 || i >= w.n_assets)
            throw ValidationError("weight index out of range");
        up(m * w.n_assets + i) = cdouble(parse_double(r[5]), parse_double(r[6]));
        ++seen;
    }
    if (seen != K) throw ValidationError("weights file is incomplete");
    w.weights = AugmentedVector::from_upper(std::move(up));
    w.lambda = parse_double(field(p, "lambda"));
    w.sigma0 = parse_double(field(p, "sigma0"));
    w.ridge = parse_double(field(p, "ridge"));
    w.mode = parse_estimator_mode(field(p, "mode"));
    return w;
}

}  // namespace specport
