#include "specport/backtest.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "specport/diagnostics.hpp"
#include "specport/error.hpp"
#include "specport/moments_io.hpp"

namespace specport {
namespace {

std::string trim(std::string s) {
    auto not_space = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
    s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
    return s;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

// Re-raise a library error with the protocol stage prefixed, keeping its type.
template <typename Fn>
auto staged(const std::string& stage, Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const FactorizationError& e) {
        throw FactorizationError(stage + ": " + e.what(), e.eigenvalue());
    } catch (const EmptyInputError& e) {
        throw EmptyInputError(stage + ": " + e.what());
    } catch (const ValidationError& e) {
        throw ValidationError(stage + ": " + e.what());
    } catch (const SymmetryError& e) {
        throw SymmetryError(stage + ": " + e.what());
    } catch (const DegenerateMeanError& e) {
        throw DegenerateMeanError(stage + ": " + e.what());
    } catch (const SingularityError& e) {
        throw SingularityError(stage + ": " + e.what());
    } catch (const IngestionError& e) {
        throw IngestionError(stage + ": " + e.what());
    }
}

std::string slugify(const std::string& name) {
    std::string s;
    for (char c : name) {
        if (std::isalnum(static_cast<unsigned char>(c)))
            s += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        else if (!s.empty() && s.back() != '_')
            s += '_';
    }
    while (!s.empty() && s.back() == '_') s.pop_back();
    return s;
}

double sample_std(const Eigen::VectorXd& v) {
    if (v.size() < 2) return 0.0;
    const double mean = v.mean();
    return std::sqrt((v.array() - mean).square().sum() / static_cast<double>(v.size() - 1));
}

std::string sharpe_text(const std::optional<double>& s) {
    return s ? format_double(*s) : std::string("undefined");
}

// Month of the year (1..12) for dates, otherwise position within the year.
unsigned season_of(const Timestamp& ts, std::int64_t global_index, int periods_per_year) {
    if (ts.kind() == Timestamp::Kind::Date) return ts.month();
    const auto r = ((global_index % periods_per_year) + periods_per_year) % periods_per_year;
    return static_cast<unsigned>(r + 1);
}

}  // namespace

IngestResult ingest_csv(const std::filesystem::path& path, const IngestOptions& opts) {
    std::ifstream in(path);
    if (!in) throw IngestionError("cannot open '" + path.string() + "'");
    return ingest_csv(in, path.string(), opts);
}

IngestResult ingest_csv(std::istream& is, const std::string& source, const IngestOptions& opts) {
    IngestResult result;
    std::string line;
    std::size_t line_no = 0;

    while (std::getline(is, line)) {
        ++line_no;
        if (!trim(line).empty()) break;
    }
    const auto header = split_csv(trim(line));
    if (header.size() < 2)
        throw IngestionError(source + ": header must name a timestamp column and at least one asset");
    const std::size_t n_assets = header.size() - 1;
    result.panel.asset_names.assign(header.begin() + 1, header.end());

    std::vector<Timestamp> stamps;
    std::vector<std::vector<double>> rows;
    std::optional<Timestamp> previous;
    std::size_t previous_line = 0;

    while (std::getline(is, line)) {
        ++line_no;
        line = trim(line);
        if (line.empty()) continue;
        auto cells = split_csv(line);
        const std::string where = source + ": line " + std::to_string(line_no);
        if (cells.size() > header.size())
            throw IngestionError(where + ": " + std::to_string(cells.size()) + " fields, header has " +
                                 std::to_string(header.size()));
        cells.resize(header.size());

        Timestamp ts;
        try {
            ts = Timestamp::parse(cells[0]);
        } catch (const ValidationError& e) {
            throw IngestionError(where + ": " + e.what());
        }
        if (previous) {
            bool ordered = false;
            try {
                ordered = *previous < ts;
            } catch (const ValidationError& e) {
                throw IngestionError(where + ": " + e.what());
            }
            if (*previous == ts)
                throw IngestionError(where + ": duplicate timestamp '" + cells[0] + "' (also line " +
                                     std::to_string(previous_line) + ")");
            if (!ordered)
                throw IngestionError(where + ": timestamp '" + cells[0] +
                                     "' is not after the previous row");
        }
        previous = ts;
        previous_line = line_no;

        std::vector<double> values(n_assets);
        std::string problem;
        for (std::size_t i = 0; i < n_assets; ++i) {
            const std::string& c = cells[i + 1];
            if (c.empty()) {
                problem = "missing value for " + header[i + 1];
                break;
            }
            try {
                values[i] = parse_double(c);
            } catch (const ValidationError&) {
                throw IngestionError(where + ": unparseable value '" + c + "' for " + header[i + 1]);
            }
            if (!std::isfinite(values[i])) {
                problem = "non-finite value for " + header[i + 1];
                break;
            }
            if (!opts.values_are_returns && values[i] <= 0.0) {
                problem = "non-positive price for " + header[i + 1];
                break;
            }
        }
        if (!problem.empty()) {
            ++result.dropped_rows;
            result.warnings.push_back(where + ": dropped row (" + problem + ")");
            continue;
        }
        stamps.push_back(std::move(ts));
        rows.push_back(std::move(values));
    }

    if (rows.size() < 3)
        throw IngestionError(source + ": only " + std::to_string(rows.size()) +
                             " usable rows, at least 3 required");

    result.panel.timestamps = std::move(stamps);
    result.panel.prices.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(n_assets));
    for (std::size_t t = 0; t < rows.size(); ++t)
        for (std::size_t i = 0; i < n_assets; ++i)
            result.panel.prices(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(i)) = rows[t][i];

    if (result.dropped_rows > 0)
        warn(source + ": dropped " + std::to_string(result.dropped_rows) + " row(s) with missing or invalid cells");
    return result;
}

ReturnsPanel ingest_returns_csv(const std::filesystem::path& path, int periods_per_year) {
    IngestResult r = ingest_csv(path, IngestOptions{true});
    ReturnsPanel p;
    p.timestamps = std::move(r.panel.timestamps);
    p.returns = std::move(r.panel.prices);
    p.asset_names = std::move(r.panel.asset_names);
    p.periods_per_year = periods_per_year;
    p.first_index = 0;
    return p;
}

ReturnsPanel compute_returns(const PricePanel& panel, int periods_per_year) {
    if (periods_per_year < 1) throw ValidationError("periods per year must be positive");
    if (panel.n_periods() < 2) throw ValidationError("returns need at least two price rows");
    if (static_cast<Eigen::Index>(panel.timestamps.size()) != panel.n_periods())
        throw ValidationError("price panel timestamps and rows disagree");
    if ((panel.prices.array() <= 0.0).any()) throw ValidationError("prices must be strictly positive");

    const Eigen::Index T = panel.n_periods() - 1;
    ReturnsPanel r;
    r.returns = (panel.prices.bottomRows(T).array() - panel.prices.topRows(T).array()) /
                panel.prices.topRows(T).array();
    r.timestamps.assign(panel.timestamps.begin() + 1, panel.timestamps.end());
    r.asset_names = panel.asset_names;
    r.periods_per_year = periods_per_year;
    r.first_index = 0;
    return r;
}

std::pair<ReturnsPanel, ReturnsPanel> split_sample(const ReturnsPanel& returns,
                                                   const Timestamp& boundary) {
    if (returns.timestamps.empty()) throw ValidationError("cannot split an empty panel");
    const auto& first = returns.timestamps.front();
    const auto& last = returns.timestamps.back();
    bool inside = false;
    try {
        inside = first < boundary && boundary <= last;
    } catch (const ValidationError&) {
        inside = false;
    }
    if (!inside)
        throw ValidationError("split boundary '" + boundary.text() + "' is outside the data range (" +
                              first.text() + " .. " + last.text() + "]");
    const auto it = std::lower_bound(returns.timestamps.begin(), returns.timestamps.end(), boundary);
    const auto n_in = static_cast<Eigen::Index>(it - returns.timestamps.begin());
    return {returns.slice(0, n_in), returns.slice(n_in, returns.n_periods() - n_in)};
}

Eigen::VectorXd run_strategy(const ReturnsPanel& returns, const Allocation& allocation) {
    const Eigen::Index T = returns.n_periods();
    const Eigen::Index N = returns.n_assets();
    Eigen::VectorXd out(T);
    if (const auto* s = std::get_if<StaticWeights>(&allocation)) {
        if (s->weights.size() != N)
            throw ValidationError("static weights have " + std::to_string(s->weights.size()) +
                                  " entries for " + std::to_string(N) + " assets");
        out = returns.returns * s->weights;
        return out;
    }
    const auto& path = std::get<AllocationPath>(allocation);
    if (path.values.cols() != N) throw ValidationError("allocation path has the wrong asset count");
    if (T > 0 && (!path.covers(returns.first_index) || !path.covers(returns.first_index + T - 1)))
        throw ValidationError("allocation path [" + std::to_string(path.first_index) + ", " +
                              std::to_string(path.first_index + path.size()) +
                              ") does not cover returns indices [" +
                              std::to_string(returns.first_index) + ", " +
                              std::to_string(returns.first_index + T) + ")");
    const Eigen::Index offset = returns.first_index - path.first_index;
    for (Eigen::Index t = 0; t < T; ++t)
        out(t) = path.values.row(offset + t).dot(returns.returns.row(t));
    return out;
}

std::optional<double> sharpe_ratio(const Eigen::VectorXd& series, int periods_per_year) {
    if (series.size() < 2) throw ValidationError("Sharpe ratio needs at least 2 observations");
    if (periods_per_year < 1) throw ValidationError("periods per year must be positive");
    const double mean = series.mean();
    const double sd = sample_std(series);
    const double scale = std::max(series.cwiseAbs().maxCoeff(), 1e-300);
    if (!(sd > 1e-12 * scale)) return std::nullopt;
    return mean / sd * std::sqrt(static_cast<double>(periods_per_year));
}

Eigen::VectorXd cumulative_returns(const Eigen::VectorXd& series) {
    Eigen::VectorXd c(series.size());
    double wealth = 1.0;
    for (Eigen::Index t = 0; t < series.size(); ++t) {
        wealth *= 1.0 + series(t);
        c(t) = wealth - 1.0;
    }
    return c;
}

GridChoice parse_grid_choice(const std::string& text, int periods_per_year) {
    GridChoice g;
    std::vector<std::string> labels;
    for (auto& item : split_csv(text)) {
        if (item.empty()) throw ValidationError("empty entry in grid '" + text + "'");
        std::int64_t divisor = 0;
        if (item == "A" || item == "a") divisor = 1;
        if (item == "S" || item == "s") divisor = 2;
        if (item == "Q" || item == "q") divisor = 4;
        if (divisor) {
            if (periods_per_year % divisor != 0)
                throw ValidationError("shortcut '" + item + "' needs periods per year divisible by " +
                                      std::to_string(divisor));
            g.periods.push_back(periods_per_year / divisor);
            labels.push_back(std::string(1, static_cast<char>(std::toupper(item[0]))));
            continue;
        }
        std::int64_t p = 0;
        try {
            p = static_cast<std::int64_t>(std::stoll(item));
            if (std::to_string(p) != item) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ValidationError("grid entry '" + item + "' is neither A/S/Q nor an integer period");
        }
        g.periods.push_back(p);
        labels.push_back(item);
    }
    if (g.periods.empty()) throw ValidationError("grid '" + text + "' is empty");
    for (std::size_t i = 0; i < labels.size(); ++i) g.label += (i ? ", " : "") + labels[i];
    FrequencyGrid::from_periods(g.periods);  // validates
    return g;
}

const StrategyResult& BacktestReport::strategy(const std::string& name) const {
    for (const auto& s : strategies)
        if (s.name == name || s.slug == name) return s;
    throw ValidationError("no strategy named '" + name + "'");
}

BacktestReport run_protocol(const ProtocolConfig& cfg) {
    const int ppy = cfg.returns.periods_per_year;
    if (cfg.grids.empty()) throw ValidationError("configuration: at least one spectral grid is required");
    if (!(cfg.sigma0_annual > 0.0)) throw ValidationError("configuration: sigma0 must be positive");

    BacktestReport rep;
    WarningCapture capture(/*forward=*/true);

    auto [in_sample, out_sample] = staged("split", [&] { return split_sample(cfg.returns, cfg.boundary); });
    if (in_sample.n_periods() < 2 || out_sample.n_periods() < 2)
        throw ValidationError("split: both samples need at least 2 rows");

    rep.asset_names = cfg.returns.asset_names;
    rep.out_timestamps = out_sample.timestamps;
    rep.boundary = cfg.boundary;
    rep.in_sample_size = in_sample.n_periods();
    rep.out_sample_size = out_sample.n_periods();
    rep.periods_per_year = ppy;
    rep.sigma0_annual = cfg.sigma0_annual;
    rep.sigma0_period = cfg.sigma0_annual / std::sqrt(static_cast<double>(ppy));
    rep.estimation = cfg.estimation;
    rep.ridge = cfg.ridge;
    rep.demean = cfg.demean;

    const RiskSpec risk{rep.sigma0_period, cfg.ridge};
    const Eigen::Index N = cfg.returns.n_assets();
    const Eigen::Index T_out = out_sample.n_periods();

    ReturnsPanel spectral_input = in_sample;
    if (cfg.demean) {
        const Eigen::RowVectorXd grand = in_sample.returns.colwise().mean();
        spectral_input.returns.rowwise() -= grand;
    }

    auto finish = [&](StrategyResult s) {
        s.returns = staged("evaluate " + s.name, [&] {
            return run_strategy(out_sample, Allocation(s.allocation));
        });
        s.cumulative = cumulative_returns(s.returns);
        s.sharpe = sharpe_ratio(s.returns, ppy);
        s.volatility = sample_std(s.returns) * std::sqrt(static_cast<double>(ppy));
        rep.strategies.push_back(std::move(s));
    };

    for (const auto& choice : cfg.grids) {
        StrategyResult s;
        s.name = "Spectral MVO (" + choice.label + ")";
        s.slug = slugify(s.name);
        const FrequencyGrid grid = staged("grid " + choice.label, [&] {
            return FrequencyGrid::from_periods(choice.periods, ppy == 12 ? "month" : "period");
        });
        s.moments = staged("estimate " + choice.label,
                           [&] { return estimate_moments(spectral_input, grid, cfg.estimation); });
        s.weights = staged("solve " + choice.label, [&] { return solve_spectral_mvo(*s.moments, risk); });
        s.allocation = retrieve_allocation(*s.weights, out_sample.first_index, T_out);
        finish(std::move(s));
    }

    {
        StrategyResult s;
        s.name = "MVO";
        s.slug = "mvo";
        const Eigen::VectorXd mean = in_sample.returns.colwise().mean().transpose();
        const Eigen::MatrixXd centred = in_sample.returns.rowwise() - mean.transpose();
        const Eigen::MatrixXd cov =
            centred.transpose() * centred / static_cast<double>(in_sample.n_periods() - 1);
        const StaticWeights w = staged("solve MVO", [&] { return solve_classical_mvo(mean, cov, risk); });
        s.allocation = AllocationPath{out_sample.first_index, w.weights.transpose().replicate(T_out, 1), 0.0};
        finish(std::move(s));
    }
    {
        StrategyResult s;
        s.name = "EW";
        s.slug = "ew";
        const StaticWeights w = equal_weight(N);
        s.allocation = AllocationPath{out_sample.first_index, w.weights.transpose().replicate(T_out, 1), 0.0};
        finish(std::move(s));
    }
    rep.warnings = capture.messages();
    return rep;
}

void write_panel_csv(std::ostream& os, const std::string& index_label,
                     const std::vector<Timestamp>& timestamps, const std::vector<std::string>& names,
                     const Eigen::MatrixXd& values) {
    if (static_cast<Eigen::Index>(timestamps.size()) != values.rows() ||
        static_cast<Eigen::Index>(names.size()) != values.cols())
        throw ValidationError("panel CSV: labels do not match the matrix shape");
    os << index_label;
    for (const auto& n : names) os << ',' << n;
    os << '\n';
    for (Eigen::Index t = 0; t < values.rows(); ++t) {
        os << timestamps[static_cast<std::size_t>(t)].text();
        for (Eigen::Index i = 0; i < values.cols(); ++i) os << ',' << format_double(values(t, i));
        os << '\n';
    }
}

std::string format_sharpe_table(const BacktestReport& rep) {
    std::vector<std::string> head, vals;
    for (const auto& s : rep.strategies) {
        head.push_back(s.name);
        if (s.sharpe) {
            std::ostringstream os;
            os << std::fixed << std::setprecision(2) << *s.sharpe;
            vals.push_back(os.str());
        } else {
            vals.push_back("undefined");
        }
    }
    std::vector<std::size_t> width;
    for (std::size_t i = 0; i < head.size(); ++i) width.push_back(std::max(head[i].size(), vals[i].size()));
    auto row = [&](const std::vector<std::string>& cells) {
        std::string r = "|";
        for (std::size_t i = 0; i < cells.size(); ++i) {
            const std::size_t pad = width[i] - cells[i].size();
            r += ' ' + std::string(pad / 2, ' ') + cells[i] + std::string(pad - pad / 2, ' ') + " |";
        }
        return r + '\n';
    };
    std::string rule = "|";
    for (auto w : width) rule += std::string(w + 2, '-') + '|';
    rule += '\n';
    return row(head) + rule + row(vals);
}

std::string format_report(const BacktestReport& rep) {
    std::ostringstream os;
    os << "split_boundary: " << rep.boundary.text() << '\n'
       << "in_sample_periods: " << rep.in_sample_size << '\n'
       << "out_sample_periods: " << rep.out_sample_size << '\n'
       << "out_sample_range: " << rep.out_timestamps.front().text() << " .. "
       << rep.out_timestamps.back().text() << '\n'
       << "periods_per_year: " << rep.periods_per_year << '\n'
       << "sigma0_annual: " << format_double(rep.sigma0_annual) << '\n'
       << "sigma0_period: " << format_double(rep.sigma0_period) << '\n'
       << "estimator_mode: " << to_string(rep.estimation.mode) << '\n'
       << "covariance_form: " << to_string(rep.estimation.form) << '\n'
       << "ridge: " << (rep.ridge ? format_double(*rep.ridge) : std::string("default")) << '\n'
       << "demean: " << (rep.demean ? "true" : "false") << '\n'
       << "assets: " << rep.asset_names.size() << '\n';
    for (const auto& s : rep.strategies) {
        os << '\n' << "strategy: " << s.name << '\n';
        if (s.moments) os << "  grid_periods: " << s.moments->grid().describe() << '\n';
        if (s.weights) {
            os << "  lambda: " << format_double(s.weights->lambda) << '\n'
               << "  ridge_applied: " << format_double(s.weights->ridge) << '\n'
               << "  estimation_samples: " << s.moments->sample_count() << '\n';
        }
        os << "  sharpe: " << sharpe_text(s.sharpe) << '\n'
           << "  volatility_annual: " << format_double(s.volatility) << '\n'
           << "  cumulative_return: "
           << format_double(s.cumulative.size() ? s.cumulative(s.cumulative.size() - 1) : 0.0) << '\n';
    }
    if (!rep.warnings.empty()) {
        os << '\n';
        for (const auto& w : rep.warnings) os << "warning: " << w << '\n';
    }
    return os.str();
}

std::vector<std::filesystem::path> write_report(const BacktestReport& rep,
                                                const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    std::vector<std::filesystem::path> written;
    auto open = [&](const std::string& name) {
        written.push_back(dir / name);
        std::ofstream f(written.back());
        if (!f) throw ValidationError("cannot write '" + written.back().string() + "'");
        return f;
    };

    {
        auto f = open("report.txt");
        f << format_report(rep);
    }
    {
        auto f = open("sharpe_table.txt");
        f << format_sharpe_table(rep);
    }
    {
        auto f = open("plot_sharpe.csv");
        f << "strategy,sharpe\n";
        for (const auto& s : rep.strategies) f << s.name << ',' << sharpe_text(s.sharpe) << '\n';
    }
    {
        Eigen::MatrixXd cum(rep.out_sample_size, static_cast<Eigen::Index>(rep.strategies.size()));
        std::vector<std::string> names;
        for (std::size_t k = 0; k < rep.strategies.size(); ++k) {
            cum.col(static_cast<Eigen::Index>(k)) = rep.strategies[k].cumulative;
            names.push_back(rep.strategies[k].name);
        }
        auto f = open("cumulative_returns.csv");
        write_panel_csv(f, "date", rep.out_timestamps, names, cum);
    }
    for (const auto& s : rep.strategies) {
        auto f = open("allocations_" + s.slug + ".csv");
        write_panel_csv(f, "date", rep.out_timestamps, rep.asset_names, s.allocation.values);
    }
    const StrategyResult* last_spectral = nullptr;
    for (const auto& s : rep.strategies) {
        if (!s.moments) continue;
        last_spectral = &s;
        {
            auto f = open("spectral_moments_" + s.slug + ".csv");
            write_moments(f, *s.moments);
        }
        auto f = open("spectral_weights_" + s.slug + ".csv");
        write_weights(f, *s.weights);
    }
    if (last_spectral) {
        auto f = open("spectral_moments.csv");
        write_moments(f, *last_spectral->moments);
    }
    {
        auto f = open("allocation_by_month.csv");
        f << "month,strategy";
        for (const auto& a : rep.asset_names) f << ',' << a;
        f << '\n';
        const Eigen::Index N = static_cast<Eigen::Index>(rep.asset_names.size());
        for (const auto& s : rep.strategies) {
            std::vector<Eigen::VectorXd> sum(static_cast<std::size_t>(rep.periods_per_year),
                                             Eigen::VectorXd::Zero(N));
            std::vector<int> count(static_cast<std::size_t>(rep.periods_per_year), 0);
            for (Eigen::Index t = 0; t < rep.out_sample_size; ++t) {
                const unsigned season = season_of(rep.out_timestamps[static_cast<std::size_t>(t)],
                                                  s.allocation.first_index + t, rep.periods_per_year);
                if (season == 0 || season > static_cast<unsigned>(rep.periods_per_year)) continue;
                sum[season - 1] += s.allocation.values.row(t).transpose();
                ++count[season - 1];
            }
            for (std::size_t k = 0; k < sum.size(); ++k) {
                if (count[k] == 0) continue;
                f << (k + 1) << ',' << s.name;
                for (Eigen::Index i = 0; i < N; ++i) f << ',' << format_double(sum[k](i) / count[k]);
                f << '\n';
            }
        }
    }
    return written;
}

}  // namespace specport
