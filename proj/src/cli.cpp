#include "specport/cli.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <sstream>

#include <CLI11.hpp>
#include <Eigen/Eigenvalues>

#include "specport/backtest.hpp"
#include "specport/diagnostics.hpp"
#include "specport/error.hpp"
#include "specport/moments_io.hpp"
#include "specport/signal_synth.hpp"

namespace specport::cli {
namespace {

std::string join(const std::vector<std::int64_t>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
    return s;
}

std::ofstream open_out(const std::filesystem::path& p) {
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream f(p);
    if (!f) throw ValidationError("cannot write '" + p.string() + "'");
    return f;
}

double spectral_norm(const Eigen::MatrixXcd& m) {
    if (m.size() == 0) return 0.0;
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
    return svd.singularValues()(0);
}

void write_echo(const std::filesystem::path& path, const std::string& command,
                const std::vector<std::pair<std::string, std::string>>& fields) {
    auto f = open_out(path);
    f << "command: " << command << '\n';
    std::string replay = "specport " + command;
    for (const auto& [k, v] : fields) {
        f << k << ": " << v << '\n';
    }
    for (const auto& [k, v] : fields) {
        if (k.rfind("flag:", 0) == 0) {
            if (v == "true") replay += " --" + k.substr(5);
        } else if (!v.empty()) {
            replay += " --" + k + " " + v;
        }
    }
    f << "replay: " << replay << '\n';
}

ReturnsPanel load_returns(const std::filesystem::path& input, bool is_returns, int ppy) {
    if (!std::filesystem::exists(input))
        throw IngestionError("input file '" + input.string() + "' does not exist");
    if (is_returns) return ingest_returns_csv(input, ppy);
    return compute_returns(ingest_csv(input).panel, ppy);
}

std::string bool_text(bool b) { return b ? "true" : "false"; }

}  // namespace

std::vector<std::filesystem::path> cmd_synth(const SynthConfig& cfg, std::ostream& out) {
    if (cfg.example1 == cfg.market)
        throw ValidationError("synth needs exactly one of --example1 or --market");
    if (cfg.horizon < 1) throw ValidationError("horizon -T must be at least 1");
    if (cfg.out.empty()) throw ValidationError("synth needs --out");
    if (cfg.kind != "returns" && cfg.kind != "prices")
        throw ValidationError("--kind must be 'returns' or 'prices'");

    ReturnsPanel panel;
    if (cfg.example1) {
        SynthSpec spec = example1_scenario();
        spec.horizon = cfg.horizon;
        spec.seed = cfg.seed;
        panel = synthesize_panel(spec);
    } else {
        MarketScenario sc;
        sc.n_assets = cfg.n_assets;
        sc.periods = cfg.periods;
        sc.horizon = cfg.horizon;
        sc.seasonal_amplitude = cfg.amplitude;
        sc.noise_volatility = cfg.noise;
        sc.drift = cfg.drift;
        sc.seed = cfg.seed;
        panel = synthesize_market(sc);
    }

    // Monthly dates for market data, integer indices otherwise.
    std::vector<Timestamp> stamps;
    const Eigen::Index T = panel.n_periods();
    const Eigen::Index rows = cfg.kind == "prices" ? T + 1 : T;
    if (cfg.market) {
        const Timestamp start = Timestamp::parse(cfg.start);
        if (start.kind() != Timestamp::Kind::Date) throw ValidationError("--start must be a date");
        const std::chrono::year_month_day ymd{std::chrono::sys_days(std::chrono::days(start.key()))};
        auto ym = ymd.year() / ymd.month();
        for (Eigen::Index t = 0; t < rows; ++t) {
            stamps.push_back(Timestamp::date(static_cast<int>(ym.year()),
                                             static_cast<unsigned>(ym.month()), 1));
            ym += std::chrono::months(1);
        }
    } else {
        for (Eigen::Index t = 0; t < rows; ++t) stamps.push_back(Timestamp::index(t));
    }

    Eigen::MatrixXd values = panel.returns;
    if (cfg.kind == "prices") {
        if ((panel.returns.array() <= -1.0).any())
            throw ValidationError("synthetic returns reach -100%; lower --noise or --amplitude");
        values.resize(rows, panel.n_assets());
        values.row(0).setConstant(100.0);
        for (Eigen::Index t = 0; t < T; ++t)
            values.row(t + 1) = values.row(t).array() * (1.0 + panel.returns.row(t).array());
    }

    {
        auto f = open_out(cfg.out);
        write_panel_csv(f, cfg.market ? "date" : "index", stamps, panel.asset_names, values);
    }
    std::filesystem::path echo = cfg.out;
    echo.replace_filename(cfg.out.stem().string() + ".config_echo.txt");
    write_echo(echo, "synth",
               {{"flag:example1", bool_text(cfg.example1)},
                {"flag:market", bool_text(cfg.market)},
                {"seed", std::to_string(cfg.seed)},
                {"horizon", std::to_string(cfg.horizon)},
                {"kind", cfg.kind},
                {"assets", cfg.market ? std::to_string(cfg.n_assets) : ""},
                {"periods", cfg.market ? join(cfg.periods) : ""},
                {"start", cfg.market ? cfg.start : ""},
                {"amplitude", cfg.market ? format_double(cfg.amplitude) : ""},
                {"noise", cfg.market ? format_double(cfg.noise) : ""},
                {"drift", cfg.market ? format_double(cfg.drift) : ""},
                {"out", cfg.out.string()}});
    out << "wrote " << cfg.out.string() << " (" << rows << " rows, " << panel.n_assets()
        << " column" << (panel.n_assets() == 1 ? "" : "s") << ")\n";
    return {cfg.out, echo};
}

std::vector<std::filesystem::path> cmd_estimate(const EstimateConfig& cfg, std::ostream& out) {
    if (cfg.out_dir.empty()) throw ValidationError("estimate needs --out");
    const GridChoice choice = parse_grid_choice(cfg.grid, cfg.periods_per_year);
    ReturnsPanel x = load_returns(cfg.input, cfg.input_is_returns, cfg.periods_per_year);
    if (cfg.demean) x.returns.rowwise() -= x.returns.colwise().mean();

    const FrequencyGrid grid = FrequencyGrid::from_periods(choice.periods);
    const SpectralMoments mo = estimate_moments(x, grid, cfg.estimation);
    const PsdMatrix psd = compute_psd(mo);

    std::filesystem::create_directories(cfg.out_dir);
    std::vector<std::filesystem::path> written;
    written.push_back(cfg.out_dir / "spectral_moments.csv");
    {
        auto f = open_out(written.back());
        write_moments(f, mo);
    }

    const Eigen::Index M = mo.n_bins(), N = mo.n_assets();
    std::vector<double> abs_mean(static_cast<std::size_t>(M));
    for (Eigen::Index m = 0; m < M; ++m) abs_mean[static_cast<std::size_t>(m)] = mo.mean().bin(m, N).norm();
    std::vector<std::size_t> order(static_cast<std::size_t>(M));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return abs_mean[a] > abs_mean[b]; });
    std::vector<std::size_t> rank(order.size());
    for (std::size_t r = 0; r < order.size(); ++r) rank[order[r]] = r + 1;

    written.push_back(cfg.out_dir / "spectral_summary.csv");
    auto f = open_out(written.back());
    f << "bin,period,omega,abs_mean,norm_R,norm_P,norm_psd,mean_rank\n";
    out << std::left << std::setw(5) << "bin" << std::setw(8) << "period" << std::setw(14) << "|m|"
        << std::setw(14) << "||R||" << std::setw(14) << "||P||" << std::setw(14) << "||PSD||"
        << "rank\n";
    for (Eigen::Index m = 0; m < M; ++m) {
        const auto k = static_cast<std::size_t>(m);
        const double nr = spectral_norm(mo.R_block(m, m));
        const double np = spectral_norm(mo.P_block(m, m));
        const double ns = spectral_norm(psd.bins[k]);
        const std::string period = grid.periods().empty() ? "" : std::to_string(grid.periods()[k]);
        f << m << ',' << period << ',' << format_double(grid.omega(k)) << ','
          << format_double(abs_mean[k]) << ',' << format_double(nr) << ',' << format_double(np) << ','
          << format_double(ns) << ',' << rank[k] << '\n';
        out << std::left << std::setw(5) << m << std::setw(8) << period << std::setw(14)
            << std::setprecision(6) << abs_mean[k] << std::setw(14) << nr << std::setw(14) << np
            << std::setw(14) << ns << rank[k] << '\n';
    }

    written.push_back(cfg.out_dir / "config_echo.txt");
    write_echo(written.back(), "estimate",
               {{"input", cfg.input.string()},
                {"flag:returns", bool_text(cfg.input_is_returns)},
                {"grid", cfg.grid},
                {"periods-per-year", std::to_string(cfg.periods_per_year)},
                {"mode", to_string(cfg.estimation.mode)},
                {"form", to_string(cfg.estimation.form)},
                {"flag:no-snap", bool_text(!cfg.estimation.snap_to_commensurate)},
                {"flag:demean", bool_text(cfg.demean)},
                {"out", cfg.out_dir.string()}});
    return written;
}

std::vector<std::filesystem::path> cmd_backtest(const BacktestConfig& cfg, std::ostream& out) {
    if (cfg.out_dir.empty()) throw ValidationError("backtest needs --out");
    if (!(cfg.sigma0_annual > 0.0)) throw ValidationError("--sigma0 must be positive");
    if (cfg.ridge && *cfg.ridge < 0.0) throw ValidationError("--ridge must be non-negative");

    ProtocolConfig pc;
    for (const auto& g : cfg.grids) pc.grids.push_back(parse_grid_choice(g, cfg.periods_per_year));
    pc.boundary = Timestamp::parse(cfg.boundary);
    pc.returns = load_returns(cfg.input, cfg.input_is_returns, cfg.periods_per_year);
    pc.sigma0_annual = cfg.sigma0_annual;
    pc.estimation = cfg.estimation;
    pc.ridge = cfg.ridge;
    pc.demean = cfg.demean;

    const BacktestReport rep = run_protocol(pc);
    auto written = write_report(rep, cfg.out_dir);

    std::string grids;
    for (std::size_t i = 0; i < cfg.grids.size(); ++i) grids += (i ? " --grids " : "") + cfg.grids[i];
    written.push_back(cfg.out_dir / "config_echo.txt");
    write_echo(written.back(), "backtest",
               {{"input", cfg.input.string()},
                {"flag:returns", bool_text(cfg.input_is_returns)},
                {"grids", grids},
                {"boundary", cfg.boundary},
                {"sigma0", format_double(cfg.sigma0_annual)},
                {"ridge", cfg.ridge ? format_double(*cfg.ridge) : ""},
                {"mode", to_string(cfg.estimation.mode)},
                {"form", to_string(cfg.estimation.form)},
                {"flag:no-snap", bool_text(!cfg.estimation.snap_to_commensurate)},
                {"flag:demean", bool_text(cfg.demean)},
                {"periods-per-year", std::to_string(cfg.periods_per_year)},
                {"seed", std::to_string(cfg.seed)},
                {"out", cfg.out_dir.string()}});

    out << "Annualised out-of-sample Sharpe ratios\n" << format_sharpe_table(rep);
    out << "report: " << written.front().string() << '\n';
    return written;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Spectral mean-variance portfolio optimization with augmented complex statistics"};
    app.name("specport");
    app.require_subcommand(1);

    auto mode_check = CLI::IsMember({"paper-literal", "consistent"});
    auto form_check = CLI::IsMember({"spectral-residual", "time-residual"});

    SynthConfig sc;
    auto* synth = app.add_subcommand("synth", "Write a synthetic returns or price panel");
    synth->add_flag("--example1", sc.example1, "Two harmonics in cyclostationary noise (single series)");
    synth->add_flag("--market", sc.market, "Seasonal multi-asset market with monthly dates");
    synth->add_option("--seed", sc.seed, "RNG seed (all randomness derives from it)");
    synth->add_option("-T,--horizon", sc.horizon, "Number of return samples")->required();
    synth->add_option("--out", sc.out, "Output CSV path")->required();
    synth->add_option("--kind", sc.kind, "returns | prices")->check(CLI::IsMember({"returns", "prices"}));
    synth->add_option("--assets", sc.n_assets, "Market: number of assets");
    synth->add_option("--periods", sc.periods, "Market: seasonal periods in samples")->delimiter(',');
    synth->add_option("--start", sc.start, "Market: first date (YYYY-MM-DD)");
    synth->add_option("--amplitude", sc.amplitude, "Market: spectral-mean coefficient scale");
    synth->add_option("--noise", sc.noise, "Market: per-period noise volatility");
    synth->add_option("--drift", sc.drift, "Market: constant per-period return");

    EstimateConfig ec;
    std::string e_mode = "paper-literal", e_form = "spectral-residual";
    bool e_no_snap = false;
    auto* estimate = app.add_subcommand("estimate", "Estimate centred augmented spectral moments");
    estimate->add_option("--input", ec.input, "Price CSV (or returns CSV with --returns)")->required();
    estimate->add_flag("--returns", ec.input_is_returns, "Input cells are returns, not prices");
    estimate->add_option("--grid", ec.grid, "Grid as A/S/Q letters or integer periods, e.g. A,S,Q or 48,24");
    estimate->add_option("--periods-per-year", ec.periods_per_year, "Samples per year");
    estimate->add_option("--mode", e_mode, "paper-literal | consistent")->check(mode_check);
    estimate->add_option("--form", e_form, "spectral-residual | time-residual")->check(form_check);
    estimate->add_flag("--no-snap", e_no_snap, "Keep the full window even if not commensurate");
    estimate->add_flag("--demean", ec.demean, "Subtract the per-asset grand mean first");
    estimate->add_option("--out", ec.out_dir, "Output directory")->required();

    BacktestConfig bc;
    std::string b_mode = "paper-literal", b_form = "spectral-residual";
    bool b_no_snap = false;
    double b_ridge = -1.0;
    auto* backtest = app.add_subcommand("backtest", "Run the in/out-of-sample allocation protocol");
    backtest->add_option("--input", bc.input, "Price CSV (or returns CSV with --returns)")->required();
    backtest->add_flag("--returns", bc.input_is_returns, "Input cells are returns, not prices");
    backtest->add_option("--grids", bc.grids, "Spectral grid, repeatable (A | A,S | A,S,Q | 12,6)")
        ->take_all();
    backtest->add_option("--boundary", bc.boundary, "First out-of-sample date");
    backtest->add_option("--sigma0", bc.sigma0_annual, "Annualized target volatility (0.01 = 1%)");
    auto* ridge_opt = backtest->add_option("--ridge", b_ridge, "Covariance ridge (default 1e-8 tr(R)/dim)");
    backtest->add_option("--mode", b_mode, "paper-literal | consistent")->check(mode_check);
    backtest->add_option("--form", b_form, "spectral-residual | time-residual")->check(form_check);
    backtest->add_flag("--no-snap", b_no_snap, "Keep the full in-sample window");
    backtest->add_flag("--demean", bc.demean, "Subtract the in-sample grand mean before spectral estimation");
    backtest->add_option("--periods-per-year", bc.periods_per_year, "Samples per year");
    backtest->add_option("--seed", bc.seed, "Recorded for reproducibility; the protocol is deterministic");
    backtest->add_option("--out", bc.out_dir, "Output directory")->required();

    app.footer(
        "Allocations are retrieved as w(t) = Phi_aug(t) w_aug using the augmented basis [Phi | conj(Phi)],\n"
        "which keeps dimensions consistent and w(t) real.\n"
        "Exit codes: 0 success, 1 computation error, 2 input or usage error.");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kSuccess : kUsageError;
    }

    try {
        if (*synth) {
            cmd_synth(sc, out);
        } else if (*estimate) {
            ec.estimation = {parse_estimator_mode(e_mode), parse_covariance_form(e_form), !e_no_snap};
            cmd_estimate(ec, out);
        } else if (*backtest) {
            bc.estimation = {parse_estimator_mode(b_mode), parse_covariance_form(b_form), !b_no_snap};
            if (ridge_opt->count() > 0) bc.ridge = b_ridge;
            cmd_backtest(bc, out);
        }
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << '\n';
        return kUsageError;
    } catch (const IngestionError& e) {
        err << "error: " << e.what() << '\n';
        return kUsageError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kComputationError;
    }
    return kSuccess;
}

}  // namespace specport::cli
