// renyi: command-line front end.
//
//   renyi backtest --config run.json [--data file.csv] [--out dir]
//   renyi study <name> [--out dir] [--seed n] [--desk-scale] [--reps n] [--samples n]
//   renyi estimate --data file.csv --column NAME --alpha a [--m m | --m-root r] [--bias-correct]
//   renyi validate --config run.json [--data file.csv]
//
// Exit codes: 0 success, 1 runtime failure, 2 usage error. RENYI_WORKERS sets
// the thread count; results never depend on it.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <renyi/backtest.hpp>
#include <renyi/entropy.hpp>
#include <renyi/experiments.hpp>
#include <renyi/io.hpp>
#include <renyi/metrics.hpp>
#include <renyi/table.hpp>

namespace fs = std::filesystem;
using namespace renyi;

namespace {

constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kUsage = 2;

std::optional<unsigned> env_workers() {
    const char* v = std::getenv("RENYI_WORKERS");
    if (!v || !*v) return std::nullopt;
    char* end = nullptr;
    const long n = std::strtol(v, &end, 10);
    if (*end != '\0' || n < 1 || n > 1024) throw InputError("RENYI_WORKERS must be an integer in [1, 1024]");
    return static_cast<unsigned>(n);
}

nlohmann::json error_record(const std::string& command, const std::exception& e) {
    return {{"schema", kSchema}, {"command", command}, {"error", {{"kind", error_kind(e)}, {"message", e.what()}}}};
}

void report_error(const std::string& command, const std::exception& e, const std::optional<fs::path>& dir) {
    const auto rec = error_record(command, e);
    std::cerr << rec.dump() << '\n';
    if (!dir) return;
    std::error_code ec;
    fs::create_directories(*dir, ec);
    std::ofstream f(*dir / "error.json", std::ios::binary);
    if (f) f << rec.dump(2) << '\n';
}

// Paths in a config file are relative to the file itself.
std::string resolve(const std::string& p, const fs::path& base) {
    if (p.empty() || fs::path(p).is_absolute()) return p;
    return (base / p).lexically_normal().string();
}

struct Loaded {
    RunConfig cfg;
    ReturnMatrix data;
};

// `dir` receives the output directory as soon as it is known, so data errors
// still land in error.json.
Loaded load(const std::string& config_path, const std::string& data_override, const std::string& out_override,
            std::optional<fs::path>* dir = nullptr) {
    Loaded l;
    l.cfg = load_run_config(config_path);
    const fs::path base = fs::path(config_path).parent_path();
    l.cfg.data_path = data_override.empty() ? resolve(l.cfg.data_path, base) : data_override;
    l.cfg.output_dir = out_override.empty() ? resolve(l.cfg.output_dir, base) : out_override;
    if (dir) *dir = l.cfg.output_dir;
    if (l.cfg.data_path.empty()) throw InputError("config: data_path is required");
    if (const auto w = env_workers()) l.cfg.workers = *w;
    l.data = ingest_csv(l.cfg.data_path, l.cfg.mapping);
    validate(l.data);
    for (const auto& s : l.cfg.strategies)
        if (const auto* k = std::get_if<SixtyForty>(&s.kind))
            if (k->equity >= l.data.assets() || k->bond >= l.data.assets())
                throw InputError("config: strategy " + s.name + " refers to an asset index past the last column");
    const std::size_t need = l.cfg.estimation_window + l.cfg.roll;
    if (l.data.periods() < need)
        throw InsufficientData("data: " + std::to_string(l.data.periods()) + " rows, need at least estimation_window + roll = " +
                               std::to_string(need));
    return l;
}

Table report_table(const BacktestResult& res, const RunConfig& cfg, std::vector<std::string>& failures) {
    Table t;
    t.name = "report";
    t.add_meta("windows", static_cast<double>(res.windows.size()));
    t.add_meta("periods_per_year", cfg.periods_per_year);
    t.add_meta("r", cfg.r);
    t.columns = {"strategy",         "status",        "annual_return",    "annual_volatility",  "sharpe",
                 "excess_kurtosis",  "skewness",      "hist_var",         "hist_cvar",          "max_drawdown",
                 "entropy_of_weights", "vol_concentration", "vol_diversification_ratio", "turnover", "error"};
    for (const auto& tr : res.tracks) {
        Table::Row row;
        row << tr.name;
        std::optional<PerformanceReport> rep;
        std::string err;
        if (tr.error) {
            err = *tr.error;
        } else {
            try {
                rep = performance_report(tr.returns, tr.weights, res.window_covariances, cfg.r, cfg.periods_per_year);
            } catch (const Error& e) {
                err = e.what();
            }
        }
        if (!err.empty()) failures.push_back(tr.name + ": " + err);
        row << (rep ? "ok" : "failed");
        if (rep) {
            row << rep->annual_geometric_return << rep->annual_volatility << rep->sharpe << rep->excess_kurtosis
                << rep->skewness << rep->hist_var << rep->hist_cvar << rep->max_drawdown << rep->entropy_of_weights
                << rep->volatility_concentration << rep->diversification_ratio << rep->turnover;
        } else {
            for (int i = 0; i < 12; ++i) row << "";
        }
        row << err;
        t.add(row);
    }
    return t;
}

Table weights_table(const BacktestResult& res, const ReturnMatrix& data) {
    Table t;
    t.name = "weights";
    t.columns = {"strategy", "window", "hold_start"};
    for (const auto& a : data.asset_names) t.columns.push_back(a);
    for (const auto& tr : res.tracks)
        for (std::size_t k = 0; k < tr.weights.size(); ++k) {
            Table::Row row;
            row << tr.name << k << data.dates[res.windows[k].hold_begin];
            for (double w : tr.weights[k].values()) row << w;
            t.add(row);
        }
    return t;
}

// Out-of-sample returns; a strategy that stopped early leaves blank cells.
Table returns_table(const BacktestResult& res) {
    Table t;
    t.name = "returns";
    t.columns = {"date"};
    for (const auto& tr : res.tracks) t.columns.push_back(tr.name);
    for (std::size_t i = 0; i < res.oos_dates.size(); ++i) {
        Table::Row row;
        row << res.oos_dates[i];
        for (const auto& tr : res.tracks) {
            if (i < tr.returns.size()) row << tr.returns[i];
            else row << "";
        }
        t.add(row);
    }
    return t;
}

// Symmetric matrix of two-sided p-values; pair (i, j) uses its own stream.
Table sharpe_table(const BacktestResult& res, const RunConfig& cfg) {
    const std::size_t k = res.tracks.size();
    std::vector<std::vector<std::string>> cell(k, std::vector<std::string>(k, ""));
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < k; ++i) {
        if (!res.tracks[i].error) cell[i][i] = "1";
        for (std::size_t j = i + 1; j < k; ++j)
            if (!res.tracks[i].error && !res.tracks[j].error) pairs.emplace_back(i, j);
    }
    std::vector<std::string> out(pairs.size());
    detail::parallel_for(pairs.size(), cfg.workers, [&](std::size_t p) {
        const auto [i, j] = pairs[p];
        try {
            const auto r = sharpe_test(res.tracks[i].returns, res.tracks[j].returns, cfg.sharpe_test.resamples,
                                       cfg.sharpe_test.block_size, Rng::derive(cfg.seed, i * k + j));
            out[p] = fmt_num(r.two_sided_p);
        } catch (const Error&) {
            out[p] = "nan";
        }
    });
    for (std::size_t p = 0; p < pairs.size(); ++p) {
        const auto [i, j] = pairs[p];
        cell[i][j] = cell[j][i] = out[p];
    }
    Table t;
    t.name = "sharpe_pvalues";
    t.add_meta("resamples", static_cast<double>(cfg.sharpe_test.resamples));
    t.add_meta("block_size", static_cast<double>(cfg.sharpe_test.block_size));
    t.add_meta("seed", std::to_string(cfg.seed));
    t.columns = {"strategy"};
    for (const auto& tr : res.tracks) t.columns.push_back(tr.name);
    for (std::size_t i = 0; i < k; ++i) {
        Table::Row row;
        row << res.tracks[i].name;
        for (const auto& c : cell[i]) row << c;
        t.add(row);
    }
    return t;
}

int cmd_backtest(const std::string& config, const std::string& data, const std::string& out) {
    std::optional<fs::path> dir;
    if (!out.empty()) dir = out;
    try {
        auto l = load(config, data, out, &dir);
        fs::create_directories(*dir);

        BacktestConfig bc;
        bc.estimation_window = l.cfg.estimation_window;
        bc.roll = l.cfg.roll;
        bc.strategies = l.cfg.strategies;
        bc.solver = l.cfg.solver;
        bc.workers = l.cfg.workers;
        const auto res = run_backtest(l.data, bc);

        std::vector<std::string> failures;
        const auto report = report_table(res, l.cfg, failures);
        const auto weights = weights_table(res, l.data);
        const auto returns = returns_table(res);
        const auto sharpe = sharpe_table(res, l.cfg);
        write_csv((*dir / "report.csv").string(), report);
        write_csv((*dir / "weights.csv").string(), weights);
        write_csv((*dir / "returns.csv").string(), returns);
        write_csv((*dir / "sharpe_pvalues.csv").string(), sharpe);
        {
            // Workers are a runtime knob, not part of the result.
            auto eff = l.cfg;
            eff.workers = 1;
            std::ofstream f(*dir / "effective_config.json", std::ios::binary);
            f << to_json(eff).dump(2) << '\n';
        }
        std::error_code ec;
        fs::remove(*dir / "error.json", ec);
        if (!failures.empty()) {
            std::string msg = std::to_string(failures.size()) + " strategy failure(s)";
            for (const auto& f : failures) msg += "; " + f;
            report_error("backtest", Error(msg), dir);
            return kFailure;
        }
        std::cout << "backtest: " << res.windows.size() << " windows, " << res.tracks.size() << " strategies -> "
                  << dir->string() << '\n';
        return kOk;
    } catch (const std::exception& e) {
        report_error("backtest", e, dir);
        return kFailure;
    }
}

int cmd_study(const std::string& name, const std::string& out, std::uint64_t seed, bool desk,
              std::optional<int> reps, std::optional<std::size_t> samples) {
    const auto kind = study_from_name(name);
    if (!kind) {
        std::cerr << "unknown study '" << name << "'; expected one of:";
        for (const auto& s : kStudies) std::cerr << ' ' << s.name;
        std::cerr << '\n';
        return kUsage;
    }
    std::optional<fs::path> dir;
    if (!out.empty()) dir = out;
    try {
        StudyOptions o;
        o.seed = seed;
        o.desk_scale = desk;
        o.reps = reps;
        o.samples = samples;
        if (const auto w = env_workers()) o.workers = *w;
        const auto t = run_study(*kind, o);
        if (dir) {
            fs::create_directories(*dir);
            const auto path = *dir / (name + ".csv");
            write_csv(path.string(), t);
            std::cout << "study " << name << " -> " << path.string() << '\n';
        } else {
            write_csv(std::cout, t);
        }
        return kOk;
    } catch (const std::exception& e) {
        report_error("study", e, dir);
        return kFailure;
    }
}

int cmd_estimate(const std::string& data, const std::string& date_col, const std::string& column, double alpha,
                 std::optional<std::size_t> m, double m_root, bool bias_correct) {
    try {
        CsvMapping map;
        map.date_column = date_col;
        map.columns = {column};
        const auto r = ingest_csv(data, map);
        std::vector<double> x(r.returns.col(0).data(), r.returns.col(0).data() + r.returns.rows());
        RenyiParams p;
        p.alpha = alpha;
        p.m = m ? *m : m_from_root(x.size(), m_root);
        p.bias_correct = bias_correct;
        const double h = m_spacings_estimate(x, p);
        Table t;
        t.name = "estimate";
        t.columns = {"column", "n", "alpha", "m", "bias_correct", "exp_renyi_entropy"};
        Table::Row row;
        row << column << x.size() << alpha << p.m << bias_correct << h;
        t.add(row);
        write_csv(std::cout, t);
        return kOk;
    } catch (const std::exception& e) {
        report_error("estimate", e, std::nullopt);
        return kFailure;
    }
}

int cmd_validate(const std::string& config, const std::string& data) {
    try {
        const auto l = load(config, data, "");
        std::cout << "ok: " << l.data.periods() << " rows x " << l.data.assets() << " assets ("
                  << l.data.dates.front() << " .. " << l.data.dates.back() << "), "
                  << window_count(l.data.periods(), l.cfg.estimation_window, l.cfg.roll) << " windows, "
                  << l.cfg.strategies.size() << " strategies\n";
        return kOk;
    } catch (const std::exception& e) {
        report_error("validate", e, std::nullopt);
        return kFailure;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Exponential Renyi entropy portfolio toolkit"};
    app.require_subcommand(1);

    std::string config, data, out, column, date_col = "date", study;
    std::uint64_t seed = 1;
    bool desk = false, bias_correct = false;
    std::optional<int> reps;
    std::optional<std::size_t> samples, m;
    double alpha = 1.0, m_root = 1.5;

    auto* bt = app.add_subcommand("backtest", "Rolling-window backtest from a JSON config");
    bt->add_option("--config", config, "Run configuration (JSON)")->required()->check(CLI::ExistingFile);
    bt->add_option("--data", data, "Override data_path");
    bt->add_option("--out", out, "Override output_dir");

    auto* st = app.add_subcommand("study", "Run a synthetic study and emit its table");
    st->add_option("name", study, "Study name")->required();
    st->add_option("--out", out, "Output directory (default: stdout)");
    st->add_option("--seed", seed, "Random seed");
    st->add_flag("--desk-scale", desk, "Tenfold fewer repetitions/samples");
    st->add_option("--reps", reps, "Repetitions")->check(CLI::PositiveNumber);
    st->add_option("--samples", samples, "Sample size")->check(CLI::PositiveNumber);

    auto* es = app.add_subcommand("estimate", "Entropy estimate of one return column");
    es->add_option("--data", data, "CSV file")->required()->check(CLI::ExistingFile);
    es->add_option("--column", column, "Return column")->required();
    es->add_option("--date-column", date_col, "Date column");
    es->add_option("--alpha", alpha, "Entropy order")->required();
    auto* mo = es->add_option("--m", m, "Spacing order");
    es->add_option("--m-root", m_root, "m = ceil(N^(1/root)) when --m is absent")->excludes(mo);
    es->add_flag("--bias-correct", bias_correct, "Shannon bias correction");

    auto* va = app.add_subcommand("validate", "Lint a config and its data");
    va->add_option("--config", config, "Run configuration (JSON)")->required()->check(CLI::ExistingFile);
    va->add_option("--data", data, "Override data_path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kUsage;
    }

    if (bt->parsed()) return cmd_backtest(config, data, out);
    if (st->parsed()) return cmd_study(study, out, seed, desk, reps, samples);
    if (es->parsed()) return cmd_estimate(data, date_col, column, alpha, m, m_root, bias_correct);
    if (va->parsed()) return cmd_validate(config, data);
    return kUsage;
}
