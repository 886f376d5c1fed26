// io.hpp
// CSV ingestion of return panels and the JSON run configuration.

#pragma once

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "backtest.hpp"
#include "error.hpp"
#include "optim.hpp"
#include "table.hpp"

namespace renyi {

struct CsvMapping {
    std::string date_column = "date";
    // Return columns to keep, in this order; empty keeps every non-date column.
    std::vector<std::string> columns;
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    for (auto& s : out) {
        const auto b = s.find_first_not_of(" \t\r");
        const auto e = s.find_last_not_of(" \t\r");
        s = b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    }
    return out;
}

// YYYY-MM-DD with a real calendar day.
inline bool is_iso_date(const std::string& s) {
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
    for (int i : {0, 1, 2, 3, 5, 6, 8, 9})
        if (s[static_cast<std::size_t>(i)] < '0' || s[static_cast<std::size_t>(i)] > '9') return false;
    const int y = std::stoi(s.substr(0, 4)), m = std::stoi(s.substr(5, 2)), d = std::stoi(s.substr(8, 2));
    if (m < 1 || m > 12 || d < 1) return false;
    static constexpr int days[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    const bool leap = (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
    return d <= days[m - 1] + (m == 2 && leap ? 1 : 0);
}

inline std::optional<double> parse_number(const std::string& s) {
    if (s.empty()) return std::nullopt;
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

} // namespace detail

// Reads a header-row CSV of decimal returns. Line numbers in messages are
// physical file lines. Every malformed cell is reported, not only the first.
inline ReturnMatrix ingest_csv(std::istream& in, const CsvMapping& map = {}) {
    std::string line;
    std::size_t lineno = 0;
    // Leading `#` comment lines (schema tags) are skipped.
    do {
        if (!std::getline(in, line)) throw InputError("csv: empty input");
        ++lineno;
    } while (!line.empty() && line[0] == '#');
    const auto header = detail::split_csv_line(line);
    std::optional<std::size_t> date_idx;
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == map.date_column) date_idx = i;
    if (!date_idx) throw InputError("csv: no date column '" + map.date_column + "'");

    std::vector<std::size_t> cols;
    std::vector<std::string> names;
    if (map.columns.empty()) {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (i != *date_idx) {
                cols.push_back(i);
                names.push_back(header[i]);
            }
    } else {
        for (const auto& c : map.columns) {
            std::optional<std::size_t> idx;
            for (std::size_t i = 0; i < header.size(); ++i)
                if (header[i] == c) idx = i;
            if (!idx) throw InputError("csv: no column '" + c + "'");
            cols.push_back(*idx);
            names.push_back(c);
        }
    }
    if (cols.empty()) throw InputError("csv: no return columns");

    std::vector<std::string> dates;
    std::vector<std::vector<double>> rows;
    std::vector<std::string> problems;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#') continue;
        const auto cells = detail::split_csv_line(line);
        const std::string where = "line " + std::to_string(lineno);
        if (cells.size() != header.size()) {
            problems.push_back(where + ": expected " + std::to_string(header.size()) + " fields, found " +
                               std::to_string(cells.size()));
            continue;
        }
        const auto& date = cells[*date_idx];
        if (!detail::is_iso_date(date)) problems.push_back(where + ", column " + map.date_column + ": not an ISO-8601 date '" + date + "'");
        std::vector<double> vals;
        for (std::size_t k = 0; k < cols.size(); ++k) {
            const auto& cell = cells[cols[k]];
            const auto v = detail::parse_number(cell);
            if (!v) {
                problems.push_back(where + ", column " + names[k] + (cell.empty() ? ": missing value" : ": not a number '" + cell + "'"));
                vals.push_back(0.0);
            } else if (*v <= -1.0) {
                problems.push_back(where + ", column " + names[k] + ": return <= -100%");
                vals.push_back(0.0);
            } else {
                vals.push_back(*v);
            }
        }
        if (!dates.empty() && detail::is_iso_date(date) && detail::is_iso_date(dates.back())) {
            if (date == dates.back()) problems.push_back(where + ": duplicate date " + date);
            else if (date < dates.back()) problems.push_back(where + ": date " + date + " is earlier than the previous row");
        }
        dates.push_back(date);
        rows.push_back(std::move(vals));
    }
    if (!problems.empty()) {
        std::string msg = "csv: " + std::to_string(problems.size()) + " problem(s)";
        for (std::size_t i = 0; i < problems.size() && i < 20; ++i) msg += "\n  " + problems[i];
        if (problems.size() > 20) msg += "\n  ...";
        throw InputError(msg);
    }
    if (rows.empty()) throw InputError("csv: no data rows");

    ReturnMatrix r;
    r.dates = std::move(dates);
    r.asset_names = std::move(names);
    r.returns.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < cols.size(); ++j)
            r.returns(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    return r;
}

inline ReturnMatrix ingest_csv(const std::string& path, const CsvMapping& map = {}) {
    std::ifstream f(path);
    if (!f) throw InputError("csv: cannot open " + path);
    return ingest_csv(f, map);
}

// Plain CSV (no comment lines) that ingest_csv reads back exactly.
inline void write_returns_csv(std::ostream& os, const ReturnMatrix& r) {
    os << "date";
    for (const auto& a : r.asset_names) os << ',' << a;
    os << '\n';
    for (std::size_t i = 0; i < r.periods(); ++i) {
        os << r.dates[i];
        for (std::size_t j = 0; j < r.assets(); ++j)
            os << ',' << fmt_num(r.returns(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
        os << '\n';
    }
}

inline void write_returns_csv(const std::string& path, const ReturnMatrix& r) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw InputError("cannot open " + path + " for writing");
    write_returns_csv(f, r);
}

// ---- run configuration ----

struct SharpeTestConfig {
    int resamples = 5000;
    int block_size = 5;
};

struct RunConfig {
    std::string data_path;
    CsvMapping mapping;
    std::size_t estimation_window = 260;
    std::size_t roll = 26;
    std::vector<Strategy> strategies;
    std::string output_dir = "out";
    std::uint64_t seed = 1;
    double periods_per_year = 52.0;
    double r = 0.05;
    SharpeTestConfig sharpe_test;
    SolverConfig solver;
    unsigned workers = 1;
};

// ROpt(0.5), ROpt(0.7), ROpt(1) with m = N^(2/3), MV with automatic
// shrinkage, MVaR(5%), MCVaR(5%), EW, 60/40 on the first two assets, and MSR
// under a 7.5% turnover cap.
inline std::vector<Strategy> default_strategies() {
    return {
        {"ROpt(0.5)", ROpt{0.5, 1.5, std::nullopt, false}, std::nullopt},
        {"ROpt(0.7)", ROpt{0.7, 1.5, std::nullopt, false}, std::nullopt},
        {"ROpt(1)", ROpt{1.0, 1.5, std::nullopt, false}, std::nullopt},
        {"MV", MV{CovarianceKind::Shrinkage, std::nullopt}, std::nullopt},
        {"MVaR(5%)", MVaR{0.05}, std::nullopt},
        {"MCVaR(5%)", MCVaR{0.05}, std::nullopt},
        {"EW", EW{}, std::nullopt},
        {"60/40", SixtyForty{0, 1}, std::nullopt},
        {"MSR", MSR{52.0}, 0.075},
    };
}

namespace detail {

using nlohmann::json;

inline void reject_unknown(const json& j, std::initializer_list<const char*> known, const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : known) ok = ok || it.key() == k;
        if (!ok) throw InputError("config: unknown key '" + it.key() + "' in " + where);
    }
}

template <class T>
T get_or(const json& j, const char* key, T fallback, const std::string& where) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw InputError("config: bad value for '" + std::string(key) + "' in " + where + ": " + e.what());
    }
}

inline std::size_t asset_index(const json& v, const std::vector<std::string>& names, const std::string& where) {
    if (v.is_number_integer()) {
        const auto i = v.get<long long>();
        if (i < 0) throw InputError("config: negative asset index in " + where);
        return static_cast<std::size_t>(i);
    }
    if (v.is_string()) {
        for (std::size_t i = 0; i < names.size(); ++i)
            if (names[i] == v.get<std::string>()) return i;
        if (names.empty()) throw InputError("config: asset names in " + where + " need a 'columns' list");
        throw InputError("config: unknown asset '" + v.get<std::string>() + "' in " + where);
    }
    throw InputError("config: asset must be an index or a column name in " + where);
}

inline Strategy strategy_from_json(const json& j, const std::vector<std::string>& names, std::size_t pos) {
    const std::string where = "strategies[" + std::to_string(pos) + "]";
    if (!j.is_object()) throw InputError("config: " + where + " must be an object");
    const auto kind = get_or<std::string>(j, "kind", "", where);
    Strategy s;
    s.name = get_or<std::string>(j, "name", kind, where);
    if (j.contains("turnover_cap") && !j.at("turnover_cap").is_null())
        s.turnover_cap = get_or<double>(j, "turnover_cap", 0.0, where);
    if (kind == "ropt") {
        reject_unknown(j, {"kind", "name", "turnover_cap", "alpha", "m_root", "m", "bias_correct"}, where);
        ROpt k;
        k.alpha = get_or<double>(j, "alpha", 1.0, where);
        k.m_root = get_or<double>(j, "m_root", 1.5, where);
        if (j.contains("m") && !j.at("m").is_null()) k.m = get_or<std::size_t>(j, "m", 1, where);
        k.bias_correct = get_or<bool>(j, "bias_correct", false, where);
        s.kind = k;
    } else if (kind == "mv") {
        reject_unknown(j, {"kind", "name", "turnover_cap", "covariance", "delta"}, where);
        MV k;
        const auto cov = get_or<std::string>(j, "covariance", "shrinkage", where);
        if (cov == "sample") k.covariance = CovarianceKind::Sample;
        else if (cov == "shrinkage") k.covariance = CovarianceKind::Shrinkage;
        else throw InputError("config: covariance must be 'sample' or 'shrinkage' in " + where);
        if (j.contains("delta") && !(j.at("delta").is_string() && j.at("delta") == "auto") && !j.at("delta").is_null())
            k.delta = get_or<double>(j, "delta", 0.0, where);
        s.kind = k;
    } else if (kind == "mvar" || kind == "mcvar") {
        reject_unknown(j, {"kind", "name", "turnover_cap", "r"}, where);
        const double r = get_or<double>(j, "r", 0.05, where);
        if (kind == "mvar") s.kind = MVaR{r};
        else s.kind = MCVaR{r};
    } else if (kind == "msr") {
        reject_unknown(j, {"kind", "name", "turnover_cap", "periods_per_year"}, where);
        s.kind = MSR{get_or<double>(j, "periods_per_year", 52.0, where)};
    } else if (kind == "ew") {
        reject_unknown(j, {"kind", "name", "turnover_cap"}, where);
        s.kind = EW{};
    } else if (kind == "sixty_forty") {
        reject_unknown(j, {"kind", "name", "turnover_cap", "equity", "bond"}, where);
        SixtyForty k;
        if (j.contains("equity")) k.equity = asset_index(j.at("equity"), names, where);
        if (j.contains("bond")) k.bond = asset_index(j.at("bond"), names, where);
        s.kind = k;
    } else {
        throw InputError("config: unknown strategy kind '" + kind + "' in " + where);
    }
    try {
        validate(s);
    } catch (const ParameterError& e) {
        throw InputError("config: " + where + ": " + e.what());
    }
    return s;
}

inline json strategy_to_json(const Strategy& s) {
    json j;
    j["name"] = s.name;
    std::visit(
        [&](const auto& k) {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, ROpt>) {
                j["kind"] = "ropt";
                j["alpha"] = k.alpha;
                j["m_root"] = k.m_root;
                j["m"] = k.m ? json(*k.m) : json(nullptr);
                j["bias_correct"] = k.bias_correct;
            } else if constexpr (std::is_same_v<K, MV>) {
                j["kind"] = "mv";
                j["covariance"] = k.covariance == CovarianceKind::Sample ? "sample" : "shrinkage";
                j["delta"] = k.delta ? json(*k.delta) : json("auto");
            } else if constexpr (std::is_same_v<K, MVaR>) {
                j["kind"] = "mvar";
                j["r"] = k.r;
            } else if constexpr (std::is_same_v<K, MCVaR>) {
                j["kind"] = "mcvar";
                j["r"] = k.r;
            } else if constexpr (std::is_same_v<K, MSR>) {
                j["kind"] = "msr";
                j["periods_per_year"] = k.periods_per_year;
            } else if constexpr (std::is_same_v<K, EW>) {
                j["kind"] = "ew";
            } else {
                j["kind"] = "sixty_forty";
                j["equity"] = k.equity;
                j["bond"] = k.bond;
            }
        },
        s.kind);
    j["turnover_cap"] = s.turnover_cap ? json(*s.turnover_cap) : json(nullptr);
    return j;
}

} // namespace detail

inline RunConfig run_config_from_json(const nlohmann::json& j) {
    using detail::get_or;
    if (!j.is_object()) throw InputError("config: top level must be an object");
    detail::reject_unknown(j,
                           {"data_path", "date_column", "columns", "estimation_window", "roll", "strategies",
                            "output_dir", "seed", "periods_per_year", "r", "sharpe_test", "solver", "workers"},
                           "config");
    RunConfig c;
    c.data_path = get_or<std::string>(j, "data_path", "", "config");
    c.mapping.date_column = get_or<std::string>(j, "date_column", "date", "config");
    c.mapping.columns = get_or<std::vector<std::string>>(j, "columns", {}, "config");
    c.estimation_window = get_or<std::size_t>(j, "estimation_window", 260, "config");
    c.roll = get_or<std::size_t>(j, "roll", 26, "config");
    c.output_dir = get_or<std::string>(j, "output_dir", "out", "config");
    c.seed = get_or<std::uint64_t>(j, "seed", 1, "config");
    c.periods_per_year = get_or<double>(j, "periods_per_year", 52.0, "config");
    c.r = get_or<double>(j, "r", 0.05, "config");
    c.workers = get_or<unsigned>(j, "workers", 1, "config");
    if (j.contains("sharpe_test")) {
        const auto& s = j.at("sharpe_test");
        detail::reject_unknown(s, {"resamples", "block_size"}, "sharpe_test");
        c.sharpe_test.resamples = get_or<int>(s, "resamples", 5000, "sharpe_test");
        c.sharpe_test.block_size = get_or<int>(s, "block_size", 5, "sharpe_test");
    }
    if (j.contains("solver")) {
        const auto& s = j.at("solver");
        detail::reject_unknown(s, {"restarts", "max_iters", "diameter_tol", "initial_step"}, "solver");
        c.solver.restarts = get_or<int>(s, "restarts", 3, "solver");
        c.solver.max_iters = get_or<int>(s, "max_iters", 0, "solver");
        c.solver.diameter_tol = get_or<double>(s, "diameter_tol", 1e-6, "solver");
        c.solver.initial_step = get_or<double>(s, "initial_step", 0.25, "solver");
    }
    if (j.contains("strategies")) {
        const auto& arr = j.at("strategies");
        if (!arr.is_array()) throw InputError("config: strategies must be an array");
        for (std::size_t i = 0; i < arr.size(); ++i)
            c.strategies.push_back(detail::strategy_from_json(arr[i], c.mapping.columns, i));
    } else {
        c.strategies = default_strategies();
    }

    if (c.roll < 1) throw InputError("config: roll must be >= 1");
    if (c.estimation_window < 30) throw InputError("config: estimation_window must be >= 30");
    if (!(c.periods_per_year > 0.0)) throw InputError("config: periods_per_year must be > 0");
    if (!(c.r > 0.0 && c.r <= 0.5)) throw InputError("config: r must lie in (0, 0.5]");
    if (c.sharpe_test.resamples < 1 || c.sharpe_test.block_size < 1)
        throw InputError("config: sharpe_test values must be >= 1");
    if (c.workers < 1) throw InputError("config: workers must be >= 1");
    try {
        validate(c.solver);
    } catch (const ParameterError& e) {
        throw InputError(std::string("config: ") + e.what());
    }
    return c;
}

inline RunConfig load_run_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw InputError("config: cannot open " + path);
    nlohmann::json j;
    try {
        f >> j;
    } catch (const nlohmann::json::exception& e) {
        throw InputError("config: " + path + " is not valid JSON: " + e.what());
    }
    return run_config_from_json(j);
}

// Every field written out, so re-reading it reproduces the run.
inline nlohmann::json to_json(const RunConfig& c) {
    nlohmann::json j;
    j["data_path"] = c.data_path;
    j["date_column"] = c.mapping.date_column;
    j["columns"] = c.mapping.columns;
    j["estimation_window"] = c.estimation_window;
    j["roll"] = c.roll;
    j["output_dir"] = c.output_dir;
    j["seed"] = c.seed;
    j["periods_per_year"] = c.periods_per_year;
    j["r"] = c.r;
    j["workers"] = c.workers;
    j["sharpe_test"] = {{"resamples", c.sharpe_test.resamples}, {"block_size", c.sharpe_test.block_size}};
    j["solver"] = {{"restarts", c.solver.restarts},
                   {"max_iters", c.solver.max_iters},
                   {"diameter_tol", c.solver.diameter_tol},
                   {"initial_step", c.solver.initial_step}};
    j["strategies"] = nlohmann::json::array();
    for (const auto& s : c.strategies) j["strategies"].push_back(detail::strategy_to_json(s));
    return j;
}

// Short machine-readable name of an error's class.
inline std::string error_kind(const std::exception& e) {
    if (dynamic_cast<const InvalidMarginal*>(&e)) return "invalid_marginal";
    if (dynamic_cast<const UnsupportedMarginal*>(&e)) return "unsupported_marginal";
    if (dynamic_cast<const QuadratureError*>(&e)) return "quadrature";
    if (dynamic_cast<const DivergenceError*>(&e)) return "divergence";
    if (dynamic_cast<const DegenerateSample*>(&e)) return "degenerate_sample";
    if (dynamic_cast<const ParameterError*>(&e)) return "parameter";
    if (dynamic_cast<const InsufficientData*>(&e)) return "insufficient_data";
    if (dynamic_cast<const InfeasibleError*>(&e)) return "infeasible";
    if (dynamic_cast<const ObjectiveError*>(&e)) return "objective";
    if (dynamic_cast<const InputError*>(&e)) return "input";
    if (dynamic_cast<const Error*>(&e)) return "runtime";
    return "internal";
}

} // namespace renyi
