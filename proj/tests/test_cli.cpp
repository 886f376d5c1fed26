#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <catch_amalgamated.hpp>
#include <json.hpp>

#include <renyi/io.hpp>

namespace fs = std::filesystem;
using namespace renyi;

namespace {

struct Run {
    int code = -1;
    std::string out;
};

// Runs the CLI with stderr folded into the captured output.
Run cli(const std::string& args) {
    const std::string cmd = std::string("\"") + RENYI_CLI_PATH + "\" " + args + " 2>&1";
    Run r;
    FILE* p = popen(cmd.c_str(), "r");
    REQUIRE(p);
    char buf[4096];
    while (std::size_t n = std::fread(buf, 1, sizeof buf, p)) r.out.append(buf, n);
    const int st = pclose(p);
    r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

fs::path workdir(const std::string& name) {
    const fs::path d = fs::path(RENYI_WORK_DIR) / name;
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

void write_panel(const fs::path& dir) {
    Eigen::Vector3d mu(0.002, 0.001, 0.0015);
    Eigen::Matrix3d c;
    c << 4, 0.5, 1, 0.5, 1, 0.2, 1, 0.2, 2;
    auto p = gaussian_panel(mu, c * 1e-4, 150, 3);
    p.asset_names = {"EQ", "BD", "CM"};
    write_returns_csv((dir / "panel.csv").string(), p);
}

void write_config(const fs::path& dir, const std::string& strategies) {
    std::ofstream f(dir / "run.json");
    f << R"({"data_path": "panel.csv", "columns": ["EQ", "BD", "CM"], "estimation_window": 60, "roll": 10,
             "output_dir": "out", "sharpe_test": {"resamples": 99}, "strategies": )"
      << strategies << "}\n";
}

const char* kStrategies = R"([{"kind": "ropt", "name": "ROpt", "alpha": 0.7}, {"kind": "mv", "name": "MV", "covariance": "sample"},
    {"kind": "ew", "name": "EW"}, {"kind": "sixty_forty", "name": "60/40", "equity": "EQ", "bond": "BD"}])";

} // namespace

TEST_CASE("usage errors exit with 2") {
    CHECK(cli("").code == 2);
    CHECK(cli("frobnicate").code == 2);
    const auto r = cli("study no-such-study");
    CHECK(r.code == 2);
    CHECK(r.out.find("comonotonic") != std::string::npos);
    CHECK(cli("estimate --column A --alpha 1").code == 2);
    CHECK(cli("--help").code == 0);
}

TEST_CASE("study to stdout and to a directory") {
    const auto r = cli("study comonotonic");
    REQUIRE(r.code == 0);
    CHECK(r.out.rfind("# schema=renyi/1\n", 0) == 0);
    CHECK(r.out.find("superadditive,1") != std::string::npos);
    const auto d = workdir("study");
    REQUIRE(cli("study comonotonic --out \"" + d.string() + "\"").code == 0);
    CHECK(slurp(d / "comonotonic.csv") == r.out);
}

TEST_CASE("backtest artifacts are reproducible") {
    const auto d = workdir("backtest");
    write_panel(d);
    write_config(d, kStrategies);
    const auto r1 = cli("backtest --config \"" + (d / "run.json").string() + "\"");
    INFO(r1.out);
    REQUIRE(r1.code == 0);
    for (const char* f : {"report.csv", "weights.csv", "returns.csv", "sharpe_pvalues.csv", "effective_config.json"})
        CHECK(fs::exists(d / "out" / f));
    CHECK_FALSE(fs::exists(d / "out" / "error.json"));

    const auto report = slurp(d / "out" / "report.csv");
    // EW and 60/40 never move their targets.
    std::istringstream rs(report);
    std::string line;
    int checked = 0;
    while (std::getline(rs, line))
        if (line.rfind("EW,", 0) == 0 || line.rfind("60/40,", 0) == 0) {
            CHECK(line.find(",ok,") != std::string::npos);
            const auto cells = detail::split_csv_line(line);
            CHECK(cells.at(13) == "0");
            ++checked;
        }
    CHECK(checked == 2);

    // A rerun from the effective config, with several workers, is byte-identical.
    const auto d2 = workdir("backtest_rerun");
    fs::copy_file(d / "panel.csv", d2 / "panel.csv");
    auto eff = nlohmann::json::parse(slurp(d / "out" / "effective_config.json"));
    eff["output_dir"] = "out";
    std::ofstream(d2 / "run.json") << eff.dump(2);
    const std::string cmd = "RENYI_WORKERS=3 \"" + std::string(RENYI_CLI_PATH) + "\" backtest --config \"" +
                            (d2 / "run.json").string() + "\" > /dev/null 2>&1";
    REQUIRE(std::system(cmd.c_str()) == 0);
    for (const char* f : {"report.csv", "weights.csv", "returns.csv", "sharpe_pvalues.csv"}) {
        INFO(f);
        CHECK(slurp(d / "out" / f) == slurp(d2 / "out" / f));
    }
    // Paths differ between the two run directories; everything else must not.
    auto e1 = nlohmann::json::parse(slurp(d / "out" / "effective_config.json"));
    auto e2 = nlohmann::json::parse(slurp(d2 / "out" / "effective_config.json"));
    for (auto* e : {&e1, &e2}) {
        e->erase("data_path");
        e->erase("output_dir");
    }
    CHECK(e1 == e2);
}

TEST_CASE("validate and estimate") {
    const auto d = workdir("validate");
    write_panel(d);
    write_config(d, kStrategies);
    const auto v = cli("validate --config \"" + (d / "run.json").string() + "\"");
    CHECK(v.code == 0);
    CHECK(v.out.find("150 rows x 3 assets") != std::string::npos);
    CHECK(v.out.find("9 windows") != std::string::npos);

    const auto e = cli("estimate --data \"" + (d / "panel.csv").string() + "\" --column BD --alpha 0.7 --m 5");
    CHECK(e.code == 0);
    CHECK(e.out.find("BD,150,0.7,5,false,") != std::string::npos);
}

TEST_CASE("failures produce a structured error record") {
    const auto d = workdir("bad");
    std::ofstream(d / "panel.csv") << "date,EQ,BD,CM\n2020-01-03,0.1,,0.2\n";
    write_config(d, kStrategies);
    const auto r = cli("backtest --config \"" + (d / "run.json").string() + "\"");
    CHECK(r.code == 1);
    CHECK(r.out.find("line 2, column BD: missing value") != std::string::npos);
    REQUIRE(fs::exists(d / "out" / "error.json"));
    const auto j = nlohmann::json::parse(slurp(d / "out" / "error.json"));
    CHECK(j["schema"] == "renyi/1");
    CHECK(j["command"] == "backtest");
    CHECK(j["error"]["kind"] == "input");

    const auto d2 = workdir("bad_config");
    std::ofstream(d2 / "run.json") << R"({"data_path": "x.csv", "rolll": 3})";
    const auto v = cli("validate --config \"" + (d2 / "run.json").string() + "\"");
    CHECK(v.code == 1);
    CHECK(v.out.find("rolll") != std::string::npos);
}

TEST_CASE("a failing strategy still writes the other artifacts") {
    const auto d = workdir("partial");
    write_panel(d);
    // m above the window length only fails once a window is solved.
    write_config(d, R"([{"kind": "ew", "name": "EW"}, {"kind": "ropt", "name": "bad", "m": 500}])");
    const auto r = cli("backtest --config \"" + (d / "run.json").string() + "\"");
    CHECK(r.code == 1);
    CHECK(fs::exists(d / "out" / "report.csv"));
    CHECK(fs::exists(d / "out" / "returns.csv"));
    REQUIRE(fs::exists(d / "out" / "error.json"));
    CHECK(slurp(d / "out" / "error.json").find("window 0") != std::string::npos);
    CHECK(slurp(d / "out" / "report.csv").find("EW,ok,") != std::string::npos);
}

TEST_CASE("an asset index past the last column is a config error") {
    const auto d = workdir("bad_index");
    write_panel(d);
    write_config(d, R"([{"kind": "sixty_forty", "equity": 0, "bond": 7}])");
    const auto r = cli("validate --config \"" + (d / "run.json").string() + "\"");
    CHECK(r.code == 1);
    CHECK(r.out.find("past the last column") != std::string::npos);
}
