#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
    const std::string cmd = std::string(XCSGE_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct CliDir {
    fs::path dir;
    CliDir() : dir(fs::temp_directory_path() / "xcsge_cli_test") {
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    ~CliDir() { fs::remove_all(dir); }
    std::string operator/(const std::string& name) const { return (dir / name).string(); }
};

} // namespace

TEST_CASE("help and defaults exit cleanly") {
    CHECK(run("--help") == 0);
    CHECK(run("--print-defaults") == 0);
}

TEST_CASE("missing inputs exit with the config code") {
    CHECK(run("train --config /nonexistent.json") == 2);
    CHECK(run("predict --model /none.json --input /none.csv --schema /none.json") == 2);
    CHECK(run("ranktest --scores /none.csv") == 2);
}

TEST_CASE("train, predict and crossval run end to end") {
    CliDir tmp;
    REQUIRE(run("synth --seed 5 --n 400 --horizon 2 --out " + (tmp / "data")) == 0);
    REQUIRE(fs::exists(tmp / "data/dataset.csv"));

    {
        std::ofstream cfg(tmp / "config.json");
        cfg << R"({
            "dataset": ")" << (tmp / "data/dataset.csv") << R"(",
            "schema": ")" << (tmp / "data/schema.json") << R"(",
            "seed": 1,
            "split": {"folds": 3, "base_fraction": 0.7},
            "members": [
                {"type": "ridge", "id": "ridge", "lambda": 1.0},
                {"type": "persistence", "id": "persistence"}
            ],
            "eta_grid": [0, 1, 2],
            "metric": "rmse"
        })";
    }
    REQUIRE(run("train --config " + (tmp / "config.json") + " --out " + (tmp / "run")) == 0);
    CHECK(fs::exists(tmp / "run/model.json"));
    CHECK(slurp(tmp / "run/training_report.txt").find("eta_global") != std::string::npos);

    REQUIRE(run("predict --model " + (tmp / "run/model.json") + " --input " +
                (tmp / "data/dataset.csv") + " --schema " + (tmp / "data/schema.json") +
                " --out " + (tmp / "preds.csv")) == 0);
    const std::string preds = slurp(tmp / "preds.csv");
    CHECK(preds.rfind("sample_id,leadtime,p_0", 0) == 0);

    REQUIRE(run("crossval --config " + (tmp / "config.json") + " --out " + (tmp / "cv")) == 0);
    const std::string report = slurp(tmp / "cv/crossval_report.csv");
    CHECK(report.find("xcsge") != std::string::npos);
    CHECK(report.find("skill_percent") != std::string::npos);
}

TEST_CASE("data validation failures exit with code 3") {
    CliDir tmp;
    {
        std::ofstream csv(tmp / "bad.csv");
        csv << "timestamp,x0,x1,y_prev,y\n"
            << "0,1.0,junk,0.0,0.0\n";
    }
    {
        std::ofstream schema(tmp / "schema.json");
        schema << R"({"features": ["x0", "x1", "y_prev"], "targets": ["y"],)"
               << R"( "timestamp": "timestamp"})";
    }
    {
        std::ofstream cfg(tmp / "config.json");
        cfg << R"({"dataset": ")" << (tmp / "bad.csv") << R"(",)"
            << R"( "schema": ")" << (tmp / "schema.json") << R"(",)"
            << R"( "seed": 1, "members": [{"type": "persistence"}]})";
    }
    CHECK(run("train --config " + (tmp / "config.json") + " --out " + (tmp / "out")) == 3);
}

TEST_CASE("ranktest emits the summary csv") {
    CliDir tmp;
    {
        std::ofstream scores(tmp / "scores.csv");
        scores << "dataset,a,b\n";
        for (int d = 0; d < 6; ++d)
            scores << "d" << d << "," << 0.1 + 0.01 * d << "," << 0.3 + 0.01 * d << "\n";
    }
    REQUIRE(run("ranktest --scores " + (tmp / "scores.csv") + " --alpha 0.05 --out " +
                (tmp / "rank.csv")) == 0);
    const std::string out = slurp(tmp / "rank.csv");
    CHECK(out.find("friedman_statistic") != std::string::npos);
    CHECK(out.find("critical_difference") != std::string::npos);
    CHECK(out.find("a|b,1") != std::string::npos);  // clear separation is significant
}
