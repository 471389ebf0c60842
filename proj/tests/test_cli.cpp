#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

// End-to-end checks of the installed command surface: subcommands, flag
// precedence, exit codes, output files.

namespace {

const std::string kCli = TANGLESIM_CLI_PATH;

int run(const std::string& args) {
    const std::string cmd = kCli + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::filesystem::path fresh_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / name;
    std::filesystem::remove_all(dir);
    return dir;
}

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("help exits cleanly, missing subcommand does not") {
    CHECK(run("--help") == 0);
    CHECK(run("") == 1);
    CHECK(run("frobnicate") == 1);
}

TEST_CASE("validation failures exit with code 1") {
    CHECK(run("run --buses -3") == 1);
    CHECK(run("run --policy nonsense") == 1);
    CHECK(run("run --config /no/such/file.ini") == 1);

    const auto dir = fresh_dir("tanglesim_cli_badcfg");
    std::filesystem::create_directories(dir);
    std::ofstream(dir / "bad.ini") << "[pool]\nsizee = 60\n";
    CHECK(run("run --config " + (dir / "bad.ini").string()) == 1);
    std::filesystem::remove_all(dir);
}

TEST_CASE("report on a missing directory exits with the I/O code") {
    CHECK(run("report --out-dir /no/such/dir") == 3);
}

TEST_CASE("run executes a cell, honors flag precedence, and is reproducible") {
    const auto dir = fresh_dir("tanglesim_cli_run");
    const auto cfg = std::filesystem::temp_directory_path() / "tanglesim_cli_run.ini";
    std::ofstream(cfg) << "[scenario]\npolicy = fixed-random\nbus_count = 30\n"
                          "replications = 2\n";

    // --policy overrides the file value
    CHECK(run("run --config " + cfg.string() + " --policy dynamic-random --buses 10 " +
              "--out-dir " + dir.string() + " --seed 5 --quiet") == 0);
    const auto cell = dir / "dynamic-random" / "10";
    REQUIRE(std::filesystem::exists(cell / "summary.json"));
    CHECK(std::filesystem::exists(cell / "records_rep00.csv"));
    CHECK(std::filesystem::exists(cell / "records_rep01.csv"));

    const std::string summary1 = slurp(cell / "summary.json");
    const auto dir2 = fresh_dir("tanglesim_cli_run2");
    CHECK(run("run --config " + cfg.string() + " --policy dynamic-random --buses 10 " +
              "--out-dir " + dir2.string() + " --seed 5 --quiet") == 0);
    CHECK(slurp(dir2 / "dynamic-random" / "10" / "summary.json") == summary1);

    SUBCASE("report re-aggregates the tree") {
        CHECK(run("report --out-dir " + dir.string() + " --quiet") == 0);
        CHECK(std::filesystem::exists(dir / "summary_table.txt"));
    }

    std::filesystem::remove_all(dir);
    std::filesystem::remove_all(dir2);
    std::filesystem::remove(cfg);
}

TEST_CASE("calibrate prints the chosen factor") {
    const auto dir = fresh_dir("tanglesim_cli_cal");
    const std::string cmd = kCli + " calibrate --buses 10 --replications 1 --quiet" +
                            " --scales 0.9,1.0 --target 22.99 --out-dir " + dir.string() +
                            " > " + (std::filesystem::temp_directory_path() /
                                     "tanglesim_cal_out.txt")
                                        .string() +
                            " 2>&1";
    CHECK(WEXITSTATUS(std::system(cmd.c_str())) == 0);
    const std::string out =
        slurp(std::filesystem::temp_directory_path() / "tanglesim_cal_out.txt");
    CHECK(out.find("best service_scale:") != std::string::npos);
    std::filesystem::remove_all(dir);
}

TEST_CASE("trace files feed the workload") {
    const auto trace = std::filesystem::temp_directory_path() / "tanglesim_cli_trace.csv";
    {
        std::ofstream out(trace);
        out << "# bus_id,timestamp,lat,lon\n";
        for (int bus = 0; bus < 5; ++bus) {
            for (int i = 0; i < 10; ++i) {
                out << "veh-" << bus << ',' << (i * 300 + bus * 7) << ",-22.9,-43.2\n";
            }
        }
    }
    const auto dir = fresh_dir("tanglesim_cli_tracerun");
    CHECK(run("run --buses 5 --replications 1 --trace " + trace.string() +
              " --out-dir " + dir.string() + " --seed 2 --quiet") == 0);
    const std::string summary = slurp(dir / "adaptive-rtt" / "5" / "summary.json");
    CHECK(summary.find("\"scheduled_publications\": 50") != std::string::npos);
    std::filesystem::remove_all(dir);
    std::filesystem::remove(trace);
}
