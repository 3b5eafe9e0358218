#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

namespace {

std::string bin() {
    const char* b = std::getenv("PERCLOC_BIN");
    REQUIRE(b != nullptr);
    return b;
}

struct RunResult {
    int code;
    std::string out;
};

RunResult run(const std::string& args) {
    std::string out_file = "cli_stdout.tmp";
    std::string cmd = bin() + " " + args + " > " + out_file + " 2> cli_stderr.tmp";
    int raw = std::system(cmd.c_str());
    RunResult r;
    r.code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    std::ifstream f(out_file, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    r.out = ss.str();
    return r;
}

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    REQUIRE(f.good());
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("ball subcommand emits the documented level counts") {
    RunResult r = run("ball --family t3 --radius 2");
    CHECK(r.code == 0);
    CHECK(r.out ==
          "level,vertices,edges_within,edges_down\r\n"
          "0,1,0,3\r\n"
          "1,3,0,6\r\n"
          "2,6,0,0\r\n");
}

TEST_CASE("harmonic on T3 radius 3 is uniform over 12 vertices") {
    RunResult r = run("harmonic --family t3 --radius 3");
    CHECK(r.code == 0);
    int rows = 0;
    std::stringstream ss(r.out);
    std::string line;
    std::getline(ss, line);  // header
    while (std::getline(ss, line)) {
        if (line.empty() || line == "\r") continue;
        CHECK(line.find("0.083333333333333") != std::string::npos);
        ++rows;
    }
    CHECK(rows == 12);
}

TEST_CASE("validation failures exit 2") {
    CHECK(run("percolate --family t3 --p-grid 0.5 --n-list 3").code == 2);  // no seed
    CHECK(run("frobnicate").code == 2);
    CHECK(run("ball --family t3 --bogus-flag 1").code == 2);
    CHECK(run("pc-estimate --family z2z3 --oracle --n-list 4").code == 2);
    CHECK(run("explore --family z2z3 --p 0.5 --master-seed 1").code == 2);  // no quotient
}

TEST_CASE("inconclusive computations exit 3") {
    // ball larger than the vertex cap
    RunResult r = run("ball --family t3 --radius 10 --vertex-cap 100");
    CHECK(r.code == 3);
}

TEST_CASE("determinism across thread counts, byte for byte") {
    std::string base =
        "percolate --family z2z3 --p-grid 0.45,0.6 --n-list 4 --trials 4000 "
        "--master-seed 99 ";
    RunResult a = run(base + "--threads 1 --out cli_t1.csv");
    RunResult b = run(base + "--threads 4 --out cli_t4.csv");
    REQUIRE(a.code == 0);
    REQUIRE(b.code == 0);
    CHECK(slurp("cli_t1.csv") == slurp("cli_t4.csv"));
}

TEST_CASE("manifest round-trip reproduces the data file") {
    RunResult a = run(
        "pc-estimate --family t3 --n-list 4 --theta-star 0.4 --trials 2000 "
        "--master-seed 5 --out cli_m1.csv");
    REQUIRE(a.code == 0);
    RunResult b = run("--config cli_m1.csv.manifest.json --out cli_m2.csv");
    REQUIRE(b.code == 0);
    CHECK(slurp("cli_m1.csv") == slurp("cli_m2.csv"));
}

TEST_CASE("quotient-check reports vanishing residuals") {
    RunResult r = run("quotient-check --family z2z3 --n-list 2,3 --jmax 6");
    REQUIRE(r.code == 0);
    std::stringstream ss(r.out);
    std::string line;
    std::getline(ss, line);
    CHECK(line.find("n,j,residual") == 0);
    int rows = 0;
    while (std::getline(ss, line)) {
        if (line.empty() || line == "\r") continue;
        auto last = line.rfind(',');
        double res = std::stod(line.substr(last + 1));
        CHECK(res <= 1e-12);
        ++rows;
    }
    CHECK(rows == 14);
}
