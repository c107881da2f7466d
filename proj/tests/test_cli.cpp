#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "qgraph/cli.hpp"
#include "test_support.hpp"

using namespace qgraph;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("grid parsing") {
    CHECK(parse_grid("1:2:3") == std::vector<double>{1.0, 1.5, 2.0});
    CHECK(parse_grid("1,4,9") == std::vector<double>{1.0, 4.0, 9.0});
    CHECK_THROWS_AS(parse_grid(""), Error);
}

TEST_CASE("check") {
    const Run ok = run({"check", "--interface", "standard", "--n", "3"});
    CHECK(ok.code == exit_ok);
    CHECK(ok.out.find("r = 1") != std::string::npos);
    CHECK(ok.out.find("D4: ok") != std::string::npos);

    CHECK(run({"check", "--interface", data_path("section3_interface.json")}).code == exit_validation);
    CHECK(run({"check", "--interface", data_path("not_self_adjoint.json")}).code == exit_validation);
    CHECK(run({"check", "--interface", data_path("does_not_exist.json")}).code == exit_io);
    CHECK(run({"check", "--bogus"}).code == exit_validation);
}

TEST_CASE("check round-trips the interface through --out") {
    const auto path = std::filesystem::temp_directory_path() / "qgraph_cli_roundtrip.json";
    const Run first = run({"check", "--interface", "standard", "--n", "3", "--out", path.string()});
    REQUIRE(first.code == exit_ok);
    const Run second = run({"check", "--interface", path.string()});
    CHECK(second.code == exit_ok);
    CHECK(second.out == first.out);
    std::filesystem::remove(path);
}

TEST_CASE("scan and point") {
    const Run s = run({"scan", "--graph", data_path("three_pi.json"), "--grid", "1,4"});
    CHECK(s.code == exit_ok);
    CHECK(s.out.find("1,3,2,N0>r") != std::string::npos);
    CHECK(run({"scan", "--graph", data_path("mostly_artificial.json"), "--interface", "antidecoupled", "--grid", "1"})
              .code == exit_validation);
    const Run p = run({"point", "--graph", data_path("three_pi.json"), "--grid", "2.25"});
    CHECK(p.code == exit_ok);
    CHECK(p.out.find(",0,1,2\n") != std::string::npos);
}

TEST_CASE("output is deterministic") {
    const std::vector<std::string> args{"reduce", "--interface", "antidecoupled", "--n", "4", "--k", "2", "--seed", "5"};
    const Run a = run(args);
    const Run b = run(args);
    CHECK(a.code == exit_ok);
    CHECK(a.out == b.out);
    const std::vector<std::string> w{"weyl", "--graph", data_path("mixed_potential.json"), "--z", "1,0.5;3,1"};
    CHECK(run(w).out == run(w).out);
}

TEST_CASE("oracle") {
    const auto path = std::filesystem::temp_directory_path() / "qgraph_cli_empty.csv";
    const Run empty = run({"oracle", "--graph", data_path("three_pi.json"), "--window", "0.3:0.4", "--points-per-edge",
                           "200", "--out", path.string()});
    CHECK(empty.code == exit_ok);
    CHECK(slurp(path) == "center,multiplicity,spread\n");
    std::filesystem::remove(path);

    const Run pred = run({"oracle", "--graph", data_path("three_pi.json"), "--predictions",
                          data_path("predictions_three_pi.json")});
    CHECK(pred.code == exit_ok);
}

}
