#include "cli.hpp"

#include "wkbgreen/green.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

using namespace wkbgreen;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    args.insert(args.begin(), "wkbgreen");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    return cells;
}

/// Column `name` of the first data row.
std::string csv_cell(const std::string& text, const std::string& name) {
    std::istringstream in(text);
    std::string header, row;
    std::getline(in, header);
    std::getline(in, row);
    const auto h = split(header);
    const auto r = split(row);
    for (std::size_t i = 0; i < h.size(); ++i) {
        if (h[i] == name) return r.at(i);
    }
    return {};
}

std::filesystem::path temp_file(const std::string& name, const std::string& content) {
    const auto path = std::filesystem::temp_directory_path() / name;
    std::ofstream(path) << content;
    return path;
}

}  // namespace

TEST_CASE("green at a point matches the heat kernel") {
    const Run r = run({"green", "--hamiltonian", "heat", "--x", "1", "--xi", "0", "--t", "0.25", "--h", "0.05",
                       "--beta-limit"});
    REQUIRE(r.code == 0);
    const double v = std::stod(csv_cell(r.out, "value"));
    CHECK(std::abs(v / heat_exact(1, 0, 0.25, 0.05) - 1) < 1e-6);
    CHECK(csv_cell(r.out, "beta_or_limit") == "limit");
    CHECK(csv_cell(r.out, "kind") == "density");
}

TEST_CASE("green from the origin returns the delta sentinel") {
    const Run r = run({"green", "--hamiltonian", "degenerate", "--xi", "0", "--x", "0.5", "--t", "0.5", "--h", "0.1"});
    CHECK(r.code == 0);
    CHECK(csv_cell(r.out, "kind") == "delta-at-origin");
    CHECK(std::stod(csv_cell(r.out, "mass_factor")) == doctest::Approx(std::exp(0.1)));
}

TEST_CASE("missing t is a usage error") {
    const Run r = run({"green", "--hamiltonian", "heat", "--x", "1", "--h", "0.1"});
    CHECK(r.code == 2);
    CHECK(r.err.find("--t") != std::string::npos);
    CHECK(r.err.find("Usage") != std::string::npos);
}

TEST_CASE("parse errors and bad values exit with 2") {
    CHECK(run({"green", "--bogus", "1"}).code == 2);
    CHECK(run({}).code == 2);
    CHECK(run({"green", "--hamiltonian", "cubic", "--x", "1", "--t", "1", "--h", "1"}).code == 2);
    CHECK(run({"green", "--x", "1", "--t", "-1", "--h", "1"}).code == 2);
    CHECK(run({"validate", "nonsense"}).code == 2);
    CHECK(run({"green", "--help"}).code == 0);
}

TEST_CASE("solver failures exit with 3") {
    const Run r = run({"smallt", "--hamiltonian", "degenerate", "--x", "0.5", "--xi", "0", "--t", "0.1"});
    CHECK(r.code == 3);
    CHECK(r.err.find("delta") != std::string::npos);
}

TEST_CASE("green on a grid, JSON output with the resolved config") {
    const Run r = run({"green", "--hamiltonian", "degenerate", "--xi", "1", "--x-min", "0.8", "--x-max", "1.2", "--n",
                       "5", "--t", "0.1", "--h", "0.05", "--format", "json"});
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["rows"].size() == 5);
    CHECK(j["rows"][2]["x"] == doctest::Approx(1.0));
    CHECK(j["config"]["hamiltonian"]["kind"] == "degenerate");
    CHECK(j["config"]["t"] == 0.1);
    CHECK(j["config"]["n"] == 5);
}

TEST_CASE("green at a fixed beta") {
    const Run r = run({"green", "--x", "0", "--xi", "0", "--t", "0.25", "--h", "0.1", "--beta", "0.99"});
    REQUIRE(r.code == 0);
    CHECK(std::stod(csv_cell(r.out, "beta_or_limit")) == 0.99);
    const double v = std::stod(csv_cell(r.out, "value"));
    CHECK(std::abs(v * std::sqrt(2 * std::numbers::pi * 0.1 * (0.01 + 2 * 0.99 * 0.25)) - 1) < 1e-10);
    CHECK(run({"green", "--x", "0", "--t", "0.25", "--h", "0.1", "--beta", "0.9", "--beta-limit"}).code == 2);
}

TEST_CASE("manifold caustics") {
    const Run r = run({"manifold", "--hamiltonian", "degenerate", "--beta", "1", "--xi", "3", "--y", "0", "--t",
                       "0.6667", "--format", "json"});
    REQUIRE(r.code == 0);
    const auto c = nlohmann::json::parse(r.out)["caustics"]["caustics"];
    REQUIRE(c.size() == 2);
    CHECK(c[0].get<double>() == doctest::Approx(0.3170).epsilon(1e-3));
    CHECK(c[1].get<double>() == doctest::Approx(1.1830).epsilon(1e-3));

    const Run heat = run({"manifold", "--hamiltonian", "heat", "--xi", "0", "--t", "1", "--format", "json"});
    CHECK(nlohmann::json::parse(heat.out)["caustics"]["count"] == 0);

    const Run small = run({"manifold", "--hamiltonian", "degenerate", "--beta", "0.5", "--xi", "1", "--t", "0.05",
                           "--x0-min", "-1", "--x0-max", "1", "--format", "json"});
    CHECK(nlohmann::json::parse(small.out)["caustics"]["count"] == 0);

    const auto path = std::filesystem::temp_directory_path() / "wkbgreen_caustics.json";
    const Run csv = run({"manifold", "--xi", "3", "--t", "0.6667", "--n", "50", "--caustics", path.string()});
    CHECK(csv.out.rfind("x0,x,p_x,J0\n", 0) == 0);
    std::ifstream in(path);
    CHECK(nlohmann::json::parse(in)["caustics"]["count"] == 2);
}

TEST_CASE("smallt at x = e") {
    const Run r = run({"smallt", "--hamiltonian", "degenerate", "--x", "2.718", "--xi", "1", "--t", "0.01"});
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(std::abs(j["S"].get<double>() / 25.0 - 1) < 0.005);
    CHECK(j["config"]["x"] == 2.718);

    const Run c = run({"smallt", "--x", "1.1", "--xi", "1", "--t", "0.1", "--format", "csv"});
    CHECK(std::stod(csv_cell(c.out, "S_leading")) == doctest::Approx(std::pow(std::log(1.1), 2) / 0.4));
}

TEST_CASE("oracle moment law") {
    const Run r = run({"oracle", "--hamiltonian", "degenerate", "--moment", "2", "--h", "0.05", "--t", "0.5"});
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(std::abs(j["ratio"].get<double>() / std::exp(0.3) - 1) < 0.01);
    CHECK(j["moments"].size() == 11);
    CHECK(j.contains("config"));

    const auto frames = std::filesystem::temp_directory_path() / "wkbgreen_frames.csv";
    const Run f = run({"oracle", "--moment", "0", "--h", "0.05", "--t", "0.1", "--n", "201", "--frame-count", "3",
                       "--frames", frames.string()});
    CHECK(f.code == 0);
    std::ifstream in(frames);
    std::string header;
    std::getline(in, header);
    CHECK(header == "t,x,u");
}

TEST_CASE("oracle comparison report") {
    const Run r = run({"oracle", "--hamiltonian", "heat", "--x", "0.5", "--xi", "0", "--t", "0.5", "--h", "0.1",
                       "--sigma", "0.01"});
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["rel_error"].get<double>() <= 0.02);
    CHECK(j["config"]["sigma"] == 0.01);
}

TEST_CASE("validate heat") {
    const Run r = run({"validate", "heat"});
    CHECK(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["passed"] == true);
    CHECK(j["criteria"].size() == 2);
    CHECK(j["suite"] == "heat");
}

TEST_CASE("config file with flag precedence") {
    const auto path = temp_file("wkbgreen_cfg.json",
                                R"({"hamiltonian":{"kind":"heat"},"x":1.0,"xi":0.0,"t":0.5,"h":0.05,"format":"json"})");
    const Run file = run({"green", "--config", path.string()});
    REQUIRE(file.code == 0);
    auto j = nlohmann::json::parse(file.out);
    CHECK(j["config"]["t"] == 0.5);
    CHECK(j["rows"][0]["value"].get<double>() == doctest::Approx(heat_exact(1, 0, 0.5, 0.05)).epsilon(1e-6));

    const Run flag = run({"green", "--config", path.string(), "--t", "0.25"});
    REQUIRE(flag.code == 0);
    j = nlohmann::json::parse(flag.out);
    CHECK(j["config"]["t"] == 0.25);
    CHECK(j["rows"][0]["value"].get<double>() == doctest::Approx(heat_exact(1, 0, 0.25, 0.05)).epsilon(1e-6));

    const Run kind = run({"green", "--config", path.string(), "--hamiltonian", "degenerate", "--xi", "1"});
    REQUIRE(kind.code == 0);
    CHECK(nlohmann::json::parse(kind.out)["config"]["hamiltonian"]["kind"] == "degenerate");

    const auto bad = temp_file("wkbgreen_bad.json", R"({"x":1,"colour":"red"})");
    CHECK(run({"green", "--config", bad.string()}).code == 2);
    const auto broken = temp_file("wkbgreen_broken.json", "{x:");
    CHECK(run({"green", "--config", broken.string()}).code == 2);
    CHECK(run({"green", "--config", "/nonexistent/cfg.json"}).code == 2);
}

TEST_CASE("identical runs give identical bytes") {
    const std::vector<std::string> args = {"green", "--hamiltonian", "degenerate", "--xi", "1", "--x-min", "0.5",
                                           "--x-max", "1.5", "--n", "21", "--t", "0.2", "--h", "0.05"};
    const Run a = run(args);
    const Run b = run(args);
    CHECK(a.code == 0);
    CHECK(a.out == b.out);
}

TEST_CASE("output goes to the requested file") {
    const auto path = std::filesystem::temp_directory_path() / "wkbgreen_out.csv";
    const Run r = run({"green", "--x", "0.5", "--t", "0.3", "--h", "0.1", "--output", path.string()});
    CHECK(r.code == 0);
    CHECK(r.out.empty());
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header.rfind("x,xi,t,h,beta_or_limit", 0) == 0);
}
