#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "lltrace/cli.hpp"

using namespace lltrace;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

Json run_json(std::vector<std::string> args) {
    const auto r = run(std::move(args));
    REQUIRE_MESSAGE(r.code == 0, r.err);
    return Json::parse(r.out);
}

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);)
        if (!line.empty()) out.push_back(line);
    return out;
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream in(line);
    for (std::string cell; std::getline(in, cell, ',');) out.push_back(cell);
    return out;
}

std::filesystem::path temp_file(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("lltrace_test_" + name);
}

}  // namespace

TEST_CASE("number formatting") {
    CHECK(format_number(0.1) == "0.1");
    CHECK(format_number(1.0 / 3) == "0.333333333333");
    CHECK(format_number(1e-20) == "1e-20");
    const Json doc{{"a", 1.0 / 3}, {"b", {2.0 / 3, 7}}, {"c", "text"}, {"d", 12345678901234567ull}};
    const auto r = round_significant(doc);
    CHECK(r["a"].get<double>() == std::stod("0.333333333333"));
    CHECK(r["b"][0].get<double>() == std::stod("0.666666666667"));
    CHECK(r["b"][1] == 7);
    CHECK(r["c"] == "text");
    CHECK(r["d"] == doc["d"]);
    CHECK(round_significant(r) == r);
}

TEST_CASE("params prints integer ell and real eta") {
    const auto j = run_json({"params", "--attack", "all1", "--c", "3", "--n", "1000", "--eps1", "0.05", "--eps2", "0.05",
                             "--mode", "simple"});
    CHECK(j["params"]["ell"].is_number_integer());
    CHECK(j["params"]["ell"] == 91);
    CHECK(j["params"]["eta"].is_number_float());
    // eta = ln(n / eps1) - ln(1 / eps2) = ln 1000 when eps1 = eps2.
    CHECK(j["params"]["eta"].get<double>() == doctest::Approx(std::log(1000.0)).epsilon(1e-11));
    CHECK(j["attack"] == "all1");
    CHECK(j["ratio"].get<double>() == doctest::Approx(91 / j["asymptotic_length"].get<double>()).epsilon(1e-11));
}

TEST_CASE("params in joint mode with one colluder equals simple mode") {
    for (const std::string attack : {"interleaving", "all1", "coinflip"}) {
        const std::vector<std::string> base{"params", "--attack", attack, "--c", "1", "--n", "500"};
        auto simple = base, joint = base;
        simple.insert(simple.end(), {"--mode", "simple", "--bias", "fixed:0.3"});
        joint.insert(joint.end(), {"--mode", "joint", "--bias", "fixed:0.3"});
        const auto s = run_json(simple), jt = run_json(joint);
        CHECK(s["params"] == jt["params"]);
        CHECK(s["p"] == jt["p"]);
    }
}

TEST_CASE("params with eps2 near one") {
    const auto j = run_json({"params", "--attack", "majority", "--c", "3", "--n", "1000", "--eps1", "0.01", "--eps2", "0.999999"});
    CHECK(j["params"]["gamma"].get<double>() < 1e-6);
    CHECK(j["params"]["eta"].get<double>() == doctest::Approx(std::log(1000 / 0.01)).epsilon(1e-6));
}

TEST_CASE("params designs") {
    const auto u = run_json({"params", "--design", "universal", "--c", "10", "--n", "10000", "--eps1", "0.05", "--eps2", "0.05"});
    CHECK(u["params"]["normalized_threshold"] == true);
    CHECK(u["params"]["eta"].get<double>() == doctest::Approx(universal_threshold(10000, 0.05)).epsilon(1e-11));
    const auto d = run_json({"params", "--design", "deterministic", "--attack", "all1", "--c", "2", "--n", "100", "--eps1", "0.01",
                             "--mode", "joint"});
    CHECK(d["params"]["ell"] == 20);
    const auto c = run_json({"params", "--design", "catch-all", "--attack", "all1", "--c", "3", "--n", "1000"});
    CHECK(c["params"]["notes"].size() == 1);
    const auto csv = run({"params", "--attack", "all1", "--c", "3", "--n", "1000", "--format", "csv"});
    CHECK(csv.code == 0);
    CHECK(lines(csv.out).size() == 2);
    CHECK(split(lines(csv.out)[0]).size() == split(lines(csv.out)[1]).size());
}

TEST_CASE("params rejects bad input") {
    CHECK(run({"params", "--mode", "both"}).code != 0);
    CHECK(run({"params", "--attack", "tardos"}).code != 0);
    CHECK(run({"params", "--c", "3", "--n", "10", "--eps1", "0.5", "--eps2", "0.001"}).code != 0);
    CHECK(run({"params", "--attack", "additive"}).code != 0);
    const auto r = run({"params", "--format", "xml"});
    CHECK(r.code != 0);
    CHECK_FALSE(r.err.empty());
    CHECK(run({"frobnicate"}).code != 0);
    CHECK(run({}).code != 0);
}

TEST_CASE("capacity reports the optimal bias") {
    const auto j = run_json({"capacity", "--attack", "all1", "--c", "100", "--mode", "simple"});
    REQUIRE(j["entries"].size() == 1);
    CHECK(std::abs(j["entries"][0]["optimal_p"].get<double>() - 0.00693) < 1e-4);
    for (const std::string attack : {"interleaving", "majority"}) {
        const auto s = run_json({"capacity", "--attack", attack, "--c", "3", "--mode", "simple"});
        CHECK(s["entries"][0]["optimal_p"].get<double>() == doctest::Approx(0.5).epsilon(1e-6));
    }
    const auto both = run_json({"capacity", "--attack", "all1,coinflip", "--c", "4", "--mode", "both", "--grid", "9"});
    CHECK(both["entries"].size() == 4);
    for (const auto& e : both["entries"]) {
        CHECK(e["curve"].size() == 9);
        for (const auto& pt : e["curve"]) CHECK(pt[1].get<double>() >= 0.0);
    }
}

TEST_CASE("capacity CSV sweep is reproducible") {
    const std::vector<std::string> args{"capacity", "--attack", "all", "--c", "5", "--grid", "19", "--format", "csv"};
    const auto a = run(args), b = run(args);
    CHECK(a.code == 0);
    CHECK(a.out == b.out);
    const auto rows = lines(a.out);
    CHECK(rows.size() == 1 + 5 * 2 * 19);
    CHECK(rows[0] == "attack,mode,p,mutual_info");
    CHECK(split(rows[1])[2] == "0.05");
}

TEST_CASE("simulate with a fixed seed is byte-identical") {
    const std::vector<std::string> args{"simulate", "--attack", "majority", "--c", "3", "--n", "60", "--trials", "40",
                                        "--seed", "42", "--decoder", "interleaving-g"};
    const auto a = run(args), b = run(args);
    CHECK(a.code == 0);
    CHECK(a.out == b.out);
    auto threaded = args;
    threaded.insert(threaded.end(), {"--threads", "3"});
    CHECK(Json::parse(run(threaded).out)["estimate"] == Json::parse(a.out)["estimate"]);
    auto other = args;
    other[10] = "43";
    CHECK(run(other).out != a.out);
}

TEST_CASE("simulate rejects zero trials") {
    const auto r = run({"simulate", "--trials", "0"});
    CHECK(r.code != 0);
    CHECK_FALSE(r.err.empty());
    CHECK(run({"simulate", "--ell", "100"}).code != 0);
    CHECK(run({"simulate", "--decoder", "joint-llr", "--mode", "simple"}).code != 0);
    CHECK(run({"simulate", "--decoder", "llr", "--bias", "arcsine"}).code != 0);
}

TEST_CASE("simulate the deterministic joint configuration") {
    const auto j = run_json({"simulate", "--attack", "all1", "--c", "2", "--n", "50", "--mode", "joint", "--eps1", "0.01",
                             "--trials", "60", "--seed", "5"});
    CHECK(j["config"]["decoder"] == "joint-llr");
    CHECK(j["config"]["ell"] == 18);
    CHECK(j["estimate"]["fn_catch_one"].get<double>() == 0.0);
    CHECK(j["estimate"]["miss_one_events"] == 0);
}

TEST_CASE("simulate output round-trips through the model types") {
    const auto j = run_json({"simulate", "--attack", "coinflip", "--c", "3", "--n", "40", "--trials", "30", "--decoder", "llr"});
    ExperimentConfig cfg;
    j["config"].get_to(cfg);
    const auto e = j["estimate"].get<ErrorEstimate>();
    const auto p = j["params"].get<SchemeParams>();
    CHECK(round_significant(Json(cfg)) == j["config"]);
    CHECK(round_significant(Json(e)) == j["estimate"]);
    CHECK(round_significant(Json(p)) == j["params"]);
    CHECK(cfg.ell == p.ell);
    CHECK(e.trials == 30);
    CHECK(round_significant(Json(estimate_errors(cfg))) == j["estimate"]);
}

TEST_CASE("simulate reads a config file and lets flags override it") {
    const auto path = temp_file("config.json");
    {
        std::ofstream f(path);
        f << R"({"n": 30, "c": 2, "attack": "minority", "decoder": "llr", "bias": "fixed:0.4",
                 "ell": 120, "eta": 3.5, "trials": 25, "seed": 7})";
    }
    const auto a = run_json({"simulate", "--config", path.string()});
    CHECK(a["config"]["n"] == 30);
    CHECK(a["config"]["attack"] == "minority");
    CHECK(a["config"]["ell"] == 120);
    CHECK(a["config"]["eta"] == 3.5);
    CHECK(a["config"]["seed"] == 7);
    CHECK(a["params"].is_null());
    const auto b = run_json({"simulate", "--config", path.string(), "--seed", "8", "--trials", "10"});
    CHECK(b["config"]["seed"] == 8);
    CHECK(b["config"]["trials"] == 10);
    CHECK(b["config"]["ell"] == 120);
    std::filesystem::remove(path);
    CHECK(run({"simulate", "--config", path.string()}).code != 0);
}

TEST_CASE("simulate CSV and file output") {
    const auto path = temp_file("sim.csv");
    const auto r = run({"simulate", "--attack", "all1", "--c", "2", "--n", "20", "--trials", "5", "--format", "csv", "--out",
                        path.string()});
    CHECK(r.code == 0);
    CHECK(r.out.empty());
    std::ifstream f(path);
    std::stringstream buf;
    buf << f.rdbuf();
    const auto rows = lines(buf.str());
    REQUIRE(rows.size() == 2);
    CHECK(split(rows[0]).size() == split(rows[1]).size());
    CHECK(rows[0].find("fp_rate") != std::string::npos);
    std::filesystem::remove(path);
}

TEST_CASE("histogram CSV") {
    const auto r = run({"histogram", "--n", "120", "--c", "4", "--ell", "400", "--trials", "2", "--bins", "50", "--range", "-5:5"});
    REQUIRE(r.code == 0);
    const auto rows = lines(r.out);
    REQUIRE(rows.size() == 51);
    const auto header = split(rows[0]);
    CHECK(header == std::vector<std::string>{"center", "interleaving", "all1", "majority", "minority", "coinflip", "reference"});
    double riemann = 0.0;
    for (std::size_t k = 1; k < rows.size(); ++k) {
        const auto cells = split(rows[k]);
        REQUIRE(cells.size() == 7);
        riemann += std::stod(cells.back()) * 0.2;
    }
    CHECK(std::abs(riemann - 1) < 0.01);

    const auto one = run({"histogram", "--attack", "majority", "--n", "60", "--c", "3", "--ell", "200", "--trials", "1",
                          "--bins", "8"});
    CHECK(lines(one.out).size() == 9);
    CHECK(split(lines(one.out)[0]).size() == 3);
}

TEST_CASE("histogram JSON") {
    const auto j = run_json({"histogram", "--n", "80", "--c", "3", "--ell", "300", "--trials", "2", "--bins", "10", "--format",
                             "json", "--seed", "4"});
    CHECK(j["attacks"].size() == 5);
    CHECK(j["centers"].size() == 10);
    for (const auto& a : j["attacks"]) {
        CHECK(a["density"].size() == 10);
        CHECK(a["samples"] == 2 * 77);
    }
    CHECK(run({"histogram", "--decoder", "joint-llr"}).code != 0);
    CHECK(run({"histogram", "--range", "5:-5"}).code != 0);
}
