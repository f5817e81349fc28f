#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "commands.hpp"
#include "config.hpp"
#include "doctest.h"
#include "oracle.hpp"
#include "report.hpp"

namespace fs = std::filesystem;
using namespace fermsig;
using namespace fermsig::cli;

namespace {

fs::path scratch() {
    static const fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / ("fermsig_cli_" + std::to_string(::getpid()));
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

int run(const std::string& args, const std::string& env = "") {
    const std::string cmd = env + " " + std::string(FERMSIG_EXE) + " " + args + " 2>/dev/null";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct Csv {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    double at(std::size_t r, const std::string& col) const {
        for (std::size_t c = 0; c < columns.size(); ++c) {
            if (columns[c] == col) return std::stod(rows[r][c]);
        }
        FAIL("no column " << col);
        return 0.0;
    }
};

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    return out;
}

Csv read_csv(const fs::path& p) {
    std::ifstream in(p);
    Csv csv;
    std::string line;
    std::getline(in, line);
    csv.columns = split(line);
    while (std::getline(in, line)) csv.rows.push_back(split(line));
    return csv;
}

std::string out(const std::string& name) { return (scratch() / name).string(); }

}  // namespace

TEST_CASE("report formatting") {
    CHECK(format_double(0.1) == "0.10000000000000001");
    CHECK(format_double(-0.0) == "0");
    CHECK(format_double(1.0) == "1");
    CHECK(std::stod(format_double(M_PI)) == M_PI);

    Table t{{"a", "b", "c"}, {{1.5, 2LL, std::string("x")}, {-0.0, 3LL, std::string("y")}}};
    CHECK(to_csv(t) == "a,b,c\n1.5,2,x\n0,3,y\n");

    nlohmann::ordered_json j;
    j["schema_version"] = kSchemaVersion;
    j["v"] = {1.0, 0.5};
    j["bad"] = std::nan("");
    const std::string s = dump(j);
    CHECK(s == "{\n  \"schema_version\": \"1\",\n  \"v\": [1, 0.5],\n  \"bad\": null\n}\n");
    CHECK(nlohmann::json::parse(s)["v"][1] == 0.5);
}

TEST_CASE("config overrides and validation") {
    nlohmann::json doc = nlohmann::json::object();
    apply_override(doc, "rtol=1e-8");
    apply_override(doc, "times.count=3");
    apply_override(doc, "spacetime=ultrastatic");
    apply_override(doc, "lambda_list=[0.5, -1.5]");
    const RunConfig c = parse_config(doc);
    CHECK(c.rtol == 1e-8);
    CHECK(c.times.count == 3);
    CHECK(c.spacetime == "ultrastatic");
    CHECK(c.sorted_lambdas() == std::vector<double>{-1.5, 0.5});
    CHECK(c.masses().size() == 9);

    CHECK_THROWS_AS(apply_override(doc, "novalue"), ConfigError);
    CHECK_THROWS_AS(apply_override(doc, "a..b=1"), ConfigError);

    auto rejects = [](const std::string& assignment) {
        nlohmann::json d = nlohmann::json::object();
        apply_override(d, assignment);
        CHECK_THROWS_AS(parse_config(d), ConfigError);
    };
    rejects("lambda_list=[]");
    rejects("lambda_list=[1.5, 1.5]");
    rejects("lambda_list=[0.3]");
    rejects("lambda_list=[10.5]");
    rejects("rtol=0");
    rejects("rtol=\"small\"");
    rejects("eps=1e-16");
    rejects("mass_interval=[2, 1]");
    rejects("u0=[0, 0]");
    rejects("unknown_key=1");
    rejects("times.bogus=1");
    rejects("spacetime=minkowski");
    rejects("format=xml");

    // the budget applies to de Sitter only
    nlohmann::json us = {{"spacetime", "ultrastatic"}, {"lambda_list", {12.3}}};
    CHECK_NOTHROW(parse_config(us));
}

TEST_CASE("config echo round-trips") {
    nlohmann::json doc = {{"lambda_list", {2.5, 0.5}}, {"u0", {{0.6, 0.0}, {0.0, 0.8}}}, {"mass_grid", {1.25}}};
    const RunConfig c = parse_config(doc);
    const auto echo = to_json(c);
    const RunConfig again = parse_config(nlohmann::json::parse(echo.dump()));
    CHECK(to_json(again) == echo);
    CHECK(again.u0.u2 == cplx(0.0, 0.8));
}

TEST_CASE("exit codes") {
    CHECK(run("evolve --set lambda_list=[1.5] --set mass_grid=[1] --set times.count=3 --out " + out("ok.csv")) == 0);
    CHECK(run("evolve --set 'lambda_list=[]' --out " + out("x.csv")) == 2);
    CHECK(run("evolve --set bogus=1 --out " + out("x.csv")) == 2);
    CHECK(run("evolve --set rtol --out " + out("x.csv")) == 2);
    CHECK(run("evolve --set 'lambda_list=[10.5]' --out " + out("x.csv")) == 2);
    CHECK(run("evolve --config /nonexistent/cfg.json --out " + out("x.csv")) == 2);
    CHECK(run("evolve --set lambda_list=[1.5]") == 2);
    CHECK(run("frobnicate --out " + out("x.csv")) == 2);
    CHECK(run("sweep --set spacetime=ultrastatic --out " + out("x.csv")) == 2);
    CHECK(run("evolve --out /nonexistent/dir/x.csv --set mass_grid=[1] --set times.count=2") == 2);
    CHECK(run("sweep --set mass_grid=[1] --out " + out("x.csv"), "FERMSIG_THREADS=zero") == 2);
    CHECK(run("sweep --set mass_grid=[1] --out " + out("x.csv"), "FERMSIG_THREADS=-3") == 2);
}

TEST_CASE("golden evolve file") {
    const fs::path data(FERMSIG_TEST_DATA);
    const std::string path = out("golden.csv");
    REQUIRE(run("evolve --config " + (data / "golden_evolve.json").string() + " --out " + path) == 0);
    const Csv now = read_csv(path);
    const Csv frozen = read_csv(data / "golden_evolve.csv");
    REQUIRE(now.columns == frozen.columns);
    REQUIRE(now.rows.size() == 11);
    REQUIRE(frozen.rows.size() == 11);
    for (std::size_t r = 0; r < now.rows.size(); ++r) {
        const double t = now.at(r, "t");
        CHECK(t == static_cast<double>(r));
        // independent reference
        const SpinorPair ref = oracle::evolve(SpinorPair(1.0, 0.0), 1.5, 1.0, 0.0, t);
        CHECK(std::abs(now.at(r, "re_u1") - ref.u1.real()) < 1e-9);
        CHECK(std::abs(now.at(r, "im_u1") - ref.u1.imag()) < 1e-9);
        CHECK(std::abs(now.at(r, "re_u2") - ref.u2.real()) < 1e-9);
        CHECK(std::abs(now.at(r, "im_u2") - ref.u2.imag()) < 1e-9);
        for (std::size_t c = 0; c < now.columns.size(); ++c) {
            CHECK(std::abs(std::stod(now.rows[r][c]) - std::stod(frozen.rows[r][c])) < 1e-10);
        }
        CHECK(std::abs(now.at(r, "norm") - 1.0) < 1e-10);
        CHECK(std::abs(now.at(r, "current") - 2.0 * M_PI * now.at(r, "norm") * now.at(r, "norm")) < 1e-12);
    }
}

TEST_CASE("outputs are sorted and independent of thread count") {
    const std::string args = "evolve --set 'lambda_list=[2.5, -1.5, 0.5]' --set 'mass_grid=[1.8, 1.2]' "
                             "--set times.start=-1 --set times.stop=1 --set times.count=5 --out ";
    REQUIRE(run(args + out("t1.csv"), "FERMSIG_THREADS=1") == 0);
    REQUIRE(run(args + out("t5.csv"), "FERMSIG_THREADS=5") == 0);
    CHECK(slurp(out("t1.csv")) == slurp(out("t5.csv")));
    const Csv csv = read_csv(out("t1.csv"));
    REQUIRE(csv.rows.size() == 3 * 2 * 5);
    for (std::size_t r = 1; r < csv.rows.size(); ++r) {
        const std::tuple a{csv.at(r - 1, "lambda"), csv.at(r - 1, "m"), csv.at(r - 1, "t")};
        const std::tuple b{csv.at(r, "lambda"), csv.at(r, "m"), csv.at(r, "t")};
        CHECK(a < b);
    }
    REQUIRE(run("sweep --set format=json --out " + out("w1.json"), "FERMSIG_THREADS=1") == 0);
    REQUIRE(run("sweep --set format=json --out " + out("w3.json"), "FERMSIG_THREADS=3") == 0);
    CHECK(slurp(out("w1.json")) == slurp(out("w3.json")));
}

TEST_CASE("json reports carry the schema version") {
    REQUIRE(run("sweep --set mass_grid=[1.5] --out " + out("s.json")) == 0);
    const auto j = nlohmann::json::parse(slurp(out("s.json")));
    CHECK(j["schema_version"] == "1");
    CHECK(j["command"] == "sweep");
    CHECK(j["rows"].size() == 4);
    CHECK(j["config"]["mass_grid"][0] == 1.5);
}

TEST_CASE("ultrastatic phase advances at omega") {
    // lambda = 3, m = 4: omega = 5, eigenvector u0 of the Hamiltonian
    const double norm = std::sqrt(90.0);
    std::ostringstream u0;
    u0.precision(17);
    u0 << "u0=[" << 9.0 / norm << "," << 3.0 / norm << "]";
    REQUIRE(run("evolve --set spacetime=ultrastatic --set 'lambda_list=[3]' --set 'mass_grid=[4]' --set '" + u0.str() +
                "' --set times.stop=3 --set times.count=61 --out " + out("phase.csv")) == 0);
    const Csv csv = read_csv(out("phase.csv"));
    for (std::size_t r = 0; r < csv.rows.size(); ++r) {
        CHECK(csv.at(r, "phase") == doctest::Approx(5.0 * csv.at(r, "t")).epsilon(1e-12));
        CHECK(std::abs(csv.at(r, "norm") - 1.0) < 1e-14);
    }
}

TEST_CASE("trivial de Sitter mode keeps unit norm") {
    REQUIRE(run("evolve --set 'lambda_list=[0]' --set 'mass_grid=[1.3]' --set times.start=-20 --set times.stop=20 "
                "--set times.count=41 --set 'u0=[0.6,0.8]' --out " +
                out("triv.csv")) == 0);
    const Csv csv = read_csv(out("triv.csv"));
    for (std::size_t r = 0; r < csv.rows.size(); ++r) {
        CHECK(std::abs(csv.at(r, "norm") - 1.0) < 1e-12);
        CHECK(std::abs(csv.at(r, "density") - (0.36 - 0.64)) < 1e-12);
    }
}

TEST_CASE("signature command") {
    REQUIRE(run("signature --set spacetime=ultrastatic --set 'lambda_list=[-2,0.5,7]' --out " + out("us.csv")) == 0);
    const Csv us = read_csv(out("us.csv"));
    REQUIRE(us.rows.size() == 27);
    for (std::size_t r = 0; r < us.rows.size(); ++r) {
        CHECK(std::abs(us.at(r, "nu") - 1.0) < 1e-13);
        CHECK(us.at(r, "degenerate") == 0.0);
    }

    REQUIRE(run("signature --set 'lambda_list=[0, 1.5, 2]' --set 'mass_grid=[1, 1.5]' --out " + out("ds.csv")) == 0);
    const Csv ds = read_csv(out("ds.csv"));
    REQUIRE(ds.rows.size() == 6);
    for (std::size_t r = 0; r < ds.rows.size(); ++r) {
        const double l = ds.at(r, "lambda"), m = ds.at(r, "m");
        // |W+ W-^dagger|_21^2 = sin^2(pi l) sech^2(pi m)
        const double expected = std::fmod(2.0 * l, 2.0) == 0.0 ? 1.0 : std::tanh(M_PI * m);
        CHECK(std::abs(ds.at(r, "nu") - expected) < 1e-8);
        CHECK(ds.at(r, "eig_low") == doctest::Approx(-ds.at(r, "nu")).epsilon(1e-12));
    }
}

TEST_CASE("sweep transition probability") {
    REQUIRE(run("sweep --set 'lambda_list=[0.5, 1, 2.5]' --set 'mass_grid=[0.5, 1]' --out " + out("sw.csv")) == 0);
    const Csv csv = read_csv(out("sw.csv"));
    REQUIRE(csv.rows.size() == 6);
    for (std::size_t r = 0; r < csv.rows.size(); ++r) {
        const double l = csv.at(r, "lambda"), m = csv.at(r, "m");
        const double s = std::sin(M_PI * l) / std::cosh(M_PI * m);
        CHECK(std::abs(csv.at(r, "transition_probability") - s * s) < 1e-9);
        CHECK(csv.at(r, "unitarity_defect") < 1e-10);
    }
}

TEST_CASE("verify passes by default and catches a degraded integrator") {
    REQUIRE(run("verify --out " + out("v.json")) == 0);
    const auto good = nlohmann::json::parse(slurp(out("v.json")));
    CHECK(good["schema_version"] == "1");
    CHECK(good["all_pass"] == true);
    CHECK(good["checks"].size() == 10);
    for (const auto& c : good["checks"]) CHECK_MESSAGE(c["status"] == "PASS", c["name"]);

    REQUIRE(run("verify --set rtol=1e-2 --out " + out("bad.json")) == 1);
    const auto bad = nlohmann::json::parse(slurp(out("bad.json")));
    CHECK(bad["all_pass"] == false);
    bool oracle_failed = false;
    for (const auto& c : bad["checks"]) {
        if (c["name"] == "oracle_equivalence") oracle_failed = c["status"] == "FAIL";
    }
    CHECK(oracle_failed);

    REQUIRE(run("verify --set spacetime=ultrastatic --set format=csv --out " + out("us.csv")) == 0);
    const Csv us = read_csv(out("us.csv"));
    CHECK(us.rows.size() == 5);
    for (const auto& row : us.rows) CHECK(row[1] == "PASS");
}

TEST_CASE("in-process command matches the executable") {
    nlohmann::json doc = {{"lambda_list", {1.5}}, {"mass_grid", {1.0}}, {"times", {{"count", 3}}}};
    const RunConfig c = parse_config(doc);
    const CommandResult r = run_command("evolve", c);
    CHECK(r.exit_code == 0);
    REQUIRE(run("evolve --set 'lambda_list=[1.5]' --set 'mass_grid=[1]' --set times.count=3 --out " + out("ip.csv")) ==
            0);
    CHECK(slurp(out("ip.csv")) == r.content);
    CHECK_THROWS_AS(run_command("nonsense", c), ConfigError);
}
