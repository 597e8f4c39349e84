#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "stint/jobs.hpp"

using namespace stint;
using namespace stint::jobs;
namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// strip the run-dependent wall_ms column (the last CSV field)
std::string strip_wall(const std::string& csv) {
    std::stringstream out, in(csv);
    std::string line;
    while (std::getline(in, line)) {
        const auto pos = line.find_last_of(',');
        out << line.substr(0, pos) << '\n';
    }
    return out.str();
}

int run_binary(const std::string& args) {
    const std::string cmd = std::string(STINT_CLI_BINARY) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

fs::path tmpdir() {
    const fs::path p = fs::temp_directory_path() / "stint-cli-test";
    fs::create_directories(p);
    return p;
}

}  // namespace

TEST_CASE("job parsing validates the schema") {
    CHECK_THROWS_AS(Job::from_json({{"command", "fly-to-the-moon"}}), ConfigError);
    CHECK_THROWS_AS(Job::from_json({{"schema", 2}, {"command", "selftest"}}), ConfigError);
    CHECK_THROWS_AS(Job::from_json({{"command", "verify-pentagon"}, {"instances", 0}}),
                    ConfigError);
    CHECK_THROWS_AS(Job::from_json({{"command", "verify-pentagon"}, {"threshold", -1.0}}),
                    ConfigError);
    CHECK_THROWS_AS(Job::from_json(nlohmann::json::array()), ConfigError);
    const Job j = Job::from_json({{"command", "verify-pentagon"},
                                  {"model", {{"model", "3dindex"}, {"q", 0.3}}},
                                  {"seed", 42}});
    CHECK(j.seed == 42);
    CHECK(j.instances == 10);
}

TEST_CASE("malformed job files are reported with line and column") {
    const fs::path bad = tmpdir() / "bad.json";
    std::ofstream(bad) << "{\n  \"command\": \"selftest\",\n  oops\n}\n";
    try {
        load_job(bad);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("line 3") != std::string::npos);
        CHECK(msg.find("column") != std::string::npos);
    }
}

TEST_CASE("missing model is a config error") {
    Job j;
    j.command = "verify-pentagon";
    CHECK_THROWS_AS(run_job(j), ConfigError);
}

TEST_CASE("pentagon job passes and writes sorted reports") {
    Job j;
    j.command = "verify-pentagon";
    j.model = {{"model", "3dindex"}, {"q", 0.3}};
    j.instances = 3;
    j.min_angle = 0.35;
    j.grid.nodes = 128;
    j.threshold = 1e-7;
    const RunOutcome out = run_job(j);
    CHECK(out.exit_code == 0);
    CHECK(out.rows.size() == 6);  // plain + transpose per instance

    const fs::path dir = tmpdir() / "pentagon";
    write_reports(out.rows, dir);
    const std::string csv = read_file(dir / "report.csv");
    CHECK(csv.rfind("command,model,param_digest,rel_residual,abs_residual,grid,seed,wall_ms",
                    0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 7);
    // json report parses and has full fidelity fields
    const auto arr = nlohmann::json::parse(read_file(dir / "report.json"));
    CHECK(arr.size() == 6);
    CHECK(arr[0].contains("lhs_re"));
}

TEST_CASE("threshold failures give exit code 1") {
    Job j;
    j.command = "verify-pentagon";
    j.model = {{"model", "3dindex"}, {"q", 0.3}};
    j.instances = 1;
    j.min_angle = 0.35;
    j.grid.nodes = 128;
    j.threshold = 1e-18;  // unreachable
    const RunOutcome out = run_job(j);
    CHECK(out.exit_code == 1);
    CHECK(!out.failures.empty());
}

TEST_CASE("reports are deterministic apart from wall time") {
    Job j;
    j.command = "verify-te6";
    j.model = {{"model", "3dindex"}, {"q", 0.3}};
    j.rho = shapes::RhoSix{0.0, 0.95, 1.9, 1.92, 2.41, 2.88};
    j.instances = 2;
    j.grid.nodes = 128;
    j.threshold = 1e-6;

    const fs::path d1 = tmpdir() / "det1", d2 = tmpdir() / "det2";
    write_reports(run_job(j).rows, d1);
    write_reports(run_job(j).rows, d2);
    CHECK(strip_wall(read_file(d1 / "report.csv")) ==
          strip_wall(read_file(d2 / "report.csv")));
}

TEST_CASE("gauge and partition jobs run from json descriptions") {
    Job j;
    j.command = "partition";
    j.model = {{"model", "3dindex"}, {"q", 0.3}};
    j.lattice = {{"L", 1}, {"M", 1}, {"N", 2}, {"s", {0.3}}, {"t", {0.8}}, {"u", {1.4, 2.1}}};
    j.grid.nodes = 8;
    j.threshold = 1e-10;
    CHECK(run_job(j).exit_code == 0);

    j.command = "gauge-probe";
    j.lattice = {{"L", 1}, {"M", 1}, {"N", 2}, {"s", {0.25}}, {"t", {0.5}}, {"u", {0.75, 1.0}}};
    j.shift = 0.5;
    j.threshold = 1e-12;
    CHECK(run_job(j).exit_code == 0);

    j.command = "transfer-commute";
    j.lattice = {{"L", 1}, {"M", 1}, {"s", {0.3}}, {"t", {0.8}}};
    j.nodes_list = {8, 16};
    j.u_pair = {1.4, 2.1};
    j.threshold = 1e-8;
    const RunOutcome out = run_job(j);
    CHECK(out.exit_code == 0);
    CHECK(out.rows.size() == 2);
}

TEST_CASE("computation errors surface as exit code 2") {
    Job j;
    j.command = "verify-te6";
    j.model = {{"model", "3dindex"}, {"q", 0.3}};
    j.rho = shapes::RhoSix{0.0, 0.5, 0.4, 0.3, 0.2, 0.1};  // not in the domain
    j.grid.nodes = 64;
    const RunOutcome out = run_job(j);
    CHECK(out.exit_code == 2);
}

TEST_CASE("binary: malformed json exits 2") {
    const fs::path bad = tmpdir() / "broken.json";
    std::ofstream(bad) << "{ not json";
    CHECK(run_binary("--job " + bad.string()) == 2);
}

TEST_CASE("binary: pentagon job exits 0 and honors --out") {
    const fs::path dir = tmpdir() / "bin-out";
    fs::remove_all(dir);
    const fs::path jobf = tmpdir() / "mini_pentagon.json";
    std::ofstream(jobf) << R"({
      "schema": 1,
      "command": "verify-pentagon",
      "model": {"model": "3dindex", "q": 0.3},
      "instances": 2,
      "min_angle": 0.35,
      "grid": {"nodes": 128},
      "threshold": 1e-7
    })";
    CHECK(run_binary("--job " + jobf.string() + " --out " + dir.string()) == 0);
    CHECK(fs::exists(dir / "report.csv"));
    CHECK(fs::exists(dir / "report.json"));
}

TEST_CASE("binary: threshold override forces failure exit") {
    const fs::path jobf = tmpdir() / "mini_pentagon2.json";
    std::ofstream(jobf) << R"({
      "schema": 1,
      "command": "verify-pentagon",
      "model": {"model": "3dindex", "q": 0.3},
      "instances": 1,
      "min_angle": 0.35,
      "grid": {"nodes": 128},
      "threshold": 1e-7,
      "out": "reports/tmp-cli-test"
    })";
    CHECK(run_binary("--job " + jobf.string() + " --out " + (tmpdir() / "t2").string() +
                     " --threshold 1e-18") == 1);
}

TEST_CASE("shipped job files parse") {
    for (const char* name :
         {"pentagon_3dindex.json", "pentagon_klv.json", "te6_3dindex.json", "te6_klv.json",
          "te4_3dindex.json", "sweep_eps.json", "transfer_commute.json",
          "partition_3dindex.json", "gauge_probe.json", "selftest.json"}) {
        const fs::path p = fs::path(STINT_JOBS_DIR) / name;
        CHECK_NOTHROW(load_job(p));
    }
}
