#include <doctest.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include <json.hpp>

namespace {

struct CmdResult {
    int exit_code = -1;
    std::string out;
};

CmdResult run_cli(const std::string& args, const std::string& env = "") {
    const std::string cmd = env + " " + std::string(PINCOR_CLI_PATH) + " " + args + " 2>/dev/null";
    CmdResult r;
    FILE* p = popen(cmd.c_str(), "r");
    REQUIRE(p != nullptr);
    std::array<char, 4096> buf;
    std::size_t got;
    while ((got = fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), got);
    const int status = pclose(p);
    r.exit_code = WEXITSTATUS(status);
    return r;
}

}  // namespace

TEST_CASE("homog emits zero free energy below the critical point") {
    const CmdResult r = run_cli("homog --alpha 0.5 --n-max 65536 --h-grid -1:1:0.25");
    CHECK(r.exit_code == 0);
    std::size_t rows = 0;
    std::istringstream is(r.out);
    std::string line;
    std::getline(is, line);
    CHECK(line == "h,free_energy");
    while (std::getline(is, line)) {
        const auto comma = line.find(',');
        const double h = std::stod(line.substr(0, comma));
        const double f = std::stod(line.substr(comma + 1));
        if (h <= 0.0) CHECK(f == 0.0);
        if (h > 0.0) CHECK(f > 0.0);
        ++rows;
    }
    CHECK(rows == 9);
}

TEST_CASE("usage and runtime error exit codes") {
    CHECK(run_cli("homog --alpha 0.5 --h-grid 1:0:oops").exit_code == 2);
    CHECK(run_cli("homog --alpha 0").exit_code == 1);
    CHECK(run_cli("quenched --alpha 0.5 --a 2 --beta 0.5 --N 128 --replicas 4").exit_code == 2);
    CHECK(run_cli("annealed --alpha 0.5 --a 0.5 --m -1 --beta 0.5 --N 128").exit_code == 1);
    CHECK(run_cli("nonsense").exit_code == 2);
}

TEST_CASE("quenched runs are byte-identical across reruns and thread counts") {
    const std::string args =
        "quenched --alpha 0.5 --a 2 --beta 0.8 --h 0.1 --N 256 --replicas 8 --seed 31415";
    const CmdResult a = run_cli(args, "PINCOR_THREADS=1");
    const CmdResult b = run_cli(args, "PINCOR_THREADS=8");
    const CmdResult c = run_cli(args, "PINCOR_THREADS=8");
    CHECK(a.exit_code == 0);
    CHECK(a.out == b.out);
    CHECK(b.out == c.out);
    CHECK(a.out.find("\"value\"") != std::string::npos);

    // resolved config is embedded with the run
    const nlohmann::json j = nlohmann::json::parse(a.out);
    CHECK(j["config"]["run"]["seed"] == 31415);
    CHECK(j["config"]["law"]["alpha"] == 0.5);
    CHECK(j["estimate"]["bias"] == "lower");
}

TEST_CASE("quenched beta=0 path matches homog within the finite-size bound") {
    const CmdResult q = run_cli(
        "quenched --alpha 0.5 --family iid --beta 0 --h 0.5 --N 1024 --replicas 8 --seed 7");
    REQUIRE(q.exit_code == 0);
    const double est = nlohmann::json::parse(q.out)["estimate"]["value"].get<double>();

    const CmdResult h = run_cli("homog --alpha 0.5 --n-max 65536 --h 0.5");
    REQUIRE(h.exit_code == 0);
    const auto nl = h.out.find('\n');
    const auto comma = h.out.find(',', nl);
    const double f = std::stod(h.out.substr(comma + 1));
    CHECK(std::abs(est - f) <= 2.0 / 1024.0 + 5e-3);
}

TEST_CASE("gauss sample output is reproducible CSV") {
    const std::string args = "gauss --op sample --a 2 --l 16 --seed 99";
    const CmdResult a = run_cli(args);
    const CmdResult b = run_cli(args);
    CHECK(a.exit_code == 0);
    CHECK(a.out == b.out);
    CHECK(a.out.rfind("omega\n", 0) == 0);
}

TEST_CASE("verify suite reporting") {
    // config file with a small entropy suite
    const std::string cfg_path = "cli_test_config.json";
    {
        std::ofstream f(cfg_path);
        f << R"({"spec":{"family":"shifted_power","a":2.0},"check":{"l_list":[200,400]}})";
    }
    const CmdResult ok = run_cli("verify --suite entropy --config " + cfg_path);
    CHECK(ok.exit_code == 0);
    const nlohmann::json j = nlohmann::json::parse(ok.out);
    CHECK(j["failed"] == false);
    CHECK(j["checks"][0]["status"] == "pass");

    // refused gate exits 0 and flags the refusal
    const CmdResult refused =
        run_cli("verify --suite smoothing --alpha 1.5 --a 2 --beta 0");
    CHECK(refused.exit_code == 0);
    const nlohmann::json jr = nlohmann::json::parse(refused.out);
    CHECK(jr["checks"][0]["status"] == "refused");
    std::remove(cfg_path.c_str());
}
