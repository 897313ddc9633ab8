// Drives the aci executable end to end.
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "aci/simulator.hpp"
#include "helpers.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path kDir = fs::temp_directory_path() / "aci_cli_test";

struct Run {
    int code;
    std::string out;
};

Run aci_cmd(const std::string& args) {
    const fs::path out = kDir / "stdout.txt";
    const std::string cmd = std::string(ACI_EXE) + " " + args + " > " + out.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    std::ifstream in(out);
    std::ostringstream s;
    s << in.rdbuf();
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, s.str()};
}

fs::path write(const std::string& name, const std::string& text) {
    const fs::path p = kDir / name;
    std::ofstream(p) << text;
    return p;
}

struct Setup {
    Setup() {
        fs::remove_all(kDir);
        fs::create_directories(kDir);
    }
};

}  // namespace

TEST_CASE_FIXTURE(Setup, "calibrate") {
    const auto ok = aci_cmd("calibrate --samples 10000");
    CHECK(ok.code == 0);
    CHECK(ok.out.find("PASS b_pivot_rate") != std::string::npos);
    CHECK(ok.out.find("FAIL") == std::string::npos);

    const auto flat = write("flat.cfg", "delay_quad_coeff = 0\n");
    const auto bad = aci_cmd("calibrate --samples 2000 --scenario " + flat.string());
    CHECK(bad.code != 0);
    CHECK(bad.out.find("FAIL b_pivot_rate") != std::string::npos);

    CHECK(aci_cmd("calibrate --samples 10").code == 1);
    CHECK(aci_cmd("calibrate --samples 2000 --serial").code == 0);
}

TEST_CASE_FIXTURE(Setup, "run and replay-check") {
    const auto out = kDir / "run";
    const auto r = aci_cmd("run --cycles 30 --seed 4 --out " + out.string());
    CHECK(r.code == 0);
    CHECK(r.out.find("\"converged_bs\"") != std::string::npos);
    CHECK(fs::exists(out / "trace.csv"));

    const auto check = aci_cmd("replay-check " + (out / "observations.csv").string());
    CHECK(check.code == 0);
    CHECK(check.out.find("ok: 30 batches") != std::string::npos);

    const auto broken = write("broken.csv", "batch_id,batch_size\n1,2\n");
    CHECK(aci_cmd("replay-check " + broken.string()).code == 1);
    CHECK(aci_cmd("replay-check " + (kDir / "nope.csv").string()).code == 1);
}

TEST_CASE_FIXTURE(Setup, "flags override the configuration file") {
    const auto cfg = write("exp.cfg", "policy = baseline\ncycles = 12\nstart_bs = 21\n");
    const auto r = aci_cmd("run --scenario " + cfg.string() + " --cycles 7 --out " + (kDir / "o").string());
    CHECK(r.code == 0);
    CHECK(r.out.find("\"policy\": \"baseline\"") != std::string::npos);
    CHECK(r.out.find("\"cycles\": 7") != std::string::npos);
    CHECK(r.out.find("\"start_bs\": 21") != std::string::npos);
}

TEST_CASE_FIXTURE(Setup, "exit codes") {
    CHECK(aci_cmd("run --start-bs 40 --out " + (kDir / "x").string()).code == 1);
    CHECK_FALSE(fs::exists(kDir / "x"));
    CHECK(aci_cmd("run --policy greedy").code == 1);
    CHECK(aci_cmd("run --scenario " + (kDir / "missing.cfg").string()).code == 1);
    CHECK(aci_cmd("frobnicate").code == 1);
    CHECK(aci_cmd("").code == 1);

    std::vector<aci::DatasetBatch> batches{{"a", aci::test::good_batch(30)}};
    {
        std::ofstream data(kDir / "short.csv");
        aci::write_dataset(data, batches);
    }
    const auto ex = aci_cmd("run --cycles 5 --replay " + (kDir / "short.csv").string() + " --out " +
                            (kDir / "ex").string());
    CHECK(ex.code == 2);
    CHECK(ex.out.find("replay exhausted for bs=30") != std::string::npos);
    CHECK(fs::exists(kDir / "ex" / "trace.csv"));
}

TEST_CASE_FIXTURE(Setup, "seed sweep") {
    const auto r = aci_cmd("run --sweep 3 --cycles 30");
    CHECK(r.code == 0);
    CHECK(r.out.rfind("seed,converged_bs", 0) == 0);
}
