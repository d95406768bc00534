// End-to-end checks of the dqas command-line tool (located via DQAS_BIN).
#include <doctest.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include <json.hpp>

#include "dqas/circuit_io.hpp"
#include "dqas/tasks.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct RunOutput {
    int code = -1;
    std::string text;
};

std::string env_or_skip(const char* name) {
    const char* v = std::getenv(name);
    return v ? v : "";
}

RunOutput run_cli(const std::string& args) {
    const std::string cmd = env_or_skip("DQAS_BIN") + " " + args + " 2>&1";
    RunOutput out;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::array<char, 4096> buf{};
    while (std::fgets(buf.data(), buf.size(), pipe) != nullptr) out.text += buf.data();
    const int status = pclose(pipe);
    out.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return out;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "dqas_cli_test" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

fs::path config(const std::string& name) { return fs::path(env_or_skip("DQAS_SOURCE_DIR")) / "configs" / name; }

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

bool have_binary() { return !env_or_skip("DQAS_BIN").empty() && !env_or_skip("DQAS_SOURCE_DIR").empty(); }

const std::string kGhzQuick = " --override trainer.starts=1 --override trainer.epochs=30 --override trainer.finetune_steps=20";

} // namespace

TEST_CASE("schema errors exit with code 2 and name the key") {
    REQUIRE_MESSAGE(have_binary(), "DQAS_BIN and DQAS_SOURCE_DIR must point at the tool and source tree");
    const fs::path dir = scratch("schema");
    write(dir / "no_task.json", R"({"objective": {"kind": "state_distance"}, "seed": 1})");
    RunOutput r = run_cli("run " + (dir / "no_task.json").string() + " --out " + (dir / "o").string());
    CHECK(r.code == 2);
    CHECK(r.text.find("'task'") != std::string::npos);

    write(dir / "no_kind.json", R"({"task": {"n": 3}, "seed": 1})");
    r = run_cli("run " + (dir / "no_kind.json").string() + " --out " + (dir / "o").string());
    CHECK(r.code == 2);
    CHECK(r.text.find("task.kind") != std::string::npos);

    r = run_cli("run " + config("ghz3.json").string() + " --override trainer.bogus=1 --out " + (dir / "o").string());
    CHECK(r.code == 2);
    CHECK(r.text.find("trainer.bogus") != std::string::npos);

    r = run_cli("run " + config("ghz3.json").string() + " --override trainer.epochs=abc --out " + (dir / "o").string());
    CHECK(r.code == 2);
}

TEST_CASE("override trainer.epochs=1 gives one history row") {
    REQUIRE_MESSAGE(have_binary(), "DQAS_BIN and DQAS_SOURCE_DIR must point at the tool and source tree");
    const fs::path dir = scratch("epochs");
    const RunOutput r = run_cli("run " + config("ghz3.json").string() + " --override trainer.epochs=1" +
                                " --override trainer.starts=1 --out " + dir.string());
    REQUIRE(r.code == 0);
    std::ifstream csv(dir / "metrics.csv");
    std::string line;
    int rows = -1; // header
    while (std::getline(csv, line)) {
        if (!line.empty()) ++rows;
    }
    CHECK(rows == 1);
    CHECK(slurp(dir / "metrics.csv").rfind("epoch,loss_mean,loss_std,argmax_prob,baseline", 0) == 0);
    for (const char* f : {"alpha.json", "theta.json", "structure.json", "circuit.txt", "summary.json"}) {
        CHECK(fs::exists(dir / f));
    }
}

TEST_CASE("run artifacts round-trip through eval") {
    REQUIRE_MESSAGE(have_binary(), "DQAS_BIN and DQAS_SOURCE_DIR must point at the tool and source tree");
    const fs::path dir = scratch("roundtrip");
    const RunOutput r = run_cli("run " + config("ghz3.json").string() + kGhzQuick + " --out " + dir.string());
    REQUIRE(r.code == 0);
    const json summary = json::parse(slurp(dir / "summary.json"));
    const RunOutput e = run_cli("eval " + (dir / "circuit.txt").string() + " --config " + config("ghz3.json").string());
    REQUIRE(e.code == 0);
    const json scored = json::parse(e.text);
    CHECK(std::abs(scored.at("loss").get<double>() - summary.at("final_loss").get<double>()) < 1e-10);
}

TEST_CASE("eval examples") {
    REQUIRE_MESSAGE(have_binary(), "DQAS_BIN and DQAS_SOURCE_DIR must point at the tool and source tree");
    const fs::path dir = scratch("eval");
    write(dir / "ghz.txt", "RY 0 1.5707963268\nCNOT 0,1\nCNOT 1,2\n");
    RunOutput r = run_cli("eval " + (dir / "ghz.txt").string() + " --config " + config("ghz3.json").string());
    REQUIRE(r.code == 0);
    CHECK(json::parse(r.text).at("distance").get<double>() < 1e-9);

    write(dir / "qft3.txt", dqas::format_circuit(dqas::build_qft_moments(3).moments));
    r = run_cli("eval " + (dir / "qft3.txt").string() + " --config " + config("qem_qft3.json").string());
    REQUIRE(r.code == 0);
    CHECK(std::abs(json::parse(r.text).at("fidelity").get<double>() - 0.33) <= 0.08);

    write(dir / "bad.txt", "H 0\nBOGUS 1\n");
    r = run_cli("eval " + (dir / "bad.txt").string() + " --config " + config("ghz3.json").string());
    CHECK(r.code == 2);
    CHECK(r.text.find("line 2") != std::string::npos);
}

TEST_CASE("oracle subcommands") {
    REQUIRE_MESSAGE(have_binary(), "DQAS_BIN and DQAS_SOURCE_DIR must point at the tool and source tree");
    const fs::path dir = scratch("oracle");
    const std::string k4 = std::string(DQAS_TEST_DATA) + "/k4.edges";
    RunOutput r = run_cli("oracle maxcut --graph " + k4 + " --out " + (dir / "mc").string());
    REQUIRE(r.code == 0);
    CHECK(json::parse(slurp(dir / "mc" / "oracle.json")).at("value").get<double>() == 4.0);

    r = run_cli("oracle bell --out " + (dir / "bell").string());
    REQUIRE(r.code == 0);
    const json bell = json::parse(slurp(dir / "bell" / "oracle.json"));
    CHECK(std::abs(bell.at("minimum").get<double>() + 8.0) < 1e-9);
    CHECK(!bell.at("circuit").get<std::string>().empty());

    r = run_cli("oracle qem --n 5 --out " + (dir / "qem").string());
    CHECK(r.code == 4);
}

TEST_CASE("outputs do not depend on the thread count") {
    REQUIRE_MESSAGE(have_binary(), "DQAS_BIN and DQAS_SOURCE_DIR must point at the tool and source tree");
    for (const char* name : {"ghz3.json", "qaoa_ensemble.json"}) {
        const std::string quick = std::string(name) == "ghz3.json"
                                      ? kGhzQuick
                                      : " --override trainer.starts=1 --override trainer.epochs=5"
                                        " --override trainer.finetune_steps=5 --override trainer.batch=16"
                                        " --override task.eval_graphs=4";
        std::vector<std::string> structure, metrics;
        for (int threads : {1, 1, 3}) {
            const fs::path dir = scratch(std::string("threads") + std::to_string(threads) + name);
            const RunOutput r = run_cli("run " + config(name).string() + quick + " --threads " +
                                        std::to_string(threads) + " --out " + dir.string());
            REQUIRE(r.code == 0);
            structure.push_back(slurp(dir / "structure.json"));
            metrics.push_back(slurp(dir / "metrics.csv"));
        }
        CHECK(structure[0] == structure[1]);
        CHECK(structure[0] == structure[2]);
        CHECK(metrics[0] == metrics[1]);
        CHECK(metrics[0] == metrics[2]);
        CHECK(!metrics[0].empty());
    }
}
