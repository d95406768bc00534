// Command-line runner: run / eval / oracle.
//
// Exit codes: 0 ok, 1 unexpected failure, 2 bad input (config, circuit,
// graph), 3 evaluation failure, 4 oracle budget exceeded.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "dqas/circuit_io.hpp"
#include "dqas/config.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace dqas;

namespace {

void setup_logging() {
    auto logger = spdlog::stderr_color_mt("dqas");
    spdlog::set_default_logger(logger);
    spdlog::set_level(spdlog::level::warn);
    if (const char* level = std::getenv("DQAS_LOG")) {
        spdlog::set_level(spdlog::level::from_str(level));
    }
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error("cannot write '" + path.string() + "'");
    }
    out << text;
}

std::string num(double x) { return fmt::format("{:.17g}", x); }

json structure_json(const Task& task, const StructureSample& k) {
    json names = json::array();
    for (int j : k.choice) {
        names.push_back(task.pool[static_cast<std::size_t>(j)].name);
    }
    return {{"structure", k.choice}, {"ops", names}, {"pool", task.pool.names()}};
}

json alpha_json(const StructureParams& alpha) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < alpha.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < alpha.cols(); ++j) {
            row.push_back(alpha(i, j));
        }
        rows.push_back(row);
    }
    return {{"shape", {alpha.rows(), alpha.cols()}}, {"alpha", rows}};
}

json theta_json(const ParamPool& theta) {
    std::vector<double> flat(theta.values().data(), theta.values().data() + theta.size());
    return {{"shape", {theta.layers(), theta.ops(), theta.slots()}}, {"layout", "row-major (layer, op, slot)"},
            {"theta", flat}};
}

std::vector<std::string> collect_overrides(const std::vector<std::string>& user, const std::optional<std::uint64_t>& seed,
                                           const std::optional<int>& threads, const std::optional<std::string>& out) {
    std::vector<std::string> all = user;
    if (seed) all.push_back("seed=" + std::to_string(*seed));
    if (threads) all.push_back("trainer.threads=" + std::to_string(*threads));
    if (out) all.push_back("output_dir=" + json(*out).dump());
    return all;
}

std::string config_dir(const std::string& path) {
    const fs::path parent = fs::path(path).parent_path();
    return parent.empty() ? "." : parent.string();
}

int cmd_run(const std::string& config_path, const std::vector<std::string>& overrides, bool threads_given) {
    RunConfig cfg = load_config(config_path, overrides);
    if (!threads_given && !cfg.raw["trainer"].contains("threads")) {
        cfg.trainer.threads = static_cast<int>(std::max(1U, std::thread::hardware_concurrency()));
    }
    const Task task = build_task(cfg, config_dir(config_path));
    const auto t0 = std::chrono::steady_clock::now();

    TrainResult result;
    const Task* final_task = &task;
    std::optional<Task> pruned;
    if (cfg.layerwise) {
        LayerwiseResult lw = layerwise_train(cfg.trainer, task, *cfg.layerwise);
        pruned = task;
        pruned->pool = lw.pool;
        final_task = &*pruned;
        result = std::move(lw.result);
    } else {
        result = multi_start(cfg.trainer, task);
    }
    const double runtime = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    const fs::path out = cfg.output_dir;
    fs::create_directories(out);
    std::string csv = "epoch,loss_mean,loss_std,argmax_prob,baseline\n";
    for (const auto& r : result.history) {
        csv += fmt::format("{},{},{},{},{}\n", r.epoch, num(r.loss_mean), num(r.loss_std), num(r.argmax_prob),
                           num(r.baseline));
    }
    write_file(out / "metrics.csv", csv);
    write_file(out / "alpha.json", alpha_json(result.alpha).dump(2) + "\n");
    write_file(out / "theta.json", theta_json(result.theta).dump(2) + "\n");
    write_file(out / "structure.json", structure_json(*final_task, result.structure).dump(2) + "\n");
    write_file(out / "circuit.txt", format_circuit(export_circuit(*final_task, result.structure, result.theta)));

    const Metrics metrics = report(*final_task, result.structure, result.theta);
    json summary = {{"task", cfg.task_kind},    {"seed", cfg.seed},         {"final_loss", result.final_loss},
                    {"runtime_seconds", runtime}, {"epochs_run", result.history.size()},
                    {"structure", structure_json(*final_task, result.structure)}};
    for (const auto& [name, value] : metrics) {
        summary["final_" + name] = value;
    }
    json starts = json::array();
    for (const auto& s : result.starts) {
        starts.push_back({{"seed", s.seed}, {"structure", s.structure.choice}, {"final_loss", s.final_loss},
                          {"epochs_run", s.epochs_run}});
    }
    summary["starts"] = starts;
    write_file(out / "summary.json", summary.dump(2) + "\n");
    std::cout << summary.dump(2) << "\n";
    return 0;
}

int cmd_eval(const std::string& circuit_path, const std::string& config_path, const std::vector<std::string>& overrides) {
    const RunConfig cfg = load_config(config_path, overrides);
    const Task task = build_task(cfg, config_dir(config_path));
    const auto moments = read_circuit_file(circuit_path);
    Metrics metrics;
    try {
        metrics = report_circuit(task, moments);
    } catch (const std::invalid_argument& err) {
        throw InputError(std::string("circuit does not fit the task: ") + err.what());
    }
    json out = json::object();
    for (const auto& [name, value] : metrics) {
        out[name] = value;
    }
    std::cout << out.dump(2) << "\n";
    return 0;
}

int cmd_oracle(const std::string& kind, int n, int p, const std::string& graph_path, const std::string& out_dir,
               std::uint64_t seed) {
    json result;
    if (kind == "qem") {
        QemOptions o;
        o.n = n;
        o.eval_seed = seed;
        // The packed QFT-n layout has n(n-1) idle slots.
        const std::uint64_t slots = static_cast<std::uint64_t>(n) * static_cast<std::uint64_t>(n - 1);
        const auto c = static_cast<std::uint64_t>(default_qem_gates(n).size());
        std::uint64_t total = 1;
        for (std::uint64_t i = 0; i < slots; ++i) {
            if (total > kOracleBudget / c) {
                throw BudgetExceeded(fmt::format("oracle qem: {}^{} fillings exceed the budget of {}", c, slots,
                                                 kOracleBudget));
            }
            total *= c;
        }
        Task task = [&] {
            try {
                return task_qem_qft(o);
            } catch (const std::invalid_argument& err) {
                throw InputError(err.what());
            }
        }();
        const OracleResult best = qem_bruteforce(task);
        json names = json::array();
        for (int j : best.best.choice) {
            names.push_back(task.pool[static_cast<std::size_t>(j)].name);
        }
        result = {{"kind", "qem"},           {"n", n},
                  {"fidelity", -best.loss},  {"filling", names},
                  {"structure", best.best.choice}, {"evaluated", best.evaluated}};
    } else if (kind == "maxcut") {
        if (graph_path.empty()) {
            throw InputError("oracle maxcut needs --graph");
        }
        const Graph g = read_edge_list(graph_path);
        const MaxCutResult best = maxcut_bruteforce(g);
        std::string bits;
        for (int v = 0; v < g.num_nodes(); ++v) {
            bits += ((best.assignment >> (g.num_nodes() - 1 - v)) & 1U) ? '1' : '0';
        }
        result = {{"kind", "maxcut"}, {"value", best.value}, {"assignment", bits}, {"nodes", g.num_nodes()},
                  {"edges", g.num_edges()}};
    } else if (kind == "bell") {
        const Task task = task_bell();
        const ParamPool theta(p, task.pool.size(), 0);
        const OracleResult best = structure_bruteforce(task, p, theta);
        result = {{"kind", "bell"},
                  {"p", p},
                  {"minimum", best.loss},
                  {"structure", best.best.choice},
                  {"circuit", format_circuit(export_circuit(task, best.best, theta))},
                  {"evaluated", best.evaluated}};
    } else {
        throw InputError("oracle kind must be qem, maxcut or bell");
    }
    fs::create_directories(out_dir);
    write_file(fs::path(out_dir) / "oracle.json", result.dump(2) + "\n");
    std::cout << result.dump(2) << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    setup_logging();
    CLI::App app{"Differentiable quantum architecture search"};
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> overrides;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    std::optional<std::string> out;

    auto* run = app.add_subcommand("run", "search a circuit for a config");
    run->add_option("config", config_path, "experiment config (JSON)")->required();
    run->add_option("--seed", seed, "run seed");
    run->add_option("--threads", threads, "batch evaluation threads (default: all cores)");
    run->add_option("--out", out, "output directory");
    run->add_option("--override", overrides, "key.path=value, repeatable");

    std::string circuit_path;
    auto* eval = app.add_subcommand("eval", "score a circuit file under a config's task");
    eval->add_option("circuit", circuit_path, "circuit text file")->required();
    eval->add_option("--config", config_path, "experiment config (JSON)")->required();
    eval->add_option("--seed", seed, "seed used to build the task");
    eval->add_option("--override", overrides, "key.path=value, repeatable");

    std::string oracle_kind;
    int n = 3;
    int p = 5;
    std::string graph_path;
    std::string oracle_out = ".";
    std::uint64_t oracle_seed = 0;
    auto* oracle = app.add_subcommand("oracle", "exhaustive reference search");
    oracle->add_option("kind", oracle_kind, "qem, maxcut or bell")->required();
    oracle->add_option("--n", n, "QFT qubits (qem)");
    oracle->add_option("--p", p, "circuit depth (bell)");
    oracle->add_option("--graph", graph_path, "edge list file (maxcut)");
    oracle->add_option("--out", oracle_out, "directory for oracle.json");
    oracle->add_option("--seed", oracle_seed, "evaluation-input seed (qem)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        const int code = app.exit(err);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*run) {
            return cmd_run(config_path, collect_overrides(overrides, seed, threads, out), threads.has_value());
        }
        if (*eval) {
            return cmd_eval(circuit_path, config_path, collect_overrides(overrides, seed, std::nullopt, std::nullopt));
        }
        return cmd_oracle(oracle_kind, n, p, graph_path, oracle_out, oracle_seed);
    } catch (const InputError& err) {
        spdlog::error("{}", err.what());
        return 2;
    } catch (const EvaluationError& err) {
        spdlog::error("evaluation failed: {}", err.what());
        return 3;
    } catch (const BudgetExceeded& err) {
        spdlog::error("{}", err.what());
        return 4;
    } catch (const std::invalid_argument& err) {
        spdlog::error("invalid input: {}", err.what());
        return 2;
    } catch (const std::exception& err) {
        spdlog::error("{}", err.what());
        return 1;
    }
}
