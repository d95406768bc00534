#pragma once
/**
 * @file
 * Experiment definitions: pool + evaluation context + reporting, and the
 * exhaustive oracles used to check search results.
 */

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dqas/evaluator.hpp"
#include "dqas/graph.hpp"
#include "dqas/objectives.hpp"
#include "dqas/params.hpp"
#include "dqas/pools.hpp"

namespace dqas {

using Metrics = std::map<std::string, double>;

/// One evaluation context: compile context plus the loss it is scored by.
struct TaskMember {
    CompileContext ctx;
    Evaluator eval;
};

struct QftLayout {
    std::vector<Moment> moments;
    std::vector<SlotRef> slots;
};
/// Textbook QFT without the final swaps, packed into moments; slots are the
/// idle (moment, qubit) pairs in lexicographic order. n must be 3 or 4.
QftLayout build_qft_moments(int n);

struct QemOptions {
    int n = 3;
    std::vector<Gate> pool_gates;
    NoiseModel noise;
    int input_blocks = 4;
    int eval_inputs = 100;
    std::uint64_t eval_seed = 0;
    /// One random input per epoch for the whole batch instead of one per sample.
    bool shared_input = true;
};
/// Default slot pools: {I,X,Y,Z,S,T} for n = 3, {I,Z,Z^(2/3),Z^(4/3),S,T} for n = 4.
std::vector<Gate> default_qem_gates(int n);
struct Task {
    Task(std::string name_, OperationPool pool_) : name(std::move(name_)), pool(std::move(pool_)) {}

    std::string name;
    OperationPool pool;
    int default_p = 1;
    /// Training-time member for a batch sample (fresh input state or graph per seed).
    std::function<TaskMember(std::uint64_t seed)> sample_member;
    /// Draw one member per epoch and score every batch sample against it.
    bool shared_member = false;
    /// Fixed members used for fine-tuning, finalization and reporting.
    std::vector<TaskMember> eval_set;
    /// A literal circuit file is scored against the first circuit_members eval members.
    int circuit_members = 1;
    /// theta initializer N(theta_mean, theta_std^2).
    double theta_mean = 0.0;
    double theta_std = 1.0;
    /// Task-specific metrics of circuits compiled against eval_set (same order, may be shorter).
    std::function<Metrics(const Task&, std::span<const CompiledCircuit>)> metrics;
    /// Set for QEM tasks; the slot oracle rebuilds its evaluation inputs from it.
    std::optional<QemOptions> qem;
};

/// Mean eval_set loss of (k, theta).
double eval_loss(const Task& task, const StructureSample& k, const ParamPool& theta);
Metrics report(const Task& task, const StructureSample& k, const ParamPool& theta);
Metrics report_circuit(const Task& task, const std::vector<Moment>& moments);
/// Circuit of (k, theta) against the first eval member, as moments (one gate each for gate lists).
std::vector<Moment> export_circuit(const Task& task, const StructureSample& k, const ParamPool& theta);

Task task_ghz(int n = 3);
StateVector ghz_state(int n);
Task task_bell();

Task task_qem_qft(const QemOptions& options);
/// The fixed evaluation inputs of a QEM task.
std::vector<StateVector> qem_eval_inputs(const QemOptions& options);

enum class GraphFamily { Regular, ErdosRenyi };

struct EnsembleSpec {
    GraphFamily family = GraphFamily::Regular;
    int n = 8;
    int degree = 3;
    double p_edge = 0.4;
    bool weighted = false;
};

Graph sample_graph(const EnsembleSpec& spec, Rng& rng);

enum class MaxcutEncoding { Layer, Block, Reduced };

struct MaxcutOptions {
    /// Exactly one of ensemble / instance.
    std::optional<EnsembleSpec> ensemble;
    std::optional<Graph> instance;
    MaxcutEncoding encoding = MaxcutEncoding::Layer;
    /// Layer or block names; empty means the encoding's default pool.
    std::vector<std::string> ops;
    ObjectiveKind objective = ObjectiveKind::Expectation;
    double eta = 0.2;
    double lambda = 1.0;
    /// Start from |+^n> instead of |0^n>.
    bool fixed_header = false;
    int eval_graphs = 32;
    int subgraphs = 10;
    int default_p = 5;
    std::optional<double> theta_mean;
    std::optional<double> theta_std;
    std::uint64_t seed = 0;
};
Task task_maxcut(const MaxcutOptions& options);

struct OracleResult {
    StructureSample best;
    double loss = 0.0;
    std::uint64_t evaluated = 0;
};

inline constexpr std::uint64_t kOracleBudget = 1'000'000;

/// Every structure of length p on the task pool, scored by eval_loss with the given theta.
/// Ties keep the first structure in lexicographic order. Throws BudgetExceeded past the budget.
OracleResult structure_bruteforce(const Task& task, int p, const ParamPool& theta,
                                  std::uint64_t budget = kOracleBudget);
/// Slot-filling enumeration with per-moment state caching; loss is -mean fidelity.
OracleResult qem_bruteforce(const Task& task, std::uint64_t budget = kOracleBudget);

} // namespace dqas
