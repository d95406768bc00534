#pragma once
/**
 * @file
 * Operation pools and compilation of a structure sample into gates.
 *
 * Layer conventions (theta is the shared layer parameter):
 *   H-layer                 H on every qubit
 *   rO-layer  exp(-i theta sum_i O_i)          = prod_i R_O(2 theta)
 *   OO-layer  exp(+i theta sum_ij w_ij O_iO_j) = prod_ij R_OO(-2 w_ij theta)
 *
 * Two-qubit layers compile to native RZZ/RXX/RYY gates; decompose_native()
 * expands them into CNOT . RZ . CNOT with H (for XX) or RX(+-pi/2) (for YY)
 * basis changes, which is the form used for cost accounting.
 */

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dqas/graph.hpp"
#include "dqas/params.hpp"
#include "dqas/simulator.hpp"
#include "dqas/structure.hpp"

namespace dqas {

enum class Encoding { Gate, Slot, Layer, Block };

enum class SublayerKind {
    FixedGate,    // explicit gate; rotations read param_slot
    HLayer,       // H on every qubit
    RotLayer,     // R_O(2 theta) on every qubit
    CoupleLayer,  // R_OO(-2 w theta) on every edge
    SlotGate,     // slot encoding: single-qubit gate inserted at the placeholder's slot
};

enum class GraphSource {
    Context,     // edges of the task's (possibly per-sample) graph
    NextNearest, // distance-two pairs of the task graph
    Own,         // a fixed graph carried by the op (reduced layers)
};

struct Sublayer {
    SublayerKind kind = SublayerKind::FixedGate;
    Gate gate{};
    Pauli pauli = Pauli::Z;
    GraphSource source = GraphSource::Context;
    std::optional<Graph> graph;
    int param_slot = -1;
};

struct PoolOp {
    std::string name;
    int param_count = 0;
    std::vector<Sublayer> sublayers;
    /// Weighted native-gate cost and two-qubit gate count, fixed at pool construction.
    double cost = 0.0;
    int two_qubit_gates = 0;
};

struct SlotRef {
    int moment = 0;
    int qubit = 0;

    friend bool operator==(const SlotRef&, const SlotRef&) = default;
};

/// Everything compile() needs beyond (k, theta, pool).
struct CompileContext {
    int num_qubits = 0;
    std::optional<Graph> graph;
    std::vector<Moment> base;
    std::vector<SlotRef> slots;
};

class OperationPool {
  public:
    OperationPool(Encoding encoding, std::vector<PoolOp> ops);

    Encoding encoding() const { return encoding_; }
    const std::vector<PoolOp>& ops() const { return ops_; }
    const PoolOp& operator[](std::size_t i) const { return ops_[i]; }
    int size() const { return static_cast<int>(ops_.size()); }
    /// Largest param_count over the ops (the l of the parameter pool).
    int max_params() const;
    std::optional<int> index_of(const std::string& name) const;
    std::vector<std::string> names() const;
    /// Pool restricted to the listed op indices, in the given order.
    OperationPool subset(const std::vector<int>& keep) const;
    /// Reset every op's cost using the given weights and representative context.
    void recompute_costs(const std::map<GateKind, double>& weights, const CompileContext& ctx,
                         bool per_qubit = false);

  private:
    Encoding encoding_;
    std::vector<PoolOp> ops_;
};

/// Where a gate came from; coeff multiplies theta(layer, op, slot) to give the gate angle.
struct GateOrigin {
    int layer = -1;
    int op = -1;
    int slot = -1;
    double coeff = 0.0;

    bool parameterized() const { return slot >= 0; }
};

struct CompiledCircuit {
    int num_qubits = 0;
    /// Time-ordered gates (gate/layer/block encodings).
    std::vector<Gate> gates;
    std::vector<GateOrigin> origin;
    /// Filled base moments (slot encoding); gates/origin stay empty.
    std::vector<Moment> moments;

    bool is_moment_circuit() const { return !moments.empty(); }
};

/// One gate-encoding placement: a gate kind on a qubit tuple.
struct GatePlacement {
    GateKind kind;
    std::vector<int> qubits;
};

OperationPool gate_pool(const std::vector<GatePlacement>& spec);
OperationPool ghz_gate_pool();
OperationPool bell_gate_pool();

/// Slot-encoding pool of parameter-free single-qubit gates (I means "leave idle").
OperationPool qem_slot_pool(const std::vector<Gate>& gates);

struct LayerPoolOptions {
    bool h = true;
    bool rx = true;
    bool ry = true;
    bool rz = true;
    bool zz = true;
    bool xx = false;
    bool yy = false;
    bool nnn = false;
};

/// Layer names: H, rx, ry, rz, zz, xx, yy, nnn-zz, nnn-xx, nnn-yy.
OperationPool qaoa_layer_pool(const Graph& graph, const LayerPoolOptions& options = {});
OperationPool qaoa_layer_pool(const Graph& graph, const std::vector<std::string>& names);
/// H, rx-zz, zz-ry, zz-rx, zz-rz, xx-rz, yy-rx, rx-rz; each block runs its sublayers in name order.
OperationPool qaoa_block_pool(const Graph& graph);
OperationPool qaoa_block_pool(const Graph& graph, const std::vector<std::string>& names);
/// rO/H layers plus one zz-layer per subgraph, named zz#0, zz#1, ...
OperationPool qaoa_reduced_pool(const Graph& graph, const std::vector<Graph>& subgraphs,
                                const std::vector<std::string>& extra_layers = {"H", "rx", "ry", "rz"});

/// Native gates of the compile rule for one op with all parameters zero.
std::vector<Gate> op_gates(const PoolOp& op, const CompileContext& ctx);

CompiledCircuit compile(const StructureSample& k, const ParamPool& theta, const OperationPool& pool,
                        const CompileContext& ctx);

/// Expand RZZ/RXX/RYY into CNOT . RZ . CNOT with basis changes.
std::vector<Gate> decompose_native(const std::vector<Gate>& gates);

/// omega(CNOT) = 2, omega(rO) = 1, omega(H) = 1.
std::map<GateKind, double> default_cost_weights();
/// Weighted native-gate count of the op's compile rule; optionally divided by qubit count.
double op_cost(const PoolOp& op, const std::map<GateKind, double>& weights, const CompileContext& ctx,
               bool per_qubit = false);
int two_qubit_gate_count(const PoolOp& op, const CompileContext& ctx);

} // namespace dqas
