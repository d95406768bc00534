#include "dqas/pools.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace dqas {
namespace {

GateKind rotation_for(Pauli p) {
    switch (p) {
    case Pauli::X:
        return GateKind::Rx;
    case Pauli::Y:
        return GateKind::Ry;
    case Pauli::Z:
        return GateKind::Rz;
    default:
        throw std::invalid_argument("rotation layer needs X, Y or Z");
    }
}

GateKind coupling_for(Pauli p) {
    switch (p) {
    case Pauli::X:
        return GateKind::Rxx;
    case Pauli::Y:
        return GateKind::Ryy;
    case Pauli::Z:
        return GateKind::Rzz;
    default:
        throw std::invalid_argument("coupling layer needs X, Y or Z");
    }
}

Sublayer sublayer_of(SublayerKind kind) {
    Sublayer s;
    s.kind = kind;
    return s;
}

Sublayer h_layer() { return sublayer_of(SublayerKind::HLayer); }

Sublayer rot_layer(Pauli p, int slot) {
    Sublayer s = sublayer_of(SublayerKind::RotLayer);
    s.pauli = p;
    s.param_slot = slot;
    return s;
}

Sublayer couple_layer(Pauli p, int slot, GraphSource source = GraphSource::Context,
                      std::optional<Graph> graph = std::nullopt) {
    Sublayer s = sublayer_of(SublayerKind::CoupleLayer);
    s.pauli = p;
    s.param_slot = slot;
    s.source = source;
    s.graph = std::move(graph);
    return s;
}

const Graph& layer_graph(const Sublayer& s, const CompileContext& ctx, std::optional<Graph>& scratch) {
    switch (s.source) {
    case GraphSource::Own:
        return *s.graph;
    case GraphSource::Context:
        if (!ctx.graph) {
            throw std::invalid_argument("compile: coupling layer needs a graph in the context");
        }
        return *ctx.graph;
    case GraphSource::NextNearest:
        if (!ctx.graph) {
            throw std::invalid_argument("compile: coupling layer needs a graph in the context");
        }
        scratch = ctx.graph->next_nearest();
        return *scratch;
    }
    throw std::logic_error("unreachable");
}

// Appends the gates of one sublayer; theta_value is the sublayer's parameter.
void emit_sublayer(const Sublayer& s, double theta_value, const CompileContext& ctx, int layer, int op,
                   std::vector<Gate>& gates, std::vector<GateOrigin>& origin) {
    const int n = ctx.num_qubits;
    switch (s.kind) {
    case SublayerKind::FixedGate: {
        Gate g = s.gate;
        GateOrigin o{layer, op};
        if (s.param_slot >= 0) {
            g.param = theta_value;
            o.slot = s.param_slot;
            o.coeff = 1.0;
        }
        gates.push_back(g);
        origin.push_back(o);
        return;
    }
    case SublayerKind::HLayer:
        for (int q = 0; q < n; ++q) {
            gates.push_back(Gate::one(GateKind::H, q));
            origin.push_back({layer, op});
        }
        return;
    case SublayerKind::RotLayer:
        for (int q = 0; q < n; ++q) {
            gates.push_back(Gate::one(rotation_for(s.pauli), q, 2.0 * theta_value));
            origin.push_back({layer, op, s.param_slot, 2.0});
        }
        return;
    case SublayerKind::CoupleLayer: {
        std::optional<Graph> scratch;
        const Graph& graph = layer_graph(s, ctx, scratch);
        for (const auto& e : graph.edges()) {
            const double coeff = -2.0 * e.weight;
            gates.push_back(Gate::two(coupling_for(s.pauli), e.u, e.v, coeff * theta_value));
            origin.push_back({layer, op, s.param_slot, coeff});
        }
        return;
    }
    case SublayerKind::SlotGate:
        throw std::invalid_argument("slot gates compile only against base moments");
    }
}

void check_unique_names(const std::vector<PoolOp>& ops) {
    std::set<std::string> seen;
    for (const auto& op : ops) {
        if (!seen.insert(op.name).second) {
            throw std::invalid_argument("operation pool: duplicate op name '" + op.name + "'");
        }
    }
}

PoolOp layer_op(const std::string& name, const Graph& graph) {
    if (name == "H") {
        return {"H", 0, {h_layer()}};
    }
    if (name == "rx" || name == "ry" || name == "rz") {
        const Pauli p = name == "rx" ? Pauli::X : (name == "ry" ? Pauli::Y : Pauli::Z);
        return {name, 1, {rot_layer(p, 0)}};
    }
    if (name == "zz" || name == "xx" || name == "yy") {
        const Pauli p = name == "xx" ? Pauli::X : (name == "yy" ? Pauli::Y : Pauli::Z);
        return {name, 1, {couple_layer(p, 0)}};
    }
    if (name == "nnn-zz" || name == "nnn-xx" || name == "nnn-yy") {
        const Pauli p = name == "nnn-xx" ? Pauli::X : (name == "nnn-yy" ? Pauli::Y : Pauli::Z);
        if (graph.next_nearest().num_edges() == 0) {
            throw std::invalid_argument("qaoa_layer_pool: graph has no next-nearest pairs");
        }
        return {name, 1, {couple_layer(p, 0, GraphSource::NextNearest)}};
    }
    throw std::invalid_argument("qaoa_layer_pool: unknown layer '" + name + "'");
}

Sublayer named_sublayer(const std::string& name, int slot) {
    if (name == "rx") return rot_layer(Pauli::X, slot);
    if (name == "ry") return rot_layer(Pauli::Y, slot);
    if (name == "rz") return rot_layer(Pauli::Z, slot);
    if (name == "zz") return couple_layer(Pauli::Z, slot);
    if (name == "xx") return couple_layer(Pauli::X, slot);
    if (name == "yy") return couple_layer(Pauli::Y, slot);
    throw std::invalid_argument("qaoa_block_pool: unknown sublayer '" + name + "'");
}

CompileContext context_for(const Graph& graph) {
    CompileContext ctx;
    ctx.num_qubits = graph.num_nodes();
    ctx.graph = graph;
    return ctx;
}

double weight_of(const std::map<GateKind, double>& weights, const Gate& g) {
    if (g.kind == GateKind::I) {
        return 0.0;
    }
    if (auto it = weights.find(g.kind); it != weights.end()) {
        return it->second;
    }
    return g.arity() == 2 ? 2.0 : 1.0;
}

} // namespace

OperationPool::OperationPool(Encoding encoding, std::vector<PoolOp> ops)
    : encoding_(encoding), ops_(std::move(ops)) {
    if (ops_.size() < 2) {
        throw std::invalid_argument("operation pool needs at least two ops");
    }
    check_unique_names(ops_);
}

int OperationPool::max_params() const {
    int l = 0;
    for (const auto& op : ops_) {
        l = std::max(l, op.param_count);
    }
    return l;
}

std::optional<int> OperationPool::index_of(const std::string& name) const {
    for (std::size_t i = 0; i < ops_.size(); ++i) {
        if (ops_[i].name == name) {
            return static_cast<int>(i);
        }
    }
    return std::nullopt;
}

std::vector<std::string> OperationPool::names() const {
    std::vector<std::string> out;
    for (const auto& op : ops_) {
        out.push_back(op.name);
    }
    return out;
}

OperationPool OperationPool::subset(const std::vector<int>& keep) const {
    std::vector<PoolOp> ops;
    for (int i : keep) {
        ops.push_back(ops_.at(static_cast<std::size_t>(i)));
    }
    return OperationPool(encoding_, std::move(ops));
}

void OperationPool::recompute_costs(const std::map<GateKind, double>& weights, const CompileContext& ctx,
                                    bool per_qubit) {
    for (auto& op : ops_) {
        if (encoding_ == Encoding::Slot) {
            const Gate g = op.sublayers.front().gate;
            op.cost = weight_of(weights, g);
            op.two_qubit_gates = 0;
            continue;
        }
        op.cost = op_cost(op, weights, ctx, per_qubit);
        op.two_qubit_gates = two_qubit_gate_count(op, ctx);
    }
}

OperationPool gate_pool(const std::vector<GatePlacement>& spec) {
    if (spec.empty()) {
        throw std::invalid_argument("gate_pool: empty spec");
    }
    std::vector<PoolOp> ops;
    int max_qubit = 0;
    for (const auto& placement : spec) {
        if (static_cast<int>(placement.qubits.size()) != gate_arity(placement.kind)) {
            throw std::invalid_argument("gate_pool: qubit count does not match gate arity");
        }
        Sublayer s = sublayer_of(SublayerKind::FixedGate);
        s.gate.kind = placement.kind;
        std::string name = std::string(gate_name(placement.kind));
        for (std::size_t i = 0; i < placement.qubits.size(); ++i) {
            s.gate.qubits[i] = placement.qubits[i];
            max_qubit = std::max(max_qubit, placement.qubits[i]);
            name += (i == 0 ? "(" : ",") + std::to_string(placement.qubits[i]);
        }
        name += ")";
        const bool parametric = gate_has_param(placement.kind);
        s.param_slot = parametric ? 0 : -1;
        ops.push_back({name, parametric ? 1 : 0, {s}});
    }
    OperationPool pool(Encoding::Gate, std::move(ops));
    CompileContext ctx;
    ctx.num_qubits = max_qubit + 1;
    pool.recompute_costs(default_cost_weights(), ctx);
    return pool;
}

OperationPool ghz_gate_pool() {
    return gate_pool({
        {GateKind::Ry, {0}},
        {GateKind::Ry, {1}},
        {GateKind::Ry, {2}},
        {GateKind::CNOT, {0, 1}},
        {GateKind::CNOT, {1, 0}},
        {GateKind::CNOT, {1, 2}},
        {GateKind::CNOT, {2, 1}},
    });
}

OperationPool bell_gate_pool() {
    return gate_pool({
        {GateKind::X, {0}},
        {GateKind::X, {1}},
        {GateKind::Y, {0}},
        {GateKind::Y, {1}},
        {GateKind::H, {0}},
        {GateKind::H, {1}},
        {GateKind::CNOT, {0, 1}},
        {GateKind::CNOT, {1, 0}},
    });
}

OperationPool qem_slot_pool(const std::vector<Gate>& gates) {
    std::vector<PoolOp> ops;
    for (const auto& g : gates) {
        if (g.arity() != 1) {
            throw std::invalid_argument("qem_slot_pool: only single-qubit gates can fill slots");
        }
        if (gate_is_pauli_rotation(g.kind)) {
            throw std::invalid_argument("qem_slot_pool: parameterized gate in slot pool");
        }
        Sublayer s = sublayer_of(SublayerKind::SlotGate);
        s.gate = g;
        s.gate.qubits = {0, 0};
        std::string name(gate_name(g.kind));
        if (g.kind == GateKind::ZPow) {
            name = "Z^" + std::to_string(g.param);
            name.erase(name.find_last_not_of('0') + 1);
        }
        ops.push_back({name, 0, {s}});
    }
    OperationPool pool(Encoding::Slot, std::move(ops));
    pool.recompute_costs(default_cost_weights(), {});
    return pool;
}

OperationPool qaoa_layer_pool(const Graph& graph, const LayerPoolOptions& options) {
    std::vector<std::string> names;
    if (options.h) names.emplace_back("H");
    if (options.rx) names.emplace_back("rx");
    if (options.ry) names.emplace_back("ry");
    if (options.rz) names.emplace_back("rz");
    if (options.zz) names.emplace_back("zz");
    if (options.xx) names.emplace_back("xx");
    if (options.yy) names.emplace_back("yy");
    if (options.nnn) {
        names.emplace_back("nnn-zz");
        names.emplace_back("nnn-xx");
        names.emplace_back("nnn-yy");
    }
    return qaoa_layer_pool(graph, names);
}

OperationPool qaoa_layer_pool(const Graph& graph, const std::vector<std::string>& names) {
    if (graph.num_edges() == 0) {
        throw std::invalid_argument("qaoa_layer_pool: graph has no edges");
    }
    std::vector<PoolOp> ops;
    for (const auto& name : names) {
        ops.push_back(layer_op(name, graph));
    }
    OperationPool pool(Encoding::Layer, std::move(ops));
    pool.recompute_costs(default_cost_weights(), context_for(graph));
    return pool;
}

OperationPool qaoa_block_pool(const Graph& graph) {
    return qaoa_block_pool(graph, {"H", "rx-zz", "zz-ry", "zz-rx", "zz-rz", "xx-rz", "yy-rx", "rx-rz"});
}

OperationPool qaoa_block_pool(const Graph& graph, const std::vector<std::string>& names) {
    if (graph.num_edges() == 0) {
        throw std::invalid_argument("qaoa_block_pool: graph has no edges");
    }
    std::vector<PoolOp> ops;
    for (const auto& name : names) {
        if (name == "H") {
            ops.push_back({"H", 0, {h_layer()}});
            continue;
        }
        const auto dash = name.find('-');
        if (dash == std::string::npos) {
            throw std::invalid_argument("qaoa_block_pool: block names look like 'zz-rx', got '" + name + "'");
        }
        ops.push_back({name, 2, {named_sublayer(name.substr(0, dash), 0), named_sublayer(name.substr(dash + 1), 1)}});
    }
    OperationPool pool(Encoding::Block, std::move(ops));
    pool.recompute_costs(default_cost_weights(), context_for(graph));
    return pool;
}

OperationPool qaoa_reduced_pool(const Graph& graph, const std::vector<Graph>& subgraphs,
                                const std::vector<std::string>& extra_layers) {
    std::vector<PoolOp> ops;
    for (const auto& name : extra_layers) {
        ops.push_back(layer_op(name, graph));
    }
    for (std::size_t i = 0; i < subgraphs.size(); ++i) {
        if (subgraphs[i].num_nodes() != graph.num_nodes()) {
            throw std::invalid_argument("qaoa_reduced_pool: subgraph node count mismatch");
        }
        ops.push_back({"zz#" + std::to_string(i), 1, {couple_layer(Pauli::Z, 0, GraphSource::Own, subgraphs[i])}});
    }
    OperationPool pool(Encoding::Layer, std::move(ops));
    pool.recompute_costs(default_cost_weights(), context_for(graph));
    return pool;
}

std::vector<Gate> op_gates(const PoolOp& op, const CompileContext& ctx) {
    std::vector<Gate> gates;
    std::vector<GateOrigin> origin;
    for (const auto& s : op.sublayers) {
        if (s.kind == SublayerKind::SlotGate) {
            if (s.gate.kind != GateKind::I) {
                gates.push_back(s.gate);
            }
            continue;
        }
        emit_sublayer(s, 0.0, ctx, 0, 0, gates, origin);
    }
    return gates;
}

CompiledCircuit compile(const StructureSample& k, const ParamPool& theta, const OperationPool& pool,
                        const CompileContext& ctx) {
    const int p = static_cast<int>(k.size());
    if (theta.layers() < p || theta.ops() != pool.size() || theta.slots() < pool.max_params()) {
        throw std::invalid_argument("compile: parameter pool shape does not match (p, c, l)");
    }
    for (int i = 0; i < p; ++i) {
        if (k[static_cast<std::size_t>(i)] < 0 || k[static_cast<std::size_t>(i)] >= pool.size()) {
            throw std::out_of_range("compile: structure index " + std::to_string(k[static_cast<std::size_t>(i)]) +
                                    " outside pool of size " + std::to_string(pool.size()));
        }
    }
    CompiledCircuit out;
    out.num_qubits = ctx.num_qubits;

    if (pool.encoding() == Encoding::Slot) {
        if (ctx.base.empty()) {
            throw std::invalid_argument("compile: slot encoding requires base moments");
        }
        if (static_cast<int>(ctx.slots.size()) < p) {
            throw std::invalid_argument("compile: base circuit has fewer idle slots than placeholders");
        }
        out.moments = ctx.base;
        for (int i = 0; i < p; ++i) {
            const Gate& g = pool[static_cast<std::size_t>(k[static_cast<std::size_t>(i)])].sublayers.front().gate;
            if (g.kind == GateKind::I) {
                continue; // identity leaves the slot idle
            }
            const SlotRef slot = ctx.slots[static_cast<std::size_t>(i)];
            Gate placed = g;
            placed.qubits = {slot.qubit, 0};
            out.moments.at(static_cast<std::size_t>(slot.moment)).gates.push_back(placed);
        }
        return out;
    }

    for (int i = 0; i < p; ++i) {
        const int j = k[static_cast<std::size_t>(i)];
        const PoolOp& op = pool[static_cast<std::size_t>(j)];
        for (const auto& s : op.sublayers) {
            const double value = s.param_slot >= 0 ? theta(i, j, s.param_slot) : 0.0;
            emit_sublayer(s, value, ctx, i, j, out.gates, out.origin);
        }
    }
    for (const auto& g : out.gates) {
        for (int q : g.targets()) {
            if (q >= ctx.num_qubits) {
                throw std::out_of_range("compile: gate acts outside the context's qubits");
            }
        }
    }
    return out;
}

std::vector<Gate> decompose_native(const std::vector<Gate>& gates) {
    std::vector<Gate> out;
    for (const auto& g : gates) {
        if (g.kind != GateKind::Rzz && g.kind != GateKind::Rxx && g.kind != GateKind::Ryy) {
            out.push_back(g);
            continue;
        }
        const int a = g.qubits[0];
        const int b = g.qubits[1];
        auto basis_in = [&](int q) {
            if (g.kind == GateKind::Rxx) out.push_back(Gate::one(GateKind::H, q));
            if (g.kind == GateKind::Ryy) out.push_back(Gate::one(GateKind::Rx, q, kPi / 2));
        };
        auto basis_out = [&](int q) {
            if (g.kind == GateKind::Rxx) out.push_back(Gate::one(GateKind::H, q));
            if (g.kind == GateKind::Ryy) out.push_back(Gate::one(GateKind::Rx, q, -kPi / 2));
        };
        basis_in(a);
        basis_in(b);
        out.push_back(Gate::two(GateKind::CNOT, a, b));
        out.push_back(Gate::one(GateKind::Rz, b, g.param));
        out.push_back(Gate::two(GateKind::CNOT, a, b));
        basis_out(a);
        basis_out(b);
    }
    return out;
}

std::map<GateKind, double> default_cost_weights() {
    return {
        {GateKind::CNOT, 2.0}, {GateKind::Rx, 1.0}, {GateKind::Ry, 1.0},
        {GateKind::Rz, 1.0},   {GateKind::H, 1.0},
    };
}

double op_cost(const PoolOp& op, const std::map<GateKind, double>& weights, const CompileContext& ctx,
               bool per_qubit) {
    double total = 0.0;
    for (const auto& g : decompose_native(op_gates(op, ctx))) {
        total += weight_of(weights, g);
    }
    if (per_qubit) {
        if (ctx.num_qubits < 1) {
            throw std::invalid_argument("op_cost: per-qubit normalization needs a qubit count");
        }
        total /= ctx.num_qubits;
    }
    return total;
}

int two_qubit_gate_count(const PoolOp& op, const CompileContext& ctx) {
    int count = 0;
    for (const auto& g : decompose_native(op_gates(op, ctx))) {
        if (g.arity() == 2) {
            ++count;
        }
    }
    return count;
}

} // namespace dqas
