#include "dqas/tasks.hpp"

#include <algorithm>
#include <memory>
#include <stdexcept>

#include "dqas/circuit_io.hpp"

namespace dqas {
namespace {

double mean_of(const std::vector<double>& xs) {
    double s = 0.0;
    for (double x : xs) {
        s += x;
    }
    return xs.empty() ? 0.0 : s / static_cast<double>(xs.size());
}

// Greedy as-soon-as-possible packing; per-qubit gate order is preserved.
std::vector<Moment> pack_moments(const std::vector<Gate>& gates, int num_qubits) {
    std::vector<Moment> moments;
    std::vector<int> next_free(static_cast<std::size_t>(num_qubits), 0);
    for (const auto& g : gates) {
        int m = 0;
        for (int q : g.targets()) {
            m = std::max(m, next_free[static_cast<std::size_t>(q)]);
        }
        if (m >= static_cast<int>(moments.size())) {
            moments.resize(static_cast<std::size_t>(m) + 1);
        }
        moments[static_cast<std::size_t>(m)].gates.push_back(g);
        for (int q : g.targets()) {
            next_free[static_cast<std::size_t>(q)] = m + 1;
        }
    }
    return moments;
}

StateVector run_member(const TaskMember& member, const CompiledCircuit& c, std::size_t input = 0) {
    StateVector s = member.eval.inputs.at(input);
    if (c.is_moment_circuit()) {
        s.apply(flatten(c.moments));
    } else {
        s.apply(c.gates);
    }
    return s;
}

} // namespace

double eval_loss(const Task& task, const StructureSample& k, const ParamPool& theta) {
    if (task.eval_set.empty()) {
        throw std::logic_error("eval_loss: task has no evaluation members");
    }
    double sum = 0.0;
    for (const auto& member : task.eval_set) {
        sum += evaluate(member.eval, compile(k, theta, task.pool, member.ctx));
    }
    return sum / static_cast<double>(task.eval_set.size());
}

Metrics report(const Task& task, const StructureSample& k, const ParamPool& theta) {
    std::vector<CompiledCircuit> circuits;
    for (const auto& member : task.eval_set) {
        circuits.push_back(compile(k, theta, task.pool, member.ctx));
    }
    return task.metrics(task, circuits);
}

Metrics report_circuit(const Task& task, const std::vector<Moment>& moments) {
    const int members = std::min<int>(task.circuit_members, static_cast<int>(task.eval_set.size()));
    std::vector<CompiledCircuit> circuits;
    for (int i = 0; i < members; ++i) {
        const TaskMember& member = task.eval_set[static_cast<std::size_t>(i)];
        CompiledCircuit c;
        c.num_qubits = member.ctx.num_qubits;
        if (member.eval.pure()) {
            // a gate list: separators are optional, so only single gates are checked
            c.gates = flatten(moments);
            for (const auto& g : c.gates) {
                validate_moment(Moment{{g}}, c.num_qubits);
            }
            c.origin.assign(c.gates.size(), GateOrigin{});
        } else {
            for (const auto& m : moments) {
                validate_moment(m, c.num_qubits);
            }
            c.moments = moments;
        }
        circuits.push_back(std::move(c));
    }
    return task.metrics(task, circuits);
}

std::vector<Moment> export_circuit(const Task& task, const StructureSample& k, const ParamPool& theta) {
    const TaskMember& member = task.eval_set.front();
    const CompiledCircuit c = compile(k, theta, task.pool, member.ctx);
    if (c.is_moment_circuit()) {
        return c.moments;
    }
    return pack_moments(c.gates, c.num_qubits);
}

// ---------------------------------------------------------------- GHZ / Bell

StateVector ghz_state(int n) {
    CVector amps = CVector::Zero(Eigen::Index{1} << n);
    amps(0) = amps(amps.size() - 1) = 1.0 / std::sqrt(2.0);
    return StateVector(n, amps);
}

Task task_ghz(int n) {
    if (n < 2) {
        throw std::invalid_argument("task_ghz: n must be >= 2");
    }
    std::vector<GatePlacement> spec;
    for (int q = 0; q < n; ++q) {
        spec.push_back({GateKind::Ry, {q}});
    }
    for (int q = 0; q + 1 < n; ++q) {
        spec.push_back({GateKind::CNOT, {q, q + 1}});
        spec.push_back({GateKind::CNOT, {q + 1, q}});
    }
    ObjectiveSpec objective;
    objective.kind = ObjectiveKind::StateDistance;
    objective.target = ghz_state(n);

    TaskMember member;
    member.ctx.num_qubits = n;
    member.eval = objective_evaluator(n, objective);

    Task task("ghz", gate_pool(spec));
    task.default_p = n;
    task.sample_member = [member](std::uint64_t) { return member; };
    task.eval_set = {member};
    task.theta_mean = 0.0;
    task.theta_std = 0.0; // zero initializer
    task.metrics = [n](const Task& t, std::span<const CompiledCircuit> circuits) {
        const StateVector out = run_member(t.eval_set.front(), circuits.front());
        const StateVector target = ghz_state(n);
        return Metrics{{"distance", state_distance(out, target)},
                       {"fidelity", std::norm(target.amplitudes().dot(out.amplitudes()))},
                       {"loss", state_distance(out, target)}};
    };
    return task;
}

Task task_bell() {
    TaskMember member;
    member.ctx.num_qubits = 2;
    member.eval = bell_evaluator();

    Task task("bell", bell_gate_pool());
    task.default_p = 5;
    task.sample_member = [member](std::uint64_t) { return member; };
    task.eval_set = {member};
    task.theta_std = 0.0;
    task.metrics = [](const Task& t, std::span<const CompiledCircuit> circuits) {
        const TaskMember& m = t.eval_set.front();
        const CompiledCircuit& c = circuits.front();
        auto circuit = [&](const StateVector& in) {
            StateVector s = in;
            s.apply(c.is_moment_circuit() ? flatten(c.moments) : c.gates);
            return s;
        };
        const double loss = evaluate(m.eval, c);
        return Metrics{{"loss", loss},
                       {"objective", loss},
                       {"violations", static_cast<double>(bell_violations(circuit).size())}};
    };
    return task;
}

// ---------------------------------------------------------------- QEM

QftLayout build_qft_moments(int n) {
    auto h = [](int q) { return Gate::one(GateKind::H, q); };
    auto cp = [](int a, int b, double phi) { return Gate::two(GateKind::CPhase, a, b, phi); };
    QftLayout layout;
    if (n == 3) {
        layout.moments = {
            {{h(0)}},
            {{cp(1, 0, kPi / 2)}},
            {{cp(2, 0, kPi / 4), h(1)}},
            {{cp(2, 1, kPi / 2)}},
            {{h(2)}},
        };
    } else if (n == 4) {
        layout.moments = {
            {{h(0)}},
            {{cp(1, 0, kPi / 2)}},
            {{cp(2, 0, kPi / 4), h(1)}},
            {{cp(3, 0, kPi / 8), cp(2, 1, kPi / 2)}},
            {{cp(3, 1, kPi / 4), h(2)}},
            {{cp(3, 2, kPi / 2)}},
            {{h(3)}},
        };
    } else {
        throw std::invalid_argument("build_qft_moments: only n = 3 and n = 4 are laid out");
    }
    for (std::size_t m = 0; m < layout.moments.size(); ++m) {
        for (int q : layout.moments[m].idle_qubits(n)) {
            layout.slots.push_back({static_cast<int>(m), q});
        }
    }
    return layout;
}

std::vector<Gate> default_qem_gates(int n) {
    auto g = [](GateKind kind, double param = 0.0) { return Gate::one(kind, 0, param); };
    if (n == 4) {
        return {g(GateKind::I), g(GateKind::Z), g(GateKind::ZPow, 2.0 / 3.0), g(GateKind::ZPow, 4.0 / 3.0),
                g(GateKind::S), g(GateKind::T)};
    }
    return {g(GateKind::I), g(GateKind::X), g(GateKind::Y), g(GateKind::Z), g(GateKind::S), g(GateKind::T)};
}

namespace {

TaskMember qem_member(const QftLayout& layout, int n, const NoiseModel& noise, const StateVector& input) {
    StateVector ideal = input;
    for (const auto& m : layout.moments) {
        ideal.apply(m.gates);
    }
    TaskMember member;
    member.ctx.num_qubits = n;
    member.ctx.base = layout.moments;
    member.ctx.slots = layout.slots;
    member.eval.num_qubits = n;
    member.eval.custom = [noise, rho0 = DensityMatrix(input), ideal](const CompiledCircuit& c) {
        return -fidelity_pure(run_noisy_moments(c.moments, noise, rho0), ideal);
    };
    return member;
}

} // namespace

std::vector<StateVector> qem_eval_inputs(const QemOptions& options) {
    Rng rng(derive_seed(options.eval_seed, 0x9e11));
    std::vector<StateVector> inputs;
    for (int i = 0; i < options.eval_inputs; ++i) {
        inputs.push_back(random_2design_state(options.n, options.input_blocks, rng));
    }
    return inputs;
}

Task task_qem_qft(const QemOptions& options) {
    const QftLayout layout = build_qft_moments(options.n);
    const std::vector<Gate> gates = options.pool_gates.empty() ? default_qem_gates(options.n) : options.pool_gates;
    if (options.eval_inputs < 1) {
        throw std::invalid_argument("task_qem_qft: need at least one evaluation input");
    }
    Task task("qem_qft" + std::to_string(options.n), qem_slot_pool(gates));
    task.default_p = static_cast<int>(layout.slots.size());
    const int n = options.n;
    task.sample_member = [layout, n, noise = options.noise, blocks = options.input_blocks](std::uint64_t seed) {
        Rng rng(seed);
        return qem_member(layout, n, noise, random_2design_state(n, blocks, rng));
    };
    for (const auto& input : qem_eval_inputs(options)) {
        task.eval_set.push_back(qem_member(layout, n, options.noise, input));
    }
    task.shared_member = options.shared_input;
    task.qem = options;
    task.qem->pool_gates = gates;
    task.circuit_members = options.eval_inputs;
    task.theta_std = 0.0;
    task.metrics = [](const Task& t, std::span<const CompiledCircuit> circuits) {
        std::vector<double> fid;
        for (std::size_t i = 0; i < circuits.size(); ++i) {
            fid.push_back(-evaluate(t.eval_set[i].eval, circuits[i]));
        }
        return Metrics{{"fidelity", mean_of(fid)}, {"loss", -mean_of(fid)}};
    };
    return task;
}

// ---------------------------------------------------------------- MAXCUT

Graph sample_graph(const EnsembleSpec& spec, Rng& rng) {
    Graph g = spec.family == GraphFamily::Regular ? gen_regular_graph(spec.n, spec.degree, rng)
                                                  : gen_er_graph(spec.n, spec.p_edge, rng);
    return spec.weighted ? weight_graph(g, rng) : g;
}

namespace {

TaskMember maxcut_member(const Graph& graph, const MaxcutOptions& o) {
    ObjectiveSpec spec;
    spec.kind = o.objective;
    spec.eta = o.eta;
    spec.lambda = o.lambda;
    spec.hamiltonian = maxcut_hamiltonian(graph);
    if (o.objective != ObjectiveKind::Expectation && o.objective != ObjectiveKind::Cvar &&
        o.objective != ObjectiveKind::Gibbs) {
        throw InputError("maxcut: objective must be expectation, cvar or gibbs");
    }
    TaskMember member;
    member.ctx.num_qubits = graph.num_nodes();
    member.ctx.graph = graph;
    member.eval = objective_evaluator(graph.num_nodes(), spec);
    if (o.fixed_header) {
        StateVector plus(graph.num_nodes());
        for (int q = 0; q < graph.num_nodes(); ++q) {
            plus.apply(Gate::one(GateKind::H, q));
        }
        member.eval.inputs = {plus};
    }
    return member;
}

} // namespace

Task task_maxcut(const MaxcutOptions& o) {
    if (o.ensemble.has_value() == o.instance.has_value()) {
        throw InputError("maxcut: give exactly one of an ensemble or an instance graph");
    }
    if (o.ensemble && o.encoding == MaxcutEncoding::Reduced) {
        throw InputError("maxcut: reduced encoding is defined for instances only");
    }
    std::function<TaskMember(std::uint64_t)> sampler;
    std::vector<TaskMember> eval_set;
    if (o.ensemble) {
        const EnsembleSpec spec = *o.ensemble;
        sampler = [spec, o](std::uint64_t seed) {
            Rng rng(seed);
            return maxcut_member(sample_graph(spec, rng), o);
        };
        if (o.eval_graphs < 1) {
            throw InputError("maxcut: eval_graphs must be >= 1");
        }
        Rng eval_rng(derive_seed(o.seed, 0xe7a1));
        for (int i = 0; i < o.eval_graphs; ++i) {
            eval_set.push_back(maxcut_member(sample_graph(spec, eval_rng), o));
        }
    } else {
        const TaskMember member = maxcut_member(*o.instance, o);
        sampler = [member](std::uint64_t) { return member; };
        eval_set = {member};
    }
    const Graph& rep = *eval_set.front().ctx.graph;

    auto build_pool = [&]() {
        switch (o.encoding) {
        case MaxcutEncoding::Layer:
            return o.ops.empty() ? qaoa_layer_pool(rep) : qaoa_layer_pool(rep, o.ops);
        case MaxcutEncoding::Block:
            return o.ops.empty() ? qaoa_block_pool(rep) : qaoa_block_pool(rep, o.ops);
        case MaxcutEncoding::Reduced:
            break;
        }
        Rng rng(derive_seed(o.seed, 0x5b9));
        const auto subgraphs = sample_reduced_subgraphs(rep, o.subgraphs, rng);
        return o.ops.empty() ? qaoa_reduced_pool(rep, subgraphs) : qaoa_reduced_pool(rep, subgraphs, o.ops);
    };
    Task task("maxcut", build_pool());
    task.default_p = o.default_p;
    task.sample_member = std::move(sampler);
    task.eval_set = std::move(eval_set);
    task.circuit_members = 1;
    task.theta_mean = o.theta_mean.value_or(0.25);
    task.theta_std = o.theta_std.value_or(o.encoding == MaxcutEncoding::Reduced ? 1.0 : 0.1);
    const bool instance = o.instance.has_value();
    task.metrics = [instance](const Task& t, std::span<const CompiledCircuit> circuits) {
        std::vector<double> loss;
        std::vector<double> energy;
        std::vector<double> cut;
        for (std::size_t i = 0; i < circuits.size(); ++i) {
            const TaskMember& m = t.eval_set[i];
            const StateVector out = run_member(m, circuits[i]);
            const Graph& g = *m.ctx.graph;
            const double e = expectation(out, maxcut_hamiltonian(g));
            loss.push_back(m.eval.readout(std::span<const StateVector>(&out, 1)));
            energy.push_back(e);
            cut.push_back(cut_from_loss(g, e));
        }
        Metrics out{{"loss", mean_of(loss)}, {"energy", mean_of(energy)}, {"cut", mean_of(cut)}};
        if (instance) {
            const double best = maxcut_bruteforce(*t.eval_set.front().ctx.graph).value;
            out["maxcut"] = best;
            out["approx_ratio"] = best > 0.0 ? out["cut"] / best : 0.0;
        }
        return out;
    };
    return task;
}

// ---------------------------------------------------------------- oracles

OracleResult structure_bruteforce(const Task& task, int p, const ParamPool& theta, std::uint64_t budget) {
    if (p < 1) {
        throw std::invalid_argument("structure_bruteforce: p must be >= 1");
    }
    const auto c = static_cast<std::uint64_t>(task.pool.size());
    std::uint64_t total = 1;
    for (int i = 0; i < p; ++i) {
        if (total > budget / c) {
            throw BudgetExceeded("oracle: " + std::to_string(c) + "^" + std::to_string(p) +
                                 " structures exceed the budget of " + std::to_string(budget));
        }
        total *= c;
    }
    OracleResult best;
    best.loss = std::numeric_limits<double>::infinity();
    StructureSample k(std::vector<int>(static_cast<std::size_t>(p), 0));
    for (std::uint64_t idx = 0; idx < total; ++idx) {
        std::uint64_t rest = idx;
        for (int i = p - 1; i >= 0; --i) {
            k[static_cast<std::size_t>(i)] = static_cast<int>(rest % c);
            rest /= c;
        }
        const double loss = eval_loss(task, k, theta);
        if (loss < best.loss) {
            best.loss = loss;
            best.best = k;
        }
    }
    best.evaluated = total;
    return best;
}

namespace {

struct QemSearch {
    QemSearch(const Task& t, std::vector<Moment> b, std::vector<SlotRef> s, NoiseModel nm)
        : task(t), base(std::move(b)), slots(std::move(s)), noise(nm) {}

    const Task& task;
    std::vector<Moment> base;
    std::vector<SlotRef> slots;
    NoiseModel noise;
    std::vector<StateVector> ideals;
    std::vector<std::vector<int>> slots_by_moment;
    std::vector<int> choice;
    OracleResult best;
    int n = 0;

    void descend(std::size_t moment, const std::vector<DensityMatrix>& states) {
        if (moment == base.size()) {
            double fid = 0.0;
            for (std::size_t i = 0; i < states.size(); ++i) {
                fid += fidelity_pure(states[i], ideals[i]);
            }
            const double loss = -fid / static_cast<double>(states.size());
            ++best.evaluated;
            if (loss < best.loss) {
                best.loss = loss;
                best.best = StructureSample(choice);
            }
            return;
        }
        const auto& here = slots_by_moment[moment];
        const int c = task.pool.size();
        std::uint64_t combos = 1;
        for (std::size_t s = 0; s < here.size(); ++s) {
            combos *= static_cast<std::uint64_t>(c);
        }
        std::vector<DensityMatrix> next = states;
        for (std::uint64_t idx = 0; idx < combos; ++idx) {
            std::uint64_t rest = idx;
            Moment m = base[moment];
            for (std::size_t s = here.size(); s-- > 0;) {
                const int op = static_cast<int>(rest % static_cast<std::uint64_t>(c));
                rest /= static_cast<std::uint64_t>(c);
                choice[static_cast<std::size_t>(here[s])] = op;
            }
            for (int slot : here) {
                Gate g = task.pool[static_cast<std::size_t>(choice[static_cast<std::size_t>(slot)])].sublayers.front().gate;
                if (g.kind != GateKind::I) {
                    g.qubits = {slots[static_cast<std::size_t>(slot)].qubit, 0};
                    m.gates.push_back(g);
                }
            }
            const std::span<const Moment> one(&m, 1);
            for (std::size_t i = 0; i < states.size(); ++i) {
                // run_noisy_moments applies the gates and this moment's channels only.
                next[i] = run_noisy_moments(one, noise, states[i]);
            }
            descend(moment + 1, next);
        }
    }
};

} // namespace

OracleResult qem_bruteforce(const Task& task, std::uint64_t budget) {
    if (task.pool.encoding() != Encoding::Slot || !task.qem) {
        throw std::invalid_argument("qem_bruteforce: not a QEM slot-filling task");
    }
    const QemOptions& opts = *task.qem;
    const QftLayout layout = build_qft_moments(opts.n);
    const int p = static_cast<int>(layout.slots.size());
    const auto c = static_cast<std::uint64_t>(task.pool.size());
    std::uint64_t total = 1;
    for (int i = 0; i < p; ++i) {
        if (total > budget / c) {
            throw BudgetExceeded("oracle: " + std::to_string(c) + "^" + std::to_string(p) +
                                 " fillings exceed the budget of " + std::to_string(budget));
        }
        total *= c;
    }
    QemSearch search(task, layout.moments, layout.slots, opts.noise);
    search.n = opts.n;
    search.slots_by_moment.resize(layout.moments.size());
    for (int s = 0; s < p; ++s) {
        search.slots_by_moment[static_cast<std::size_t>(layout.slots[static_cast<std::size_t>(s)].moment)].push_back(s);
    }
    search.choice.assign(static_cast<std::size_t>(p), 0);
    search.best.loss = std::numeric_limits<double>::infinity();
    std::vector<DensityMatrix> states;
    for (const auto& input : qem_eval_inputs(opts)) {
        StateVector ideal = input;
        for (const auto& m : layout.moments) {
            ideal.apply(m.gates);
        }
        search.ideals.push_back(ideal);
        states.emplace_back(input);
    }
    search.descend(0, states);
    return search.best;
}

} // namespace dqas
