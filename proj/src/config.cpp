#include "dqas/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "dqas/circuit_io.hpp"

namespace dqas {
namespace {

using nlohmann::json;

// Reads fields of one JSON object and remembers which keys were consumed so
// leftovers can be reported as unknown.
class Block {
  public:
    Block(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
        if (!obj_.is_object()) {
            throw InputError("'" + path_ + "' must be an object");
        }
    }

    bool has(const std::string& key) const { return obj_.contains(key); }

    template <typename T>
    T get(const std::string& key, T fallback) {
        seen_.insert(key);
        if (!obj_.contains(key)) {
            return fallback;
        }
        return convert<T>(key);
    }

    template <typename T>
    T require(const std::string& key) {
        seen_.insert(key);
        if (!obj_.contains(key)) {
            throw InputError("missing required key '" + child(key) + "'");
        }
        return convert<T>(key);
    }

    template <typename T>
    std::optional<T> optional(const std::string& key) {
        seen_.insert(key);
        if (!obj_.contains(key)) {
            return std::nullopt;
        }
        return convert<T>(key);
    }

    Block sub(const std::string& key) {
        seen_.insert(key);
        static const json empty = json::object();
        return Block(obj_.contains(key) ? obj_.at(key) : empty, child(key));
    }

    const json& raw(const std::string& key) {
        seen_.insert(key);
        return obj_.at(key);
    }

    std::string child(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    void finish() const {
        for (const auto& [key, value] : obj_.items()) {
            if (!seen_.count(key)) {
                throw InputError("unknown key '" + child(key) + "'");
            }
        }
    }

  private:
    template <typename T>
    T convert(const std::string& key) const {
        try {
            return obj_.at(key).get<T>();
        } catch (const json::exception&) {
            throw InputError("key '" + child(key) + "' has the wrong type");
        }
    }

    const json& obj_;
    std::string path_;
    std::set<std::string> seen_;
};

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot open config '" + path + "'");
    }
    try {
        return json::parse(in);
    } catch (const json::parse_error& err) {
        throw InputError("config '" + path + "': " + err.what());
    }
}

EarlyStopRule parse_early_stop(Block b) {
    EarlyStopRule r;
    r.loss_std = b.get("loss_std", r.loss_std);
    r.prob = b.get("prob", r.prob);
    r.patience = b.get("patience", r.patience);
    r.min_epochs = b.get("min_epochs", r.min_epochs);
    b.finish();
    return r;
}

TrainConfig parse_trainer(Block b, std::optional<LayerwiseOptions>& layerwise) {
    TrainConfig t;
    t.p = b.get("p", t.p);
    t.batch = b.get("batch", t.batch);
    t.epochs = b.get("epochs", t.epochs);
    t.lr_alpha = b.get("lr_alpha", t.lr_alpha);
    t.lr_theta = b.get("lr_theta", t.lr_theta);
    t.lambda1 = b.get("lambda1", t.lambda1);
    t.lambda2 = b.get("lambda2", t.lambda2);
    t.param_noise = b.get("param_noise", t.param_noise);
    t.prethermal_epochs = b.get("prethermal_epochs", t.prethermal_epochs);
    if (b.has("early_stop")) {
        t.early_stop = parse_early_stop(b.sub("early_stop"));
    }
    t.theta_mean = b.optional<double>("theta_mean");
    t.theta_std = b.optional<double>("theta_std");
    t.alpha_init = b.get("alpha_init", t.alpha_init);
    try {
        t.theta_grad = parse_grad_method(b.get<std::string>("theta_grad", "auto"));
    } catch (const std::invalid_argument& err) {
        throw InputError(std::string("trainer.theta_grad: ") + err.what());
    }
    t.finalize = parse_finalize_mode(b.get<std::string>("finalize", "argmax"));
    t.top_k = b.get("top_k", t.top_k);
    t.beam_width = b.get("beam_width", t.beam_width);
    t.finetune_steps = b.get("finetune_steps", t.finetune_steps);
    t.finetune_lr = b.get("finetune_lr", t.finetune_lr);
    t.finetune_decay = b.get("finetune_decay", t.finetune_decay);
    t.starts = b.get("starts", t.starts);
    t.threads = b.get("threads", t.threads);
    if (b.has("layerwise")) {
        Block lw = b.sub("layerwise");
        LayerwiseOptions o;
        o.p0 = lw.require<int>("p0");
        o.delta = lw.get("delta", o.delta);
        o.stages = lw.get("stages", o.stages);
        o.prune_floor = lw.get("prune_floor", o.prune_floor);
        lw.finish();
        if (o.delta <= 0) {
            throw InputError("trainer.layerwise.delta must be positive");
        }
        layerwise = o;
    }
    b.finish();
    t.validate();
    return t;
}

std::vector<Gate> parse_slot_gates(const std::vector<std::string>& names) {
    std::vector<Gate> gates;
    for (const auto& name : names) {
        // "ZPOW:0.6667" or "Z^0.6667" give a Z power; everything else is a gate name.
        const auto sep = name.find_first_of(":^");
        if (sep != std::string::npos) {
            const GateKind kind = parse_gate_kind(name.substr(0, sep));
            const std::string arg = name.substr(sep + 1);
            double exponent = 0.0;
            if (const auto slash = arg.find('/'); slash != std::string::npos) {
                exponent = std::stod(arg.substr(0, slash)) / std::stod(arg.substr(slash + 1));
            } else {
                exponent = std::stod(arg);
            }
            gates.push_back(Gate::one(kind == GateKind::Z ? GateKind::ZPow : kind, 0, exponent));
        } else {
            gates.push_back(Gate::one(parse_gate_kind(name), 0));
        }
    }
    return gates;
}

std::optional<Graph> parse_graph(Block g, const std::string& base_dir, std::optional<EnsembleSpec>& ensemble,
                                 std::uint64_t seed, bool instance_mode) {
    const auto kind = g.require<std::string>("kind");
    std::optional<Graph> graph;
    if (kind == "regular" || kind == "erdos_renyi") {
        EnsembleSpec spec;
        spec.family = kind == "regular" ? GraphFamily::Regular : GraphFamily::ErdosRenyi;
        spec.n = g.get("n", spec.n);
        if (spec.family == GraphFamily::Regular) {
            spec.degree = g.get("degree", spec.degree);
        } else {
            spec.p_edge = g.get("p_edge", spec.p_edge);
        }
        spec.weighted = g.get("weighted", spec.weighted);
        const auto graph_seed = g.get<std::uint64_t>("seed", derive_seed(seed, 0x6a));
        if (spec.family == GraphFamily::Regular && (spec.n * spec.degree % 2 != 0 || spec.degree >= spec.n)) {
            throw InputError("task.graph: infeasible regular graph (n, degree)");
        }
        if (instance_mode) {
            Rng rng(graph_seed);
            graph = sample_graph(spec, rng);
        } else {
            ensemble = spec;
        }
    } else if (kind == "file") {
        std::string path = g.require<std::string>("path");
        if (!path.empty() && path.front() != '/') {
            path = base_dir + "/" + path;
        }
        graph = read_edge_list(path, g.get("n", 0));
    } else if (kind == "edges") {
        const int n = g.require<int>("n");
        std::vector<Edge> edges;
        for (const auto& e : g.raw("edges")) {
            if (!e.is_array() || e.size() < 2 || e.size() > 3) {
                throw InputError("task.graph.edges entries look like [i, j] or [i, j, w]");
            }
            edges.push_back({e[0].get<int>(), e[1].get<int>(), e.size() == 3 ? e[2].get<double>() : 1.0});
        }
        try {
            graph = Graph(n, std::move(edges));
        } catch (const std::invalid_argument& err) {
            throw InputError(std::string("task.graph: ") + err.what());
        }
    } else {
        throw InputError("task.graph.kind must be regular, erdos_renyi, file or edges");
    }
    g.finish();
    if (!instance_mode && graph) {
        throw InputError("task.mode 'ensemble' needs a random graph family, not a fixed graph");
    }
    return graph;
}

} // namespace

void apply_override(nlohmann::json& doc, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw InputError("override '" + assignment + "' must look like key.path=value");
    }
    const std::string path = assignment.substr(0, eq);
    const std::string text = assignment.substr(eq + 1);
    json value;
    try {
        value = json::parse(text);
    } catch (const json::parse_error&) {
        value = text;
    }
    json* node = &doc;
    std::stringstream keys(path);
    std::string key;
    std::vector<std::string> parts;
    while (std::getline(keys, key, '.')) {
        parts.push_back(key);
    }
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
        json& next = (*node)[parts[i]];
        if (next.is_null()) {
            next = json::object();
        }
        if (!next.is_object()) {
            throw InputError("override '" + path + "': '" + parts[i] + "' is not an object");
        }
        node = &next;
    }
    (*node)[parts.back()] = value;
}

RunConfig parse_config(const nlohmann::json& doc) {
    Block top(doc, "");
    RunConfig cfg;
    cfg.raw = doc;
    cfg.seed = top.get<std::uint64_t>("seed", 0);
    cfg.output_dir = top.get<std::string>("output_dir", cfg.output_dir);
    {
        Block task = top.sub("task");
        if (!doc.contains("task")) {
            throw InputError("missing required key 'task'");
        }
        cfg.task_kind = task.require<std::string>("kind");
        static const std::set<std::string> kinds{"ghz", "bell", "qem_qft", "maxcut"};
        if (!kinds.count(cfg.task_kind)) {
            throw InputError("task.kind must be one of ghz, bell, qem_qft, maxcut");
        }
    }
    if (!doc.contains("trainer")) {
        throw InputError("missing required key 'trainer'");
    }
    cfg.trainer = parse_trainer(top.sub("trainer"), cfg.layerwise);
    cfg.trainer.seed = cfg.seed;
    // task, pool and objective are checked in full by build_task.
    top.sub("pool");
    top.sub("objective");
    top.finish();
    return cfg;
}

RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
    json doc = read_json_file(path);
    for (const auto& o : overrides) {
        apply_override(doc, o);
    }
    return parse_config(doc);
}

Task build_task(const RunConfig& config, const std::string& base_dir) {
    const json& doc = config.raw;
    Block task(doc.at("task"), "task");
    static const json empty = json::object();
    Block pool(doc.contains("pool") ? doc.at("pool") : empty, "pool");
    Block objective(doc.contains("objective") ? doc.at("objective") : empty, "objective");
    task.require<std::string>("kind");
    const std::string kind = config.task_kind;

    const auto objective_kind = objective.optional<std::string>("kind");
    const double eta = objective.get("eta", 0.2);
    const double lambda = objective.get("lambda", 1.0);
    objective.finish();
    auto expect_objective = [&](std::initializer_list<const char*> allowed) {
        if (!objective_kind) {
            return;
        }
        for (const char* a : allowed) {
            if (parse_objective_kind(*objective_kind) == parse_objective_kind(a)) {
                return;
            }
        }
        throw InputError("objective '" + *objective_kind + "' does not apply to task '" + kind + "'");
    };

    std::optional<Task> out;
    if (kind == "ghz") {
        expect_objective({"state_distance"});
        out = task_ghz(task.get("n", 3));
    } else if (kind == "bell") {
        expect_objective({"bell"});
        out = task_bell();
    } else if (kind == "qem_qft") {
        expect_objective({"fidelity"});
        QemOptions o;
        o.n = task.get("n", 3);
        if (o.n != 3 && o.n != 4) {
            throw InputError("task.n must be 3 or 4 for qem_qft");
        }
        o.eval_inputs = task.get("eval_inputs", o.eval_inputs);
        o.input_blocks = task.get("input_blocks", o.input_blocks);
        o.eval_seed = task.get<std::uint64_t>("eval_seed", o.eval_seed);
        o.shared_input = task.get("shared_input", o.shared_input);
        if (task.has("noise")) {
            Block noise = task.sub("noise");
            o.noise.p_gate = noise.get("p_gate", o.noise.p_gate);
            o.noise.p_idle = noise.get("p_idle", o.noise.p_idle);
            noise.finish();
            if (o.noise.p_gate < 0 || o.noise.p_gate > 1 || o.noise.p_idle < 0 || o.noise.p_idle > 1) {
                throw InputError("task.noise probabilities must lie in [0, 1]");
            }
        }
        if (auto gates = pool.optional<std::vector<std::string>>("gates")) {
            try {
                o.pool_gates = parse_slot_gates(*gates);
            } catch (const std::invalid_argument& err) {
                throw InputError(std::string("pool.gates: ") + err.what());
            }
        }
        out = task_qem_qft(o);
    } else {
        expect_objective({"expectation", "cvar", "gibbs"});
        MaxcutOptions o;
        const auto mode = task.get<std::string>("mode", "ensemble");
        if (mode != "ensemble" && mode != "instance") {
            throw InputError("task.mode must be ensemble or instance");
        }
        if (!doc.at("task").contains("graph")) {
            throw InputError("missing required key 'task.graph'");
        }
        o.instance = parse_graph(task.sub("graph"), base_dir, o.ensemble, config.seed, mode == "instance");
        o.eval_graphs = task.get("eval_graphs", o.eval_graphs);
        o.fixed_header = task.get("fixed_header", o.fixed_header);
        o.subgraphs = task.get("subgraphs", o.subgraphs);
        o.default_p = task.get("p", o.default_p);
        o.theta_mean = task.optional<double>("theta_mean");
        o.theta_std = task.optional<double>("theta_std");
        o.seed = task.get<std::uint64_t>("seed", config.seed);
        const auto encoding = pool.get<std::string>("encoding", "layer");
        if (encoding == "layer") {
            o.encoding = MaxcutEncoding::Layer;
        } else if (encoding == "block") {
            o.encoding = MaxcutEncoding::Block;
        } else if (encoding == "reduced") {
            o.encoding = MaxcutEncoding::Reduced;
        } else {
            throw InputError("pool.encoding must be layer, block or reduced");
        }
        o.ops = pool.get("ops", std::vector<std::string>{});
        if (objective_kind) {
            o.objective = parse_objective_kind(*objective_kind);
        }
        o.eta = eta;
        o.lambda = lambda;
        try {
            out = task_maxcut(o);
        } catch (const std::invalid_argument& err) {
            throw InputError(std::string("task: ") + err.what());
        }
    }

    // Optional cost re-weighting for the two-qubit penalty.
    if (pool.has("cost_weights") || pool.has("per_qubit_cost")) {
        auto weights = default_cost_weights();
        if (pool.has("cost_weights")) {
            for (const auto& [name, w] : pool.raw("cost_weights").items()) {
                try {
                    weights[parse_gate_kind(name)] = w.get<double>();
                } catch (const std::exception&) {
                    throw InputError("pool.cost_weights: bad entry '" + name + "'");
                }
            }
        }
        const bool per_qubit = pool.get("per_qubit_cost", false);
        out->pool.recompute_costs(weights, out->eval_set.front().ctx, per_qubit);
    }
    task.finish();
    pool.finish();
    return std::move(*out);
}

} // namespace dqas
