#include "dqas/objectives.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <stdexcept>

namespace dqas {

PauliSum maxcut_hamiltonian(const Graph& graph) {
    if (graph.num_edges() == 0) {
        throw std::invalid_argument("maxcut_hamiltonian: graph has no edges");
    }
    PauliSum h;
    for (const auto& e : graph.edges()) {
        h.add(e.weight, {{e.u, Pauli::Z}, {e.v, Pauli::Z}});
    }
    return h;
}

double cut_from_loss(const Graph& graph, double loss) { return 0.5 * (graph.total_weight() - loss); }

EnergyDistribution energy_distribution(const StateVector& state, const PauliSum& diagonal_observable) {
    if (!diagonal_observable.diagonal()) {
        throw std::invalid_argument("energy_distribution: observable is not diagonal");
    }
    const Eigen::VectorXd energies = diagonal_observable.diagonal_values(state.num_qubits());
    EnergyDistribution dist;
    dist.reserve(static_cast<std::size_t>(state.dim()));
    for (Eigen::Index b = 0; b < state.dim(); ++b) {
        const double prob = std::norm(state[b]);
        if (prob > 0.0) {
            dist.push_back({energies(b), prob});
        }
    }
    return dist;
}

double expectation_objective(const StateVector& state, const PauliSum& observable) {
    return expectation(state, observable);
}

double cvar_objective(EnergyDistribution dist, double eta) {
    if (dist.empty()) {
        throw std::invalid_argument("cvar_objective: empty distribution");
    }
    if (!(eta > 0.0 && eta <= 1.0)) {
        throw std::invalid_argument("cvar_objective: eta must lie in (0, 1]");
    }
    std::stable_sort(dist.begin(), dist.end(),
                     [](const EnergyLevel& a, const EnergyLevel& b) { return a.energy < b.energy; });
    double mass = 0.0;
    double acc = 0.0;
    for (const auto& level : dist) {
        const double take = std::min(level.probability, eta - mass);
        if (take <= 0.0) {
            break;
        }
        acc += take * level.energy;
        mass += take;
    }
    // Rounding can leave the total mass a hair short of eta.
    return acc / mass;
}

double gibbs_objective(const EnergyDistribution& dist, double lambda) {
    if (dist.empty()) {
        throw std::invalid_argument("gibbs_objective: empty distribution");
    }
    if (!(lambda > 0.0)) {
        throw std::invalid_argument("gibbs_objective: lambda must be positive");
    }
    double shift = -std::numeric_limits<double>::infinity();
    for (const auto& level : dist) {
        shift = std::max(shift, -lambda * level.energy);
    }
    double sum = 0.0;
    for (const auto& level : dist) {
        sum += level.probability * std::exp(-lambda * level.energy - shift);
    }
    return -(shift + std::log(sum));
}

double state_distance(const CVector& psi, const CVector& phi) {
    if (psi.size() != phi.size()) {
        throw std::invalid_argument("state_distance: dimension mismatch");
    }
    return (psi - phi).cwiseAbs().sum();
}

double state_distance(const StateVector& psi, const StateVector& phi) {
    return state_distance(psi.amplitudes(), phi.amplitudes());
}

namespace {

const PauliSum& zz01() {
    static const PauliSum h = PauliSum{}.add(1.0, {{0, Pauli::Z}, {1, Pauli::Z}});
    return h;
}

const PauliSum& xx01() {
    static const PauliSum h = PauliSum{}.add(1.0, {{0, Pauli::X}, {1, Pauli::X}});
    return h;
}

struct BellRow {
    int input;
    double zz_sign;
    double xx_sign;
};

// Input |ab> with a on qubit 0: ZZ = (-1)^(a xor b), XX = (-1)^b.
constexpr std::array<BellRow, 4> kBellRows{{{0, 1.0, 1.0}, {1, -1.0, -1.0}, {2, -1.0, 1.0}, {3, 1.0, -1.0}}};

StateVector bell_output(const std::function<StateVector(const StateVector&)>& circuit, int input) {
    StateVector out = circuit(StateVector::basis(2, static_cast<std::uint64_t>(input)));
    if (out.num_qubits() != 2) {
        throw std::invalid_argument("bell_objective: circuit must act on two qubits");
    }
    return out;
}

} // namespace

double bell_loss(std::span<const StateVector> outputs) {
    if (outputs.size() != kBellRows.size()) {
        throw std::invalid_argument("bell_loss: expected four outputs");
    }
    double loss = 0.0;
    for (const auto& row : kBellRows) {
        const StateVector& out = outputs[static_cast<std::size_t>(row.input)];
        if (out.num_qubits() != 2) {
            throw std::invalid_argument("bell_loss: outputs must be two-qubit states");
        }
        loss -= row.zz_sign * expectation(out, zz01()) + row.xx_sign * expectation(out, xx01());
    }
    return loss;
}

PauliSum bell_observable(int input) {
    if (input < 0 || input > 3) {
        throw std::invalid_argument("bell_observable: input must be 0..3");
    }
    const BellRow& row = kBellRows[static_cast<std::size_t>(input)];
    return PauliSum{}
        .add(-row.zz_sign, {{0, Pauli::Z}, {1, Pauli::Z}})
        .add(-row.xx_sign, {{0, Pauli::X}, {1, Pauli::X}});
}

double bell_objective(const std::function<StateVector(const StateVector&)>& circuit) {
    std::vector<StateVector> outputs;
    for (int input = 0; input < 4; ++input) {
        outputs.push_back(bell_output(circuit, input));
    }
    return bell_loss(outputs);
}

std::vector<std::string> bell_violations(const std::function<StateVector(const StateVector&)>& circuit,
                                         double tol) {
    static constexpr std::array<const char*, 4> labels{"|00>", "|01>", "|10>", "|11>"};
    std::vector<std::string> bad;
    for (const auto& row : kBellRows) {
        const StateVector out = bell_output(circuit, row.input);
        const double zz = expectation(out, zz01());
        const double xx = expectation(out, xx01());
        if (std::abs(zz - row.zz_sign) > tol) {
            bad.push_back(std::string(labels[static_cast<std::size_t>(row.input)]) + " ZZ");
        }
        if (std::abs(xx - row.xx_sign) > tol) {
            bad.push_back(std::string(labels[static_cast<std::size_t>(row.input)]) + " XX");
        }
    }
    return bad;
}

ObjectiveKind parse_objective_kind(const std::string& name) {
    std::string lower = name;
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    if (lower == "expectation" || lower == "energy") return ObjectiveKind::Expectation;
    if (lower == "cvar") return ObjectiveKind::Cvar;
    if (lower == "gibbs") return ObjectiveKind::Gibbs;
    if (lower == "fidelity") return ObjectiveKind::Fidelity;
    if (lower == "state_distance" || lower == "distance") return ObjectiveKind::StateDistance;
    if (lower == "bell") return ObjectiveKind::Bell;
    throw InputError("unknown objective kind '" + name + "'");
}

std::string objective_name(ObjectiveKind kind) {
    switch (kind) {
    case ObjectiveKind::Expectation:
        return "expectation";
    case ObjectiveKind::Cvar:
        return "cvar";
    case ObjectiveKind::Gibbs:
        return "gibbs";
    case ObjectiveKind::Fidelity:
        return "fidelity";
    case ObjectiveKind::StateDistance:
        return "state_distance";
    case ObjectiveKind::Bell:
        return "bell";
    }
    return "?";
}

bool ObjectiveSpec::linear() const {
    return kind == ObjectiveKind::Expectation || kind == ObjectiveKind::Fidelity || kind == ObjectiveKind::Bell;
}

void ObjectiveSpec::validate() const {
    if (kind == ObjectiveKind::Cvar && !(eta > 0.0 && eta <= 1.0)) {
        throw InputError("cvar eta must lie in (0, 1]");
    }
    if (kind == ObjectiveKind::Gibbs && !(lambda > 0.0)) {
        throw InputError("gibbs lambda must be positive");
    }
    if ((kind == ObjectiveKind::Fidelity || kind == ObjectiveKind::StateDistance) && !target) {
        throw InputError("objective '" + objective_name(kind) + "' needs a target state");
    }
}

double evaluate_objective(const ObjectiveSpec& spec, const StateVector& out) {
    switch (spec.kind) {
    case ObjectiveKind::Expectation:
        return expectation(out, spec.hamiltonian);
    case ObjectiveKind::Cvar:
        return cvar_objective(energy_distribution(out, spec.hamiltonian), spec.eta);
    case ObjectiveKind::Gibbs:
        return gibbs_objective(energy_distribution(out, spec.hamiltonian), spec.lambda);
    case ObjectiveKind::Fidelity:
        return -std::norm(spec.target->amplitudes().dot(out.amplitudes()));
    case ObjectiveKind::StateDistance:
        return state_distance(out, *spec.target);
    case ObjectiveKind::Bell:
        throw std::invalid_argument("bell objective needs the whole circuit, not one output state");
    }
    throw std::logic_error("unreachable");
}

} // namespace dqas
