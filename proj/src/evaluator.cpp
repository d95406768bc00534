#include "dqas/evaluator.hpp"

#include <stdexcept>

#include "dqas/circuit_io.hpp"

namespace dqas {

Evaluator objective_evaluator(int num_qubits, ObjectiveSpec spec) {
    spec.validate();
    if (spec.kind == ObjectiveKind::Bell) {
        return bell_evaluator();
    }
    Evaluator ev;
    ev.num_qubits = num_qubits;
    ev.inputs.emplace_back(num_qubits);
    ev.linear = spec.linear();
    if (spec.kind == ObjectiveKind::Expectation) {
        ev.observable = [h = spec.hamiltonian](std::size_t, const StateVector& out) {
            return apply_pauli_sum(h, out.amplitudes(), out.num_qubits());
        };
    } else if (spec.kind == ObjectiveKind::Fidelity) {
        ev.observable = [t = *spec.target](std::size_t, const StateVector& out) {
            const CVector& a = t.amplitudes();
            return CVector(-a * a.dot(out.amplitudes()));
        };
    }
    ev.readout = [spec = std::move(spec)](std::span<const StateVector> outs) {
        return evaluate_objective(spec, outs.front());
    };
    return ev;
}

Evaluator bell_evaluator() {
    Evaluator ev;
    ev.num_qubits = 2;
    for (std::uint64_t b = 0; b < 4; ++b) {
        ev.inputs.push_back(StateVector::basis(2, b));
    }
    ev.linear = true;
    ev.readout = [](std::span<const StateVector> outs) { return bell_loss(outs); };
    ev.observable = [](std::size_t input, const StateVector& out) {
        return apply_pauli_sum(bell_observable(static_cast<int>(input)), out.amplitudes(), 2);
    };
    return ev;
}

std::vector<StateVector> run_pure(const Evaluator& ev, std::span<const Gate> gates) {
    std::vector<StateVector> outs = ev.inputs;
    for (auto& s : outs) {
        s.apply(gates);
    }
    return outs;
}

double evaluate(const Evaluator& ev, const CompiledCircuit& circuit) {
    if (ev.pure()) {
        if (circuit.is_moment_circuit()) {
            const auto gates = flatten(circuit.moments);
            return ev.readout(run_pure(ev, gates));
        }
        return ev.readout(run_pure(ev, circuit.gates));
    }
    if (!ev.custom) {
        throw std::logic_error("evaluate: evaluator has neither readout nor custom loss");
    }
    return ev.custom(circuit);
}

} // namespace dqas
