#pragma once

#include <functional>
#include <span>
#include <vector>

#include "dqas/objectives.hpp"
#include "dqas/pools.hpp"
#include "dqas/simulator.hpp"

namespace dqas {

/// Maps a compiled circuit to a scalar loss.
///
/// Pure evaluators run every input state through the gate list and hand the
/// outputs to readout(); they support prefix-cached parameter shifts. Anything
/// else (noisy moment circuits) goes through custom().
struct Evaluator {
    int num_qubits = 0;
    std::vector<StateVector> inputs;
    std::function<double(std::span<const StateVector>)> readout;
    /// Loss is linear in each output density matrix.
    bool linear = false;
    /// Optional O_i|psi_i> such that loss = sum_i Re <psi_i|O_i|psi_i>; enables adjoint gradients.
    std::function<CVector(std::size_t input, const StateVector& out)> observable;

    std::function<double(const CompiledCircuit&)> custom;

    bool pure() const { return static_cast<bool>(readout); }
};

/// |0^n> input, loss = evaluate_objective(spec, U|0^n>).
Evaluator objective_evaluator(int num_qubits, ObjectiveSpec spec);
/// Four basis inputs, loss = bell_loss.
Evaluator bell_evaluator();

std::vector<StateVector> run_pure(const Evaluator& ev, std::span<const Gate> gates);
double evaluate(const Evaluator& ev, const CompiledCircuit& circuit);

} // namespace dqas
