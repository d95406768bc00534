#pragma once
/**
 * @file
 * Task losses evaluated on simulator outputs. Every loss is minimized.
 */

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dqas/graph.hpp"
#include "dqas/simulator.hpp"

namespace dqas {

/// sum_{(i,j) in E} w_ij Z_i Z_j; its expectation is the MAXCUT loss.
PauliSum maxcut_hamiltonian(const Graph& graph);
/// (W_total - loss) / 2.
double cut_from_loss(const Graph& graph, double loss);

struct EnergyLevel {
    double energy = 0.0;
    double probability = 0.0;
};
using EnergyDistribution = std::vector<EnergyLevel>;

/// Measurement distribution of a diagonal observable on a state.
EnergyDistribution energy_distribution(const StateVector& state, const PauliSum& diagonal_observable);

double expectation_objective(const StateVector& state, const PauliSum& observable);
/// Mean energy of the lowest eta probability mass; the boundary level is weighted fractionally.
double cvar_objective(EnergyDistribution dist, double eta);
/// -ln sum_b p_b exp(-lambda E_b), evaluated with a log-sum-exp shift.
double gibbs_objective(const EnergyDistribution& dist, double lambda);
/// sum_i |psi_i - phi_i|; sensitive to global phase.
double state_distance(const CVector& psi, const CVector& phi);
double state_distance(const StateVector& psi, const StateVector& phi);

/// Signed ZZ and XX expectations over the four basis inputs |ab>:
/// -sum_ab [(-1)^(a xor b) <Z0Z1> + (-1)^b <X0X1>]. Minimum -8.
double bell_objective(const std::function<StateVector(const StateVector&)>& circuit);
/// Same loss from the four outputs U|00>, U|01>, U|10>, U|11>.
double bell_loss(std::span<const StateVector> outputs);
/// Observable whose expectation on the output for basis input |ab> (index 2a + b) is that row's loss share.
PauliSum bell_observable(int input);
/// Rows of the Bell specification table that a circuit violates (tolerance tol).
std::vector<std::string> bell_violations(const std::function<StateVector(const StateVector&)>& circuit,
                                         double tol = 1e-9);

enum class ObjectiveKind { Expectation, Cvar, Gibbs, Fidelity, StateDistance, Bell };

ObjectiveKind parse_objective_kind(const std::string& name);
std::string objective_name(ObjectiveKind kind);

struct ObjectiveSpec {
    ObjectiveKind kind = ObjectiveKind::Expectation;
    double eta = 0.2;
    double lambda = 1.0;
    PauliSum hamiltonian;
    std::optional<StateVector> target;

    /// True when the loss is linear in the output density matrix, which is
    /// what the parameter-shift rule requires.
    bool linear() const;
    void validate() const;
};

/// Loss of one pure output state (expectation, cvar, gibbs, fidelity as -F, distance).
double evaluate_objective(const ObjectiveSpec& spec, const StateVector& out);

} // namespace dqas
