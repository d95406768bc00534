#include "dqas/grads.hpp"

#include <spdlog/spdlog.h>

#include <stdexcept>

namespace dqas {
namespace {

bool shift_applicable(const Evaluator& ev, const CompiledCircuit& circuit) {
    if (!ev.pure() || !ev.linear || circuit.is_moment_circuit()) {
        return false;
    }
    for (std::size_t t = 0; t < circuit.gates.size(); ++t) {
        if (circuit.origin[t].parameterized() && !gate_is_pauli_rotation(circuit.gates[t].kind)) {
            return false;
        }
    }
    return true;
}

ParamPool shift_gradient(const Evaluator& ev, const CompiledCircuit& circuit, const ParamPool& theta,
                         double& loss) {
    const auto& gates = circuit.gates;
    std::vector<std::size_t> param_gates;
    for (std::size_t t = 0; t < gates.size(); ++t) {
        if (circuit.origin[t].parameterized()) {
            param_gates.push_back(t);
        }
    }
    // cache[i][m]: state of input i just before the m-th parameterized gate.
    std::vector<std::vector<StateVector>> cache(ev.inputs.size());
    std::vector<StateVector> outs = ev.inputs;
    for (std::size_t i = 0; i < outs.size(); ++i) {
        std::size_t next = 0;
        for (std::size_t t = 0; t < gates.size(); ++t) {
            if (next < param_gates.size() && param_gates[next] == t) {
                cache[i].push_back(outs[i]);
                ++next;
            }
            outs[i].apply(gates[t]);
        }
    }
    loss = ev.readout(outs);

    ParamPool grad(theta.layers(), theta.ops(), theta.slots());
    std::vector<StateVector> shifted = ev.inputs;
    for (std::size_t m = 0; m < param_gates.size(); ++m) {
        const std::size_t t = param_gates[m];
        const GateOrigin& o = circuit.origin[t];
        double diff = 0.0;
        for (double sign : {1.0, -1.0}) {
            Gate g = gates[t];
            g.param += sign * kPi / 2;
            for (std::size_t i = 0; i < shifted.size(); ++i) {
                shifted[i] = cache[i][m];
                shifted[i].apply(g);
                shifted[i].apply(std::span<const Gate>(gates).subspan(t + 1));
            }
            diff += sign * ev.readout(shifted);
        }
        grad(o.layer, o.op, o.slot) += o.coeff * diff / 2.0;
    }
    return grad;
}

ParamPool adjoint_gradient(const Evaluator& ev, const CompiledCircuit& circuit, const ParamPool& theta,
                           double& loss) {
    const auto& gates = circuit.gates;
    const int n = ev.num_qubits;
    ParamPool grad(theta.layers(), theta.ops(), theta.slots());
    std::vector<StateVector> outs = run_pure(ev, gates);
    loss = 0.0;
    for (std::size_t i = 0; i < outs.size(); ++i) {
        CVector psi = outs[i].amplitudes();
        CVector lambda = ev.observable(i, outs[i]);
        loss += psi.dot(lambda).real();
        // Walk back: psi and lambda both sit just after gate t.
        for (std::size_t t = gates.size(); t-- > 0;) {
            const GateOrigin& o = circuit.origin[t];
            if (o.parameterized()) {
                PauliSum gen;
                gen.terms.push_back(rotation_generator(gates[t]));
                const double d = lambda.dot(apply_pauli_sum(gen, psi, n)).imag();
                grad(o.layer, o.op, o.slot) += o.coeff * d;
            }
            const Gate inv = gate_inverse(gates[t]);
            apply_gate(psi, n, inv);
            apply_gate(lambda, n, inv);
        }
    }
    return grad;
}

} // namespace

GradMethod parse_grad_method(const std::string& name) {
    if (name == "auto") return GradMethod::Auto;
    if (name == "adjoint") return GradMethod::Adjoint;
    if (name == "shift" || name == "parameter_shift") return GradMethod::ParameterShift;
    if (name == "finite_difference" || name == "fd") return GradMethod::FiniteDifference;
    throw std::invalid_argument("unknown gradient method '" + name + "'");
}

double evaluate_structure(const Evaluator& ev, const StructureSample& k, const ParamPool& theta,
                          const OperationPool& pool, const CompileContext& ctx) {
    return evaluate(ev, compile(k, theta, pool, ctx));
}

ThetaGrad grad_theta(const Evaluator& ev, const StructureSample& k, const ParamPool& theta,
                     const OperationPool& pool, const CompileContext& ctx, GradMethod method) {
    const CompiledCircuit circuit = compile(k, theta, pool, ctx);
    ThetaGrad out;
    if (method == GradMethod::Auto) {
        if (shift_applicable(ev, circuit)) {
            method = ev.observable ? GradMethod::Adjoint : GradMethod::ParameterShift;
        } else {
            method = GradMethod::FiniteDifference;
        }
    }
    out.method = method;
    if (method == GradMethod::Adjoint) {
        if (!ev.observable || !shift_applicable(ev, circuit)) {
            throw std::invalid_argument("grad_theta: adjoint sweep needs an observable and Pauli rotations");
        }
        out.grad = adjoint_gradient(ev, circuit, theta, out.loss);
        return out;
    }
    if (method == GradMethod::ParameterShift) {
        if (!shift_applicable(ev, circuit)) {
            throw std::invalid_argument("grad_theta: parameter shift needs a pure linear loss over Pauli rotations");
        }
        out.grad = shift_gradient(ev, circuit, theta, out.loss);
        return out;
    }

    out.loss = evaluate(ev, circuit);
    out.grad = ParamPool(theta.layers(), theta.ops(), theta.slots());
    bool any = false;
    for (int i = 0; i < static_cast<int>(k.size()); ++i) {
        const int j = k[static_cast<std::size_t>(i)];
        for (int s = 0; s < pool[static_cast<std::size_t>(j)].param_count; ++s) {
            ParamPool probe = theta;
            probe(i, j, s) = theta(i, j, s) + kFiniteDiffStep;
            const double up = evaluate_structure(ev, k, probe, pool, ctx);
            probe(i, j, s) = theta(i, j, s) - kFiniteDiffStep;
            const double down = evaluate_structure(ev, k, probe, pool, ctx);
            out.grad(i, j, s) += (up - down) / (2.0 * kFiniteDiffStep);
            any = true;
        }
    }
    if (any) {
        spdlog::debug("grad_theta: central finite differences (h = {})", kFiniteDiffStep);
    }
    return out;
}

Baseline update_baseline(const Baseline&, std::span<const double> batch_losses) {
    if (batch_losses.empty()) {
        throw std::invalid_argument("update_baseline: empty batch");
    }
    double sum = 0.0;
    for (double l : batch_losses) {
        sum += l;
    }
    return Baseline{sum / static_cast<double>(batch_losses.size())};
}

Eigen::MatrixXd grad_alpha(std::span<const std::pair<StructureSample, double>> batch, const StructureParams& alpha,
                           const Baseline& baseline) {
    if (batch.empty()) {
        throw std::invalid_argument("grad_alpha: empty batch");
    }
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(alpha.rows(), alpha.cols());
    const double b = baseline.get();
    for (const auto& [k, loss] : batch) {
        g += grad_log_prob(alpha, k) * (loss - b);
    }
    return g / static_cast<double>(batch.size());
}

ParamPool add_param_noise(const ParamPool& theta, double sigma, Rng& rng) {
    if (!(sigma >= 0.0)) {
        throw std::invalid_argument("add_param_noise: sigma must be >= 0");
    }
    ParamPool out = theta;
    if (sigma == 0.0) {
        return out;
    }
    for (Eigen::Index i = 0; i < out.size(); ++i) {
        out.values()(i) += rng.normal(0.0, sigma);
    }
    return out;
}

} // namespace dqas
