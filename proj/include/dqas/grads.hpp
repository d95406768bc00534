#pragma once
/**
 * @file
 * Gradients of the two trainable sets: theta by parameter shift (central
 * finite differences as oracle and fallback), alpha by the score-function
 * estimator with a last-batch baseline.
 *
 * The adjoint method returns the same derivative as the shift rule with one
 * backward sweep instead of two suffix simulations per parameterized gate.
 */

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dqas/evaluator.hpp"
#include "dqas/params.hpp"
#include "dqas/pools.hpp"
#include "dqas/probmodel.hpp"

namespace dqas {

inline constexpr double kFiniteDiffStep = 1e-4;

enum class GradMethod { Auto, Adjoint, ParameterShift, FiniteDifference };

GradMethod parse_grad_method(const std::string& name);

struct ThetaGrad {
    double loss = 0.0;
    /// Same shape as theta; zero outside the entries (i, k_i, s) with s < l_{k_i}.
    ParamPool grad;
    GradMethod method = GradMethod::Auto;
};

/// Auto picks the adjoint sweep when the evaluator exposes its observable, the
/// shift rule when it is otherwise pure and linear, and finite differences for
/// everything else. The first two need every parameterized gate to be a Pauli rotation.
ThetaGrad grad_theta(const Evaluator& ev, const StructureSample& k, const ParamPool& theta,
                     const OperationPool& pool, const CompileContext& ctx, GradMethod method = GradMethod::Auto);

/// Loss only, no gradient.
double evaluate_structure(const Evaluator& ev, const StructureSample& k, const ParamPool& theta,
                          const OperationPool& pool, const CompileContext& ctx);

struct Baseline {
    std::optional<double> value;

    double get() const { return value.value_or(0.0); }
};

/// Becomes the mean of this batch, used for the next one. Throws on an empty batch.
Baseline update_baseline(const Baseline& baseline, std::span<const double> batch_losses);

/// (1/K) sum_b grad_log_prob(alpha, k_b) (L_b - baseline).
Eigen::MatrixXd grad_alpha(std::span<const std::pair<StructureSample, double>> batch, const StructureParams& alpha,
                           const Baseline& baseline);

/// Copy of theta with iid N(0, sigma^2) added to every entry.
ParamPool add_param_noise(const ParamPool& theta, double sigma, Rng& rng);

} // namespace dqas
