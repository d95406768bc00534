#pragma once
/**
 * @file
 * Independent categorical distribution over structures: row i of alpha holds
 * the logits of placeholder i, p(k_i = j) = softmax(alpha_i)_j.
 */

#include <vector>

#include <Eigen/Dense>

#include "dqas/common.hpp"
#include "dqas/structure.hpp"

namespace dqas {

/// Logits, shape p x c.
using StructureParams = Eigen::MatrixXd;

/// Logits are clamped to [-kAlphaClamp, kAlphaClamp] before the softmax.
inline constexpr double kAlphaClamp = 30.0;

/// Row-wise softmax of the clamped logits. Throws on NaN.
Eigen::MatrixXd probs(const StructureParams& alpha);

/// One index per row, drawn by inverse CDF with a single uniform per row.
StructureSample sample(const StructureParams& alpha, Rng& rng);

/// d ln P(k) / d alpha_ij = [j == k_i] - p_ij.
Eigen::MatrixXd grad_log_prob(const StructureParams& alpha, const StructureSample& k);

double log_prob(const StructureParams& alpha, const StructureSample& k);

/// Row-wise argmax; ties resolve to the lowest index.
StructureSample most_probable(const StructureParams& alpha);

/// The k most probable ops of every row in descending probability (stable on ties).
std::vector<std::vector<int>> top_k(const StructureParams& alpha, int k);

} // namespace dqas
