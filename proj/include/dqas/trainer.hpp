#pragma once
/**
 * @file
 * The search loop: sample a batch of structures, evaluate them, update the
 * structure logits (alpha) and the shared parameter pool (theta) with Adam,
 * then pick and fine-tune a final structure.
 */

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dqas/grads.hpp"
#include "dqas/probmodel.hpp"
#include "dqas/tasks.hpp"

namespace dqas {

/// Bias-corrected Adam on one flat tensor.
class Adam {
  public:
    explicit Adam(double lr = 0.1, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
        : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

    /// params -= lr * mhat / (sqrt(vhat) + eps). The first call fixes the shape.
    void step(Eigen::Ref<Eigen::VectorXd> params, const Eigen::Ref<const Eigen::VectorXd>& grad);
    /// Same with an explicit learning rate for this step.
    void step(Eigen::Ref<Eigen::VectorXd> params, const Eigen::Ref<const Eigen::VectorXd>& grad, double lr);

    double lr() const { return lr_; }
    long steps() const { return t_; }

  private:
    double lr_;
    double beta1_;
    double beta2_;
    double eps_;
    long t_ = 0;
    Eigen::VectorXd m_;
    Eigen::VectorXd v_;
};

struct PenaltyResult {
    double loss = 0.0;
    Eigen::MatrixXd grad;
};

/// lambda1 sum_{i>=1} sum_j p_ij p_{i-1,j} + lambda2 sum_i sum_j p_ij cost_j, with its alpha gradient.
PenaltyResult penalties(const StructureParams& alpha, const OperationPool& pool, double lambda1, double lambda2);

struct EarlyStopRule {
    /// Stop when the batch loss std falls below this (disabled when <= 0).
    double loss_std = 0.0;
    /// Stop when every row's largest probability exceeds this (disabled when <= 0).
    double prob = 0.99;
    /// Stop after this many epochs without a new best mean loss (disabled when <= 0).
    int patience = 100;
    /// No rule fires before this epoch count.
    int min_epochs = 0;
};

struct EpochRecord {
    int epoch = 0;
    double loss_mean = 0.0;
    double loss_std = 0.0;
    /// Model probability of the argmax structure after the update.
    double argmax_prob = 0.0;
    /// Baseline used in this epoch's alpha gradient.
    double baseline = 0.0;
    /// min_i max_j p_ij after the update.
    double min_row_max = 0.0;
};

bool early_stop(const std::vector<EpochRecord>& history, const EarlyStopRule& rule);

enum class FinalizeMode { Argmax, Grid, Beam };

FinalizeMode parse_finalize_mode(const std::string& name);
std::string finalize_name(FinalizeMode mode);

struct TrainConfig {
    int p = 0; // 0: task default
    int batch = 64;
    int epochs = 200;
    double lr_alpha = 0.1;
    double lr_theta = 0.1;
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    double param_noise = 0.0;
    int prethermal_epochs = 0;
    EarlyStopRule early_stop;
    /// Optional override of the task's theta initializer.
    std::optional<double> theta_mean;
    std::optional<double> theta_std;
    double alpha_init = 0.0;
    GradMethod theta_grad = GradMethod::Auto;

    FinalizeMode finalize = FinalizeMode::Argmax;
    int top_k = 2;
    int beam_width = 2;
    int finetune_steps = 200;
    double finetune_lr = 0.05;
    /// lr_t = finetune_lr * finetune_decay^t.
    double finetune_decay = 0.97;

    int starts = 1;
    std::uint64_t seed = 0;
    /// Worker threads for batch evaluation; results do not depend on it.
    int threads = 1;

    void validate() const;
};

struct StartSummary {
    std::uint64_t seed = 0;
    StructureSample structure;
    double final_loss = 0.0;
    int epochs_run = 0;
};

struct TrainResult {
    StructureSample structure;
    ParamPool theta;
    double final_loss = 0.0;
    /// alpha and theta at the end of the search, before fine-tuning.
    StructureParams alpha;
    ParamPool trained_theta;
    std::vector<EpochRecord> history;
    std::vector<StartSummary> starts;
    std::uint64_t seed = 0;
};

/// Initial values carried into a run (layerwise warm starts).
struct WarmStart {
    StructureParams alpha;
    ParamPool theta;
};

/// One called per epoch, after the update.
using EpochCallback = std::function<void(const EpochRecord&)>;

TrainResult train(const TrainConfig& config, const Task& task, const std::optional<WarmStart>& warm = std::nullopt,
                  const EpochCallback& on_epoch = {});

struct FinetuneResult {
    ParamPool theta;
    double loss = 0.0;
};

/// Adam on theta entries used by k against the task's eval set; keeps the best theta seen.
FinetuneResult finetune(const Task& task, const StructureSample& k, ParamPool theta, int steps, double lr,
                        double decay, int threads = 1, GradMethod method = GradMethod::Auto);

/// Cartesian product of every row's top-k ops: k^p structures.
std::vector<StructureSample> grid_candidates(const StructureParams& alpha, int k);
/// Layerwise beam search under the model probability.
std::vector<StructureSample> beam_candidates(const StructureParams& alpha, int width);

/// Final structure and fine-tuned parameters from trained (alpha, theta).
TrainResult finalize(const StructureParams& alpha, const ParamPool& theta, const Task& task,
                     const TrainConfig& config);

/// Independent runs seeded from config.seed (start 0 uses it unchanged); returns the best
/// fine-tuned loss, ties to the earliest start.
TrainResult multi_start(const TrainConfig& config, const Task& task, const EpochCallback& on_epoch = {});

struct LayerwiseOptions {
    int p0 = 1;
    int delta = 1;
    int stages = 1;
    /// Ops whose largest row probability stays below this are dropped between stages (0 disables).
    double prune_floor = 0.0;
};

struct LayerwiseResult {
    TrainResult result;
    /// Pool after pruning; the result indexes into it.
    OperationPool pool;
    std::vector<int> kept_ops;
    std::vector<TrainResult> stages;
};

/// Rows of (alpha, theta) restricted to the kept ops become the first rows of a deeper
/// model; new rows take alpha_init and the fresh theta.
WarmStart grow_warm_start(const StructureParams& alpha, const ParamPool& theta, const std::vector<int>& keep,
                          int p_new, double alpha_init, ParamPool fresh_theta);

LayerwiseResult layerwise_train(const TrainConfig& config, const Task& task, const LayerwiseOptions& options);

} // namespace dqas
