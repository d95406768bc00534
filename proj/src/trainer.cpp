#include "dqas/trainer.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <cctype>
#include <exception>
#include <stdexcept>
#include <thread>

namespace dqas {
namespace {

constexpr std::uint64_t kTagInit = 0x11;
constexpr std::uint64_t kTagEpoch = 0x22;
constexpr std::uint64_t kTagPretherm = 0x33;
constexpr std::uint64_t kTagMember = 0x44;
constexpr std::uint64_t kTagStart = 0x55;

// Runs fn(i) for i in [0, n) on up to `threads` workers. The first exception
// (lowest index) is rethrown after all workers finish.
template <typename Fn>
void parallel_for(int n, int threads, Fn&& fn) {
    threads = std::max(1, std::min(threads, n));
    if (threads == 1) {
        for (int i = 0; i < n; ++i) {
            fn(i);
        }
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
    std::vector<std::thread> pool;
    for (int w = 0; w < threads; ++w) {
        pool.emplace_back([&] {
            for (int i = next++; i < n; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    errors[static_cast<std::size_t>(i)] = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) {
        t.join();
    }
    for (auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
}

ParamPool init_theta(const TrainConfig& config, const Task& task, int p, std::uint64_t seed) {
    ParamPool theta(p, task.pool.size(), task.pool.max_params());
    const double mean = config.theta_mean.value_or(task.theta_mean);
    const double sd = config.theta_std.value_or(task.theta_std);
    Rng rng(derive_seed(seed, kTagInit));
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
        theta.values()(i) = sd > 0.0 ? rng.normal(mean, sd) : mean;
    }
    return theta;
}

struct MemberOutcome {
    StructureSample k;
    double loss = 0.0;
    ParamPool grad;
};

struct BatchOutcome {
    std::vector<MemberOutcome> members;
    std::vector<double> losses;
    ParamPool theta_grad;
};

BatchOutcome run_batch(const TrainConfig& config, const Task& task, const StructureParams& alpha,
                       const ParamPool& theta, std::uint64_t tag, int epoch) {
    BatchOutcome out;
    out.members.resize(static_cast<std::size_t>(config.batch));
    try {
        std::optional<TaskMember> shared;
        if (task.shared_member) {
            shared = task.sample_member(
                derive_seed(config.seed, tag, static_cast<std::uint64_t>(epoch), kTagMember));
        }
        parallel_for(config.batch, config.threads, [&](int b) {
            const std::uint64_t seed = derive_seed(config.seed, tag, static_cast<std::uint64_t>(epoch),
                                                   static_cast<std::uint64_t>(b));
            Rng rng(seed);
            MemberOutcome& m = out.members[static_cast<std::size_t>(b)];
            m.k = sample(alpha, rng);
            const ParamPool noisy = add_param_noise(theta, config.param_noise, rng);
            const TaskMember member = shared ? *shared : task.sample_member(derive_seed(seed, kTagMember));
            ThetaGrad tg = grad_theta(member.eval, m.k, noisy, task.pool, member.ctx, config.theta_grad);
            m.loss = tg.loss;
            m.grad = std::move(tg.grad);
        });
    } catch (const Error&) {
        throw;
    } catch (const std::exception& err) {
        throw EvaluationError("epoch " + std::to_string(epoch) + ": " + err.what());
    }

    // Average each theta entry over the members whose structure uses it.
    out.theta_grad = ParamPool(theta.layers(), theta.ops(), theta.slots());
    Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(theta.layers(), theta.ops());
    for (const auto& m : out.members) {
        out.losses.push_back(m.loss);
        out.theta_grad.values() += m.grad.values();
        for (int i = 0; i < theta.layers(); ++i) {
            counts(i, m.k[static_cast<std::size_t>(i)]) += 1.0;
        }
    }
    for (int i = 0; i < theta.layers(); ++i) {
        for (int j = 0; j < theta.ops(); ++j) {
            if (counts(i, j) > 0.0) {
                for (int s = 0; s < theta.slots(); ++s) {
                    out.theta_grad(i, j, s) /= counts(i, j);
                }
            }
        }
    }
    for (double l : out.losses) {
        if (!std::isfinite(l)) {
            throw EvaluationError("epoch " + std::to_string(epoch) + ": non-finite loss");
        }
    }
    return out;
}

std::pair<double, double> mean_std(const std::vector<double>& xs) {
    double mean = 0.0;
    for (double x : xs) {
        mean += x;
    }
    mean /= static_cast<double>(xs.size());
    double var = 0.0;
    for (double x : xs) {
        var += (x - mean) * (x - mean);
    }
    return {mean, std::sqrt(var / static_cast<double>(xs.size()))};
}

bool uses_params(const OperationPool& pool, const StructureSample& k) {
    return std::any_of(k.choice.begin(), k.choice.end(),
                       [&](int j) { return pool[static_cast<std::size_t>(j)].param_count > 0; });
}

} // namespace

std::vector<StructureSample> grid_candidates(const StructureParams& alpha, int k) {
    const auto rows = top_k(alpha, k);
    std::vector<StructureSample> out{StructureSample(std::vector<int>{})};
    for (const auto& row : rows) {
        std::vector<StructureSample> next;
        for (const auto& prefix : out) {
            for (int j : row) {
                StructureSample s = prefix;
                s.choice.push_back(j);
                next.push_back(std::move(s));
            }
        }
        out = std::move(next);
    }
    return out;
}

std::vector<StructureSample> beam_candidates(const StructureParams& alpha, int width) {
    const Eigen::MatrixXd p = probs(alpha);
    std::vector<std::pair<StructureSample, double>> beams{{StructureSample(std::vector<int>{}), 0.0}};
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
        std::vector<std::pair<StructureSample, double>> next;
        for (const auto& [prefix, score] : beams) {
            for (Eigen::Index j = 0; j < p.cols(); ++j) {
                StructureSample s = prefix;
                s.choice.push_back(static_cast<int>(j));
                next.emplace_back(std::move(s), score + std::log(p(i, j)));
            }
        }
        std::stable_sort(next.begin(), next.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
        next.resize(std::min<std::size_t>(next.size(), static_cast<std::size_t>(width)));
        beams = std::move(next);
    }
    std::vector<StructureSample> out;
    for (auto& b : beams) {
        out.push_back(std::move(b.first));
    }
    return out;
}

void Adam::step(Eigen::Ref<Eigen::VectorXd> params, const Eigen::Ref<const Eigen::VectorXd>& grad) {
    step(params, grad, lr_);
}

void Adam::step(Eigen::Ref<Eigen::VectorXd> params, const Eigen::Ref<const Eigen::VectorXd>& grad, double lr) {
    if (params.size() != grad.size()) {
        throw std::invalid_argument("Adam::step: parameter and gradient sizes differ");
    }
    if (t_ == 0) {
        m_ = Eigen::VectorXd::Zero(params.size());
        v_ = Eigen::VectorXd::Zero(params.size());
    } else if (m_.size() != params.size()) {
        throw std::invalid_argument("Adam::step: parameter shape changed between steps");
    }
    ++t_;
    m_ = beta1_ * m_ + (1.0 - beta1_) * grad;
    v_ = beta2_ * v_ + (1.0 - beta2_) * grad.cwiseAbs2();
    const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    params.array() -= lr * (m_.array() / c1) / ((v_.array() / c2).sqrt() + eps_);
}

PenaltyResult penalties(const StructureParams& alpha, const OperationPool& pool, double lambda1, double lambda2) {
    if (lambda1 < 0.0 || lambda2 < 0.0) {
        throw std::invalid_argument("penalties: weights must be >= 0");
    }
    PenaltyResult out{0.0, Eigen::MatrixXd::Zero(alpha.rows(), alpha.cols())};
    if (lambda1 == 0.0 && lambda2 == 0.0) {
        return out;
    }
    const Eigen::MatrixXd p = probs(alpha);
    const Eigen::Index rows = p.rows();
    Eigen::RowVectorXd cost(p.cols());
    for (Eigen::Index j = 0; j < p.cols(); ++j) {
        cost(j) = pool[static_cast<std::size_t>(j)].cost;
    }
    for (Eigen::Index i = 0; i < rows; ++i) {
        // q: derivative of the penalty with respect to p_i.
        Eigen::RowVectorXd q = lambda2 * cost;
        if (i >= 1) {
            q += lambda1 * p.row(i - 1);
            out.loss += lambda1 * p.row(i).dot(p.row(i - 1));
        }
        if (i + 1 < rows) {
            q += lambda1 * p.row(i + 1);
        }
        out.loss += lambda2 * p.row(i).dot(cost);
        // Softmax Jacobian: d p_ik / d alpha_ij = p_ik ([j == k] - p_ij).
        const double avg = p.row(i).dot(q);
        out.grad.row(i) = p.row(i).array() * (q.array() - avg);
    }
    return out;
}

bool early_stop(const std::vector<EpochRecord>& history, const EarlyStopRule& rule) {
    if (history.empty() || static_cast<int>(history.size()) < rule.min_epochs) {
        return false;
    }
    const EpochRecord& last = history.back();
    if (rule.loss_std > 0.0 && last.loss_std < rule.loss_std) {
        return true;
    }
    if (rule.prob > 0.0 && last.min_row_max > rule.prob) {
        return true;
    }
    if (rule.patience > 0) {
        std::size_t best = 0;
        for (std::size_t t = 1; t < history.size(); ++t) {
            if (history[t].loss_mean < history[best].loss_mean) {
                best = t;
            }
        }
        if (static_cast<int>(history.size() - 1 - best) >= rule.patience) {
            return true;
        }
    }
    return false;
}

FinalizeMode parse_finalize_mode(const std::string& name) {
    if (name == "argmax") return FinalizeMode::Argmax;
    if (name == "grid") return FinalizeMode::Grid;
    if (name == "beam") return FinalizeMode::Beam;
    throw InputError("unknown finalize mode '" + name + "' (argmax, grid, beam)");
}

std::string finalize_name(FinalizeMode mode) {
    switch (mode) {
    case FinalizeMode::Argmax:
        return "argmax";
    case FinalizeMode::Grid:
        return "grid";
    case FinalizeMode::Beam:
        return "beam";
    }
    return "?";
}

void TrainConfig::validate() const {
    if (p < 0) throw InputError("trainer.p must be >= 0");
    if (batch < 1) throw InputError("trainer.batch must be >= 1");
    if (epochs < 0) throw InputError("trainer.epochs must be >= 0");
    if (!(lr_alpha > 0.0) || !(lr_theta > 0.0)) throw InputError("learning rates must be positive");
    if (lambda1 < 0.0 || lambda2 < 0.0) throw InputError("penalty weights must be >= 0");
    if (param_noise < 0.0) throw InputError("trainer.param_noise must be >= 0");
    if (prethermal_epochs < 0) throw InputError("trainer.prethermal_epochs must be >= 0");
    if (top_k < 1 || beam_width < 1) throw InputError("top_k and beam_width must be >= 1");
    if (finetune_steps < 0) throw InputError("trainer.finetune_steps must be >= 0");
    if (finalize == FinalizeMode::Grid && finetune_steps == 0) {
        throw InputError("grid finalization needs finetune_steps > 0");
    }
    if (!(finetune_lr > 0.0) || !(finetune_decay > 0.0 && finetune_decay <= 1.0)) {
        throw InputError("fine-tune lr must be positive and decay in (0, 1]");
    }
    if (starts < 1) throw InputError("trainer.starts must be >= 1");
    if (threads < 1) throw InputError("threads must be >= 1");
}

TrainResult train(const TrainConfig& config, const Task& task, const std::optional<WarmStart>& warm,
                  const EpochCallback& on_epoch) {
    config.validate();
    const int p = config.p > 0 ? config.p : task.default_p;
    const int c = task.pool.size();

    StructureParams alpha = StructureParams::Constant(p, c, config.alpha_init);
    ParamPool theta = init_theta(config, task, p, config.seed);
    if (warm) {
        if (warm->alpha.rows() != p || warm->alpha.cols() != c || !warm->theta.same_shape(theta)) {
            throw std::invalid_argument("train: warm start shape does not match (p, c, l)");
        }
        alpha = warm->alpha;
        theta = warm->theta;
    }

    Adam adam_alpha(config.lr_alpha);
    Adam adam_theta(config.lr_theta);
    Adam adam_pretherm(config.lr_theta);

    for (int t = 0; t < config.prethermal_epochs; ++t) {
        const BatchOutcome batch = run_batch(config, task, alpha, theta, kTagPretherm, t);
        adam_pretherm.step(theta.values(), batch.theta_grad.values());
    }

    TrainResult result;
    result.seed = config.seed;
    Baseline baseline;
    for (int t = 0; t < config.epochs; ++t) {
        const BatchOutcome batch = run_batch(config, task, alpha, theta, kTagEpoch, t);

        std::vector<std::pair<StructureSample, double>> scored;
        for (const auto& m : batch.members) {
            scored.emplace_back(m.k, m.loss);
        }
        Eigen::MatrixXd g_alpha = grad_alpha(scored, alpha, baseline);
        g_alpha += penalties(alpha, task.pool, config.lambda1, config.lambda2).grad;

        EpochRecord rec;
        rec.epoch = t;
        std::tie(rec.loss_mean, rec.loss_std) = mean_std(batch.losses);
        rec.baseline = baseline.get();

        adam_theta.step(theta.values(), batch.theta_grad.values());
        Eigen::Map<Eigen::VectorXd> alpha_flat(alpha.data(), alpha.size());
        adam_alpha.step(alpha_flat, Eigen::Map<const Eigen::VectorXd>(g_alpha.data(), g_alpha.size()));

        const Eigen::MatrixXd pr = probs(alpha);
        rec.argmax_prob = std::exp(log_prob(alpha, most_probable(alpha)));
        rec.min_row_max = pr.rowwise().maxCoeff().minCoeff();
        baseline = update_baseline(baseline, batch.losses);

        result.history.push_back(rec);
        spdlog::debug("epoch {:4d} loss {:+.6f} std {:.6f} argmax_prob {:.4f}", t, rec.loss_mean, rec.loss_std,
                      rec.argmax_prob);
        if (on_epoch) {
            on_epoch(rec);
        }
        if (early_stop(result.history, config.early_stop)) {
            spdlog::debug("early stop after epoch {}", t);
            break;
        }
    }

    TrainResult fin = finalize(alpha, theta, task, config);
    fin.history = std::move(result.history);
    fin.seed = config.seed;
    fin.starts = {{config.seed, fin.structure, fin.final_loss, static_cast<int>(fin.history.size())}};
    return fin;
}

FinetuneResult finetune(const Task& task, const StructureSample& k, ParamPool theta, int steps, double lr,
                        double decay, int threads, GradMethod method) {
    FinetuneResult best{theta, eval_loss(task, k, theta)};
    if (steps <= 0 || !uses_params(task.pool, k)) {
        return best;
    }
    Adam adam(lr);
    const int members = static_cast<int>(task.eval_set.size());
    std::vector<ThetaGrad> grads(static_cast<std::size_t>(members));
    for (int s = 0; s <= steps; ++s) {
        parallel_for(members, threads, [&](int m) {
            const TaskMember& member = task.eval_set[static_cast<std::size_t>(m)];
            grads[static_cast<std::size_t>(m)] = grad_theta(member.eval, k, theta, task.pool, member.ctx, method);
        });
        double loss = 0.0;
        Eigen::VectorXd g = Eigen::VectorXd::Zero(theta.size());
        for (const auto& tg : grads) {
            loss += tg.loss;
            g += tg.grad.values();
        }
        loss /= members;
        g /= members;
        if (loss < best.loss) {
            best = {theta, loss};
        }
        if (s == steps) {
            break;
        }
        adam.step(theta.values(), g, lr * std::pow(decay, s));
    }
    return best;
}

TrainResult finalize(const StructureParams& alpha, const ParamPool& theta, const Task& task,
                     const TrainConfig& config) {
    std::vector<StructureSample> candidates;
    switch (config.finalize) {
    case FinalizeMode::Argmax:
        candidates = {most_probable(alpha)};
        break;
    case FinalizeMode::Grid:
        if (config.finetune_steps <= 0) {
            throw std::invalid_argument("finalize: grid mode needs a positive fine-tune budget");
        }
        candidates = grid_candidates(alpha, config.top_k);
        break;
    case FinalizeMode::Beam:
        candidates = beam_candidates(alpha, config.beam_width);
        break;
    }
    TrainResult out;
    out.alpha = alpha;
    out.trained_theta = theta;
    bool have = false;
    for (const auto& k : candidates) {
        FinetuneResult ft = finetune(task, k, theta, config.finetune_steps, config.finetune_lr,
                                     config.finetune_decay, config.threads, config.theta_grad);
        if (!have || ft.loss < out.final_loss) {
            out.structure = k;
            out.theta = std::move(ft.theta);
            out.final_loss = ft.loss;
            have = true;
        }
    }
    return out;
}

TrainResult multi_start(const TrainConfig& config, const Task& task, const EpochCallback& on_epoch) {
    if (config.starts < 1) {
        throw std::invalid_argument("multi_start: need at least one start");
    }
    std::optional<TrainResult> best;
    std::vector<StartSummary> summaries;
    for (int s = 0; s < config.starts; ++s) {
        TrainConfig cfg = config;
        cfg.seed = s == 0 ? config.seed : derive_seed(config.seed, kTagStart, static_cast<std::uint64_t>(s));
        TrainResult r = train(cfg, task, std::nullopt, on_epoch);
        spdlog::info("start {}/{}: final loss {:.6f}", s + 1, config.starts, r.final_loss);
        summaries.push_back(r.starts.front());
        if (!best || r.final_loss < best->final_loss) {
            best = std::move(r);
        }
    }
    best->starts = std::move(summaries);
    return *best;
}

WarmStart grow_warm_start(const StructureParams& alpha, const ParamPool& theta, const std::vector<int>& keep,
                          int p_new, double alpha_init, ParamPool fresh_theta) {
    const int c_new = static_cast<int>(keep.size());
    if (p_new < alpha.rows() || fresh_theta.layers() != p_new || fresh_theta.ops() != c_new) {
        throw std::invalid_argument("grow_warm_start: new shape must extend the old one");
    }
    WarmStart warm{StructureParams::Constant(p_new, c_new, alpha_init), std::move(fresh_theta)};
    const int slots = std::min(warm.theta.slots(), theta.slots());
    for (int i = 0; i < alpha.rows(); ++i) {
        for (int jj = 0; jj < c_new; ++jj) {
            const int j = keep[static_cast<std::size_t>(jj)];
            warm.alpha(i, jj) = alpha(i, j);
            for (int s = 0; s < slots; ++s) {
                warm.theta(i, jj, s) = theta(i, j, s);
            }
        }
    }
    return warm;
}

LayerwiseResult layerwise_train(const TrainConfig& config, const Task& task, const LayerwiseOptions& options) {
    if (options.delta <= 0) {
        throw std::invalid_argument("layerwise_train: delta must be positive");
    }
    if (options.p0 < 1 || options.stages < 0) {
        throw std::invalid_argument("layerwise_train: p0 must be >= 1 and stages >= 0");
    }
    Task current = task;
    std::vector<int> kept(static_cast<std::size_t>(task.pool.size()));
    for (int j = 0; j < task.pool.size(); ++j) {
        kept[static_cast<std::size_t>(j)] = j;
    }
    LayerwiseResult out{TrainResult{}, task.pool, kept, {}};

    TrainConfig cfg = config;
    cfg.p = options.p0;
    TrainResult r = train(cfg, current, std::nullopt);
    out.stages.push_back(r);
    for (int stage = 1; stage <= options.stages; ++stage) {
        // Keep ops that some row still favours; always keep the current argmax ops.
        const Eigen::MatrixXd pr = probs(r.alpha);
        std::vector<int> keep_local;
        for (int j = 0; j < current.pool.size(); ++j) {
            const bool in_argmax = std::find(r.structure.choice.begin(), r.structure.choice.end(), j) !=
                                   r.structure.choice.end();
            if (options.prune_floor <= 0.0 || in_argmax || pr.col(j).maxCoeff() >= options.prune_floor) {
                keep_local.push_back(j);
            }
        }
        if (keep_local.size() < 2) {
            for (int j = 0; j < current.pool.size() && keep_local.size() < 2; ++j) {
                if (std::find(keep_local.begin(), keep_local.end(), j) == keep_local.end()) {
                    keep_local.push_back(j);
                }
            }
            std::sort(keep_local.begin(), keep_local.end());
        }

        const int p_old = cfg.p;
        cfg.p = p_old + options.delta;
        Task next = current;
        next.pool = current.pool.subset(keep_local);
        const WarmStart warm =
            grow_warm_start(r.alpha, r.trained_theta, keep_local, cfg.p, config.alpha_init,
                            init_theta(cfg, next, cfg.p, derive_seed(config.seed, static_cast<std::uint64_t>(stage))));
        std::vector<int> kept_global;
        for (int j : keep_local) {
            kept_global.push_back(out.kept_ops[static_cast<std::size_t>(j)]);
        }
        out.kept_ops = std::move(kept_global);
        current = std::move(next);
        r = train(cfg, current, warm);
        out.stages.push_back(r);
    }
    out.result = r;
    out.pool = current.pool;
    return out;
}

} // namespace dqas
