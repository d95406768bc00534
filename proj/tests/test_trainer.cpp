#include <doctest.h>

#include <set>

#include "dqas/trainer.hpp"

using namespace dqas;

namespace {

/// Single-member task with loss <observable> on U|0^n>.
Task toy_task(OperationPool pool, int n, PauliSum observable, int p, std::optional<Graph> graph = std::nullopt) {
    ObjectiveSpec spec;
    spec.hamiltonian = std::move(observable);
    TaskMember member;
    member.ctx.num_qubits = n;
    member.ctx.graph = std::move(graph);
    member.eval = objective_evaluator(n, spec);
    Task task("toy", std::move(pool));
    task.default_p = p;
    task.sample_member = [member](std::uint64_t) { return member; };
    task.eval_set = {member};
    return task;
}

PauliSum z0() { return PauliSum{}.add(1.0, {{0, Pauli::Z}}); }

TrainConfig quick_config() {
    TrainConfig cfg;
    cfg.batch = 16;
    cfg.epochs = 40;
    cfg.lr_alpha = 0.2;
    cfg.lr_theta = 0.1;
    cfg.finetune_steps = 20;
    cfg.early_stop = EarlyStopRule{0.0, 0.0, 0, 0};
    cfg.seed = 9;
    return cfg;
}

} // namespace

TEST_CASE("Adam first step and zero gradient") {
    Adam adam(0.1);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(3);
    Eigen::VectorXd g(3);
    g << 2.0, -0.003, 0.0;
    adam.step(x, g);
    CHECK(x(0) == doctest::Approx(-0.1).epsilon(1e-6));
    CHECK(x(1) == doctest::Approx(0.1).epsilon(1e-4));
    CHECK(x(2) == 0.0);

    Adam idle(0.1);
    Eigen::VectorXd y = Eigen::VectorXd::Constant(2, 1.5);
    for (int t = 0; t < 10; ++t) idle.step(y, Eigen::VectorXd::Zero(2));
    CHECK((y.array() == 1.5).all());

    // independent instances keep independent moments
    Adam a(0.1), b(0.1);
    Eigen::VectorXd u = Eigen::VectorXd::Zero(1), v = Eigen::VectorXd::Zero(1);
    a.step(u, Eigen::VectorXd::Constant(1, 1.0));
    a.step(u, Eigen::VectorXd::Constant(1, 1.0));
    b.step(v, Eigen::VectorXd::Constant(1, -1.0));
    CHECK(v(0) == doctest::Approx(0.1).epsilon(1e-6));
    CHECK(a.steps() == 2);
    CHECK(b.steps() == 1);

    CHECK_THROWS(a.step(u, Eigen::VectorXd::Zero(2)));
}

TEST_CASE("Adam minimizes a quadratic") {
    Adam adam(0.05);
    Eigen::VectorXd x(2);
    x << 3.0, -2.0;
    for (int t = 0; t < 2000; ++t) adam.step(x, 2.0 * x);
    CHECK(x.norm() < 1e-3);
}

TEST_CASE("penalty examples") {
    const OperationPool pool = gate_pool({{GateKind::Rx, {0}}, {GateKind::Ry, {0}}});
    const PenaltyResult none = penalties(Eigen::MatrixXd::Random(3, 2), pool, 0.0, 0.0);
    CHECK(none.loss == 0.0);
    CHECK(none.grad.cwiseAbs().maxCoeff() == 0.0);

    CHECK(penalties(Eigen::MatrixXd::Zero(2, 2), pool, 1.0, 0.0).loss == doctest::Approx(0.5));
    // uniform rows, each op costs 1: lambda2 * p * 1
    CHECK(penalties(Eigen::MatrixXd::Zero(3, 2), pool, 0.0, 2.0).loss == doctest::Approx(6.0));
}

TEST_CASE("penalty gradient matches finite differences") {
    const Graph g(4, {{0, 1}, {1, 2}, {2, 3}, {0, 3}});
    const OperationPool pool = qaoa_block_pool(g);
    Rng rng(91);
    for (int t = 0; t < 10; ++t) {
        Eigen::MatrixXd alpha(4, pool.size());
        for (Eigen::Index i = 0; i < alpha.size(); ++i) alpha.data()[i] = rng.normal();
        const double l1 = rng.uniform(0.1, 2.0), l2 = rng.uniform(0.01, 0.1);
        const Eigen::MatrixXd grad = penalties(alpha, pool, l1, l2).grad;
        Eigen::MatrixXd fd(alpha.rows(), alpha.cols());
        const double h = 1e-6;
        for (Eigen::Index i = 0; i < alpha.size(); ++i) {
            Eigen::MatrixXd up = alpha, dn = alpha;
            up.data()[i] += h;
            dn.data()[i] -= h;
            fd.data()[i] = (penalties(up, pool, l1, l2).loss - penalties(dn, pool, l1, l2).loss) / (2 * h);
        }
        CHECK((grad - fd).norm() / fd.norm() < 1e-6);
    }
}

TEST_CASE("early stop rules") {
    std::vector<EpochRecord> hist(5);
    for (int i = 0; i < 5; ++i) hist[static_cast<std::size_t>(i)].epoch = i;
    CHECK(early_stop(hist, EarlyStopRule{1e-3, 0.0, 0, 0}));

    for (auto& r : hist) {
        r.loss_std = 1.0;
        r.min_row_max = 0.25;
    }
    CHECK(!early_stop(hist, EarlyStopRule{0.0, 0.9, 0, 0}));
    hist.back().min_row_max = 0.95;
    CHECK(early_stop(hist, EarlyStopRule{0.0, 0.9, 0, 0}));
    CHECK(!early_stop(hist, EarlyStopRule{0.0, 0.9, 0, 10})); // min_epochs

    std::vector<EpochRecord> improving(60);
    for (int i = 0; i < 60; ++i) {
        improving[static_cast<std::size_t>(i)].epoch = i;
        improving[static_cast<std::size_t>(i)].loss_mean = -i;
        improving[static_cast<std::size_t>(i)].loss_std = 1.0;
    }
    CHECK(!early_stop(improving, EarlyStopRule{0.0, 0.0, 50, 0}));
    std::vector<EpochRecord> flat = improving;
    for (auto& r : flat) r.loss_mean = 1.0;
    CHECK(early_stop(flat, EarlyStopRule{0.0, 0.0, 50, 0}));
}

TEST_CASE("grid and beam candidates") {
    const Eigen::MatrixXd alpha = Eigen::MatrixXd::Random(5, 4);
    const auto grid = grid_candidates(alpha, 2);
    CHECK(grid.size() == 32);
    std::set<StructureSample> unique(grid.begin(), grid.end());
    CHECK(unique.size() == 32);
    CHECK(grid_candidates(alpha, 1).front() == most_probable(alpha));

    const auto beam = beam_candidates(alpha, 3);
    CHECK(beam.size() == 3);
    CHECK(beam.front() == most_probable(alpha));
}

TEST_CASE("grid finalization needs a fine-tune budget") {
    TrainConfig cfg = quick_config();
    cfg.finalize = FinalizeMode::Grid;
    cfg.finetune_steps = 0;
    CHECK_THROWS_AS(cfg.validate(), InputError);
    const Task task = toy_task(gate_pool({{GateKind::Rx, {0}}, {GateKind::Ry, {0}}}), 1, z0(), 2);
    CHECK_THROWS(finalize(Eigen::MatrixXd::Zero(2, 2), ParamPool(2, 2, 1), task, cfg));
}

TEST_CASE("peaked alpha: grid and argmax agree") {
    const Task task = toy_task(gate_pool({{GateKind::Ry, {0}}, {GateKind::H, {0}}, {GateKind::X, {0}}}), 1, z0(), 2);
    Eigen::MatrixXd alpha = Eigen::MatrixXd::Zero(2, 3);
    alpha(0, 2) = 20.0;
    alpha(1, 1) = 20.0;
    TrainConfig cfg = quick_config();
    const TrainResult arg = finalize(alpha, ParamPool(2, 3, 1), task, cfg);
    cfg.finalize = FinalizeMode::Grid;
    cfg.top_k = 1;
    const TrainResult grid = finalize(alpha, ParamPool(2, 3, 1), task, cfg);
    CHECK(arg.structure == grid.structure);
    CHECK(arg.structure == StructureSample{2, 1});
}

TEST_CASE("degenerate structure space reduces to theta optimization") {
    // both ops are single-qubit rotations that can reach <Z> = -1
    const Task task = toy_task(gate_pool({{GateKind::Rx, {0}}, {GateKind::Ry, {0}}}), 1, z0(), 1);
    TrainConfig cfg = quick_config();
    cfg.theta_mean = 0.3;
    cfg.theta_std = 0.0;
    const TrainResult r = train(cfg, task);
    REQUIRE(r.history.size() == 40);
    double head = 0.0, tail = 0.0;
    for (int i = 0; i < 5; ++i) {
        head += r.history[static_cast<std::size_t>(i)].loss_mean;
        tail += r.history[r.history.size() - 1 - static_cast<std::size_t>(i)].loss_mean;
    }
    CHECK(tail < head);
    CHECK(r.final_loss < -0.99);
}

TEST_CASE("training is deterministic across runs and thread counts") {
    const Graph g(4, {{0, 1}, {1, 2}, {2, 3}, {0, 3}});
    const Task task = toy_task(qaoa_layer_pool(g), 4, maxcut_hamiltonian(g), 3, g);
    TrainConfig cfg = quick_config();
    cfg.epochs = 15;
    const TrainResult a = train(cfg, task);
    const TrainResult b = train(cfg, task);
    cfg.threads = 3;
    const TrainResult c = train(cfg, task);
    for (const TrainResult* other : {&b, &c}) {
        CHECK(other->structure == a.structure);
        CHECK(other->final_loss == a.final_loss);
        REQUIRE(other->history.size() == a.history.size());
        for (std::size_t i = 0; i < a.history.size(); ++i) {
            CHECK(other->history[i].loss_mean == a.history[i].loss_mean);
            CHECK(other->history[i].argmax_prob == a.history[i].argmax_prob);
        }
        CHECK(other->theta.values() == a.theta.values());
    }
}

TEST_CASE("theta entries of never-sampled ops keep their initial values") {
    const Task task = toy_task(gate_pool({{GateKind::Rx, {0}}, {GateKind::Ry, {0}}, {GateKind::Rz, {0}}}), 1, z0(), 2);
    TrainConfig cfg = quick_config();
    cfg.epochs = 10;
    cfg.p = 2;
    Rng rng(92);
    WarmStart warm{Eigen::MatrixXd::Zero(2, 3), ParamPool(2, 3, 1)};
    for (Eigen::Index i = 0; i < warm.theta.size(); ++i) warm.theta.values()(i) = rng.normal();
    warm.alpha.col(2).setConstant(-30.0); // Rz is never drawn
    const TrainResult r = train(cfg, task, warm);
    for (int i = 0; i < 2; ++i) {
        CHECK(r.trained_theta(i, 2, 0) == warm.theta(i, 2, 0));
        CHECK(r.trained_theta(i, 0, 0) != warm.theta(i, 0, 0));
    }
}

TEST_CASE("merge penalty separates equal consecutive ops") {
    // Rx and Ry see the same loss landscape, so only the penalty tells them apart
    const Task task = toy_task(gate_pool({{GateKind::Rx, {0}}, {GateKind::Ry, {0}}}), 1, z0(), 4);
    TrainConfig cfg = quick_config();
    cfg.theta_std = 1.0;
    cfg.lambda1 = 5.0;
    cfg.epochs = 150;
    cfg.finetune_steps = 0;
    for (std::uint64_t seed : {1, 2, 3}) {
        cfg.seed = seed;
        const TrainResult r = train(cfg, task);
        for (std::size_t i = 1; i < r.structure.size(); ++i) CHECK(r.structure[i] != r.structure[i - 1]);
    }
}

TEST_CASE("early stopping shortens the history") {
    const Task task = toy_task(gate_pool({{GateKind::X, {0}}, {GateKind::H, {0}}}), 1, z0(), 1);
    TrainConfig cfg = quick_config();
    cfg.epochs = 500;
    cfg.lr_alpha = 0.5;
    cfg.early_stop.prob = 0.99;
    const TrainResult r = train(cfg, task);
    CHECK(r.history.size() < 500);
    CHECK(r.history.back().min_row_max > 0.99);
    CHECK(r.structure == StructureSample{0});
}

TEST_CASE("multi_start") {
    const Graph g(4, {{0, 1}, {1, 2}, {2, 3}, {0, 3}});
    const Task task = toy_task(qaoa_layer_pool(g), 4, maxcut_hamiltonian(g), 3, g);
    TrainConfig cfg = quick_config();
    cfg.epochs = 10;
    const TrainResult single = train(cfg, task);
    const TrainResult one = multi_start(cfg, task);
    CHECK(one.structure == single.structure);
    CHECK(one.final_loss == single.final_loss);
    CHECK(one.starts.size() == 1);

    cfg.starts = 3;
    const TrainResult three = multi_start(cfg, task);
    const TrainResult again = multi_start(cfg, task);
    REQUIRE(three.starts.size() == 3);
    CHECK(three.structure == again.structure);
    double best = three.starts.front().final_loss;
    for (const auto& s : three.starts) best = std::min(best, s.final_loss);
    CHECK(three.final_loss == best);

    cfg.starts = 0;
    CHECK_THROWS(multi_start(cfg, task));
}

TEST_CASE("bell search reaches the table minimum") {
    const Task task = task_bell();
    TrainConfig cfg;
    cfg.p = 5;
    cfg.batch = 128;
    cfg.epochs = 300;
    cfg.lr_alpha = 0.15;
    cfg.starts = 3;
    cfg.finetune_steps = 0;
    cfg.seed = 3;
    const TrainResult r = multi_start(cfg, task);
    CHECK(r.final_loss == doctest::Approx(-8.0).epsilon(1e-12));
}

TEST_CASE("layerwise growth") {
    Rng rng(93);
    Eigen::MatrixXd alpha(3, 4);
    for (Eigen::Index i = 0; i < alpha.size(); ++i) alpha.data()[i] = rng.normal();
    ParamPool theta(3, 4, 1);
    for (Eigen::Index i = 0; i < theta.size(); ++i) theta.values()(i) = rng.normal();

    const WarmStart all = grow_warm_start(alpha, theta, {0, 1, 2, 3}, 5, 0.0, ParamPool(5, 4, 1));
    CHECK(all.alpha.topRows(3) == alpha);
    CHECK(all.alpha.bottomRows(2).cwiseAbs().maxCoeff() == 0.0);
    CHECK(all.theta(2, 3, 0) == theta(2, 3, 0));

    const WarmStart pruned = grow_warm_start(alpha, theta, {1, 3}, 4, 0.0, ParamPool(4, 2, 1));
    CHECK(pruned.alpha(0, 1) == alpha(0, 3));
    CHECK(pruned.theta(1, 0, 0) == theta(1, 1, 0));

    // X reaches <Z> = -1 for free, H never helps and gets pruned
    const Task task = toy_task(gate_pool({{GateKind::Ry, {0}}, {GateKind::H, {0}}, {GateKind::X, {0}}}), 1, z0(), 1);
    TrainConfig cfg = quick_config();
    cfg.epochs = 200;
    cfg.lr_alpha = 0.3;
    LayerwiseOptions opts;
    opts.p0 = 1;
    opts.delta = 1;
    opts.stages = 1;
    opts.prune_floor = 0.01;
    const LayerwiseResult lw = layerwise_train(cfg, task, opts);
    CHECK(lw.stages.size() == 2);
    CHECK(std::find(lw.kept_ops.begin(), lw.kept_ops.end(), 1) == lw.kept_ops.end());
    CHECK(lw.pool.size() == static_cast<int>(lw.kept_ops.size()));
    CHECK(lw.result.structure.size() == 2);

    opts.delta = 0;
    CHECK_THROWS(layerwise_train(cfg, task, opts));
}
