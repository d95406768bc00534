#include "dqas/probmodel.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace dqas {

Eigen::MatrixXd probs(const StructureParams& alpha) {
    if (alpha.hasNaN()) {
        throw std::invalid_argument("probs: NaN in structure parameters");
    }
    Eigen::MatrixXd out = alpha.cwiseMax(-kAlphaClamp).cwiseMin(kAlphaClamp);
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
        out.row(i).array() = (out.row(i).array() - out.row(i).maxCoeff()).exp();
        out.row(i) /= out.row(i).sum();
    }
    return out;
}

StructureSample sample(const StructureParams& alpha, Rng& rng) {
    const Eigen::MatrixXd p = probs(alpha);
    StructureSample k(std::vector<int>(static_cast<std::size_t>(p.rows()), 0));
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
        const double u = rng.uniform();
        double acc = 0.0;
        Eigen::Index j = 0;
        for (; j + 1 < p.cols(); ++j) {
            acc += p(i, j);
            if (u < acc) {
                break;
            }
        }
        k[static_cast<std::size_t>(i)] = static_cast<int>(j);
    }
    return k;
}

Eigen::MatrixXd grad_log_prob(const StructureParams& alpha, const StructureSample& k) {
    if (static_cast<Eigen::Index>(k.size()) != alpha.rows()) {
        throw std::invalid_argument("grad_log_prob: structure length does not match alpha rows");
    }
    Eigen::MatrixXd g = -probs(alpha);
    for (Eigen::Index i = 0; i < g.rows(); ++i) {
        g(i, k[static_cast<std::size_t>(i)]) += 1.0;
    }
    return g;
}

double log_prob(const StructureParams& alpha, const StructureSample& k) {
    const Eigen::MatrixXd p = probs(alpha);
    double lp = 0.0;
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
        lp += std::log(p(i, k[static_cast<std::size_t>(i)]));
    }
    return lp;
}

StructureSample most_probable(const StructureParams& alpha) {
    const Eigen::MatrixXd p = probs(alpha);
    StructureSample k(std::vector<int>(static_cast<std::size_t>(p.rows()), 0));
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
        Eigen::Index best = 0;
        p.row(i).maxCoeff(&best); // first maximum wins
        k[static_cast<std::size_t>(i)] = static_cast<int>(best);
    }
    return k;
}

std::vector<std::vector<int>> top_k(const StructureParams& alpha, int k) {
    if (k < 1) {
        throw std::invalid_argument("top_k: k must be >= 1");
    }
    const Eigen::MatrixXd p = probs(alpha);
    const int take = std::min<int>(k, static_cast<int>(p.cols()));
    std::vector<std::vector<int>> out;
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
        std::vector<int> order(static_cast<std::size_t>(p.cols()));
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return p(i, a) > p(i, b); });
        order.resize(static_cast<std::size_t>(take));
        out.push_back(std::move(order));
    }
    return out;
}

} // namespace dqas
