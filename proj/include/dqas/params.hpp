#pragma once

#include <stdexcept>

#include <Eigen/Dense>

namespace dqas {

/// Reusable circuit parameters indexed by (placeholder, pool op, slot),
/// shape p x c x l, stored flat in row-major order.
class ParamPool {
  public:
    ParamPool() = default;
    ParamPool(int layers, int ops, int slots)
        : layers_(layers), ops_(ops), slots_(slots),
          values_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(layers) * ops * slots)) {
        if (layers < 0 || ops < 0 || slots < 0) {
            throw std::invalid_argument("ParamPool: negative extent");
        }
    }

    int layers() const { return layers_; }
    int ops() const { return ops_; }
    int slots() const { return slots_; }
    Eigen::Index size() const { return values_.size(); }

    Eigen::Index index(int layer, int op, int slot) const {
        if (layer < 0 || layer >= layers_ || op < 0 || op >= ops_ || slot < 0 || slot >= slots_) {
            throw std::out_of_range("ParamPool: index out of range");
        }
        return (static_cast<Eigen::Index>(layer) * ops_ + op) * slots_ + slot;
    }
    double operator()(int layer, int op, int slot) const { return values_(index(layer, op, slot)); }
    double& operator()(int layer, int op, int slot) { return values_(index(layer, op, slot)); }

    const Eigen::VectorXd& values() const { return values_; }
    Eigen::VectorXd& values() { return values_; }

    bool same_shape(const ParamPool& other) const {
        return layers_ == other.layers_ && ops_ == other.ops_ && slots_ == other.slots_;
    }

  private:
    int layers_ = 0;
    int ops_ = 0;
    int slots_ = 0;
    Eigen::VectorXd values_;
};

} // namespace dqas
