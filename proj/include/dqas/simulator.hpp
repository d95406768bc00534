#pragma once
/**
 * @file
 * Dense statevector and density-matrix simulation of small circuits.
 *
 * Bit order: qubit 0 is the most significant bit of a basis index, so on
 * n qubits qubit q flips index bit (n - 1 - q). Every golden value in the
 * test suite depends on this convention.
 *
 * Rotations follow R_O(theta) = exp(-i theta O / 2). Two-qubit rotations
 * R_OO(theta) = exp(-i theta O(x)O / 2); RZZ equals CNOT . RZ(theta) on the
 * target . CNOT.
 */

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dqas/common.hpp"

namespace dqas {

enum class GateKind {
    I,
    X,
    Y,
    Z,
    H,
    S,
    T,
    ZPow,
    Rx,
    Ry,
    Rz,
    CNOT,
    CPhase,
    Rzz,
    Rxx,
    Ryy,
};

int gate_arity(GateKind kind);
bool gate_has_param(GateKind kind);
/// True when the gate is exp(-i theta G / 2) with G^2 = I (parameter-shift applies).
bool gate_is_pauli_rotation(GateKind kind);
std::string_view gate_name(GateKind kind);
GateKind parse_gate_kind(std::string_view name);

struct Gate {
    GateKind kind = GateKind::I;
    std::array<int, 2> qubits{0, 0};
    double param = 0.0;

    int arity() const { return gate_arity(kind); }
    std::span<const int> targets() const { return {qubits.data(), static_cast<std::size_t>(arity())}; }
    bool acts_on(int q) const;

    static Gate one(GateKind kind, int q, double param = 0.0) { return {kind, {q, 0}, param}; }
    static Gate two(GateKind kind, int q0, int q1, double param = 0.0) { return {kind, {q0, q1}, param}; }

    friend bool operator==(const Gate&, const Gate&) = default;
};

/// 2x2 matrix of a single-qubit gate.
Matrix2c gate_matrix_1q(const Gate& gate);
/// 4x4 matrix of a two-qubit gate in the basis |q0 q1>, qubits[0] most significant.
Matrix4c gate_matrix_2q(const Gate& gate);
/// Full 2^n x 2^n matrix (dense Kronecker embedding). Intended for tests and small n.
CMatrix embed_gate(const Gate& gate, int num_qubits);

/// Apply a 2x2 matrix on qubit q of any Eigen vector expression of length 2^n.
template <typename Vec>
void apply_1q_kernel(Vec&& v, int num_qubits, int q, const Matrix2c& u) {
    const Eigen::Index stride = Eigen::Index{1} << (num_qubits - 1 - q);
    const Eigen::Index dim = Eigen::Index{1} << num_qubits;
    for (Eigen::Index base = 0; base < dim; base += 2 * stride) {
        for (Eigen::Index i = base; i < base + stride; ++i) {
            const Complex a = v(i);
            const Complex b = v(i + stride);
            v(i) = u(0, 0) * a + u(0, 1) * b;
            v(i + stride) = u(1, 0) * a + u(1, 1) * b;
        }
    }
}

/// Apply a 4x4 matrix on qubits (q0, q1), q0 acting as the high bit of the 4x4 basis.
template <typename Vec>
void apply_2q_kernel(Vec&& v, int num_qubits, int q0, int q1, const Matrix4c& u) {
    const Eigen::Index s0 = Eigen::Index{1} << (num_qubits - 1 - q0);
    const Eigen::Index s1 = Eigen::Index{1} << (num_qubits - 1 - q1);
    const Eigen::Index dim = Eigen::Index{1} << num_qubits;
    for (Eigen::Index i = 0; i < dim; ++i) {
        if ((i & s0) || (i & s1)) {
            continue;
        }
        const std::array<Eigen::Index, 4> idx{i, i | s1, i | s0, i | s0 | s1};
        std::array<Complex, 4> in{};
        for (int r = 0; r < 4; ++r) {
            in[r] = v(idx[r]);
        }
        for (int r = 0; r < 4; ++r) {
            v(idx[r]) = u(r, 0) * in[0] + u(r, 1) * in[1] + u(r, 2) * in[2] + u(r, 3) * in[3];
        }
    }
}

class StateVector {
  public:
    /// |0...0> on num_qubits qubits.
    explicit StateVector(int num_qubits);
    StateVector(int num_qubits, CVector amplitudes);

    static StateVector basis(int num_qubits, std::uint64_t index);

    int num_qubits() const { return num_qubits_; }
    Eigen::Index dim() const { return amplitudes_.size(); }
    const CVector& amplitudes() const { return amplitudes_; }
    Complex operator[](Eigen::Index i) const { return amplitudes_(i); }
    double norm() const { return amplitudes_.norm(); }

    /// In-place gate application.
    StateVector& apply(const Gate& gate);
    StateVector& apply(std::span<const Gate> gates);

  private:
    int num_qubits_;
    CVector amplitudes_;
};

class DensityMatrix {
  public:
    /// |0...0><0...0|.
    explicit DensityMatrix(int num_qubits);
    DensityMatrix(int num_qubits, CMatrix entries);
    explicit DensityMatrix(const StateVector& pure);

    static DensityMatrix maximally_mixed(int num_qubits);

    int num_qubits() const { return num_qubits_; }
    Eigen::Index dim() const { return entries_.rows(); }
    const CMatrix& entries() const { return entries_; }
    Complex trace() const { return entries_.trace(); }

    /// rho -> U rho U^dagger.
    DensityMatrix& apply(const Gate& gate);
    /// rho -> (1 - p) rho + p X_q rho X_q.
    DensityMatrix& bitflip(int qubit, double p);

  private:
    int num_qubits_;
    CMatrix entries_;
};

StateVector apply_gate(StateVector state, const Gate& gate);
/// In place on a raw amplitude vector; no normalization is assumed.
void apply_gate(CVector& amplitudes, int num_qubits, const Gate& gate);
/// U^dagger as a gate of the same family (S and T map to ZPow).
Gate gate_inverse(const Gate& gate);
DensityMatrix apply_bitflip(DensityMatrix rho, int qubit, double p);

struct NoiseModel {
    double p_gate = 0.02;
    double p_idle = 0.20;
};

/// Gates executed simultaneously; qubit sets must be disjoint.
struct Moment {
    std::vector<Gate> gates;

    /// Qubits in [0, n) touched by no gate, ascending.
    std::vector<int> idle_qubits(int num_qubits) const;
};

/// Throws std::invalid_argument if gates overlap or leave [0, n).
void validate_moment(const Moment& moment, int num_qubits);

/// Per moment: apply the gates, then one bit-flip channel per qubit with
/// p_gate on active qubits and p_idle on idle ones, including after the
/// final moment.
DensityMatrix run_noisy_moments(std::span<const Moment> moments, const NoiseModel& noise,
                                DensityMatrix init);

enum class Pauli : char { I = 'I', X = 'X', Y = 'Y', Z = 'Z' };

struct PauliTerm {
    double coeff = 1.0;
    std::vector<std::pair<int, Pauli>> ops;

    bool diagonal() const;
};

struct PauliSum {
    std::vector<PauliTerm> terms;

    PauliSum& add(double coeff, std::vector<std::pair<int, Pauli>> ops) {
        terms.push_back({coeff, std::move(ops)});
        return *this;
    }
    bool diagonal() const;
    /// Eigenvalue of a diagonal sum on each basis state.
    Eigen::VectorXd diagonal_values(int num_qubits) const;
};

double expectation(const StateVector& state, const PauliSum& observable);
double expectation(const DensityMatrix& rho, const PauliSum& observable);

/// observable |v> for an arbitrary (unnormalized) amplitude vector.
CVector apply_pauli_sum(const PauliSum& observable, const CVector& v, int num_qubits);
/// Generator G of a Pauli rotation exp(-i theta G / 2), as a unit-coefficient term.
PauliTerm rotation_generator(const Gate& gate);

/// <phi| rho |phi>.
double fidelity_pure(const DensityMatrix& rho, const StateVector& phi);

/// Pseudo-random input state: per block, RZ.RY.RZ with uniform angles on
/// every qubit, then a CNOT ring (q -> q+1 mod n). blocks = 0 gives |0^n>.
StateVector random_2design_state(int num_qubits, int blocks, Rng& rng);

/// Computational-basis probabilities; entries below 1e-14 are dropped.
std::vector<std::pair<std::uint64_t, double>> basis_distribution(const StateVector& state);
std::vector<std::pair<std::uint64_t, double>> basis_distribution(const DensityMatrix& rho);

} // namespace dqas
