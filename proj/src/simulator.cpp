#include "dqas/simulator.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <optional>
#include <stdexcept>

namespace dqas {
namespace {

constexpr Complex kI{0.0, 1.0};

struct GateInfo {
    GateKind kind;
    std::string_view name;
    int arity;
    bool has_param;
    bool pauli_rotation;
};

constexpr std::array<GateInfo, 16> kGateTable{{
    {GateKind::I, "I", 1, false, false},
    {GateKind::X, "X", 1, false, false},
    {GateKind::Y, "Y", 1, false, false},
    {GateKind::Z, "Z", 1, false, false},
    {GateKind::H, "H", 1, false, false},
    {GateKind::S, "S", 1, false, false},
    {GateKind::T, "T", 1, false, false},
    {GateKind::ZPow, "ZPOW", 1, true, false},
    {GateKind::Rx, "RX", 1, true, true},
    {GateKind::Ry, "RY", 1, true, true},
    {GateKind::Rz, "RZ", 1, true, true},
    {GateKind::CNOT, "CNOT", 2, false, false},
    {GateKind::CPhase, "CPHASE", 2, true, false},
    {GateKind::Rzz, "RZZ", 2, true, true},
    {GateKind::Rxx, "RXX", 2, true, true},
    {GateKind::Ryy, "RYY", 2, true, true},
}};

const GateInfo& info(GateKind kind) { return kGateTable[static_cast<std::size_t>(kind)]; }

void check_qubit(int q, int n) {
    if (q < 0 || q >= n) {
        throw std::out_of_range("qubit index " + std::to_string(q) + " out of range for " +
                                std::to_string(n) + " qubits");
    }
}

void check_gate(const Gate& g, int n) {
    for (int q : g.targets()) {
        check_qubit(q, n);
    }
    if (g.arity() == 2 && g.qubits[0] == g.qubits[1]) {
        throw std::invalid_argument(std::string(gate_name(g.kind)) + " requires distinct qubits");
    }
}

// Diagonal of a diagonal single-qubit gate, or nullopt.
std::optional<std::array<Complex, 2>> diag_1q(const Gate& g) {
    switch (g.kind) {
    case GateKind::I:
        return std::array<Complex, 2>{1.0, 1.0};
    case GateKind::Z:
        return std::array<Complex, 2>{1.0, -1.0};
    case GateKind::S:
        return std::array<Complex, 2>{1.0, kI};
    case GateKind::T:
        return std::array<Complex, 2>{1.0, std::polar(1.0, kPi / 4)};
    case GateKind::ZPow:
        return std::array<Complex, 2>{1.0, std::polar(1.0, kPi * g.param)};
    case GateKind::Rz:
        return std::array<Complex, 2>{std::polar(1.0, -g.param / 2), std::polar(1.0, g.param / 2)};
    default:
        return std::nullopt;
    }
}

// Diagonal of a diagonal two-qubit gate in |q0 q1> order, or nullopt.
std::optional<std::array<Complex, 4>> diag_2q(const Gate& g) {
    switch (g.kind) {
    case GateKind::CPhase:
        return std::array<Complex, 4>{1.0, 1.0, 1.0, std::polar(1.0, g.param)};
    case GateKind::Rzz: {
        const Complex a = std::polar(1.0, -g.param / 2);
        const Complex b = std::polar(1.0, g.param / 2);
        return std::array<Complex, 4>{a, b, b, a};
    }
    default:
        return std::nullopt;
    }
}

template <typename Vec>
void apply_diag_1q(Vec&& v, int n, int q, const std::array<Complex, 2>& d) {
    const Eigen::Index mask = Eigen::Index{1} << (n - 1 - q);
    const Eigen::Index dim = Eigen::Index{1} << n;
    for (Eigen::Index i = 0; i < dim; ++i) {
        v(i) *= d[(i & mask) ? 1 : 0];
    }
}

template <typename Vec>
void apply_diag_2q(Vec&& v, int n, int q0, int q1, const std::array<Complex, 4>& d) {
    const Eigen::Index m0 = Eigen::Index{1} << (n - 1 - q0);
    const Eigen::Index m1 = Eigen::Index{1} << (n - 1 - q1);
    const Eigen::Index dim = Eigen::Index{1} << n;
    for (Eigen::Index i = 0; i < dim; ++i) {
        v(i) *= d[((i & m0) ? 2 : 0) + ((i & m1) ? 1 : 0)];
    }
}

template <typename Vec>
void apply_x(Vec&& v, int n, int q) {
    const Eigen::Index stride = Eigen::Index{1} << (n - 1 - q);
    const Eigen::Index dim = Eigen::Index{1} << n;
    for (Eigen::Index base = 0; base < dim; base += 2 * stride) {
        for (Eigen::Index i = base; i < base + stride; ++i) {
            std::swap(v(i), v(i + stride));
        }
    }
}

template <typename Vec>
void apply_cnot(Vec&& v, int n, int control, int target) {
    const Eigen::Index mc = Eigen::Index{1} << (n - 1 - control);
    const Eigen::Index mt = Eigen::Index{1} << (n - 1 - target);
    const Eigen::Index dim = Eigen::Index{1} << n;
    for (Eigen::Index i = 0; i < dim; ++i) {
        if ((i & mc) && !(i & mt)) {
            std::swap(v(i), v(i | mt));
        }
    }
}

// Applies the gate (or its complex conjugate) to a vector expression.
template <typename Vec>
void apply_to(Vec&& v, int n, const Gate& g, bool conjugate) {
    if (g.kind == GateKind::X) {
        apply_x(v, n, g.qubits[0]);
        return;
    }
    if (g.kind == GateKind::CNOT) {
        apply_cnot(v, n, g.qubits[0], g.qubits[1]);
        return;
    }
    if (g.arity() == 1) {
        if (auto d = diag_1q(g)) {
            if (conjugate) {
                for (auto& x : *d) x = std::conj(x);
            }
            apply_diag_1q(v, n, g.qubits[0], *d);
            return;
        }
        const Matrix2c u = conjugate ? Matrix2c(gate_matrix_1q(g).conjugate()) : gate_matrix_1q(g);
        apply_1q_kernel(v, n, g.qubits[0], u);
        return;
    }
    if (auto d = diag_2q(g)) {
        if (conjugate) {
            for (auto& x : *d) x = std::conj(x);
        }
        apply_diag_2q(v, n, g.qubits[0], g.qubits[1], *d);
        return;
    }
    const Matrix4c u = conjugate ? Matrix4c(gate_matrix_2q(g).conjugate()) : gate_matrix_2q(g);
    apply_2q_kernel(v, n, g.qubits[0], g.qubits[1], u);
}

std::uint64_t qubit_mask(int q, int n) { return std::uint64_t{1} << (n - 1 - q); }

// P = phase * X^x Z^z with phase = i^{#Y}; P|k> = phase (-1)^{|k & z|} |k ^ x>.
struct PauliMasks {
    std::uint64_t x = 0;
    std::uint64_t z = 0;
    Complex phase{1.0, 0.0};
};

PauliMasks masks_of(const PauliTerm& term, int n) {
    PauliMasks m;
    for (const auto& [q, p] : term.ops) {
        check_qubit(q, n);
        const std::uint64_t bit = qubit_mask(q, n);
        if ((m.x | m.z) & bit) {
            throw std::invalid_argument("Pauli term repeats qubit " + std::to_string(q));
        }
        switch (p) {
        case Pauli::I:
            break;
        case Pauli::X:
            m.x |= bit;
            break;
        case Pauli::Z:
            m.z |= bit;
            break;
        case Pauli::Y:
            m.x |= bit;
            m.z |= bit;
            m.phase *= kI;
            break;
        }
    }
    return m;
}

double parity_sign(std::uint64_t bits) { return (std::popcount(bits) & 1) ? -1.0 : 1.0; }

} // namespace

int gate_arity(GateKind kind) { return info(kind).arity; }
bool gate_has_param(GateKind kind) { return info(kind).has_param; }
bool gate_is_pauli_rotation(GateKind kind) { return info(kind).pauli_rotation; }
std::string_view gate_name(GateKind kind) { return info(kind).name; }

GateKind parse_gate_kind(std::string_view name) {
    std::string upper(name);
    std::transform(upper.begin(), upper.end(), upper.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    for (const auto& entry : kGateTable) {
        if (entry.name == upper) {
            return entry.kind;
        }
    }
    if (upper == "CX") {
        return GateKind::CNOT;
    }
    throw std::invalid_argument("unknown gate '" + std::string(name) + "'");
}

bool Gate::acts_on(int q) const {
    const auto t = targets();
    return std::find(t.begin(), t.end(), q) != t.end();
}

Matrix2c gate_matrix_1q(const Gate& g) {
    Matrix2c m;
    const double c = std::cos(g.param / 2);
    const double s = std::sin(g.param / 2);
    switch (g.kind) {
    case GateKind::I:
        m.setIdentity();
        break;
    case GateKind::X:
        m << 0, 1, 1, 0;
        break;
    case GateKind::Y:
        m << 0, -kI, kI, 0;
        break;
    case GateKind::Z:
        m << 1, 0, 0, -1;
        break;
    case GateKind::H:
        m << 1, 1, 1, -1;
        m /= std::sqrt(2.0);
        break;
    case GateKind::S:
        m << 1, 0, 0, kI;
        break;
    case GateKind::T:
        m << 1, 0, 0, std::polar(1.0, kPi / 4);
        break;
    case GateKind::ZPow:
        m << 1, 0, 0, std::polar(1.0, kPi * g.param);
        break;
    case GateKind::Rx:
        m << c, -kI * s, -kI * s, c;
        break;
    case GateKind::Ry:
        m << c, -s, s, c;
        break;
    case GateKind::Rz:
        m << std::polar(1.0, -g.param / 2), 0, 0, std::polar(1.0, g.param / 2);
        break;
    default:
        throw std::invalid_argument(std::string(gate_name(g.kind)) + " is not a single-qubit gate");
    }
    return m;
}

Matrix4c gate_matrix_2q(const Gate& g) {
    Matrix4c m = Matrix4c::Zero();
    const double c = std::cos(g.param / 2);
    const double s = std::sin(g.param / 2);
    switch (g.kind) {
    case GateKind::CNOT:
        m(0, 0) = m(1, 1) = 1;
        m(2, 3) = m(3, 2) = 1;
        break;
    case GateKind::CPhase:
        m.diagonal() << 1, 1, 1, std::polar(1.0, g.param);
        break;
    case GateKind::Rzz:
        m.diagonal() << std::polar(1.0, -g.param / 2), std::polar(1.0, g.param / 2),
            std::polar(1.0, g.param / 2), std::polar(1.0, -g.param / 2);
        break;
    case GateKind::Rxx:
        // cos I - i sin X(x)X
        m.diagonal().setConstant(c);
        m(0, 3) = m(1, 2) = m(2, 1) = m(3, 0) = -kI * s;
        break;
    case GateKind::Ryy:
        // Y(x)Y = [[0,0,0,-1],[0,0,1,0],[0,1,0,0],[-1,0,0,0]]
        m.diagonal().setConstant(c);
        m(0, 3) = m(3, 0) = kI * s;
        m(1, 2) = m(2, 1) = -kI * s;
        break;
    default:
        throw std::invalid_argument(std::string(gate_name(g.kind)) + " is not a two-qubit gate");
    }
    return m;
}

CMatrix embed_gate(const Gate& gate, int num_qubits) {
    check_gate(gate, num_qubits);
    const Eigen::Index dim = Eigen::Index{1} << num_qubits;
    CMatrix full = CMatrix::Zero(dim, dim);
    if (gate.arity() == 1) {
        const Matrix2c u = gate_matrix_1q(gate);
        const auto mask = static_cast<Eigen::Index>(qubit_mask(gate.qubits[0], num_qubits));
        for (Eigen::Index col = 0; col < dim; ++col) {
            const int b = (col & mask) ? 1 : 0;
            for (int r = 0; r < 2; ++r) {
                const Eigen::Index row = r ? (col | mask) : (col & ~mask);
                full(row, col) += u(r, b);
            }
        }
        return full;
    }
    const Matrix4c u = gate_matrix_2q(gate);
    const auto m0 = static_cast<Eigen::Index>(qubit_mask(gate.qubits[0], num_qubits));
    const auto m1 = static_cast<Eigen::Index>(qubit_mask(gate.qubits[1], num_qubits));
    for (Eigen::Index col = 0; col < dim; ++col) {
        const int b = ((col & m0) ? 2 : 0) + ((col & m1) ? 1 : 0);
        const Eigen::Index rest = col & ~m0 & ~m1;
        for (int r = 0; r < 4; ++r) {
            const Eigen::Index row = rest | ((r & 2) ? m0 : 0) | ((r & 1) ? m1 : 0);
            full(row, col) += u(r, b);
        }
    }
    return full;
}

StateVector::StateVector(int num_qubits)
    : num_qubits_(num_qubits), amplitudes_(CVector::Zero(Eigen::Index{1} << num_qubits)) {
    if (num_qubits < 1 || num_qubits > 24) {
        throw std::invalid_argument("StateVector: qubit count must be in [1, 24]");
    }
    amplitudes_(0) = 1.0;
}

StateVector::StateVector(int num_qubits, CVector amplitudes)
    : num_qubits_(num_qubits), amplitudes_(std::move(amplitudes)) {
    if (amplitudes_.size() != (Eigen::Index{1} << num_qubits)) {
        throw std::invalid_argument("StateVector: amplitude count does not match 2^n");
    }
    if (std::abs(amplitudes_.norm() - 1.0) > 1e-10) {
        throw std::invalid_argument("StateVector: amplitudes are not normalized");
    }
}

StateVector StateVector::basis(int num_qubits, std::uint64_t index) {
    StateVector s(num_qubits);
    if (index >= static_cast<std::uint64_t>(s.dim())) {
        throw std::out_of_range("StateVector::basis: index out of range");
    }
    s.amplitudes_(0) = 0.0;
    s.amplitudes_(static_cast<Eigen::Index>(index)) = 1.0;
    return s;
}

StateVector& StateVector::apply(const Gate& gate) {
    check_gate(gate, num_qubits_);
    apply_to(amplitudes_, num_qubits_, gate, false);
    return *this;
}

StateVector& StateVector::apply(std::span<const Gate> gates) {
    for (const auto& g : gates) {
        apply(g);
    }
    return *this;
}

DensityMatrix::DensityMatrix(int num_qubits)
    : num_qubits_(num_qubits),
      entries_(CMatrix::Zero(Eigen::Index{1} << num_qubits, Eigen::Index{1} << num_qubits)) {
    if (num_qubits < 1 || num_qubits > 12) {
        throw std::invalid_argument("DensityMatrix: qubit count must be in [1, 12]");
    }
    entries_(0, 0) = 1.0;
}

DensityMatrix::DensityMatrix(int num_qubits, CMatrix entries)
    : num_qubits_(num_qubits), entries_(std::move(entries)) {
    const Eigen::Index dim = Eigen::Index{1} << num_qubits;
    if (entries_.rows() != dim || entries_.cols() != dim) {
        throw std::invalid_argument("DensityMatrix: shape does not match 2^n");
    }
    if (std::abs(entries_.trace() - Complex{1.0}) > 1e-10) {
        throw std::invalid_argument("DensityMatrix: trace is not 1");
    }
    if ((entries_ - entries_.adjoint()).cwiseAbs().maxCoeff() > 1e-10) {
        throw std::invalid_argument("DensityMatrix: not Hermitian");
    }
}

DensityMatrix::DensityMatrix(const StateVector& pure)
    : num_qubits_(pure.num_qubits()),
      entries_(pure.amplitudes() * pure.amplitudes().adjoint()) {}

DensityMatrix DensityMatrix::maximally_mixed(int num_qubits) {
    DensityMatrix rho(num_qubits);
    rho.entries_.setIdentity();
    rho.entries_ /= static_cast<double>(rho.dim());
    return rho;
}

DensityMatrix& DensityMatrix::apply(const Gate& gate) {
    check_gate(gate, num_qubits_);
    const Eigen::Index dim = entries_.rows();
    for (Eigen::Index c = 0; c < dim; ++c) {
        apply_to(entries_.col(c), num_qubits_, gate, false);
    }
    for (Eigen::Index r = 0; r < dim; ++r) {
        apply_to(entries_.row(r), num_qubits_, gate, true);
    }
    return *this;
}

DensityMatrix& DensityMatrix::bitflip(int qubit, double p) {
    check_qubit(qubit, num_qubits_);
    if (!(p >= 0.0 && p <= 1.0)) {
        throw std::invalid_argument("bit-flip probability must lie in [0, 1]");
    }
    if (p == 0.0) {
        return *this;
    }
    const auto m = static_cast<Eigen::Index>(qubit_mask(qubit, num_qubits_));
    const Eigen::Index dim = entries_.rows();
    // Mix each entry with its partner under X on both sides; visit each pair once.
    for (Eigen::Index c = 0; c < dim; ++c) {
        for (Eigen::Index r = 0; r < dim; ++r) {
            if (r & m) {
                continue;
            }
            const Eigen::Index r2 = r | m;
            const Eigen::Index c2 = c ^ m;
            const Complex a = entries_(r, c);
            const Complex b = entries_(r2, c2);
            entries_(r, c) = (1.0 - p) * a + p * b;
            entries_(r2, c2) = (1.0 - p) * b + p * a;
        }
    }
    return *this;
}

StateVector apply_gate(StateVector state, const Gate& gate) {
    state.apply(gate);
    return state;
}

void apply_gate(CVector& amplitudes, int num_qubits, const Gate& gate) {
    check_gate(gate, num_qubits);
    if (amplitudes.size() != (Eigen::Index{1} << num_qubits)) {
        throw std::invalid_argument("apply_gate: amplitude count does not match 2^n");
    }
    apply_to(amplitudes, num_qubits, gate, false);
}

Gate gate_inverse(const Gate& gate) {
    Gate inv = gate;
    switch (gate.kind) {
    case GateKind::S:
        inv.kind = GateKind::ZPow;
        inv.param = -0.5;
        break;
    case GateKind::T:
        inv.kind = GateKind::ZPow;
        inv.param = -0.25;
        break;
    default:
        if (gate_has_param(gate.kind)) {
            inv.param = -gate.param;
        }
        break;
    }
    return inv;
}

DensityMatrix apply_bitflip(DensityMatrix rho, int qubit, double p) {
    rho.bitflip(qubit, p);
    return rho;
}

std::vector<int> Moment::idle_qubits(int num_qubits) const {
    std::vector<int> idle;
    for (int q = 0; q < num_qubits; ++q) {
        const bool busy = std::any_of(gates.begin(), gates.end(), [q](const Gate& g) { return g.acts_on(q); });
        if (!busy) {
            idle.push_back(q);
        }
    }
    return idle;
}

void validate_moment(const Moment& moment, int num_qubits) {
    std::vector<bool> used(static_cast<std::size_t>(num_qubits), false);
    for (const auto& g : moment.gates) {
        check_gate(g, num_qubits);
        for (int q : g.targets()) {
            if (used[static_cast<std::size_t>(q)]) {
                throw std::invalid_argument("moment uses qubit " + std::to_string(q) + " twice");
            }
            used[static_cast<std::size_t>(q)] = true;
        }
    }
}

DensityMatrix run_noisy_moments(std::span<const Moment> moments, const NoiseModel& noise,
                                DensityMatrix init) {
    const int n = init.num_qubits();
    for (const auto& moment : moments) {
        validate_moment(moment, n);
        for (const auto& g : moment.gates) {
            init.apply(g);
        }
        for (int q = 0; q < n; ++q) {
            const bool busy = std::any_of(moment.gates.begin(), moment.gates.end(),
                                          [q](const Gate& g) { return g.acts_on(q); });
            init.bitflip(q, busy ? noise.p_gate : noise.p_idle);
        }
    }
    return init;
}

bool PauliTerm::diagonal() const {
    return std::all_of(ops.begin(), ops.end(),
                       [](const auto& op) { return op.second == Pauli::I || op.second == Pauli::Z; });
}

bool PauliSum::diagonal() const {
    return std::all_of(terms.begin(), terms.end(), [](const PauliTerm& t) { return t.diagonal(); });
}

Eigen::VectorXd PauliSum::diagonal_values(int num_qubits) const {
    if (!diagonal()) {
        throw std::invalid_argument("PauliSum::diagonal_values: observable has X/Y factors");
    }
    const Eigen::Index dim = Eigen::Index{1} << num_qubits;
    Eigen::VectorXd values = Eigen::VectorXd::Zero(dim);
    for (const auto& term : terms) {
        const PauliMasks m = masks_of(term, num_qubits);
        for (Eigen::Index i = 0; i < dim; ++i) {
            values(i) += term.coeff * parity_sign(static_cast<std::uint64_t>(i) & m.z);
        }
    }
    return values;
}

double expectation(const StateVector& state, const PauliSum& observable) {
    const int n = state.num_qubits();
    const CVector& a = state.amplitudes();
    Complex total{0.0, 0.0};
    for (const auto& term : observable.terms) {
        const PauliMasks m = masks_of(term, n);
        Complex acc{0.0, 0.0};
        for (Eigen::Index k = 0; k < a.size(); ++k) {
            const auto kk = static_cast<std::uint64_t>(k);
            const auto j = static_cast<Eigen::Index>(kk ^ m.x);
            acc += std::conj(a(j)) * a(k) * parity_sign(kk & m.z);
        }
        total += term.coeff * m.phase * acc;
    }
    return total.real();
}

CVector apply_pauli_sum(const PauliSum& observable, const CVector& v, int num_qubits) {
    if (v.size() != (Eigen::Index{1} << num_qubits)) {
        throw std::invalid_argument("apply_pauli_sum: amplitude count does not match 2^n");
    }
    CVector out = CVector::Zero(v.size());
    for (const auto& term : observable.terms) {
        const PauliMasks m = masks_of(term, num_qubits);
        const Complex scale = term.coeff * m.phase;
        for (Eigen::Index k = 0; k < v.size(); ++k) {
            const auto kk = static_cast<std::uint64_t>(k);
            out(static_cast<Eigen::Index>(kk ^ m.x)) += scale * parity_sign(kk & m.z) * v(k);
        }
    }
    return out;
}

PauliTerm rotation_generator(const Gate& gate) {
    const auto pauli = [&]() {
        switch (gate.kind) {
        case GateKind::Rx:
        case GateKind::Rxx:
            return Pauli::X;
        case GateKind::Ry:
        case GateKind::Ryy:
            return Pauli::Y;
        case GateKind::Rz:
        case GateKind::Rzz:
            return Pauli::Z;
        default:
            throw std::invalid_argument(std::string(gate_name(gate.kind)) + " is not a Pauli rotation");
        }
    }();
    PauliTerm term;
    for (int q : gate.targets()) {
        term.ops.emplace_back(q, pauli);
    }
    return term;
}

double expectation(const DensityMatrix& rho, const PauliSum& observable) {
    const int n = rho.num_qubits();
    const CMatrix& r = rho.entries();
    Complex total{0.0, 0.0};
    for (const auto& term : observable.terms) {
        const PauliMasks m = masks_of(term, n);
        // tr(P rho) = sum_k <k ^ x| P |k> rho(k, k ^ x)
        Complex acc{0.0, 0.0};
        for (Eigen::Index k = 0; k < r.rows(); ++k) {
            const auto kk = static_cast<std::uint64_t>(k);
            acc += parity_sign(kk & m.z) * r(k, static_cast<Eigen::Index>(kk ^ m.x));
        }
        total += term.coeff * m.phase * acc;
    }
    return total.real();
}

double fidelity_pure(const DensityMatrix& rho, const StateVector& phi) {
    if (rho.dim() != phi.dim()) {
        throw std::invalid_argument("fidelity_pure: dimension mismatch");
    }
    const Complex f = phi.amplitudes().dot(rho.entries() * phi.amplitudes());
    return f.real();
}

StateVector random_2design_state(int num_qubits, int blocks, Rng& rng) {
    if (blocks < 0) {
        throw std::invalid_argument("random_2design_state: negative block count");
    }
    StateVector state(num_qubits);
    for (int b = 0; b < blocks; ++b) {
        for (int q = 0; q < num_qubits; ++q) {
            const double a0 = rng.uniform(0.0, 2.0 * kPi);
            const double a1 = rng.uniform(0.0, 2.0 * kPi);
            const double a2 = rng.uniform(0.0, 2.0 * kPi);
            state.apply(Gate::one(GateKind::Rz, q, a0));
            state.apply(Gate::one(GateKind::Ry, q, a1));
            state.apply(Gate::one(GateKind::Rz, q, a2));
        }
        if (num_qubits > 1) {
            for (int q = 0; q < num_qubits; ++q) {
                const int t = (q + 1) % num_qubits;
                state.apply(Gate::two(GateKind::CNOT, q, t));
            }
        }
    }
    return state;
}

std::vector<std::pair<std::uint64_t, double>> basis_distribution(const StateVector& state) {
    std::vector<std::pair<std::uint64_t, double>> out;
    for (Eigen::Index i = 0; i < state.dim(); ++i) {
        const double p = std::norm(state[i]);
        if (p > 1e-14) {
            out.emplace_back(static_cast<std::uint64_t>(i), p);
        }
    }
    return out;
}

std::vector<std::pair<std::uint64_t, double>> basis_distribution(const DensityMatrix& rho) {
    std::vector<std::pair<std::uint64_t, double>> out;
    for (Eigen::Index i = 0; i < rho.dim(); ++i) {
        const double p = rho.entries()(i, i).real();
        if (p > 1e-14) {
            out.emplace_back(static_cast<std::uint64_t>(i), p);
        }
    }
    return out;
}

} // namespace dqas
