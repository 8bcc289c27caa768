#include "bois/simulator.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

#include "bois/rng.hpp"

namespace bois {

namespace {

using Complex = std::complex<double>;

void apply_ry(StateVector& s, int qubit, double angle) {
    const double c = std::cos(angle / 2), sn = std::sin(angle / 2);
    const std::size_t bit = std::size_t(1) << qubit;
    const std::size_t dim = s.amp.size();
    for (std::size_t i = 0; i < dim; ++i) {
        if (i & bit) continue;
        Complex a0 = s.amp[i], a1 = s.amp[i | bit];
        s.amp[i] = c * a0 - sn * a1;
        s.amp[i | bit] = sn * a0 + c * a1;
    }
}

void apply_cnot(StateVector& s, int control, int target) {
    const std::size_t cbit = std::size_t(1) << control;
    const std::size_t tbit = std::size_t(1) << target;
    const std::size_t dim = s.amp.size();
    for (std::size_t i = 0; i < dim; ++i) {
        if ((i & cbit) && !(i & tbit)) std::swap(s.amp[i], s.amp[i | tbit]);
    }
}

}  // namespace

double StateVector::norm() const {
    double n2 = 0.0;
    for (const auto& a : amp) n2 += std::norm(a);
    return std::sqrt(n2);
}

StateVector prepare_state(const AnsatzSpec& ansatz, std::span<const double> theta) {
    if (static_cast<int>(theta.size()) != ansatz.n_params()) {
        throw std::invalid_argument("prepare_state: got " + std::to_string(theta.size()) +
                                    " parameters, ansatz needs " +
                                    std::to_string(ansatz.n_params()));
    }
    for (double t : theta) {
        if (!std::isfinite(t)) throw std::invalid_argument("prepare_state: non-finite parameter");
    }

    StateVector s;
    s.n_qubits = ansatz.n_qubits;
    s.amp.assign(std::size_t(1) << ansatz.n_qubits, Complex(0, 0));
    s.amp[0] = 1.0;

    if (ansatz.kind == AnsatzSpec::Kind::H2Fixed) {
        apply_ry(s, 0, theta[0]);
        apply_ry(s, 1, theta[1]);
        apply_cnot(s, 0, 1);
        apply_ry(s, 0, theta[2]);
        apply_ry(s, 1, theta[3]);
        apply_cnot(s, 0, 1);
        apply_ry(s, 0, theta[4]);
        apply_ry(s, 1, theta[5]);
        return s;
    }

    // RealAmplitudes: Ry layer, then per repetition a CNOT cascade
    // (q_{n-2}->q_{n-1} down to q0->q1) followed by the next Ry layer.
    const int n = ansatz.n_qubits;
    for (int q = 0; q < n; ++q) apply_ry(s, q, theta[q]);
    for (int rep = 1; rep <= ansatz.reps; ++rep) {
        for (int q = n - 2; q >= 0; --q) apply_cnot(s, q, q + 1);
        for (int q = 0; q < n; ++q) apply_ry(s, q, theta[rep * n + q]);
    }
    return s;
}

double exact_expectation(const StateVector& s, const PauliString& p) {
    if (p.n_qubits() != s.n_qubits) {
        throw std::invalid_argument("exact_expectation: word width " +
                                    std::to_string(p.n_qubits()) + " != state qubits " +
                                    std::to_string(s.n_qubits));
    }
    if (p.is_identity()) return 1.0;

    // Bit masks; word character k addresses qubit n-1-k.
    std::size_t mx = 0, my = 0, mz = 0;
    const int n = s.n_qubits;
    for (int k = 0; k < n; ++k) {
        const std::size_t bit = std::size_t(1) << (n - 1 - k);
        switch (p.word[k]) {
            case 'X': mx |= bit; break;
            case 'Y': my |= bit; break;
            case 'Z': mz |= bit; break;
            default: break;
        }
    }
    const std::size_t flip = mx | my;
    const int n_y = std::popcount(my);
    // i^n_y as a complex phase
    static const Complex iota[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    const Complex y_phase = iota[n_y & 3];

    // <s|P|s> = sum_c conj(s_c) * s_{c^flip} * phase(c^flip)
    // with phase(b) = i^n_y * (-1)^{popcount(b & (my|mz))}.
    Complex acc(0, 0);
    const std::size_t dim = s.amp.size();
    const std::size_t sign_mask = my | mz;
    for (std::size_t c = 0; c < dim; ++c) {
        const std::size_t b = c ^ flip;
        const double sign = (std::popcount(b & sign_mask) & 1) ? -1.0 : 1.0;
        acc += std::conj(s.amp[c]) * s.amp[b] * sign;
    }
    acc *= y_phase;
    if (std::abs(acc.imag()) > 1e-10) {
        throw std::runtime_error("exact_expectation: imaginary residue " +
                                 std::to_string(acc.imag()) + " for word '" + p.word + "'");
    }
    return acc.real();
}

double sampled_expectation(const StateVector& s, const PauliString& p, const ShotConfig& cfg,
                           std::mt19937_64& rng) {
    if (p.is_identity()) return 1.0;
    const double e = exact_expectation(s, p);
    const double contraction = 1.0 - cfg.depolarizing_p;
    if (!cfg.shots.has_value()) return e * contraction;

    const long shots = *cfg.shots;
    if (shots < 1) throw std::invalid_argument("sampled_expectation: shots must be >= 1");
    const double q = std::clamp((1.0 + e) / 2.0, 0.0, 1.0);
    long k = 0;
    for (long i = 0; i < shots; ++i) {
        if (uniform_unit(rng) < q) ++k;
    }
    return (2.0 * static_cast<double>(k) / static_cast<double>(shots) - 1.0) * contraction;
}

}  // namespace bois
