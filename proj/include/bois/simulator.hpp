#pragma once

#include <complex>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "bois/family.hpp"
#include "bois/pauli.hpp"

namespace bois {

/// Statevector over n qubits; amplitude index bit j corresponds to qubit j
/// (so the leftmost character of a Pauli word addresses the highest bit).
struct StateVector {
    int n_qubits = 0;
    std::vector<std::complex<double>> amp;

    double norm() const;
};

/// Applies the ansatz circuit to |0...0>. Throws on parameter-count mismatch.
StateVector prepare_state(const AnsatzSpec& ansatz, std::span<const double> theta);

/// <s|P|s>, exact. The imaginary residue is asserted below 1e-10 and
/// discarded. Identity words return exactly 1.
double exact_expectation(const StateVector& s, const PauliString& p);

/// Shot model: `shots` empty means exact evaluation. depolarizing_p applies a
/// global (1-p) contraction to non-identity expectations.
struct ShotConfig {
    std::optional<long> shots;  // empty = exact
    double depolarizing_p = 0.0;

    static ShotConfig exact() { return {}; }
    static ShotConfig with_shots(long n, double p = 0.0) { return {n, p}; }
};

/// Two-outcome binomial estimate of <s|P|s>: the +1 eigenspace is hit with
/// probability q = (1+e)/2 and the estimate is 2k/shots - 1. Identity words
/// return exactly 1 regardless of shots and noise.
double sampled_expectation(const StateVector& s, const PauliString& p, const ShotConfig& cfg,
                           std::mt19937_64& rng);

}  // namespace bois
