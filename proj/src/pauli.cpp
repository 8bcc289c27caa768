#include "bois/pauli.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <set>
#include <stdexcept>

namespace bois {

namespace {

using Complex = std::complex<double>;

Eigen::Matrix2cd single_pauli(char c) {
    Eigen::Matrix2cd m;
    switch (c) {
        case 'I': m << 1, 0, 0, 1; break;
        case 'X': m << 0, 1, 1, 0; break;
        case 'Y': m << 0, Complex(0, -1), Complex(0, 1), 0; break;
        case 'Z': m << 1, 0, 0, -1; break;
        default: throw std::invalid_argument("unknown Pauli character");
    }
    return m;
}

Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::Matrix2cd& b) {
    Eigen::MatrixXcd out(a.rows() * 2, a.cols() * 2);
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
    return out;
}

}  // namespace

PauliString parse_pauli_string(std::string_view text, int n_qubits) {
    if (static_cast<int>(text.size()) != n_qubits) {
        throw std::invalid_argument("Pauli word '" + std::string(text) + "' has length " +
                                    std::to_string(text.size()) + ", expected " +
                                    std::to_string(n_qubits));
    }
    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (c != 'I' && c != 'X' && c != 'Y' && c != 'Z') {
            throw std::invalid_argument(std::string("illegal character '") + c +
                                        "' at index " + std::to_string(i) +
                                        " in Pauli word '" + std::string(text) + "'");
        }
    }
    return PauliString{std::string(text)};
}

Hamiltonian::Hamiltonian(std::string geometry_id, std::string label,
                         std::vector<double> coords, std::vector<PauliTerm> terms)
    : id_(std::move(geometry_id)),
      label_(std::move(label)),
      coords_(std::move(coords)),
      terms_(std::move(terms)) {
    if (terms_.empty()) {
        throw std::invalid_argument("Hamiltonian '" + id_ + "' has no terms");
    }
    n_qubits_ = terms_.front().word.n_qubits();
    std::set<std::string> seen;
    for (const auto& t : terms_) {
        if (t.word.n_qubits() != n_qubits_) {
            throw std::invalid_argument("Hamiltonian '" + id_ + "': word '" + t.word.word +
                                        "' does not match width " + std::to_string(n_qubits_));
        }
        if (!seen.insert(t.word.word).second) {
            throw std::invalid_argument("Hamiltonian '" + id_ + "': duplicate Pauli word '" +
                                        t.word.word + "'");
        }
        if (!std::isfinite(t.coeff)) {
            throw std::invalid_argument("Hamiltonian '" + id_ + "': non-finite coefficient for '" +
                                        t.word.word + "'");
        }
    }
}

Eigen::MatrixXcd dense_matrix(const Hamiltonian& h) {
    const int n = h.n_qubits();
    if (n > 12) {
        throw std::invalid_argument("dense_matrix: " + std::to_string(n) +
                                    " qubits exceeds the 12-qubit guard");
    }
    const Eigen::Index dim = Eigen::Index(1) << n;
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(dim, dim);
    for (const auto& t : h.terms()) {
        Eigen::MatrixXcd m = Eigen::MatrixXcd::Identity(1, 1);
        for (char c : t.word.word) {  // leftmost char acts on qubit n-1
            m = kron(m, single_pauli(c));
        }
        out += t.coeff * m;
    }
    return out;
}

double exact_ground_energy(const Hamiltonian& h) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(dense_matrix(h),
                                                           Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) {
        throw std::runtime_error("exact_ground_energy: eigensolver failed for '" +
                                 h.geometry_id() + "'");
    }
    return solver.eigenvalues().minCoeff();
}

double energy_from_expectations(const Hamiltonian& h,
                                const std::map<std::string, double>& values) {
    double energy = 0.0;
    for (const auto& t : h.terms()) {
        if (t.word.is_identity()) {
            energy += t.coeff;
            continue;
        }
        auto it = values.find(t.word.word);
        if (it == values.end()) {
            throw std::invalid_argument("missing expectation value for Pauli word '" +
                                        t.word.word + "'");
        }
        energy += t.coeff * it->second;
    }
    return energy;
}

double similarity(const Hamiltonian& h1, const Hamiltonian& h2) {
    // Embed both coefficient vectors in the union basis; zero padding means
    // only shared words contribute to the inner product.
    std::map<std::string, double> c1;
    for (const auto& t : h1.terms()) c1[t.word.word] = t.coeff;
    double dot = 0.0, n1 = 0.0, n2 = 0.0;
    for (const auto& t : h1.terms()) n1 += t.coeff * t.coeff;
    for (const auto& t : h2.terms()) {
        n2 += t.coeff * t.coeff;
        auto it = c1.find(t.word.word);
        if (it != c1.end()) dot += it->second * t.coeff;
    }
    if (n1 <= 0.0 || n2 <= 0.0) {
        throw std::invalid_argument("similarity: zero-norm coefficient vector");
    }
    double cosine = dot / std::sqrt(n1 * n2);
    cosine = std::clamp(cosine, -1.0, 1.0);
    const double phi = std::acos(cosine);  // in [0, pi]
    return 1.0 - phi / std::numbers::pi;
}

std::set<std::string> required_paulis(const Hamiltonian& h) {
    std::set<std::string> out;
    for (const auto& t : h.terms()) out.insert(t.word.word);
    return out;
}

}  // namespace bois
