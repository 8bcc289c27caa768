#pragma once

#include <Eigen/Dense>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace bois {

/// A Pauli word over the alphabet {I, X, Y, Z}. By repo-wide convention the
/// leftmost character acts on qubit n-1 (the highest-index qubit) and the
/// rightmost on qubit 0.
struct PauliString {
    std::string word;

    int n_qubits() const { return static_cast<int>(word.size()); }
    bool is_identity() const { return word.find_first_not_of('I') == std::string::npos; }

    friend bool operator==(const PauliString&, const PauliString&) = default;
    friend auto operator<=>(const PauliString& a, const PauliString& b) {
        return a.word <=> b.word;
    }
};

/// Validates `text` as a Pauli word of exactly `n_qubits` characters.
/// Throws std::invalid_argument naming the offending position otherwise.
PauliString parse_pauli_string(std::string_view text, int n_qubits);

struct PauliTerm {
    PauliString word;
    double coeff = 0.0;  // Hartree
};

/// One geometry's observable as a weighted Pauli expansion.
class Hamiltonian {
  public:
    Hamiltonian(std::string geometry_id, std::string label, std::vector<double> coords,
                std::vector<PauliTerm> terms);

    const std::string& geometry_id() const { return id_; }
    const std::string& label() const { return label_; }
    const std::vector<double>& coords() const { return coords_; }
    const std::vector<PauliTerm>& terms() const { return terms_; }
    int n_qubits() const { return n_qubits_; }

  private:
    std::string id_;
    std::string label_;
    std::vector<double> coords_;
    std::vector<PauliTerm> terms_;
    int n_qubits_ = 0;
};

/// Dense Hermitian matrix of the expansion (2^n x 2^n). Guarded to
/// n_qubits <= 12.
Eigen::MatrixXcd dense_matrix(const Hamiltonian& h);

/// Minimum eigenvalue of dense_matrix(h).
double exact_ground_energy(const Hamiltonian& h);

/// Assembles sum_i h_i * values[P_i]. Identity words contribute their
/// coefficient times exactly 1; any other word missing from `values` is an
/// error naming the word.
double energy_from_expectations(const Hamiltonian& h,
                                const std::map<std::string, double>& values);

/// Similarity measure 1 - phi/pi, with phi the angle between the two
/// coefficient vectors embedded in the union Pauli basis (zero padding).
/// Throws on a zero-norm coefficient vector.
double similarity(const Hamiltonian& h1, const Hamiltonian& h2);

/// All words appearing in the expansion, identity included.
std::set<std::string> required_paulis(const Hamiltonian& h);

}  // namespace bois
