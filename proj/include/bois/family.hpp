#pragma once

#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "bois/pauli.hpp"

namespace bois {

/// Parameterised-circuit description. H2Fixed is the two-qubit six-parameter
/// circuit; RealAmplitudes is the Ry + CNOT-cascade ansatz with
/// n_qubits * (reps + 1) parameters.
struct AnsatzSpec {
    enum class Kind { H2Fixed, RealAmplitudes };

    Kind kind = Kind::H2Fixed;
    int n_qubits = 2;
    int reps = 0;

    int n_params() const {
        return kind == Kind::H2Fixed ? 6 : n_qubits * (reps + 1);
    }
};

/// A grid of geometries sharing one ansatz; one optimisation task per
/// geometry. Geometries are stored in row-major order of grid_shape, and
/// grid_index(d) is the corresponding multi-index.
class ProblemFamily {
  public:
    ProblemFamily(std::string molecule, AnsatzSpec ansatz, std::vector<int> grid_shape,
                  std::vector<Hamiltonian> geometries);

    /// Parses and validates a .family JSON document. Any violation throws
    /// with the geometry id and field named. Records a content hash of the
    /// file bytes.
    static ProblemFamily load(const std::filesystem::path& path);

    const std::string& molecule() const { return molecule_; }
    const AnsatzSpec& ansatz() const { return ansatz_; }
    const std::vector<int>& grid_shape() const { return grid_shape_; }
    const std::vector<Hamiltonian>& geometries() const { return geometries_; }
    int size() const { return static_cast<int>(geometries_.size()); }
    int n_qubits() const;

    const std::vector<int>& grid_index(int d) const { return grid_index_.at(d); }

    const std::string& content_hash() const { return content_hash_; }
    const std::string& source_path() const { return source_path_; }

  private:
    std::string molecule_;
    AnsatzSpec ansatz_;
    std::vector<int> grid_shape_;
    std::vector<Hamiltonian> geometries_;
    std::vector<std::vector<int>> grid_index_;
    std::string content_hash_;
    std::string source_path_;
};

/// Union of required_paulis over all geometries.
std::set<std::string> union_required(const ProblemFamily& f);

/// FNV-1a 64-bit hash of a file's bytes, hex encoded.
std::string file_content_hash(const std::filesystem::path& path);

}  // namespace bois
