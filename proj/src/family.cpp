#include "bois/family.hpp"

#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <stdexcept>

namespace bois {

using nlohmann::json;

ProblemFamily::ProblemFamily(std::string molecule, AnsatzSpec ansatz,
                             std::vector<int> grid_shape, std::vector<Hamiltonian> geometries)
    : molecule_(std::move(molecule)),
      ansatz_(ansatz),
      grid_shape_(std::move(grid_shape)),
      geometries_(std::move(geometries)) {
    long grid_points = 1;
    for (int s : grid_shape_) {
        if (s < 0) throw std::invalid_argument("grid_shape entries must be non-negative");
        grid_points *= s;
    }
    if (grid_points != static_cast<long>(geometries_.size())) {
        throw std::invalid_argument("grid_shape product " + std::to_string(grid_points) +
                                    " does not match geometry count " +
                                    std::to_string(geometries_.size()));
    }
    if (geometries_.empty()) return;  // empty family: queries like n_qubits() are guarded
    const int nq = geometries_.front().n_qubits();
    for (const auto& g : geometries_) {
        if (g.n_qubits() != nq) {
            throw std::invalid_argument("geometry '" + g.geometry_id() +
                                        "': qubit count differs from family");
        }
    }
    if (nq != ansatz_.n_qubits) {
        throw std::invalid_argument("ansatz is for " + std::to_string(ansatz_.n_qubits) +
                                    " qubits but geometries have " + std::to_string(nq));
    }
    // Row-major multi-indices.
    grid_index_.resize(geometries_.size());
    const int naxes = static_cast<int>(grid_shape_.size());
    for (std::size_t i = 0; i < geometries_.size(); ++i) {
        std::vector<int> idx(naxes);
        std::size_t rem = i;
        for (int a = naxes - 1; a >= 0; --a) {
            idx[a] = static_cast<int>(rem % grid_shape_[a]);
            rem /= grid_shape_[a];
        }
        grid_index_[i] = std::move(idx);
    }
}

int ProblemFamily::n_qubits() const {
    if (geometries_.empty()) throw std::logic_error("n_qubits: family is empty");
    return geometries_.front().n_qubits();
}

ProblemFamily ProblemFamily::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open family file: " + path.string());
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw std::runtime_error("family file '" + path.string() + "' is not valid JSON: " +
                                 e.what());
    }

    const std::string schema = doc.value("schema", "");
    if (schema != "bois-family-1") {
        throw std::runtime_error("family file '" + path.string() + "': unknown schema '" +
                                 schema + "'");
    }

    AnsatzSpec ansatz;
    const auto& aj = doc.at("ansatz");
    const std::string kind = aj.at("kind").get<std::string>();
    if (kind == "h2_fixed") {
        ansatz.kind = AnsatzSpec::Kind::H2Fixed;
    } else if (kind == "real_amplitudes") {
        ansatz.kind = AnsatzSpec::Kind::RealAmplitudes;
    } else {
        throw std::runtime_error("family file: unknown ansatz kind '" + kind + "'");
    }
    ansatz.n_qubits = aj.at("n_qubits").get<int>();
    ansatz.reps = aj.value("reps", 0);
    if (ansatz.kind == AnsatzSpec::Kind::H2Fixed && ansatz.n_qubits != 2) {
        throw std::runtime_error("family file: h2_fixed ansatz requires 2 qubits");
    }

    std::vector<int> shape = doc.at("grid_shape").get<std::vector<int>>();

    std::vector<Hamiltonian> geoms;
    for (const auto& gj : doc.at("geometries")) {
        const std::string id = gj.at("id").get<std::string>();
        const auto& paulis = gj.at("paulis");
        const auto& coeffs = gj.at("coeffs");
        if (paulis.size() != coeffs.size()) {
            throw std::runtime_error("geometry '" + id + "': paulis length " +
                                     std::to_string(paulis.size()) + " != coeffs length " +
                                     std::to_string(coeffs.size()));
        }
        std::vector<PauliTerm> terms;
        terms.reserve(paulis.size());
        for (std::size_t i = 0; i < paulis.size(); ++i) {
            PauliString word;
            try {
                word = parse_pauli_string(paulis[i].get<std::string>(), ansatz.n_qubits);
            } catch (const std::invalid_argument& e) {
                throw std::runtime_error("geometry '" + id + "', paulis[" + std::to_string(i) +
                                         "]: " + e.what());
            }
            terms.push_back({std::move(word), coeffs[i].get<double>()});
        }
        std::vector<double> coords = gj.value("coords", std::vector<double>{});
        std::string label = gj.value("label", id);
        try {
            geoms.emplace_back(id, label, std::move(coords), std::move(terms));
        } catch (const std::invalid_argument& e) {
            throw std::runtime_error(std::string("geometry '") + id + "': " + e.what());
        }
    }

    try {
        ProblemFamily fam(doc.at("molecule").get<std::string>(), ansatz, std::move(shape),
                          std::move(geoms));
        fam.content_hash_ = file_content_hash(path);
        fam.source_path_ = path.string();
        return fam;
    } catch (const std::invalid_argument& e) {
        throw std::runtime_error("family file '" + path.string() + "': " + e.what());
    }
}

std::set<std::string> union_required(const ProblemFamily& f) {
    std::set<std::string> out;
    for (const auto& g : f.geometries()) {
        auto req = required_paulis(g);
        out.insert(req.begin(), req.end());
    }
    return out;
}

std::string file_content_hash(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file for hashing: " + path.string());
    std::uint64_t h = 1469598103934665603ull;
    char buf[4096];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 1099511628211ull;
        }
        if (!in) break;
    }
    std::ostringstream os;
    os << std::hex << h;
    return os.str();
}

}  // namespace bois
