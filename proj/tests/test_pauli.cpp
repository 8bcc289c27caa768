#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>

#include "bois/family.hpp"
#include "bois/pauli.hpp"
#include "oracles.hpp"

using namespace bois;

namespace {

Hamiltonian make(const std::vector<std::pair<std::string, double>>& terms,
                 const std::string& id = "test") {
    std::vector<PauliTerm> ts;
    for (const auto& [w, c] : terms) {
        ts.push_back({PauliString{w}, c});
    }
    return Hamiltonian(id, id, {}, std::move(ts));
}

ProblemFamily load_family(const char* name) {
    return ProblemFamily::load(std::string(BOIS_DATA_DIR) + "/" + name);
}

// Frozen before the build from an independent dense-diagonalisation oracle.
constexpr double kH2References[8] = {-2.365727742308, -2.237092729980, -2.113514230168,
                                     -1.998248033850, -1.892156899886, -1.795619178598,
                                     -1.708534959133, -1.630327539704};

}  // namespace

TEST_CASE("parse_pauli_string accepts valid words") {
    CHECK(parse_pauli_string("XX", 2).word == "XX");
    CHECK(parse_pauli_string("IIIIII", 6).n_qubits() == 6);
    CHECK(parse_pauli_string("IIIIII", 6).is_identity());
    CHECK_FALSE(parse_pauli_string("IZIIII", 6).is_identity());
}

TEST_CASE("parse_pauli_string rejects bad input with position") {
    CHECK_THROWS_WITH_AS(parse_pauli_string("AZ", 2),
                         doctest::Contains("illegal character 'A' at index 0"),
                         std::invalid_argument);
    CHECK_THROWS_WITH_AS(parse_pauli_string("XYA", 3),
                         doctest::Contains("at index 2"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(parse_pauli_string("XX", 3), doctest::Contains("length"),
                         std::invalid_argument);
}

TEST_CASE("Hamiltonian invariants") {
    CHECK_THROWS_WITH_AS(make({{"XX", 1.0}, {"XX", 2.0}}), doctest::Contains("duplicate"),
                         std::invalid_argument);
    CHECK_THROWS_AS(make({{"XX", 1.0}, {"XXX", 2.0}}), std::invalid_argument);
    CHECK_THROWS_AS(make({{"XX", std::numeric_limits<double>::quiet_NaN()}}),
                    std::invalid_argument);
}

TEST_CASE("dense_matrix trivial forms") {
    const auto zz = dense_matrix(make({{"ZZ", 1.0}}));
    Eigen::Vector4d diag_expect(1, -1, -1, 1);
    for (int i = 0; i < 4; ++i) {
        CHECK(zz(i, i).real() == doctest::Approx(diag_expect(i)));
        for (int j = 0; j < 4; ++j) {
            if (i != j) CHECK(std::abs(zz(i, j)) == 0.0);
        }
    }
    const double c = -0.37;
    const auto ii = dense_matrix(make({{"II", c}}));
    CHECK((ii - c * Eigen::MatrixXcd::Identity(4, 4)).norm() == 0.0);
}

TEST_CASE("dense_matrix guard") {
    std::string big(13, 'I');
    CHECK_THROWS_WITH_AS(dense_matrix(make({{big, 1.0}})), doctest::Contains("guard"),
                         std::invalid_argument);
}

TEST_CASE("dense_matrix matches the element-wise oracle on H2 0.7 A") {
    const auto fam = load_family("h2.family");
    const auto& h = fam.geometries()[4];
    std::vector<std::string> words;
    std::vector<double> coeffs;
    for (const auto& t : h.terms()) {
        words.push_back(t.word.word);
        coeffs.push_back(t.coeff);
    }
    const auto expect = oracle::dense_pauli_sum(words, coeffs);
    const auto got = dense_matrix(h);
    CHECK((got - expect).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("dense_matrix is Hermitian on every shipped geometry") {
    for (const char* name : {"h2.family", "h2o_sym.family", "h2o_asym.family"}) {
        const auto fam = load_family(name);
        for (const auto& g : fam.geometries()) {
            const auto m = dense_matrix(g);
            CHECK((m - m.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
        }
    }
}

TEST_CASE("exact_ground_energy trivial cases") {
    CHECK(exact_ground_energy(make({{"ZZ", 1.0}})) == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(exact_ground_energy(make({{"X", 2.5}})) == doctest::Approx(-2.5).epsilon(1e-12));
}

TEST_CASE("exact_ground_energy reproduces the frozen H2 references") {
    const auto fam = load_family("h2.family");
    for (int i = 0; i < 8; ++i) {
        CHECK(exact_ground_energy(fam.geometries()[i]) ==
              doctest::Approx(kH2References[i]).epsilon(1e-9));
    }
}

TEST_CASE("exact_ground_energy invariant under term reordering and qubit relabelling") {
    const auto fam = load_family("h2.family");
    const auto& h = fam.geometries()[4];
    const double e0 = exact_ground_energy(h);

    std::vector<PauliTerm> reversed(h.terms().rbegin(), h.terms().rend());
    CHECK(exact_ground_energy(Hamiltonian("r", "r", {}, reversed)) ==
          doctest::Approx(e0).epsilon(1e-10));

    // Global qubit swap: reverse every word (2-qubit permutation).
    std::vector<PauliTerm> relabelled;
    for (const auto& t : h.terms()) {
        std::string w(t.word.word.rbegin(), t.word.word.rend());
        relabelled.push_back({PauliString{w}, t.coeff});
    }
    CHECK(exact_ground_energy(Hamiltonian("p", "p", {}, relabelled)) ==
          doctest::Approx(e0).epsilon(1e-10));
}

TEST_CASE("energy_from_expectations assembles Eq-style sums") {
    const auto fam = load_family("h2.family");
    const auto& h = fam.geometries()[4];

    std::map<std::string, double> values{
        {"II", 1.0}, {"IZ", 1.0}, {"ZI", 1.0}, {"ZZ", 1.0}, {"XX", 0.0}};
    CHECK(energy_from_expectations(h, values) == doctest::Approx(-1.05541992).epsilon(1e-12));

    std::map<std::string, double> only_identity{
        {"II", 1.0}, {"IZ", 0.0}, {"ZI", 0.0}, {"ZZ", 0.0}, {"XX", 0.0}};
    CHECK(energy_from_expectations(h, only_identity) ==
          doctest::Approx(h.terms()[0].coeff).epsilon(1e-15));

    std::map<std::string, double> missing{{"II", 1.0}, {"IZ", 1.0}, {"ZI", 1.0}, {"ZZ", 1.0}};
    CHECK_THROWS_WITH_AS(energy_from_expectations(h, missing), doctest::Contains("XX"),
                         std::invalid_argument);
}

TEST_CASE("energy_from_expectations is linear in the coefficients") {
    const auto fam = load_family("h2.family");
    const auto& h = fam.geometries()[2];
    std::mt19937_64 rng(11);
    std::map<std::string, double> values;
    for (const auto& t : h.terms()) {
        values[t.word.word] = 2.0 * (rng() >> 11) * 0x1.0p-53 - 1.0;
    }
    const double base = energy_from_expectations(h, values);
    const double c = -3.25;
    std::vector<PauliTerm> scaled;
    for (const auto& t : h.terms()) scaled.push_back({t.word, c * t.coeff});
    const double got = energy_from_expectations(Hamiltonian("s", "s", {}, scaled), values);
    CHECK(got == doctest::Approx(c * base).epsilon(1e-12));
}

TEST_CASE("similarity endpoints") {
    const auto a = make({{"XX", 0.5}, {"ZZ", -0.25}});
    CHECK(similarity(a, a) == doctest::Approx(1.0).epsilon(1e-12));

    const auto b = make({{"XI", 0.7}, {"IY", 0.1}});
    CHECK(similarity(a, b) == doctest::Approx(0.5).epsilon(1e-12));  // disjoint supports

    const auto neg = make({{"XX", -0.5}, {"ZZ", 0.25}});
    CHECK(similarity(a, neg) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("similarity symmetry and positive-scaling invariance") {
    const auto fam = load_family("h2.family");
    const auto& h1 = fam.geometries()[0];
    const auto& h2 = fam.geometries()[7];
    const double s12 = similarity(h1, h2);
    CHECK(similarity(h2, h1) == doctest::Approx(s12).epsilon(1e-14));
    std::vector<PauliTerm> scaled;
    for (const auto& t : h1.terms()) scaled.push_back({t.word, 17.3 * t.coeff});
    CHECK(similarity(Hamiltonian("s", "s", {}, scaled), h2) ==
          doctest::Approx(s12).epsilon(1e-12));
    CHECK(s12 > 0.5);  // same dissociation curve; strongly aligned
}

TEST_CASE("similarity rejects the zero Hamiltonian") {
    const auto z = make({{"XX", 0.0}});
    const auto a = make({{"XX", 1.0}});
    CHECK_THROWS_WITH_AS(similarity(z, a), doctest::Contains("zero-norm"),
                         std::invalid_argument);
}

TEST_CASE("required_paulis and union_required counts") {
    const auto h2 = load_family("h2.family");
    CHECK(required_paulis(h2.geometries()[0]) ==
          std::set<std::string>{"II", "IZ", "ZI", "ZZ", "XX"});
    CHECK(union_required(h2).size() == 5);

    const auto sym = load_family("h2o_sym.family");
    CHECK(union_required(sym).size() == 95);
    std::size_t max_single = 0, total = 0;
    for (const auto& g : sym.geometries()) {
        const auto req = required_paulis(g);
        max_single = std::max(max_single, req.size());
        total += req.size();
    }
    CHECK(total == 2175);
    CHECK(union_required(sym).size() >= max_single);

    const auto asym = load_family("h2o_asym.family");
    CHECK(union_required(asym).size() == 175);
    std::size_t asym_total = 0;
    for (const auto& g : asym.geometries()) asym_total += required_paulis(g).size();
    CHECK(asym_total == 4005);
}
