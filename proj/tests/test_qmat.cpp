#include <catch2/catch_amalgamated.hpp>

#include "eoplab/qmat.hpp"
#include "eoplab/random.hpp"

using namespace eoplab;
using Catch::Approx;

namespace {

DensityMatrix diag_state(std::vector<double> p, const std::string& label = "B") {
    const int d = static_cast<int>(p.size());
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(d, d);
    for (int i = 0; i < d; ++i) m(i, i) = p[i];
    return DensityMatrix(SpaceShape::single(label, d), m);
}

/// Independent partial-trace oracle: explicit 4-index contraction on a
/// two-qubit state, tracing the first qubit.
Eigen::MatrixXcd ptrace_first_qubit_oracle(const Eigen::MatrixXcd& rho) {
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(2, 2);
    for (int b = 0; b < 2; ++b)
        for (int bp = 0; bp < 2; ++bp)
            for (int a = 0; a < 2; ++a) out(b, bp) += rho(a * 2 + b, a * 2 + bp);
    return out;
}

const SpaceShape kTwoQubits({Factor{"A", 2}, Factor{"B", 2}});

}  // namespace

TEST_CASE("matrix_sqrt on diagonal and idempotent inputs", "[qmat]") {
    SECTION("identity / d") {
        const auto rho = maximally_mixed(4, "B");
        const Eigen::MatrixXcd s = matrix_sqrt(rho);
        REQUIRE(detail::max_abs(s - Eigen::MatrixXcd::Identity(4, 4) / 2.0) < 1e-12);
    }
    SECTION("rank-1 projector is a fixed point") {
        std::mt19937_64 rng = seeded_engine(11);
        const auto psi = random_pure_state(rng, kTwoQubits);
        const auto rho = to_density(psi);
        // spectral noise enters the square root as sqrt(eps)
        REQUIRE(detail::max_abs(matrix_sqrt(rho) - rho.entries()) < 1e-7);
        REQUIRE(detail::max_abs(matrix_sqrt(rho) * matrix_sqrt(rho) - rho.entries()) < 1e-10);
    }
    SECTION("eigenvalues go through the scalar square root") {
        const auto rho = diag_state({0.64, 0.36});
        const Eigen::MatrixXcd s = matrix_sqrt(rho);
        REQUIRE(s(0, 0).real() == Approx(0.8).margin(1e-12));
        REQUIRE(s(1, 1).real() == Approx(0.6).margin(1e-12));
    }
    SECTION("square root squares back") {
        std::mt19937_64 rng = seeded_engine(12);
        for (int rep = 0; rep < 20; ++rep) {
            const auto rho = random_density_matrix(rng, kTwoQubits);
            const Eigen::MatrixXcd s = matrix_sqrt(rho);
            REQUIRE(detail::max_abs(s * s - rho.entries()) < 1e-10);
        }
    }
    SECTION("non-Hermitian input is rejected at construction") {
        Eigen::MatrixXcd bad = Eigen::MatrixXcd::Zero(2, 2);
        bad(0, 0) = 0.5;
        bad(1, 1) = 0.5;
        bad(0, 1) = 0.3;
        REQUIRE_THROWS_AS(DensityMatrix(SpaceShape::single("B", 2), bad), InvalidInput);
    }
}

TEST_CASE("fidelity special values", "[qmat]") {
    std::mt19937_64 rng = seeded_engine(21);
    const auto rho = random_density_matrix(rng, kTwoQubits);
    SECTION("identical states") { REQUIRE(fidelity(rho, rho) == Approx(1.0).margin(1e-10)); }
    SECTION("orthogonal pure states") {
        const auto zero = to_density(basis_state(2, 0, "B"));
        const auto one = to_density(basis_state(2, 1, "B"));
        REQUIRE(fidelity(zero, one) == Approx(0.0).margin(1e-12));
    }
    SECTION("pure vs maximally mixed: sqrt(<0|sigma|0>)") {
        const auto zero = to_density(basis_state(2, 0, "B"));
        REQUIRE(fidelity(zero, maximally_mixed(2, "B")) ==
                Approx(0.70710678118654752).margin(1e-12));
    }
    SECTION("symmetry") {
        const auto sigma = random_density_matrix(rng, kTwoQubits);
        REQUIRE(std::abs(fidelity(rho, sigma) - fidelity(sigma, rho)) < 1e-10);
    }
    SECTION("dimension mismatch") {
        REQUIRE_THROWS_AS(fidelity(rho, maximally_mixed(2, "B")), ShapeError);
    }
}

TEST_CASE("trace norm distance", "[qmat]") {
    SECTION("coincident states") {
        std::mt19937_64 rng = seeded_engine(31);
        const auto rho = random_density_matrix(rng, kTwoQubits);
        REQUIRE(trace_norm_distance(rho, rho) == Approx(0.0).margin(1e-12));
    }
    SECTION("orthogonal pure states") {
        const auto zero = to_density(basis_state(2, 0, "B"));
        const auto one = to_density(basis_state(2, 1, "B"));
        REQUIRE(trace_norm_distance(zero, one) == Approx(2.0).margin(1e-12));
    }
    SECTION("diagonal difference") {
        REQUIRE(trace_norm_distance(diag_state({1.0, 0.0}), diag_state({0.75, 0.25})) ==
                Approx(0.5).margin(1e-12));
    }
    SECTION("triangle inequality on random triples") {
        std::mt19937_64 rng = seeded_engine(32);
        for (int rep = 0; rep < 50; ++rep) {
            const auto a = random_density_matrix(rng, kTwoQubits);
            const auto b = random_density_matrix(rng, kTwoQubits);
            const auto c = random_density_matrix(rng, kTwoQubits);
            REQUIRE(trace_norm_distance(a, c) <=
                    trace_norm_distance(a, b) + trace_norm_distance(b, c) + 1e-9);
        }
    }
}

TEST_CASE("von Neumann entropy", "[qmat]") {
    std::mt19937_64 rng = seeded_engine(41);
    SECTION("pure states have zero entropy") {
        REQUIRE(von_neumann_entropy(to_density(random_pure_state(rng, kTwoQubits))) ==
                Approx(0.0).margin(1e-9));
    }
    SECTION("maximal mixing") {
        for (int d : {2, 3, 4})
            REQUIRE(von_neumann_entropy(maximally_mixed(d, "B")) ==
                    Approx(std::log2(double(d))).margin(1e-12));
    }
    SECTION("binary entropy of (3/4, 1/4)") {
        REQUIRE(von_neumann_entropy(diag_state({0.75, 0.25})) ==
                Approx(0.81127812445913283).margin(1e-12));
    }
}

TEST_CASE("partial trace", "[qmat]") {
    std::mt19937_64 rng = seeded_engine(51);
    SECTION("product state factors exactly") {
        const auto a = random_density_matrix(rng, SpaceShape::single("A", 2));
        const auto b = random_density_matrix(rng, SpaceShape::single("B", 3));
        const auto joint = tensor(a, b);
        REQUIRE(detail::max_abs(partial_trace(joint, {"B"}).entries() - b.entries()) < 1e-13);
        REQUIRE(detail::max_abs(partial_trace(joint, {"A"}).entries() - a.entries()) < 1e-13);
    }
    SECTION("maximally entangled reduction is flat") {
        const auto phi = to_density(max_entangled(2));
        REQUIRE(detail::max_abs(partial_trace(phi, {"A"}).entries() -
                                Eigen::MatrixXcd::Identity(2, 2) / 2.0) < 1e-12);
    }
    SECTION("matches the index-contraction oracle on random states") {
        for (int rep = 0; rep < 25; ++rep) {
            const auto rho = random_density_matrix(rng, kTwoQubits);
            const auto reduced = partial_trace(rho, {"B"});
            REQUIRE(detail::max_abs(reduced.entries() - ptrace_first_qubit_oracle(rho.entries())) <
                    1e-13);
        }
    }
    SECTION("unknown label") {
        const auto rho = random_density_matrix(rng, kTwoQubits);
        REQUIRE_THROWS_AS(partial_trace(rho, {"C"}), ShapeError);
    }
}

TEST_CASE("tensor and max_entangled", "[qmat]") {
    std::mt19937_64 rng = seeded_engine(61);
    SECTION("tensor preserves trace") {
        const auto a = random_density_matrix(rng, SpaceShape::single("A", 2));
        const auto b = random_density_matrix(rng, SpaceShape::single("B", 2));
        REQUIRE(tensor(a, b).entries().trace().real() == Approx(1.0).margin(1e-12));
    }
    SECTION("Schmidt coefficients of Phi_L are flat") {
        for (int L : {2, 3, 4}) {
            const auto phi = max_entangled(L);
            const auto red = partial_trace(to_density(phi), {"B"});
            REQUIRE(detail::max_abs(red.entries() -
                                    Eigen::MatrixXcd::Identity(L, L) / double(L)) < 1e-12);
        }
    }
    SECTION("entropy of the Phi_4 marginal is 2 bits") {
        REQUIRE(von_neumann_entropy(partial_trace(to_density(max_entangled(4)), {"B"})) ==
                Approx(2.0).margin(1e-12));
    }
    SECTION("duplicate labels are rejected") {
        const auto a = random_density_matrix(rng, SpaceShape::single("A", 2));
        REQUIRE_THROWS_AS(tensor(a, a), ShapeError);
    }
}

TEST_CASE("metric inequalities on random pairs", "[qmat][properties]") {
    for (int d : {2, 3, 4}) {
        std::mt19937_64 rng = seeded_engine(71, d);
        const SpaceShape shape = SpaceShape::single("B", d);
        for (int rep = 0; rep < 200; ++rep) {
            const auto rho = random_density_matrix(rng, shape);
            const auto sigma = random_density_matrix(rng, shape);
            const double f = fidelity(rho, sigma);
            const double overlap = sqrt_overlap(rho, sigma);
            const double tn = trace_norm_distance(rho, sigma);
            // F^2 <= Tr sqrt(rho) sqrt(sigma)
            REQUIRE(f * f <= overlap + 1e-9);
            // Fuchs-van de Graaf both ways
            REQUIRE(1.0 - f <= 0.5 * tn + 1e-9);
            REQUIRE(tn <= 2.0 * std::sqrt(std::max(0.0, 1.0 - f * f)) + 1e-9);
        }
    }
}

TEST_CASE("entropy additivity and round trips", "[qmat][properties]") {
    std::mt19937_64 rng = seeded_engine(81);
    for (int rep = 0; rep < 30; ++rep) {
        const auto a = random_density_matrix(rng, SpaceShape::single("A", 2));
        const auto b = random_density_matrix(rng, SpaceShape::single("B", 3));
        const auto joint = tensor(a, b);
        REQUIRE(von_neumann_entropy(joint) ==
                Approx(von_neumann_entropy(a) + von_neumann_entropy(b)).margin(1e-9));
        REQUIRE(detail::max_abs(partial_trace(joint, {"B"}).entries() - b.entries()) < 1e-12);
    }
}

TEST_CASE("factor permutation and pure-state reduction", "[qmat]") {
    std::mt19937_64 rng = seeded_engine(91);
    const SpaceShape shape({Factor{"A", 2}, Factor{"B", 3}, Factor{"C", 2}});
    const auto psi = random_pure_state(rng, shape);
    SECTION("permutation round trip") {
        const auto swapped = permute_factors(psi, {"C", "A", "B"});
        const auto back = permute_factors(swapped, {"A", "B", "C"});
        REQUIRE((back.amplitudes() - psi.amplitudes()).cwiseAbs().maxCoeff() < 1e-15);
    }
    SECTION("reduction agrees with the density-matrix path") {
        const auto direct = reduced_from_pure(psi, {"A", "C"});
        const auto via_density = partial_trace(to_density(psi), {"A", "C"});
        REQUIRE(detail::max_abs(direct - via_density.entries()) < 1e-13);
    }
    SECTION("permutation commutes with reduction") {
        const auto swapped = permute_factors(psi, {"B", "C", "A"});
        const auto r1 = reduced_from_pure(psi, {"B"});
        const auto r2 = reduced_from_pure(swapped, {"B"});
        REQUIRE(detail::max_abs(r1 - r2) < 1e-13);
    }
}
