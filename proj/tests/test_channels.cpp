#include <catch2/catch_amalgamated.hpp>

#include "eoplab/channels.hpp"

using namespace eoplab;
using Catch::Approx;

namespace {

/// Direct Kraus-sum oracle: sum_k (K (x) I) rho (K (x) I)^dagger by explicit
/// matrix arithmetic, no lifting helpers.
Eigen::MatrixXcd kraus_on_first_factor_oracle(const std::vector<Eigen::MatrixXcd>& kraus,
                                              const Eigen::MatrixXcd& rho, int d_other) {
    const int dout = static_cast<int>(kraus[0].rows());
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(dout * d_other, dout * d_other);
    for (const auto& k : kraus) {
        Eigen::MatrixXcd lifted = Eigen::MatrixXcd::Zero(dout * d_other, k.cols() * d_other);
        for (int i = 0; i < k.rows(); ++i)
            for (int j = 0; j < k.cols(); ++j)
                for (int e = 0; e < d_other; ++e) lifted(i * d_other + e, j * d_other + e) = k(i, j);
        out += lifted * rho * lifted.adjoint();
    }
    return out;
}

const SpaceShape kQubit = SpaceShape::single("B", 2);

OneWayLOCC measure_and_keep() {
    // measure A in the computational basis, do nothing on B
    Eigen::MatrixXcd k0 = Eigen::MatrixXcd::Zero(2, 2), k1 = Eigen::MatrixXcd::Zero(2, 2);
    k0(0, 0) = 1.0;
    k1(1, 1) = 1.0;
    const SpaceShape a_in = SpaceShape::single("A", 2), x_out = SpaceShape::single("X", 2);
    Instrument instr({CPMap(a_in, x_out, {k0}), CPMap(a_in, x_out, {k1})});
    return OneWayLOCC(std::move(instr), {CPMap::identity(kQubit), CPMap::identity(kQubit)});
}

}  // namespace

TEST_CASE("apply_cp basics", "[channels]") {
    std::mt19937_64 rng = seeded_engine(101);
    SECTION("identity Kraus leaves the state alone") {
        const auto rho = random_density_matrix(rng, kQubit);
        const auto out = apply_cp(CPMap::identity(kQubit), rho);
        REQUIRE(detail::max_abs(out.entries - rho.entries()) < 1e-14);
    }
    SECTION("projector branch implements the Born rule") {
        Eigen::MatrixXcd proj = Eigen::MatrixXcd::Zero(2, 2);
        proj(0, 0) = 1.0;
        const CPMap branch(kQubit, kQubit, {proj});
        Eigen::MatrixXcd plus(2, 2);
        plus << 0.5, 0.5, 0.5, 0.5;
        const auto out = apply_cp(branch, DensityMatrix(kQubit, plus));
        REQUIRE(out.entries(0, 0).real() == Approx(0.5).margin(1e-14));
        REQUIRE(detail::max_abs(out.entries) == Approx(0.5).margin(1e-14));
        REQUIRE(out.entries.trace().real() == Approx(0.5).margin(1e-14));
    }
    SECTION("random map on one factor matches the Kraus-sum oracle") {
        const SpaceShape two({Factor{"A", 2}, Factor{"B", 3}});
        for (int rep = 0; rep < 20; ++rep) {
            const auto m = random_tp_map(rng, SpaceShape::single("A", 2),
                                         SpaceShape::single("A", 2), 2);
            const auto rho = random_density_matrix(rng, two);
            const auto fast = apply_cp(m, rho);
            const auto slow = kraus_on_first_factor_oracle(m.kraus(), rho.entries(), 3);
            REQUIRE(detail::max_abs(fast.entries - slow) < 1e-12);
        }
    }
    SECTION("shape mismatch is rejected") {
        std::mt19937_64 rng2 = seeded_engine(102);
        const auto m = random_tp_map(rng2, SpaceShape::single("C", 3), SpaceShape::single("C", 3), 1);
        const auto rho = random_density_matrix(rng2, kQubit);
        REQUIRE_THROWS_AS(apply_cp(m, rho), ShapeError);
    }
}

TEST_CASE("adjoint_apply duality", "[channels]") {
    std::mt19937_64 rng = seeded_engine(111);
    SECTION("identity and unitary conjugation") {
        Eigen::MatrixXcd e = gaussian_complex(rng, 2, 2);
        e = (e + e.adjoint()).eval();
        REQUIRE(detail::max_abs(adjoint_apply(CPMap::identity(kQubit), e) - e) < 1e-14);
        const Eigen::MatrixXcd u = haar_unitary(rng, 2);
        const CPMap conj_map(kQubit, kQubit, {u});
        REQUIRE(detail::max_abs(adjoint_apply(conj_map, e) - u.adjoint() * e * u) < 1e-13);
    }
    SECTION("Tr[E m(rho)] = Tr[m*(E) rho] on random triples") {
        double worst = 0.0;
        for (int rep = 0; rep < 100; ++rep) {
            const auto m = random_tp_map(rng, kQubit, SpaceShape::single("B", 3), 2);
            const auto rho = random_density_matrix(rng, kQubit);
            Eigen::MatrixXcd e = gaussian_complex(rng, 3, 3);
            e = ((e + e.adjoint()) / 2.0).eval();
            const double lhs = (e * apply_cp(m, rho).entries).trace().real();
            const double rhs = (adjoint_apply(m, e) * rho.entries()).trace().real();
            worst = std::max(worst, std::abs(lhs - rhs));
        }
        REQUIRE(worst < 1e-10);
    }
}

TEST_CASE("apply_locc", "[channels]") {
    std::mt19937_64 rng = seeded_engine(121);
    SECTION("single identity branch") {
        const SpaceShape pair({Factor{"A", 2}, Factor{"B", 2}});
        const auto rho = random_density_matrix(rng, pair);
        OneWayLOCC id(Instrument({CPMap::identity(SpaceShape::single("A", 2))}),
                      {CPMap::identity(kQubit)});
        REQUIRE(detail::max_abs(apply_locc(id, rho).entries() - rho.entries()) < 1e-13);
    }
    SECTION("computational measurement dephases the Bell state") {
        const auto out = apply_locc(measure_and_keep(), to_density(max_entangled(2)));
        Eigen::MatrixXcd expect = Eigen::MatrixXcd::Zero(4, 4);
        expect(0, 0) = 0.5;
        expect(3, 3) = 0.5;
        REQUIRE(detail::max_abs(out.entries() - expect) < 1e-13);
    }
    SECTION("trace preservation for random protocols") {
        for (int rep = 0; rep < 100; ++rep) {
            const auto locc = random_one_way_locc(rng, 2, 2, 2, 2, 2);
            const auto rho =
                random_density_matrix(rng, SpaceShape({Factor{"A", 2}, Factor{"B", 2}}));
            REQUIRE(apply_locc(locc, rho).entries().trace().real() == Approx(1.0).margin(1e-9));
        }
    }
    SECTION("linearity under convex mixing") {
        const SpaceShape pair({Factor{"A", 2}, Factor{"B", 2}});
        const auto locc = random_one_way_locc(rng, 2, 3, 2, 2, 1);
        const auto r1 = random_density_matrix(rng, pair);
        const auto r2 = random_density_matrix(rng, pair);
        const DensityMatrix mix(pair, 0.3 * r1.entries() + 0.7 * r2.entries());
        const auto lhs = apply_locc(locc, mix).entries();
        const auto rhs =
            0.3 * apply_locc(locc, r1).entries() + 0.7 * apply_locc(locc, r2).entries();
        REQUIRE(detail::max_abs(lhs - rhs) < 1e-10);
    }
    SECTION("branch count mismatch is rejected") {
        REQUIRE_THROWS_AS(OneWayLOCC(Instrument({CPMap::identity(SpaceShape::single("A", 2))}),
                                     {CPMap::identity(kQubit), CPMap::identity(kQubit)}),
                          ShapeError);
    }
}

TEST_CASE("cc_size counts messages", "[channels]") {
    std::mt19937_64 rng = seeded_engine(131);
    OneWayLOCC single(Instrument({CPMap::identity(SpaceShape::single("A", 2))}),
                      {CPMap::identity(kQubit)});
    REQUIRE(cc_size(single) == 1);
    REQUIRE(cc_size(measure_and_keep()) == 2);
    for (int l : {2, 3, 4}) REQUIRE(cc_size(random_one_way_locc(rng, 2, 2, 2, l, 1)) == l);
}

TEST_CASE("instrument completeness is enforced", "[channels]") {
    Eigen::MatrixXcd half = Eigen::MatrixXcd::Identity(2, 2) * 0.5;
    const SpaceShape s = SpaceShape::single("A", 2);
    REQUIRE_THROWS_AS(Instrument({CPMap(s, s, {half})}), InvalidInput);
    // completeness of the random generator is exact by construction
    std::mt19937_64 rng = seeded_engine(141);
    for (int rep = 0; rep < 20; ++rep) {
        const auto instr = random_instrument(rng, s, SpaceShape::single("X", 3), 3, 2);
        Eigen::MatrixXcd sum = Eigen::MatrixXcd::Zero(2, 2);
        for (const auto& b : instr.branches()) sum += b.kraus_sum();
        REQUIRE(detail::max_abs(sum - Eigen::MatrixXcd::Identity(2, 2)) < 1e-12);
    }
}
