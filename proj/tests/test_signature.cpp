#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "doctest.h"
#include "fermsig/signature.hpp"
#include "fermsig/ultrastatic.hpp"

using namespace fermsig;
using namespace fermsig::signature;
using doctest::Approx;

namespace {

// Half-integer lambda: transition probability sech^2(pi m) (Rosen-Zener), so
// the eigenvalues of S_m are +-sqrt(1 - sech^2(pi m)) = +-tanh(pi m).
double rosen_zener_nu(double m) { return std::tanh(std::numbers::pi * m); }

Mat2 diag(double a, double b) {
    Mat2 d = Mat2::Zero();
    d(0, 0) = a;
    d(1, 1) = b;
    return d;
}

}  // namespace

TEST_CASE("trivial mode gives sigma_3") {
    for (double m : {1.0, 1.5, 2.0}) {
        const auto s = assemble_signature(0, m, 1e-12);
        CHECK(max_abs(s.entries() - sigma3()) == 0.0);
        CHECK(s.lambda() == 0.0);
        CHECK(s.mass() == m);
    }
}

TEST_CASE("structure across the de Sitter grid") {
    for (int two = -9; two <= 9; ++two) {
        for (double m : {0.5, 1.0, 1.1, 1.5, 1.9, 2.0, 3.0}) {
            const auto s = assemble_signature(two, m, 1e-12);
            CHECK(s.hermitian_defect() < 1e-12);
            CHECK(s.trace_defect() < 1e-12);
            CHECK(s.norm() <= 1.0 + 1e-9);
            const auto split = spectral_split(s);
            CHECK(split.eig_high == Approx(split.nu).epsilon(1e-12));
            CHECK(split.eig_low == Approx(-split.nu).epsilon(1e-12));
            CHECK(split.nu >= 0.0);
            CHECK(split.nu <= 1.0 + 1e-9);
            // analytic eigenvalue: tanh(pi m) for half-integer lambda, 1 for integer lambda
            const double expected = two % 2 == 0 ? 1.0 : rosen_zener_nu(m);
            CHECK(std::abs(split.nu - expected) < 1e-8);
        }
    }
}

TEST_CASE("nu < 1 at lambda = 3/2 and agreement with narrow-bump time-domain estimates") {
    const auto rows = interpolation_profile(3, {1.1, 1.5, 1.9}, 1e-12);
    for (const auto& row : rows) {
        CHECK(row.split.nu < 1.0 - 1e-6);
        CHECK(row.split.nu == Approx(rosen_zener_nu(row.mass)).epsilon(1e-10));
    }
    // the per-m matrix, seen through a narrow bump in the time domain
    IntervalIndependenceOptions opt;
    opt.widths = {0.05};
    for (double m : {1.1, 1.5, 1.9}) {
        const auto r = interval_independence_check(3, m, MassInterval(1.0, 2.0), MassInterval(m - 0.05, m + 0.05), opt);
        CHECK(r.rows[0].outer_to_closed < 1e-4);
    }
}

TEST_CASE("trace at lambda = 3/2, m = 1.4") { CHECK(assemble_signature(3, 1.4, 1e-12).trace_defect() < 1e-12); }

TEST_CASE("spectral split examples") {
    const auto s = spectral_split(SignatureMatrix(sigma3(), 0.0, 1.0));
    CHECK(max_abs(s.p_plus - diag(1, 0)) == 0.0);
    CHECK(max_abs(s.p_minus - diag(0, 1)) == 0.0);
    CHECK_FALSE(s.degenerate);
    CHECK(s.nu == 1.0);

    const auto z = spectral_split(SignatureMatrix(Mat2::Zero(), 0.0, 1.0));
    CHECK(z.degenerate);
    CHECK(max_abs(z.p_plus) == 0.0);
    CHECK(max_abs(z.p_minus) == 0.0);

    // one eigenvalue inside zero_tol: only the other is assigned
    const auto half = spectral_split(SignatureMatrix(diag(0.5, 1e-12), 0.0, 1.0));
    CHECK(half.degenerate);
    CHECK(max_abs(half.p_plus - diag(1, 0)) < 1e-15);
    CHECK(max_abs(half.p_minus) == 0.0);

    // de Sitter mode: projectors agree with an Eigen eigendecomposition
    const auto sig = assemble_signature(3, 1.5, 1e-12);
    const auto sp = spectral_split(sig);
    Eigen::SelfAdjointEigenSolver<Mat2> es(sig.entries());
    const Vec2 vneg = es.eigenvectors().col(0), vpos = es.eigenvectors().col(1);
    CHECK(max_abs(sp.p_minus - vneg * vneg.adjoint()) < 1e-12);
    CHECK(max_abs(sp.p_plus - vpos * vpos.adjoint()) < 1e-12);
    CHECK(max_abs(sp.p_plus + sp.p_minus - Mat2::Identity()) < 1e-14);
    CHECK(es.eigenvalues()(1) == Approx(sp.nu).epsilon(1e-12));
}

TEST_CASE("projectors are symmetric for the mode scalar product") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g;
    const auto sp = spectral_split(assemble_signature(5, 1.3, 1e-12));
    for (int k = 0; k < 50; ++k) {
        const SpinorPair a({g(rng), g(rng)}, {g(rng), g(rng)});
        const SpinorPair b({g(rng), g(rng)}, {g(rng), g(rng)});
        for (const Mat2* p : {&sp.p_plus, &sp.p_minus}) {
            const cplx lhs = mode_scalar_product(a, SpinorPair(*p * b.vec()));
            const cplx rhs = mode_scalar_product(SpinorPair(*p * a.vec()), b);
            CHECK(std::abs(lhs - rhs) < 1e-13);
        }
    }
}

TEST_CASE("unitary basis change conjugates the matrix") {
    const auto s = assemble_signature(7, 1.2, 1e-12);
    const double th = 0.7;
    Mat2 u;
    u << std::cos(th), -std::sin(th) * std::polar(1.0, 0.4), std::sin(th) * std::polar(1.0, -0.4) * 1.0, std::cos(th);
    u.col(1) = Vec2(-std::conj(u(1, 0)), std::conj(u(0, 0)));
    REQUIRE(max_abs(u.adjoint() * u - Mat2::Identity()) < 1e-15);
    const auto t = s.in_basis(u);
    CHECK(max_abs(t.entries() - u.adjoint() * s.entries() * u) == 0.0);
    const auto a = spectral_split(s), b = spectral_split(t);
    CHECK(a.nu == Approx(b.nu).epsilon(1e-14));
    CHECK(max_abs(b.p_minus - u.adjoint() * a.p_minus * u) < 1e-14);
}

TEST_CASE("closed-form pairing equals 2 pi int eta^2 S_m on basis data") {
    const MassInterval I(1.0, 2.0);
    const auto eta = MassProfile::bump(I);
    const auto quad = gauss_legendre(I, 64);
    for (int two : {3, 9}) {
        const Mat2 sp = signature_pairing_matrix(eta, eta, two, quad, 1e-12);
        for (int i = 0; i < 2; ++i) {
            for (int j = 0; j < 2; ++j) {
                const massosc::MassFamily a{eta, SpinorPair::basis(i), 0.5 * two};
                const massosc::MassFamily b{eta, SpinorPair::basis(j), 0.5 * two};
                CHECK(std::abs(closed_form_pairing(a, b, quad, 1e-12) - sp(i, j)) < 1e-12);
            }
        }
    }
    const massosc::MassFamily a{eta, SpinorPair(1.0, 0.0), 1.5};
    const massosc::MassFamily b{eta, SpinorPair(1.0, 0.0), 2.5};
    CHECK_THROWS_AS(closed_form_pairing(a, b, quad, 1e-12), std::invalid_argument);
}

TEST_CASE("closed form against the time-domain pairing, all basis pairs") {
    const MassInterval I(1.0, 2.0);
    const auto eta = MassProfile::bump(I);
    const auto quad = gauss_legendre(I, 64);
    for (int two : {3, 9}) {
        const Mat2 cf = signature_pairing_matrix(eta, eta, two, quad, 1e-12);
        const auto td = massosc::pairing_matrix_time_domain(eta, eta, 0.5 * two, quad);
        CHECK(max_abs(td.value - cf) <= td.error());
        CHECK(max_abs(td.value - cf) < 1e-3 * operator_norm(cf));
    }
}

TEST_CASE("interval independence") {
    const MassInterval I(1.0, 2.0), sub(1.3, 1.7);
    const auto r = interval_independence_check(3, 1.5, I, sub);
    CHECK(r.pass);
    CHECK(r.interval_free);
    REQUIRE(r.rows.size() == 3);
    CHECK(r.rows.back().width == 0.05);
    CHECK(r.rows.back().difference < 2e-3);
    // both estimates approach the closed form as the width shrinks
    CHECK(r.rows[2].outer_to_closed < r.rows[0].outer_to_closed);
    CHECK(r.rows[2].inner_to_closed < r.rows[0].inner_to_closed);

    IntervalIndependenceOptions fast;
    fast.widths = {0.2, 0.1};
    const auto t = interval_independence_check(0, 1.5, I, sub, fast);
    for (const auto& row : t.rows) {
        CHECK(max_abs(row.estimate_outer - sigma3()) < 1e-6);
        CHECK(max_abs(row.estimate_inner - sigma3()) < 1e-6);
    }
    CHECK(t.pass);

    CHECK_THROWS_AS(interval_independence_check(3, 1.2, I, sub), std::invalid_argument);
    CHECK_THROWS_AS(interval_independence_check(3, 1.5, sub, I), std::invalid_argument);
}

TEST_CASE("continuity in m") {
    for (double m = 1.0; m < 2.0; m += 0.05) {
        CHECK(signature_variation(3, m, 0.01, 1e-12) < 0.1);
    }
}

TEST_CASE("spatial normalization") {
    for (int two : {0, 3}) {
        const auto r = spatial_normalization_check(two, 1.5, 3.0);
        CHECK(r.status == CheckStatus::pass);
        CHECK(r.idempotence_defect < 1e-12);
        CHECK(r.orthogonality_defect < 1e-12);
        CHECK(r.symmetry_defect < 1e-12);
        CHECK(r.commutation_defect < 1e-8);
        CHECK(r.mass_normalization_defect < 1e-12);
    }
    const auto triv = spatial_normalization_check(0, 1.5, 3.0);
    CHECK(triv.nu == 1.0);
    for (int two : {-5, 9}) {
        for (double t : {-3.0, 6.0}) CHECK(spatial_normalization_check(two, 1.2, t).status == CheckStatus::pass);
    }
    SpatialNormalizationOptions wide;
    wide.zero_tol = 2.0;
    CHECK(spatial_normalization_check(3, 1.5, 3.0, wide).status == CheckStatus::inconclusive);
    CHECK(std::string(to_string(CheckStatus::inconclusive)) == "INCONCLUSIVE");
}

TEST_CASE("interpolation profile") {
    const auto triv = interpolation_profile(0, {1.0, 1.5});
    for (const auto& row : triv) {
        CHECK(row.split.nu == 1.0);
        CHECK(row.distance_plus == 0.0);
        CHECK(row.distance_minus == 0.0);
    }
    std::vector<double> grid;
    for (int k = 1; k <= 9; ++k) grid.push_back(1.0 + 0.1 * k);
    const auto rows = interpolation_profile(3, grid);
    REQUIRE(rows.size() == grid.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows[i].mass == grid[i]);
        CHECK(rows[i].unitarity_defect < 1e-9);
        // S_m is the average of the two splittings, halfway between them
        CHECK(rows[i].distance_plus == Approx(rows[i].distance_minus).epsilon(1e-8));
        CHECK(rows[i].distance_plus > 0.0);
        if (i > 0) CHECK(rows[i].split.nu > rows[i - 1].split.nu);
    }
    CHECK_THROWS_AS(interpolation_profile(3, {1.0, 0.0}), std::invalid_argument);

    // the ultrastatic splitting has nu = 1 identically
    for (double m : grid) CHECK(spectral_split(ultrastatic::ultrastatic_signature(1.5, m)).nu == Approx(1.0).epsilon(1e-14));
}
