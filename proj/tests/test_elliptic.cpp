#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "fbp/elliptic.hpp"
#include "fbp/errors.hpp"

using namespace fbp;

namespace {

SymMatrix random_symmetric(std::mt19937_64& rng, int n, double scale) {
    std::uniform_real_distribution<double> d(-scale, scale);
    SymMatrix m(n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) m(i, j) = m(j, i) = d(rng);
    return m;
}

// B B^T with B random: positive semidefinite.
SymMatrix random_psd(std::mt19937_64& rng, int n) {
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    double b[kMaxDim][kMaxDim];
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) b[i][j] = d(rng);
    SymMatrix m(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double s = 0.0;
            for (int k = 0; k < n; ++k) s += b[i][k] * b[j][k];
            m(i, j) = s;
        }
    return m;
}

// Closed-form eigenvalues of a symmetric 2x2 matrix.
std::pair<double, double> eig2(const SymMatrix& m) {
    const double mean = 0.5 * (m(0, 0) + m(1, 1));
    const double rad = std::hypot(0.5 * (m(0, 0) - m(1, 1)), m(0, 1));
    return {mean - rad, mean + rad};
}

double pucci_oracle(const SymMatrix& m, double up, double down) {
    const auto [a, b] = eig2(m);
    double s = 0.0;
    for (double e : {a, b}) s += e > 0.0 ? up * e : down * e;
    return s;
}

}  // namespace

TEST_SUITE("elliptic_ops") {

TEST_CASE("operator values on fixed matrices") {
    CHECK(evaluate(OperatorSpec::laplace(), SymMatrix::identity(2)) == 2.0);
    CHECK(evaluate(OperatorSpec::pucci_max(1.0, 2.0), SymMatrix::diagonal(2, Vec{1.0, -1.0})) ==
          doctest::Approx(1.0));
    CHECK(evaluate(OperatorSpec::pucci_min(1.0, 2.0), SymMatrix::diagonal(2, Vec{1.0, -1.0})) ==
          doctest::Approx(-1.0));
    for (int n = 2; n <= 4; ++n) {
        CHECK(evaluate(OperatorSpec::laplace(), SymMatrix(n)) == 0.0);
        CHECK(evaluate(OperatorSpec::pucci_max(0.5, 3.0), SymMatrix(n)) == 0.0);
        CHECK(evaluate(OperatorSpec::pucci_min(0.5, 3.0), SymMatrix(n)) == 0.0);
    }
}

TEST_CASE("Jacobi eigenvalues agree with the closed form and with rotated diagonals") {
    std::mt19937_64 rng(11);
    for (int k = 0; k < 200; ++k) {
        const SymMatrix m = random_symmetric(rng, 2, 3.0);
        const Vec e = symmetric_eigenvalues(m);
        const auto [a, b] = eig2(m);
        CHECK(e[0] == doctest::Approx(a).epsilon(1e-10).scale(3.0));
        CHECK(e[1] == doctest::Approx(b).epsilon(1e-10).scale(3.0));
    }
    // Q diag(-2, 0.5, 3) Q^T with Q a rotation about e_3 then about e_1.
    const double c1 = std::cos(0.7), s1 = std::sin(0.7), c2 = std::cos(-1.1), s2 = std::sin(-1.1);
    const double q[3][3] = {{c1, -s1 * c2, s1 * s2}, {s1, c1 * c2, -c1 * s2}, {0.0, s2, c2}};
    const double d[3] = {-2.0, 0.5, 3.0};
    SymMatrix m(3);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            double s = 0.0;
            for (int k = 0; k < 3; ++k) s += q[i][k] * d[k] * q[j][k];
            m(i, j) = s;
        }
    const Vec e = symmetric_eigenvalues(m);
    CHECK(e[0] == doctest::Approx(-2.0).epsilon(1e-11));
    CHECK(e[1] == doctest::Approx(0.5).epsilon(1e-11));
    CHECK(e[2] == doctest::Approx(3.0).epsilon(1e-11));
}

TEST_CASE("Pucci operators match the eigenvalue formula") {
    std::mt19937_64 rng(5);
    for (int k = 0; k < 200; ++k) {
        const SymMatrix m = random_symmetric(rng, 2, 2.0);
        CHECK(evaluate(OperatorSpec::pucci_max(0.5, 2.0), m) == doctest::Approx(pucci_oracle(m, 2.0, 0.5)));
        CHECK(evaluate(OperatorSpec::pucci_min(0.5, 2.0), m) == doctest::Approx(pucci_oracle(m, 0.5, 2.0)));
    }
}

TEST_CASE("built-in operators are monotone, 1-homogeneous and ordered") {
    std::mt19937_64 rng(19);
    const OperatorSpec ops[] = {OperatorSpec::laplace(), OperatorSpec::pucci_max(0.5, 2.0),
                                OperatorSpec::pucci_min(0.5, 2.0)};
    for (int n = 2; n <= 4; ++n) {
        for (int k = 0; k < 100; ++k) {
            const SymMatrix h = random_symmetric(rng, n, 2.0);
            const SymMatrix p = random_psd(rng, n);
            const double t = 0.1 + 5.0 * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
            for (const OperatorSpec& op : ops) {
                CHECK(evaluate(op, h + p) >= evaluate(op, h) - 1e-12);
                CHECK(evaluate(op, h * t) == doctest::Approx(t * evaluate(op, h)).epsilon(1e-10).scale(1.0));
            }
            CHECK(evaluate(ops[2], h) <= evaluate(ops[1], h) + 1e-12);
        }
    }
}

TEST_CASE("ellipticity check") {
    for (int n = 2; n <= 4; ++n) {
        const EllipticityReport lap = check_ellipticity(OperatorSpec::laplace(), n, 1000, 1);
        CHECK(lap.pass);
        CHECK(lap.worst_ratio_low >= 1.0 - 1e-9);
        CHECK(lap.worst_ratio_high <= n + 1e-9);
        CHECK(check_ellipticity(OperatorSpec::pucci_max(0.5, 2.0), n, 1000, 2).pass);
        CHECK(check_ellipticity(OperatorSpec::pucci_min(0.5, 2.0), n, 1000, 3).pass);
    }
    const auto cube = OperatorSpec::custom([](const SymMatrix& m) { return std::pow(m.trace(), 3); }, 1.0, 1.0);
    const EllipticityReport r = check_ellipticity(cube, 2, 1000, 4);
    CHECK_FALSE(r.pass);
    CHECK(r.failures > 0);
}

TEST_CASE("ellipticity check is deterministic in the seed") {
    const auto a = check_ellipticity(OperatorSpec::pucci_max(0.3, 1.7), 3, 500, 9);
    const auto b = check_ellipticity(OperatorSpec::pucci_max(0.3, 1.7), 3, 500, 9);
    CHECK(a.worst_ratio_low == b.worst_ratio_low);
    CHECK(a.worst_ratio_high == b.worst_ratio_high);
}

TEST_CASE("evaluation errors") {
    SymMatrix bad(2);
    bad(0, 1) = 1.0;
    CHECK_THROWS_AS(evaluate(OperatorSpec::laplace(), bad), InputError);
    const auto nan_op = OperatorSpec::custom(
        [](const SymMatrix&) { return std::numeric_limits<double>::quiet_NaN(); }, 1.0, 1.0);
    CHECK_THROWS_AS(evaluate(nan_op, SymMatrix(2)), OperatorError);
    CHECK_THROWS_AS(OperatorSpec::pucci_max(2.0, 1.0).validate(), ConfigError);
    CHECK_THROWS_AS(OperatorSpec::pucci_max(0.0, 1.0).validate(), ConfigError);
}

TEST_CASE("discrete Hessian is exact on quadratics") {
    const auto g = GridSpec::build(2, 1.0, 1.0 / 16);
    const auto r2 = sample_field(g, [](const Vec& x) { return x[0] * x[0] + x[1] * x[1]; });
    const auto affine = sample_field(g, [](const Vec& x) { return 3.0 * x[0] - x[1] + 2.0; });
    const auto cross = sample_field(g, [](const Vec& x) { return x[0] * x[1]; });
    const auto general = sample_field(
        g, [](const Vec& x) { return 0.7 * x[0] * x[0] - 1.3 * x[0] * x[1] + 2.1 * x[1] * x[1] + x[0] - 4.0; });
    for (NodeId id = 0; id < static_cast<NodeId>(g->size()); ++id) {
        if (!has_hessian_stencil(*g, id)) continue;
        const SymMatrix a = discrete_hessian(r2, id);
        const SymMatrix b = discrete_hessian(affine, id);
        const SymMatrix c = discrete_hessian(cross, id);
        const SymMatrix q = discrete_hessian(general, id);
        CHECK(a(0, 0) == doctest::Approx(2.0).epsilon(1e-10));
        CHECK(a(1, 1) == doctest::Approx(2.0).epsilon(1e-10));
        CHECK(std::abs(a(0, 1)) < 1e-9);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) CHECK(std::abs(b(i, j)) < 1e-9);
        CHECK(c(0, 1) == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(c(1, 0) == c(0, 1));
        CHECK(std::abs(c(0, 0)) < 1e-9);
        CHECK(q(0, 0) == doctest::Approx(1.4).epsilon(1e-9));
        CHECK(q(0, 1) == doctest::Approx(-1.3).epsilon(1e-9));
        CHECK(q(1, 1) == doctest::Approx(4.2).epsilon(1e-9));
    }
}

TEST_CASE("discrete Hessian needs its full stencil") {
    const auto g = GridSpec::build(2, 1.0, 1.0 / 8);
    const ScalarField u(g, 1.0);
    const NodeId edge = g->find(Lattice{8, 0});
    CHECK_FALSE(has_hessian_stencil(*g, edge));
    CHECK_THROWS_AS(discrete_hessian(u, edge), StencilError);
}

}
