#include <doctest.h>

#include <cmath>

#include "fbp/errors.hpp"
#include "fbp/solver.hpp"
#include "fbp/viscosity.hpp"

using namespace fbp;

namespace {

int count_kind(const std::vector<Violation>& v, ViolationKind kind) {
    int n = 0;
    for (const Violation& x : v) n += x.kind == kind;
    return n;
}

NodeId origin_node(const GridSpec& g) { return g.find(Lattice{}); }

ScalarField plane_with_slopes(const GridPtr& g, double a, double b) {
    return two_plane_field(g, TwoPlane::with_slopes(a, b, Vec{0.0, 1.0}, Vec{}, 2));
}

}  // namespace

TEST_SUITE("viscosity_check") {

TEST_CASE("profile families are deterministic and start with an affine profile") {
    TestProfileFamily fam;
    const auto a = sample_profiles(fam, 2);
    const auto b = sample_profiles(fam, 2);
    REQUIRE(a.size() == static_cast<std::size_t>(fam.count));
    for (std::size_t k = 0; k < a.size(); ++k) {
        CHECK(a[k].gradient == b[k].gradient);
        CHECK(a[k].gradient >= fam.g_min);
        CHECK(a[k].gradient <= fam.g_max);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
                CHECK(a[k].Q(i, j) == b[k].Q(i, j));
                CHECK(std::abs(a[k].Q(i, j)) <= fam.hessian_scale);
            }
    }
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) CHECK(a[0].Q(i, j) == 0.0);
    fam.seed = 2;
    const auto c = sample_profiles(fam, 2);
    CHECK(c[1].Q(0, 1) != a[1].Q(0, 1));

    TestProfileFamily bad;
    bad.count = 0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = TestProfileFamily{};
    bad.g_min = 3.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("harmonic fields are never touched") {
    const auto g = GridSpec::build(2, 1.0, 1.0 / 16);
    const TestProfileFamily fam;
    for (const auto& f : {sample_field(g, [](const Vec& x) { return x[0] * x[0] - x[1] * x[1] + 2.0; }),
                          sample_field(g, [](const Vec& x) { return 3.0 + x[0] + 2.0 * x[1]; })}) {
        CHECK(check_interior(f, OperatorSpec::laplace(), fam, 1e-8).empty());
    }
}

TEST_CASE("a strictly subharmonic field is touched from below") {
    const auto g = GridSpec::build(2, 1.0, 1.0 / 16);
    const auto u = sample_field(g, [](const Vec& x) { return 2.0 + x[0] * x[0] + x[1] * x[1]; });
    const auto v = check_interior(u, OperatorSpec::laplace(), TestProfileFamily{}, 1e-8);
    CHECK(count_kind(v, ViolationKind::touched_from_below) > 0);
    CHECK(count_kind(v, ViolationKind::touched_from_above) == 0);
    for (std::size_t k = 1; k < v.size(); ++k) {
        CHECK((v[k - 1].node < v[k].node || (v[k - 1].node == v[k].node && v[k - 1].profile < v[k].profile)));
    }
    for (const Violation& x : v) CHECK(x.value >= 1e-8);
}

TEST_CASE("two-plane field has no interior violations") {
    const auto g = GridSpec::build(2, 1.0, 1.0 / 16);
    const auto u = two_plane_field(g, TwoPlane::make(JumpLaw::sqrt1p(), 1.0, Vec{0.6, 0.8}, Vec{}, 2));
    CHECK(check_interior(u, OperatorSpec::laplace(), TestProfileFamily{}, 1e-8).empty());
}

TEST_CASE("solver output passes the interior test above its residual") {
    const auto g = GridSpec::build(2, 1.0, 1.0 / 32);
    const JumpLaw law = JumpLaw::sqrt1p();
    const TwoPlane p = TwoPlane::make(law, 1.0, Vec{0.0, 1.0}, Vec{}, 2);
    const SolveResult r = solve_dirichlet(
        g, OperatorSpec::laplace(), law, [&p](const Vec& x) { return p(x) + 0.1 * std::sin(3.0 * x[0]); }, SolveConfig{});
    REQUIRE(r.converged);
    const double margin = std::max(1e-12, 10.0 * r.pde_residual);
    CHECK(check_interior(r.field, OperatorSpec::laplace(), TestProfileFamily{}, margin).empty());
}

TEST_CASE("free boundary test on exact and mismatched slopes") {
    const auto g = GridSpec::build(2, 1.0, 1.0 / 32);
    const JumpLaw law = JumpLaw::sqrt1p();
    const TestProfileFamily fam;
    const double alpha = g_eval(law, 1.0);
    const ScalarField exact = plane_with_slopes(g, alpha, 1.0);
    int checked = 0;
    for (NodeId id : phase_split(exact).interface_band) {
        const FbcCheck r = check_fbc(exact, law, id, fam, 0.05, law.M);
        if (r.skipped) continue;
        ++checked;
        CHECK(r.violations.empty());
        CHECK(std::abs(r.y0[1]) <= 1e-9);
        CHECK(r.nu[1] == doctest::Approx(1.0));
    }
    CHECK(checked > 0);

    const NodeId o = origin_node(*g);
    const FbcCheck up = check_fbc(plane_with_slopes(g, alpha + 0.2, 1.0), law, o, fam, 0.05, law.M);
    CHECK(count_kind(up.violations, ViolationKind::fbc_case1) > 0);
    const FbcCheck down = check_fbc(plane_with_slopes(g, alpha - 0.2, 1.0), law, o, fam, 0.05, law.M);
    CHECK(count_kind(down.violations, ViolationKind::fbc_case2) > 0);
    for (const Violation& v : up.violations) {
        if (v.kind == ViolationKind::fbc_case1) CHECK(v.a == doctest::Approx(g_eval(law, v.b) + 0.05));
    }
}

TEST_CASE("free boundary test skips shell and degenerate nodes") {
    const auto g = GridSpec::build(2, 1.0, 1.0 / 16);
    const JumpLaw law = JumpLaw::sqrt1p();
    // Zero level just below x_2 = 0: the band is the row x_2 = -h, whose
    // ends (+-15, -1) are shell nodes.
    const ScalarField shifted = sample_field(g, [](const Vec& x) { return x[1] + 0.001; });
    const FbcCheck shell = check_fbc(shifted, law, g->find(Lattice{15, -1}), TestProfileFamily{}, 0.05, law.M);
    CHECK(shell.skipped);
    CHECK_FALSE(shell.reason.empty());
    const ScalarField faint = sample_field(g, [](const Vec& x) { return 1e-10 * x[1]; });
    const FbcCheck flat = check_fbc(faint, law, origin_node(*g), TestProfileFamily{}, 0.05, law.M);
    CHECK(flat.skipped);
    CHECK_THROWS_AS(check_fbc(shifted, law, origin_node(*g), TestProfileFamily{}, 0.05, law.M), InputError);
    CHECK_THROWS_AS(check_fbc(faint, law, origin_node(*g), TestProfileFamily{}, 0.0, law.M), InputError);
}

TEST_CASE("larger slack never adds violations on the exact field") {
    const auto g = GridSpec::build(2, 1.0, 1.0 / 32);
    const JumpLaw law = JumpLaw::sqrt1p();
    const ScalarField exact = plane_with_slopes(g, g_eval(law, 1.0), 1.0);
    const NodeId o = origin_node(*g);
    for (double slack : {0.05, 0.1, 0.2, 0.5}) {
        CHECK(check_fbc(exact, law, o, TestProfileFamily{}, slack, law.M).violations.empty());
    }
}

TEST_CASE("case-1 detection switches off near the true slope excess") {
    const JumpLaw law = JumpLaw::sqrt1p();
    const double s = 0.2;
    const double alpha = g_eval(law, 1.0) + s;
    double previous_overshoot = 1.0;
    for (double h : {1.0 / 32, 1.0 / 64}) {
        const auto g = GridSpec::build(2, 1.0, h);
        const ScalarField u = plane_with_slopes(g, alpha, 1.0);
        const NodeId o = origin_node(*g);
        double first_clean = -1.0;
        int previous = 1 << 30;
        for (int k = 1; k <= 120; ++k) {
            const double slack = 0.0025 * k;
            const int c1 = count_kind(check_fbc(u, law, o, TestProfileFamily{}, slack, law.M).violations,
                                      ViolationKind::fbc_case1);
            CHECK(c1 <= previous);
            previous = c1;
            if (c1 == 0 && first_clean < 0.0) first_clean = slack;
        }
        REQUIRE(first_clean > 0.0);
        CHECK(previous == 0);
        CHECK(first_clean >= s - 4.0 * h * (alpha + 1.0));
        // Contact within h^2 lets slightly steeper profiles count as touching;
        // the excess is below h and shrinks with it.
        const double overshoot = first_clean - s;
        CHECK(overshoot <= h);
        CHECK(overshoot < previous_overshoot);
        previous_overshoot = overshoot;
    }
}

TEST_CASE("violation kinds print") {
    CHECK(to_string(ViolationKind::touched_from_above) != to_string(ViolationKind::touched_from_below));
    CHECK(to_string(ViolationKind::fbc_case1) != to_string(ViolationKind::fbc_case2));
}

}
