#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fbp/errors.hpp"
#include "fbp/solver.hpp"

using namespace fbp;

namespace {

double max_diff(const ScalarField& a, const ScalarField& b) {
    double d = 0.0;
    for (NodeId id = 0; id < static_cast<NodeId>(a.grid().size()); ++id) d = std::max(d, std::abs(a[id] - b[id]));
    return d;
}

// Plain Gauss-Seidel for the 5-point Laplacian, shell nodes fixed.
ScalarField laplace_oracle(const GridPtr& g, const BoundaryData& data) {
    ScalarField u(g, 0.0);
    for (NodeId id = 0; id < static_cast<NodeId>(g->size()); ++id)
        if (g->on_shell(id)) u[id] = data(g->position(id));
    for (int sweep = 0; sweep < 200000; ++sweep) {
        double change = 0.0;
        for (NodeId id = 0; id < static_cast<NodeId>(g->size()); ++id) {
            if (g->on_shell(id)) continue;
            double s = 0.0;
            for (int axis = 0; axis < g->dim(); ++axis)
                for (int side : {-1, 1}) s += u[g->neighbor(id, axis, side)];
            const double v = s / (2.0 * g->dim());
            change = std::max(change, std::abs(v - u[id]));
            u[id] = v;
        }
        if (change < 1e-14) break;
    }
    return u;
}

TwoPlane tilted_plane(double beta) {
    return TwoPlane::make(JumpLaw::sqrt1p(), beta, Vec{std::sin(0.3), std::cos(0.3)}, Vec{0.05, -0.1}, 2);
}

SolveResult solve_plane(double h, const TwoPlane& p) {
    const auto g = GridSpec::build(2, 1.0, h);
    return solve_dirichlet(g, OperatorSpec::laplace(), JumpLaw::sqrt1p(), [&p](const Vec& x) { return p(x); },
                           SolveConfig{});
}

}  // namespace

TEST_SUITE("solver") {

TEST_CASE("aligned two-plane data reproduces the two-plane solution") {
    const TwoPlane p = TwoPlane::make(JumpLaw::sqrt1p(), 1.0, Vec{0.0, 1.0}, Vec{}, 2);
    const SolveResult r = solve_plane(1.0 / 32, p);
    REQUIRE(r.converged);
    const double err = max_diff(r.field, two_plane_field(r.field.grid_ptr(), p));
    CHECK(err <= 2.0 / 32 * (p.alpha + p.beta));
    CHECK(r.degenerate_nodes == 0);
}

TEST_CASE("zero data converges at once to zero") {
    const auto g = GridSpec::build(2, 1.0, 1.0 / 16);
    const SolveResult r =
        solve_dirichlet(g, OperatorSpec::laplace(), JumpLaw::sqrt1p(), [](const Vec&) { return 0.0; }, SolveConfig{});
    CHECK(r.converged);
    CHECK(r.iterations == 1);
    for (double v : r.field.values()) CHECK(v == 0.0);
}

TEST_CASE("positive data gives the harmonic extension") {
    const auto g = GridSpec::build(2, 1.0, 1.0 / 16);
    const BoundaryData data = [](const Vec& x) { return 2.0 + 0.5 * std::sin(3.0 * x[0] + 1.0) * std::cos(2.0 * x[1]); };
    SolveConfig cfg;
    cfg.tolerance = 1e-13;
    const SolveResult r = solve_dirichlet(g, OperatorSpec::laplace(), JumpLaw::sqrt1p(), data, cfg);
    REQUIRE(r.converged);
    CHECK(max_diff(r.field, laplace_oracle(g, data)) <= 1e-9);
}

TEST_CASE("residual of exact and mismatched two-planes") {
    const auto g = GridSpec::build(2, 1.0, 1.0 / 32);
    const JumpLaw law = JumpLaw::sqrt1p();
    const TwoPlane p = TwoPlane::make(law, 1.0, Vec{0.0, 1.0}, Vec{}, 2);
    const Residual exact = residual(two_plane_field(g, p), OperatorSpec::laplace(), law);
    CHECK(exact.fbc_residual <= 1.0 / 32);
    CHECK(exact.pde_residual <= 1e-12);
    TwoPlane off = p;
    off.alpha = p.alpha + 0.5;
    const Residual bad = residual(two_plane_field(g, off), OperatorSpec::laplace(), law);
    CHECK(bad.fbc_residual == doctest::Approx(0.5).epsilon(0.05));
    const Residual flat = residual(ScalarField(g, 1.0), OperatorSpec::laplace(), law);
    CHECK(flat.pde_residual == 0.0);
    CHECK(flat.fbc_residual == 0.0);
}

TEST_CASE("interface derivatives of two-plane fields") {
    const auto g = GridSpec::build(2, 1.0, 1.0 / 32);
    const JumpLaw law = JumpLaw::sqrt1p();
    const NodeId origin = g->find(Lattice{0, 0});
    const ScalarField u = two_plane_field(g, TwoPlane::make(law, 1.0, Vec{0.0, 1.0}, Vec{}, 2));
    const InterfaceDerivatives d = interface_derivatives(u, origin, law);
    CHECK_FALSE(d.degenerate);
    CHECK(std::abs(d.nu[0]) <= 1e-9);
    CHECK(d.nu[1] == doctest::Approx(1.0));
    CHECK(d.u_nu_plus == doctest::Approx(std::sqrt(2.0)).epsilon(1e-6));
    CHECK(d.u_nu_minus == doctest::Approx(1.0).epsilon(1e-6));

    const ScalarField id2 = two_plane_field(g, TwoPlane::make(JumpLaw::identity(), 2.0, Vec{0.0, 1.0}, Vec{}, 2));
    const InterfaceDerivatives e = interface_derivatives(id2, origin, JumpLaw::identity());
    CHECK(e.u_nu_plus == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(e.u_nu_minus == doctest::Approx(2.0).epsilon(1e-6));

    const ScalarField ramp = two_plane_field(g, TwoPlane::make(law, 0.0, Vec{0.0, 1.0}, Vec{}, 2));
    const InterfaceDerivatives f = interface_derivatives(ramp, origin, law);
    CHECK(f.u_nu_minus == doctest::Approx(0.0).scale(1.0));
    CHECK(f.u_nu_plus == doctest::Approx(1.0).epsilon(1e-6));

    const InterfaceDerivatives flat = interface_derivatives(ScalarField(g, 0.0), origin, law);
    CHECK(flat.degenerate);
}

TEST_CASE("converged solves meet the tolerance and the history keeps improving") {
    const SolveResult r = solve_plane(1.0 / 32, tilted_plane(0.8));
    REQUIRE(r.converged);
    CHECK(std::max(r.pde_residual, r.fbc_residual) <= SolveConfig{}.tolerance);
    CHECK(static_cast<int>(r.history.size()) == r.iterations);
    double previous = INFINITY;
    for (std::size_t start = 0; start < r.history.size(); start += 50) {
        const auto end = r.history.begin() + static_cast<std::ptrdiff_t>(std::min(start + 50, r.history.size()));
        const double window = *std::min_element(r.history.begin() + static_cast<std::ptrdiff_t>(start), end);
        CHECK(window <= previous);
        previous = window;
    }
}

TEST_CASE("tilted two-plane data is reproduced on every grid") {
    const TwoPlane p = tilted_plane(1.0);
    for (double h : {1.0 / 16, 1.0 / 32, 1.0 / 64}) {
        const SolveResult r = solve_plane(h, p);
        REQUIRE(r.converged);
        CHECK(max_diff(r.field, two_plane_field(r.field.grid_ptr(), p)) <= 1e-8);
    }
}

TEST_CASE("perturbed two-plane data: successive grids get closer") {
    const TwoPlane p = tilted_plane(1.0);
    const BoundaryData data = [&p](const Vec& x) { return p(x) + 0.1 * std::sin(std::numbers::pi * x[0]); };
    std::vector<SolveResult> runs;
    for (double h : {1.0 / 16, 1.0 / 32, 1.0 / 64}) {
        runs.push_back(solve_dirichlet(GridSpec::build(2, 1.0, h), OperatorSpec::laplace(), JumpLaw::sqrt1p(), data,
                                       SolveConfig{}));
        REQUIRE(runs.back().converged);
    }
    // Differences on the coarse lattice, embedded by doubling.
    auto gap = [](const ScalarField& coarse, const ScalarField& fine) {
        double d = 0.0;
        for (NodeId id = 0; id < static_cast<NodeId>(coarse.grid().size()); ++id) {
            Lattice z = coarse.grid().lattice(id);
            for (int& c : z) c *= 2;
            d = std::max(d, std::abs(coarse[id] - fine[fine.grid().find(z)]));
        }
        return d;
    };
    const double d1 = gap(runs[0].field, runs[1].field);
    const double d2 = gap(runs[1].field, runs[2].field);
    CHECK(d2 <= 0.7 * d1);
}

TEST_CASE("data below a two-plane stays below it") {
    const auto g = GridSpec::build(2, 1.0, 1.0 / 32);
    const TwoPlane p = tilted_plane(1.0);
    const SolveResult r = solve_dirichlet(g, OperatorSpec::laplace(), JumpLaw::sqrt1p(),
                                          [&p](const Vec& x) { return p(x) - 0.1 * (1.0 + x[0]); }, SolveConfig{});
    REQUIRE(r.converged);
    const ScalarField w = two_plane_field(g, p);
    const double slack = 2.0 * g->spacing() * (p.alpha + p.beta);
    for (NodeId id = 0; id < static_cast<NodeId>(g->size()); ++id) CHECK(r.field[id] <= w[id] + slack);
}

TEST_CASE("identity law: rescaling and sign symmetry") {
    const JumpLaw law = JumpLaw::identity();
    const OperatorSpec op = OperatorSpec::laplace();
    const SolveConfig cfg;
    const BoundaryData data = [](const Vec& x) { return x[1] + 0.3 * x[0] * x[0] - 0.1 + 0.2 * std::sin(3.0 * x[0]); };
    const auto g1 = GridSpec::build(2, 1.0, 1.0 / 32);
    const SolveResult a = solve_dirichlet(g1, op, law, data, cfg);
    REQUIRE(a.converged);

    const SolveResult b = solve_dirichlet(g1, op, law, [&](const Vec& x) { return -data(x); }, cfg);
    REQUIRE(b.converged);
    for (NodeId id = 0; id < static_cast<NodeId>(g1->size()); ++id) CHECK(std::abs(a.field[id] + b.field[id]) <= 1e-8);

    // Same lattice on the ball of radius 2 with data 2 g(x / 2).
    const auto g2 = GridSpec::build(2, 2.0, 1.0 / 16);
    const SolveResult c =
        solve_dirichlet(g2, op, law, [&](const Vec& x) { return 2.0 * data(Vec{x[0] / 2.0, x[1] / 2.0}); }, cfg);
    REQUIRE(c.converged);
    for (NodeId id = 0; id < static_cast<NodeId>(g1->size()); ++id) {
        CHECK(std::abs(c.field[g2->find(g1->lattice(id))] / 2.0 - a.field[id]) <= 2.0 * cfg.tolerance);
    }
}

TEST_CASE("Pucci operators keep two-plane solutions") {
    const auto g = GridSpec::build(2, 1.0, 1.0 / 16);
    const TwoPlane p = TwoPlane::make(JumpLaw::sqrt1p(), 1.0, Vec{0.0, 1.0}, Vec{}, 2);
    SolveConfig cfg;
    cfg.tolerance = 1e-8;
    const SolveResult r = solve_dirichlet(g, OperatorSpec::pucci_max(0.5, 2.0), JumpLaw::sqrt1p(),
                                          [&p](const Vec& x) { return p(x); }, cfg);
    REQUIRE(r.converged);
    CHECK(max_diff(r.field, two_plane_field(g, p)) <= 2.0 / 16 * (p.alpha + p.beta));
}

TEST_CASE("iteration cap is reported, not thrown") {
    SolveConfig cfg;
    cfg.max_iterations = 3;
    const auto g = GridSpec::build(2, 1.0, 1.0 / 16);
    const TwoPlane p = tilted_plane(1.0);
    const SolveResult r =
        solve_dirichlet(g, OperatorSpec::laplace(), JumpLaw::sqrt1p(), [&p](const Vec& x) { return p(x); }, cfg);
    CHECK_FALSE(r.converged);
    CHECK(r.iterations == 3);
}

TEST_CASE("solver configuration is validated") {
    SolveConfig cfg;
    cfg.tolerance = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = SolveConfig{};
    cfg.damping = 1.5;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = SolveConfig{};
    cfg.max_iterations = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = SolveConfig{};
    cfg.relaxation = 2.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    CHECK(default_relaxation(*GridSpec::build(2, 1.0, 1.0 / 32)) > 1.0);
    CHECK(default_relaxation(*GridSpec::build(2, 1.0, 1.0 / 32)) < 2.0);
}

TEST_CASE("fixed nodes: shell only for the Laplacian") {
    const auto g = GridSpec::build(2, 1.0, 1.0 / 16);
    const auto lap = fixed_node_mask(*g, OperatorSpec::laplace());
    const auto pucci = fixed_node_mask(*g, OperatorSpec::pucci_max(0.5, 2.0));
    for (NodeId id = 0; id < static_cast<NodeId>(g->size()); ++id) {
        CHECK(static_cast<bool>(lap[id]) == g->on_shell(id));
        if (g->on_shell(id)) CHECK(pucci[id]);
        if (!pucci[id]) CHECK(has_hessian_stencil(*g, id));
    }
}

}
