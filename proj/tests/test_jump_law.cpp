#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "fbp/errors.hpp"
#include "fbp/jump_law.hpp"

using namespace fbp;

namespace {

std::vector<JumpLaw> sample_laws() {
    return {JumpLaw::sqrt1p(), JumpLaw::identity(), JumpLaw::linear(2.0, 0.5),
            JumpLaw::tabulated({0.0, 1.0, 2.0, 10.0}, {0.5, 1.0, 3.0, 11.0}),
            rescale_law(JumpLaw::sqrt1p(), 0.25, 0.5)};
}

}  // namespace

TEST_SUITE("jump_law") {

TEST_CASE("law values") {
    CHECK(g_eval(JumpLaw::sqrt1p(), 0.0) == 1.0);
    CHECK(g_eval(JumpLaw::sqrt1p(), 1.0) == doctest::Approx(1.41421356).epsilon(1e-8));
    CHECK(g_eval(JumpLaw::identity(), 5.0) == 5.0);
    const JumpLaw tab = JumpLaw::tabulated({0.0, 1.0, 3.0}, {1.0, 2.0, 6.0});
    CHECK(g_eval(tab, 0.5) == doctest::Approx(1.5));
    CHECK(g_eval(tab, 2.0) == doctest::Approx(4.0));
    CHECK(g_eval(tab, 4.0) == doctest::Approx(8.0));
    CHECK_THROWS_AS(g_eval(JumpLaw::sqrt1p(), -0.1), DomainError);
}

TEST_CASE("law invariants") {
    CHECK_THROWS_AS(JumpLaw::tabulated({0.0, 1.0, 1.0}, {0.0, 1.0, 2.0}), ConfigError);
    CHECK_THROWS_AS(JumpLaw::tabulated({0.0, 1.0, 2.0}, {0.0, 2.0, 1.0}), ConfigError);
    CHECK_THROWS_AS(JumpLaw::linear(0.0, 1.0).validate(), ConfigError);
    JumpLaw bad_sigma = JumpLaw::sqrt1p();
    bad_sigma.sigma = 1.5;
    CHECK_THROWS_AS(bad_sigma.validate(), ConfigError);
    CHECK_NOTHROW(JumpLaw::sqrt1p().validate());
}

TEST_CASE("every law is strictly increasing on samples") {
    for (const JumpLaw& law : sample_laws()) {
        double previous = g_eval(law, 0.0);
        for (int i = 1; i <= 2000; ++i) {
            const double v = g_eval(law, 0.01 * i);
            CHECK(v > previous);
            previous = v;
        }
    }
}

TEST_CASE("asymptotics of the square-root law against its symbolic derivatives") {
    const JumpLaw law = JumpLaw::sqrt1p();
    const AsymptoticsReport r = check_asymptotics(law, 1e3, 0.1);
    CHECK(r.limit_ok);
    CHECK(r.second_order_ok);
    // G'(t) = t / sqrt(1 + t^2): |G'(1) - 1| = 0.29 > 0.1, and the band
    // |G' - 1| <= 0.1 holds exactly for t >= 0.9 / sqrt(0.19) = 2.065.
    CHECK_FALSE(r.band_ok);
    JumpLaw shifted = law;
    shifted.M = 2.1;
    const AsymptoticsReport s = check_asymptotics(shifted, 1e3, 0.1);
    CHECK(s.limit_ok);
    CHECK(s.second_order_ok);
    CHECK(s.band_ok);
    shifted.M = 2.0;
    CHECK_FALSE(check_asymptotics(shifted, 1e3, 0.1).band_ok);
    // |t G''(t)| = t / (1 + t^2)^{3/2} is decreasing on [1, inf), so its max on
    // the sample grid is at t = M = 1.
    CHECK(r.second_order_constant == doctest::Approx(1.0 / std::pow(2.0, 1.5)).epsilon(1e-4));
    CHECK(r.second_order_constant <= 1.0);
    const double t = 1e3;
    CHECK(r.tail_slope_gap == doctest::Approx(1.0 - t / std::sqrt(1.0 + t * t)).epsilon(1e-3));
}

TEST_CASE("asymptotics of linear laws") {
    const AsymptoticsReport two = check_asymptotics(JumpLaw::linear(2.0, 0.0), 1e3, 0.5);
    CHECK_FALSE(two.limit_ok);
    CHECK_FALSE(two.band_ok);
    const AsymptoticsReport one = check_asymptotics(JumpLaw::identity(), 1e3, 0.1);
    CHECK(one.limit_ok);
    CHECK(one.second_order_ok);
    CHECK(one.band_ok);
    CHECK(one.second_order_constant == doctest::Approx(0.0).scale(1.0));
    CHECK(one.tail_slope_gap == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("two-sided bound") {
    CHECK(check_two_sided(JumpLaw::sqrt1p(), 0.5, 1e3));
    CHECK(check_two_sided(JumpLaw::identity(), 1.0, 1e3));
    CHECK(check_two_sided(JumpLaw::identity(), 0.3, 1e3));
    std::vector<double> t, g;
    for (int i = 0; i <= 99; ++i) {
        t.push_back(1.0 + i);
        g.push_back((1.0 + i) * (1.0 + i));
    }
    JumpLaw square = JumpLaw::tabulated(t, g);
    square.M = 1.0;
    CHECK_FALSE(check_two_sided(square, 0.5, 100.0));
    // Direct evaluation at t = 10: G = 100 > 2 t.
    CHECK(g_eval(square, 10.0) > 10.0 / 0.5);
}

TEST_CASE("rescaled laws") {
    const JumpLaw base = JumpLaw::sqrt1p();
    const JumpLaw same = rescale_law(base, 1.0, 0.5);
    for (double t : {0.0, 0.3, 1.0, 7.0, 100.0}) {
        CHECK(g_eval(same, t) == doctest::Approx(g_eval(base, t)).epsilon(1e-5));
    }
    const JumpLaw id = rescale_law(JumpLaw::identity(), 0.3, 0.4);
    for (double t : {0.0, 0.3, 1.0, 7.0, 100.0}) CHECK(g_eval(id, t) == doctest::Approx(t).epsilon(1e-9).scale(1.0));

    const JumpLaw quarter = rescale_law(base, 0.25, 0.5);
    CHECK(g_eval(quarter, 0.0) == doctest::Approx(0.5).epsilon(1e-12));
    for (double t = 0.0; t <= 50.0; t += 0.37) {
        CHECK(g_eval(quarter, t) == doctest::Approx(std::sqrt(0.25 + t * t)).epsilon(1e-4));
    }
    CHECK(check_two_sided(quarter, 0.5, 1e3));
}

TEST_CASE("rescaling composes") {
    const JumpLaw base = JumpLaw::sqrt1p();
    const JumpLaw twice = rescale_law(rescale_law(base, 0.5, 0.3), 0.4, 0.3);
    const JumpLaw once = rescale_law(base, 0.2, 0.3);
    for (double t = 0.0; t <= 100.0; t += 0.71) {
        CHECK(g_eval(twice, t) == doctest::Approx(g_eval(once, t)).epsilon(1e-4));
    }
}

TEST_CASE("rescale arguments are validated") {
    CHECK_THROWS_AS(rescale_law(JumpLaw::sqrt1p(), 0.0, 0.5), InputError);
    CHECK_THROWS_AS(rescale_law(JumpLaw::sqrt1p(), 1.5, 0.5), InputError);
    CHECK_THROWS_AS(rescale_law(JumpLaw::sqrt1p(), 0.5, 1.0), InputError);
}

TEST_CASE("two-plane profiles") {
    const auto g = GridSpec::build(2, 1.0, 1.0 / 8);
    const JumpLaw law = JumpLaw::sqrt1p();
    const TwoPlane p = TwoPlane::make(law, 1.0, Vec{0.0, 2.0}, Vec{}, 2);
    CHECK(p.alpha == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    CHECK(p.nu[1] == 1.0);
    CHECK(p(Vec{0.3, 1.0}) == doctest::Approx(std::sqrt(2.0)));
    CHECK(p(Vec{0.3, -1.0}) == doctest::Approx(-1.0));
    const TwoPlane ramp = TwoPlane::make(law, 0.0, Vec{0.0, 1.0}, Vec{}, 2);
    CHECK(ramp.alpha == 1.0);
    const ScalarField f = two_plane_field(g, ramp);
    for (NodeId id = 0; id < static_cast<NodeId>(g->size()); ++id) {
        if (g->position(id)[1] <= 0.0) CHECK(f[id] == 0.0);
    }
    CHECK_THROWS_AS(TwoPlane::make(law, -1.0, Vec{0.0, 1.0}, Vec{}, 2), InputError);
    CHECK_THROWS_AS(TwoPlane::make(law, 1.0, Vec{}, Vec{}, 2), InputError);
}

TEST_CASE("two-plane slopes measured away from the band") {
    const auto g = GridSpec::build(2, 1.0, 1.0 / 16);
    const JumpLaw law = JumpLaw::sqrt1p();
    const Vec nu{std::sin(0.4), std::cos(0.4)};
    const TwoPlane p = TwoPlane::make(law, 1.3, nu, Vec{0.1, -0.05}, 2);
    const ScalarField f = two_plane_field(g, p);
    const double h = g->spacing();
    for (NodeId id = 0; id < static_cast<NodeId>(g->size()); ++id) {
        if (g->on_shell(id)) continue;
        const Vec x = g->position(id);
        const double s = (x[0] - 0.1) * nu[0] + (x[1] + 0.05) * nu[1];
        if (std::abs(s) <= 1.5 * h) continue;
        const Vec grad = gradient_at(f, id).value;
        const double slope = grad[0] * nu[0] + grad[1] * nu[1];
        CHECK(std::abs(slope - (s > 0.0 ? p.alpha : p.beta)) <= 1e-10);
        CHECK((f[id] > 0.0) == (s > 0.0));
    }
}

TEST_CASE("identity law planes have continuous gradient magnitude") {
    for (double beta : {0.5, 1.0, 3.0}) {
        const TwoPlane p = TwoPlane::make(JumpLaw::identity(), beta, Vec{1.0, 1.0}, Vec{}, 2);
        CHECK(p.alpha == p.beta);
        const JumpLaw r = rescale_law(JumpLaw::identity(), 0.5, 0.5);
        CHECK(g_eval(r, beta) == doctest::Approx(beta));
    }
}

TEST_CASE("law tables from CSV") {
    const auto path = std::filesystem::temp_directory_path() / "fbp_law_table.csv";
    {
        std::ofstream out(path);
        out << "# t,G\n0,1\n1,2\n2,4\n";
    }
    const JumpLaw law = read_law_table(path.string());
    CHECK(law.kind == LawKind::tabulated);
    CHECK(g_eval(law, 1.5) == doctest::Approx(3.0));
    {
        std::ofstream out(path);
        out << "0,1\n1,0.5\n";
    }
    CHECK_THROWS_AS(read_law_table(path.string()), ConfigError);
    std::filesystem::remove(path);
}

}
