#include "fbp/regularity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "fbp/errors.hpp"

namespace fbp {

namespace {

constexpr double kGolden = 0.6180339887498949;
constexpr double kRadiusSlack = 1e-12;

template <class Fn>
double golden_min(Fn&& f, double lo, double hi, double tol) {
    double a = hi - kGolden * (hi - lo);
    double b = lo + kGolden * (hi - lo);
    double fa = f(a);
    double fb = f(b);
    while (hi - lo > tol) {
        if (fa <= fb) {
            hi = b;
            b = a;
            fb = fa;
            a = hi - kGolden * (hi - lo);
            fa = f(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + kGolden * (hi - lo);
            fb = f(b);
        }
    }
    return fa <= fb ? a : b;
}

void check_floor(const GridSpec& g, double r) {
    if (r < kResolutionFloor * g.spacing() - kRadiusSlack) {
        throw ResolutionError("radius " + std::to_string(r) + " is below the 8h resolution floor");
    }
}

bool sign_change_near_origin(const ScalarField& field) {
    const GridSpec& g = field.grid();
    const double reach = std::sqrt(static_cast<double>(g.dim())) * g.spacing() + kRadiusSlack;
    bool pos = false;
    bool nonpos = false;
    for (NodeId id = 0; id < static_cast<NodeId>(g.size()); ++id) {
        if (g.distance(id) > reach) continue;
        (field[id] > 0.0 ? pos : nonpos) = true;
    }
    return pos && nonpos;
}

double oscillation(const ScalarField& field, double r) {
    const GridSpec& g = field.grid();
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (NodeId id = 0; id < static_cast<NodeId>(g.size()); ++id) {
        if (g.distance(id) > r + kRadiusSlack) continue;
        lo = std::min(lo, field[id]);
        hi = std::max(hi, field[id]);
    }
    return hi - lo;
}

// Least-squares slope of y against x.
double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double den = n * sxx - sx * sx;
    return den == 0.0 ? 0.0 : (n * sxy - sx * sy) / den;
}

// Nodes of B_r(center) as offsets from the center, with their values.
struct Patch {
    int n = 2;
    std::vector<Vec> offset;
    std::vector<double> value;
};

Patch gather(const ScalarField& field, double r, const Vec& center) {
    const GridSpec& g = field.grid();
    Patch p;
    p.n = g.dim();
    for (NodeId id = 0; id < static_cast<NodeId>(g.size()); ++id) {
        const Vec x = g.position(id);
        Vec d{};
        for (int i = 0; i < p.n; ++i) d[i] = x[i] - center[i];
        if (norm(d, p.n) > r + kRadiusSlack) continue;
        p.offset.push_back(d);
        p.value.push_back(field[id]);
    }
    return p;
}

double patch_flatness(const Patch& p, const Vec& nu, double alpha, double beta) {
    double worst = 0.0;
    for (std::size_t k = 0; k < p.value.size(); ++k) {
        const double s = dot(p.offset[k], nu, p.n);
        const double plane = s > 0.0 ? alpha * s : beta * s;
        worst = std::max(worst, std::abs(p.value[k] - plane));
    }
    return worst;
}

Vec normalized(const Vec& v, int n) {
    const double len = norm(v, n);
    Vec out{};
    for (int i = 0; i < n; ++i) out[i] = v[i] / len;
    return out;
}

// Orthonormal basis of the tangent space at nu.
std::vector<Vec> tangent_basis(const Vec& nu, int n) {
    std::vector<Vec> basis;
    for (int e = 0; e < n && static_cast<int>(basis.size()) < n - 1; ++e) {
        Vec t{};
        t[e] = 1.0;
        const double along = t[e] * nu[e];
        for (int i = 0; i < n; ++i) t[i] -= along * nu[i];
        for (const Vec& b : basis) {
            const double c = dot(t, b, n);
            for (int i = 0; i < n; ++i) t[i] -= c * b[i];
        }
        if (norm(t, n) > 1e-6) basis.push_back(normalized(t, n));
    }
    return basis;
}

std::vector<Vec> coarse_directions(int n) {
    const int count = 2 * n * 16;
    std::vector<Vec> out;
    if (n == 2) {
        for (int j = 0; j < count; ++j) {
            const double t = 2.0 * std::numbers::pi * j / count;
            out.push_back(Vec{std::cos(t), std::sin(t)});
        }
        return out;
    }
    std::mt19937_64 rng(0x5eed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    while (static_cast<int>(out.size()) < count) {
        Vec v{};
        for (int i = 0; i < n; ++i) v[i] = gauss(rng);
        if (norm(v, n) > 1e-3) out.push_back(normalized(v, n));
    }
    return out;
}

}  // namespace

DecayReport dyadic_decay(const ScalarField& field, double delta, double L0) {
    if (!(delta >= 0.25 && delta <= 0.75)) throw InputError("delta must lie in [1/4, 3/4]");
    if (!(L0 >= 0.0)) throw InputError("L0 must be non-negative");
    const GridSpec& g = field.grid();
    const double R = g.radius();
    check_floor(g, R);

    DecayReport rep;
    rep.delta = delta;
    rep.L0 = L0;
    rep.sup_norm = sup_norm_on_ball(field, R);
    rep.centered = sign_change_near_origin(field);
    std::vector<double> log_r, log_osc;
    for (double r = R; r >= kResolutionFloor * g.spacing() - kRadiusSlack; r *= delta) {
        rep.radii.push_back(r);
        rep.a_values.push_back(sup_norm_on_ball(field, r) / r);
        const double osc = oscillation(field, r);
        if (osc > 0.0) {
            log_r.push_back(std::log(r));
            log_osc.push_back(std::log(osc));
        }
    }
    rep.k_max = static_cast<int>(rep.radii.size()) - 1;
    const double scale = std::max(rep.sup_norm, L0);
    const double a_max = *std::max_element(rep.a_values.begin(), rep.a_values.end());
    rep.C_fit = scale > 0.0 ? a_max / scale : 0.0;
    rep.holder_exponent_fit = log_r.size() >= 2 ? fit_slope(log_r, log_osc) : 0.0;
    return rep;
}

ClaimDecay claim_decay(const ScalarField& field, const std::vector<double>& delta_grid) {
    const GridSpec& g = field.grid();
    const double R = g.radius();
    const double sup = sup_norm_on_ball(field, R);
    if (std::abs(sup - 1.0) > 1e-6) throw InputError("claim_decay needs sup |u| normalized to 1");
    if (!sign_change_near_origin(field)) throw InputError("the origin is not on the free boundary");

    ClaimDecay out;
    for (double delta : delta_grid) {
        if (!(delta > 0.0 && delta < 1.0)) throw InputError("delta values must lie in (0, 1)");
        if (delta * R < g.spacing()) continue;
        if (sup_norm_on_ball(field, delta * R) <= 1.0 - delta + kRadiusSlack && delta > out.best_delta) {
            out.best_delta = delta;
            out.holds = true;
        }
    }
    return out;
}

Dichotomy dichotomy(const ScalarField& field, double delta, double L0, double C) {
    if (!(delta > 0.0 && delta < 1.0)) throw InputError("delta must lie in (0, 1)");
    const GridSpec& g = field.grid();
    const int n = g.dim();
    const double R = g.radius();
    Dichotomy out;
    out.sup_norm = sup_norm_on_ball(field, R);
    out.sup_inner = sup_norm_on_ball(field, delta * R);
    for (NodeId id = 0; id < static_cast<NodeId>(g.size()); ++id) {
        if (g.on_shell(id) || g.distance(id) > delta * R + kRadiusSlack) continue;
        out.max_gradient = std::max(out.max_gradient, norm(gradient_at(field, id).value, n));
    }
    out.lipschitz_holds = out.max_gradient <= C * std::max(out.sup_norm, L0);
    out.decay_holds = out.sup_inner / delta <= 0.5 * out.sup_norm;
    return out;
}

double flatness(const ScalarField& field, const TwoPlane& plane, double r) {
    const GridSpec& g = field.grid();
    if (plane.dim != g.dim()) throw InputError("plane dimension does not match the grid");
    check_floor(g, r);
    const Patch p = gather(field, r, plane.x0);
    return patch_flatness(p, plane.nu, plane.alpha, plane.beta) / r;
}

TwoPlane best_fit_plane(const ScalarField& field, double r, const JumpLaw& law) {
    return best_fit_plane(field, r, law, Vec{});
}

TwoPlane best_fit_plane(const ScalarField& field, double r, const JumpLaw& law, const Vec& center) {
    const GridSpec& g = field.grid();
    const int n = g.dim();
    check_floor(g, r);
    const Patch p = gather(field, r, center);
    const bool pos = std::any_of(p.value.begin(), p.value.end(), [](double v) { return v > 0.0; });
    const bool nonpos = std::any_of(p.value.begin(), p.value.end(), [](double v) { return v <= 0.0; });
    if (!pos || !nonpos) throw NoInterfaceError("field does not change sign in the fitting ball");

    double u_max = 0.0;
    for (double v : p.value) u_max = std::max(u_max, std::abs(v));
    const double beta_hi = 4.0 * u_max / r + 1.0;

    auto best_beta = [&](const Vec& nu) {
        auto f = [&](double b) { return patch_flatness(p, nu, g_eval(law, b), b); };
        const double b = golden_min(f, 0.0, beta_hi, 1e-9 * beta_hi);
        return std::pair{b, f(b)};
    };

    const auto dirs = coarse_directions(n);
    Vec nu = dirs.front();
    double best = std::numeric_limits<double>::infinity();
    for (const Vec& d : dirs) {
        const double v = best_beta(d).second;
        if (v < best) {
            best = v;
            nu = d;
        }
    }

    // Angular spacing of the coarse set: exact on the circle, a covering
    // estimate on higher spheres.
    double window = n == 2 ? 2.0 * std::numbers::pi / static_cast<double>(dirs.size()) : 0.5;
    for (int round = 0; round < 3; ++round, window *= 0.5) {
        for (const Vec& t : tangent_basis(nu, n)) {
            auto rotated = [&](double a) {
                Vec v{};
                for (int i = 0; i < n; ++i) v[i] = std::cos(a) * nu[i] + std::sin(a) * t[i];
                return v;
            };
            const double a = golden_min([&](double s) { return best_beta(rotated(s)).second; }, -window,
                                        window, 1e-8);
            const Vec cand = normalized(rotated(a), n);
            const double v = best_beta(cand).second;
            if (v < best) {
                best = v;
                nu = cand;
            }
        }
    }
    const double beta = best_beta(nu).first;
    return TwoPlane::make(law, beta, nu, center, n);
}

Vec free_boundary_point_nearest_origin(const ScalarField& field) {
    const GridSpec& g = field.grid();
    const int n = g.dim();
    Vec best{};
    double best_r = std::numeric_limits<double>::infinity();
    for (NodeId id = 0; id < static_cast<NodeId>(g.size()); ++id) {
        for (int axis = 0; axis < n; ++axis) {
            const NodeId nb = g.neighbor(id, axis, +1);
            if (nb == kNoNode) continue;
            const double a = field[id];
            const double b = field[nb];
            if ((a > 0.0) == (b > 0.0)) continue;
            const double t = a == b ? 0.0 : a / (a - b);
            Vec x = g.position(id);
            x[axis] += t * g.spacing();
            const double r = norm(x, n);
            if (r < best_r) {
                best_r = r;
                best = x;
            }
        }
    }
    if (!std::isfinite(best_r)) throw NoInterfaceError("field has no sign change");
    return best;
}

FlatnessReport flatness_cascade(const ScalarField& field, const JumpLaw& law, double rho,
                                int k_max, double eps_bar, double C_tilde, const Vec& center) {
    if (!(rho >= 0.125 && rho <= 0.5)) throw InputError("rho must lie in [1/8, 1/2]");
    if (k_max < 0) throw InputError("k_max must be non-negative");
    const GridSpec& g = field.grid();
    const int n = g.dim();
    const double h = g.spacing();
    const double r0 = g.radius() - norm(center, n);
    check_floor(g, r0);

    FlatnessReport rep;
    rep.center = center;
    rep.rho = rho;
    rep.eps_bar = eps_bar;
    rep.C_tilde = C_tilde;

    double r = r0;
    for (int k = 0; k <= k_max && r >= kResolutionFloor * h - kRadiusSlack; ++k, r *= rho) {
        const TwoPlane plane = best_fit_plane(field, r, law, center);
        CascadeStep step;
        step.r = r;
        step.eps = flatness(field, plane, r);
        step.nu = plane.nu;
        step.beta = plane.beta;
        if (k == 0) {
            rep.hypothesis_met = step.eps <= eps_bar;
            rep.steps.push_back(step);
            if (!rep.hypothesis_met) return rep;
            continue;
        }
        const CascadeStep& prev = rep.steps.back();
        Vec dnu{};
        for (int i = 0; i < n; ++i) dnu[i] = step.nu[i] - prev.nu[i];
        step.halving_ok = step.eps <= prev.eps / 2.0 + 4.0 * h / r;
        step.direction_ok = norm(dnu, n) <= C_tilde * prev.eps;
        step.slope_ok = std::abs(step.beta - prev.beta) <= C_tilde * prev.beta * prev.eps;
        rep.steps.push_back(step);
    }

    rep.strictly_decreasing = true;
    rep.pattern_holds = true;
    for (std::size_t k = 1; k < rep.steps.size(); ++k) {
        const CascadeStep& s = rep.steps[k];
        rep.strictly_decreasing = rep.strictly_decreasing && s.eps < rep.steps[k - 1].eps;
        rep.pattern_holds = rep.pattern_holds && s.halving_ok && s.direction_ok && s.slope_ok;
    }

    std::vector<double> log_r, log_dnu;
    const Vec& last = rep.steps.back().nu;
    for (std::size_t k = 0; k + 1 < rep.steps.size(); ++k) {
        Vec d{};
        for (int i = 0; i < n; ++i) d[i] = rep.steps[k].nu[i] - last[i];
        const double len = norm(d, n);
        if (len > 1e-12) {
            log_r.push_back(std::log(rep.steps[k].r));
            log_dnu.push_back(std::log(len));
        }
    }
    if (log_r.size() >= 2) rep.gamma_fit = fit_slope(log_r, log_dnu);
    return rep;
}

double BarrierSpec::c() const { return c0 / (std::pow(d / 2.0, -gamma_b) - std::pow(d, -gamma_b)); }

void BarrierSpec::validate(const GridSpec& grid) const {
    if (!(gamma_b > grid.dim() - 2)) throw InvariantError("barrier exponent must exceed n - 2");
    if (!(d >= kResolutionFloor * grid.spacing() - kRadiusSlack)) {
        throw InvariantError("barrier radius d must be at least 8h");
    }
    if (!(sigma > 0.0 && sigma <= 1.0)) throw InvariantError("barrier sigma must lie in (0, 1]");
    if (!(c() > 0.0) || !std::isfinite(c())) throw InvariantError("barrier constant c must be positive");
}

double BarrierSpec::psi(double rho) const {
    if (rho <= d / 2.0) return c0;
    return c() * (std::pow(rho, -gamma_b) - std::pow(d, -gamma_b));
}

ScalarField barrier_field(const GridPtr& grid, const BarrierSpec& spec) {
    spec.validate(*grid);
    const int n = grid->dim();
    return sample_field(grid, [&](const Vec& x) {
        Vec r{};
        for (int i = 0; i < n; ++i) r[i] = x[i] - spec.x0[i];
        return spec.psi(norm(r, n));
    });
}

AnnulusLaplacian barrier_laplacian(const GridPtr& grid, const BarrierSpec& spec) {
    spec.validate(*grid);
    const GridSpec& g = *grid;
    const int n = g.dim();
    const double h = g.spacing();
    auto rho = [&](const Vec& x) {
        Vec r{};
        for (int i = 0; i < n; ++i) r[i] = x[i] - spec.x0[i];
        return norm(r, n);
    };
    AnnulusLaplacian out;
    out.min_value = std::numeric_limits<double>::infinity();
    for (NodeId id = 0; id < static_cast<NodeId>(g.size()); ++id) {
        if (g.on_shell(id)) continue;
        const Vec x = g.position(id);
        const double r = rho(x);
        if (r < spec.d / 2.0 + 2.0 * h || r > 2.0 * spec.d - 2.0 * h) continue;
        const double center = spec.psi(r);
        double lap = 0.0;
        for (int axis = 0; axis < n; ++axis) {
            for (int s : {-1, 1}) {
                Vec y = x;
                y[axis] += s * h;
                lap += spec.psi(rho(y)) - center;
            }
        }
        lap /= h * h;
        ++out.count;
        if (lap < out.min_value) {
            out.min_value = lap;
            out.node = id;
        }
    }
    if (out.count == 0) throw GeometryError("trimmed annulus contains no interior node");
    return out;
}

BarrierComparison barrier_comparison(const ScalarField& field, const BarrierSpec& spec) {
    const GridSpec& g = field.grid();
    const int n = g.dim();
    spec.validate(g);
    if (norm(spec.x0, n) + 2.0 * spec.d > g.radius() + kRadiusSlack) {
        throw GeometryError("comparison annulus leaves the grid ball");
    }
    BarrierComparison out;
    out.worst_gap = -std::numeric_limits<double>::infinity();
    for (NodeId id = 0; id < static_cast<NodeId>(g.size()); ++id) {
        const Vec x = g.position(id);
        Vec r{};
        for (int i = 0; i < n; ++i) r[i] = x[i] - spec.x0[i];
        const double rho = norm(r, n);
        if (rho < spec.d / 2.0 || rho > 2.0 * spec.d) continue;
        const double psi = spec.psi(rho);
        const double w = psi > 0.0 ? psi : 0.5 * spec.sigma * psi;
        const double gap = w - field[id];
        if (gap > out.worst_gap) {
            out.worst_gap = gap;
            out.worst_node = id;
        }
    }
    if (out.worst_node == kNoNode) throw GeometryError("comparison annulus contains no node");
    out.holds = out.worst_gap <= 1e-10;
    return out;
}

double plain_pde_residual(const ScalarField& field, const OperatorSpec& op) {
    const GridSpec& g = field.grid();
    const int n = g.dim();
    const double h2 = g.spacing() * g.spacing();
    const auto fixed = fixed_node_mask(g, op);
    double worst = 0.0;
    for (NodeId id = 0; id < static_cast<NodeId>(g.size()); ++id) {
        if (fixed[static_cast<std::size_t>(id)]) continue;
        double v = 0.0;
        if (op.kind == OperatorKind::laplace) {
            v = -2.0 * n * field[id];
            for (int axis = 0; axis < n; ++axis) {
                v += field[g.neighbor(id, axis, -1)] + field[g.neighbor(id, axis, +1)];
            }
        } else {
            v = h2 * evaluate(op, discrete_hessian(field, id));
        }
        worst = std::max(worst, std::abs(v));
    }
    return worst;
}

std::vector<LimitRow> limit_equation_residual(const JumpLaw& law, const OperatorSpec& op,
                                              const ScaledBoundary& scaled, const std::vector<double>& K_list,
                                              const GridPtr& grid, const SolveConfig& config) {
    for (std::size_t i = 0; i < K_list.size(); ++i) {
        if (!(K_list[i] >= 1.0) || (i > 0 && !(K_list[i] > K_list[i - 1]))) {
            throw InputError("K_list must be increasing with K >= 1");
        }
    }
    std::vector<LimitRow> rows;
    for (double K : K_list) {
        const SolveResult res = solve_dirichlet(grid, op, law, scaled(K), config);
        ScalarField rescaled = res.field;
        for (double& v : rescaled.values()) v /= K;
        LimitRow row;
        row.K = K;
        row.residual = plain_pde_residual(rescaled, op);
        row.g_ratio = g_eval(law, K) / K;
        row.converged = res.converged;
        row.iterations = res.iterations;
        rows.push_back(row);
    }
    return rows;
}

std::vector<LimitRow> limit_equation_residual(const JumpLaw& law, const OperatorSpec& op,
                                              const BoundaryData& base, const std::vector<double>& K_list,
                                              const GridPtr& grid, const SolveConfig& config) {
    const ScaledBoundary scaled = [&](double K) -> BoundaryData {
        return [&base, K](const Vec& x) { return K * base(x); };
    };
    return limit_equation_residual(law, op, scaled, K_list, grid, config);
}

}  // namespace fbp
