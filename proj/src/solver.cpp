#include "fbp/solver.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fbp/errors.hpp"

namespace fbp {

namespace {

constexpr double kDegenerateGradient = 1e-8;
constexpr double kBisectionTolerance = 1e-12;
constexpr int kFramePasses = 30;

// Smallest-eigenvalue estimate of -Delta on the ball, used for the SOR factor.
double bessel_first_zero(int n) {
    switch (n) {
        case 2: return 2.404825557695773;
        case 3: return std::numbers::pi;
        default: return 3.831705970207512;
    }
}

double extension_factor(const JumpLaw& law, double slope, double h) {
    const double t = std::max(slope, h);
    // Above M the two-sided bound keeps G(t)/t in [sigma, 1/sigma]; the same
    // range caps the factor where small negative slopes make it unreliable.
    return std::clamp(g_eval(law, t) / t, law.sigma, 1.0 / law.sigma);
}

// Continuation of values across the interface as seen from one phase: from the
// positive side a non-positive value v reads kappa * v, from the negative side
// a positive value v reads v / kappa. Continuous in v.
struct PhaseMap {
    bool positive = true;
    double kappa = 1.0;
    double operator()(double v) const {
        if (positive) return v > 0.0 ? v : kappa * v;
        return v > 0.0 ? v / kappa : v;
    }
};

// Multilinear interpolation of map(u) at `point`. The node `self` (if any)
// contributes `self_value` unmapped. Empty when a corner leaves the ball.
std::optional<double> interpolate_mapped(const ScalarField& u, const Vec& point, const PhaseMap& map,
                                         NodeId self, double self_value) {
    const GridSpec& g = u.grid();
    const int n = g.dim();
    Lattice base{};
    Vec frac{};
    for (int i = 0; i < n; ++i) {
        const double t = point[i] / g.spacing();
        double fl = std::floor(t);
        double f = t - fl;
        if (f > 1.0 - 1e-12) {
            fl += 1.0;
            f = 0.0;
        } else if (f < 1e-12) {
            f = 0.0;
        }
        base[i] = static_cast<int>(fl);
        frac[i] = f;
    }
    double value = 0.0;
    for (int corner = 0; corner < (1 << n); ++corner) {
        double w = 1.0;
        Lattice z = base;
        for (int i = 0; i < n; ++i) {
            const bool up = (corner >> i) & 1;
            w *= up ? frac[i] : 1.0 - frac[i];
            z[i] += up ? 1 : 0;
        }
        if (w == 0.0) continue;
        const NodeId id = g.find(z);
        if (id == kNoNode) return std::nullopt;
        value += w * (id == self ? self_value : map(u[id]));
    }
    return value;
}

// Local interface geometry at a node: the normal from the gradient of the
// positive-side continuation, the extension factor, and the one-sided slopes.
struct Frame {
    Vec nu{};
    double kappa = 1.0;
    double grad = 0.0;  // |grad| of the positive-side continuation
    double d_plus = 0.0;
    double d_minus = 0.0;
    bool degenerate = false;
};

Frame compute_frame(const ScalarField& u, NodeId x, const JumpLaw& law) {
    const GridSpec& g = u.grid();
    const int n = g.dim();
    const double h = g.spacing();
    const Vec pos = g.position(x);
    const double ux = u[x];
    Frame f;

    auto normal = [&](double kappa) {
        const PhaseMap p{true, kappa};
        Vec grad{};
        for (int axis = 0; axis < n; ++axis) {
            const NodeId plus = g.neighbor(x, axis, +1);
            const NodeId minus = g.neighbor(x, axis, -1);
            if (plus == kNoNode || minus == kNoNode) return false;
            grad[axis] = (p(u[plus]) - p(u[minus])) / (2.0 * h);
        }
        f.grad = norm(grad, n);
        if (!(f.grad >= kDegenerateGradient)) return false;
        for (int i = 0; i < n; ++i) f.nu[i] = grad[i] / f.grad;
        return true;
    };
    auto offset = [&](double s) {
        Vec y = pos;
        for (int i = 0; i < n; ++i) y[i] += s * h * f.nu[i];
        return y;
    };
    auto minus_slope = [&](double kappa) -> std::optional<double> {
        const PhaseMap m{false, kappa};
        const auto behind = interpolate_mapped(u, offset(-1.0), m, kNoNode, 0.0);
        if (!behind) return std::nullopt;
        return (m(ux) - *behind) / h;
    };

    // kappa, the normal and the negative slope depend on each other; iterate to
    // a fixed point (typically two or three passes).
    double kappa = 1.0;
    for (int pass = 0; pass < kFramePasses; ++pass) {
        if (!normal(kappa)) {
            f.degenerate = true;
            return f;
        }
        const auto dm = minus_slope(kappa);
        if (!dm) {
            f.degenerate = true;
            return f;
        }
        const double next = extension_factor(law, std::max(0.0, *dm), h);
        const bool settled = std::abs(next - kappa) <= 1e-14 * kappa;
        kappa = next;
        if (settled) break;
    }
    if (!normal(kappa)) {
        f.degenerate = true;
        return f;
    }
    const auto dm = minus_slope(kappa);
    const PhaseMap p{true, kappa};
    const auto ahead = interpolate_mapped(u, offset(1.0), p, kNoNode, 0.0);
    if (!dm || !ahead) {
        f.degenerate = true;
        return f;
    }
    f.kappa = kappa;
    f.d_minus = std::max(0.0, *dm);
    f.d_plus = std::max(0.0, (*ahead - p(ux)) / h);
    return f;
}

// F applied to s * nu nu^T.
double normal_part(const OperatorSpec& op, double s, const Vec& nu, int n) {
    switch (op.kind) {
        case OperatorKind::laplace: return s;
        case OperatorKind::pucci_max: return s > 0.0 ? op.Lambda * s : op.lambda * s;
        case OperatorKind::pucci_min: return s > 0.0 ? op.lambda * s : op.Lambda * s;
        case OperatorKind::callback: {
            SymMatrix m(n);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) m(i, j) = s * nu[i] * nu[j];
            return evaluate(op, m);
        }
    }
    return s;
}

// Hessian at `id` with center value `center`, reading stencil values through
// `value(node)`. The stencil must exist.
template <class Value>
SymMatrix stencil_hessian(const GridSpec& g, NodeId id, double center, Value&& value) {
    const int n = g.dim();
    const double h2 = g.spacing() * g.spacing();
    const Lattice z = g.lattice(id);
    auto at = [&](const Lattice& y) { return value(g.find(y)); };
    SymMatrix H(n);
    for (int i = 0; i < n; ++i) {
        Lattice p = z, m = z;
        p[i] += 1;
        m[i] -= 1;
        H(i, i) = (at(p) - 2.0 * center + at(m)) / h2;
        for (int j = i + 1; j < n; ++j) {
            Lattice pp = z, pm = z, mp = z, mm = z;
            pp[i] += 1, pp[j] += 1;
            pm[i] += 1, pm[j] -= 1;
            mp[i] -= 1, mp[j] += 1;
            mm[i] -= 1, mm[j] -= 1;
            H(i, j) = H(j, i) = (at(pp) - at(pm) - at(mp) + at(mm)) / (4.0 * h2);
        }
    }
    return H;
}

// Root of a non-increasing scalar function by bracketing from `start`, then
// bisection to kBisectionTolerance.
template <class Fn>
double decreasing_root(Fn&& phi, double start, double scale) {
    double lo = start;
    double hi = start;
    double step = std::max(scale, 1e-3 * std::abs(start) + scale);
    for (int k = 0; k < 200 && phi(lo) < 0.0; ++k, step *= 2.0) lo -= step;
    step = std::max(scale, 1e-3 * std::abs(start) + scale);
    for (int k = 0; k < 200 && phi(hi) > 0.0; ++k, step *= 2.0) hi += step;
    while (hi - lo > kBisectionTolerance * std::max(1.0, std::abs(hi))) {
        const double mid = 0.5 * (lo + hi);
        (phi(mid) > 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

// Value v at `id` solving F(H(v)) = 0 where H(v) = H(0) - (2 v / h^2) I.
double solve_node(const SymMatrix& base, int n, double h2, double current, const OperatorSpec& op) {
    if (op.kind == OperatorKind::laplace) return 0.5 * h2 * base.trace() / n;

    if (op.kind == OperatorKind::pucci_max || op.kind == OperatorKind::pucci_min) {
        const Vec mu = symmetric_eigenvalues(base);
        const double up = op.kind == OperatorKind::pucci_max ? op.Lambda : op.lambda;
        const double down = op.kind == OperatorKind::pucci_max ? op.lambda : op.Lambda;
        auto phi = [&](double v) {
            const double shift = 2.0 * v / h2;
            double total = 0.0;
            for (int i = 0; i < n; ++i) {
                const double e = mu[i] - shift;
                total += e > 0.0 ? up * e : down * e;
            }
            return total;
        };
        double lo = 0.5 * h2 * mu[0];
        double hi = 0.5 * h2 * mu[n - 1];
        if (hi - lo <= kBisectionTolerance) return 0.5 * (lo + hi);
        while (hi - lo > kBisectionTolerance * std::max(1.0, std::abs(hi))) {
            const double mid = 0.5 * (lo + hi);
            (phi(mid) > 0.0 ? lo : hi) = mid;
        }
        return 0.5 * (lo + hi);
    }

    auto phi = [&](double v) {
        SymMatrix H = base;
        for (int i = 0; i < n; ++i) H(i, i) -= 2.0 * v / h2;
        return evaluate(op, H);
    };
    return decreasing_root(phi, current, h2);
}

// Free nodes in sweep order with their axis neighbors (all exist: free nodes
// are interior), plus the extra Hessian-stencil nodes for non-Laplace
// operators. Shared by the sweep and the residual evaluation.
struct Stencils {
    int n = 0;
    int ring = 0;
    std::vector<NodeId> free_nodes;
    std::vector<NodeId> nbr;

    Stencils(const GridSpec& g, const std::vector<std::uint8_t>& fixed, bool full_hessian)
        : n(g.dim()) {
        for (NodeId id = 0; id < static_cast<NodeId>(g.size()); ++id) {
            if (!fixed[static_cast<std::size_t>(id)]) free_nodes.push_back(id);
        }
        ring = 2 * n + (full_hessian ? 2 * n * (n - 1) : 0);
        nbr.reserve(free_nodes.size() * static_cast<std::size_t>(ring));
        for (NodeId id : free_nodes) {
            const Lattice z = g.lattice(id);
            for (int axis = 0; axis < n; ++axis) {
                nbr.push_back(g.neighbor(id, axis, -1));
                nbr.push_back(g.neighbor(id, axis, +1));
            }
            if (!full_hessian) continue;
            for (int i = 0; i < n; ++i)
                for (int j = i + 1; j < n; ++j)
                    for (int si : {-1, 1})
                        for (int sj : {-1, 1}) {
                            Lattice y = z;
                            y[i] += si;
                            y[j] += sj;
                            nbr.push_back(g.find(y));
                        }
        }
    }

    const NodeId* at(std::size_t k) const { return &nbr[k * static_cast<std::size_t>(ring)]; }

    bool band(const ScalarField& u, std::size_t k) const {
        if (u[free_nodes[k]] > 0.0) return false;
        const NodeId* nb = at(k);
        for (int j = 0; j < 2 * n; ++j)
            if (u[nb[j]] > 0.0) return true;
        return false;
    }

    // Some stencil node lies in the other phase.
    bool mixed(const ScalarField& u, std::size_t k) const {
        const bool pos = u[free_nodes[k]] > 0.0;
        const NodeId* nb = at(k);
        for (int j = 0; j < ring; ++j)
            if ((u[nb[j]] > 0.0) != pos) return true;
        return false;
    }
};

enum class NodeRole { far, near, band, degenerate };

// How a free node is treated. Nodes within 2h of the interface (distance
// estimated as |u| / |grad u| on the continued field) relax a blend of the
// PDE and its normal part; the blend weight is continuous in u, so the
// discrete equations do not jump when a node changes phase.
struct NodePlan {
    NodeRole role = NodeRole::far;
    Frame frame;
    double weight = 0.0;  // share of the normal part
};

NodePlan plan_node(const ScalarField& u, const Stencils& st, std::size_t k, const JumpLaw& law) {
    const GridSpec& g = u.grid();
    const double h = g.spacing();
    const NodeId id = st.free_nodes[k];
    NodePlan plan;
    const bool band = st.band(u, k);
    if (!band && !st.mixed(u, k)) {
        // Same-phase stencil: the continued field is u itself.
        const NodeId* nb = st.at(k);
        double g2 = 0.0;
        for (int axis = 0; axis < st.n; ++axis) {
            const double d = (u[nb[2 * axis + 1]] - u[nb[2 * axis]]) / (2.0 * h);
            g2 += d * d;
        }
        if (std::abs(u[id]) >= 2.0 * h * std::sqrt(g2)) return plan;
    }
    plan.frame = compute_frame(u, id, law);
    if (plan.frame.degenerate) {
        plan.role = band ? NodeRole::degenerate : NodeRole::far;
        return plan;
    }
    if (band) {
        plan.role = NodeRole::band;
        return plan;
    }
    const double slope = u[id] > 0.0 ? plan.frame.grad : plan.frame.grad / plan.frame.kappa;
    const double dist = std::abs(u[id]) / slope;
    plan.weight = std::clamp(2.0 - dist / h, 0.0, 1.0);
    plan.role = NodeRole::near;
    return plan;
}

// Near-interface equation at a node as a function of its own value v:
// (1 - w) F(D^2 E) + w F(E_nunu nu nu^T), E the field continued from the
// node's phase. Non-increasing in v.
struct NearEquation {
    const OperatorSpec* op = nullptr;
    int n = 0;
    double h2 = 0.0;
    double w = 0.0;
    Vec nu{};
    Vec mu{};            // eigenvalues of the Hessian part at v = 0
    SymMatrix base;      // Hessian part at v = 0
    double normal0 = 0;  // normal second difference at v = 0, times h^2
    double normal1 = 0;  // its coefficient of v

    double operator()(double v) const {
        double hess = 0.0;
        switch (op->kind) {
            case OperatorKind::laplace: hess = base.trace() - 2.0 * n * v / h2; break;
            case OperatorKind::pucci_max:
            case OperatorKind::pucci_min: {
                const double up = op->kind == OperatorKind::pucci_max ? op->Lambda : op->lambda;
                const double down = op->kind == OperatorKind::pucci_max ? op->lambda : op->Lambda;
                for (int i = 0; i < n; ++i) {
                    const double e = mu[i] - 2.0 * v / h2;
                    hess += e > 0.0 ? up * e : down * e;
                }
                break;
            }
            case OperatorKind::callback: {
                SymMatrix H = base;
                for (int i = 0; i < n; ++i) H(i, i) -= 2.0 * v / h2;
                hess = evaluate(*op, H);
                break;
            }
        }
        const double s = (normal0 + normal1 * v) / h2;
        return (1.0 - w) * hess + w * normal_part(*op, s, nu, n);
    }
};

std::optional<NearEquation> near_equation(const ScalarField& u, NodeId id, const OperatorSpec& op,
                                          const NodePlan& plan) {
    const GridSpec& g = u.grid();
    const int n = g.dim();
    const double h = g.spacing();
    const PhaseMap map{u[id] > 0.0, plan.frame.kappa};
    NearEquation eq;
    eq.op = &op;
    eq.n = n;
    eq.h2 = h * h;
    eq.w = plan.weight;
    eq.nu = plan.frame.nu;
    eq.base = stencil_hessian(g, id, 0.0, [&](NodeId nb) { return map(u[nb]); });
    if (op.kind == OperatorKind::pucci_max || op.kind == OperatorKind::pucci_min) {
        eq.mu = symmetric_eigenvalues(eq.base);
    }
    const Vec x = g.position(id);
    Vec ahead = x, behind = x;
    for (int i = 0; i < n; ++i) {
        ahead[i] += h * eq.nu[i];
        behind[i] -= h * eq.nu[i];
    }
    const auto a0 = interpolate_mapped(u, ahead, map, id, 0.0);
    const auto b0 = interpolate_mapped(u, behind, map, id, 0.0);
    const auto a1 = interpolate_mapped(u, ahead, map, id, 1.0);
    const auto b1 = interpolate_mapped(u, behind, map, id, 1.0);
    if (!a0 || !b0 || !a1 || !b1) return std::nullopt;
    eq.normal0 = *a0 + *b0;
    eq.normal1 = (*a1 - *a0) + (*b1 - *b0) - 2.0;
    return eq;
}

double near_solve(const NearEquation& eq, double current) {
    if (eq.op->kind == OperatorKind::laplace) {
        const double num = (1.0 - eq.w) * eq.h2 * eq.base.trace() + eq.w * eq.normal0;
        const double den = (1.0 - eq.w) * 2.0 * eq.n - eq.w * eq.normal1;
        return num / den;
    }
    return decreasing_root(eq, current, eq.h2);
}

// Plain (unmapped) PDE pieces for far and degenerate nodes.
double far_defect(const ScalarField& u, const OperatorSpec& op, const Stencils& st, std::size_t k) {
    const GridSpec& g = u.grid();
    const NodeId id = st.free_nodes[k];
    if (op.kind == OperatorKind::laplace) {
        const NodeId* nb = st.at(k);
        double s = -2.0 * st.n * u[id];
        for (int j = 0; j < 2 * st.n; ++j) s += u[nb[j]];
        return s;
    }
    const double h2 = g.spacing() * g.spacing();
    return h2 * evaluate(op, stencil_hessian(g, id, u[id], [&](NodeId nb) { return u[nb]; }));
}

double far_target(const ScalarField& u, const OperatorSpec& op, const Stencils& st, std::size_t k) {
    const GridSpec& g = u.grid();
    const NodeId id = st.free_nodes[k];
    if (op.kind == OperatorKind::laplace) {
        const NodeId* nb = st.at(k);
        double s = 0.0;
        for (int j = 0; j < 2 * st.n; ++j) s += u[nb[j]];
        return s / (2.0 * st.n);
    }
    const double h2 = g.spacing() * g.spacing();
    const SymMatrix base = stencil_hessian(g, id, 0.0, [&](NodeId nb) { return u[nb]; });
    return solve_node(base, st.n, h2, u[id], op);
}

Residual evaluate_residual(const ScalarField& u, const OperatorSpec& op, const JumpLaw& law,
                           const Stencils& st) {
    const double h2 = u.grid().spacing() * u.grid().spacing();
    Residual out;
    for (std::size_t k = 0; k < st.free_nodes.size(); ++k) {
        const NodeId id = st.free_nodes[k];
        const NodePlan plan = plan_node(u, st, k, law);
        double value = 0.0;
        switch (plan.role) {
            case NodeRole::band:
                out.fbc_residual = std::max(
                    out.fbc_residual, std::abs(plan.frame.d_plus - g_eval(law, plan.frame.d_minus)));
                continue;
            case NodeRole::degenerate:
                ++out.degenerate_nodes;
                value = far_defect(u, op, st, k);
                break;
            case NodeRole::near: {
                const auto eq = near_equation(u, id, op, plan);
                value = eq ? h2 * (*eq)(u[id]) : far_defect(u, op, st, k);
                break;
            }
            case NodeRole::far: value = far_defect(u, op, st, k); break;
        }
        out.pde_residual = std::max(out.pde_residual, std::abs(value));
    }
    if (!std::isfinite(out.pde_residual) || !std::isfinite(out.fbc_residual)) {
        throw InvariantError("solver residual is not finite");
    }
    return out;
}

}  // namespace

void SolveConfig::validate() const {
    if (!(tolerance > 0.0)) throw ConfigError("solver.tolerance must be positive");
    if (max_iterations < 1) throw ConfigError("solver.max_iterations must be at least 1");
    if (!(damping > 0.0 && damping <= 1.0)) throw ConfigError("solver.damping must lie in (0, 1]");
    if (!(relaxation == 0.0 || (relaxation >= 1.0 && relaxation < 2.0))) {
        throw ConfigError("solver.relaxation must be 0 (automatic) or in [1, 2)");
    }
    if (!(near_relaxation >= 1.0 && near_relaxation < 2.0)) {
        throw ConfigError("solver.near_relaxation must lie in [1, 2)");
    }
}

double default_relaxation(const GridSpec& grid) {
    const int n = grid.dim();
    const double h = grid.spacing();
    const double lambda1 = std::pow(bessel_first_zero(n) / grid.radius(), 2);
    const double rho = 1.0 - h * h * lambda1 / (2.0 * n);
    return 2.0 / (1.0 + std::sqrt(std::max(0.0, 1.0 - rho * rho)));
}

InterfaceDerivatives interface_derivatives(const ScalarField& field, NodeId band_node,
                                           const JumpLaw& law) {
    InterfaceDerivatives out;
    if (field.grid().on_shell(band_node)) {
        out.degenerate = true;
        return out;
    }
    const Frame f = compute_frame(field, band_node, law);
    out.degenerate = f.degenerate;
    if (f.degenerate) return out;
    out.nu = f.nu;
    out.u_nu_plus = f.d_plus;
    out.u_nu_minus = f.d_minus;
    out.extension = f.kappa;
    return out;
}

std::vector<std::uint8_t> fixed_node_mask(const GridSpec& grid, const OperatorSpec& op) {
    std::vector<std::uint8_t> fixed(grid.size(), 0);
    const bool needs_cross = op.kind != OperatorKind::laplace;
    for (NodeId id = 0; id < static_cast<NodeId>(grid.size()); ++id) {
        fixed[static_cast<std::size_t>(id)] =
            grid.on_shell(id) || (needs_cross && !has_hessian_stencil(grid, id));
    }
    return fixed;
}

double pde_node_value(const ScalarField& field, NodeId id, const OperatorSpec& op) {
    const GridSpec& g = field.grid();
    const double h2 = g.spacing() * g.spacing();
    return solve_node(discrete_hessian(field, id, 0.0), g.dim(), h2, field[id], op);
}

Residual residual(const ScalarField& field, const OperatorSpec& op, const JumpLaw& law) {
    const GridSpec& g = field.grid();
    const Stencils st(g, fixed_node_mask(g, op), op.kind != OperatorKind::laplace);
    return evaluate_residual(field, op, law, st);
}

SolveResult solve_dirichlet(const GridPtr& grid, const OperatorSpec& op, const JumpLaw& law,
                            const BoundaryData& boundary, const SolveConfig& config) {
    op.validate();
    law.validate();
    config.validate();
    if (!check_ellipticity(op, grid->dim(), 1000, 0x5eed).pass) {
        throw InputError("operator failed the ellipticity check");
    }

    const GridSpec& g = *grid;
    const double h = g.spacing();
    const std::vector<std::uint8_t> fixed = fixed_node_mask(g, op);

    ScalarField u(grid, 0.0);
    for (NodeId id = 0; id < static_cast<NodeId>(g.size()); ++id) {
        if (!fixed[static_cast<std::size_t>(id)]) continue;
        const double v = boundary(g.position(id));
        if (!std::isfinite(v)) throw InputError("boundary data is not finite");
        u[id] = v;
    }
    const Stencils st(g, fixed, op.kind != OperatorKind::laplace);

    SolveResult result{u, 0, 0.0, 0.0, false, {}, 0, 1.0};
    const double omega = config.relaxation == 0.0 ? default_relaxation(g) : config.relaxation;
    result.relaxation = omega;

    for (int it = 1; it <= config.max_iterations; ++it) {
        int degenerate = 0;
        for (std::size_t k = 0; k < st.free_nodes.size(); ++k) {
            const NodeId id = st.free_nodes[k];
            const double v = u[id];
            const NodePlan plan = plan_node(u, st, k, law);
            switch (plan.role) {
                case NodeRole::band: {
                    // Flux-balance shift. The mismatch falls at a rate of about
                    // (kappa + G') / h in the node value; the 2 / (1 + kappa)
                    // factor keeps the step law-independent.
                    const Frame& f = plan.frame;
                    const double mismatch = f.d_plus - g_eval(law, f.d_minus);
                    u[id] = v + config.damping * h * mismatch * 2.0 / (1.0 + f.kappa);
                    break;
                }
                case NodeRole::near: {
                    const auto eq = near_equation(u, id, op, plan);
                    const double target = eq ? near_solve(*eq, v) : far_target(u, op, st, k);
                    u[id] = v + (eq ? config.near_relaxation : 1.0) * (target - v);
                    break;
                }
                case NodeRole::degenerate:
                    ++degenerate;
                    u[id] = far_target(u, op, st, k);
                    break;
                case NodeRole::far: u[id] = v + omega * (far_target(u, op, st, k) - v); break;
            }
        }

        const Residual r = evaluate_residual(u, op, law, st);
        result.pde_residual = r.pde_residual;
        result.fbc_residual = r.fbc_residual;
        result.degenerate_nodes = degenerate;
        result.iterations = it;
        const double combined = std::max(r.pde_residual, r.fbc_residual);
        result.history.push_back(combined);
        if (combined <= config.tolerance) {
            result.converged = true;
            break;
        }
    }
    result.field = std::move(u);
    return result;
}

}  // namespace fbp
