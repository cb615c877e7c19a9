#include "fbp/viscosity.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>

#include "fbp/errors.hpp"
#include "fbp/solver.hpp"

namespace fbp {

namespace {

constexpr int kSlopeSamples = 64;
constexpr double kMinSlope = 1e-8;

// Offsets of the full 3^n - 1 stencil ring.
std::vector<Lattice> ring_offsets(int n) {
    std::vector<Lattice> out;
    int total = 1;
    for (int i = 0; i < n; ++i) total *= 3;
    for (int code = 0; code < total; ++code) {
        Lattice d{};
        int c = code;
        bool zero = true;
        for (int i = 0; i < n; ++i) {
            d[i] = c % 3 - 1;
            c /= 3;
            zero = zero && d[i] == 0;
        }
        if (!zero) out.push_back(d);
    }
    return out;
}

double quadratic_form(const SymMatrix& Q, const Vec& d, int n) {
    double s = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) s += d[i] * Q(i, j) * d[j];
    return s;
}

}  // namespace

void TestProfileFamily::validate() const {
    if (count < 1) throw ConfigError("profile count must be at least 1");
    if (!(g_min > 0.0) || !(g_max >= g_min) || !std::isfinite(g_max)) {
        throw ConfigError("gradient range must satisfy 0 < g_min <= g_max");
    }
    if (!(hessian_scale >= 0.0) || !std::isfinite(hessian_scale)) {
        throw ConfigError("hessian_scale must be finite and non-negative");
    }
}

std::vector<TestProfile> sample_profiles(const TestProfileFamily& family, int n) {
    family.validate();
    std::mt19937_64 rng(family.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<TestProfile> out;
    out.reserve(static_cast<std::size_t>(family.count));
    for (int p = 0; p < family.count; ++p) {
        TestProfile prof;
        prof.Q = SymMatrix(n);
        prof.gradient = family.g_min + (family.g_max - family.g_min) * unit(rng);
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j) {
                const double q = family.hessian_scale * (2.0 * unit(rng) - 1.0);
                if (p > 0) prof.Q(i, j) = prof.Q(j, i) = q;
            }
        out.push_back(prof);
    }
    return out;
}

std::string to_string(ViolationKind kind) {
    switch (kind) {
        case ViolationKind::touched_from_above: return "touched_from_above";
        case ViolationKind::touched_from_below: return "touched_from_below";
        case ViolationKind::fbc_case1: return "fbc_case1";
        case ViolationKind::fbc_case2: return "fbc_case2";
    }
    return "unknown";
}

std::vector<Violation> check_interior(const ScalarField& field, const OperatorSpec& op,
                                      const TestProfileFamily& family, double margin) {
    if (!(margin > 0.0)) throw InputError("margin must be positive");
    const GridSpec& g = field.grid();
    const int n = g.dim();
    const double h = g.spacing();
    const auto profiles = sample_profiles(family, n);
    const auto offsets = ring_offsets(n);

    std::vector<double> strength(profiles.size());
    for (std::size_t p = 0; p < profiles.size(); ++p) {
        strength[p] = h * h * evaluate(op, profiles[p].Q);
    }

    std::vector<Violation> out;
    std::vector<NodeId> ring(offsets.size());
    for (NodeId id = 0; id < static_cast<NodeId>(g.size()); ++id) {
        if (g.on_shell(id)) continue;
        const Lattice z = g.lattice(id);
        const bool pos = field[id] > 0.0;
        bool usable = true;
        for (std::size_t k = 0; k < offsets.size() && usable; ++k) {
            Lattice y = z;
            for (int i = 0; i < n; ++i) y[i] += offsets[k][i];
            ring[k] = g.find(y);
            usable = ring[k] != kNoNode && (field[ring[k]] > 0.0) == pos;
        }
        if (!usable) continue;
        const Vec grad = gradient_at(field, id).value;
        // Within 2h of the zero level set the solver relaxes a blended
        // equation, so the plain PDE is not expected to hold there.
        if (std::abs(field[id]) < 2.0 * h * norm(grad, n)) continue;

        for (std::size_t p = 0; p < profiles.size(); ++p) {
            const bool super = strength[p] <= -margin;
            const bool sub = strength[p] >= margin;
            if (!super && !sub) continue;
            bool above = true;
            bool below = true;
            for (std::size_t k = 0; k < offsets.size(); ++k) {
                Vec d{};
                for (int i = 0; i < n; ++i) d[i] = h * offsets[k][i];
                const double P = field[id] + dot(grad, d, n) + 0.5 * quadratic_form(profiles[p].Q, d, n);
                const double diff = field[ring[k]] - P;
                above = above && diff < 0.0;
                below = below && diff > 0.0;
            }
            if (super && above) {
                out.push_back({id, static_cast<int>(p), ViolationKind::touched_from_above, 0.0, 0.0,
                               strength[p]});
            } else if (sub && below) {
                out.push_back({id, static_cast<int>(p), ViolationKind::touched_from_below, 0.0, 0.0,
                               strength[p]});
            }
        }
    }
    return out;
}

FbcCheck check_fbc(const ScalarField& field, const JumpLaw& law, NodeId band_node,
                   const TestProfileFamily& family, double slack, double b_min) {
    if (!(slack > 0.0)) throw InputError("slack must be positive");
    if (!(b_min >= 0.0)) throw InputError("b_min must be non-negative");
    const GridSpec& g = field.grid();
    const int n = g.dim();
    const double h = g.spacing();
    FbcCheck out;
    if (!in_interface_band(field, band_node)) throw InputError("node is not in the interface band");

    const InterfaceDerivatives d = interface_derivatives(field, band_node, law);
    if (d.degenerate || !(d.u_nu_plus > kMinSlope)) {
        out.skipped = true;
        out.reason = "degenerate gradient";
        return out;
    }
    // The negative phase continues linearly across the interface; fall back to
    // the positive side when it is flat.
    const double u0 = field[band_node];
    const double s = d.u_nu_minus > kMinSlope ? -u0 / d.u_nu_minus : -d.extension * u0 / d.u_nu_plus;
    const Vec x0 = g.position(band_node);
    for (int i = 0; i < n; ++i) {
        out.nu[i] = d.nu[i];
        out.y0[i] = x0[i] + s * d.nu[i];
    }

    // Patch: nodes within 4h of the band node.
    std::vector<NodeId> patch;
    const Lattice z = g.lattice(band_node);
    Lattice off{};
    const int reach = 4;
    std::vector<Lattice> offsets;
    std::function<void(int)> walk = [&](int axis) {
        if (axis == n) {
            int r2 = 0;
            for (int i = 0; i < n; ++i) r2 += off[i] * off[i];
            if (r2 <= reach * reach) offsets.push_back(off);
            return;
        }
        for (int k = -reach; k <= reach; ++k) {
            off[axis] = k;
            walk(axis + 1);
        }
    };
    walk(0);
    for (const Lattice& o : offsets) {
        Lattice y = z;
        for (int i = 0; i < n; ++i) y[i] += o[i];
        const NodeId id = g.find(y);
        if (id != kNoNode) patch.push_back(id);
    }

    const double b_max = std::max(b_min + 1.0, 2.0 * d.u_nu_minus + 1.0);
    std::vector<double> slopes;
    for (int k = 0; k < kSlopeSamples; ++k) {
        slopes.push_back(b_min + (b_max - b_min) * k / (kSlopeSamples - 1));
    }
    if (d.u_nu_minus >= b_min) slopes.push_back(d.u_nu_minus);
    std::sort(slopes.begin(), slopes.end());
    slopes.erase(std::unique(slopes.begin(), slopes.end()), slopes.end());
    slopes.erase(std::remove_if(slopes.begin(), slopes.end(), [](double b) { return !(b > 0.0); }),
                 slopes.end());

    const auto profiles = sample_profiles(family, n);
    const double contact = h * h;
    std::vector<double> psi(patch.size());
    double psi0 = 0.0;
    for (std::size_t p = 0; p < profiles.size(); ++p) {
        const TestProfile& prof = profiles[p];
        auto eval = [&](NodeId id) {
            const Vec x = g.position(id);
            Vec r{};
            for (int i = 0; i < n; ++i) r[i] = x[i] - out.y0[i];
            return dot(out.nu, r, n) + 0.5 * quadratic_form(prof.Q, r, n) / prof.gradient;
        };
        for (std::size_t k = 0; k < patch.size(); ++k) psi[k] = eval(patch[k]);
        psi0 = eval(band_node);

        for (double b : slopes) {
            const double gb = g_eval(law, b);
            for (int sign : {+1, -1}) {
                const double a = gb + sign * slack;
                if (!(a > 0.0)) continue;
                auto phi = [&](double v) { return v > 0.0 ? a * v : b * v; };
                double lo = std::numeric_limits<double>::infinity();
                double hi = -lo;
                for (std::size_t k = 0; k < patch.size(); ++k) {
                    const double diff = field[patch[k]] - phi(psi[k]);
                    lo = std::min(lo, diff);
                    hi = std::max(hi, diff);
                }
                const double at0 = u0 - phi(psi0);
                const double gap = sign > 0 ? at0 - lo : hi - at0;
                if (gap <= contact) {
                    out.violations.push_back({band_node, static_cast<int>(p),
                                              sign > 0 ? ViolationKind::fbc_case1 : ViolationKind::fbc_case2,
                                              a, b, gap});
                }
            }
        }
    }
    return out;
}

}  // namespace fbp
