#include "fbp/jump_law.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "fbp/errors.hpp"

namespace fbp {

namespace {

constexpr int kSamplesPerDecade = 512;
constexpr double kTableLow = 1e-4;
constexpr double kTableHigh = 1e4;

double segment(double t, double t0, double t1, double g0, double g1) {
    return g0 + (g1 - g0) * (t - t0) / (t1 - t0);
}

}  // namespace

std::string to_string(LawKind kind) {
    switch (kind) {
        case LawKind::sqrt1p: return "sqrt1p";
        case LawKind::linear: return "linear";
        case LawKind::tabulated: return "tabulated";
    }
    return "unknown";
}

LawKind law_kind_from_string(const std::string& name) {
    if (name == "sqrt1p") return LawKind::sqrt1p;
    if (name == "linear") return LawKind::linear;
    if (name == "tabulated") return LawKind::tabulated;
    throw ConfigError("unknown G.kind '" + name + "' (expected sqrt1p, linear, tabulated)");
}

JumpLaw JumpLaw::sqrt1p() { return JumpLaw{}; }

JumpLaw JumpLaw::linear(double slope, double intercept) {
    JumpLaw law;
    law.kind = LawKind::linear;
    law.slope = slope;
    law.intercept = intercept;
    law.validate();
    return law;
}

JumpLaw JumpLaw::tabulated(std::vector<double> t, std::vector<double> g) {
    JumpLaw law;
    law.kind = LawKind::tabulated;
    law.table_t = std::move(t);
    law.table_g = std::move(g);
    law.validate();
    return law;
}

void JumpLaw::validate() const {
    auto finite = [](double v) { return std::isfinite(v); };
    if (!finite(M) || !finite(sigma) || !finite(delta_band)) {
        throw ConfigError("jump law parameters must be finite");
    }
    if (!(sigma > 0.0 && sigma <= 1.0)) throw ConfigError("G.sigma must lie in (0, 1]");
    if (M < 0.0) throw ConfigError("G.M must be non-negative");
    switch (kind) {
        case LawKind::sqrt1p: break;
        case LawKind::linear:
            if (!finite(slope) || !finite(intercept) || !(slope > 0.0)) {
                throw ConfigError("linear law needs a finite positive slope");
            }
            break;
        case LawKind::tabulated:
            if (table_t.size() < 2 || table_t.size() != table_g.size()) {
                throw ConfigError("tabulated law needs at least two (t, G) samples");
            }
            if (table_t.front() < 0.0) throw ConfigError("tabulated law starts at negative t");
            for (std::size_t i = 0; i < table_t.size(); ++i) {
                if (!finite(table_t[i]) || !finite(table_g[i])) {
                    throw ConfigError("tabulated law has a non-finite sample");
                }
                if (i > 0 && (table_t[i] <= table_t[i - 1] || table_g[i] <= table_g[i - 1])) {
                    throw ConfigError("tabulated law columns must be strictly increasing");
                }
            }
            break;
    }
}

double g_eval(const JumpLaw& law, double t) {
    if (!(t >= 0.0)) throw DomainError("G is only defined for t >= 0");
    switch (law.kind) {
        case LawKind::sqrt1p: return std::sqrt(1.0 + t * t);
        case LawKind::linear: return law.slope * t + law.intercept;
        case LawKind::tabulated: {
            const auto& ts = law.table_t;
            const auto& gs = law.table_g;
            const std::size_t last = ts.size() - 1;
            if (t <= ts.front()) return segment(t, ts[0], ts[1], gs[0], gs[1]);
            if (t >= ts.back()) return segment(t, ts[last - 1], ts[last], gs[last - 1], gs[last]);
            const auto it = std::upper_bound(ts.begin(), ts.end(), t);
            const auto i = static_cast<std::size_t>(it - ts.begin());
            return segment(t, ts[i - 1], ts[i], gs[i - 1], gs[i]);
        }
    }
    return 0.0;
}

JumpLaw read_law_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open G.table '" + path + "'");
    std::vector<double> t, g;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream row(line);
        double a = 0.0, b = 0.0;
        if (!(row >> a >> b)) {
            throw ConfigError(path + ":" + std::to_string(line_no) + ": expected two numbers");
        }
        t.push_back(a);
        g.push_back(b);
    }
    return JumpLaw::tabulated(std::move(t), std::move(g));
}

AsymptoticsReport check_asymptotics(const JumpLaw& law, double t_max, double delta) {
    if (!(delta > 0.0 && delta < 1.0)) throw InputError("delta must lie in (0, 1)");
    if (!(t_max > law.M)) throw InputError("t_max must exceed the law threshold M");

    constexpr int kSamples = 400;
    const double t_min = law.M > 0.0 ? law.M : std::min(1e-3, t_max * 1e-3);
    const double ratio = std::pow(t_max / t_min, 1.0 / (kSamples - 1));

    std::vector<double> gap(kSamples), curvature(kSamples);
    double previous = -std::numeric_limits<double>::infinity();
    double t = t_min;
    for (int i = 0; i < kSamples; ++i, t *= ratio) {
        const double s = t * 1e-5;
        const double g = g_eval(law, t);
        if (!(g > previous)) throw InvariantError("G samples are not strictly increasing");
        previous = g;
        const double gp = g_eval(law, t + s);
        const double gm = g_eval(law, t - s);
        gap[i] = std::abs((gp - gm) / (2.0 * s) - 1.0);
        curvature[i] = std::abs(t * (gp - 2.0 * g + gm) / (s * s));
    }

    AsymptoticsReport report;
    report.tail_slope_gap = gap.back();
    report.second_order_constant = *std::max_element(curvature.begin(), curvature.end());
    report.band_ok = std::all_of(gap.begin(), gap.end(), [&](double d) { return d <= delta; });

    // The gap must end below delta and stay non-increasing (up to difference
    // noise) over at least the final quarter of the samples.
    constexpr double noise = 1e-7;
    bool tail_ok = gap.back() <= delta;
    for (int i = kSamples - kSamples / 4; i < kSamples && tail_ok; ++i) {
        tail_ok = gap[i] <= delta && gap[i] <= gap[i - 1] + noise;
    }
    report.limit_ok = tail_ok;

    const auto half = curvature.begin() + kSamples / 2;
    const double lower = *std::max_element(curvature.begin(), half);
    const double upper = *std::max_element(half, curvature.end());
    report.second_order_ok = upper <= std::max(lower, 1e-5) * (1.0 + 1e-6);
    return report;
}

bool check_two_sided(const JumpLaw& law, double sigma, double t_max) {
    if (!(sigma > 0.0 && sigma <= 1.0)) throw InputError("sigma must lie in (0, 1]");
    if (!(t_max > law.M)) throw InputError("t_max must exceed the law threshold M");
    constexpr int kSteps = 10000;
    const double step = (t_max - law.M) / kSteps;
    for (int i = 1; i <= kSteps; ++i) {
        const double t = law.M + step * i;
        const double g = g_eval(law, t);
        if (g > t / sigma || g < sigma * t) return false;
    }
    return true;
}

JumpLaw rescale_law(const JumpLaw& law, double r, double alpha_exp) {
    if (!(r > 0.0 && r <= 1.0)) throw InputError("rescale radius must lie in (0, 1]");
    if (!(alpha_exp > 0.0 && alpha_exp < 1.0)) throw InputError("Hoelder exponent must lie in (0, 1)");

    const double outer = std::pow(r, 1.0 - alpha_exp);
    const double inner = std::pow(r, alpha_exp - 1.0);
    const int decades = static_cast<int>(std::lround(std::log10(kTableHigh / kTableLow)));
    const int count = decades * kSamplesPerDecade + 1;

    std::vector<double> ts, gs;
    ts.reserve(count + 1);
    gs.reserve(count + 1);
    ts.push_back(0.0);
    gs.push_back(outer * g_eval(law, 0.0));
    for (int i = 0; i < count; ++i) {
        const double t = kTableLow * std::pow(10.0, static_cast<double>(i) / kSamplesPerDecade);
        ts.push_back(t);
        gs.push_back(outer * g_eval(law, inner * t));
    }
    JumpLaw out = JumpLaw::tabulated(std::move(ts), std::move(gs));
    out.M = law.M;
    out.sigma = law.sigma;
    out.delta_band = law.delta_band;

    const double t_check = std::max(1e3, 10.0 * (law.M + 1.0));
    if (check_two_sided(law, law.sigma, t_check) && !check_two_sided(out, law.sigma, t_check)) {
        throw InvariantError("rescaled law lost the two-sided bound above M");
    }
    return out;
}

TwoPlane TwoPlane::make(const JumpLaw& law, double beta, const Vec& nu, const Vec& x0, int dim) {
    if (!(beta >= 0.0)) throw InputError("two-plane slope beta must be non-negative");
    return with_slopes(g_eval(law, beta), beta, nu, x0, dim);
}

TwoPlane TwoPlane::with_slopes(double alpha, double beta, const Vec& nu, const Vec& x0, int dim) {
    if (!(beta >= 0.0) || !(alpha > 0.0)) throw InputError("two-plane slopes must be alpha > 0, beta >= 0");
    const double len = norm(nu, dim);
    if (!(len > 0.0)) throw InputError("two-plane direction must be non-zero");
    TwoPlane p;
    p.alpha = alpha;
    p.beta = beta;
    p.dim = dim;
    p.x0 = x0;
    for (int i = 0; i < dim; ++i) p.nu[i] = nu[i] / len;
    return p;
}

double TwoPlane::operator()(const Vec& x) const {
    double s = 0.0;
    for (int i = 0; i < dim; ++i) s += (x[i] - x0[i]) * nu[i];
    return s > 0.0 ? alpha * s : beta * s;
}

ScalarField two_plane_field(const GridPtr& grid, const TwoPlane& plane) {
    if (plane.dim != grid->dim()) throw InputError("two-plane dimension does not match the grid");
    return sample_field(grid, plane);
}

}  // namespace fbp
