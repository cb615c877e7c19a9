#include "fbp/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>

#include "fbp/errors.hpp"

namespace fbp {

namespace {

using Json = nlohmann::ordered_json;

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_real(const std::string& v) {
    std::size_t used = 0;
    double out = 0.0;
    try {
        out = std::stod(v, &used);
    } catch (const std::exception&) {
        throw ConfigError("expected a number, got '" + v + "'");
    }
    if (used != v.size() || !std::isfinite(out)) throw ConfigError("expected a number, got '" + v + "'");
    return out;
}

long long parse_integer(const std::string& v) {
    std::size_t used = 0;
    long long out = 0;
    try {
        out = std::stoll(v, &used);
    } catch (const std::exception&) {
        throw ConfigError("expected an integer, got '" + v + "'");
    }
    if (used != v.size()) throw ConfigError("expected an integer, got '" + v + "'");
    return out;
}

std::vector<double> parse_list(const std::string& v) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_real(trim(item)));
    if (out.empty()) throw ConfigError("expected a comma-separated list of numbers");
    return out;
}

Vec parse_vec(const std::string& v) {
    const auto list = parse_list(v);
    if (list.size() > static_cast<std::size_t>(kMaxDim)) throw ConfigError("vector has too many entries");
    Vec out{};
    for (std::size_t i = 0; i < list.size(); ++i) out[i] = list[i];
    return out;
}

Json vec_json(const Vec& v, int n) {
    Json a = Json::array();
    for (int i = 0; i < n; ++i) a.push_back(v[i]);
    return a;
}

BoundaryKind boundary_kind_from_string(const std::string& s) {
    if (s == "two_plane") return BoundaryKind::two_plane;
    if (s == "scaled_two_plane") return BoundaryKind::scaled_two_plane;
    if (s == "harmonic_mode") return BoundaryKind::harmonic_mode;
    if (s == "custom_table") return BoundaryKind::custom_table;
    throw ConfigError("unknown boundary.kind '" + s +
                      "' (expected two_plane, scaled_two_plane, harmonic_mode, custom_table)");
}

struct Key {
    const char* name;
    std::function<void(ExperimentConfig&, const std::string&)> set;
    std::function<Json(const ExperimentConfig&)> get;
};

const std::vector<Key>& keys() {
    using C = ExperimentConfig;
    using S = const std::string&;
    static const std::vector<Key> table = {
        {"grid.n", [](C& c, S v) { c.n = static_cast<int>(parse_integer(v)); }, [](const C& c) { return Json(c.n); }},
        {"grid.R", [](C& c, S v) { c.R = parse_real(v); }, [](const C& c) { return Json(c.R); }},
        {"grid.h", [](C& c, S v) { c.h = parse_real(v); }, [](const C& c) { return Json(c.h); }},
        {"operator.kind", [](C& c, S v) { c.op.kind = operator_kind_from_string(v); },
         [](const C& c) { return Json(to_string(c.op.kind)); }},
        {"operator.lambda", [](C& c, S v) { c.op.lambda = parse_real(v); }, [](const C& c) { return Json(c.op.lambda); }},
        {"operator.Lambda", [](C& c, S v) { c.op.Lambda = parse_real(v); }, [](const C& c) { return Json(c.op.Lambda); }},
        {"G.kind", [](C& c, S v) { c.law.kind = law_kind_from_string(v); },
         [](const C& c) { return Json(to_string(c.law.kind)); }},
        {"G.slope", [](C& c, S v) { c.law.slope = parse_real(v); }, [](const C& c) { return Json(c.law.slope); }},
        {"G.intercept", [](C& c, S v) { c.law.intercept = parse_real(v); },
         [](const C& c) { return Json(c.law.intercept); }},
        {"G.table", [](C& c, S v) { c.law_table = v; }, [](const C& c) { return Json(c.law_table); }},
        {"G.M", [](C& c, S v) { c.law.M = parse_real(v); }, [](const C& c) { return Json(c.law.M); }},
        {"G.sigma", [](C& c, S v) { c.law.sigma = parse_real(v); }, [](const C& c) { return Json(c.law.sigma); }},
        {"G.delta_band", [](C& c, S v) { c.law.delta_band = parse_real(v); },
         [](const C& c) { return Json(c.law.delta_band); }},
        {"boundary.kind", [](C& c, S v) { c.boundary.kind = boundary_kind_from_string(v); },
         [](const C& c) { return Json(to_string(c.boundary.kind)); }},
        {"boundary.beta", [](C& c, S v) { c.boundary.beta = parse_real(v); },
         [](const C& c) { return Json(c.boundary.beta); }},
        {"boundary.nu", [](C& c, S v) { c.boundary.nu = parse_vec(v); },
         [](const C& c) { return vec_json(c.boundary.nu.value_or(Vec{}), c.n); }},
        {"boundary.x0", [](C& c, S v) { c.boundary.x0 = parse_vec(v); },
         [](const C& c) { return vec_json(c.boundary.x0, c.n); }},
        {"boundary.amplitude", [](C& c, S v) { c.boundary.amplitude = parse_real(v); },
         [](const C& c) { return Json(c.boundary.amplitude); }},
        {"boundary.perturbation", [](C& c, S v) { c.boundary.perturbation = parse_real(v); },
         [](const C& c) { return Json(c.boundary.perturbation); }},
        {"boundary.mode", [](C& c, S v) { c.boundary.mode = static_cast<int>(parse_integer(v)); },
         [](const C& c) { return Json(c.boundary.mode); }},
        {"boundary.table", [](C& c, S v) { c.boundary.table = v; }, [](const C& c) { return Json(c.boundary.table); }},
        {"solver.tolerance", [](C& c, S v) { c.solver.tolerance = parse_real(v); },
         [](const C& c) { return Json(c.solver.tolerance); }},
        {"solver.max_iterations", [](C& c, S v) { c.solver.max_iterations = static_cast<int>(parse_integer(v)); },
         [](const C& c) { return Json(c.solver.max_iterations); }},
        {"solver.damping", [](C& c, S v) { c.solver.damping = parse_real(v); },
         [](const C& c) { return Json(c.solver.damping); }},
        {"solver.relaxation", [](C& c, S v) { c.solver.relaxation = parse_real(v); },
         [](const C& c) { return Json(c.solver.relaxation); }},
        {"solver.near_relaxation", [](C& c, S v) { c.solver.near_relaxation = parse_real(v); },
         [](const C& c) { return Json(c.solver.near_relaxation); }},
        {"regularity.delta", [](C& c, S v) { c.regularity.delta = parse_real(v); },
         [](const C& c) { return Json(c.regularity.delta); }},
        {"regularity.L0", [](C& c, S v) { c.regularity.L0 = parse_real(v); },
         [](const C& c) { return Json(c.regularity.L0); }},
        {"regularity.C", [](C& c, S v) { c.regularity.C = parse_real(v); },
         [](const C& c) { return Json(c.regularity.C); }},
        {"regularity.dichotomy_delta", [](C& c, S v) { c.regularity.dichotomy_delta = parse_real(v); },
         [](const C& c) { return Json(c.regularity.dichotomy_delta); }},
        {"regularity.rho", [](C& c, S v) { c.regularity.rho = parse_real(v); },
         [](const C& c) { return Json(c.regularity.rho); }},
        {"regularity.k_max", [](C& c, S v) { c.regularity.k_max = static_cast<int>(parse_integer(v)); },
         [](const C& c) { return Json(c.regularity.k_max); }},
        {"regularity.eps_bar", [](C& c, S v) { c.regularity.eps_bar = parse_real(v); },
         [](const C& c) { return Json(c.regularity.eps_bar); }},
        {"regularity.C_tilde", [](C& c, S v) { c.regularity.C_tilde = parse_real(v); },
         [](const C& c) { return Json(c.regularity.C_tilde); }},
        {"regularity.claim_grid", [](C& c, S v) { c.regularity.claim_grid = parse_list(v); },
         [](const C& c) { return Json(c.regularity.claim_grid); }},
        {"viscosity.margin", [](C& c, S v) { c.viscosity.margin = parse_real(v); },
         [](const C& c) { return Json(c.viscosity.margin); }},
        {"viscosity.slack", [](C& c, S v) { c.viscosity.slack = parse_real(v); },
         [](const C& c) { return Json(c.viscosity.slack); }},
        {"viscosity.profiles", [](C& c, S v) { c.viscosity.family.count = static_cast<int>(parse_integer(v)); },
         [](const C& c) { return Json(c.viscosity.family.count); }},
        {"viscosity.g_min", [](C& c, S v) { c.viscosity.family.g_min = parse_real(v); },
         [](const C& c) { return Json(c.viscosity.family.g_min); }},
        {"viscosity.g_max", [](C& c, S v) { c.viscosity.family.g_max = parse_real(v); },
         [](const C& c) { return Json(c.viscosity.family.g_max); }},
        {"viscosity.hessian_scale", [](C& c, S v) { c.viscosity.family.hessian_scale = parse_real(v); },
         [](const C& c) { return Json(c.viscosity.family.hessian_scale); }},
        {"viscosity.b_min", [](C& c, S v) { c.viscosity.b_min = parse_real(v); },
         [](const C& c) { return Json(c.viscosity.b_min.value_or(c.law.M)); }},
        {"barrier.x0", [](C& c, S v) { c.barrier.x0 = parse_vec(v); },
         [](const C& c) { return vec_json(c.barrier.x0, c.n); }},
        {"barrier.d", [](C& c, S v) { c.barrier.d = parse_real(v); }, [](const C& c) { return Json(c.barrier.d); }},
        {"barrier.gamma_b", [](C& c, S v) { c.barrier.gamma_b = parse_real(v); },
         [](const C& c) { return Json(c.barrier.gamma_b.value_or(c.n)); }},
        {"barrier.c0", [](C& c, S v) { c.barrier.c0 = parse_real(v); }, [](const C& c) { return Json(c.barrier.c0); }},
        {"barrier.sigma", [](C& c, S v) { c.barrier.sigma = parse_real(v); },
         [](const C& c) { return Json(c.barrier.sigma.value_or(c.law.sigma)); }},
        {"limit.K", [](C& c, S v) { c.K_list = parse_list(v); }, [](const C& c) { return Json(c.K_list); }},
        {"output", [](C& c, S v) { c.output = v; }, [](const C& c) { return Json(c.output); }},
        {"seed",
         [](C& c, S v) {
             const long long s = parse_integer(v);
             if (s < 0) throw ConfigError("seed must be non-negative");
             c.seed = static_cast<std::uint64_t>(s);
             c.viscosity.family.seed = c.seed;
         },
         [](const C& c) { return Json(c.seed); }},
    };
    return table;
}

void assign(ExperimentConfig& config, const std::string& key, const std::string& value,
            const std::string& where) {
    for (const Key& k : keys()) {
        if (key != k.name) continue;
        try {
            k.set(config, value);
        } catch (const Error& e) {
            throw ConfigError(where + ": " + key + ": " + e.what());
        }
        config.origin[key] = where;
        return;
    }
    throw ConfigError(where + ": unknown key '" + key + "'");
}

std::string where(const ExperimentConfig& c, const std::string& key) {
    const auto it = c.origin.find(key);
    return it == c.origin.end() ? "default " + key : it->second + ": " + key;
}

template <class Fn>
void anchored(const ExperimentConfig& c, const std::string& key, Fn&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        throw ConfigError(where(c, key) + ": " + e.what());
    }
}

}  // namespace

std::string to_string(BoundaryKind kind) {
    switch (kind) {
        case BoundaryKind::two_plane: return "two_plane";
        case BoundaryKind::scaled_two_plane: return "scaled_two_plane";
        case BoundaryKind::harmonic_mode: return "harmonic_mode";
        case BoundaryKind::custom_table: return "custom_table";
    }
    return "unknown";
}

ExperimentConfig parse_config(const std::string& text, const std::string& source_name) {
    ExperimentConfig config;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string at = source_name + ":" + std::to_string(line_no);
        const auto hash = line.find('#');
        const std::string body = trim(hash == std::string::npos ? line : line.substr(0, hash));
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos) throw ConfigError(at + ": expected 'key = value'");
        const std::string key = trim(body.substr(0, eq));
        const std::string value = trim(body.substr(eq + 1));
        if (config.origin.count(key)) throw ConfigError(at + ": duplicate key '" + key + "'");
        if (value.empty()) throw ConfigError(at + ": empty value for '" + key + "'");
        assign(config, key, value, at);
    }
    return config;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path);
}

void apply_override(ExperimentConfig& config, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) throw ConfigError("--override expects key=value, got '" + assignment + "'");
    assign(config, trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)), "--override");
}

void resolve(ExperimentConfig& c) {
    anchored(c, "grid.h", [&] { GridSpec::build(c.n, c.R, c.h); });
    anchored(c, "operator.kind", [&] { c.op.validate(); });
    if (c.law.kind == LawKind::tabulated) {
        if (c.law_table.empty()) throw ConfigError(where(c, "G.kind") + ": tabulated law needs G.table");
        const JumpLaw base = c.law;
        anchored(c, "G.table", [&] { c.law = read_law_table(c.law_table); });
        c.law.M = base.M;
        c.law.sigma = base.sigma;
        c.law.delta_band = base.delta_band;
    }
    anchored(c, "G.kind", [&] { c.law.validate(); });

    BoundarySpec& b = c.boundary;
    if (!b.nu) {
        Vec e{};
        e[c.n - 1] = 1.0;
        b.nu = e;
    }
    anchored(c, "boundary.nu", [&] {
        if (!(norm(*b.nu, c.n) > 0.0)) throw ConfigError("direction must be non-zero");
    });
    anchored(c, "boundary.beta", [&] {
        if (!(b.beta >= 0.0)) throw ConfigError("beta must be non-negative");
    });
    anchored(c, "boundary.mode", [&] {
        if (b.mode < 1) throw ConfigError("mode must be at least 1");
    });
    anchored(c, "boundary.table", [&] {
        if (b.kind == BoundaryKind::custom_table && b.table.empty()) {
            throw ConfigError("custom_table needs boundary.table");
        }
    });
    anchored(c, "solver.tolerance", [&] { c.solver.validate(); });

    const RegularityConfig& r = c.regularity;
    anchored(c, "regularity.delta", [&] {
        if (!(r.delta >= 0.25 && r.delta <= 0.75)) throw ConfigError("must lie in [1/4, 3/4]");
    });
    anchored(c, "regularity.dichotomy_delta", [&] {
        if (!(r.dichotomy_delta > 0.0 && r.dichotomy_delta < 1.0)) throw ConfigError("must lie in (0, 1)");
    });
    anchored(c, "regularity.rho", [&] {
        if (!(r.rho >= 0.125 && r.rho <= 0.5)) throw ConfigError("must lie in [1/8, 1/2]");
    });
    anchored(c, "regularity.k_max", [&] {
        if (r.k_max < 0) throw ConfigError("must be non-negative");
    });
    anchored(c, "regularity.L0", [&] {
        if (!(r.L0 >= 0.0 && r.C > 0.0 && r.eps_bar > 0.0 && r.C_tilde > 0.0)) {
            throw ConfigError("L0 must be non-negative; C, eps_bar and C_tilde positive");
        }
    });
    anchored(c, "regularity.claim_grid", [&] {
        for (double d : r.claim_grid)
            if (!(d > 0.0 && d < 1.0)) throw ConfigError("entries must lie in (0, 1)");
    });
    anchored(c, "viscosity.profiles", [&] { c.viscosity.family.validate(); });
    anchored(c, "viscosity.margin", [&] {
        if (!(c.viscosity.margin > 0.0 && c.viscosity.slack > 0.0)) {
            throw ConfigError("margin and slack must be positive");
        }
    });
    if (!c.viscosity.b_min) c.viscosity.b_min = c.law.M;
    anchored(c, "viscosity.b_min", [&] {
        if (!(*c.viscosity.b_min >= 0.0)) throw ConfigError("must be non-negative");
    });
    if (!c.barrier.gamma_b) c.barrier.gamma_b = c.n;
    if (!c.barrier.sigma) c.barrier.sigma = c.law.sigma;
    anchored(c, "barrier.d", [&] {
        if (!(c.barrier.d > 0.0) || !(c.barrier.c0 >= 0.0)) throw ConfigError("d must be positive, c0 non-negative");
    });
    anchored(c, "limit.K", [&] {
        for (std::size_t i = 0; i < c.K_list.size(); ++i) {
            if (!(c.K_list[i] >= 1.0) || (i > 0 && !(c.K_list[i] > c.K_list[i - 1]))) {
                throw ConfigError("must be increasing with K >= 1");
            }
        }
    });
}

nlohmann::ordered_json resolved_keys(const ExperimentConfig& config) {
    Json out = Json::object();
    for (const Key& k : keys()) out[k.name] = k.get(config);
    return out;
}

GridPtr make_grid(const ExperimentConfig& config) { return GridSpec::build(config.n, config.R, config.h); }

BoundaryData make_boundary(const ExperimentConfig& config) {
    const BoundarySpec& b = config.boundary;
    const int n = config.n;
    const Vec nu = b.nu.value_or(Vec{});
    switch (b.kind) {
        case BoundaryKind::two_plane: {
            const TwoPlane p = TwoPlane::make(config.law, b.beta, nu, b.x0, n);
            return [p](const Vec& x) { return p(x); };
        }
        case BoundaryKind::scaled_two_plane: {
            const TwoPlane p = TwoPlane::make(config.law, b.amplitude * b.beta, nu, b.x0, n);
            const double wave = b.amplitude * b.perturbation;
            const double k = b.mode * std::numbers::pi;
            return [=](const Vec& x) { return p(x) + wave * std::sin(k * x[0]); };
        }
        case BoundaryKind::harmonic_mode: {
            const double amp = b.amplitude;
            const double pert = b.perturbation;
            const int m = b.mode;
            return [=](const Vec& x) {
                const double r = std::hypot(x[0], x[1]);
                return amp * std::pow(r, m) * std::cos(m * std::atan2(x[1], x[0])) + pert;
            };
        }
        case BoundaryKind::custom_table: {
            std::ifstream in(b.table);
            if (!in) throw ConfigError("cannot open boundary.table '" + b.table + "'");
            const ScalarField table = read_field(in);
            const GridSpec& tg = table.grid();
            if (tg.dim() != n || std::abs(tg.spacing() - config.h) > 1e-12 * config.h) {
                throw ConfigError("boundary.table grid does not match grid.n and grid.h");
            }
            return [table](const Vec& x) {
                const GridSpec& g = table.grid();
                Lattice z{};
                for (int i = 0; i < g.dim(); ++i) z[i] = static_cast<int>(std::lround(x[i] / g.spacing()));
                const NodeId id = g.find(z);
                if (id == kNoNode) throw InputError("boundary.table has no value at a shell node");
                return table[id];
            };
        }
    }
    throw ConfigError("unknown boundary kind");
}

BoundaryData make_scaled_boundary(const ExperimentConfig& config, double K) {
    ExperimentConfig scaled = config;
    BoundarySpec& b = scaled.boundary;
    switch (b.kind) {
        case BoundaryKind::two_plane:
            b.kind = BoundaryKind::scaled_two_plane;
            b.amplitude = K;
            b.perturbation = 0.0;
            return make_boundary(scaled);
        case BoundaryKind::scaled_two_plane:
            b.amplitude *= K;
            return make_boundary(scaled);
        case BoundaryKind::harmonic_mode:
        case BoundaryKind::custom_table: break;
    }
    BoundaryData base = make_boundary(config);
    return [base, K](const Vec& x) { return K * base(x); };
}

BarrierSpec make_barrier(const ExperimentConfig& config, double c0) {
    BarrierSpec s;
    s.x0 = config.barrier.x0;
    s.d = config.barrier.d;
    s.gamma_b = config.barrier.gamma_b.value_or(config.n);
    s.sigma = config.barrier.sigma.value_or(config.law.sigma);
    s.c0 = c0;
    return s;
}

double b_min(const ExperimentConfig& config) { return config.viscosity.b_min.value_or(config.law.M); }

}  // namespace fbp
