#include "fbp/runner.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "fbp/config.hpp"
#include "fbp/errors.hpp"
#include "fbp/suite.hpp"

namespace fbp {

namespace {

using Json = nlohmann::ordered_json;
namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNotConverged = 3;
constexpr int kExitInternal = 4;

int exit_code(const Error& e) {
    switch (e.kind()) {
        case Error::Kind::configuration:
        case Error::Kind::resolution:
        case Error::Kind::input:
        case Error::Kind::domain:
        case Error::Kind::geometry:
        case Error::Kind::no_interface:
            return kExitConfig;
        case Error::Kind::stencil:
        case Error::Kind::operator_failure:
        case Error::Kind::invariant:
            return kExitInternal;
    }
    return kExitInternal;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write '" + path.string() + "'");
    out << text;
}

void write_json(const fs::path& path, const Json& j) { write_text(path, j.dump(2) + "\n"); }

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

Json vec_json(const Vec& v, int n) {
    Json a = Json::array();
    for (int i = 0; i < n; ++i) a.push_back(v[i]);
    return a;
}

Json solve_json(const SolveResult& r) {
    return {{"converged", r.converged},
            {"iterations", r.iterations},
            {"pde_residual", r.pde_residual},
            {"fbc_residual", r.fbc_residual},
            {"degenerate_nodes", r.degenerate_nodes},
            {"relaxation", r.relaxation}};
}

class Context {
public:
    Context(const RunOptions& options, std::ostream& log) : options_(options), log_(log) {}

    void load() {
        config_ = options_.config_path.empty() ? ExperimentConfig{} : load_config(options_.config_path);
        for (const std::string& o : options_.overrides) apply_override(config_, o);
        if (options_.seed) apply_override(config_, "seed=" + std::to_string(*options_.seed));
        if (options_.margin) apply_override(config_, "viscosity.margin=" + num(*options_.margin));
        if (options_.slack) apply_override(config_, "viscosity.slack=" + num(*options_.slack));
        if (options_.profiles) apply_override(config_, "viscosity.profiles=" + std::to_string(*options_.profiles));
        if (options_.out_dir) config_.output = *options_.out_dir;
        resolve(config_);
        dir_ = config_.output;
        fs::create_directories(dir_);
        Json manifest = {{"schema", 1},
                         {"version", kVersion},
                         {"command", options_.command},
                         {"seed", config_.seed},
                         {"config", resolved_keys(config_)}};
        write_json(dir_ / "manifest.json", manifest);
    }

    const ExperimentConfig& config() const { return config_; }
    const fs::path& dir() const { return dir_; }
    std::ostream& log() { return log_; }

    SolveResult solve() {
        SolveResult r = solve_dirichlet(make_grid(config_), config_.op, config_.law, make_boundary(config_),
                                        config_.solver);
        write_text(dir_ / "field.csv", field_to_string(r.field));
        converged_ = r.converged;
        log_ << "solve: converged=" << (r.converged ? "true" : "false") << " iterations=" << r.iterations << "\n";
        return r;
    }

    int finish(Json report) {
        write_json(dir_ / "report.json", report);
        return converged_ ? kExitOk : kExitNotConverged;
    }

private:
    const RunOptions& options_;
    std::ostream& log_;
    ExperimentConfig config_;
    fs::path dir_;
    bool converged_ = true;
};

Json base_report(const std::string& command) { return {{"schema", 1}, {"command", command}}; }

int cmd_solve(Context& ctx) {
    const SolveResult r = ctx.solve();
    std::ostringstream csv;
    csv << "iteration,residual\n";
    for (std::size_t i = 0; i < r.history.size(); ++i) csv << i + 1 << "," << num(r.history[i]) << "\n";
    write_text(ctx.dir() / "history.csv", csv.str());
    Json report = base_report("solve");
    report.update(solve_json(r));
    return ctx.finish(report);
}

int cmd_analyze(Context& ctx) {
    const RegularityConfig& reg = ctx.config().regularity;
    const SolveResult r = ctx.solve();
    const DecayReport decay = dyadic_decay(r.field, reg.delta, reg.L0);
    const Dichotomy dich = dichotomy(r.field, reg.dichotomy_delta, reg.L0, reg.C);

    Json claim = Json::object();
    ScalarField normalized = r.field;
    const double sup = sup_norm_on_ball(normalized, normalized.grid().radius());
    if (sup > 0.0) {
        for (double& v : normalized.values()) v /= sup;
        try {
            const ClaimDecay c = claim_decay(normalized, reg.claim_grid);
            claim = {{"best_delta", c.best_delta}, {"holds", c.holds}};
        } catch (const InputError& e) {
            claim = {{"error", e.what()}};
        }
    } else {
        claim = {{"error", "field vanishes identically"}};
    }

    std::ostringstream csv;
    csv << "k,r,a\n";
    for (std::size_t k = 0; k < decay.a_values.size(); ++k) {
        csv << k << "," << num(decay.radii[k]) << "," << num(decay.a_values[k]) << "\n";
    }
    write_text(ctx.dir() / "decay.csv", csv.str());

    Json report = base_report("analyze");
    report["solve"] = solve_json(r);
    report["decay"] = {{"delta", decay.delta},
                       {"L0", decay.L0},
                       {"k_max", decay.k_max},
                       {"sup_norm", decay.sup_norm},
                       {"C_fit", decay.C_fit},
                       {"holder_exponent_fit", decay.holder_exponent_fit},
                       {"centered", decay.centered}};
    report["dichotomy"] = {{"delta", reg.dichotomy_delta},
                           {"lipschitz_holds", dich.lipschitz_holds},
                           {"decay_holds", dich.decay_holds},
                           {"max_gradient", dich.max_gradient},
                           {"sup_norm", dich.sup_norm},
                           {"sup_inner", dich.sup_inner}};
    report["claim"] = claim;
    return ctx.finish(report);
}

int cmd_viscosity(Context& ctx) {
    const ExperimentConfig& c = ctx.config();
    const SolveResult r = ctx.solve();
    std::vector<Violation> all = check_interior(r.field, c.op, c.viscosity.family, c.viscosity.margin);
    int checked = 0, skipped = 0;
    for (NodeId id : phase_split(r.field).interface_band) {
        const FbcCheck f = check_fbc(r.field, c.law, id, c.viscosity.family, c.viscosity.slack, b_min(c));
        if (f.skipped) {
            ++skipped;
            continue;
        }
        ++checked;
        all.insert(all.end(), f.violations.begin(), f.violations.end());
    }
    std::stable_sort(all.begin(), all.end(), [](const Violation& a, const Violation& b) {
        return a.node != b.node ? a.node < b.node : a.profile < b.profile;
    });

    Json list = Json::array();
    std::ostringstream csv;
    csv << "node,profile,kind,a,b,value\n";
    for (const Violation& v : all) {
        list.push_back({{"node", v.node},
                        {"position", vec_json(r.field.grid().position(v.node), c.n)},
                        {"profile", v.profile},
                        {"kind", to_string(v.kind)},
                        {"a", v.a},
                        {"b", v.b},
                        {"value", v.value}});
        csv << v.node << "," << v.profile << "," << to_string(v.kind) << "," << num(v.a) << "," << num(v.b) << ","
            << num(v.value) << "\n";
    }
    write_text(ctx.dir() / "violations.csv", csv.str());
    Json report = base_report("viscosity-check");
    report["solve"] = solve_json(r);
    report["margin"] = c.viscosity.margin;
    report["slack"] = c.viscosity.slack;
    report["profiles"] = c.viscosity.family.count;
    report["band_nodes_checked"] = checked;
    report["band_nodes_skipped"] = skipped;
    report["violations"] = list;
    return ctx.finish(report);
}

int cmd_cascade(Context& ctx) {
    const ExperimentConfig& c = ctx.config();
    const RegularityConfig& reg = c.regularity;
    const SolveResult r = ctx.solve();
    const Vec center = free_boundary_point_nearest_origin(r.field);
    const FlatnessReport rep = flatness_cascade(r.field, c.law, reg.rho, reg.k_max, reg.eps_bar, reg.C_tilde, center);

    Json steps = Json::array();
    std::ostringstream csv;
    csv << "k,r,eps,beta,halving_ok,direction_ok,slope_ok\n";
    for (std::size_t k = 0; k < rep.steps.size(); ++k) {
        const CascadeStep& s = rep.steps[k];
        steps.push_back({{"r", s.r},
                         {"eps", s.eps},
                         {"nu", vec_json(s.nu, c.n)},
                         {"beta", s.beta},
                         {"halving_ok", s.halving_ok},
                         {"direction_ok", s.direction_ok},
                         {"slope_ok", s.slope_ok}});
        csv << k << "," << num(s.r) << "," << num(s.eps) << "," << num(s.beta) << "," << s.halving_ok << ","
            << s.direction_ok << "," << s.slope_ok << "\n";
    }
    write_text(ctx.dir() / "cascade.csv", csv.str());
    Json report = base_report("cascade");
    report["solve"] = solve_json(r);
    report["center"] = vec_json(center, c.n);
    report["rho"] = rep.rho;
    report["eps_bar"] = rep.eps_bar;
    report["C_tilde"] = rep.C_tilde;
    report["hypothesis_met"] = rep.hypothesis_met;
    report["strictly_decreasing"] = rep.strictly_decreasing;
    report["pattern_holds"] = rep.pattern_holds;
    report["gamma_fit"] = rep.gamma_fit ? Json(*rep.gamma_fit) : Json(nullptr);
    report["steps"] = steps;
    return ctx.finish(report);
}

int cmd_barrier(Context& ctx) {
    const ExperimentConfig& c = ctx.config();
    const SolveResult r = ctx.solve();
    double c0 = c.barrier.c0;
    if (c0 == 0.0) {
        double inner = std::numeric_limits<double>::infinity();
        const GridSpec& g = r.field.grid();
        for (NodeId id = 0; id < static_cast<NodeId>(g.size()); ++id) {
            Vec d{};
            const Vec x = g.position(id);
            for (int i = 0; i < c.n; ++i) d[i] = x[i] - c.barrier.x0[i];
            if (norm(d, c.n) <= c.barrier.d / 2.0) inner = std::min(inner, r.field[id]);
        }
        if (!(inner > 0.0)) throw InputError("u is not positive on B_{d/2}(x0); set barrier.c0 explicitly");
        c0 = 0.9 * inner;
    }
    const BarrierSpec spec = make_barrier(c, c0);
    const AnnulusLaplacian lap = barrier_laplacian(r.field.grid_ptr(), spec);
    const BarrierComparison cmp = barrier_comparison(r.field, spec);
    const ScalarField w = barrier_field(r.field.grid_ptr(), spec);

    std::ostringstream csv;
    csv << "node,distance,barrier,u\n";
    const GridSpec& g = w.grid();
    for (NodeId id = 0; id < static_cast<NodeId>(g.size()); ++id) {
        Vec d{};
        const Vec x = g.position(id);
        for (int i = 0; i < c.n; ++i) d[i] = x[i] - spec.x0[i];
        const double rho = norm(d, c.n);
        if (rho < spec.d / 2.0 || rho > spec.d) continue;
        csv << id << "," << num(rho) << "," << num(w[id]) << "," << num(r.field[id]) << "\n";
    }
    write_text(ctx.dir() / "barrier.csv", csv.str());
    Json report = base_report("barrier");
    report["solve"] = solve_json(r);
    report["spec"] = {{"x0", vec_json(spec.x0, c.n)},
                      {"d", spec.d},
                      {"gamma_b", spec.gamma_b},
                      {"c0", spec.c0},
                      {"sigma", spec.sigma}};
    report["laplacian"] = {{"min_value", lap.min_value}, {"node", lap.node}, {"count", lap.count}};
    report["comparison"] = {{"holds", cmp.holds}, {"worst_gap", cmp.worst_gap}, {"worst_node", cmp.worst_node}};
    return ctx.finish(report);
}

int cmd_limit(Context& ctx) {
    const ExperimentConfig& c = ctx.config();
    const ScaledBoundary scaled = [&c](double K) { return make_scaled_boundary(c, K); };
    const auto rows = limit_equation_residual(c.law, c.op, scaled, c.K_list, make_grid(c), c.solver);
    Json table = Json::array();
    std::ostringstream csv;
    csv << "K,residual,g_ratio,converged,iterations\n";
    bool converged = true;
    for (const LimitRow& r : rows) {
        converged = converged && r.converged;
        table.push_back({{"K", r.K},
                         {"residual", r.residual},
                         {"g_ratio", r.g_ratio},
                         {"converged", r.converged},
                         {"iterations", r.iterations}});
        csv << num(r.K) << "," << num(r.residual) << "," << num(r.g_ratio) << "," << r.converged << ","
            << r.iterations << "\n";
    }
    write_text(ctx.dir() / "limit.csv", csv.str());
    Json report = base_report("limit-sweep");
    report["rows"] = table;
    write_json(ctx.dir() / "report.json", report);
    return converged ? kExitOk : kExitNotConverged;
}

int cmd_suite(Context& ctx) {
    const SuiteResult s = run_suite(ctx.config(), [&](const std::string& line) { ctx.log() << line << "\n"; });
    write_text(ctx.dir() / "suite_summary.csv", suite_summary_csv(s));
    write_json(ctx.dir() / "report.json", suite_report(s));
    for (const CriterionRow& r : s.rows) {
        ctx.log() << "criterion " << r.id << " " << r.name << ": " << (r.pass ? "pass" : "fail") << "\n";
    }
    return kExitOk;
}

}  // namespace

int run(const RunOptions& options, std::ostream& log) {
    try {
        Context ctx(options, log);
        ctx.load();
        const std::string& c = options.command;
        if (c == "solve") return cmd_solve(ctx);
        if (c == "analyze") return cmd_analyze(ctx);
        if (c == "viscosity-check") return cmd_viscosity(ctx);
        if (c == "cascade") return cmd_cascade(ctx);
        if (c == "barrier") return cmd_barrier(ctx);
        if (c == "limit-sweep") return cmd_limit(ctx);
        if (c == "suite") return cmd_suite(ctx);
        log << "error: unknown command '" << c << "'\n";
        return kExitConfig;
    } catch (const Error& e) {
        log << "error: " << e.what() << "\n";
        return exit_code(e);
    } catch (const fs::filesystem_error& e) {
        log << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        log << "internal error: " << e.what() << "\n";
        return kExitInternal;
    }
}

}  // namespace fbp
