#include "fbp/suite.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "fbp/errors.hpp"

namespace fbp {

namespace {

using Json = nlohmann::ordered_json;

struct Instance {
    std::string label;
    SolveResult result;
    double seconds = 0.0;
};

ExperimentConfig with_grid(const ExperimentConfig& base, int n, double h) {
    ExperimentConfig c = base;
    c.n = n;
    c.R = 1.0;
    c.h = h;
    c.op = OperatorSpec::laplace();
    c.law = JumpLaw::sqrt1p();
    c.boundary = BoundarySpec{};
    c.boundary.nu.reset();
    c.origin.clear();
    return c;
}

Instance solve(const ExperimentConfig& cfg, const std::string& label, const SuiteLog& log) {
    ExperimentConfig c = cfg;
    resolve(c);
    const auto t0 = std::chrono::steady_clock::now();
    Instance inst{label, solve_dirichlet(make_grid(c), c.op, c.law, make_boundary(c), c.solver), 0.0};
    inst.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (log) {
        char line[256];
        std::snprintf(line, sizeof line, "%s: converged=%d iterations=%d time=%.1fs", label.c_str(),
                      inst.result.converged, inst.result.iterations, inst.seconds);
        log(line);
    }
    return inst;
}

double max_error(const ScalarField& u, const TwoPlane& p) {
    double err = 0.0;
    const GridSpec& g = u.grid();
    for (NodeId id = 0; id < static_cast<NodeId>(g.size()); ++id) {
        err = std::max(err, std::abs(u[id] - p(g.position(id))));
    }
    return err;
}

NodeId band_node_nearest_origin(const ScalarField& u) {
    const PhaseDecomposition ph = phase_split(u);
    NodeId best = kNoNode;
    for (NodeId id : ph.interface_band) {
        if (best == kNoNode || u.grid().distance(id) < u.grid().distance(best)) best = id;
    }
    if (best == kNoNode) throw NoInterfaceError("field has no interface band");
    return best;
}

int count_kind(const FbcCheck& c, ViolationKind kind) {
    return static_cast<int>(std::count_if(c.violations.begin(), c.violations.end(),
                                          [&](const Violation& v) { return v.kind == kind; }));
}

Json vec_json(const Vec& v, int n) {
    Json a = Json::array();
    for (int i = 0; i < n; ++i) a.push_back(v[i]);
    return a;
}

CriterionRow two_plane_row(const ExperimentConfig& base, const SuiteLog& log, double& seconds) {
    CriterionRow row{1, "two_plane_oracle", 0.0, 0.0, false, Json::object()};
    const std::vector<int> cells{32, 64, 128};
    std::vector<double> errors;
    bool converged = true;
    double bound = 0.0;
    for (int m : cells) {
        ExperimentConfig c = with_grid(base, 2, 1.0 / m);
        const Instance inst = solve(c, "two_plane h=1/" + std::to_string(m), log);
        const TwoPlane p = TwoPlane::make(c.law, 1.0, Vec{0.0, 1.0}, Vec{}, 2);
        errors.push_back(max_error(inst.result.field, p));
        converged = converged && inst.result.converged;
        if (m == 64) {
            seconds = inst.seconds;
            bound = 2.0 * c.h * (p.alpha + p.beta);
        }
    }
    row.measured = errors[1];
    row.threshold = bound;
    const bool refine = errors[1] <= 0.7 * errors[0] && errors[2] <= 0.7 * errors[1];
    row.pass = converged && errors[1] <= bound && refine;
    row.detail = {{"h", {1.0 / 32, 1.0 / 64, 1.0 / 128}},
                  {"sup_error", errors},
                  {"bound_h64", bound},
                  {"ratio_64_32", errors[1] / errors[0]},
                  {"ratio_128_64", errors[2] / errors[1]},
                  {"converged", converged}};
    return row;
}

CriterionRow fbc_row(const ExperimentConfig& base, const SuiteLog& log) {
    CriterionRow row{2, "fbc_detector", 0.0, 0.0, false, Json::object()};
    ExperimentConfig c = with_grid(base, 2, 1.0 / 64);
    resolve(c);
    const GridPtr grid = make_grid(c);
    const double beta = 1.0;
    const double alpha = g_eval(c.law, beta);
    const double slack = 0.05;
    const double bmin = b_min(c);
    auto field_with = [&](double a) {
        return two_plane_field(grid, TwoPlane::with_slopes(a, beta, Vec{0.0, 1.0}, Vec{}, 2));
    };

    const ScalarField exact = field_with(alpha);
    int exact_violations = 0;
    int checked = 0;
    for (NodeId id : phase_split(exact).interface_band) {
        const FbcCheck r = check_fbc(exact, c.law, id, c.viscosity.family, slack, bmin);
        if (r.skipped) continue;
        ++checked;
        exact_violations += static_cast<int>(r.violations.size());
    }
    const ScalarField up = field_with(alpha + 0.2);
    const ScalarField down = field_with(alpha - 0.2);
    const FbcCheck r_up = check_fbc(up, c.law, band_node_nearest_origin(up), c.viscosity.family, slack, bmin);
    const FbcCheck r_down =
        check_fbc(down, c.law, band_node_nearest_origin(down), c.viscosity.family, slack, bmin);
    const int up1 = count_kind(r_up, ViolationKind::fbc_case1);
    const int down2 = count_kind(r_down, ViolationKind::fbc_case2);

    row.measured = exact_violations;
    row.threshold = 0.0;
    row.pass = checked > 0 && exact_violations == 0 && up1 > 0 && down2 > 0;
    row.detail = {{"slack", slack},
                  {"b_min", bmin},
                  {"exact_band_nodes_checked", checked},
                  {"exact_violations", exact_violations},
                  {"plus_0.2_case1", up1},
                  {"plus_0.2_case2", count_kind(r_up, ViolationKind::fbc_case2)},
                  {"minus_0.2_case1", count_kind(r_down, ViolationKind::fbc_case1)},
                  {"minus_0.2_case2", down2}};
    if (log) log("fbc detector: exact violations=" + std::to_string(exact_violations));
    return row;
}

ExperimentConfig perturbed(const ExperimentConfig& base, double h, double amplitude, double perturbation) {
    ExperimentConfig c = with_grid(base, 2, h);
    c.boundary.kind = BoundaryKind::scaled_two_plane;
    c.boundary.beta = 1.0;
    c.boundary.amplitude = amplitude;
    c.boundary.perturbation = perturbation;
    c.boundary.mode = 1;
    return c;
}

}  // namespace

SuiteResult run_suite(const ExperimentConfig& base_in, const SuiteLog& log) {
    ExperimentConfig base = base_in;
    resolve(base);
    const RegularityConfig& reg = base.regularity;
    SuiteResult out;

    out.rows.push_back(two_plane_row(base, log, out.two_plane_seconds));
    out.rows.push_back(fbc_row(base, log));

    // Amplitude family shared by criteria 3-5.
    const std::vector<double> amplitudes{1.0, 2.0, 4.0, 8.0, 16.0};
    const double suite_perturbation = 0.25;
    std::vector<Instance> coarse, fine;
    for (double a : amplitudes) {
        const std::string tag = "amplitude " + std::to_string(static_cast<int>(a));
        coarse.push_back(solve(perturbed(base, 1.0 / 32, a, suite_perturbation), tag + " h=1/32", log));
        fine.push_back(solve(perturbed(base, 1.0 / 64, a, suite_perturbation), tag + " h=1/64", log));
    }
    const Instance cascade_inst = solve(perturbed(base, 1.0 / 128, 1.0, 0.05), "cascade h=1/128", log);

    {
        CriterionRow row{3, "lipschitz_boundedness", 0.0, 0.2, false, Json::object()};
        double c_coarse = 0.0, c_fine = 0.0;
        bool converged = true;
        Json per = Json::array();
        for (std::size_t i = 0; i < amplitudes.size(); ++i) {
            const DecayReport dc = dyadic_decay(coarse[i].result.field, reg.delta, reg.L0);
            const DecayReport df = dyadic_decay(fine[i].result.field, reg.delta, reg.L0);
            c_coarse = std::max(c_coarse, dc.C_fit);
            c_fine = std::max(c_fine, df.C_fit);
            converged = converged && coarse[i].result.converged && fine[i].result.converged;
            per.push_back({{"amplitude", amplitudes[i]},
                           {"C_fit_h32", dc.C_fit},
                           {"C_fit_h64", df.C_fit},
                           {"a_values_h64", df.a_values}});
        }
        row.measured = std::abs(c_fine / c_coarse - 1.0);
        row.pass = converged && row.measured <= row.threshold;
        row.detail = {{"delta", reg.delta},   {"L0", reg.L0},          {"C_fit_h32", c_coarse},
                      {"C_fit_h64", c_fine}, {"instances", per}, {"converged", converged}};
        out.rows.push_back(row);
    }

    std::vector<const Instance*> suite_instances;
    for (const Instance& i : fine) suite_instances.push_back(&i);
    suite_instances.push_back(&cascade_inst);

    {
        CriterionRow row{4, "holder_decay", 0.0, 0.125, true, Json::object()};
        double worst = 1.0;
        Json per = Json::array();
        for (const Instance* inst : suite_instances) {
            if (!inst->result.converged) continue;
            ScalarField u = inst->result.field;
            const double sup = sup_norm_on_ball(u, u.grid().radius());
            for (double& v : u.values()) v /= sup;
            Json item = {{"instance", inst->label}};
            try {
                const ClaimDecay cd = claim_decay(u, reg.claim_grid);
                worst = std::min(worst, cd.best_delta);
                item["best_delta"] = cd.best_delta;
                item["holds"] = cd.holds;
            } catch (const Error& e) {
                worst = 0.0;
                item["error"] = e.what();
            }
            per.push_back(item);
        }
        row.measured = worst;
        row.pass = worst >= row.threshold;
        row.detail = {{"instances", per}};
        out.rows.push_back(row);
    }

    {
        CriterionRow row{5, "dichotomy", 0.0, 1.0, false, Json::object()};
        int with_flag = 0, total = 0;
        Json per = Json::array();
        for (const Instance* inst : suite_instances) {
            if (!inst->result.converged) continue;
            const Dichotomy d = dichotomy(inst->result.field, reg.dichotomy_delta, reg.L0, reg.C);
            ++total;
            with_flag += d.lipschitz_holds || d.decay_holds;
            per.push_back({{"instance", inst->label},
                           {"lipschitz_holds", d.lipschitz_holds},
                           {"decay_holds", d.decay_holds},
                           {"max_gradient", d.max_gradient},
                           {"sup_norm", d.sup_norm}});
        }
        row.measured = total > 0 ? static_cast<double>(with_flag) / total : 0.0;
        row.pass = total > 0 && with_flag == total;
        row.detail = {{"delta", reg.dichotomy_delta}, {"C", reg.C}, {"L0", reg.L0}, {"instances", per}};
        out.rows.push_back(row);
    }

    {
        CriterionRow row{6, "flatness_cascade", 0.0, reg.C_tilde, false, Json::object()};
        const ScalarField& u = cascade_inst.result.field;
        const Vec center = free_boundary_point_nearest_origin(u);
        const FlatnessReport rep =
            flatness_cascade(u, base.law, reg.rho, reg.k_max, reg.eps_bar, reg.C_tilde, center);
        double needed = 0.0;
        bool directions = true;
        Json steps = Json::array();
        for (std::size_t k = 0; k < rep.steps.size(); ++k) {
            const CascadeStep& s = rep.steps[k];
            if (k > 0) {
                Vec d{};
                for (int i = 0; i < 2; ++i) d[i] = s.nu[i] - rep.steps[k - 1].nu[i];
                needed = std::max(needed, norm(d, 2) / rep.steps[k - 1].eps);
                directions = directions && s.direction_ok;
            }
            steps.push_back({{"r", s.r},
                             {"eps", s.eps},
                             {"nu", vec_json(s.nu, 2)},
                             {"beta", s.beta},
                             {"halving_ok", s.halving_ok},
                             {"direction_ok", s.direction_ok},
                             {"slope_ok", s.slope_ok}});
        }
        row.measured = needed;
        row.pass = cascade_inst.result.converged && rep.hypothesis_met && rep.steps.size() >= 2 &&
                   rep.strictly_decreasing && directions;
        row.detail = {{"center", vec_json(center, 2)},
                      {"rho", reg.rho},
                      {"hypothesis_met", rep.hypothesis_met},
                      {"strictly_decreasing", rep.strictly_decreasing},
                      {"pattern_holds", rep.pattern_holds},
                      {"steps", steps}};
        if (rep.gamma_fit) row.detail["gamma_fit"] = *rep.gamma_fit;
        out.rows.push_back(row);
    }

    {
        CriterionRow row{7, "barrier", 0.0, 1e-10, false, Json::object()};
        Json lap = Json::object();
        bool positive = true;
        for (int n : {2, 3}) {
            const GridPtr grid = GridSpec::build(n, 1.0, 1.0 / 128);
            BarrierSpec spec;
            spec.d = 0.5;
            spec.gamma_b = n;
            spec.c0 = 1.0;
            spec.sigma = base.law.sigma;
            const AnnulusLaplacian a = barrier_laplacian(grid, spec);
            positive = positive && a.min_value > 0.0;
            lap["n" + std::to_string(n)] = {{"min_laplacian", a.min_value}, {"nodes", a.count}};
            if (log) log("barrier laplacian n=" + std::to_string(n) + " nodes=" + std::to_string(a.count));
        }

        // Case-2 configuration: u >= c0 on B_{d/2}, free boundary at depth
        // 7d/4 below the center so that u >= -sigma c0 / 8 on the outer sphere.
        const double d = 0.25;
        ExperimentConfig c = with_grid(base, 2, 1.0 / 64);
        c.boundary.beta = 0.125;
        c.boundary.x0 = Vec{0.0, -1.75 * d};
        const Instance inst = solve(c, "barrier case 2 h=1/64", log);
        const ScalarField& u = inst.result.field;
        double inner_min = std::numeric_limits<double>::infinity();
        for (NodeId id = 0; id < static_cast<NodeId>(u.grid().size()); ++id) {
            if (u.grid().distance(id) <= d / 2.0) inner_min = std::min(inner_min, u[id]);
        }
        BarrierSpec spec;
        spec.d = d;
        spec.gamma_b = 2.0;
        spec.c0 = 0.9 * inner_min;
        spec.sigma = base.law.sigma;
        const BarrierComparison cmp = barrier_comparison(u, spec);
        row.measured = cmp.worst_gap;
        row.pass = positive && inst.result.converged && cmp.holds;
        row.detail = {{"laplacian", lap},
                      {"comparison",
                       {{"d", d}, {"c0", spec.c0}, {"holds", cmp.holds}, {"worst_gap", cmp.worst_gap}}}};
        out.rows.push_back(row);
    }

    {
        CriterionRow row{8, "limit_equation", 0.0, 1.0, false, Json::object()};
        ExperimentConfig c = with_grid(base, 2, 1.0 / 64);
        resolve(c);
        const ScaledBoundary scaled = [&c](double K) { return make_scaled_boundary(c, K); };
        const auto rows = limit_equation_residual(c.law, c.op, scaled, base.K_list, make_grid(c), c.solver);
        bool converged = true;
        bool monotone = true;
        double worst_ratio = 0.0;
        Json table = Json::array();
        for (std::size_t k = 0; k < rows.size(); ++k) {
            converged = converged && rows[k].converged;
            if (k > 0) {
                monotone = monotone && rows[k].residual <= rows[k - 1].residual;
                worst_ratio = std::max(worst_ratio, rows[k].residual / rows[k - 1].residual);
            }
            table.push_back({{"K", rows[k].K},
                             {"residual", rows[k].residual},
                             {"g_ratio", rows[k].g_ratio},
                             {"converged", rows[k].converged},
                             {"iterations", rows[k].iterations}});
            if (log) log("limit sweep K=" + std::to_string(static_cast<int>(rows[k].K)));
        }
        row.measured = worst_ratio;
        row.pass = converged && monotone && rows.size() >= 2;
        row.detail = {{"rows", table}};
        out.rows.push_back(row);
    }

    {
        CriterionRow row{9, "determinism_probe", 0.0, 1.0, false, Json::object()};
        const ExperimentConfig c = perturbed(base, 1.0 / 32, 1.0, suite_perturbation);
        const Instance a = solve(c, "determinism probe A", log);
        const Instance b = solve(c, "determinism probe B", log);
        const bool same = field_to_string(a.result.field) == field_to_string(b.result.field) &&
                          a.result.history == b.result.history;
        row.measured = same ? 1.0 : 0.0;
        row.pass = same;
        row.detail = {{"identical", same}};
        out.rows.push_back(row);
    }
    return out;
}

std::string suite_summary_csv(const SuiteResult& result) {
    std::ostringstream out;
    out << "criterion_id,measured,threshold,pass\n";
    char line[128];
    for (const CriterionRow& r : result.rows) {
        std::snprintf(line, sizeof line, "%d,%.9e,%.9e,%s\n", r.id, r.measured, r.threshold,
                      r.pass ? "true" : "false");
        out << line;
    }
    return out.str();
}

nlohmann::ordered_json suite_report(const SuiteResult& result) {
    Json rows = Json::array();
    for (const CriterionRow& r : result.rows) {
        rows.push_back({{"criterion_id", r.id},
                        {"name", r.name},
                        {"measured", r.measured},
                        {"threshold", r.threshold},
                        {"pass", r.pass},
                        {"detail", r.detail}});
    }
    return {{"schema", 1}, {"command", "suite"}, {"criteria", rows}};
}

}  // namespace fbp
