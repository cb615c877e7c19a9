#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fbp/elliptic.hpp"
#include "fbp/grid.hpp"
#include "fbp/jump_law.hpp"
#include "fbp/regularity.hpp"
#include "fbp/solver.hpp"
#include "fbp/viscosity.hpp"

#include <json.hpp>

namespace fbp {

enum class BoundaryKind { two_plane, scaled_two_plane, harmonic_mode, custom_table };

std::string to_string(BoundaryKind kind);

/// Dirichlet data from the fixed catalog (s = (x - x0) . nu, A = amplitude):
///   two_plane         G(beta) s^+ - beta s^-
///   scaled_two_plane  G(A beta) s^+ - A beta s^- + A perturbation sin(mode pi x_1)
///   harmonic_mode     A Re((x_1 + i x_2)^mode) + perturbation
///   custom_table      values of a field dump at the same lattice
/// Scaling a two-plane by A keeps the law: the result is U_{A beta}, not A U_beta.
struct BoundarySpec {
    BoundaryKind kind = BoundaryKind::two_plane;
    double beta = 1.0;
    std::optional<Vec> nu;  // e_n when unset
    Vec x0{};
    double amplitude = 1.0;
    double perturbation = 0.0;
    int mode = 1;
    std::string table;
};

struct RegularityConfig {
    double delta = 0.5;  // dyadic ratio of the decay table
    double L0 = 1.0;
    double C = 2.0;
    double dichotomy_delta = 0.25;
    double rho = 0.5;
    int k_max = 8;
    double eps_bar = 0.1;
    double C_tilde = 0.25;  // frozen from the h = 1/128 perturbed two-plane cascade
    std::vector<double> claim_grid{0.5, 0.4375, 0.375, 0.3125, 0.25, 0.1875, 0.125, 0.0625};
};

struct ViscosityConfig {
    double margin = 1e-8;
    double slack = 0.05;
    TestProfileFamily family;
    std::optional<double> b_min;  // G.M when unset
};

struct BarrierConfig {
    Vec x0{};
    double d = 0.25;
    std::optional<double> gamma_b;  // n when unset
    /// Plateau value; 0 takes 0.9 min u over B_{d/2}(x0) of the solved field.
    double c0 = 0.0;
    std::optional<double> sigma;  // G.sigma when unset
};

struct ExperimentConfig {
    int n = 2;
    double R = 1.0;
    double h = 1.0 / 64.0;
    OperatorSpec op;
    JumpLaw law;
    std::string law_table;
    BoundarySpec boundary;
    SolveConfig solver;
    RegularityConfig regularity;
    ViscosityConfig viscosity;
    BarrierConfig barrier;
    std::vector<double> K_list{1.0, 4.0, 16.0, 64.0};
    std::string output = "out";
    std::uint64_t seed = 1;

    /// Where each explicitly set key came from ("file:line" or "--override").
    std::map<std::string, std::string> origin;
};

/// Parse `key = value` lines ('#' starts a comment). Unknown or repeated keys
/// and malformed values throw ConfigError with the file and line.
ExperimentConfig parse_config(const std::string& text, const std::string& source_name);
ExperimentConfig load_config(const std::string& path);

/// Apply one `key=value` override.
void apply_override(ExperimentConfig& config, const std::string& assignment);

/// Fill unset defaults and validate every block against its module
/// invariants. Errors are ConfigError anchored at the responsible key.
void resolve(ExperimentConfig& config);

/// Every key with its resolved value, in a fixed order.
nlohmann::ordered_json resolved_keys(const ExperimentConfig& config);

GridPtr make_grid(const ExperimentConfig& config);
BoundaryData make_boundary(const ExperimentConfig& config);
/// The configured data at amplitude K (amplitude multiplied by K; two_plane
/// behaves like scaled_two_plane with amplitude K).
BoundaryData make_scaled_boundary(const ExperimentConfig& config, double K);
BarrierSpec make_barrier(const ExperimentConfig& config, double c0);
double b_min(const ExperimentConfig& config);

}  // namespace fbp
