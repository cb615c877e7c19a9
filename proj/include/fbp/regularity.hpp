#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "fbp/elliptic.hpp"
#include "fbp/grid.hpp"
#include "fbp/jump_law.hpp"
#include "fbp/solver.hpp"

namespace fbp {

/// Smallest radius at which scale-indexed quantities are measured, in units of h.
inline constexpr double kResolutionFloor = 8.0;

struct DecayReport {
    double delta = 0.5;
    double L0 = 1.0;
    /// r_k = R delta^k for k = 0..k_max, all >= 8h.
    std::vector<double> radii;
    /// a(r_k) = sup_{B_{r_k}} |u| / r_k.
    std::vector<double> a_values;
    int k_max = 0;
    double sup_norm = 0.0;
    /// Smallest C with a(r_k) <= C max(sup_norm, L0) for every k.
    double C_fit = 0.0;
    /// Slope of log osc_{B_r} u against log r (least squares over the radii).
    double holder_exponent_fit = 0.0;
    /// False when no sign change lies within sqrt(n) h of the origin.
    bool centered = true;
};

/// Throws ResolutionError when not even r_0 = R reaches the floor and
/// InputError for delta outside [1/4, 3/4].
DecayReport dyadic_decay(const ScalarField& field, double delta, double L0);

struct ClaimDecay {
    double best_delta = 0.0;
    bool holds = false;
};

/// Largest delta in `delta_grid` with sup_{B_{delta R}} |u| <= 1 - delta. The
/// caller normalizes sup_{B_R} |u| to 1 (checked to 1e-6) and the field must
/// change sign within sqrt(n) h of the origin; both violations throw InputError.
ClaimDecay claim_decay(const ScalarField& field, const std::vector<double>& delta_grid);

struct Dichotomy {
    bool lipschitz_holds = false;
    bool decay_holds = false;
    double max_gradient = 0.0;
    double sup_norm = 0.0;
    double sup_inner = 0.0;
};

/// Lipschitz alternative: max |grad u| over interior nodes of B_{delta R} is at
/// most C max(sup_{B_R} |u|, L0). Decay alternative: (1/delta) sup_{B_{delta R}} |u|
/// <= 1/2 sup_{B_R} |u|. Both are reported; neither is assumed.
Dichotomy dichotomy(const ScalarField& field, double delta, double L0, double C);

/// (1/r) max over nodes of B_r(plane.x0) of |u - U_beta|. Throws ResolutionError
/// for r < 8h.
double flatness(const ScalarField& field, const TwoPlane& plane, double r);

/// Two-plane through `center` minimizing the flatness at scale r. Directions:
/// 2 n 16 coarse directions on the sphere, then 3 rounds of coordinatewise
/// golden-section refinement in tangent angles; for each direction beta >= 0
/// by golden-section search, with alpha = G(beta). Deterministic. Throws
/// NoInterfaceError when u does not change sign in B_r(center).
TwoPlane best_fit_plane(const ScalarField& field, double r, const JumpLaw& law, const Vec& center);
TwoPlane best_fit_plane(const ScalarField& field, double r, const JumpLaw& law);

struct CascadeStep {
    double r = 0.0;
    double eps = 0.0;
    Vec nu{};
    double beta = 0.0;
    /// Checks against the previous step (true for k = 0).
    bool halving_ok = true;
    bool direction_ok = true;
    bool slope_ok = true;
};

struct FlatnessReport {
    Vec center{};
    double rho = 0.5;
    double eps_bar = 0.1;
    double C_tilde = 1.0;
    bool hypothesis_met = false;
    std::vector<CascadeStep> steps;
    /// Fitted exponent of |nu_k - nu_last| ~ r_k^gamma; empty with fewer than
    /// two usable scales.
    std::optional<double> gamma_fit;
    /// eps_k strictly decreasing over all recorded scales.
    bool strictly_decreasing = false;
    bool pattern_holds = false;
};

/// Point of the discrete free boundary nearest the origin: the zero of the
/// linear interpolant on the closest sign-changing axis edge. Throws
/// NoInterfaceError for one-signed fields.
Vec free_boundary_point_nearest_origin(const ScalarField& field);

/// Improvement-of-flatness cascade at r_k = r0 rho^k (k <= k_max, r_k >= 8h)
/// around `center`, with r0 the largest radius whose ball stays inside the
/// grid. Checks eps_{k+1} <= eps_k / 2 + 4h / r_{k+1},
/// |nu_{k+1} - nu_k| <= C_tilde eps_k and |beta_{k+1} - beta_k| <= C_tilde beta_k eps_k
/// (the last two without a resolution allowance).
/// An initial flatness above eps_bar is reported as hypothesis_met = false.
FlatnessReport flatness_cascade(const ScalarField& field, const JumpLaw& law, double rho,
                                int k_max, double eps_bar, double C_tilde, const Vec& center);

struct BarrierSpec {
    Vec x0{};
    double d = 0.5;
    double gamma_b = 2.0;
    double c0 = 1.0;
    double sigma = 0.5;

    /// c0 / ((d/2)^-gamma_b - d^-gamma_b).
    double c() const;
    /// Throws InvariantError unless gamma_b > n - 2, c > 0 and d >= 8h.
    void validate(const GridSpec& grid) const;
    /// psi at distance rho from x0.
    double psi(double rho) const;
};

/// Nodal values of psi: c (|x - x0|^-gamma_b - d^-gamma_b) outside B_{d/2}(x0),
/// c0 inside.
ScalarField barrier_field(const GridPtr& grid, const BarrierSpec& spec);

struct AnnulusLaplacian {
    double min_value = 0.0;
    NodeId node = kNoNode;
    int count = 0;
};

/// Minimum of the 5-point (2n+1-point) discrete Laplacian of psi over interior
/// nodes with d/2 + 2h <= |x - x0| <= 2d - 2h.
AnnulusLaplacian barrier_laplacian(const GridPtr& grid, const BarrierSpec& spec);

struct BarrierComparison {
    bool holds = true;
    /// max (w - u) over the annulus.
    double worst_gap = 0.0;
    NodeId worst_node = kNoNode;
};

/// Compares u with w = psi^+ - (sigma/2) psi^- on D = B_{2d}(x0) \ B_{d/2}(x0);
/// holds when u >= w - 1e-10 at every node of D. Throws GeometryError when D
/// leaves the grid ball.
BarrierComparison barrier_comparison(const ScalarField& field, const BarrierSpec& spec);

/// max over interior nodes (with a full stencil for non-Laplace operators) of
/// h^2 |F(D^2 u)|, straight across the interface.
double plain_pde_residual(const ScalarField& field, const OperatorSpec& op);

struct LimitRow {
    double K = 1.0;
    double residual = 0.0;
    /// sqrt-law reference G(K)/K.
    double g_ratio = 1.0;
    bool converged = false;
    int iterations = 0;
};

/// Boundary data at amplitude K.
using ScaledBoundary = std::function<BoundaryData(double K)>;

/// For each K: solve with data scaled(K), rescale u/K and record its plain
/// PDE residual. Non-converged solves are flagged, not thrown.
std::vector<LimitRow> limit_equation_residual(const JumpLaw& law, const OperatorSpec& op,
                                              const ScaledBoundary& scaled, const std::vector<double>& K_list,
                                              const GridPtr& grid, const SolveConfig& config);

/// Same with scaled(K) = K g.
std::vector<LimitRow> limit_equation_residual(const JumpLaw& law, const OperatorSpec& op,
                                              const BoundaryData& base, const std::vector<double>& K_list,
                                              const GridPtr& grid, const SolveConfig& config);

}  // namespace fbp
