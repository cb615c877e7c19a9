#pragma once

#include <functional>
#include <vector>

#include "fbp/elliptic.hpp"
#include "fbp/grid.hpp"
#include "fbp/jump_law.hpp"

namespace fbp {

struct SolveConfig {
    /// Bound on max(pde_residual, fbc_residual) for convergence.
    double tolerance = 1e-9;
    int max_iterations = 20000;
    /// Fraction of the flux mismatch applied per interface update, in (0, 1].
    double damping = 0.5;
    /// Over-relaxation factor for PDE nodes; 0 selects the estimate for the
    /// Laplacian on the ball, 1 gives plain Gauss-Seidel.
    double relaxation = 0.0;
    /// Over-relaxation of the exact node solves within 2h of the interface.
    double near_relaxation = 1.7;

    void validate() const;
};

/// Dirichlet data as a function of position; only sampled on fixed nodes.
using BoundaryData = std::function<double(const Vec&)>;

struct SolveResult {
    ScalarField field;
    int iterations = 0;
    double pde_residual = 0.0;
    double fbc_residual = 0.0;
    bool converged = false;
    /// max(pde_residual, fbc_residual) after each sweep.
    std::vector<double> history;
    /// Interface nodes treated as PDE nodes in the final sweep.
    int degenerate_nodes = 0;
    double relaxation = 1.0;
};

struct Residual {
    double pde_residual = 0.0;
    double fbc_residual = 0.0;
    int degenerate_nodes = 0;
};

struct InterfaceDerivatives {
    /// Unit normal pointing into the positive phase.
    Vec nu{};
    double u_nu_plus = 0.0;
    double u_nu_minus = 0.0;
    /// Factor kappa = G(t)/t at t = max(u_nu_minus, h), clamped to [sigma, 1/sigma]. A
    /// non-positive value v near the interface continues the positive phase as
    /// kappa * v (and a positive value continues the negative phase as v / kappa).
    double extension = 1.0;
    bool degenerate = false;
};

/// Normal and one-sided derivatives at a band node. nu is the normalized
/// centered-difference gradient of the positive-phase continuation at the node;
/// u_nu^+ and u_nu^- are first-order differences to the multilinear
/// interpolants at x + h nu and x - h nu of the continued fields. nu, the
/// extension factor and u_nu^- are iterated to a fixed point, so an exact
/// two-plane field gives exact slopes for any normal. Both derivatives are
/// clamped at zero. Sets `degenerate` on shell nodes, when the gradient is below
/// 1e-8, or when an interpolation stencil leaves the ball.
InterfaceDerivatives interface_derivatives(const ScalarField& field, NodeId band_node,
                                           const JumpLaw& law);

/// Nodes held at the boundary data: the shell, plus nodes without a full
/// Hessian stencil when the operator needs one.
std::vector<std::uint8_t> fixed_node_mask(const GridSpec& grid, const OperatorSpec& op);

/// Max over free nodes of the scaled defect h^2 |.| of the node equation, and
/// max flux mismatch |u_nu^+ - G(u_nu^-)| over non-degenerate band nodes.
/// Nodes within 2h of the interface use the blended equation
/// (1 - w) F(D^2 E) + w F(E_nunu nu nu^T), E the continuation of the node's
/// phase and w = clamp(2 - d/h, 0, 1) from the distance estimate d; other nodes
/// use F(D^2 u). Throws InvariantError on a non-finite residual.
Residual residual(const ScalarField& field, const OperatorSpec& op, const JumpLaw& law);

/// One-node solve of F(D^2 u) = 0 for the value at `id` with all neighbors
/// frozen (bisection to 1e-12 for nonlinear operators).
double pde_node_value(const ScalarField& field, NodeId id, const OperatorSpec& op);

/// Gauss-Seidel relaxation of the two-phase problem: over-relaxed PDE updates
/// away from the interface, exact node solves of the blended equation near it,
/// damped flux-balance shifts at band nodes. Non-convergence is reported
/// through `converged`, not thrown.
SolveResult solve_dirichlet(const GridPtr& grid, const OperatorSpec& op, const JumpLaw& law,
                            const BoundaryData& boundary, const SolveConfig& config);

/// Over-relaxation factor used when SolveConfig::relaxation is 0.
double default_relaxation(const GridSpec& grid);

}  // namespace fbp
