#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fbp/elliptic.hpp"
#include "fbp/grid.hpp"
#include "fbp/jump_law.hpp"

namespace fbp {

/// Random quadratic test profiles psi(x) = g . (x - y0) + 1/2 (x - y0)^T Q (x - y0).
/// Q has independent entries uniform in [-hessian_scale, hessian_scale]; the
/// gradient magnitude |g| is drawn from gradient_range. Profile 0 of every
/// family is affine (Q = 0).
struct TestProfileFamily {
    int count = 32;
    double g_min = 0.5;
    double g_max = 2.0;
    double hessian_scale = 0.25;
    std::uint64_t seed = 1;

    void validate() const;
};

struct TestProfile {
    double gradient = 1.0;
    SymMatrix Q;
};

/// The family drawn deterministically from its seed.
std::vector<TestProfile> sample_profiles(const TestProfileFamily& family, int n);

enum class ViolationKind {
    /// Touched from above by a strict supersolution.
    touched_from_above,
    /// Touched from below by a strict subsolution.
    touched_from_below,
    /// a psi^+ - b psi^- <= u near the free boundary with a >= G(b) + slack.
    fbc_case1,
    /// a psi^+ - b psi^- >= u near the free boundary with a <= G(b) - slack.
    fbc_case2,
};

std::string to_string(ViolationKind kind);

struct Violation {
    NodeId node = kNoNode;
    int profile = 0;
    ViolationKind kind = ViolationKind::touched_from_above;
    /// Normal slopes of the comparison function (free boundary cases only).
    double a = 0.0;
    double b = 0.0;
    /// Interior: h^2 F(Q) of the profile. Free boundary: gap u - Phi at the
    /// band node after sliding Phi to first contact.
    double value = 0.0;
};

/// Interior no-touching test. At every node whose full stencil ring lies in
/// its own phase and with |u| >= 2h |grad u| (at least 2h from the zero level
/// set by the linear estimate), each profile is anchored at the node value and the discrete
/// gradient: P(x) = u(x0) + grad u(x0) . (x - x0) + 1/2 (x - x0)^T Q (x - x0).
/// A profile with h^2 F(Q) <= -margin that stays strictly above u on the ring
/// is a touching from above; h^2 F(Q) >= margin and strictly below is a
/// touching from below. Violations are sorted by node, then profile.
std::vector<Violation> check_interior(const ScalarField& field, const OperatorSpec& op,
                                      const TestProfileFamily& family, double margin);

struct FbcCheck {
    std::vector<Violation> violations;
    bool skipped = false;
    std::string reason;
    /// Free boundary point used as y0 and the normal there.
    Vec y0{};
    Vec nu{};
};

/// Free boundary test at an interface-band node. y0 is the zero of the
/// continued negative phase along the band node's normal nu; each profile has
/// gradient |g| nu at y0 and Phi = a (psi/|g|)^+ - b (psi/|g|)^-, so a and b
/// are normal slopes. For b on a grid over [b_min, b_max] the extreme
/// admissible a is tested: case 1 with a = G(b) + slack, case 2 with
/// a = G(b) - slack. Phi is slid vertically to first contact with u on the
/// nodes within 4h of the band node; a violation is recorded when the contact
/// gap at the band node is at most h^2. Skipped (with a reason) at degenerate
/// or shell nodes.
FbcCheck check_fbc(const ScalarField& field, const JumpLaw& law, NodeId band_node,
                   const TestProfileFamily& family, double slack, double b_min);

}  // namespace fbp
