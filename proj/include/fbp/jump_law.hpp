#pragma once

#include <string>
#include <vector>

#include "fbp/grid.hpp"

namespace fbp {

enum class LawKind { sqrt1p, linear, tabulated };

std::string to_string(LawKind kind);
LawKind law_kind_from_string(const std::string& name);

/// The free boundary flux law G: u_nu^+ = G(u_nu^-), queried for t >= 0.
///
/// `M` is the threshold above which the large-t conditions are checked,
/// `sigma` the two-sided bound constant and `delta_band` the tolerance of the
/// relaxed slope band |G' - 1| <= delta.
struct JumpLaw {
    LawKind kind = LawKind::sqrt1p;
    double slope = 1.0;
    double intercept = 0.0;
    std::vector<double> table_t;
    std::vector<double> table_g;
    double M = 1.0;
    double sigma = 0.5;
    double delta_band = 0.1;

    static JumpLaw sqrt1p();
    static JumpLaw linear(double slope, double intercept);
    static JumpLaw identity() { return linear(1.0, 0.0); }
    /// Throws ConfigError unless both columns are strictly increasing.
    static JumpLaw tabulated(std::vector<double> t, std::vector<double> g);

    /// Throws ConfigError when an invariant fails.
    void validate() const;
};

/// G(t). Tabulated laws interpolate linearly and extrapolate with the end
/// segments. Throws DomainError for t < 0.
double g_eval(const JumpLaw& law, double t);

/// Reads a two-column CSV (t, G(t)); lines starting with '#' are skipped.
JumpLaw read_law_table(const std::string& path);

struct AsymptoticsReport {
    bool limit_ok = false;
    bool second_order_ok = false;
    bool band_ok = false;
    /// max |t G''(t)| over the sample grid.
    double second_order_constant = 0.0;
    /// |G'(t) - 1| at the largest sample.
    double tail_slope_gap = 0.0;
};

/// Checks G'(t) -> 1, t G''(t) = O(1) and the band |G' - 1| <= delta on a
/// geometric sample grid in [M, t_max], derivatives by central differences
/// with relative step 1e-5. Throws InvariantError on non-monotone samples.
AsymptoticsReport check_asymptotics(const JumpLaw& law, double t_max, double delta);

/// sigma^-1 t >= G(t) >= sigma t on a uniform sample of (M, t_max] with
/// spacing at most (t_max - M)/1e4.
bool check_two_sided(const JumpLaw& law, double sigma, double t_max);

/// Tabulated G~(t) = r^(1-a) G(r^(a-1) t), 512 samples per decade on a
/// geometric grid (plus t = 0).
JumpLaw rescale_law(const JumpLaw& law, double r, double alpha_exp);

/// Two-plane profile U(x) = alpha ((x-x0).nu)^+ - beta ((x-x0).nu)^- with alpha = G(beta).
struct TwoPlane {
    double beta = 1.0;
    double alpha = 1.0;
    Vec nu{};
    Vec x0{};
    int dim = 2;

    /// Normalizes nu and sets alpha = G(beta). Throws InputError for beta < 0
    /// or a zero direction.
    static TwoPlane make(const JumpLaw& law, double beta, const Vec& nu, const Vec& x0, int dim);
    /// Explicit slopes, for perturbed profiles that break alpha = G(beta).
    static TwoPlane with_slopes(double alpha, double beta, const Vec& nu, const Vec& x0, int dim);

    double operator()(const Vec& x) const;
};

ScalarField two_plane_field(const GridPtr& grid, const TwoPlane& plane);

}  // namespace fbp
