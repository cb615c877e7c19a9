#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fbp {

inline constexpr int kMaxDim = 4;

/// Real vector in R^n; only the first `n` entries are meaningful.
using Vec = std::array<double, kMaxDim>;
/// Integer lattice coordinates z, with node position x = h z.
using Lattice = std::array<int, kMaxDim>;

using NodeId = std::int32_t;
inline constexpr NodeId kNoNode = -1;

double dot(const Vec& a, const Vec& b, int n);
double norm(const Vec& a, int n);

/// Cartesian lattice restricted to the closed ball of radius R at the origin.
///
/// Nodes are enumerated lexicographically in their integer coordinates. The
/// boundary shell consists of the nodes with at least one axis-neighbor
/// outside the ball; every other node is interior.
class GridSpec {
public:
    /// Throws ConfigError when R/h is not an integer (or n is out of range) and
    /// ResolutionError when R/h < 8.
    static std::shared_ptr<const GridSpec> build(int n, double R, double h);

    int dim() const noexcept { return n_; }
    double radius() const noexcept { return R_; }
    double spacing() const noexcept { return h_; }
    /// R/h as an integer.
    int cells() const noexcept { return cells_; }
    std::size_t size() const noexcept { return count_; }

    Lattice lattice(NodeId id) const;
    Vec position(NodeId id) const;
    /// Euclidean distance of the node from the origin.
    double distance(NodeId id) const;

    /// Node with the given integer coordinates, or kNoNode if outside the ball.
    NodeId find(const Lattice& z) const;
    /// Axis neighbor z +/- e_axis (dir = +1 or -1), or kNoNode.
    NodeId neighbor(NodeId id, int axis, int dir) const;

    bool on_shell(NodeId id) const { return shell_[static_cast<std::size_t>(id)] != 0; }
    std::size_t interior_count() const noexcept { return interior_count_; }

private:
    GridSpec() = default;

    std::int64_t row_key(const Lattice& z) const;

    int n_ = 2;
    double R_ = 1.0;
    double h_ = 0.125;
    int cells_ = 8;
    std::size_t count_ = 0;
    std::size_t interior_count_ = 0;
    std::vector<std::int32_t> coords_;     // n entries per node
    std::vector<std::int32_t> row_start_;  // dense over the first n-1 coordinates
    std::vector<std::int32_t> row_half_;   // -1 when the row is empty
    std::vector<std::uint8_t> shell_;
};

using GridPtr = std::shared_ptr<const GridSpec>;

/// One real value per lattice node of a grid.
class ScalarField {
public:
    explicit ScalarField(GridPtr grid, double fill = 0.0);
    ScalarField(GridPtr grid, std::vector<double> values);

    const GridSpec& grid() const { return *grid_; }
    const GridPtr& grid_ptr() const { return grid_; }

    double operator[](NodeId id) const { return values_[static_cast<std::size_t>(id)]; }
    double& operator[](NodeId id) { return values_[static_cast<std::size_t>(id)]; }

    std::span<const double> values() const { return values_; }
    std::span<double> values() { return values_; }

private:
    GridPtr grid_;
    std::vector<double> values_;
};

/// Fill a field by evaluating `f` at every node position.
template <class Fn>
ScalarField sample_field(const GridPtr& grid, Fn&& f) {
    ScalarField out(grid);
    for (NodeId id = 0; id < static_cast<NodeId>(grid->size()); ++id) {
        out[id] = f(grid->position(id));
    }
    return out;
}

/// Max of |u| over nodes with |x - center| <= r. Throws ResolutionError when
/// r < h and InputError when r exceeds the grid radius.
double sup_norm_on_ball(const ScalarField& field, double r);
double sup_norm_on_ball(const ScalarField& field, double r, const Vec& center);

struct PhaseDecomposition {
    std::vector<NodeId> positive_set;
    std::vector<NodeId> negative_set;
    std::vector<NodeId> interface_band;
};

/// Split the interior nodes into {u > 0}, {u <= 0 with no positive
/// axis-neighbor} and the interface band {u <= 0 with a positive axis-neighbor}.
PhaseDecomposition phase_split(const ScalarField& field);

/// True if `id` is a non-positive node with some positive axis-neighbor.
bool in_interface_band(const ScalarField& field, NodeId id);

struct Gradient {
    Vec value{};
    /// Set when at least one axis used a one-sided difference.
    bool one_sided = false;
};

/// Centered-difference gradient; one-sided where an axis-neighbor is missing.
Gradient gradient_at(const ScalarField& field, NodeId id);

/// Multilinear interpolation at an arbitrary point; empty if any corner of the
/// enclosing cell lies outside the ball.
std::optional<double> interpolate(const ScalarField& field, const Vec& point);
/// Same, with every corner value passed through `map` first.
std::optional<double> interpolate(const ScalarField& field, const Vec& point,
                                  const std::function<double(double)>& map);

/// Text dump: header `n=<int> R=<real> h=<real>`, then one comma-separated row
/// per node (integer coordinates, value) in lexicographic order.
void write_field(std::ostream& out, const ScalarField& field);
std::string field_to_string(const ScalarField& field);
/// Inverse of write_field; throws InputError on malformed input.
ScalarField read_field(std::istream& in);

}  // namespace fbp
