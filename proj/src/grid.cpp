#include "fbp/grid.hpp"

#include <charconv>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "fbp/errors.hpp"

namespace fbp {

namespace {

// Guards against accidentally huge lattices (n = 4 with a fine spacing).
constexpr std::size_t kMaxNodes = 40'000'000;

std::int64_t isqrt(std::int64_t v) {
    if (v <= 0) return 0;
    auto r = static_cast<std::int64_t>(std::sqrt(static_cast<double>(v)));
    while (r * r > v) --r;
    while ((r + 1) * (r + 1) <= v) ++r;
    return r;
}

std::string format_real(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

double dot(const Vec& a, const Vec& b, int n) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

double norm(const Vec& a, int n) { return std::sqrt(dot(a, a, n)); }

std::shared_ptr<const GridSpec> GridSpec::build(int n, double R, double h) {
    if (n < 2 || n > kMaxDim) {
        throw ConfigError("grid dimension must be in [2, 4], got " + std::to_string(n));
    }
    if (!(R > 0.0) || !(h > 0.0) || !std::isfinite(R) || !std::isfinite(h)) {
        throw ConfigError("grid radius and spacing must be positive and finite");
    }
    const double ratio = R / h;
    const double rounded = std::round(ratio);
    if (std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio)) {
        throw ConfigError("R/h = " + format_real(ratio) + " is not an integer");
    }
    if (rounded < 8.0) {
        throw ResolutionError("R/h = " + format_real(rounded) + " is below the minimum of 8");
    }
    if (rounded > 1e5) {
        throw ConfigError("R/h = " + format_real(rounded) + " exceeds the supported lattice size");
    }

    std::shared_ptr<GridSpec> g(new GridSpec());
    g->n_ = n;
    g->R_ = R;
    g->h_ = h;
    g->cells_ = static_cast<int>(rounded);

    const std::int64_t N = g->cells_;
    const std::int64_t width = 2 * N + 1;
    std::int64_t rows = 1;
    for (int i = 0; i < n - 1; ++i) rows *= width;
    // Rough ball volume estimate before allocating anything large.
    const double estimate = std::pow(static_cast<double>(width), n) * (n == 2 ? 0.8 : 0.55);
    if (static_cast<double>(rows) > 2e8 || estimate > static_cast<double>(kMaxNodes)) {
        throw ConfigError("lattice with n=" + std::to_string(n) + " and R/h=" + std::to_string(N) +
                          " exceeds the memory guardrail");
    }

    g->row_start_.assign(static_cast<std::size_t>(rows), 0);
    g->row_half_.assign(static_cast<std::size_t>(rows), -1);
    std::size_t count = 0;
    for (std::int64_t key = 0; key < rows; ++key) {
        std::int64_t rest = key;
        std::int64_t s = 0;
        for (int i = n - 2; i >= 0; --i) {
            const std::int64_t zi = rest % width - N;
            rest /= width;
            s += zi * zi;
        }
        if (s > N * N) continue;
        const std::int64_t half = isqrt(N * N - s);
        g->row_start_[static_cast<std::size_t>(key)] = static_cast<std::int32_t>(count);
        g->row_half_[static_cast<std::size_t>(key)] = static_cast<std::int32_t>(half);
        count += static_cast<std::size_t>(2 * half + 1);
    }
    g->count_ = count;

    g->coords_.resize(count * static_cast<std::size_t>(n));
    for (std::int64_t key = 0; key < rows; ++key) {
        const std::int32_t half = g->row_half_[static_cast<std::size_t>(key)];
        if (half < 0) continue;
        Lattice z{};
        std::int64_t rest = key;
        for (int i = n - 2; i >= 0; --i) {
            z[i] = static_cast<int>(rest % width - N);
            rest /= width;
        }
        std::size_t id = static_cast<std::size_t>(g->row_start_[static_cast<std::size_t>(key)]);
        for (int last = -half; last <= half; ++last, ++id) {
            z[n - 1] = last;
            for (int i = 0; i < n; ++i) g->coords_[id * static_cast<std::size_t>(n) + i] = z[i];
        }
    }

    g->shell_.assign(count, 0);
    std::size_t interior = 0;
    for (NodeId id = 0; id < static_cast<NodeId>(count); ++id) {
        bool shell = false;
        for (int axis = 0; axis < n && !shell; ++axis) {
            shell = g->neighbor(id, axis, +1) == kNoNode || g->neighbor(id, axis, -1) == kNoNode;
        }
        g->shell_[static_cast<std::size_t>(id)] = shell ? 1 : 0;
        if (!shell) ++interior;
    }
    g->interior_count_ = interior;
    return g;
}

Lattice GridSpec::lattice(NodeId id) const {
    Lattice z{};
    const auto base = static_cast<std::size_t>(id) * static_cast<std::size_t>(n_);
    for (int i = 0; i < n_; ++i) z[i] = coords_[base + i];
    return z;
}

Vec GridSpec::position(NodeId id) const {
    Vec x{};
    const auto base = static_cast<std::size_t>(id) * static_cast<std::size_t>(n_);
    for (int i = 0; i < n_; ++i) x[i] = h_ * coords_[base + i];
    return x;
}

double GridSpec::distance(NodeId id) const {
    const auto base = static_cast<std::size_t>(id) * static_cast<std::size_t>(n_);
    double s = 0.0;
    for (int i = 0; i < n_; ++i) {
        const double zi = coords_[base + i];
        s += zi * zi;
    }
    return h_ * std::sqrt(s);
}

std::int64_t GridSpec::row_key(const Lattice& z) const {
    const std::int64_t width = 2 * static_cast<std::int64_t>(cells_) + 1;
    std::int64_t key = 0;
    for (int i = 0; i < n_ - 1; ++i) {
        if (z[i] < -cells_ || z[i] > cells_) return -1;
        key = key * width + (z[i] + cells_);
    }
    return key;
}

NodeId GridSpec::find(const Lattice& z) const {
    const std::int64_t key = row_key(z);
    if (key < 0) return kNoNode;
    const std::int32_t half = row_half_[static_cast<std::size_t>(key)];
    const int last = z[n_ - 1];
    if (half < 0 || last < -half || last > half) return kNoNode;
    return row_start_[static_cast<std::size_t>(key)] + last + half;
}

NodeId GridSpec::neighbor(NodeId id, int axis, int dir) const {
    if (axis == n_ - 1) {
        // Same row: the last coordinate runs contiguously.
        const auto base = static_cast<std::size_t>(id) * static_cast<std::size_t>(n_);
        const int last = coords_[base + n_ - 1] + dir;
        Lattice z = lattice(id);
        z[n_ - 1] = last;
        return find(z);
    }
    Lattice z = lattice(id);
    z[axis] += dir;
    return find(z);
}

ScalarField::ScalarField(GridPtr grid, double fill)
    : grid_(std::move(grid)), values_(grid_->size(), fill) {}

ScalarField::ScalarField(GridPtr grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
    if (values_.size() != grid_->size()) {
        throw InputError("field has " + std::to_string(values_.size()) + " values for " +
                         std::to_string(grid_->size()) + " nodes");
    }
    for (double v : values_) {
        if (!std::isfinite(v)) throw InputError("field contains a non-finite value");
    }
}

double sup_norm_on_ball(const ScalarField& field, double r) {
    return sup_norm_on_ball(field, r, Vec{});
}

double sup_norm_on_ball(const ScalarField& field, double r, const Vec& center) {
    const GridSpec& g = field.grid();
    if (r < g.spacing() * (1.0 - 1e-12)) {
        throw ResolutionError("ball radius " + format_real(r) + " is below the grid spacing");
    }
    if (r > g.radius() * (1.0 + 1e-12) + norm(center, g.dim())) {
        throw InputError("ball radius " + format_real(r) + " exceeds the grid radius");
    }
    const double limit = r * (1.0 + 1e-12);
    double best = 0.0;
    bool any = false;
    for (NodeId id = 0; id < static_cast<NodeId>(g.size()); ++id) {
        const Vec x = g.position(id);
        double s = 0.0;
        for (int i = 0; i < g.dim(); ++i) s += (x[i] - center[i]) * (x[i] - center[i]);
        if (std::sqrt(s) <= limit) {
            best = std::max(best, std::abs(field[id]));
            any = true;
        }
    }
    if (!any) throw ResolutionError("no lattice node within radius " + format_real(r));
    return best;
}

bool in_interface_band(const ScalarField& field, NodeId id) {
    if (field[id] > 0.0) return false;
    const GridSpec& g = field.grid();
    for (int axis = 0; axis < g.dim(); ++axis) {
        for (int dir : {-1, 1}) {
            const NodeId nb = g.neighbor(id, axis, dir);
            if (nb != kNoNode && field[nb] > 0.0) return true;
        }
    }
    return false;
}

PhaseDecomposition phase_split(const ScalarField& field) {
    const GridSpec& g = field.grid();
    PhaseDecomposition out;
    for (NodeId id = 0; id < static_cast<NodeId>(g.size()); ++id) {
        if (g.on_shell(id)) continue;
        if (field[id] > 0.0) {
            out.positive_set.push_back(id);
        } else if (in_interface_band(field, id)) {
            out.interface_band.push_back(id);
        } else {
            out.negative_set.push_back(id);
        }
    }
    return out;
}

Gradient gradient_at(const ScalarField& field, NodeId id) {
    const GridSpec& g = field.grid();
    const double h = g.spacing();
    Gradient out;
    for (int axis = 0; axis < g.dim(); ++axis) {
        const NodeId plus = g.neighbor(id, axis, +1);
        const NodeId minus = g.neighbor(id, axis, -1);
        if (plus != kNoNode && minus != kNoNode) {
            out.value[axis] = (field[plus] - field[minus]) / (2.0 * h);
        } else if (plus != kNoNode) {
            out.value[axis] = (field[plus] - field[id]) / h;
            out.one_sided = true;
        } else if (minus != kNoNode) {
            out.value[axis] = (field[id] - field[minus]) / h;
            out.one_sided = true;
        } else {
            throw StencilError("node has no neighbor along axis " + std::to_string(axis));
        }
    }
    return out;
}

std::optional<double> interpolate(const ScalarField& field, const Vec& point) {
    return interpolate(field, point, [](double v) { return v; });
}

std::optional<double> interpolate(const ScalarField& field, const Vec& point,
                                  const std::function<double(double)>& map) {
    const GridSpec& g = field.grid();
    const int n = g.dim();
    Lattice base{};
    Vec frac{};
    for (int i = 0; i < n; ++i) {
        const double t = point[i] / g.spacing();
        double fl = std::floor(t);
        double f = t - fl;
        if (f > 1.0 - 1e-12) {
            fl += 1.0;
            f = 0.0;
        } else if (f < 1e-12) {
            f = 0.0;
        }
        base[i] = static_cast<int>(fl);
        frac[i] = f;
    }
    double value = 0.0;
    for (int corner = 0; corner < (1 << n); ++corner) {
        double w = 1.0;
        Lattice z = base;
        for (int i = 0; i < n; ++i) {
            const bool up = (corner >> i) & 1;
            w *= up ? frac[i] : 1.0 - frac[i];
            z[i] += up ? 1 : 0;
        }
        if (w == 0.0) continue;
        const NodeId id = g.find(z);
        if (id == kNoNode) return std::nullopt;
        value += w * map(field[id]);
    }
    return value;
}

void write_field(std::ostream& out, const ScalarField& field) {
    const GridSpec& g = field.grid();
    out << "n=" << g.dim() << " R=" << format_real(g.radius()) << " h=" << format_real(g.spacing())
        << '\n';
    for (NodeId id = 0; id < static_cast<NodeId>(g.size()); ++id) {
        const Lattice z = g.lattice(id);
        for (int i = 0; i < g.dim(); ++i) out << z[i] << ',';
        out << format_real(field[id]) << '\n';
    }
}

std::string field_to_string(const ScalarField& field) {
    std::ostringstream os;
    write_field(os, field);
    return os.str();
}

namespace {

template <class T>
T parse_cell(const std::string& cell, std::size_t line_no) {
    T out{};
    const char* first = cell.data();
    const char* last = first + cell.size();
    while (first < last && *first == ' ') ++first;
    const auto [end, ec] = std::from_chars(first, last, out);
    if (ec != std::errc() || end != last) {
        throw InputError("field dump line " + std::to_string(line_no) + ": bad number '" + cell + "'");
    }
    return out;
}

}  // namespace

ScalarField read_field(std::istream& in) {
    std::string header;
    if (!std::getline(in, header)) throw InputError("field dump is empty");
    int n = 0;
    double R = 0.0;
    double h = 0.0;
    if (std::sscanf(header.c_str(), "n=%d R=%lf h=%lf", &n, &R, &h) != 3) {
        throw InputError("field dump header is malformed: '" + header + "'");
    }
    const GridPtr grid = GridSpec::build(n, R, h);
    std::vector<double> values(grid->size(), 0.0);
    std::vector<std::uint8_t> seen(grid->size(), 0);
    std::string line;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream row(line);
        Lattice z{};
        std::string cell;
        for (int i = 0; i < n; ++i) {
            if (!std::getline(row, cell, ',')) {
                throw InputError("field dump line " + std::to_string(line_no) + ": missing coordinate");
            }
            z[i] = parse_cell<int>(cell, line_no);
        }
        if (!std::getline(row, cell)) {
            throw InputError("field dump line " + std::to_string(line_no) + ": missing value");
        }
        const NodeId id = grid->find(z);
        if (id == kNoNode) {
            throw InputError("field dump line " + std::to_string(line_no) + ": node outside the ball");
        }
        values[static_cast<std::size_t>(id)] = parse_cell<double>(cell, line_no);
        seen[static_cast<std::size_t>(id)] = 1;
    }
    if (std::find(seen.begin(), seen.end(), 0) != seen.end()) {
        throw InputError("field dump does not cover every node");
    }
    return ScalarField(grid, std::move(values));
}

}  // namespace fbp
