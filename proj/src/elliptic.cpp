#include "fbp/elliptic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "fbp/errors.hpp"

namespace fbp {

SymMatrix SymMatrix::identity(int n) {
    SymMatrix m(n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

SymMatrix SymMatrix::diagonal(int n, const Vec& d) {
    SymMatrix m(n);
    for (int i = 0; i < n; ++i) m(i, i) = d[i];
    return m;
}

double SymMatrix::trace() const {
    double t = 0.0;
    for (int i = 0; i < n_; ++i) t += (*this)(i, i);
    return t;
}

bool SymMatrix::is_symmetric(double tol) const {
    double scale = 0.0;
    for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j) scale = std::max(scale, std::abs((*this)(i, j)));
    for (int i = 0; i < n_; ++i)
        for (int j = i + 1; j < n_; ++j)
            if (std::abs((*this)(i, j) - (*this)(j, i)) > tol * std::max(1.0, scale)) return false;
    return true;
}

double SymMatrix::operator_norm() const {
    const Vec eig = symmetric_eigenvalues(*this);
    return std::max(std::abs(eig[0]), std::abs(eig[n_ - 1]));
}

SymMatrix SymMatrix::operator+(const SymMatrix& o) const {
    SymMatrix r(n_);
    for (std::size_t k = 0; k < a_.size(); ++k) r.a_[k] = a_[k] + o.a_[k];
    return r;
}

SymMatrix SymMatrix::operator-(const SymMatrix& o) const {
    SymMatrix r(n_);
    for (std::size_t k = 0; k < a_.size(); ++k) r.a_[k] = a_[k] - o.a_[k];
    return r;
}

SymMatrix SymMatrix::operator*(double s) const {
    SymMatrix r(n_);
    for (std::size_t k = 0; k < a_.size(); ++k) r.a_[k] = a_[k] * s;
    return r;
}

Vec symmetric_eigenvalues(const SymMatrix& m) {
    const int n = m.dim();
    SymMatrix a = m;
    // Symmetrize so tiny asymmetries from roundoff cannot stall the sweeps.
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) a(i, j) = a(j, i) = 0.5 * (m(i, j) + m(j, i));

    double frob = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) frob += a(i, j) * a(i, j);
    frob = std::sqrt(frob);
    const double tol = 1e-12 * frob;

    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
        if (std::sqrt(off) <= tol) break;
        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (std::abs(apq) <= std::numeric_limits<double>::min()) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int k = 0; k < n; ++k) {
                    const double akp = a(k, p);
                    const double akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    const double apk = a(p, k);
                    const double aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
            }
        }
    }
    Vec eig{};
    for (int i = 0; i < n; ++i) eig[i] = a(i, i);
    std::sort(eig.begin(), eig.begin() + n);
    return eig;
}

std::string to_string(OperatorKind kind) {
    switch (kind) {
        case OperatorKind::laplace: return "laplace";
        case OperatorKind::pucci_max: return "pucci_max";
        case OperatorKind::pucci_min: return "pucci_min";
        case OperatorKind::callback: return "callback";
    }
    return "unknown";
}

OperatorKind operator_kind_from_string(const std::string& name) {
    if (name == "laplace") return OperatorKind::laplace;
    if (name == "pucci_max") return OperatorKind::pucci_max;
    if (name == "pucci_min") return OperatorKind::pucci_min;
    throw ConfigError("unknown operator '" + name + "' (expected laplace, pucci_max, pucci_min)");
}

OperatorSpec OperatorSpec::laplace() { return OperatorSpec{}; }

OperatorSpec OperatorSpec::pucci_max(double lambda, double Lambda) {
    OperatorSpec op{OperatorKind::pucci_max, lambda, Lambda, {}};
    op.validate();
    return op;
}

OperatorSpec OperatorSpec::pucci_min(double lambda, double Lambda) {
    OperatorSpec op{OperatorKind::pucci_min, lambda, Lambda, {}};
    op.validate();
    return op;
}

OperatorSpec OperatorSpec::custom(std::function<double(const SymMatrix&)> fn, double lambda,
                                  double Lambda) {
    OperatorSpec op{OperatorKind::callback, lambda, Lambda, std::move(fn)};
    op.validate();
    return op;
}

void OperatorSpec::validate() const {
    if (!(lambda > 0.0) || !(Lambda >= lambda) || !std::isfinite(Lambda)) {
        throw ConfigError("ellipticity constants must satisfy 0 < lambda <= Lambda");
    }
    if (kind == OperatorKind::callback && !callback) {
        throw ConfigError("callback operator requires a function");
    }
}

double pucci_from_eigenvalues(const Vec& eig, int n, double up, double down) {
    double v = 0.0;
    for (int i = 0; i < n; ++i) v += eig[i] > 0.0 ? up * eig[i] : down * eig[i];
    return v;
}

double evaluate(const OperatorSpec& op, const SymMatrix& H) {
    if (!H.is_symmetric(1e-10)) throw InputError("Hessian argument is not symmetric");
    switch (op.kind) {
        case OperatorKind::laplace: return H.trace();
        case OperatorKind::pucci_max:
            return pucci_from_eigenvalues(symmetric_eigenvalues(H), H.dim(), op.Lambda, op.lambda);
        case OperatorKind::pucci_min:
            return pucci_from_eigenvalues(symmetric_eigenvalues(H), H.dim(), op.lambda, op.Lambda);
        case OperatorKind::callback: {
            const double v = op.callback(H);
            if (!std::isfinite(v)) throw OperatorError("operator callback returned a non-finite value");
            return v;
        }
    }
    return 0.0;
}

namespace {

// Haar-ish random rotation via Gram-Schmidt on a Gaussian matrix.
SymMatrix random_rotation(int n, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    SymMatrix q(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) q(i, j) = gauss(rng);
    for (int c = 0; c < n; ++c) {
        for (int prev = 0; prev < c; ++prev) {
            double d = 0.0;
            for (int r = 0; r < n; ++r) d += q(r, c) * q(r, prev);
            for (int r = 0; r < n; ++r) q(r, c) -= d * q(r, prev);
        }
        double len = 0.0;
        for (int r = 0; r < n; ++r) len += q(r, c) * q(r, c);
        len = std::sqrt(len);
        for (int r = 0; r < n; ++r) q(r, c) /= len;
    }
    return q;
}

SymMatrix conjugate(const SymMatrix& q, const SymMatrix& d) {
    const int n = q.dim();
    SymMatrix out(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double s = 0.0;
            for (int k = 0; k < n; ++k) s += q(i, k) * d(k, k) * q(j, k);
            out(i, j) = s;
        }
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) out(i, j) = out(j, i) = 0.5 * (out(i, j) + out(j, i));
    return out;
}

}  // namespace

EllipticityReport check_ellipticity(const OperatorSpec& op, int n, int sample_count,
                                    std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> log_scale(-2.0, 2.0);

    EllipticityReport report;
    report.worst_ratio_low = std::numeric_limits<double>::infinity();
    report.worst_ratio_high = -std::numeric_limits<double>::infinity();
    constexpr double tol = 1e-9;

    for (int s = 0; s < std::max(1, sample_count); ++s) {
        const double scale = std::pow(10.0, log_scale(rng));
        SymMatrix m(n);
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j) m(i, j) = m(j, i) = scale * gauss(rng);

        Vec d{};
        for (int i = 0; i < n; ++i) d[i] = unit(rng);
        d[static_cast<int>(unit(rng) * n) % n] = 1.0;  // unit operator norm
        const SymMatrix nn = conjugate(random_rotation(n, rng), SymMatrix::diagonal(n, d));
        const double nrm = nn.operator_norm();

        double ratio = 0.0;
        bool ok = true;
        try {
            ratio = (evaluate(op, m + nn) - evaluate(op, m)) / nrm;
        } catch (const OperatorError&) {
            ok = false;
        }
        if (ok && std::isfinite(ratio)) {
            report.worst_ratio_low = std::min(report.worst_ratio_low, ratio);
            report.worst_ratio_high = std::max(report.worst_ratio_high, ratio);
            ok = ratio >= op.lambda - tol && ratio <= n * op.Lambda + tol;
        } else {
            ok = false;
        }
        if (!ok) {
            report.pass = false;
            ++report.failures;
        }
    }
    return report;
}

bool has_hessian_stencil(const GridSpec& grid, NodeId id) {
    const int n = grid.dim();
    const Lattice z = grid.lattice(id);
    for (int i = 0; i < n; ++i) {
        for (int s : {-1, 1}) {
            Lattice y = z;
            y[i] += s;
            if (grid.find(y) == kNoNode) return false;
        }
        for (int j = i + 1; j < n; ++j) {
            for (int si : {-1, 1})
                for (int sj : {-1, 1}) {
                    Lattice y = z;
                    y[i] += si;
                    y[j] += sj;
                    if (grid.find(y) == kNoNode) return false;
                }
        }
    }
    return true;
}

SymMatrix discrete_hessian(const ScalarField& field, NodeId id) {
    return discrete_hessian(field, id, field[id]);
}

SymMatrix discrete_hessian(const ScalarField& field, NodeId id, double center) {
    const GridSpec& g = field.grid();
    const int n = g.dim();
    const double h2 = g.spacing() * g.spacing();
    const Lattice z = g.lattice(id);
    auto value = [&](const Lattice& y) {
        const NodeId nb = g.find(y);
        if (nb == kNoNode) throw StencilError("Hessian stencil leaves the ball");
        return field[nb];
    };
    SymMatrix H(n);
    for (int i = 0; i < n; ++i) {
        Lattice p = z, m = z;
        p[i] += 1;
        m[i] -= 1;
        H(i, i) = (value(p) - 2.0 * center + value(m)) / h2;
        for (int j = i + 1; j < n; ++j) {
            Lattice pp = z, pm = z, mp = z, mm = z;
            pp[i] += 1, pp[j] += 1;
            pm[i] += 1, pm[j] -= 1;
            mp[i] -= 1, mp[j] += 1;
            mm[i] -= 1, mm[j] -= 1;
            H(i, j) = H(j, i) = (value(pp) - value(pm) - value(mp) + value(mm)) / (4.0 * h2);
        }
    }
    return H;
}

}  // namespace fbp
