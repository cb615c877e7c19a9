#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>

#include "fbp/grid.hpp"

namespace fbp {

/// Dense n x n matrix (n <= 4), row-major. Used for Hessians; symmetry is
/// checked where it matters rather than enforced by storage.
class SymMatrix {
public:
    SymMatrix() = default;
    explicit SymMatrix(int n) : n_(n) {}

    static SymMatrix identity(int n);
    static SymMatrix diagonal(int n, const Vec& d);

    int dim() const noexcept { return n_; }
    double operator()(int i, int j) const { return a_[i * kMaxDim + j]; }
    double& operator()(int i, int j) { return a_[i * kMaxDim + j]; }

    double trace() const;
    bool is_symmetric(double tol = 1e-12) const;
    /// Operator norm sup_{|x|=1} |Mx| (largest |eigenvalue| for symmetric M).
    double operator_norm() const;

    SymMatrix operator+(const SymMatrix& o) const;
    SymMatrix operator-(const SymMatrix& o) const;
    SymMatrix operator*(double s) const;

private:
    int n_ = 0;
    std::array<double, kMaxDim * kMaxDim> a_{};
};

/// Eigenvalues of a symmetric matrix in ascending order, by cyclic Jacobi
/// rotations to an off-diagonal tolerance of 1e-12 relative to ||M||_F.
Vec symmetric_eigenvalues(const SymMatrix& m);

enum class OperatorKind { laplace, pucci_max, pucci_min, callback };

std::string to_string(OperatorKind kind);
OperatorKind operator_kind_from_string(const std::string& name);

/// A uniformly elliptic operator F on symmetric matrices with constants
/// 0 < lambda <= Lambda. Built-in kinds satisfy F(0) = 0 and are positively
/// 1-homogeneous.
struct OperatorSpec {
    OperatorKind kind = OperatorKind::laplace;
    double lambda = 1.0;
    double Lambda = 1.0;
    std::function<double(const SymMatrix&)> callback;

    static OperatorSpec laplace();
    static OperatorSpec pucci_max(double lambda, double Lambda);
    static OperatorSpec pucci_min(double lambda, double Lambda);
    static OperatorSpec custom(std::function<double(const SymMatrix&)> fn, double lambda,
                               double Lambda);

    /// Throws ConfigError on invalid constants or a callback kind without a function.
    void validate() const;
};

/// Extremal Pucci value for given eigenvalues: weights `up` on positive and
/// `down` on negative eigenvalues.
double pucci_from_eigenvalues(const Vec& eig, int n, double up, double down);

/// F(H). Throws InputError for non-symmetric H and OperatorError when a
/// callback returns a non-finite value.
double evaluate(const OperatorSpec& op, const SymMatrix& H);

struct EllipticityReport {
    bool pass = true;
    /// Extremes of (F(M+N) - F(M)) / ||N|| over the drawn pairs.
    double worst_ratio_low = 0.0;
    double worst_ratio_high = 0.0;
    int failures = 0;
};

/// Randomized check of lambda ||N|| <= F(M+N) - F(M) <= n Lambda ||N|| for
/// N >= 0 with ||N|| = 1. The n factor converts the trace-norm constants of the
/// built-in operators to the operator norm.
EllipticityReport check_ellipticity(const OperatorSpec& op, int n, int sample_count,
                                    std::uint64_t seed);

/// Second-order central-difference Hessian; off-diagonals use the symmetric
/// 4-point cross. Throws StencilError if a stencil node is missing.
SymMatrix discrete_hessian(const ScalarField& field, NodeId id);
/// Same stencil with the center value replaced by `center`.
SymMatrix discrete_hessian(const ScalarField& field, NodeId id, double center);

/// True when every node of the full Hessian stencil exists.
bool has_hessian_stencil(const GridSpec& grid, NodeId id);

}  // namespace fbp
