#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "curvature.hpp"
#include "graph.hpp"

namespace calabi_graph {

using Matrix = Eigen::MatrixXd;

/// Relative threshold below which an eigenvalue of J counts as zero.
struct SpectralTolerance {
    double rank_eps = 1e-10;

    SpectralTolerance() = default;
    explicit SpectralTolerance(double eps) : rank_eps(eps) {
        if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("rank_eps must lie in (0, 1)");
    }
};

/// Ascending eigenvalues and orthonormal eigenvectors (columns): J = V diag(lambda) V^T.
struct Spectrum {
    Vector eigenvalues;
    Matrix eigenvectors;
    /// Smallest eigenvalue before clamping; reported so callers can audit semi-definiteness.
    double raw_min = 0.0;

    double max() const { return eigenvalues.size() ? eigenvalues[eigenvalues.size() - 1] : 0.0; }
};

/**
 * Symmetric eigendecomposition. Eigenvalues in [-rank_eps * lambda_max, 0)
 * are clamped to zero; anything more negative is left as is so callers can
 * see the matrix was not semi-definite.
 */
inline Spectrum spectral_decompose(const Matrix& a, SpectralTolerance tol = {}) {
    if (a.rows() != a.cols()) throw std::invalid_argument("spectral_decompose needs a square matrix");
    Spectrum out;
    if (a.rows() == 0) return out;
    Eigen::SelfAdjointEigenSolver<Matrix> solver(a);
    if (solver.info() != Eigen::Success) throw std::runtime_error("symmetric eigensolver did not converge");
    out.eigenvalues = solver.eigenvalues();
    out.eigenvectors = solver.eigenvectors();
    out.raw_min = out.eigenvalues[0];
    const double floor = -tol.rank_eps * std::max(0.0, out.max());
    for (Eigen::Index i = 0; i < out.eigenvalues.size(); ++i) {
        double& lambda = out.eigenvalues[i];
        if (lambda < 0.0 && lambda >= floor) lambda = 0.0;
    }
    return out;
}

/**
 * The Jacobian J = d kappa / d r of the closed-form curvature.
 *
 * Stores the dense symmetric matrix; the spectrum is computed on first use and
 * shared between copies. Safe to read from several threads.
 */
class JacobianMatrix {
public:
    JacobianMatrix() : cache_(std::make_shared<Cache>()) {}
    explicit JacobianMatrix(Matrix entries)
        : entries_(std::move(entries)), cache_(std::make_shared<Cache>()) {}

    const Matrix& entries() const noexcept { return entries_; }
    Eigen::Index size() const noexcept { return entries_.rows(); }
    double operator()(Eigen::Index i, Eigen::Index j) const { return entries_(i, j); }

    const Spectrum& spectrum(SpectralTolerance tol = {}) const {
        std::call_once(cache_->once, [&] { cache_->spectrum = spectral_decompose(entries_, tol); });
        return cache_->spectrum;
    }

private:
    struct Cache {
        std::once_flag once;
        Spectrum spectrum;
    };

    Matrix entries_;
    std::shared_ptr<Cache> cache_;
};

namespace detail {

/**
 * For edges i != j meeting at x: d kappa_i / d r_j = -2 w_i w_j / m(x)^2.
 * The diagonal is minus the off-diagonal row sum, which matches the direct
 * derivative 2 w_i (1/m(x) + 1/m(y)) - 2 w_i^2 (1/m(x)^2 + 1/m(y)^2).
 */
inline Matrix jacobian_unchecked(const WeightedGraph& g, const Vector& r) {
    const auto n = static_cast<Eigen::Index>(g.edge_count());
    const Vector w = r.array().exp().matrix();
    const VertexStrength m = strength_from_weights(g, w);
    Matrix j = Matrix::Zero(n, n);
    for (VertexId x = 0; x < g.vertex_count(); ++x) {
        const auto& inc = g.incident(x);
        const double inv_m2 = 1.0 / (m[static_cast<Eigen::Index>(x)] * m[static_cast<Eigen::Index>(x)]);
        for (std::size_t a = 0; a < inc.size(); ++a) {
            const auto ia = static_cast<Eigen::Index>(inc[a]);
            for (std::size_t b = a + 1; b < inc.size(); ++b) {
                const auto ib = static_cast<Eigen::Index>(inc[b]);
                const double c = 2.0 * w[ia] * w[ib] * inv_m2;
                j(ia, ib) -= c;
                j(ib, ia) -= c;
                j(ia, ia) += c;
                j(ib, ib) += c;
            }
        }
    }
    return j;
}

/// -J^s v with the kernel (eigenvalues below rank_eps * lambda_max) mapped to zero.
inline Vector fractional_apply(const Spectrum& sp, double s, const Vector& v, SpectralTolerance tol) {
    const double cut = tol.rank_eps * sp.max();
    Vector coeff = sp.eigenvectors.transpose() * v;
    for (Eigen::Index i = 0; i < coeff.size(); ++i) {
        const double lambda = sp.eigenvalues[i];
        coeff[i] = (lambda > cut && lambda > 0.0) ? coeff[i] * std::pow(lambda, s) : 0.0;
    }
    return -(sp.eigenvectors * coeff);
}

/// sign(x) |x|^(p-1), which is |x|^(p-2) x with 0 -> 0.
inline double p_power(double x, double p) {
    if (x == 0.0) return 0.0;
    const double mag = p == 2.0 ? std::abs(x) : std::pow(std::abs(x), p - 1.0);
    return x > 0.0 ? mag : -mag;
}

inline Vector p_laplacian_unchecked(const WeightedGraph& g, const Vector& r, double p, const Vector& f) {
    const Vector w = r.array().exp().matrix();
    const VertexStrength m = strength_from_weights(g, w);
    Vector out = Vector::Zero(f.size());
    for (VertexId x = 0; x < g.vertex_count(); ++x) {
        const auto& inc = g.incident(x);
        const double inv_m2 = 1.0 / (m[static_cast<Eigen::Index>(x)] * m[static_cast<Eigen::Index>(x)]);
        for (std::size_t a = 0; a < inc.size(); ++a) {
            const auto ia = static_cast<Eigen::Index>(inc[a]);
            for (std::size_t b = a + 1; b < inc.size(); ++b) {
                const auto ib = static_cast<Eigen::Index>(inc[b]);
                const double c = 2.0 * w[ia] * w[ib] * inv_m2;
                const double flux = c * p_power(f[ib] - f[ia], p);
                out[ia] += flux;
                out[ib] -= flux;
            }
        }
    }
    return out;
}

}  // namespace detail

inline JacobianMatrix jacobian(const WeightedGraph& g, const LogWeights& r) {
    require_admissible(g);
    detail::require_size(g, r);
    return JacobianMatrix(detail::jacobian_unchecked(g, r.values()));
}

/// Max entrywise gap between jacobian() and a central-difference Jacobian with step h.
inline double jacobian_fd_check(const WeightedGraph& g, const LogWeights& r, double h) {
    if (!(h > 0.0)) throw std::invalid_argument("finite-difference step must be positive");
    const Matrix analytic = jacobian(g, r).entries();
    const auto n = analytic.rows();
    double worst = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
        Vector plus = r.values();
        Vector minus = r.values();
        plus[j] += h;
        minus[j] -= h;
        const Vector column = (detail::curvature_unchecked(g, plus) - detail::curvature_unchecked(g, minus)) / (2.0 * h);
        worst = std::max(worst, (column - analytic.col(j)).cwiseAbs().maxCoeff());
    }
    return worst;
}

/// Delta^s v = -J^s v, defined spectrally with 0^s = 0 for every real s.
inline Vector fractional_laplacian_apply(const JacobianMatrix& j, double s, const Vector& v,
                                         SpectralTolerance tol = {}) {
    if (v.size() != j.size()) throw std::invalid_argument("vector length does not match the Jacobian");
    if (j.size() == 0) return Vector();
    return detail::fractional_apply(j.spectrum(tol), s, v, tol);
}

/// The discrete Laplacian Delta v = -J v.
inline Vector laplacian_apply(const JacobianMatrix& j, const Vector& v) {
    if (v.size() != j.size()) throw std::invalid_argument("vector length does not match the Jacobian");
    return -(j.entries() * v);
}

/**
 * (Delta_p f)_i = sum over edges j adjacent to i of (-d kappa_i/d r_j) |f_j - f_i|^(p-2) (f_j - f_i),
 * with coefficients taken at the current log-weights.
 */
inline Vector p_laplacian_apply(const WeightedGraph& g, const LogWeights& r, double p, const Vector& f) {
    if (!(p > 1.0)) throw std::invalid_argument("p-Laplacian needs p > 1");
    require_admissible(g);
    detail::require_size(g, r);
    if (static_cast<std::size_t>(f.size()) != g.edge_count()) {
        throw std::invalid_argument("vector length does not match the edge count");
    }
    return detail::p_laplacian_unchecked(g, r.values(), p, f);
}

}  // namespace calabi_graph
