#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "graph.hpp"

namespace calabi_graph {

using Vector = Eigen::VectorXd;

/// Per-edge curvature (or a prescribed target), aligned with edge indices.
using CurvatureVector = Vector;

/// Per-vertex total incident weight m(x).
using VertexStrength = Vector;

/**
 * Log-weights r_i = ln w_i, the state variable of every flow.
 *
 * Entries are finite; the weights exp(r_i) are then positive automatically.
 */
class LogWeights {
public:
    LogWeights() = default;

    explicit LogWeights(Vector values) : values_(std::move(values)) {
        for (Eigen::Index i = 0; i < values_.size(); ++i) {
            if (!std::isfinite(values_[i])) {
                throw std::invalid_argument("log-weight " + std::to_string(i) + " is not finite");
            }
        }
    }

    static LogWeights zeros(std::size_t n) { return LogWeights(Vector::Zero(static_cast<Eigen::Index>(n))); }

    static LogWeights from_weights(const std::vector<double>& w) {
        Vector r(static_cast<Eigen::Index>(w.size()));
        for (std::size_t i = 0; i < w.size(); ++i) {
            if (!(w[i] > 0.0)) throw std::invalid_argument("weight " + std::to_string(i) + " is not positive");
            r[static_cast<Eigen::Index>(i)] = std::log(w[i]);
        }
        return LogWeights(std::move(r));
    }

    static LogWeights of(const WeightedGraph& g) { return from_weights(g.weights()); }

    const Vector& values() const noexcept { return values_; }
    std::size_t size() const noexcept { return static_cast<std::size_t>(values_.size()); }
    double operator[](std::size_t i) const { return values_[static_cast<Eigen::Index>(i)]; }
    double sum() const { return values_.sum(); }

    Vector weights() const { return values_.array().exp().matrix(); }

    std::vector<double> weight_list() const {
        const Vector w = weights();
        return {w.data(), w.data() + w.size()};
    }

private:
    Vector values_;
};

namespace detail {

inline void require_size(const WeightedGraph& g, const LogWeights& r) {
    if (r.size() != g.edge_count()) {
        throw std::invalid_argument("log-weight vector has " + std::to_string(r.size()) + " entries, graph has " +
                         std::to_string(g.edge_count()) + " edges");
    }
}

inline VertexStrength strength_from_weights(const WeightedGraph& g, const Vector& w) {
    VertexStrength m = VertexStrength::Zero(static_cast<Eigen::Index>(g.vertex_count()));
    for (EdgeId i = 0; i < g.edge_count(); ++i) {
        const auto& e = g.edge(i);
        m[static_cast<Eigen::Index>(e.u)] += w[static_cast<Eigen::Index>(i)];
        m[static_cast<Eigen::Index>(e.v)] += w[static_cast<Eigen::Index>(i)];
    }
    return m;
}

/// Closed form without the admissibility check; callers have already validated g.
inline CurvatureVector curvature_from_weights(const WeightedGraph& g, const Vector& w) {
    const VertexStrength m = strength_from_weights(g, w);
    CurvatureVector k(static_cast<Eigen::Index>(g.edge_count()));
    for (EdgeId i = 0; i < g.edge_count(); ++i) {
        const auto& e = g.edge(i);
        const auto ii = static_cast<Eigen::Index>(i);
        const double two_w = 2.0 * w[ii];
        k[ii] = two_w / m[static_cast<Eigen::Index>(e.u)] + two_w / m[static_cast<Eigen::Index>(e.v)] - 2.0;
    }
    return k;
}

inline CurvatureVector curvature_unchecked(const WeightedGraph& g, const Vector& r) {
    return curvature_from_weights(g, r.array().exp().matrix());
}

}  // namespace detail

inline VertexStrength vertex_strength(const WeightedGraph& g, const LogWeights& r) {
    detail::require_size(g, r);
    if (g.edge_count() == 0) throw GraphError("graph has no edges");
    if (!g.audit().connected) throw GraphError("graph is not connected");
    return detail::strength_from_weights(g, r.weights());
}

/// kappa_i = 2 w_i (1/m(x) + 1/m(y)) - 2 for edge i = {x, y}; requires an admissible graph.
inline CurvatureVector curvature(const WeightedGraph& g, const LogWeights& r) {
    require_admissible(g);
    detail::require_size(g, r);
    return detail::curvature_unchecked(g, r.values());
}

/// Curvature at the graph's own weights, evaluated without a round trip through logarithms.
inline CurvatureVector curvature(const WeightedGraph& g) {
    require_admissible(g);
    const auto& w = g.weights();
    return detail::curvature_from_weights(g, Eigen::Map<const Vector>(w.data(), static_cast<Eigen::Index>(w.size())));
}

/// Twice the Euler characteristic, 2(|V| - |E|).
inline double euler_sum(const WeightedGraph& g) {
    return 2.0 * (static_cast<double>(g.vertex_count()) - static_cast<double>(g.edge_count()));
}

/// sum_i kappa_i - 2(|V| - |E|)
inline double gauss_bonnet_residual(const WeightedGraph& g, const CurvatureVector& kappa) {
    return kappa.sum() - euler_sum(g);
}

/// 2(|V|/|E| - 1), independent of the weights.
inline double average_curvature(const WeightedGraph& g) {
    if (g.edge_count() == 0) throw GraphError("average curvature needs at least one edge");
    return 2.0 * (static_cast<double>(g.vertex_count()) / static_cast<double>(g.edge_count()) - 1.0);
}

inline CurvatureVector constant_target(const WeightedGraph& g) {
    return CurvatureVector::Constant(static_cast<Eigen::Index>(g.edge_count()), average_curvature(g));
}

/// Relative tolerance for the topological condition on a prescribed curvature.
inline constexpr double target_sum_tolerance = 1e-8;

/// Throws unless target has one entry per edge and sums to 2(|V| - |E|) within 1e-8 * |E|.
inline void validate_target(const WeightedGraph& g, const CurvatureVector& target) {
    if (static_cast<std::size_t>(target.size()) != g.edge_count()) {
        throw std::invalid_argument("target curvature has " + std::to_string(target.size()) + " entries, graph has " +
                         std::to_string(g.edge_count()) + " edges");
    }
    if (!target.allFinite()) throw std::invalid_argument("target curvature has non-finite entries");
    const double residual = gauss_bonnet_residual(g, target);
    const double tol = target_sum_tolerance * std::max<double>(1.0, static_cast<double>(g.edge_count()));
    if (std::abs(residual) > tol) {
        throw std::invalid_argument("target curvature violates sum = 2(|V|-|E|): residual " + std::to_string(residual));
    }
}

/**
 * Convex potential whose gradient in r is kappa(r) - target:
 *   F(r) = 2 sum_x ln m(x) - 2 sum_i r_i - target . r
 * It equals the path integral of (kappa - target) . dr up to an additive
 * constant, so it is a Lyapunov function for every convergent flow.
 */
inline double potential(const WeightedGraph& g, const LogWeights& r, const CurvatureVector& target) {
    detail::require_size(g, r);
    const VertexStrength m = detail::strength_from_weights(g, r.weights());
    return 2.0 * m.array().log().sum() - 2.0 * r.sum() - target.dot(r.values());
}

}  // namespace calabi_graph
