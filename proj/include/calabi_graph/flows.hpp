#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "curvature.hpp"
#include "graph.hpp"
#include "operators.hpp"

namespace calabi_graph {

/// Sign of the Ricci flow in r = ln w. PaperLiteral integrates dw/dt = (kappa - target) w;
/// Gradient integrates dr/dt = -(kappa - target), the s = 0 member of the fractional family.
enum class RicciSign { PaperLiteral, Gradient };

struct FlowKind {
    enum class Type { Ricci, Calabi, Fractional, PTh };

    Type type = Type::Calabi;
    double s = 1.0;
    double p = 2.0;
    RicciSign ricci_sign = RicciSign::Gradient;

    static FlowKind ricci(RicciSign sign = RicciSign::Gradient) {
        FlowKind k;
        k.type = Type::Ricci;
        k.ricci_sign = sign;
        return k;
    }
    static FlowKind calabi() { return {}; }
    static FlowKind fractional(double s) {
        if (!std::isfinite(s)) throw std::invalid_argument("fractional order must be finite");
        FlowKind k;
        k.type = Type::Fractional;
        k.s = s;
        return k;
    }
    static FlowKind pth(double p) {
        if (!(p > 1.0) || !std::isfinite(p)) throw std::invalid_argument("p-th Calabi flow needs p > 1");
        FlowKind k;
        k.type = Type::PTh;
        k.p = p;
        return k;
    }

    /// Calabi-type flows conserve sum(r) and dissipate the potential.
    bool calabi_type() const noexcept { return type != Type::Ricci; }

    std::string name() const {
        switch (type) {
            case Type::Ricci: return "ricci";
            case Type::Calabi: return "calabi";
            case Type::Fractional: return "fractional";
            case Type::PTh: return "pth";
        }
        return "unknown";
    }
};

/// Resolves to the average curvature on every edge.
struct ConstantAverage {};

using TargetSpec = std::variant<ConstantAverage, CurvatureVector>;

inline CurvatureVector resolve_target(const WeightedGraph& g, const TargetSpec& spec) {
    CurvatureVector target = std::holds_alternative<ConstantAverage>(spec) ? constant_target(g)
                                                                          : std::get<CurvatureVector>(spec);
    validate_target(g, target);
    return target;
}

struct FlowConfig {
    FlowKind kind;
    TargetSpec target = ConstantAverage{};
    LogWeights r0;
    double t_max = 1e4;
    double rtol = 1e-8;
    double atol = 1e-10;
    /// Stop once max_i |kappa_i - target_i| falls below this.
    double convergence_tol = 1e-9;
    std::size_t record_every = 1;
    std::size_t max_steps = 5'000'000;
    SpectralTolerance spectral;

    void validate(const WeightedGraph& g) const {
        if (!(t_max > 0.0) || !std::isfinite(t_max)) throw std::invalid_argument("t_max must be positive");
        if (!(rtol > 0.0) || !(atol > 0.0)) throw std::invalid_argument("rtol and atol must be positive");
        if (!(convergence_tol > 0.0)) throw std::invalid_argument("convergence_tol must be positive");
        if (record_every == 0) throw std::invalid_argument("record_every must be at least 1");
        if (r0.size() != g.edge_count()) throw std::invalid_argument("r0 length does not match the edge count");
    }
};

struct FlowSample {
    double t = 0.0;
    Vector r;
    CurvatureVector kappa;
    /// 1/2 |kappa - target|^2
    double energy = 0.0;
    double sum_r = 0.0;
    /// (kappa - target) . dr/dt, the rate of change of the potential.
    double dissipation = 0.0;
    double potential = 0.0;
};

enum class FlowStatus { Converged, HorizonReached, Aborted };

inline std::string to_string(FlowStatus s) {
    switch (s) {
        case FlowStatus::Converged: return "Converged";
        case FlowStatus::HorizonReached: return "HorizonReached";
        case FlowStatus::Aborted: return "Aborted";
    }
    return "unknown";
}

struct InvariantReport {
    std::size_t points = 0;
    double max_sum_drift = 0.0;
    double max_energy_increase = 0.0;
    double max_potential_increase = 0.0;
    double max_dissipation = 0.0;
    /// Whether the kind is one for which conservation and dissipation are asserted.
    bool asserted = false;

    bool holds(double drift_tol, double energy_tol, double dissipation_tol) const {
        if (!asserted) return true;
        return max_sum_drift <= drift_tol && max_energy_increase <= energy_tol && max_dissipation <= dissipation_tol;
    }
};

struct FlowRun {
    FlowKind kind;
    CurvatureVector target;
    FlowStatus status = FlowStatus::HorizonReached;
    std::string abort_reason;
    double t_final = 0.0;
    LogWeights r_final;
    CurvatureVector kappa_final;
    std::vector<FlowSample> samples;
    std::size_t accepted_steps = 0;
    std::size_t rejected_steps = 0;
    std::size_t rhs_evaluations = 0;
    /// Invariants over every accepted step, not only the recorded samples.
    InvariantReport step_invariants;
    std::optional<double> rate_estimate;

    double final_residual() const {
        return kappa_final.size() ? (kappa_final - target).cwiseAbs().maxCoeff() : 0.0;
    }
};

namespace detail {

struct FlowEvaluation {
    CurvatureVector kappa;
    Vector rate;
};

inline FlowEvaluation evaluate_flow(const FlowKind& kind, const WeightedGraph& g, const Vector& r,
                                    const CurvatureVector& target, SpectralTolerance tol) {
    FlowEvaluation out;
    out.kappa = curvature_unchecked(g, r);
    const Vector residual = out.kappa - target;
    switch (kind.type) {
        case FlowKind::Type::Ricci:
            out.rate = kind.ricci_sign == RicciSign::PaperLiteral ? residual : Vector(-residual);
            break;
        case FlowKind::Type::Calabi:
            out.rate = -(jacobian_unchecked(g, r) * residual);
            break;
        case FlowKind::Type::Fractional: {
            const Spectrum sp = spectral_decompose(jacobian_unchecked(g, r), tol);
            out.rate = fractional_apply(sp, kind.s, residual, tol);
            break;
        }
        case FlowKind::Type::PTh:
            out.rate = p_laplacian_unchecked(g, r, kind.p, residual);
            break;
    }
    return out;
}

}  // namespace detail

/// dr/dt for the given flow at log-weights r toward target.
inline Vector rhs(const FlowKind& kind, const WeightedGraph& g, const LogWeights& r, const CurvatureVector& target,
                  SpectralTolerance tol = {}) {
    require_admissible(g);
    detail::require_size(g, r);
    validate_target(g, target);
    Vector rate = detail::evaluate_flow(kind, g, r.values(), target, tol).rate;
    if (!rate.allFinite()) throw std::runtime_error("flow right-hand side is not finite");
    return rate;
}

/// Largest positive jumps of energy and potential, largest sum(r) drift, largest dissipation.
inline InvariantReport monitor_invariants(const FlowRun& run) {
    InvariantReport rep;
    rep.asserted = run.kind.calabi_type();
    rep.points = run.samples.size();
    if (run.samples.empty()) return rep;
    const double sum0 = run.samples.front().sum_r;
    for (std::size_t k = 0; k < run.samples.size(); ++k) {
        const auto& s = run.samples[k];
        rep.max_sum_drift = std::max(rep.max_sum_drift, std::abs(s.sum_r - sum0));
        rep.max_dissipation = std::max(rep.max_dissipation, s.dissipation);
        if (k > 0) {
            const auto& prev = run.samples[k - 1];
            rep.max_energy_increase = std::max(rep.max_energy_increase, s.energy - prev.energy);
            rep.max_potential_increase = std::max(rep.max_potential_increase, s.potential - prev.potential);
        }
    }
    return rep;
}

/// Minimum number of samples in the tail window used for rate fitting.
inline constexpr std::size_t rate_window_min_samples = 20;

/// Minimum coefficient of determination for the tail to count as exponential decay.
inline constexpr double rate_fit_min_r2 = 0.95;

/**
 * Least-squares slope of ln(energy) against t over the tail where the energy
 * has fallen to 1e-2 of its maximum and stays there.
 *
 * Absent when the energy never drops two decades, the window holds fewer than
 * 20 positive samples, or ln(energy) is not close to linear in t there
 * (R^2 < 0.95), which is what slow algebraic decay looks like.
 */
inline std::optional<double> estimate_rate(const FlowRun& run) {
    const auto& s = run.samples;
    if (s.size() < rate_window_min_samples) return std::nullopt;
    double peak = 0.0;
    for (const auto& x : s) peak = std::max(peak, x.energy);
    if (!(peak > 0.0)) return std::nullopt;
    const double level = 1e-2 * peak;
    std::size_t start = s.size();
    while (start > 0 && s[start - 1].energy <= level) --start;
    if (start == s.size()) return std::nullopt;

    std::vector<double> ts, ys;
    for (std::size_t k = start; k < s.size(); ++k) {
        if (!(s[k].energy > 0.0)) continue;
        ts.push_back(s[k].t);
        ys.push_back(std::log(s[k].energy));
    }
    if (ts.size() < rate_window_min_samples) return std::nullopt;
    const double n = static_cast<double>(ts.size());
    double mt = 0.0, my = 0.0;
    for (std::size_t k = 0; k < ts.size(); ++k) {
        mt += ts[k];
        my += ys[k];
    }
    mt /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t k = 0; k < ts.size(); ++k) {
        sxx += (ts[k] - mt) * (ts[k] - mt);
        sxy += (ts[k] - mt) * (ys[k] - my);
        syy += (ys[k] - my) * (ys[k] - my);
    }
    if (!(sxx > 0.0)) return std::nullopt;
    if (syy > 0.0 && sxy * sxy / (sxx * syy) < rate_fit_min_r2) return std::nullopt;
    return sxy / sxx;
}

namespace detail {

// Dormand-Prince 5(4) tableau
struct DormandPrince {
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                            a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                            b6 = 11.0 / 84;
    // b - b_hat
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                            e6 = 22.0 / 525, e7 = -1.0 / 40;
};

inline double error_norm(const Vector& err, const Vector& y0, const Vector& y1, double atol, double rtol) {
    const Vector scale = (atol + rtol * y0.cwiseAbs().cwiseMax(y1.cwiseAbs()).array()).matrix();
    return std::sqrt((err.array() / scale.array()).square().mean());
}

}  // namespace detail

/// Largest |r_i| before a run is aborted; exp(700) is near the double limit.
inline constexpr double log_weight_limit = 700.0;

/**
 * Integrates the flow from cfg.r0 with an embedded Dormand-Prince 5(4) pair
 * under proportional-integral step control.
 *
 * Stops with Converged once max |kappa - target| < convergence_tol (checked
 * at t = 0 and after every accepted step), HorizonReached at t_max, or
 * Aborted on overflow (|r_i| > 700), non-finite state, step underflow
 * (h < 1e-14 t_max) or an exhausted step budget. The sum of r is never
 * re-projected.
 */
inline FlowRun integrate(const WeightedGraph& g, const FlowConfig& cfg) {
    using DP = detail::DormandPrince;
    require_admissible(g);
    cfg.validate(g);

    FlowRun run;
    run.kind = cfg.kind;
    run.target = resolve_target(g, cfg.target);
    run.step_invariants.asserted = cfg.kind.calabi_type();
    const CurvatureVector& target = run.target;

    auto eval = [&](const Vector& r) {
        ++run.rhs_evaluations;
        return detail::evaluate_flow(cfg.kind, g, r, target, cfg.spectral);
    };

    Vector y = cfg.r0.values();
    double t = 0.0;
    detail::FlowEvaluation cur = eval(y);
    const double sum0 = y.sum();

    auto make_sample = [&](double time, const Vector& r, const detail::FlowEvaluation& ev) {
        FlowSample s;
        s.t = time;
        s.r = r;
        s.kappa = ev.kappa;
        const Vector residual = ev.kappa - target;
        s.energy = 0.5 * residual.squaredNorm();
        s.sum_r = r.sum();
        s.dissipation = residual.dot(ev.rate);
        s.potential = potential(g, LogWeights(r), target);
        return s;
    };

    FlowSample last = make_sample(t, y, cur);
    run.samples.push_back(last);
    run.step_invariants.points = 1;
    run.step_invariants.max_dissipation = std::max(0.0, last.dissipation);

    auto finish = [&](FlowStatus status, std::string reason = {}) {
        run.status = status;
        run.abort_reason = std::move(reason);
        run.t_final = t;
        run.r_final = LogWeights(y);
        run.kappa_final = cur.kappa;
        if (run.samples.back().t != t) run.samples.push_back(last);
        run.rate_estimate = estimate_rate(run);
        return run;
    };

    auto converged = [&](const detail::FlowEvaluation& ev) {
        return (ev.kappa - target).cwiseAbs().maxCoeff() < cfg.convergence_tol;
    };

    if (converged(cur)) return finish(FlowStatus::Converged);
    if (!cur.rate.allFinite()) return finish(FlowStatus::Aborted, "non-finite right-hand side");

    // Initial step: Hairer-Norsett-Wanner heuristic.
    const Vector sc = (cfg.atol + cfg.rtol * y.cwiseAbs().array()).matrix();
    const double d0 = std::sqrt((y.array() / sc.array()).square().mean());
    const double d1 = std::sqrt((cur.rate.array() / sc.array()).square().mean());
    double h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    {
        const Vector y1 = y + h * cur.rate;
        const Vector f1 = eval(y1).rate;
        const double d2 = std::sqrt(((f1 - cur.rate).array() / sc.array()).square().mean()) / h;
        const double h1 = std::max(d1, d2) <= 1e-15 ? std::max(1e-6, 1e-3 * h)
                                                     : std::pow(0.01 / std::max(d1, d2), 1.0 / 5.0);
        h = std::min({100 * h, h1, cfg.t_max});
    }

    constexpr double safety = 0.9, fac_min = 0.2, fac_max = 5.0;
    constexpr double alpha = 0.7 / 5.0, beta = 0.4 / 5.0;
    double err_prev = 1.0;
    bool last_rejected = false;
    const double h_floor = 1e-14 * cfg.t_max;
    const auto n = y.size();
    Vector k2(n), k3(n), k4(n), k5(n), k6(n), ytmp(n);

    while (t < cfg.t_max) {
        if (run.accepted_steps + run.rejected_steps >= cfg.max_steps) {
            return finish(FlowStatus::Aborted, "step budget exhausted");
        }
        if (h < h_floor) return finish(FlowStatus::Aborted, "step-underflow");
        if (t + h > cfg.t_max) h = cfg.t_max - t;

        const Vector& k1 = cur.rate;
        ytmp = y + h * DP::a21 * k1;
        k2 = eval(ytmp).rate;
        ytmp = y + h * (DP::a31 * k1 + DP::a32 * k2);
        k3 = eval(ytmp).rate;
        ytmp = y + h * (DP::a41 * k1 + DP::a42 * k2 + DP::a43 * k3);
        k4 = eval(ytmp).rate;
        ytmp = y + h * (DP::a51 * k1 + DP::a52 * k2 + DP::a53 * k3 + DP::a54 * k4);
        k5 = eval(ytmp).rate;
        ytmp = y + h * (DP::a61 * k1 + DP::a62 * k2 + DP::a63 * k3 + DP::a64 * k4 + DP::a65 * k5);
        k6 = eval(ytmp).rate;
        const Vector y_new = y + h * (DP::b1 * k1 + DP::b3 * k3 + DP::b4 * k4 + DP::b5 * k5 + DP::b6 * k6);

        if (!y_new.allFinite()) {
            ++run.rejected_steps;
            last_rejected = true;
            h *= fac_min;
            continue;
        }
        if (y_new.cwiseAbs().maxCoeff() > log_weight_limit) {
            y = y_new;
            t += h;
            return finish(FlowStatus::Aborted, "overflow");
        }
        detail::FlowEvaluation next = eval(y_new);
        if (!next.rate.allFinite()) {
            ++run.rejected_steps;
            last_rejected = true;
            h *= fac_min;
            continue;
        }
        const Vector err =
            h * (DP::e1 * k1 + DP::e3 * k3 + DP::e4 * k4 + DP::e5 * k5 + DP::e6 * k6 + DP::e7 * next.rate);
        const double en = detail::error_norm(err, y, y_new, cfg.atol, cfg.rtol);

        if (en <= 1.0) {
            t += h;
            y = y_new;
            cur = std::move(next);
            ++run.accepted_steps;

            FlowSample s = make_sample(t, y, cur);
            auto& inv = run.step_invariants;
            ++inv.points;
            inv.max_sum_drift = std::max(inv.max_sum_drift, std::abs(s.sum_r - sum0));
            inv.max_energy_increase = std::max(inv.max_energy_increase, s.energy - last.energy);
            inv.max_potential_increase = std::max(inv.max_potential_increase, s.potential - last.potential);
            inv.max_dissipation = std::max(inv.max_dissipation, s.dissipation);
            last = std::move(s);
            if (run.accepted_steps % cfg.record_every == 0) run.samples.push_back(last);

            if (converged(cur)) return finish(FlowStatus::Converged);

            const double e = std::max(en, 1e-10);
            double fac = safety * std::pow(e, -alpha) * std::pow(err_prev, beta);
            fac = std::clamp(fac, fac_min, last_rejected ? 1.0 : fac_max);
            h *= fac;
            err_prev = e;
            last_rejected = false;
        } else {
            ++run.rejected_steps;
            last_rejected = true;
            h *= std::max(fac_min, safety * std::pow(en, -1.0 / 5.0));
        }
    }
    return finish(FlowStatus::HorizonReached);
}

}  // namespace calabi_graph
