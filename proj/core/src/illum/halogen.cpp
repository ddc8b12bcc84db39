#include "spectracal/illum/halogen.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>

#include "spectracal/errors.hpp"

namespace spectracal::illum {

namespace {

using Vec4 = Eigen::Vector4d;

Vec4 to_vec(const HalogenParams& p) { return {p.a, p.b, p.c, p.d}; }
HalogenParams from_vec(const Vec4& v) { return {v[0], v[1], v[2], v[3]}; }

double min_lambda(const WavelengthGrid& grid) { return grid.micrometers(0); }

double curve(const HalogenParams& p, double lambda_um) {
    const double base = p.a * lambda_um - p.b;
    return base * base * base / std::expm1(p.c * lambda_um - p.d);
}

// Linear constraints are tightest at the shortest wavelength when a, c > 0;
// checking every band keeps this valid for any sign.
bool feasible(const HalogenParams& p, const WavelengthGrid& grid) {
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double lam = grid.micrometers(k);
        if (!(p.a * lam - p.b >= 0.0)) return false;
        if (!(p.c * lam - p.d >= kPoleMargin)) return false;
    }
    return true;
}

// Pulls b and d down until the start is feasible at the shortest wavelength.
HalogenParams repair(HalogenParams p, const WavelengthGrid& grid) {
    const double lam = min_lambda(grid);
    p.a = std::max(p.a, 1e-3);
    p.c = std::max(p.c, 1e-3);
    p.b = std::min(p.b, p.a * lam);
    p.d = std::min(p.d, p.c * lam - 2.0 * kPoleMargin);
    return p;
}

struct Problem {
    const WavelengthGrid& grid;
    std::span<const double> target;

    Eigen::VectorXd residual(const HalogenParams& p) const {
        Eigen::VectorXd r(static_cast<Eigen::Index>(target.size()));
        for (std::size_t k = 0; k < target.size(); ++k)
            r[static_cast<Eigen::Index>(k)] = curve(p, grid.micrometers(k)) - target[k];
        return r;
    }

    Eigen::MatrixXd jacobian(const Vec4& x, double rel_step) const {
        Eigen::MatrixXd jac(static_cast<Eigen::Index>(target.size()), 4);
        for (int q = 0; q < 4; ++q) {
            const double h = rel_step * std::max(std::abs(x[q]), 1e-3);
            Vec4 lo = x;
            Vec4 hi = x;
            lo[q] -= h;
            hi[q] += h;
            // Near the pole boundary the backward point may be infeasible;
            // fall back to a one-sided difference there.
            const bool lo_ok = feasible(from_vec(lo), grid);
            const bool hi_ok = feasible(from_vec(hi), grid);
            if (lo_ok && hi_ok) {
                jac.col(q) = (residual(from_vec(hi)) - residual(from_vec(lo))) / (2.0 * h);
            } else if (hi_ok) {
                jac.col(q) = (residual(from_vec(hi)) - residual(from_vec(x))) / h;
            } else {
                jac.col(q) = (residual(from_vec(x)) - residual(from_vec(lo))) / h;
            }
        }
        return jac;
    }
};

struct StartOutcome {
    Vec4 x;
    double cost = std::numeric_limits<double>::infinity();
    bool converged = false;
};

StartOutcome levenberg_marquardt(const Problem& prob, Vec4 x, const FitOptions& opt) {
    Eigen::VectorXd r = prob.residual(from_vec(x));
    double cost = r.squaredNorm();
    double damping = 1e-3;
    StartOutcome out{x, cost, false};
    if (!std::isfinite(cost)) return out;

    for (int iter = 0; iter < opt.max_iterations; ++iter) {
        if (cost == 0.0) {
            out.converged = true;
            break;
        }
        const Eigen::MatrixXd jac = prob.jacobian(x, opt.jacobian_relative_step);
        const Eigen::Matrix4d jtj = jac.transpose() * jac;
        const Vec4 g = jac.transpose() * r;

        bool accepted = false;
        Vec4 step = Vec4::Zero();
        while (damping < 1e16) {
            Eigen::Matrix4d lhs = jtj;
            for (int q = 0; q < 4; ++q) lhs(q, q) += damping * std::max(jtj(q, q), 1e-12);
            step = lhs.ldlt().solve(-g);
            const Vec4 trial = x + step;
            const HalogenParams tp = from_vec(trial);
            if (step.allFinite() && feasible(tp, prob.grid)) {
                const Eigen::VectorXd tr = prob.residual(tp);
                const double tc = tr.squaredNorm();
                if (std::isfinite(tc) && tc < cost) {
                    const double rel_change = (cost - tc) / cost;
                    x = trial;
                    r = tr;
                    cost = tc;
                    damping = std::max(damping * 0.3, 1e-12);
                    accepted = true;
                    if (rel_change < opt.cost_tolerance) out.converged = true;
                    break;
                }
            }
            damping *= 10.0;
        }
        if (!accepted) {
            // No descent direction left at any damping: stationary point.
            out.converged = true;
            break;
        }
        if (step.norm() < opt.step_tolerance) out.converged = true;
        if (out.converged) break;
    }
    out.x = x;
    out.cost = cost;
    return out;
}

}  // namespace

bool satisfies_constraints(const HalogenParams& p, const WavelengthGrid& grid) {
    return feasible(p, grid);
}

void ParamRanges::validate(const WavelengthGrid& grid) const {
    const std::array<Interval, 4> all{a, b, c, d};
    for (const auto& iv : all) {
        if (!std::isfinite(iv.lo) || !std::isfinite(iv.hi) || iv.lo > iv.hi)
            throw ParameterError("parameter range has lo > hi or non-finite bounds");
    }
    // The most permissive corner: largest a and c, smallest b and d.
    if (!feasible({a.hi, b.lo, c.hi, d.lo}, grid))
        throw ParameterError("parameter ranges contain no feasible halogen curve on the grid");
}

Spectrum eval_halogen(const HalogenParams& p, const WavelengthGrid& grid) {
    if (!feasible(p, grid))
        throw DomainError("halogen parameters violate the nonnegativity or pole constraint");
    std::vector<double> out(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) out[k] = curve(p, grid.micrometers(k));
    return Spectrum(std::move(out), grid);
}

double halogen_rmse(const HalogenParams& p, const Spectrum& target) {
    const Spectrum f = eval_halogen(p, target.grid());
    double sq = 0.0;
    for (std::size_t k = 0; k < f.size(); ++k) {
        const double e = f[k] - target[k];
        sq += e * e;
    }
    return std::sqrt(sq / static_cast<double>(f.size()));
}

HalogenParams sample_halogen(const ParamRanges& ranges, double stray_level,
                             const WavelengthGrid& grid, Rng& rng, double kappa,
                             int max_attempts) {
    if (!(stray_level >= 0.0 && stray_level <= 1.0))
        throw ParameterError("stray_level must lie in [0, 1]");
    const double widen = stray_level * kappa;
    auto draw = [&](const Interval& iv) {
        const double hi = iv.hi + std::abs(iv.hi) * widen;
        return rng.uniform(iv.lo, hi);
    };
    for (int attempt = 0; attempt < max_attempts; ++attempt) {
        HalogenParams p;
        p.a = draw(ranges.a);
        p.b = draw(ranges.b);
        p.c = draw(ranges.c);
        p.d = draw(ranges.d);
        if (feasible(p, grid)) return p;
    }
    throw SamplingError("no feasible halogen parameters after " + std::to_string(max_attempts) +
                        " draws");
}

FitResult fit_halogen(const Spectrum& target, const FitOptions& options) {
    const auto& grid = target.grid();
    double peak = 0.0;
    for (double v : target.values()) {
        if (v < 0.0) throw DomainError("fit target must be nonnegative");
        peak = std::max(peak, v);
    }
    if (!(peak > 0.0)) throw DomainError("fit target is identically zero");
    if (options.starts < 1) throw ParameterError("fit needs at least one start");
    options.ranges.validate(grid);

    // Latin hypercube: one stratum per start in every dimension, strata
    // permuted independently per dimension.
    Rng rng(options.seed);
    const int n = options.starts;
    const std::array<Interval, 4> ivs{options.ranges.a, options.ranges.b, options.ranges.c,
                                      options.ranges.d};
    std::array<std::vector<double>, 4> coords;
    for (int q = 0; q < 4; ++q) {
        std::vector<int> strata(static_cast<std::size_t>(n));
        std::iota(strata.begin(), strata.end(), 0);
        shuffle(strata.begin(), strata.end(), rng);
        for (int s = 0; s < n; ++s) {
            const double u = (strata[static_cast<std::size_t>(s)] + rng.uniform()) / n;
            coords[q].push_back(ivs[q].lo + u * ivs[q].width());
        }
    }

    const Problem prob{grid, target.values()};
    StartOutcome best;
    int converged = 0;
    for (int s = 0; s < n; ++s) {
        const auto idx = static_cast<std::size_t>(s);
        const HalogenParams start =
            repair({coords[0][idx], coords[1][idx], coords[2][idx], coords[3][idx]}, grid);
        if (!feasible(start, grid)) continue;
        const StartOutcome out = levenberg_marquardt(prob, to_vec(start), options);
        if (out.converged) ++converged;
        if (out.cost < best.cost) best = out;
    }
    const double rmse = std::sqrt(best.cost / static_cast<double>(target.size()));
    if (converged == 0 || !std::isfinite(best.cost))
        throw ConvergenceError("no halogen fit start converged", rmse);

    FitResult result;
    result.params = from_vec(best.x);
    result.rmse = halogen_rmse(result.params, target);
    result.converged_starts = converged;
    return result;
}

}  // namespace spectracal::illum
