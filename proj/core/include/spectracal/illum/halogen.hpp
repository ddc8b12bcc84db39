#pragma once

#include <cstdint>

#include "spectracal/cube.hpp"
#include "spectracal/rng.hpp"

namespace spectracal::illum {

/// Parameters of the Planck-like halogen curve
///
///     f(lambda) = (a*lambda - b)^3 / (exp(c*lambda - d) - 1)
///
/// with lambda in micrometers. On a grid the curve must satisfy
/// a*lambda - b >= 0 (nonnegative intensity) and c*lambda - d >= kPoleMargin
/// (pole exclusion).
struct HalogenParams {
    double a = 1.0;
    double b = 0.0;
    double c = 1.0;
    double d = 0.0;

    friend bool operator==(const HalogenParams&, const HalogenParams&) = default;
};

inline constexpr double kPoleMargin = 1e-3;

bool satisfies_constraints(const HalogenParams& p, const WavelengthGrid& grid);

struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    double width() const noexcept { return hi - lo; }
};

/// Closed sampling intervals for each parameter.
struct ParamRanges {
    Interval a{0.5, 2.0};
    Interval b{0.0, 0.6};
    Interval c{2.0, 12.0};
    Interval d{0.0, 4.0};

    /// Throws ParameterError unless lo <= hi everywhere and the box contains
    /// at least one point that is feasible on `grid`.
    void validate(const WavelengthGrid& grid) const;
};

/// Evaluates the curve on `grid`. Throws DomainError if the constraints fail.
Spectrum eval_halogen(const HalogenParams& p, const WavelengthGrid& grid);

/// Widening factor applied to the upper bounds at stray_level = 1.
inline constexpr double kDefaultStrayWidening = 0.5;

/// Uniform draw from `ranges` with every upper bound widened to
/// hi + |hi| * stray_level * kappa, rejecting draws that violate the curve
/// constraints on `grid`.
HalogenParams sample_halogen(const ParamRanges& ranges, double stray_level,
                             const WavelengthGrid& grid, Rng& rng,
                             double kappa = kDefaultStrayWidening, int max_attempts = 10000);

struct FitOptions {
    ParamRanges ranges{};
    int starts = 16;
    int max_iterations = 200;
    double step_tolerance = 1e-10;
    /// Relative cost change below which a start is considered converged.
    double cost_tolerance = 1e-15;
    double jacobian_relative_step = 1e-6;
    std::uint64_t seed = 0x5eed;
};

struct FitResult {
    HalogenParams params;
    double rmse = 0.0;
    int converged_starts = 0;
};

/// Least-squares fit of the halogen curve to `target` by multi-start
/// Levenberg-Marquardt. Starts are a Latin hypercube over the ranges, repaired
/// onto the feasible set. Only the spectral residual is contractual: nearly
/// degenerate parameter directions (a^3 * exp(d)) are not resolved.
FitResult fit_halogen(const Spectrum& target, const FitOptions& options = {});

/// Root-mean-square difference between eval_halogen(p) and target.
double halogen_rmse(const HalogenParams& p, const Spectrum& target);

}  // namespace spectracal::illum
