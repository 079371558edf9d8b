#pragma once

#include "vsartrack/core.hpp"

#include <span>
#include <vector>

namespace vsartrack::gsi {

struct GsiParams {
    double length_scale = 10.0;  // frames
    double noise_var = 1e-2;     // on mean-centred values, unit-amplitude kernel
    int max_gap = 20;            // longest run of missing frames that is filled
    bool fill_only = false;      // keep observed samples as they are

    void validate() const;
};

/// GP posterior mean with RBF kernel exp(-(t - t')^2 / (2 l^2)) on
/// mean-centred values. Throws std::invalid_argument for fewer than two
/// observations, non-increasing times or queries outside the observed span,
/// and NumericalError when K + noise_var * I cannot be factorized.
std::vector<double> gp_regress(std::span<const double> times, std::span<const double> values,
                               std::span<const double> queries, const GsiParams& params);

/// Smooths cx, cy, w, h independently and fills interior gaps of at most
/// max_gap frames. Never extrapolates past the first or last observed frame.
/// Trajectories with fewer than two samples are returned unchanged.
Trajectory interpolate_trajectory(const Trajectory& traj, const GsiParams& params);

std::vector<Trajectory> interpolate_all(const std::vector<Trajectory>& trajs, const GsiParams& params,
                                        unsigned threads = 1);

}  // namespace vsartrack::gsi
