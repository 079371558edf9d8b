#include "vsartrack/gsi.hpp"

#include "vsartrack/error.hpp"
#include "vsartrack/parallel.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace vsartrack::gsi {

void GsiParams::validate() const {
    if (!(length_scale > 0.0)) throw std::invalid_argument("gsi: length_scale must be > 0");
    if (!(noise_var >= 0.0)) throw std::invalid_argument("gsi: noise_var must be >= 0");
    if (max_gap < 1) throw std::invalid_argument("gsi: max_gap must be >= 1");
}

std::vector<double> gp_regress(std::span<const double> times, std::span<const double> values,
                               std::span<const double> queries, const GsiParams& params) {
    params.validate();
    if (times.size() != values.size()) throw std::invalid_argument("gp_regress: times and values differ in length");
    if (times.size() < 2) throw std::invalid_argument("gp_regress: at least two observations required");
    for (std::size_t i = 1; i < times.size(); ++i)
        if (!(times[i] > times[i - 1])) throw std::invalid_argument("gp_regress: times must be strictly increasing");
    for (double q : queries)
        if (q < times.front() || q > times.back()) throw std::invalid_argument("gp_regress: query outside observed span");

    const auto n = static_cast<Eigen::Index>(times.size());
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(n);
    const double inv2l2 = 1.0 / (2.0 * params.length_scale * params.length_scale);
    auto kernel = [inv2l2](double a, double b) { return std::exp(-(a - b) * (a - b) * inv2l2); };

    Eigen::MatrixXd k(n, n);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        y(i) = values[static_cast<std::size_t>(i)] - mean;
        for (Eigen::Index j = 0; j < n; ++j) k(i, j) = kernel(times[static_cast<std::size_t>(i)], times[static_cast<std::size_t>(j)]);
        k(i, i) += params.noise_var;
    }

    const Eigen::LDLT<Eigen::MatrixXd> ldlt(k);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive())
        throw NumericalError("gp_regress: kernel matrix is not positive definite");
    // LDLT accepts zero pivots silently; reject a numerically singular system.
    const Eigen::VectorXd d = ldlt.vectorD();
    if (!(d.minCoeff() > 1e-13 * d.maxCoeff())) throw NumericalError("gp_regress: singular kernel matrix (raise noise_var)");
    const Eigen::VectorXd alpha = ldlt.solve(y);
    if (!alpha.allFinite()) throw NumericalError("gp_regress: singular kernel matrix");

    std::vector<double> out;
    out.reserve(queries.size());
    for (double q : queries) {
        double f = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) f += kernel(q, times[static_cast<std::size_t>(i)]) * alpha(i);
        out.push_back(f + mean);
    }
    return out;
}

Trajectory interpolate_trajectory(const Trajectory& traj, const GsiParams& params) {
    params.validate();
    if (traj.samples.size() < 2) return traj;
    traj.validate();

    std::vector<double> times;
    std::array<std::vector<double>, 4> coords;
    for (const auto& s : traj.samples) {
        times.push_back(static_cast<double>(s.frame));
        const CenterBox c = to_center(s.box);
        coords[0].push_back(c.cx);
        coords[1].push_back(c.cy);
        coords[2].push_back(c.w);
        coords[3].push_back(c.h);
    }

    // Observed frames plus every missing frame inside a short enough gap.
    std::vector<int> frames;
    std::vector<bool> observed;
    for (std::size_t i = 0; i < traj.samples.size(); ++i) {
        frames.push_back(traj.samples[i].frame);
        observed.push_back(true);
        if (i + 1 == traj.samples.size()) break;
        const int gap = traj.samples[i + 1].frame - traj.samples[i].frame - 1;
        if (gap >= 1 && gap <= params.max_gap)
            for (int f = traj.samples[i].frame + 1; f < traj.samples[i + 1].frame; ++f) {
                frames.push_back(f);
                observed.push_back(false);
            }
    }
    std::vector<double> queries(frames.begin(), frames.end());

    std::array<std::vector<double>, 4> fitted;
    for (std::size_t c = 0; c < 4; ++c) fitted[c] = gp_regress(times, coords[c], queries, params);

    Trajectory out;
    out.id = traj.id;
    std::size_t obs = 0;
    for (std::size_t i = 0; i < frames.size(); ++i) {
        if (observed[i] && params.fill_only) {
            out.samples.push_back(traj.samples[obs++]);
            continue;
        }
        if (observed[i]) ++obs;
        const CenterBox c{fitted[0][i], fitted[1][i], std::max(fitted[2][i], 1.0), std::max(fitted[3][i], 1.0)};
        out.samples.push_back({frames[i], from_center(c)});
    }
    return out;
}

std::vector<Trajectory> interpolate_all(const std::vector<Trajectory>& trajs, const GsiParams& params, unsigned threads) {
    std::vector<Trajectory> out(trajs.size());
    parallel_for(trajs.size(), threads, [&](std::size_t i) { out[i] = interpolate_trajectory(trajs[i], params); });
    return out;
}

}  // namespace vsartrack::gsi
