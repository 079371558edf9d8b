#include "vsartrack/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace vsartrack::sim {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
}

Eigen::Vector2d path_center(const Path& path, double k) {
    if (const auto* lin = std::get_if<LinearPath>(&path)) return {lin->cx + lin->vx * k, lin->cy + lin->vy * k};
    const auto& arc = std::get<ArcPath>(path);
    const double a = arc.start_angle + arc.angular_rate * k;
    return {arc.center_x + arc.radius * std::cos(a), arc.center_y + arc.radius * std::sin(a)};
}

BBox shadow_box(const Eigen::Vector2d& center, int w, int h) {
    const double x = std::floor(center.x() - w / 2.0 + 0.5);
    const double y = std::floor(center.y() - h / 2.0 + 0.5);
    return {x, y, static_cast<double>(w), static_cast<double>(h)};
}

void SceneConfig::validate() const {
    if (rows < 16 || cols < 16) throw std::invalid_argument("scene: frame dimensions must be >= 16");
    if (frames < 2) throw std::invalid_argument("scene: at least 2 frames required");
    if (rank < 1) throw std::invalid_argument("scene: background rank must be >= 1");
    if (n_targets < 0 || n_static < 0) throw std::invalid_argument("scene: target counts must be >= 0");
    if (!(shadow_depth > 0.0 && shadow_depth <= 1.0)) throw std::invalid_argument("scene: shadow_depth must lie in (0,1]");
    if (shadow_w < 1 || shadow_h < 1) throw std::invalid_argument("scene: shadow size must be >= 1");
    if (static_cast<std::size_t>(shadow_w) > cols || static_cast<std::size_t>(shadow_h) > rows)
        throw std::invalid_argument("scene: shadow larger than the frame");
    if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) throw std::invalid_argument("scene: noise_sigma must be >= 0");
}

namespace {

bool inside(const BBox& b, const SceneConfig& cfg) {
    return b.x >= 0.0 && b.y >= 0.0 && b.x + b.w <= static_cast<double>(cfg.cols) &&
           b.y + b.h <= static_cast<double>(cfg.rows);
}

bool path_inside(const Path& p, const SceneConfig& cfg) {
    for (std::size_t k = 0; k < cfg.frames; ++k)
        if (!inside(shadow_box(path_center(p, static_cast<double>(k)), cfg.shadow_w, cfg.shadow_h), cfg)) return false;
    return true;
}

bool boxes_near(const BBox& a, const BBox& b, double margin) {
    return a.x - margin < b.x + b.w && b.x - margin < a.x + a.w && a.y - margin < b.y + b.h && b.y - margin < a.y + a.h;
}

std::vector<Path> random_paths(const SceneConfig& cfg, Rng& rng) {
    const double margin = std::max(cfg.shadow_w, cfg.shadow_h);
    const double min_sep = 1.5 * (cfg.shadow_w + cfg.shadow_h);
    const double extent = static_cast<double>(std::min(cfg.rows, cfg.cols));
    std::vector<Path> paths;
    for (int i = 0; i < cfg.n_targets; ++i) {
        bool placed = false;
        for (int attempt = 0; attempt < 2000 && !placed; ++attempt) {
            const double speed = rng.uniform(0.8, 1.5);
            Path candidate;
            if (rng.uniform() < 0.7) {
                const double heading = rng.uniform(0.0, 2.0 * std::numbers::pi);
                candidate = LinearPath{rng.uniform(margin, static_cast<double>(cfg.cols) - margin),
                                       rng.uniform(margin, static_cast<double>(cfg.rows) - margin),
                                       speed * std::cos(heading), speed * std::sin(heading)};
            } else {
                const double radius = rng.uniform(0.2, 0.4) * extent;
                const double direction = rng.uniform() < 0.5 ? -1.0 : 1.0;
                candidate = ArcPath{rng.uniform(margin, static_cast<double>(cfg.cols) - margin),
                                    rng.uniform(margin, static_cast<double>(cfg.rows) - margin), radius,
                                    rng.uniform(0.0, 2.0 * std::numbers::pi), direction * speed / radius};
            }
            if (!path_inside(candidate, cfg)) continue;
            bool clear = true;
            for (const auto& other : paths) {
                for (std::size_t k = 0; k < cfg.frames && clear; ++k) {
                    const auto kd = static_cast<double>(k);
                    clear = (path_center(candidate, kd) - path_center(other, kd)).norm() >= min_sep;
                }
                if (!clear) break;
            }
            if (clear) {
                paths.push_back(candidate);
                placed = true;
            }
        }
        if (!placed) throw std::invalid_argument("scene: could not place target " + std::to_string(i + 1));
    }
    return paths;
}

std::vector<BBox> random_static_patches(const SceneConfig& cfg, const std::vector<Path>& paths, Rng& rng) {
    std::vector<BBox> patches;
    const double margin = 3.0;
    for (int i = 0; i < cfg.n_static; ++i) {
        bool placed = false;
        for (int attempt = 0; attempt < 2000 && !placed; ++attempt) {
            const BBox b{std::floor(rng.uniform(0.0, static_cast<double>(cfg.cols - cfg.shadow_w + 1))),
                         std::floor(rng.uniform(0.0, static_cast<double>(cfg.rows - cfg.shadow_h + 1))),
                         static_cast<double>(cfg.shadow_w), static_cast<double>(cfg.shadow_h)};
            bool clear = true;
            for (const auto& p : patches) clear = clear && !boxes_near(b, p, margin);
            for (const auto& path : paths) {
                for (std::size_t k = 0; k < cfg.frames && clear; ++k)
                    clear = !boxes_near(b, shadow_box(path_center(path, static_cast<double>(k)), cfg.shadow_w, cfg.shadow_h),
                                        margin);
            }
            if (clear) {
                patches.push_back(b);
                placed = true;
            }
        }
        if (!placed) throw std::invalid_argument("scene: could not place static patch " + std::to_string(i + 1));
    }
    return patches;
}

// Smooth rank-`rank` background in Casorati form, affinely mapped onto
// [0.3, 0.9]. The first spatial pattern is constant, so the affine offset
// folds into its temporal coefficient and the rank is preserved.
Eigen::MatrixXd background(const SceneConfig& cfg, Rng& rng) {
    const auto rows = static_cast<Eigen::Index>(cfg.rows);
    const auto cols = static_cast<Eigen::Index>(cfg.cols);
    const auto frames = static_cast<Eigen::Index>(cfg.frames);
    Eigen::MatrixXd spatial(rows * cols, cfg.rank);
    Eigen::MatrixXd temporal(frames, cfg.rank);
    const double two_pi = 2.0 * std::numbers::pi;

    for (int k = 0; k < cfg.rank; ++k) {
        if (k == 0) {
            spatial.col(0).setOnes();
        } else {
            const double fr = rng.uniform(0.5, 1.5);
            const double fc = rng.uniform(0.5, 1.5);
            const double pr = rng.uniform(0.0, two_pi);
            const double pc = rng.uniform(0.0, two_pi);
            for (Eigen::Index r = 0; r < rows; ++r)
                for (Eigen::Index c = 0; c < cols; ++c)
                    spatial(r * cols + c, k) = std::cos(two_pi * fr * static_cast<double>(r) / static_cast<double>(rows) + pr) *
                                               std::cos(two_pi * fc * static_cast<double>(c) / static_cast<double>(cols) + pc);
        }
        const double base = 1.0;
        const double swing = k == 0 ? 0.1 : 0.3;
        const double cycles = rng.uniform(0.3, 1.0);
        const double phase = rng.uniform(0.0, two_pi);
        for (Eigen::Index t = 0; t < frames; ++t)
            temporal(t, k) = base + swing * std::sin(two_pi * cycles * static_cast<double>(t) / static_cast<double>(frames) + phase);
    }

    Eigen::MatrixXd bg = spatial * temporal.transpose();
    const double lo = bg.minCoeff();
    const double hi = bg.maxCoeff();
    if (hi - lo > 0.0)
        bg = ((bg.array() - lo) * (0.6 / (hi - lo)) + 0.3).matrix();
    else
        bg.setConstant(0.6);
    return bg;
}

void stamp(Eigen::Ref<Eigen::Matrix<bool, Eigen::Dynamic, 1>> mask, const BBox& b, std::size_t cols) {
    const auto x0 = static_cast<std::size_t>(b.x);
    const auto y0 = static_cast<std::size_t>(b.y);
    for (std::size_t r = y0; r < y0 + static_cast<std::size_t>(b.h); ++r)
        for (std::size_t c = x0; c < x0 + static_cast<std::size_t>(b.w); ++c) mask(static_cast<Eigen::Index>(r * cols + c)) = true;
}

}  // namespace

Scene generate(const SceneConfig& config) {
    config.validate();
    Rng layout(splitmix64(config.seed));

    std::vector<Path> paths = config.paths;
    if (paths.empty()) {
        paths = random_paths(config, layout);
    } else {
        for (std::size_t i = 0; i < paths.size(); ++i)
            if (!path_inside(paths[i], config))
                throw std::invalid_argument("scene: path " + std::to_string(i + 1) + " leaves the frame");
    }
    const std::vector<BBox> patches = random_static_patches(config, paths, layout);
    const Eigen::MatrixXd bg = background(config, layout);

    const auto pixels = static_cast<Eigen::Index>(config.rows * config.cols);
    const auto frames = static_cast<Eigen::Index>(config.frames);

    Eigen::Matrix<bool, Eigen::Dynamic, 1> static_mask = Eigen::Matrix<bool, Eigen::Dynamic, 1>::Constant(pixels, false);
    for (const auto& p : patches) stamp(static_mask, p, config.cols);

    Scene scene;
    scene.oracle.static_patches = patches;
    scene.oracle.paths = paths;
    scene.oracle.background = bg;
    scene.oracle.shadow_support.setConstant(pixels, frames, false);
    for (Eigen::Index p = 0; p < pixels; ++p)
        if (static_mask(p))
            for (Eigen::Index t = 0; t < frames; ++t)
                scene.oracle.background(p, t) = std::max(bg(p, t) - config.shadow_depth, 0.0);

    for (std::size_t i = 0; i < paths.size(); ++i) {
        Trajectory traj;
        traj.id = static_cast<int>(i + 1);
        for (std::size_t k = 0; k < config.frames; ++k) {
            const BBox box = shadow_box(path_center(paths[i], static_cast<double>(k)), config.shadow_w, config.shadow_h);
            traj.samples.push_back({static_cast<int>(k + 1), box});
            stamp(scene.oracle.shadow_support.col(static_cast<Eigen::Index>(k)), box, config.cols);
        }
        scene.ground_truth.push_back(std::move(traj));
    }

    std::vector<float> data(config.frames * config.rows * config.cols);
    for (Eigen::Index t = 0; t < frames; ++t) {
        Rng noise(splitmix64(config.seed ^ splitmix64(static_cast<std::uint64_t>(t) + 1)));
        for (Eigen::Index p = 0; p < pixels; ++p) {
            double v = scene.oracle.background(p, t);
            if (scene.oracle.shadow_support(p, t)) v = std::max(v - config.shadow_depth, 0.0);
            if (config.noise_sigma > 0.0) v += config.noise_sigma * noise.normal();
            data[static_cast<std::size_t>(t * pixels + p)] = static_cast<float>(std::clamp(v, 0.0, 1.0));
        }
    }
    scene.stack = FrameStack(config.frames, config.rows, config.cols, std::move(data));
    return scene;
}

}  // namespace vsartrack::sim
