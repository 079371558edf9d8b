#pragma once

// Synthetic video scene with known ground truth: a smooth low-rank background,
// moving dark shadows along parametric paths, static dark patches and additive
// Gaussian noise.
//
// Randomness comes from std::mt19937_64 (fixed output sequence by the C++
// standard). Uniform and normal variates are derived from its raw 64-bit
// output here rather than through <random> distributions, whose algorithms
// differ between standard libraries. Noise for frame k is drawn from its own
// stream seeded from splitmix64 of (seed, k), so frames are independent.

#include "vsartrack/core.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <variant>
#include <vector>

namespace vsartrack::sim {

/// Center moves by (vx, vy) pixels per frame from (cx, cy) at frame 1.
struct LinearPath {
    double cx = 0.0;
    double cy = 0.0;
    double vx = 0.0;
    double vy = 0.0;
};

/// Center on a circle; angle(frame k, 0-based) = start_angle + angular_rate * k.
struct ArcPath {
    double center_x = 0.0;
    double center_y = 0.0;
    double radius = 1.0;
    double start_angle = 0.0;   // radians
    double angular_rate = 0.0;  // radians per frame
};

using Path = std::variant<LinearPath, ArcPath>;

/// Path center at 0-based frame index k.
Eigen::Vector2d path_center(const Path& path, double k);

struct SceneConfig {
    std::size_t rows = 64;
    std::size_t cols = 64;
    std::size_t frames = 40;
    int rank = 3;
    int n_targets = 0;           // paths generated from the seed when `paths` is empty
    std::vector<Path> paths;     // explicit paths; overrides n_targets when non-empty
    double shadow_depth = 0.4;
    int shadow_w = 6;
    int shadow_h = 6;
    double noise_sigma = 0.01;
    int n_static = 0;
    std::uint64_t seed = 1;

    /// Throws std::invalid_argument on out-of-range fields.
    void validate() const;
};

struct SceneOracle {
    Eigen::MatrixXd background;  // stationary part (Casorati form), before noise
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> shadow_support;  // moving-shadow pixels
    std::vector<BBox> static_patches;
    std::vector<Path> paths;  // resolved paths, one per GT trajectory
};

struct Scene {
    FrameStack stack;
    std::vector<Trajectory> ground_truth;  // moving shadows only, ids 1..n
    SceneOracle oracle;
};

/// Deterministic given config.seed. Throws std::invalid_argument when a path
/// leaves the frame or when generated targets cannot be placed.
Scene generate(const SceneConfig& config);

/// Integer-aligned shadow box whose center is nearest to `center`.
BBox shadow_box(const Eigen::Vector2d& center, int w, int h);

std::uint64_t splitmix64(std::uint64_t x);

/// Portable variates on top of mt19937_64.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}
    double uniform();                        // [0,1), 53-bit resolution
    double uniform(double lo, double hi);
    double normal();                         // Box-Muller, standard normal

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace vsartrack::sim
