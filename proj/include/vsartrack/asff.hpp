#pragma once

// Adaptive spatial fusion of three pyramid levels. Level 1 is the finest map;
// each step up halves rows and cols. Maps are resampled to the target level
// (nearest-neighbour replication upward in resolution, 2x2 mean pooling
// downward) and blended with per-position softmax weights over three logit
// planes.

#include <Eigen/Dense>

#include <array>
#include <cstddef>
#include <vector>

namespace vsartrack::asff {

struct FeatureMap {
    std::size_t channels = 1;
    std::size_t rows = 1;
    std::size_t cols = 1;
    std::vector<double> data;  // channel-major, row-major within a channel

    FeatureMap() = default;
    FeatureMap(std::size_t channels, std::size_t rows, std::size_t cols, double fill = 0.0);
    FeatureMap(std::size_t channels, std::size_t rows, std::size_t cols, std::vector<double> values);

    double at(std::size_t ch, std::size_t r, std::size_t c) const { return data[(ch * rows + r) * cols + c]; }
    double& at(std::size_t ch, std::size_t r, std::size_t c) { return data[(ch * rows + r) * cols + c]; }

    /// Throws std::invalid_argument on zero dimensions, size mismatch or
    /// non-finite samples.
    void validate() const;
};

struct FusionWeights {
    // alpha, beta, gamma planes for levels 1, 2, 3
    std::array<Eigen::MatrixXd, 3> planes;
};

FeatureMap resample_level(const FeatureMap& map, int from_level, int to_level);

/// Per-position softmax over three logit planes of equal shape.
FusionWeights softmax_weights(const std::array<Eigen::MatrixXd, 3>& logits);

/// maps[i] lives at level i + 1. Throws std::invalid_argument if a resampled
/// map or a logit plane does not match the target level's shape.
FeatureMap fuse(const std::array<FeatureMap, 3>& maps, const std::array<Eigen::MatrixXd, 3>& logits, int target_level);

}  // namespace vsartrack::asff
