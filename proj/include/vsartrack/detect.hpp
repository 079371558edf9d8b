#pragma once

#include "vsartrack/core.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace vsartrack::detect {

enum class ThresholdMode { Otsu, MeanKSigma };

struct BlobParams {
    ThresholdMode threshold_mode = ThresholdMode::Otsu;
    double k = 3.0;                   // std-dev multiplier for MeanKSigma
    double min_area = 4.0;            // pixels
    std::optional<double> max_area;   // pixels; 5% of the frame when unset
    int connectivity = 8;             // 4 or 8

    void validate() const;
    double resolved_max_area(std::size_t rows, std::size_t cols) const;
};

/// One enhanced frame, intensities in [0,1], row-major.
struct FrameView {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::span<const float> data;

    float at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

/// Number of 256-bin histogram bins [0, k] that form the background class
/// under Otsu's criterion; pixels in higher bins are foreground. Returns
/// std::nullopt when no split separates anything (constant frame).
std::optional<int> otsu_split(FrameView frame);

/// Foreground mask after thresholding, row-major.
std::vector<unsigned char> binarize(FrameView frame, const BlobParams& params);

/// Connected-component labels (0 = background, 1..n), row-major; returns n.
std::size_t label_components(std::span<const unsigned char> mask, std::size_t rows, std::size_t cols, int connectivity,
                             std::vector<int>& labels);

/// Detections of one frame (1-based `frame_number`), sorted by descending
/// confidence, then by box y, then x.
std::vector<Detection> detect_blobs(FrameView frame, int frame_number, const BlobParams& params);

/// detect_blobs over every frame; frames are independent and may run on up to
/// `threads` workers.
DetectionsByFrame detect_stack(const FrameStack& stack, const BlobParams& params, unsigned threads = 1);

}  // namespace vsartrack::detect
