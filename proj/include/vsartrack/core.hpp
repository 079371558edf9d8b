#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <vector>

namespace vsartrack {

/// Axis-aligned box in top-left form, float pixels. This is the storage form
/// everywhere; the Kalman model works on the center form below.
struct BBox {
    double x = 0.0;
    double y = 0.0;
    double w = 1.0;
    double h = 1.0;

    double area() const { return w * h; }
    bool valid() const;

    friend bool operator==(const BBox&, const BBox&) = default;
};

struct CenterBox {
    double cx = 0.0;
    double cy = 0.0;
    double w = 1.0;
    double h = 1.0;

    friend bool operator==(const CenterBox&, const CenterBox&) = default;
};

CenterBox to_center(const BBox& box);
BBox from_center(const CenterBox& box);

/// Intersection over union; 0 for disjoint boxes, symmetric, 1 for a == b.
double iou(const BBox& a, const BBox& b);

struct Detection {
    int frame = 1;  // 1-based
    BBox box;
    double confidence = 1.0;

    friend bool operator==(const Detection&, const Detection&) = default;
};

/// Detections grouped per frame; index 0 holds frame 1.
using DetectionsByFrame = std::vector<std::vector<Detection>>;

struct TrajectorySample {
    int frame = 1;  // 1-based
    BBox box;

    friend bool operator==(const TrajectorySample&, const TrajectorySample&) = default;
};

struct Trajectory {
    int id = 1;
    std::vector<TrajectorySample> samples;  // strictly increasing frame

    /// Throws std::invalid_argument on a non-positive id, invalid box or
    /// non-increasing frames.
    void validate() const;

    friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

/// T frames of H x W grayscale intensities in [0,1], frame-major then
/// row-major within a frame.
class FrameStack {
public:
    FrameStack() = default;
    FrameStack(std::size_t frames, std::size_t rows, std::size_t cols);
    FrameStack(std::size_t frames, std::size_t rows, std::size_t cols, std::vector<float> data);

    std::size_t frames() const { return frames_; }
    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t frame_size() const { return rows_ * cols_; }

    std::span<const float> frame(std::size_t k) const;
    std::span<float> frame(std::size_t k);

    float at(std::size_t k, std::size_t r, std::size_t c) const {
        return data_[(k * rows_ + r) * cols_ + c];
    }
    float& at(std::size_t k, std::size_t r, std::size_t c) {
        return data_[(k * rows_ + r) * cols_ + c];
    }

    const std::vector<float>& data() const { return data_; }

    /// Throws std::invalid_argument when a sample is non-finite or outside [0,1].
    void validate() const;

    friend bool operator==(const FrameStack&, const FrameStack&) = default;

private:
    std::size_t frames_ = 0;
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<float> data_;
};

/// Pixels x frames matrix; column k is frame k vectorized row-major.
Eigen::MatrixXd casorati(const FrameStack& stack);

/// Inverse of casorati(). Samples are narrowed to float and range-checked.
FrameStack from_casorati(const Eigen::MatrixXd& matrix, std::size_t rows, std::size_t cols);

}  // namespace vsartrack
