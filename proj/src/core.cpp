#include "vsartrack/core.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace vsartrack {

bool BBox::valid() const {
    return std::isfinite(x) && std::isfinite(y) && std::isfinite(w) && std::isfinite(h) && w > 0.0 &&
           h > 0.0;
}

CenterBox to_center(const BBox& box) { return {box.x + box.w / 2.0, box.y + box.h / 2.0, box.w, box.h}; }

BBox from_center(const CenterBox& box) { return {box.cx - box.w / 2.0, box.cy - box.h / 2.0, box.w, box.h}; }

double iou(const BBox& a, const BBox& b) {
    const double ix = std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x);
    const double iy = std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y);
    if (ix <= 0.0 || iy <= 0.0) return 0.0;
    const double inter = ix * iy;
    // Areas from the same corner arithmetic as the overlap, so iou(a, a) is exactly 1.
    const double area_a = ((a.x + a.w) - a.x) * ((a.y + a.h) - a.y);
    const double area_b = ((b.x + b.w) - b.x) * ((b.y + b.h) - b.y);
    const double uni = area_a + area_b - inter;
    return std::clamp(inter / uni, 0.0, 1.0);
}

void Trajectory::validate() const {
    if (id <= 0) throw std::invalid_argument("trajectory id must be positive, got " + std::to_string(id));
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (!samples[i].box.valid())
            throw std::invalid_argument("trajectory " + std::to_string(id) + " has an invalid box");
        if (samples[i].frame < 1) throw std::invalid_argument("trajectory frames are 1-based");
        if (i > 0 && samples[i].frame <= samples[i - 1].frame)
            throw std::invalid_argument("trajectory " + std::to_string(id) + " frames not strictly increasing");
    }
}

FrameStack::FrameStack(std::size_t frames, std::size_t rows, std::size_t cols)
    : FrameStack(frames, rows, cols, std::vector<float>(frames * rows * cols, 0.0F)) {}

FrameStack::FrameStack(std::size_t frames, std::size_t rows, std::size_t cols, std::vector<float> data)
    : frames_(frames), rows_(rows), cols_(cols), data_(std::move(data)) {
    if (frames_ == 0 || rows_ == 0 || cols_ == 0) throw std::invalid_argument("frame stack dimensions must be >= 1");
    if (data_.size() != frames_ * rows_ * cols_)
        throw std::invalid_argument("frame stack data length " + std::to_string(data_.size()) + " != t*h*w");
}

std::span<const float> FrameStack::frame(std::size_t k) const {
    return std::span<const float>(data_).subspan(k * frame_size(), frame_size());
}

std::span<float> FrameStack::frame(std::size_t k) { return std::span<float>(data_).subspan(k * frame_size(), frame_size()); }

void FrameStack::validate() const {
    for (std::size_t i = 0; i < data_.size(); ++i) {
        const float v = data_[i];
        if (!std::isfinite(v) || v < 0.0F || v > 1.0F)
            throw std::invalid_argument("frame stack sample " + std::to_string(i) + " outside [0,1]");
    }
}

Eigen::MatrixXd casorati(const FrameStack& stack) {
    const auto pixels = static_cast<Eigen::Index>(stack.frame_size());
    const auto frames = static_cast<Eigen::Index>(stack.frames());
    Eigen::MatrixXd m(pixels, frames);
    for (Eigen::Index k = 0; k < frames; ++k) {
        const auto f = stack.frame(static_cast<std::size_t>(k));
        for (Eigen::Index p = 0; p < pixels; ++p) m(p, k) = f[static_cast<std::size_t>(p)];
    }
    return m;
}

FrameStack from_casorati(const Eigen::MatrixXd& matrix, std::size_t rows, std::size_t cols) {
    if (static_cast<std::size_t>(matrix.rows()) != rows * cols)
        throw std::invalid_argument("casorati row count does not match frame size");
    FrameStack stack(static_cast<std::size_t>(matrix.cols()), rows, cols);
    for (Eigen::Index k = 0; k < matrix.cols(); ++k) {
        auto f = stack.frame(static_cast<std::size_t>(k));
        for (Eigen::Index p = 0; p < matrix.rows(); ++p) f[static_cast<std::size_t>(p)] = static_cast<float>(matrix(p, k));
    }
    stack.validate();
    return stack;
}

}  // namespace vsartrack
