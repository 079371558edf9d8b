#include "vsartrack/asff.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace vsartrack::asff {

FeatureMap::FeatureMap(std::size_t channels_, std::size_t rows_, std::size_t cols_, double fill)
    : channels(channels_), rows(rows_), cols(cols_), data(channels_ * rows_ * cols_, fill) {}

FeatureMap::FeatureMap(std::size_t channels_, std::size_t rows_, std::size_t cols_, std::vector<double> values)
    : channels(channels_), rows(rows_), cols(cols_), data(std::move(values)) {
    validate();
}

void FeatureMap::validate() const {
    if (channels == 0 || rows == 0 || cols == 0) throw std::invalid_argument("feature map dimensions must be >= 1");
    if (data.size() != channels * rows * cols) throw std::invalid_argument("feature map data length mismatch");
    if (!std::all_of(data.begin(), data.end(), [](double v) { return std::isfinite(v); }))
        throw std::invalid_argument("feature map contains non-finite samples");
}

namespace {

void check_level(int level) {
    if (level < 1 || level > 3) throw std::invalid_argument("pyramid level must be 1, 2 or 3, got " + std::to_string(level));
}

FeatureMap upsample2(const FeatureMap& m) {
    FeatureMap out(m.channels, m.rows * 2, m.cols * 2);
    for (std::size_t ch = 0; ch < m.channels; ++ch)
        for (std::size_t r = 0; r < out.rows; ++r)
            for (std::size_t c = 0; c < out.cols; ++c) out.at(ch, r, c) = m.at(ch, r / 2, c / 2);
    return out;
}

FeatureMap downsample2(const FeatureMap& m) {
    if (m.rows % 2 != 0 || m.cols % 2 != 0)
        throw std::invalid_argument("cannot mean-pool a " + std::to_string(m.rows) + "x" + std::to_string(m.cols) +
                                    " map by 2");
    FeatureMap out(m.channels, m.rows / 2, m.cols / 2);
    for (std::size_t ch = 0; ch < m.channels; ++ch)
        for (std::size_t r = 0; r < out.rows; ++r)
            for (std::size_t c = 0; c < out.cols; ++c)
                out.at(ch, r, c) = 0.25 * (m.at(ch, 2 * r, 2 * c) + m.at(ch, 2 * r, 2 * c + 1) + m.at(ch, 2 * r + 1, 2 * c) +
                                           m.at(ch, 2 * r + 1, 2 * c + 1));
    return out;
}

}  // namespace

FeatureMap resample_level(const FeatureMap& map, int from_level, int to_level) {
    check_level(from_level);
    check_level(to_level);
    map.validate();
    FeatureMap out = map;
    for (int l = from_level; l < to_level; ++l) out = downsample2(out);
    for (int l = from_level; l > to_level; --l) out = upsample2(out);
    return out;
}

FusionWeights softmax_weights(const std::array<Eigen::MatrixXd, 3>& logits) {
    const Eigen::Index rows = logits[0].rows();
    const Eigen::Index cols = logits[0].cols();
    for (const auto& l : logits)
        if (l.rows() != rows || l.cols() != cols) throw std::invalid_argument("logit planes differ in shape");

    const Eigen::ArrayXXd peak = logits[0].array().max(logits[1].array()).max(logits[2].array());
    std::array<Eigen::ArrayXXd, 3> e;
    for (std::size_t i = 0; i < 3; ++i) e[i] = (logits[i].array() - peak).exp();
    const Eigen::ArrayXXd total = e[0] + e[1] + e[2];

    FusionWeights w;
    for (std::size_t i = 0; i < 3; ++i) w.planes[i] = (e[i] / total).matrix();
    return w;
}

FeatureMap fuse(const std::array<FeatureMap, 3>& maps, const std::array<Eigen::MatrixXd, 3>& logits, int target_level) {
    check_level(target_level);
    std::array<FeatureMap, 3> resampled;
    for (std::size_t i = 0; i < 3; ++i) resampled[i] = resample_level(maps[i], static_cast<int>(i) + 1, target_level);

    const FeatureMap& ref = resampled[0];
    for (const auto& m : resampled)
        if (m.channels != ref.channels || m.rows != ref.rows || m.cols != ref.cols)
            throw std::invalid_argument("resampled feature maps differ in shape");
    for (const auto& l : logits)
        if (static_cast<std::size_t>(l.rows()) != ref.rows || static_cast<std::size_t>(l.cols()) != ref.cols)
            throw std::invalid_argument("logit plane shape does not match the target level");

    const FusionWeights w = softmax_weights(logits);
    FeatureMap out(ref.channels, ref.rows, ref.cols);
    for (std::size_t ch = 0; ch < ref.channels; ++ch)
        for (std::size_t r = 0; r < ref.rows; ++r)
            for (std::size_t c = 0; c < ref.cols; ++c) {
                const auto ri = static_cast<Eigen::Index>(r);
                const auto ci = static_cast<Eigen::Index>(c);
                out.at(ch, r, c) = w.planes[0](ri, ci) * resampled[0].at(ch, r, c) +
                                   w.planes[1](ri, ci) * resampled[1].at(ch, r, c) +
                                   w.planes[2](ri, ci) * resampled[2].at(ch, r, c);
            }
    return out;
}

}  // namespace vsartrack::asff
