#include "vsartrack/detect.hpp"

#include "vsartrack/parallel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace vsartrack::detect {

void BlobParams::validate() const {
    if (!(k > 0.0)) throw std::invalid_argument("blob: k must be > 0");
    if (!(min_area >= 0.0)) throw std::invalid_argument("blob: min_area must be >= 0");
    if (max_area && !(*max_area >= min_area)) throw std::invalid_argument("blob: min_area must not exceed max_area");
    if (connectivity != 4 && connectivity != 8) throw std::invalid_argument("blob: connectivity must be 4 or 8");
}

double BlobParams::resolved_max_area(std::size_t rows, std::size_t cols) const {
    return max_area.value_or(0.05 * static_cast<double>(rows * cols));
}

namespace {

constexpr int kBins = 256;

int bin_of(float v) { return std::clamp(static_cast<int>(v * kBins), 0, kBins - 1); }

}  // namespace

std::optional<int> otsu_split(FrameView frame) {
    std::array<double, kBins> hist{};
    for (float v : frame.data) hist[static_cast<std::size_t>(bin_of(v))] += 1.0;
    const auto total = static_cast<double>(frame.data.size());
    double sum_all = 0.0;
    for (int b = 0; b < kBins; ++b) sum_all += b * hist[static_cast<std::size_t>(b)];

    double w0 = 0.0;
    double sum0 = 0.0;
    double best = 0.0;
    std::optional<int> split;
    for (int b = 0; b < kBins - 1; ++b) {
        w0 += hist[static_cast<std::size_t>(b)];
        sum0 += b * hist[static_cast<std::size_t>(b)];
        const double w1 = total - w0;
        if (w0 == 0.0 || w1 == 0.0) continue;
        const double m0 = sum0 / w0;
        const double m1 = (sum_all - sum0) / w1;
        const double between = w0 * w1 * (m0 - m1) * (m0 - m1);
        if (between > best) {
            best = between;
            split = b;
        }
    }
    return split;
}

std::vector<unsigned char> binarize(FrameView frame, const BlobParams& params) {
    std::vector<unsigned char> mask(frame.data.size(), 0);
    if (params.threshold_mode == ThresholdMode::Otsu) {
        const auto split = otsu_split(frame);
        if (!split) return mask;
        for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = bin_of(frame.data[i]) > *split ? 1 : 0;
        return mask;
    }
    double mean = 0.0;
    for (float v : frame.data) mean += v;
    mean /= static_cast<double>(frame.data.size());
    double var = 0.0;
    for (float v : frame.data) var += (v - mean) * (v - mean);
    const double sd = std::sqrt(var / static_cast<double>(frame.data.size()));
    const double level = mean + params.k * sd;
    for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = frame.data[i] > level ? 1 : 0;
    return mask;
}

namespace {

int find_root(std::vector<int>& parent, int i) {
    while (parent[static_cast<std::size_t>(i)] != i) {
        parent[static_cast<std::size_t>(i)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(i)])];
        i = parent[static_cast<std::size_t>(i)];
    }
    return i;
}

}  // namespace

std::size_t label_components(std::span<const unsigned char> mask, std::size_t rows, std::size_t cols, int connectivity,
                             std::vector<int>& labels) {
    labels.assign(rows * cols, 0);
    std::vector<int> parent{0};

    // First pass: provisional labels from already-visited neighbours.
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            if (!mask[r * cols + c]) continue;
            std::array<int, 4> nb{};
            std::size_t count = 0;
            if (c > 0) nb[count++] = labels[r * cols + c - 1];
            if (r > 0) {
                nb[count++] = labels[(r - 1) * cols + c];
                if (connectivity == 8) {
                    if (c > 0) nb[count++] = labels[(r - 1) * cols + c - 1];
                    if (c + 1 < cols) nb[count++] = labels[(r - 1) * cols + c + 1];
                }
            }
            int lab = 0;
            for (std::size_t i = 0; i < count; ++i)
                if (nb[i] > 0) lab = lab == 0 ? nb[i] : std::min(lab, nb[i]);
            if (lab == 0) {
                lab = static_cast<int>(parent.size());
                parent.push_back(lab);
            } else {
                for (std::size_t i = 0; i < count; ++i) {
                    if (nb[i] <= 0) continue;
                    const int a = find_root(parent, nb[i]);
                    const int b = find_root(parent, lab);
                    parent[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
                }
            }
            labels[r * cols + c] = lab;
        }
    }

    // Second pass: compact root labels to 1..n in raster order of first appearance.
    std::vector<int> compact(parent.size(), 0);
    int next = 0;
    for (auto& lab : labels) {
        if (lab == 0) continue;
        const int root = find_root(parent, lab);
        if (compact[static_cast<std::size_t>(root)] == 0) compact[static_cast<std::size_t>(root)] = ++next;
        lab = compact[static_cast<std::size_t>(root)];
    }
    return static_cast<std::size_t>(next);
}

std::vector<Detection> detect_blobs(FrameView frame, int frame_number, const BlobParams& params) {
    params.validate();
    std::vector<Detection> out;
    if (frame.data.empty()) return out;
    const float peak = *std::max_element(frame.data.begin(), frame.data.end());
    if (!(peak > 0.0F)) return out;

    const auto mask = binarize(frame, params);
    std::vector<int> labels;
    const std::size_t n = label_components(mask, frame.rows, frame.cols, params.connectivity, labels);

    struct Stats {
        std::size_t x0 = SIZE_MAX, y0 = SIZE_MAX, x1 = 0, y1 = 0, count = 0;
        double sum = 0.0;
    };
    std::vector<Stats> stats(n + 1);
    for (std::size_t r = 0; r < frame.rows; ++r) {
        for (std::size_t c = 0; c < frame.cols; ++c) {
            const int lab = labels[r * frame.cols + c];
            if (lab == 0) continue;
            auto& s = stats[static_cast<std::size_t>(lab)];
            s.x0 = std::min(s.x0, c);
            s.y0 = std::min(s.y0, r);
            s.x1 = std::max(s.x1, c);
            s.y1 = std::max(s.y1, r);
            s.count += 1;
            s.sum += frame.at(r, c);
        }
    }

    const double max_area = params.resolved_max_area(frame.rows, frame.cols);
    for (std::size_t i = 1; i <= n; ++i) {
        const auto& s = stats[i];
        const auto area = static_cast<double>(s.count);
        if (area < params.min_area || area > max_area) continue;
        Detection d;
        d.frame = frame_number;
        d.box = {static_cast<double>(s.x0), static_cast<double>(s.y0), static_cast<double>(s.x1 - s.x0 + 1),
                 static_cast<double>(s.y1 - s.y0 + 1)};
        d.confidence = std::clamp(s.sum / area / static_cast<double>(peak), 0.0, 1.0);
        out.push_back(d);
    }
    std::sort(out.begin(), out.end(), [](const Detection& a, const Detection& b) {
        if (a.confidence != b.confidence) return a.confidence > b.confidence;
        if (a.box.y != b.box.y) return a.box.y < b.box.y;
        return a.box.x < b.box.x;
    });
    return out;
}

DetectionsByFrame detect_stack(const FrameStack& stack, const BlobParams& params, unsigned threads) {
    params.validate();
    DetectionsByFrame out(stack.frames());
    parallel_for(stack.frames(), threads, [&](std::size_t k) {
        out[k] = detect_blobs({stack.rows(), stack.cols(), stack.frame(k)}, static_cast<int>(k + 1), params);
    });
    return out;
}

}  // namespace vsartrack::detect
