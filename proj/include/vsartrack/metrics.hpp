#pragma once

// CLEAR-MOT counts (MOTA, FP, FN, IDSW, FM) between ground truth and
// hypothesis trajectories.
//
// Per frame, pairings from the previous frame are kept while their IoU stays
// >= iou_thresh; the remaining boxes are matched by max-IoU assignment with
// the same gate. A ground-truth object matched to a different hypothesis id
// than its most recent match counts one IDSW; a ground-truth object that is
// present but unmatched right after being matched counts one FM.

#include "vsartrack/core.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace vsartrack::metrics {

struct EvalOptions {
    double iou_thresh = 0.5;
    bool persistent = true;  // false: re-match every frame from scratch
};

struct FrameMatches {
    int frame = 1;
    std::vector<std::pair<int, int>> pairs;  // (gt id, hyp id)
    std::vector<int> missed_gt;              // gt ids
    std::vector<int> false_hyp;              // hyp ids
    std::vector<int> switched_gt;            // gt ids with an identity switch
};

struct MotReport {
    std::optional<double> mota;  // undefined when gt_boxes == 0
    long fp = 0;
    long fn = 0;
    long idsw = 0;
    long fm = 0;
    long gt_boxes = 0;
    std::vector<FrameMatches> per_frame;
};

/// Throws std::invalid_argument on invalid trajectories or duplicate ids.
MotReport evaluate(const std::vector<Trajectory>& gt, const std::vector<Trajectory>& hyp, const EvalOptions& options = {});

}  // namespace vsartrack::metrics
