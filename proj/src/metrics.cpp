#include "vsartrack/metrics.hpp"

#include "vsartrack/assignment.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>
#include <string>

namespace vsartrack::metrics {

namespace {

using FrameBoxes = std::map<int, std::map<int, BBox>>;  // frame -> id -> box

FrameBoxes index_by_frame(const std::vector<Trajectory>& trajs, const char* what) {
    FrameBoxes out;
    std::set<int> ids;
    for (const auto& t : trajs) {
        t.validate();
        if (!ids.insert(t.id).second) throw std::invalid_argument(std::string(what) + ": duplicate trajectory id " + std::to_string(t.id));
        for (const auto& s : t.samples) out[s.frame][t.id] = s.box;
    }
    return out;
}

}  // namespace

MotReport evaluate(const std::vector<Trajectory>& gt, const std::vector<Trajectory>& hyp, const EvalOptions& options) {
    const FrameBoxes gt_frames = index_by_frame(gt, "ground truth");
    const FrameBoxes hyp_frames = index_by_frame(hyp, "hypothesis");

    std::set<int> frames;
    for (const auto& [f, _] : gt_frames) frames.insert(f);
    for (const auto& [f, _] : hyp_frames) frames.insert(f);

    MotReport report;
    std::map<int, int> previous;     // gt id -> hyp id matched in the previous frame
    std::map<int, int> last_match;   // gt id -> most recent hyp id
    std::map<int, bool> was_matched; // gt id -> matched the last time it was present
    const std::map<int, BBox> empty;

    for (int f : frames) {
        const auto git = gt_frames.find(f);
        const auto hit = hyp_frames.find(f);
        const auto& gts = git == gt_frames.end() ? empty : git->second;
        const auto& hyps = hit == hyp_frames.end() ? empty : hit->second;

        FrameMatches fm;
        fm.frame = f;
        std::map<int, int> current;
        std::set<int> used_hyp;

        if (options.persistent) {
            for (const auto& [g, h] : previous) {
                const auto gb = gts.find(g);
                const auto hb = hyps.find(h);
                if (gb != gts.end() && hb != hyps.end() && iou(gb->second, hb->second) >= options.iou_thresh) {
                    current[g] = h;
                    used_hyp.insert(h);
                }
            }
        }

        std::vector<int> free_gt;
        std::vector<int> free_hyp;
        for (const auto& [g, _] : gts)
            if (!current.contains(g)) free_gt.push_back(g);
        for (const auto& [h, _] : hyps)
            if (!used_hyp.contains(h)) free_hyp.push_back(h);
        if (!free_gt.empty() && !free_hyp.empty()) {
            Eigen::MatrixXd scores(static_cast<Eigen::Index>(free_gt.size()), static_cast<Eigen::Index>(free_hyp.size()));
            for (std::size_t i = 0; i < free_gt.size(); ++i)
                for (std::size_t j = 0; j < free_hyp.size(); ++j)
                    scores(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                        iou(gts.at(free_gt[i]), hyps.at(free_hyp[j]));
            for (const auto& [r, c] : max_score_assignment(scores, options.iou_thresh, Gate::Inclusive)) {
                current[free_gt[static_cast<std::size_t>(r)]] = free_hyp[static_cast<std::size_t>(c)];
                used_hyp.insert(free_hyp[static_cast<std::size_t>(c)]);
            }
        }

        for (const auto& [g, _] : gts) {
            report.gt_boxes += 1;
            const auto m = current.find(g);
            if (m == current.end()) {
                report.fn += 1;
                fm.missed_gt.push_back(g);
                if (was_matched[g]) report.fm += 1;
                was_matched[g] = false;
                continue;
            }
            fm.pairs.emplace_back(g, m->second);
            const auto lm = last_match.find(g);
            if (lm != last_match.end() && lm->second != m->second) {
                report.idsw += 1;
                fm.switched_gt.push_back(g);
            }
            last_match[g] = m->second;
            was_matched[g] = true;
        }
        for (const auto& [h, _] : hyps)
            if (!used_hyp.contains(h)) {
                report.fp += 1;
                fm.false_hyp.push_back(h);
            }

        previous = std::move(current);
        report.per_frame.push_back(std::move(fm));
    }

    if (report.gt_boxes > 0)
        report.mota = 1.0 - static_cast<double>(report.fn + report.fp + report.idsw) / static_cast<double>(report.gt_boxes);
    return report;
}

}  // namespace vsartrack::metrics
