#include "vsartrack/track.hpp"

#include "vsartrack/assignment.hpp"
#include "vsartrack/error.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace vsartrack::track {

KalmanModel KalmanModel::constant_velocity() {
    KalmanModel m;
    m.A = Mat8::Identity();
    for (int i = 0; i < 4; ++i) m.A(i, i + 4) = 1.0;
    m.H = Mat48::Zero();
    m.H.leftCols<4>() = Mat4::Identity();
    return m;
}

Mat8 KalmanModel::process_noise(const Vec8& x) const {
    if (fixed_Q) return *fixed_Q;
    const double h = std::max(x(3), 1.0);
    Vec8 sd;
    sd << Vec4::Constant(std_position * h), Vec4::Constant(std_velocity * h);
    return sd.array().square().matrix().asDiagonal();
}

Mat4 KalmanModel::measurement_noise(const Vec8& x) const {
    if (fixed_R) return *fixed_R;
    const double h = std::max(x(3), 1.0);
    return Vec4::Constant(std_measurement * h).array().square().matrix().asDiagonal();
}

Mat8 KalmanModel::initial_covariance(const Vec4& z) const {
    const double h = std::max(z(3), 1.0);
    Vec8 sd;
    sd << Vec4::Constant(2.0 * std_position * h), Vec4::Constant(10.0 * std_velocity * h);
    return sd.array().square().matrix().asDiagonal();
}

Vec4 measurement_of(const BBox& box) {
    const CenterBox c = to_center(box);
    return {c.cx, c.cy, c.w, c.h};
}

BBox box_of_state(const Vec8& x) { return from_center({x(0), x(1), std::max(x(2), 1.0), std::max(x(3), 1.0)}); }

BBox Track::box() const { return box_of_state(x); }

Gaussian kf_predict(const Track& track, const KalmanModel& model) {
    Gaussian prior;
    prior.mean = model.A * track.x;
    prior.cov = model.A * track.P * model.A.transpose() + model.process_noise(track.x);
    prior.cov = 0.5 * (prior.cov + prior.cov.transpose()).eval();
    return prior;
}

Gaussian kf_update(const Gaussian& prior, const Vec4& z, double c, const KalmanModel& model, double c_max) {
    if (!(c >= 0.0 && c <= 1.0)) throw std::invalid_argument("kf_update: confidence outside [0,1]");
    const double weight = std::clamp(c, 0.0, c_max);

    const Mat4 s = model.H * prior.cov * model.H.transpose() + (1.0 - weight) * model.measurement_noise(prior.mean);
    const Eigen::LLT<Mat4> llt(s);
    if (llt.info() != Eigen::Success) throw NumericalError("kf_update: innovation covariance is not positive definite");

    // K = P- H^T S^-1, computed as (S^-1 H P-)^T since S and P- are symmetric.
    const Eigen::Matrix<double, 8, 4> gain = llt.solve(model.H * prior.cov).transpose();
    const Vec4 innovation = z - model.H * prior.mean;

    Gaussian post;
    post.mean = prior.mean + gain * innovation;
    post.cov = (Mat8::Identity() - gain * model.H) * prior.cov;
    post.cov = 0.5 * (post.cov + post.cov.transpose()).eval();
    post.mean(2) = std::max(post.mean(2), 1.0);
    post.mean(3) = std::max(post.mean(3), 1.0);
    return post;
}

void AssocConfig::validate() const {
    if (!(tau_low >= 0.0 && tau_low < tau_high && tau_high <= 1.0))
        throw std::invalid_argument("assoc: need 0 <= tau_low < tau_high <= 1");
    if (!(iou_min >= 0.0 && iou_min < 1.0)) throw std::invalid_argument("assoc: iou_min must lie in [0,1)");
    if (n_init < 1) throw std::invalid_argument("assoc: n_init must be >= 1");
    if (max_age < 1) throw std::invalid_argument("assoc: max_age must be >= 1");
    if (!(c_max >= 0.0 && c_max < 1.0)) throw std::invalid_argument("assoc: c_max must lie in [0,1)");
}

Tracker::Tracker(AssocConfig cfg, KalmanModel model) : cfg_(cfg), model_(std::move(model)) { cfg_.validate(); }

void Tracker::start_track(int frame, const Detection& det) {
    Track t;
    t.serial = next_serial_++;
    const Vec4 z = measurement_of(det.box);
    t.x << z, Vec4::Zero();
    t.P = model_.initial_covariance(z);
    t.hits = 1;
    t.history.push_back({frame, det.box, det.confidence});
    if (cfg_.n_init <= 1) {
        t.status = TrackStatus::Active;
        t.id = next_id_++;
        t.first_active_record = 0;
    }
    tracks_.push_back(std::move(t));
}

void Tracker::apply_match(Track& t, int frame, const Detection& det) {
    const double c = cfg_.adaptive_noise ? det.confidence : 0.0;
    const Gaussian post = kf_update({t.x, t.P}, measurement_of(det.box), c, model_, cfg_.c_max);
    t.x = post.mean;
    t.P = post.cov;
    t.age_since_update = 0;
    t.hits += 1;
    t.history.push_back({frame, t.box(), det.confidence});
    if (t.status == TrackStatus::Lost) t.status = TrackStatus::Active;
    if (t.status == TrackStatus::Tentative && t.hits >= cfg_.n_init) {
        t.status = TrackStatus::Active;
        t.id = next_id_++;
        t.first_active_record = t.history.size() - 1;
    }
}

namespace {

// Max-IoU assignment between the listed tracks and detections.
std::vector<std::pair<std::size_t, std::size_t>> match(const std::vector<Track>& tracks,
                                                       const std::vector<std::size_t>& track_idx,
                                                       std::span<const Detection> dets,
                                                       const std::vector<std::size_t>& det_idx, double iou_min) {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    if (track_idx.empty() || det_idx.empty()) return out;
    Eigen::MatrixXd scores(static_cast<Eigen::Index>(track_idx.size()), static_cast<Eigen::Index>(det_idx.size()));
    for (std::size_t i = 0; i < track_idx.size(); ++i) {
        const BBox predicted = tracks[track_idx[i]].box();
        for (std::size_t j = 0; j < det_idx.size(); ++j)
            scores(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = iou(predicted, dets[det_idx[j]].box);
    }
    for (const auto& [r, c] : max_score_assignment(scores, iou_min, Gate::Exclusive))
        out.emplace_back(track_idx[static_cast<std::size_t>(r)], det_idx[static_cast<std::size_t>(c)]);
    return out;
}

template <typename T>
void erase_values(std::vector<T>& from, const std::vector<T>& values) {
    std::erase_if(from, [&](const T& v) { return std::find(values.begin(), values.end(), v) != values.end(); });
}

}  // namespace

FrameAssociation Tracker::step(int frame, std::span<const Detection> dets) {
    if (frame <= last_frame_)
        throw std::invalid_argument("tracker: frames must increase (got " + std::to_string(frame) + " after " +
                                    std::to_string(last_frame_) + ")");
    last_frame_ = frame;
    FrameAssociation result;

    std::vector<std::size_t> high;
    std::vector<std::size_t> low;
    for (std::size_t j = 0; j < dets.size(); ++j) {
        const Detection& d = dets[j];
        if (!(d.confidence >= 0.0 && d.confidence <= 1.0) || !d.box.valid())
            throw std::invalid_argument("tracker: invalid detection at frame " + std::to_string(frame));
        if (d.confidence >= cfg_.tau_high)
            high.push_back(j);
        else if (d.confidence >= cfg_.tau_low)
            low.push_back(j);
        else
            result.dropped_dets.push_back(j);
    }

    std::vector<std::size_t> live;
    for (std::size_t i = 0; i < tracks_.size(); ++i) {
        Track& t = tracks_[i];
        if (t.status == TrackStatus::Removed) continue;
        const Gaussian prior = kf_predict(t, model_);
        t.x = prior.mean;
        t.P = prior.cov;
        t.age_since_update += 1;
        live.push_back(i);
    }

    auto with_status = [&](std::initializer_list<TrackStatus> wanted) {
        std::vector<std::size_t> idx;
        for (std::size_t i : live)
            if (std::find(wanted.begin(), wanted.end(), tracks_[i].status) != wanted.end()) idx.push_back(i);
        return idx;
    };

    // Phase 1: confirmed tracks, then tentative ones, against high-confidence detections.
    std::vector<std::size_t> first = cfg_.lost_in_first_phase ? with_status({TrackStatus::Active, TrackStatus::Lost})
                                                              : with_status({TrackStatus::Active});
    std::vector<std::pair<std::size_t, std::size_t>> matched = match(tracks_, first, dets, high, cfg_.iou_min);
    std::vector<std::size_t> used_dets;
    std::vector<std::size_t> used_tracks;
    for (const auto& [t, d] : matched) {
        used_tracks.push_back(t);
        used_dets.push_back(d);
    }
    std::vector<std::size_t> remaining_high = high;
    erase_values(remaining_high, used_dets);

    const auto tentative = with_status({TrackStatus::Tentative});
    for (const auto& [t, d] : match(tracks_, tentative, dets, remaining_high, cfg_.iou_min)) {
        matched.emplace_back(t, d);
        used_tracks.push_back(t);
        used_dets.push_back(d);
    }
    erase_values(remaining_high, used_dets);

    // Phase 2: recall low-confidence detections for whatever is still unmatched.
    std::vector<std::pair<std::size_t, std::size_t>> recalled;
    if (cfg_.recall) {
        std::vector<std::size_t> leftover = live;
        erase_values(leftover, used_tracks);
        recalled = match(tracks_, leftover, dets, low, cfg_.iou_min);
        for (const auto& [t, d] : recalled) {
            used_tracks.push_back(t);
            used_dets.push_back(d);
        }
    }

    for (const auto& [t, d] : matched) {
        apply_match(tracks_[t], frame, dets[d]);
        result.matches.emplace_back(tracks_[t].serial, d);
    }
    for (const auto& [t, d] : recalled) {
        apply_match(tracks_[t], frame, dets[d]);
        result.recalled_matches.emplace_back(tracks_[t].serial, d);
    }

    for (std::size_t i : live) {
        if (std::find(used_tracks.begin(), used_tracks.end(), i) != used_tracks.end()) continue;
        Track& t = tracks_[i];
        t.hits = 0;
        if (t.status == TrackStatus::Tentative) {
            t.status = TrackStatus::Removed;
            result.removed_tracks.push_back(t.serial);
        } else if (t.status == TrackStatus::Active) {
            t.status = TrackStatus::Lost;
            result.lost_tracks.push_back(t.serial);
        }
        if (t.status == TrackStatus::Lost && t.age_since_update > cfg_.max_age) {
            t.status = TrackStatus::Removed;
            result.removed_tracks.push_back(t.serial);
        }
    }

    for (std::size_t d : remaining_high) {
        start_track(frame, dets[d]);
        result.new_tentatives.push_back(d);
    }
    for (std::size_t d : low)
        if (std::find(used_dets.begin(), used_dets.end(), d) == used_dets.end()) result.dropped_dets.push_back(d);
    std::sort(result.dropped_dets.begin(), result.dropped_dets.end());
    return result;
}

std::vector<Trajectory> Tracker::trajectories() const {
    std::vector<Trajectory> out;
    for (const Track& t : tracks_) {
        if (t.id == 0) continue;
        Trajectory traj;
        traj.id = t.id;
        for (std::size_t i = t.first_active_record; i < t.history.size(); ++i)
            traj.samples.push_back({t.history[i].frame, t.history[i].box});
        out.push_back(std::move(traj));
    }
    std::sort(out.begin(), out.end(), [](const Trajectory& a, const Trajectory& b) { return a.id < b.id; });
    return out;
}

std::vector<Trajectory> track_video(const DetectionsByFrame& dets_by_frame, const AssocConfig& cfg,
                                    const KalmanModel& model) {
    Tracker tracker(cfg, model);
    for (std::size_t k = 0; k < dets_by_frame.size(); ++k) tracker.step(static_cast<int>(k + 1), dets_by_frame[k]);
    return tracker.trajectories();
}

}  // namespace vsartrack::track
