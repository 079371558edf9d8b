#pragma once

// Confidence-adaptive Kalman tracking with two-phase association.
//
// State is (cx, cy, w, h, vcx, vcy, vw, vh) under a constant-velocity model.
// The update scales the measurement noise by (1 - c) where c is the detection
// confidence, so confident detections pull the state harder:
//
//     S = H P- H^T + (1 - c) R,   K = P- H^T S^-1,   x = x- + K (z - H x-)
//
// Association per frame:
//   1. predict every live track;
//   2. phase 1: active (and, by default, lost) tracks vs detections with
//      confidence >= tau_high, max-IoU assignment gated at IoU > iou_min;
//      tentative tracks then take their pick of the remaining high detections;
//   3. phase 2 (recall): tracks still unmatched vs detections in
//      [tau_low, tau_high), same gate;
//   4. unmatched high detections seed tentative tracks, promoted to active
//      after n_init consecutive matched frames;
//   5. matched tracks are updated with their detection's confidence;
//      unmatched active tracks become lost, tentative ones are removed, and
//      lost tracks are removed after max_age frames without an update.

#include "vsartrack/core.hpp"

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace vsartrack::track {

using Vec4 = Eigen::Matrix<double, 4, 1>;
using Vec8 = Eigen::Matrix<double, 8, 1>;
using Mat4 = Eigen::Matrix<double, 4, 4>;
using Mat8 = Eigen::Matrix<double, 8, 8>;
using Mat48 = Eigen::Matrix<double, 4, 8>;

struct KalmanModel {
    Mat8 A = Mat8::Identity();
    Mat48 H = Mat48::Zero();
    // Noise standard deviations as fractions of the box height (SORT style).
    double std_position = 1.0 / 20.0;
    double std_velocity = 1.0 / 160.0;
    double std_measurement = 1.0 / 20.0;
    // Constant matrices replacing the height-scaled ones when set.
    std::optional<Mat8> fixed_Q;
    std::optional<Mat4> fixed_R;

    static KalmanModel constant_velocity();

    Mat8 process_noise(const Vec8& x) const;
    Mat4 measurement_noise(const Vec8& x) const;
    Mat8 initial_covariance(const Vec4& z) const;
};

struct Gaussian {
    Vec8 mean = Vec8::Zero();
    Mat8 cov = Mat8::Identity();
};

enum class TrackStatus { Tentative, Active, Lost, Removed };

struct TrackRecord {
    int frame = 1;
    BBox box;
    double confidence = 1.0;
};

struct Track {
    int serial = 0;  // creation order, unique
    int id = 0;      // 0 until promoted; then 1, 2, ... in promotion order
    Vec8 x = Vec8::Zero();
    Mat8 P = Mat8::Identity();
    TrackStatus status = TrackStatus::Tentative;
    int age_since_update = 0;
    int hits = 0;  // consecutive matched frames
    std::vector<TrackRecord> history;
    std::size_t first_active_record = 0;  // history index of the promotion frame

    BBox box() const;
};

Vec4 measurement_of(const BBox& box);
BBox box_of_state(const Vec8& x);

Gaussian kf_predict(const Track& track, const KalmanModel& model);

/// Confidence-weighted update; c is clamped to [0, c_max] first. Returns the
/// posterior with P = (I - K H) P- symmetrized and w, h clamped to >= 1.
/// Throws NumericalError if the innovation covariance is not positive definite.
Gaussian kf_update(const Gaussian& prior, const Vec4& z, double c, const KalmanModel& model, double c_max);

struct AssocConfig {
    double tau_high = 0.6;
    double tau_low = 0.1;
    double iou_min = 0.5;
    int n_init = 2;
    int max_age = 30;
    double c_max = 0.99;
    bool recall = true;               // phase 2
    bool adaptive_noise = true;       // use confidence in the update; c = 0 otherwise
    bool lost_in_first_phase = true;  // false restricts lost tracks to phase 2

    void validate() const;
};

struct FrameAssociation {
    std::vector<std::pair<int, std::size_t>> matches;           // (track serial, detection index)
    std::vector<std::pair<int, std::size_t>> recalled_matches;  // phase 2
    std::vector<std::size_t> new_tentatives;                    // detection indices
    std::vector<int> lost_tracks;                               // serials turned lost this frame
    std::vector<int> removed_tracks;                            // serials removed this frame
    std::vector<std::size_t> dropped_dets;                      // detection indices
};

class Tracker {
public:
    explicit Tracker(AssocConfig cfg, KalmanModel model = KalmanModel::constant_velocity());

    /// Associates one frame (1-based, increasing). Detection indices in the
    /// result refer to `dets`.
    FrameAssociation step(int frame, std::span<const Detection> dets);

    const std::vector<Track>& tracks() const { return tracks_; }

    /// One trajectory per track that reached active status, ordered by id;
    /// samples are posterior boxes from the promotion frame onward.
    std::vector<Trajectory> trajectories() const;

private:
    void start_track(int frame, const Detection& det);
    void apply_match(Track& t, int frame, const Detection& det);

    AssocConfig cfg_;
    KalmanModel model_;
    std::vector<Track> tracks_;
    int next_serial_ = 1;
    int next_id_ = 1;
    int last_frame_ = 0;
};

/// Runs a Tracker over frames 1..dets_by_frame.size().
std::vector<Trajectory> track_video(const DetectionsByFrame& dets_by_frame, const AssocConfig& cfg,
                                    const KalmanModel& model = KalmanModel::constant_velocity());

}  // namespace vsartrack::track
