#pragma once

#include "vsartrack/core.hpp"
#include "vsartrack/detect.hpp"
#include "vsartrack/gsi.hpp"
#include "vsartrack/metrics.hpp"
#include "vsartrack/mtsd.hpp"
#include "vsartrack/simulate.hpp"
#include "vsartrack/track.hpp"

#include "json.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace vsartrack::pipeline {

struct Switches {
    bool mtsd_on = true;
    bool recall_on = true;
    bool gsi_on = true;
};

struct Paths {
    std::string frames;
    std::string detections_in;
    std::string detections_out;
    std::string tracks_out;
    std::string gt;
    std::string report_out;
    std::string render_out;
};

struct PipelineConfig {
    mtsd::DecomposeParams decompose;
    detect::BlobParams blob;
    track::AssocConfig assoc;
    track::KalmanModel kalman = track::KalmanModel::constant_velocity();
    gsi::GsiParams gsi;
    metrics::EvalOptions eval;
    sim::SceneConfig scene;
    Switches switches;
    Paths paths;
    unsigned threads = 1;

    /// Range checks of every parameter block (std::invalid_argument).
    void validate() const;
};

/// Strict parse: unknown keys and wrong types throw std::invalid_argument
/// naming the offending key. Missing keys keep their defaults.
PipelineConfig config_from_json(const nlohmann::json& j);
PipelineConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const PipelineConfig& cfg);

/// Shadow map fed to the detector: the decomposition-enhanced stack when
/// mtsd_on, otherwise the raw frames mapped so shadows are bright.
FrameStack run_enhance(const FrameStack& frames, const PipelineConfig& cfg);
DetectionsByFrame run_detect(const FrameStack& shadow_map, const PipelineConfig& cfg);
std::vector<Trajectory> run_track(const DetectionsByFrame& dets, const PipelineConfig& cfg);
std::vector<Trajectory> run_interp(const std::vector<Trajectory>& trajs, const PipelineConfig& cfg);

struct PipelineResult {
    FrameStack shadow_map;
    DetectionsByFrame detections;
    std::vector<Trajectory> coarse;  // tracker output
    std::vector<Trajectory> tracks;  // after interpolation (== coarse when gsi_on is false)
    std::optional<metrics::MotReport> report;
};

/// enhance -> detect -> track -> interp, then evaluate when `gt` is given.
PipelineResult run_pipeline(const FrameStack& frames, const PipelineConfig& cfg, const std::vector<Trajectory>* gt);

}  // namespace vsartrack::pipeline
