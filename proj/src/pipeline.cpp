#include "vsartrack/pipeline.hpp"

#include "vsartrack/error.hpp"
#include "vsartrack/io.hpp"

#include <fstream>
#include <initializer_list>
#include <limits>
#include <stdexcept>
#include <variant>

namespace vsartrack::pipeline {

using nlohmann::json;

namespace {

// Strict view over one JSON object: every key must be consumed by a get().
class Block {
public:
    Block(const json& j, std::string name, std::initializer_list<const char*> allowed) : j_(j), name_(std::move(name)) {
        if (!j.is_object()) throw std::invalid_argument("config: '" + name_ + "' must be an object");
        for (const auto& [key, value] : j.items()) {
            bool known = false;
            for (const char* a : allowed) known = known || key == a;
            if (!known) throw std::invalid_argument("config: unknown key '" + qualified(key) + "'");
        }
    }

    void get(const char* key, double& out) const {
        if (const json* v = find(key)) {
            if (!v->is_number()) fail(key, "a number");
            out = v->get<double>();
        }
    }

    void get(const char* key, int& out) const {
        if (const json* v = find(key)) {
            if (!v->is_number_integer()) fail(key, "an integer");
            const auto n = v->get<long long>();
            if (n < std::numeric_limits<int>::min() || n > std::numeric_limits<int>::max()) fail(key, "a 32-bit integer");
            out = static_cast<int>(n);
        }
    }

    void get(const char* key, std::size_t& out) const {
        if (const json* v = find(key)) {
            if (!v->is_number_unsigned()) fail(key, "a non-negative integer");
            out = v->get<std::size_t>();
        }
    }

    void get(const char* key, bool& out) const {
        if (const json* v = find(key)) {
            if (!v->is_boolean()) fail(key, "a boolean");
            out = v->get<bool>();
        }
    }

    void get(const char* key, std::string& out) const {
        if (const json* v = find(key)) {
            if (!v->is_string()) fail(key, "a string");
            out = v->get<std::string>();
        }
    }

    template <typename T>
    void get(const char* key, std::optional<T>& out) const {
        if (const json* v = find(key)) {
            if (v->is_null()) {
                out.reset();
                return;
            }
            T value{};
            get(key, value);
            out = value;
        }
    }

    const json* find(const char* key) const {
        const auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    std::string qualified(const std::string& key) const { return name_.empty() ? key : name_ + "." + key; }

    [[noreturn]] void fail(const char* key, const char* what) const {
        throw std::invalid_argument("config: '" + qualified(key) + "' must be " + what);
    }

private:
    const json& j_;
    std::string name_;
};

mtsd::Polarity parse_polarity(const std::string& s) {
    if (s == "dark") return mtsd::Polarity::DarkShadows;
    if (s == "bright") return mtsd::Polarity::BrightShadows;
    throw std::invalid_argument("config: 'decompose.polarity' must be \"dark\" or \"bright\"");
}

detect::ThresholdMode parse_threshold(const std::string& s) {
    if (s == "otsu") return detect::ThresholdMode::Otsu;
    if (s == "mean_k_sigma") return detect::ThresholdMode::MeanKSigma;
    throw std::invalid_argument("config: 'blob.threshold' must be \"otsu\" or \"mean_k_sigma\"");
}

sim::Path parse_path(const json& j, const std::string& name) {
    if (!j.is_object() || !j.contains("type") || !j["type"].is_string())
        throw std::invalid_argument("config: '" + name + "' needs a string \"type\"");
    const std::string type = j["type"].get<std::string>();
    if (type == "linear") {
        const Block b(j, name, {"type", "cx", "cy", "vx", "vy"});
        sim::LinearPath p;
        b.get("cx", p.cx);
        b.get("cy", p.cy);
        b.get("vx", p.vx);
        b.get("vy", p.vy);
        return p;
    }
    if (type == "arc") {
        const Block b(j, name, {"type", "center_x", "center_y", "radius", "start_angle", "angular_rate"});
        sim::ArcPath p;
        b.get("center_x", p.center_x);
        b.get("center_y", p.center_y);
        b.get("radius", p.radius);
        b.get("start_angle", p.start_angle);
        b.get("angular_rate", p.angular_rate);
        return p;
    }
    throw std::invalid_argument("config: '" + name + ".type' must be \"linear\" or \"arc\"");
}

json path_to_json(const sim::Path& path) {
    if (const auto* p = std::get_if<sim::LinearPath>(&path))
        return {{"type", "linear"}, {"cx", p->cx}, {"cy", p->cy}, {"vx", p->vx}, {"vy", p->vy}};
    const auto& a = std::get<sim::ArcPath>(path);
    return {{"type", "arc"},           {"center_x", a.center_x},       {"center_y", a.center_y},
            {"radius", a.radius},      {"start_angle", a.start_angle}, {"angular_rate", a.angular_rate}};
}

template <typename T>
json opt(const std::optional<T>& v) {
    return v ? json(*v) : json(nullptr);
}

}  // namespace

void PipelineConfig::validate() const {
    if (decompose.tau && !(*decompose.tau > 0.0)) throw std::invalid_argument("decompose.tau must be > 0");
    if (decompose.lambda && !(*decompose.lambda > 0.0)) throw std::invalid_argument("decompose.lambda must be > 0");
    if (!(decompose.tol > 0.0)) throw std::invalid_argument("decompose.tol must be > 0");
    if (decompose.max_iter < 1) throw std::invalid_argument("decompose.max_iter must be >= 1");
    if (decompose.window && *decompose.window < 1) throw std::invalid_argument("decompose.window must be >= 1");
    blob.validate();
    assoc.validate();
    gsi.validate();
    if (!(eval.iou_thresh > 0.0 && eval.iou_thresh <= 1.0)) throw std::invalid_argument("eval.iou_thresh must be in (0,1]");
    if (!(kalman.std_position > 0.0 && kalman.std_velocity > 0.0 && kalman.std_measurement > 0.0))
        throw std::invalid_argument("kalman noise std values must be > 0");
    if (threads < 1) throw std::invalid_argument("threads must be >= 1");
}

PipelineConfig config_from_json(const json& j) {
    PipelineConfig cfg;
    const Block root(j, "",
                     {"decompose", "blob", "assoc", "kalman", "gsi", "eval", "scene", "switches", "paths", "threads"});

    if (const json* v = root.find("decompose")) {
        const Block b(*v, "decompose", {"tau", "lambda", "tol", "max_iter", "window", "polarity"});
        b.get("tau", cfg.decompose.tau);
        b.get("lambda", cfg.decompose.lambda);
        b.get("tol", cfg.decompose.tol);
        b.get("max_iter", cfg.decompose.max_iter);
        b.get("window", cfg.decompose.window);
        std::string polarity;
        b.get("polarity", polarity);
        if (!polarity.empty()) cfg.decompose.polarity = parse_polarity(polarity);
    }
    if (const json* v = root.find("blob")) {
        const Block b(*v, "blob", {"threshold", "k", "min_area", "max_area", "connectivity"});
        std::string mode;
        b.get("threshold", mode);
        if (!mode.empty()) cfg.blob.threshold_mode = parse_threshold(mode);
        b.get("k", cfg.blob.k);
        b.get("min_area", cfg.blob.min_area);
        b.get("max_area", cfg.blob.max_area);
        b.get("connectivity", cfg.blob.connectivity);
    }
    if (const json* v = root.find("assoc")) {
        const Block b(*v, "assoc",
                      {"tau_high", "tau_low", "iou_min", "n_init", "max_age", "c_max", "adaptive_noise",
                       "lost_in_first_phase"});
        b.get("tau_high", cfg.assoc.tau_high);
        b.get("tau_low", cfg.assoc.tau_low);
        b.get("iou_min", cfg.assoc.iou_min);
        b.get("n_init", cfg.assoc.n_init);
        b.get("max_age", cfg.assoc.max_age);
        b.get("c_max", cfg.assoc.c_max);
        b.get("adaptive_noise", cfg.assoc.adaptive_noise);
        b.get("lost_in_first_phase", cfg.assoc.lost_in_first_phase);
    }
    if (const json* v = root.find("kalman")) {
        const Block b(*v, "kalman", {"std_position", "std_velocity", "std_measurement"});
        b.get("std_position", cfg.kalman.std_position);
        b.get("std_velocity", cfg.kalman.std_velocity);
        b.get("std_measurement", cfg.kalman.std_measurement);
    }
    if (const json* v = root.find("gsi")) {
        const Block b(*v, "gsi", {"length_scale", "noise_var", "max_gap", "fill_only"});
        b.get("length_scale", cfg.gsi.length_scale);
        b.get("noise_var", cfg.gsi.noise_var);
        b.get("max_gap", cfg.gsi.max_gap);
        b.get("fill_only", cfg.gsi.fill_only);
    }
    if (const json* v = root.find("eval")) {
        const Block b(*v, "eval", {"iou_thresh", "persistent"});
        b.get("iou_thresh", cfg.eval.iou_thresh);
        b.get("persistent", cfg.eval.persistent);
    }
    if (const json* v = root.find("scene")) {
        const Block b(*v, "scene",
                      {"rows", "cols", "frames", "rank", "n_targets", "paths", "shadow_depth", "shadow_w", "shadow_h",
                       "noise_sigma", "n_static", "seed"});
        auto& s = cfg.scene;
        b.get("rows", s.rows);
        b.get("cols", s.cols);
        b.get("frames", s.frames);
        b.get("rank", s.rank);
        b.get("n_targets", s.n_targets);
        if (const json* paths = b.find("paths")) {
            if (!paths->is_array()) throw std::invalid_argument("config: 'scene.paths' must be an array");
            s.paths.clear();
            for (std::size_t i = 0; i < paths->size(); ++i)
                s.paths.push_back(parse_path((*paths)[i], "scene.paths[" + std::to_string(i) + "]"));
        }
        b.get("shadow_depth", s.shadow_depth);
        b.get("shadow_w", s.shadow_w);
        b.get("shadow_h", s.shadow_h);
        b.get("noise_sigma", s.noise_sigma);
        b.get("n_static", s.n_static);
        std::size_t seed = s.seed;
        b.get("seed", seed);
        s.seed = seed;
    }
    if (const json* v = root.find("switches")) {
        const Block b(*v, "switches", {"mtsd_on", "recall_on", "gsi_on"});
        b.get("mtsd_on", cfg.switches.mtsd_on);
        b.get("recall_on", cfg.switches.recall_on);
        b.get("gsi_on", cfg.switches.gsi_on);
    }
    if (const json* v = root.find("paths")) {
        const Block b(*v, "paths",
                      {"frames", "detections_in", "detections_out", "tracks_out", "gt", "report_out", "render_out"});
        b.get("frames", cfg.paths.frames);
        b.get("detections_in", cfg.paths.detections_in);
        b.get("detections_out", cfg.paths.detections_out);
        b.get("tracks_out", cfg.paths.tracks_out);
        b.get("gt", cfg.paths.gt);
        b.get("report_out", cfg.paths.report_out);
        b.get("render_out", cfg.paths.render_out);
    }
    if (root.find("threads")) {
        std::size_t threads = 1;
        root.get("threads", threads);
        if (threads < 1 || threads > 1024) throw std::invalid_argument("config: 'threads' must be in [1, 1024]");
        cfg.threads = static_cast<unsigned>(threads);
    }
    return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path) {
    const std::string text = io::read_text(path);
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
    return config_from_json(j);
}

json to_json(const PipelineConfig& cfg) {
    json j;
    const auto& d = cfg.decompose;
    j["decompose"] = {{"tau", opt(d.tau)},
                      {"lambda", opt(d.lambda)},
                      {"tol", d.tol},
                      {"max_iter", d.max_iter},
                      {"window", opt(d.window)},
                      {"polarity", d.polarity == mtsd::Polarity::DarkShadows ? "dark" : "bright"}};
    const auto& b = cfg.blob;
    j["blob"] = {{"threshold", b.threshold_mode == detect::ThresholdMode::Otsu ? "otsu" : "mean_k_sigma"},
                 {"k", b.k},
                 {"min_area", b.min_area},
                 {"max_area", opt(b.max_area)},
                 {"connectivity", b.connectivity}};
    const auto& a = cfg.assoc;
    j["assoc"] = {{"tau_high", a.tau_high}, {"tau_low", a.tau_low},         {"iou_min", a.iou_min},
                  {"n_init", a.n_init},     {"max_age", a.max_age},         {"c_max", a.c_max},
                  {"adaptive_noise", a.adaptive_noise}, {"lost_in_first_phase", a.lost_in_first_phase}};
    j["kalman"] = {{"std_position", cfg.kalman.std_position},
                   {"std_velocity", cfg.kalman.std_velocity},
                   {"std_measurement", cfg.kalman.std_measurement}};
    j["gsi"] = {{"length_scale", cfg.gsi.length_scale},
                {"noise_var", cfg.gsi.noise_var},
                {"max_gap", cfg.gsi.max_gap},
                {"fill_only", cfg.gsi.fill_only}};
    j["eval"] = {{"iou_thresh", cfg.eval.iou_thresh}, {"persistent", cfg.eval.persistent}};
    const auto& s = cfg.scene;
    json paths = json::array();
    for (const auto& p : s.paths) paths.push_back(path_to_json(p));
    j["scene"] = {{"rows", s.rows},
                  {"cols", s.cols},
                  {"frames", s.frames},
                  {"rank", s.rank},
                  {"n_targets", s.n_targets},
                  {"paths", paths},
                  {"shadow_depth", s.shadow_depth},
                  {"shadow_w", s.shadow_w},
                  {"shadow_h", s.shadow_h},
                  {"noise_sigma", s.noise_sigma},
                  {"n_static", s.n_static},
                  {"seed", s.seed}};
    j["switches"] = {{"mtsd_on", cfg.switches.mtsd_on},
                     {"recall_on", cfg.switches.recall_on},
                     {"gsi_on", cfg.switches.gsi_on}};
    const auto& p = cfg.paths;
    j["paths"] = {{"frames", p.frames},         {"detections_in", p.detections_in}, {"detections_out", p.detections_out},
                  {"tracks_out", p.tracks_out}, {"gt", p.gt},                       {"report_out", p.report_out},
                  {"render_out", p.render_out}};
    j["threads"] = cfg.threads;
    return j;
}

FrameStack run_enhance(const FrameStack& frames, const PipelineConfig& cfg) {
    if (!cfg.switches.mtsd_on) return mtsd::shadow_map_raw(frames, cfg.decompose.polarity);
    const auto dec = mtsd::decompose(frames, cfg.decompose, cfg.threads);
    return mtsd::enhance(frames, dec, cfg.decompose.polarity);
}

DetectionsByFrame run_detect(const FrameStack& shadow_map, const PipelineConfig& cfg) {
    return detect::detect_stack(shadow_map, cfg.blob, cfg.threads);
}

std::vector<Trajectory> run_track(const DetectionsByFrame& dets, const PipelineConfig& cfg) {
    track::AssocConfig assoc = cfg.assoc;
    assoc.recall = cfg.switches.recall_on;
    return track::track_video(dets, assoc, cfg.kalman);
}

std::vector<Trajectory> run_interp(const std::vector<Trajectory>& trajs, const PipelineConfig& cfg) {
    if (!cfg.switches.gsi_on) return trajs;
    return gsi::interpolate_all(trajs, cfg.gsi, cfg.threads);
}

PipelineResult run_pipeline(const FrameStack& frames, const PipelineConfig& cfg, const std::vector<Trajectory>* gt) {
    cfg.validate();
    PipelineResult r{run_enhance(frames, cfg), {}, {}, {}, std::nullopt};
    r.detections = run_detect(r.shadow_map, cfg);
    r.coarse = run_track(r.detections, cfg);
    r.tracks = run_interp(r.coarse, cfg);
    if (gt) r.report = metrics::evaluate(*gt, r.tracks, cfg.eval);
    return r;
}

}  // namespace vsartrack::pipeline
