// vsartrack command-line tool.
//
// Every subcommand reads an optional JSON config (--config), applies the
// flags given on the command line on top of it, runs one stage and writes
// its outputs. Exit codes: 0 ok, 1 usage / invalid parameters, 2 data or
// format error, 3 numerical failure.

#include "vsartrack/error.hpp"
#include "vsartrack/io.hpp"
#include "vsartrack/pipeline.hpp"
#include "vsartrack/render.hpp"

#include "CLI11.hpp"

#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace vsartrack;
using pipeline::PipelineConfig;

class Overrides {
public:
    template <typename T>
    void add(CLI::App* app, const std::string& flag, const std::string& help, std::function<void(PipelineConfig&, T)> apply) {
        auto value = std::make_shared<T>();
        CLI::Option* opt = app->add_option(flag, *value, help);
        fns_.emplace_back([opt, value, apply](PipelineConfig& cfg) {
            if (opt->count() > 0) apply(cfg, *value);
        });
    }

    void add_switch(CLI::App* app, const std::string& flag, const std::string& help, bool pipeline::Switches::*member) {
        auto value = std::make_shared<std::string>();
        CLI::Option* opt = app->add_option(flag, *value, help)->check(CLI::IsMember({"on", "off"}));
        fns_.emplace_back([opt, value, member](PipelineConfig& cfg) {
            if (opt->count() > 0) cfg.switches.*member = *value == "on";
        });
    }

    void apply(PipelineConfig& cfg) const {
        for (const auto& fn : fns_) fn(cfg);
    }

private:
    std::vector<std::function<void(PipelineConfig&)>> fns_;
};

void add_scene_flags(CLI::App* app, Overrides& ov) {
    ov.add<std::size_t>(app, "--rows", "frame height", [](PipelineConfig& c, std::size_t v) { c.scene.rows = v; });
    ov.add<std::size_t>(app, "--cols", "frame width", [](PipelineConfig& c, std::size_t v) { c.scene.cols = v; });
    ov.add<std::size_t>(app, "--frames", "number of frames", [](PipelineConfig& c, std::size_t v) { c.scene.frames = v; });
    ov.add<int>(app, "--rank", "background rank", [](PipelineConfig& c, int v) { c.scene.rank = v; });
    ov.add<int>(app, "--targets", "moving shadows", [](PipelineConfig& c, int v) { c.scene.n_targets = v; });
    ov.add<int>(app, "--static", "static dark patches", [](PipelineConfig& c, int v) { c.scene.n_static = v; });
    ov.add<int>(app, "--shadow-w", "shadow width (px)", [](PipelineConfig& c, int v) { c.scene.shadow_w = v; });
    ov.add<int>(app, "--shadow-h", "shadow height (px)", [](PipelineConfig& c, int v) { c.scene.shadow_h = v; });
    ov.add<double>(app, "--depth", "shadow depth", [](PipelineConfig& c, double v) { c.scene.shadow_depth = v; });
    ov.add<double>(app, "--noise", "noise sigma", [](PipelineConfig& c, double v) { c.scene.noise_sigma = v; });
    ov.add<std::uint64_t>(app, "--seed", "random seed", [](PipelineConfig& c, std::uint64_t v) { c.scene.seed = v; });
}

void add_decompose_flags(CLI::App* app, Overrides& ov) {
    ov.add<double>(app, "--tau", "nuclear-norm threshold", [](PipelineConfig& c, double v) { c.decompose.tau = v; });
    ov.add<double>(app, "--lambda", "sparsity threshold", [](PipelineConfig& c, double v) { c.decompose.lambda = v; });
    ov.add<double>(app, "--tol", "stopping tolerance", [](PipelineConfig& c, double v) { c.decompose.tol = v; });
    ov.add<int>(app, "--max-iter", "iteration cap", [](PipelineConfig& c, int v) { c.decompose.max_iter = v; });
    ov.add<std::size_t>(app, "--window", "frames per block", [](PipelineConfig& c, std::size_t v) { c.decompose.window = v; });
    ov.add<std::string>(app, "--polarity", "dark|bright", [](PipelineConfig& c, std::string v) {
        if (v == "dark") c.decompose.polarity = mtsd::Polarity::DarkShadows;
        else if (v == "bright") c.decompose.polarity = mtsd::Polarity::BrightShadows;
        else throw std::invalid_argument("--polarity must be dark or bright");
    });
}

void add_blob_flags(CLI::App* app, Overrides& ov) {
    ov.add<std::string>(app, "--threshold", "otsu|mean_k_sigma", [](PipelineConfig& c, std::string v) {
        if (v == "otsu") c.blob.threshold_mode = detect::ThresholdMode::Otsu;
        else if (v == "mean_k_sigma") c.blob.threshold_mode = detect::ThresholdMode::MeanKSigma;
        else throw std::invalid_argument("--threshold must be otsu or mean_k_sigma");
    });
    ov.add<double>(app, "--k", "sigma multiplier", [](PipelineConfig& c, double v) { c.blob.k = v; });
    ov.add<double>(app, "--min-area", "minimum blob area", [](PipelineConfig& c, double v) { c.blob.min_area = v; });
    ov.add<double>(app, "--max-area", "maximum blob area", [](PipelineConfig& c, double v) { c.blob.max_area = v; });
    ov.add<int>(app, "--connectivity", "4 or 8", [](PipelineConfig& c, int v) { c.blob.connectivity = v; });
}

void add_assoc_flags(CLI::App* app, Overrides& ov) {
    ov.add<double>(app, "--tau-high", "high-confidence threshold", [](PipelineConfig& c, double v) { c.assoc.tau_high = v; });
    ov.add<double>(app, "--tau-low", "low-confidence threshold", [](PipelineConfig& c, double v) { c.assoc.tau_low = v; });
    ov.add<double>(app, "--iou-min", "association IoU gate", [](PipelineConfig& c, double v) { c.assoc.iou_min = v; });
    ov.add<int>(app, "--n-init", "hits before promotion", [](PipelineConfig& c, int v) { c.assoc.n_init = v; });
    ov.add<int>(app, "--max-age", "frames a lost track survives", [](PipelineConfig& c, int v) { c.assoc.max_age = v; });
    ov.add<double>(app, "--c-max", "confidence clamp", [](PipelineConfig& c, double v) { c.assoc.c_max = v; });
    ov.add_switch(app, "--recall", "low-confidence recall phase (on|off)", &pipeline::Switches::recall_on);
}

void add_gsi_flags(CLI::App* app, Overrides& ov) {
    ov.add<double>(app, "--length-scale", "RBF length scale (frames)", [](PipelineConfig& c, double v) { c.gsi.length_scale = v; });
    ov.add<double>(app, "--noise-var", "GP noise variance", [](PipelineConfig& c, double v) { c.gsi.noise_var = v; });
    ov.add<int>(app, "--max-gap", "longest gap filled", [](PipelineConfig& c, int v) { c.gsi.max_gap = v; });
    ov.add_switch(app, "--gsi", "interpolation (on|off)", &pipeline::Switches::gsi_on);
}

void add_eval_flags(CLI::App* app, Overrides& ov) {
    ov.add<double>(app, "--iou-thresh", "match IoU threshold", [](PipelineConfig& c, double v) { c.eval.iou_thresh = v; });
}

void add_path_flag(CLI::App* app, Overrides& ov, const std::string& flag, const std::string& help,
                   std::string pipeline::Paths::*member) {
    ov.add<std::string>(app, flag, help, [member](PipelineConfig& c, std::string v) { c.paths.*member = std::move(v); });
}

const std::string& require(const std::string& path, const char* what) {
    if (path.empty()) throw std::invalid_argument(std::string("missing ") + what);
    return path;
}

void emit_report(const metrics::MotReport& report, const PipelineConfig& cfg) {
    std::cout << io::report_table(report);
    if (!cfg.paths.report_out.empty()) io::write_text(cfg.paths.report_out, io::report_csv(report));
    else std::cout << io::report_csv(report);
}

std::string render_trajectories(const std::vector<Trajectory>& trajs, const PipelineConfig& cfg, std::size_t width,
                                std::size_t height) {
    if (!cfg.paths.frames.empty()) {
        const FrameStack backdrop = io::read_frames(cfg.paths.frames);
        return render::render_svg(trajs, &backdrop, 0, 0);
    }
    if (width == 0 || height == 0) {
        double max_x = 1.0;
        double max_y = 1.0;
        for (const auto& t : trajs)
            for (const auto& s : t.samples) {
                max_x = std::max(max_x, s.box.x + s.box.w);
                max_y = std::max(max_y, s.box.y + s.box.h);
            }
        if (width == 0) width = static_cast<std::size_t>(std::ceil(max_x));
        if (height == 0) height = static_cast<std::size_t>(std::ceil(max_y));
    }
    return render::render_svg(trajs, nullptr, width, height);
}

// Stage outputs pass through their file encoding, so a pipeline run matches
// the same stages chained by hand through files.
DetectionsByFrame as_written(const DetectionsByFrame& dets) {
    std::stringstream ss;
    io::write_detections(ss, dets);
    return io::read_detections(ss);
}

std::vector<Trajectory> as_written(const std::vector<Trajectory>& trajs) {
    std::stringstream ss;
    io::write_trajectories(ss, trajs);
    return io::read_trajectories(ss);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Video-SAR shadow tracking toolkit"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    unsigned threads = 0;
    app.add_option("--config", config_path, "JSON configuration file")->check(CLI::ExistingFile);
    app.add_option("--threads", threads, "worker threads")->check(CLI::Range(1U, 1024U));

    Overrides sim_ov, enh_ov, det_ov, trk_ov, int_ov, eval_ov, pipe_ov, ren_ov;
    std::string enhance_out;
    std::string detect_input = "enhanced";
    std::string interp_in;
    bool pgm = false;
    std::size_t width = 0;
    std::size_t height = 0;

    auto* sim = app.add_subcommand("simulate", "generate a synthetic scene and its ground truth");
    add_scene_flags(sim, sim_ov);
    add_path_flag(sim, sim_ov, "--out", "frame stack output (VSR1 file or PGM directory)", &pipeline::Paths::frames);
    add_path_flag(sim, sim_ov, "--gt", "ground-truth MOT CSV output", &pipeline::Paths::gt);
    sim->add_flag("--pgm", pgm, "write a PGM directory instead of VSR1");

    auto* enh = app.add_subcommand("enhance", "decompose frames into a shadow map");
    add_path_flag(enh, enh_ov, "--frames", "input frames", &pipeline::Paths::frames);
    enh->add_option("--out", enhance_out, "shadow map output (VSR1)")->required();
    add_decompose_flags(enh, enh_ov);
    enh_ov.add_switch(enh, "--mtsd", "decomposition (on|off)", &pipeline::Switches::mtsd_on);

    auto* det = app.add_subcommand("detect", "blob detection on a shadow map");
    add_path_flag(det, det_ov, "--frames", "input frames", &pipeline::Paths::frames);
    add_path_flag(det, det_ov, "--out", "detections MOT CSV output", &pipeline::Paths::detections_out);
    det->add_option("--input", detect_input, "enhanced: frames are a shadow map; raw: frames are raw video")
        ->check(CLI::IsMember({"enhanced", "raw"}));
    add_blob_flags(det, det_ov);
    det_ov.add<std::string>(det, "--polarity", "dark|bright (raw input only)", [](PipelineConfig& c, std::string v) {
        if (v == "dark") c.decompose.polarity = mtsd::Polarity::DarkShadows;
        else if (v == "bright") c.decompose.polarity = mtsd::Polarity::BrightShadows;
        else throw std::invalid_argument("--polarity must be dark or bright");
    });

    auto* trk = app.add_subcommand("track", "associate detections into trajectories");
    add_path_flag(trk, trk_ov, "--dets", "detections MOT CSV input", &pipeline::Paths::detections_in);
    add_path_flag(trk, trk_ov, "--out", "tracks MOT CSV output", &pipeline::Paths::tracks_out);
    add_assoc_flags(trk, trk_ov);

    auto* itp = app.add_subcommand("interp", "Gaussian-process smoothing and gap filling");
    itp->add_option("--in", interp_in, "tracks MOT CSV input")->required();
    add_path_flag(itp, int_ov, "--out", "tracks MOT CSV output", &pipeline::Paths::tracks_out);
    add_gsi_flags(itp, int_ov);

    auto* evl = app.add_subcommand("eval", "CLEAR-MOT evaluation");
    add_path_flag(evl, eval_ov, "--gt", "ground-truth MOT CSV", &pipeline::Paths::gt);
    add_path_flag(evl, eval_ov, "--hyp", "hypothesis tracks MOT CSV", &pipeline::Paths::tracks_out);
    add_path_flag(evl, eval_ov, "--report", "report CSV output", &pipeline::Paths::report_out);
    add_eval_flags(evl, eval_ov);

    auto* pip = app.add_subcommand("pipeline", "enhance, detect, track, interpolate and evaluate");
    add_path_flag(pip, pipe_ov, "--frames", "input frames", &pipeline::Paths::frames);
    add_path_flag(pip, pipe_ov, "--dets", "use these detections instead of the blob detector", &pipeline::Paths::detections_in);
    add_path_flag(pip, pipe_ov, "--dets-out", "detections MOT CSV output", &pipeline::Paths::detections_out);
    add_path_flag(pip, pipe_ov, "--tracks-out", "tracks MOT CSV output", &pipeline::Paths::tracks_out);
    add_path_flag(pip, pipe_ov, "--gt", "ground truth for evaluation", &pipeline::Paths::gt);
    add_path_flag(pip, pipe_ov, "--report", "report CSV output", &pipeline::Paths::report_out);
    add_path_flag(pip, pipe_ov, "--render", "SVG output", &pipeline::Paths::render_out);
    add_decompose_flags(pip, pipe_ov);
    add_blob_flags(pip, pipe_ov);
    add_assoc_flags(pip, pipe_ov);
    add_gsi_flags(pip, pipe_ov);
    add_eval_flags(pip, pipe_ov);
    pipe_ov.add_switch(pip, "--mtsd", "decomposition (on|off)", &pipeline::Switches::mtsd_on);

    auto* ren = app.add_subcommand("render", "draw trajectories as SVG");
    add_path_flag(ren, ren_ov, "--tracks", "tracks MOT CSV input", &pipeline::Paths::tracks_out);
    add_path_flag(ren, ren_ov, "--frames", "optional frames; frame 1 becomes the backdrop", &pipeline::Paths::frames);
    add_path_flag(ren, ren_ov, "--out", "SVG output", &pipeline::Paths::render_out);
    ren->add_option("--width", width, "canvas width without backdrop (default: track extent)");
    ren->add_option("--height", height, "canvas height without backdrop (default: track extent)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "vsartrack: error: " << e.what() << "\n";
        return 1;
    }

    try {
        PipelineConfig cfg = config_path.empty() ? PipelineConfig{} : pipeline::load_config(config_path);
        if (threads > 0) cfg.threads = threads;

        if (*sim) {
            sim_ov.apply(cfg);
            cfg.scene.validate();
            const auto scene = sim::generate(cfg.scene);
            const auto& out = require(cfg.paths.frames, "--out");
            if (pgm) io::write_pgm_dir(out, scene.stack);
            else io::write_frames(out, scene.stack);
            if (!cfg.paths.gt.empty()) io::write_trajectories(cfg.paths.gt, scene.ground_truth);
        } else if (*enh) {
            enh_ov.apply(cfg);
            cfg.validate();
            const auto frames = io::read_frames(require(cfg.paths.frames, "--frames"));
            io::write_frames(enhance_out, pipeline::run_enhance(frames, cfg));
        } else if (*det) {
            det_ov.apply(cfg);
            cfg.validate();
            auto frames = io::read_frames(require(cfg.paths.frames, "--frames"));
            if (detect_input == "raw") frames = mtsd::shadow_map_raw(frames, cfg.decompose.polarity);
            const auto dets = pipeline::run_detect(frames, cfg);
            io::write_detections(require(cfg.paths.detections_out, "--out"), dets);
        } else if (*trk) {
            trk_ov.apply(cfg);
            cfg.validate();
            const auto dets = io::read_detections(require(cfg.paths.detections_in, "--dets"));
            io::write_trajectories(require(cfg.paths.tracks_out, "--out"), pipeline::run_track(dets, cfg));
        } else if (*itp) {
            int_ov.apply(cfg);
            cfg.validate();
            const auto trajs = io::read_trajectories(interp_in);
            io::write_trajectories(require(cfg.paths.tracks_out, "--out"), pipeline::run_interp(trajs, cfg));
        } else if (*evl) {
            eval_ov.apply(cfg);
            cfg.validate();
            const auto gt = io::read_trajectories(require(cfg.paths.gt, "--gt"));
            const auto hyp = io::read_trajectories(require(cfg.paths.tracks_out, "--hyp"));
            emit_report(metrics::evaluate(gt, hyp, cfg.eval), cfg);
        } else if (*pip) {
            pipe_ov.apply(cfg);
            cfg.validate();
            std::vector<Trajectory> coarse;
            if (!cfg.paths.detections_in.empty()) {
                coarse = pipeline::run_track(io::read_detections(cfg.paths.detections_in), cfg);
            } else {
                const auto frames = io::read_frames(require(cfg.paths.frames, "--frames"));
                const auto dets = pipeline::run_detect(pipeline::run_enhance(frames, cfg), cfg);
                if (!cfg.paths.detections_out.empty()) io::write_detections(cfg.paths.detections_out, dets);
                coarse = pipeline::run_track(as_written(dets), cfg);
            }
            const auto tracks = pipeline::run_interp(as_written(coarse), cfg);
            io::write_trajectories(require(cfg.paths.tracks_out, "--tracks-out"), tracks);
            if (!cfg.paths.gt.empty())
                emit_report(metrics::evaluate(io::read_trajectories(cfg.paths.gt), tracks, cfg.eval), cfg);
            if (!cfg.paths.render_out.empty())
                io::write_text(cfg.paths.render_out, render_trajectories(tracks, cfg, 0, 0));
        } else if (*ren) {
            ren_ov.apply(cfg);
            const auto trajs = io::read_trajectories(require(cfg.paths.tracks_out, "--tracks"));
            io::write_text(require(cfg.paths.render_out, "--out"), render_trajectories(trajs, cfg, width, height));
        }
    } catch (const FormatError& e) {
        std::cerr << "vsartrack: format error: " << e.what() << "\n";
        return 2;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "vsartrack: file error: " << e.what() << "\n";
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "vsartrack: numerical error: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "vsartrack: invalid argument: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "vsartrack: error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
