#pragma once

// File formats.
//
// VSR1 frame stack: ASCII "VSR1", then little-endian uint32 T, H, W, then
// T*H*W little-endian float32 samples in [0,1], frame-major, row-major.
// A directory of 8-bit binary PGM files frame_%06d.pgm is accepted as well.
//
// MOT CSV: one record per line, `frame,id,x,y,w,h,conf,-1,-1,-1`; frame is
// 1-based, id is -1 for detections and positive for tracks / ground truth,
// floats carry 6 decimals, lines are sorted by (frame, id).
//
// Report: `MOTA,FP,FN,IDSW,FM,GT` header and one value line.

#include "vsartrack/core.hpp"
#include "vsartrack/metrics.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace vsartrack::io {

void write_vsr1(std::ostream& out, const FrameStack& stack);
FrameStack read_vsr1(std::istream& in);

void write_pgm_dir(const std::filesystem::path& dir, const FrameStack& stack);
FrameStack read_pgm_dir(const std::filesystem::path& dir);

/// VSR1 file or PGM directory, chosen by what `path` is.
FrameStack read_frames(const std::filesystem::path& path);
void write_frames(const std::filesystem::path& path, const FrameStack& stack);

void write_detections(std::ostream& out, const DetectionsByFrame& dets);
/// Throws FormatError with the 1-based line number on malformed records or a
/// confidence outside [0,1].
DetectionsByFrame read_detections(std::istream& in);

void write_trajectories(std::ostream& out, const std::vector<Trajectory>& trajs);
std::vector<Trajectory> read_trajectories(std::istream& in);

DetectionsByFrame read_detections(const std::filesystem::path& path);
void write_detections(const std::filesystem::path& path, const DetectionsByFrame& dets);
std::vector<Trajectory> read_trajectories(const std::filesystem::path& path);
void write_trajectories(const std::filesystem::path& path, const std::vector<Trajectory>& trajs);

std::string report_csv(const metrics::MotReport& report);
std::string report_table(const metrics::MotReport& report);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace vsartrack::io
