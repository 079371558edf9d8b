#pragma once

#include "vsartrack/core.hpp"

#include <optional>
#include <string>
#include <vector>

namespace vsartrack::render {

struct Rgb {
    int r = 0;
    int g = 0;
    int b = 0;
};

/// Fixed color per id (golden-angle hue walk).
Rgb color_for_id(int id);

/// SVG with one polyline of box centers per trajectory. When `backdrop` is
/// given, frame 1 is embedded underneath as a grayscale bitmap and the canvas
/// takes its size; otherwise the canvas is `width` x `height`.
std::string render_svg(const std::vector<Trajectory>& trajs, const FrameStack* backdrop, std::size_t width,
                       std::size_t height);

}  // namespace vsartrack::render
