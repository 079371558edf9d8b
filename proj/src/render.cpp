#include "vsartrack/render.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <sstream>

namespace vsartrack::render {

Rgb color_for_id(int id) {
    const double hue = std::fmod(static_cast<double>(id) * 137.50776405003785, 360.0);
    const double s = 0.85;
    const double v = 0.95;
    const double c = v * s;
    const double hp = hue / 60.0;
    const double x = c * (1.0 - std::abs(std::fmod(hp, 2.0) - 1.0));
    std::array<double, 3> rgb{};
    switch (static_cast<int>(hp)) {
        case 0: rgb = {c, x, 0}; break;
        case 1: rgb = {x, c, 0}; break;
        case 2: rgb = {0, c, x}; break;
        case 3: rgb = {0, x, c}; break;
        case 4: rgb = {x, 0, c}; break;
        default: rgb = {c, 0, x}; break;
    }
    const double m = v - c;
    auto to8 = [m](double ch) { return static_cast<int>(std::lround((ch + m) * 255.0)); };
    return {to8(rgb[0]), to8(rgb[1]), to8(rgb[2])};
}

namespace {

void put_le(std::string& s, std::uint32_t v, int bytes) {
    for (int i = 0; i < bytes; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

// 24-bit uncompressed BMP of frame 0, bottom-up rows padded to 4 bytes.
std::string bmp_of_first_frame(const FrameStack& stack) {
    const auto w = static_cast<std::uint32_t>(stack.cols());
    const auto h = static_cast<std::uint32_t>(stack.rows());
    const std::uint32_t stride = (w * 3 + 3) & ~3U;
    const std::uint32_t payload = stride * h;
    std::string s;
    s += "BM";
    put_le(s, 54 + payload, 4);
    put_le(s, 0, 4);
    put_le(s, 54, 4);
    put_le(s, 40, 4);
    put_le(s, w, 4);
    put_le(s, h, 4);
    put_le(s, 1, 2);
    put_le(s, 24, 2);
    put_le(s, 0, 4);
    put_le(s, payload, 4);
    put_le(s, 2835, 4);
    put_le(s, 2835, 4);
    put_le(s, 0, 4);
    put_le(s, 0, 4);
    for (std::uint32_t row = h; row-- > 0;) {
        for (std::uint32_t c = 0; c < w; ++c) {
            const auto g = static_cast<char>(std::lround(std::clamp(stack.at(0, row, c), 0.0F, 1.0F) * 255.0F));
            s.append(3, g);
        }
        s.append(stride - w * 3, '\0');
    }
    return s;
}

std::string base64(const std::string& in) {
    static constexpr char table[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
    std::string out;
    std::size_t i = 0;
    for (; i + 2 < in.size(); i += 3) {
        const auto n = (static_cast<std::uint32_t>(static_cast<unsigned char>(in[i])) << 16) |
                       (static_cast<std::uint32_t>(static_cast<unsigned char>(in[i + 1])) << 8) |
                       static_cast<unsigned char>(in[i + 2]);
        out += table[(n >> 18) & 63];
        out += table[(n >> 12) & 63];
        out += table[(n >> 6) & 63];
        out += table[n & 63];
    }
    if (i < in.size()) {
        std::uint32_t n = static_cast<std::uint32_t>(static_cast<unsigned char>(in[i])) << 16;
        if (i + 1 < in.size()) n |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[i + 1])) << 8;
        out += table[(n >> 18) & 63];
        out += table[(n >> 12) & 63];
        out += i + 1 < in.size() ? table[(n >> 6) & 63] : '=';
        out += '=';
    }
    return out;
}

std::string num(double v) {
    std::array<char, 32> buf{};
    std::snprintf(buf.data(), buf.size(), "%.2f", v);
    return buf.data();
}

}  // namespace

std::string render_svg(const std::vector<Trajectory>& trajs, const FrameStack* backdrop, std::size_t width,
                       std::size_t height) {
    if (backdrop) {
        width = backdrop->cols();
        height = backdrop->rows();
    }
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
       << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
    if (backdrop)
        os << "  <image x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height
           << "\" href=\"data:image/bmp;base64," << base64(bmp_of_first_frame(*backdrop)) << "\"/>\n";
    else
        os << "  <rect width=\"100%\" height=\"100%\" fill=\"black\"/>\n";

    std::vector<const Trajectory*> ordered;
    for (const auto& t : trajs) ordered.push_back(&t);
    std::sort(ordered.begin(), ordered.end(), [](const Trajectory* a, const Trajectory* b) { return a->id < b->id; });
    for (const Trajectory* t : ordered) {
        const Rgb c = color_for_id(t->id);
        os << "  <polyline id=\"track-" << t->id << "\" fill=\"none\" stroke-width=\"1\" stroke=\"rgb(" << c.r << ","
           << c.g << "," << c.b << ")\" points=\"";
        for (std::size_t i = 0; i < t->samples.size(); ++i) {
            const CenterBox cb = to_center(t->samples[i].box);
            os << (i ? " " : "") << num(cb.cx) << "," << num(cb.cy);
        }
        os << "\"/>\n";
    }
    os << "</svg>\n";
    return os.str();
}

}  // namespace vsartrack::render
