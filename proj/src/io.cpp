#include "vsartrack/io.hpp"

#include "vsartrack/error.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace vsartrack::io {

namespace fs = std::filesystem;

namespace {

void put_u32(std::ostream& out, std::uint32_t v) {
    const std::array<char, 4> b{static_cast<char>(v & 0xFF), static_cast<char>((v >> 8) & 0xFF),
                                static_cast<char>((v >> 16) & 0xFF), static_cast<char>((v >> 24) & 0xFF)};
    out.write(b.data(), 4);
}

std::uint32_t get_u32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::ifstream open_in(const fs::path& path, std::ios::openmode mode = std::ios::in) {
    std::ifstream in(path, mode);
    if (!in) throw FormatError("cannot open " + path.string());
    return in;
}

std::ofstream open_out(const fs::path& path, std::ios::openmode mode = std::ios::out) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, mode | std::ios::trunc);
    if (!out) throw FormatError("cannot write " + path.string());
    return out;
}

std::string fixed6(double v) {
    std::array<char, 64> buf{};
    std::snprintf(buf.data(), buf.size(), "%.6f", v);
    return buf.data();
}

}  // namespace

void write_vsr1(std::ostream& out, const FrameStack& stack) {
    out.write("VSR1", 4);
    put_u32(out, static_cast<std::uint32_t>(stack.frames()));
    put_u32(out, static_cast<std::uint32_t>(stack.rows()));
    put_u32(out, static_cast<std::uint32_t>(stack.cols()));
    std::vector<char> bytes(stack.data().size() * 4);
    for (std::size_t i = 0; i < stack.data().size(); ++i) {
        const auto bits = std::bit_cast<std::uint32_t>(stack.data()[i]);
        for (std::size_t b = 0; b < 4; ++b) bytes[4 * i + b] = static_cast<char>((bits >> (8 * b)) & 0xFF);
    }
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw FormatError("failed writing VSR1 stream");
}

FrameStack read_vsr1(std::istream& in) {
    std::array<unsigned char, 16> header{};
    in.read(reinterpret_cast<char*>(header.data()), 16);
    if (in.gcount() != 16) throw FormatError("VSR1: truncated header at offset " + std::to_string(in.gcount()));
    if (std::memcmp(header.data(), "VSR1", 4) != 0) throw FormatError("VSR1: bad magic at offset 0");
    const std::uint32_t t = get_u32(header.data() + 4);
    const std::uint32_t h = get_u32(header.data() + 8);
    const std::uint32_t w = get_u32(header.data() + 12);
    if (t == 0 || h == 0 || w == 0) throw FormatError("VSR1: zero dimension in header at offset 4");
    const std::uint64_t count = std::uint64_t{t} * h * w;
    if (count > (std::uint64_t{1} << 32)) throw FormatError("VSR1: header declares an implausible size");

    std::vector<unsigned char> bytes(count * 4);
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (static_cast<std::uint64_t>(in.gcount()) != bytes.size())
        throw FormatError("VSR1: truncated payload at offset " + std::to_string(16 + in.gcount()));
    std::vector<float> data(count);
    for (std::size_t i = 0; i < count; ++i) {
        const float v = std::bit_cast<float>(get_u32(bytes.data() + 4 * i));
        if (!std::isfinite(v) || v < 0.0F || v > 1.0F)
            throw FormatError("VSR1: sample outside [0,1] at offset " + std::to_string(16 + 4 * i));
        data[i] = v;
    }
    return FrameStack(t, h, w, std::move(data));
}

namespace {

std::string pgm_name(std::size_t k) {
    std::array<char, 32> buf{};
    std::snprintf(buf.data(), buf.size(), "frame_%06zu.pgm", k);
    return buf.data();
}

// Reads the next whitespace-separated header token, skipping '#' comments.
std::string pgm_token(std::istream& in) {
    std::string tok;
    int ch = 0;
    while ((ch = in.get()) != EOF) {
        if (ch == '#') {
            while ((ch = in.get()) != EOF && ch != '\n') {
            }
            continue;
        }
        if (std::isspace(ch)) {
            if (!tok.empty()) break;
            continue;
        }
        tok.push_back(static_cast<char>(ch));
    }
    return tok;
}

}  // namespace

void write_pgm_dir(const fs::path& dir, const FrameStack& stack) {
    fs::create_directories(dir);
    for (std::size_t k = 0; k < stack.frames(); ++k) {
        auto out = open_out(dir / pgm_name(k + 1), std::ios::binary);
        out << "P5\n" << stack.cols() << " " << stack.rows() << "\n255\n";
        std::vector<char> px(stack.frame_size());
        const auto f = stack.frame(k);
        for (std::size_t i = 0; i < px.size(); ++i)
            px[i] = static_cast<char>(static_cast<unsigned char>(std::lround(std::clamp(f[i], 0.0F, 1.0F) * 255.0F)));
        out.write(px.data(), static_cast<std::streamsize>(px.size()));
    }
}

FrameStack read_pgm_dir(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw FormatError("not a directory: " + dir.string());
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const std::string name = entry.path().filename().string();
        if (name.size() == 16 && name.starts_with("frame_") && name.ends_with(".pgm")) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw FormatError("no frame_%06d.pgm files in " + dir.string());

    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<float> data;
    for (const auto& file : files) {
        auto in = open_in(file, std::ios::binary);
        if (pgm_token(in) != "P5") throw FormatError(file.string() + ": not a binary PGM (offset 0)");
        std::size_t w = 0;
        std::size_t h = 0;
        int maxval = 0;
        try {
            w = std::stoul(pgm_token(in));
            h = std::stoul(pgm_token(in));
            maxval = std::stoi(pgm_token(in));
        } catch (const std::exception&) {
            throw FormatError(file.string() + ": malformed PGM header");
        }
        if (maxval != 255) throw FormatError(file.string() + ": only 8-bit PGM (maxval 255) is supported");
        if (rows == 0) {
            rows = h;
            cols = w;
        } else if (h != rows || w != cols) {
            throw FormatError(file.string() + ": frame size differs from the first frame");
        }
        std::vector<unsigned char> px(w * h);
        in.read(reinterpret_cast<char*>(px.data()), static_cast<std::streamsize>(px.size()));
        if (static_cast<std::size_t>(in.gcount()) != px.size())
            throw FormatError(file.string() + ": truncated pixel data at offset " + std::to_string(in.gcount()));
        for (unsigned char p : px) data.push_back(static_cast<float>(p) / 255.0F);
    }
    return FrameStack(files.size(), rows, cols, std::move(data));
}

FrameStack read_frames(const fs::path& path) {
    if (fs::is_directory(path)) return read_pgm_dir(path);
    auto in = open_in(path, std::ios::binary);
    return read_vsr1(in);
}

void write_frames(const fs::path& path, const FrameStack& stack) {
    auto out = open_out(path, std::ios::binary);
    write_vsr1(out, stack);
}

namespace {

struct Record {
    int frame = 0;
    int id = 0;
    BBox box;
    double conf = 0.0;
};

std::string mot_line(int frame, int id, const BBox& b, double conf) {
    return std::to_string(frame) + "," + std::to_string(id) + "," + fixed6(b.x) + "," + fixed6(b.y) + "," + fixed6(b.w) +
           "," + fixed6(b.h) + "," + fixed6(conf) + ",-1,-1,-1\n";
}

template <typename T>
T parse_number(std::string_view field, std::size_t line, const char* name) {
    while (!field.empty() && std::isspace(static_cast<unsigned char>(field.front()))) field.remove_prefix(1);
    while (!field.empty() && std::isspace(static_cast<unsigned char>(field.back()))) field.remove_suffix(1);
    T value{};
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc{} || ptr != field.data() + field.size())
        throw FormatError("line " + std::to_string(line) + ": bad " + name + " field '" + std::string(field) + "'");
    return value;
}

std::vector<Record> read_records(std::istream& in) {
    std::vector<Record> out;
    std::string text;
    std::size_t line_no = 0;
    while (std::getline(in, text)) {
        ++line_no;
        if (!text.empty() && text.back() == '\r') text.pop_back();
        if (text.find_first_not_of(" \t") == std::string::npos) continue;
        std::vector<std::string_view> fields;
        std::string_view rest(text);
        while (true) {
            const auto comma = rest.find(',');
            fields.push_back(rest.substr(0, comma));
            if (comma == std::string_view::npos) break;
            rest.remove_prefix(comma + 1);
        }
        if (fields.size() != 10)
            throw FormatError("line " + std::to_string(line_no) + ": expected 10 fields, got " + std::to_string(fields.size()));
        Record r;
        r.frame = parse_number<int>(fields[0], line_no, "frame");
        r.id = parse_number<int>(fields[1], line_no, "id");
        r.box = {parse_number<double>(fields[2], line_no, "x"), parse_number<double>(fields[3], line_no, "y"),
                 parse_number<double>(fields[4], line_no, "w"), parse_number<double>(fields[5], line_no, "h")};
        r.conf = parse_number<double>(fields[6], line_no, "conf");
        for (std::size_t i = 7; i < 10; ++i) (void)parse_number<double>(fields[i], line_no, "trailing");
        if (r.frame < 1) throw FormatError("line " + std::to_string(line_no) + ": frame must be >= 1");
        if (!r.box.valid()) throw FormatError("line " + std::to_string(line_no) + ": box needs w > 0 and h > 0");
        if (!(r.conf >= 0.0 && r.conf <= 1.0))
            throw FormatError("line " + std::to_string(line_no) + ": confidence outside [0,1]");
        out.push_back(r);
    }
    return out;
}

}  // namespace

void write_detections(std::ostream& out, const DetectionsByFrame& dets) {
    for (std::size_t k = 0; k < dets.size(); ++k)
        for (const auto& d : dets[k]) out << mot_line(static_cast<int>(k + 1), -1, d.box, d.confidence);
}

DetectionsByFrame read_detections(std::istream& in) {
    DetectionsByFrame out;
    for (const Record& r : read_records(in)) {
        if (static_cast<std::size_t>(r.frame) > out.size()) out.resize(static_cast<std::size_t>(r.frame));
        out[static_cast<std::size_t>(r.frame - 1)].push_back({r.frame, r.box, r.conf});
    }
    return out;
}

void write_trajectories(std::ostream& out, const std::vector<Trajectory>& trajs) {
    std::vector<std::pair<std::pair<int, int>, BBox>> rows;
    for (const auto& t : trajs)
        for (const auto& s : t.samples) rows.push_back({{s.frame, t.id}, s.box});
    std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (const auto& [key, box] : rows) out << mot_line(key.first, key.second, box, 1.0);
}

std::vector<Trajectory> read_trajectories(std::istream& in) {
    std::map<int, std::map<int, BBox>> by_id;
    for (const Record& r : read_records(in)) {
        if (r.id <= 0) throw FormatError("track/GT record with non-positive id " + std::to_string(r.id));
        if (!by_id[r.id].emplace(r.frame, r.box).second)
            throw FormatError("duplicate record for id " + std::to_string(r.id) + " at frame " + std::to_string(r.frame));
    }
    std::vector<Trajectory> out;
    for (const auto& [id, samples] : by_id) {
        Trajectory t;
        t.id = id;
        for (const auto& [frame, box] : samples) t.samples.push_back({frame, box});
        out.push_back(std::move(t));
    }
    return out;
}

DetectionsByFrame read_detections(const fs::path& path) {
    auto in = open_in(path);
    try {
        return read_detections(in);
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

void write_detections(const fs::path& path, const DetectionsByFrame& dets) {
    auto out = open_out(path);
    write_detections(out, dets);
}

std::vector<Trajectory> read_trajectories(const fs::path& path) {
    auto in = open_in(path);
    try {
        return read_trajectories(in);
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

void write_trajectories(const fs::path& path, const std::vector<Trajectory>& trajs) {
    auto out = open_out(path);
    write_trajectories(out, trajs);
}

std::string report_csv(const metrics::MotReport& r) {
    const std::string mota = r.mota ? fixed6(*r.mota) : std::string("undefined");
    return "MOTA,FP,FN,IDSW,FM,GT\n" + mota + "," + std::to_string(r.fp) + "," + std::to_string(r.fn) + "," +
           std::to_string(r.idsw) + "," + std::to_string(r.fm) + "," + std::to_string(r.gt_boxes) + "\n";
}

std::string report_table(const metrics::MotReport& r) {
    std::ostringstream os;
    os << std::left << std::setw(8) << "metric" << "value\n";
    os << std::setw(8) << "MOTA" << (r.mota ? fixed6(*r.mota) : std::string("undefined")) << "\n";
    os << std::setw(8) << "FP" << r.fp << "\n";
    os << std::setw(8) << "FN" << r.fn << "\n";
    os << std::setw(8) << "IDSW" << r.idsw << "\n";
    os << std::setw(8) << "FM" << r.fm << "\n";
    os << std::setw(8) << "GT" << r.gt_boxes << "\n";
    return os.str();
}

std::string read_text(const fs::path& path) {
    auto in = open_in(path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_text(const fs::path& path, const std::string& text) {
    auto out = open_out(path);
    out << text;
}

}  // namespace vsartrack::io
