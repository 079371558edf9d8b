#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "test_util.hpp"
#include "vsartrack/error.hpp"
#include "vsartrack/io.hpp"
#include "vsartrack/simulate.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace vsartrack;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("vsartrack_test_io_" + name);
    fs::remove_all(p);
    return p;
}

FrameStack random_stack(std::size_t t, std::size_t h, std::size_t w) {
    std::vector<float> data(t * h * w);
    for (float& v : data) v = static_cast<float>(testutil::uniform(0.0, 1.0));
    data.front() = 0.0F;
    data.back() = 1.0F;
    return {t, h, w, std::move(data)};
}

std::string message_of(const std::string& text) {
    std::istringstream in(text);
    try {
        (void)io::read_detections(in);
    } catch (const FormatError& e) {
        return e.what();
    }
    return "";
}

// Scene used for the committed golden files.
sim::SceneConfig golden_config() {
    sim::SceneConfig cfg;
    cfg.rows = 32;
    cfg.cols = 32;
    cfg.frames = 8;
    cfg.n_targets = 1;
    cfg.n_static = 1;
    cfg.seed = 7;
    return cfg;
}

}  // namespace

TEST_CASE("VSR1 round trip is exact") {
    const FrameStack s = random_stack(3, 5, 7);
    std::stringstream buf;
    io::write_vsr1(buf, s);
    CHECK(buf.str().size() == 16 + 4 * 3 * 5 * 7);
    CHECK(buf.str().substr(0, 4) == "VSR1");
    CHECK(buf.str()[4] == 3);
    CHECK(io::read_vsr1(buf) == s);

    const fs::path file = scratch("stack.vsr");
    io::write_frames(file, s);
    CHECK(io::read_frames(file) == s);
    fs::remove(file);
}

TEST_CASE("VSR1 errors carry offsets") {
    const FrameStack s = random_stack(2, 2, 2);
    std::stringstream buf;
    io::write_vsr1(buf, s);
    const std::string good = buf.str();

    auto fails_with = [](const std::string& bytes, const std::string& needle) {
        std::istringstream in(bytes);
        try {
            (void)io::read_vsr1(in);
        } catch (const FormatError& e) {
            return std::string(e.what()).find(needle) != std::string::npos;
        }
        return false;
    };
    std::string bad = good;
    bad[0] = 'X';
    CHECK(fails_with(bad, "offset 0"));
    CHECK(fails_with(good.substr(0, 10), "offset 10"));
    CHECK(fails_with(good.substr(0, 30), "offset 30"));
    bad = good;
    bad[16 + 4 * 5 + 3] = 0x40;  // sample 5 becomes 2.0 or larger
    CHECK(fails_with(bad, "offset 36"));
    CHECK_THROWS_AS(io::read_frames("/nonexistent/stack.vsr"), FormatError);
}

TEST_CASE("PGM directory round trip") {
    std::vector<float> data(2 * 3 * 4);
    for (std::size_t i = 0; i < data.size(); ++i) data[i] = static_cast<float>(i * 10 % 256) / 255.0F;
    const FrameStack s(2, 3, 4, data);
    const fs::path dir = scratch("pgm");
    io::write_pgm_dir(dir, s);
    CHECK(fs::exists(dir / "frame_000001.pgm"));
    CHECK(fs::exists(dir / "frame_000002.pgm"));
    CHECK(io::read_frames(dir) == s);

    std::ofstream(dir / "frame_000003.pgm", std::ios::binary) << "P5\n4 3\n65535\n";
    CHECK_THROWS_AS(io::read_pgm_dir(dir), FormatError);
    fs::remove_all(dir);
}

TEST_CASE("MOT CSV") {
    SUBCASE("example line") {
        std::istringstream in("1,-1,10,20,5,5,0.9,-1,-1,-1\n");
        const auto dets = io::read_detections(in);
        REQUIRE(dets.size() == 1);
        REQUIRE(dets[0].size() == 1);
        CHECK(dets[0][0] == Detection{1, {10, 20, 5, 5}, 0.9});
        std::ostringstream out;
        io::write_detections(out, dets);
        CHECK(out.str() == "1,-1,10.000000,20.000000,5.000000,5.000000,0.900000,-1,-1,-1\n");
    }
    SUBCASE("detections round trip") {
        DetectionsByFrame dets(4);
        for (std::size_t k = 0; k < 4; ++k)
            for (int i = 0; i < static_cast<int>(k); ++i)
                dets[k].push_back({static_cast<int>(k + 1), {i * 10.0 + 0.25, 3.5, 2.125, 4}, 0.5 + 0.125 * i});
        std::stringstream buf;
        io::write_detections(buf, dets);
        CHECK(io::read_detections(buf) == dets);
    }
    SUBCASE("trajectories round trip with sorted lines") {
        const std::vector<Trajectory> trajs{{2, {{1, {1, 1, 2, 2}}, {3, {2, 2, 2, 2}}}}, {1, {{2, {5, 5, 1.5, 1.5}}}}};
        std::stringstream buf;
        io::write_trajectories(buf, trajs);
        CHECK(buf.str() ==
              "1,2,1.000000,1.000000,2.000000,2.000000,1.000000,-1,-1,-1\n"
              "2,1,5.000000,5.000000,1.500000,1.500000,1.000000,-1,-1,-1\n"
              "3,2,2.000000,2.000000,2.000000,2.000000,1.000000,-1,-1,-1\n");
        const auto back = io::read_trajectories(buf);
        REQUIRE(back.size() == 2);
        CHECK(back[0] == trajs[1]);
        CHECK(back[1] == trajs[0]);
    }
    SUBCASE("empty input and blank lines") {
        std::istringstream empty("");
        CHECK(io::read_detections(empty).empty());
        std::istringstream blanks("\n\r\n1,-1,0,0,1,1,1,-1,-1,-1\r\n\n");
        CHECK(io::read_detections(blanks).size() == 1);
    }
    SUBCASE("errors name the line") {
        CHECK(message_of("1,-1,0,0,1,1,1,-1,-1,-1\n1,-1,0,0,1,1,1.5,-1,-1,-1\n").find("line 2") != std::string::npos);
        CHECK(message_of("1,-1,0,0,1,1,1,-1,-1\n").find("line 1: expected 10 fields") != std::string::npos);
        CHECK(message_of("\n\n1,-1,a,0,1,1,1,-1,-1,-1\n").find("line 3") != std::string::npos);
        CHECK(message_of("0,-1,0,0,1,1,1,-1,-1,-1\n").find("line 1") != std::string::npos);
        CHECK(message_of("1,-1,0,0,0,1,1,-1,-1,-1\n").find("line 1") != std::string::npos);
        std::istringstream dup("1,3,0,0,1,1,1,-1,-1,-1\n1,3,0,0,1,1,1,-1,-1,-1\n");
        CHECK_THROWS_AS(io::read_trajectories(dup), FormatError);
        std::istringstream neg("1,-1,0,0,1,1,1,-1,-1,-1\n");
        CHECK_THROWS_AS(io::read_trajectories(neg), FormatError);
    }
}

TEST_CASE("report formats") {
    metrics::MotReport r;
    r.mota = 0.7;
    r.fp = 1;
    r.fn = 2;
    r.fm = 1;
    r.gt_boxes = 10;
    CHECK(io::report_csv(r) == "MOTA,FP,FN,IDSW,FM,GT\n0.700000,1,2,0,1,10\n");
    r.mota.reset();
    CHECK(io::report_csv(r) == "MOTA,FP,FN,IDSW,FM,GT\nundefined,1,2,0,1,10\n");
    CHECK(io::report_table(r).find("undefined") != std::string::npos);
}

TEST_CASE("golden files match a regenerated scene byte for byte") {
    const sim::Scene scene = sim::generate(golden_config());
    std::ostringstream frames, gt;
    io::write_vsr1(frames, scene.stack);
    io::write_trajectories(gt, scene.ground_truth);
    const fs::path dir = VSARTRACK_GOLDEN_DIR;
    std::ifstream in(dir / "scene.vsr", std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream golden;
    golden << in.rdbuf();
    CHECK(golden.str() == frames.str());
    CHECK(io::read_text(dir / "gt.csv") == gt.str());
}
