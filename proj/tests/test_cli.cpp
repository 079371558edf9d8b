#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "vsartrack/io.hpp"
#include "vsartrack/metrics.hpp"

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace vsartrack;
namespace fs = std::filesystem;

namespace {

const fs::path& workdir() {
    static const fs::path dir = [] {
        const fs::path d = fs::temp_directory_path() / "vsartrack_test_cli";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

std::string at(const std::string& name) { return (workdir() / name).string(); }

// Exit status of `vsartrack <args>`; stdout goes to out.txt, stderr to err.txt.
int run(const std::string& args) {
    const std::string cmd = std::string(VSARTRACK_CLI) + " " + args + " >" + at("out.txt") + " 2>" + at("err.txt");
    const int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    REQUIRE(WIFEXITED(status));
    return WEXITSTATUS(status);
}

std::string slurp(const std::string& path) { return io::read_text(path); }

const char* kScene = "--rows 64 --cols 64 --frames 40 --targets 2 --seed 3";

void simulate_once() {
    static bool done = false;
    if (done) return;
    REQUIRE(run(std::string("simulate ") + kScene + " --out " + at("scene.vsr") + " --gt " + at("gt.csv")) == 0);
    done = true;
}

}  // namespace

TEST_CASE("pipeline happy path") {
    simulate_once();
    REQUIRE(run("pipeline --frames " + at("scene.vsr") + " --gt " + at("gt.csv") + " --tracks-out " + at("tracks.csv") +
                " --report " + at("report.csv") + " --render " + at("tracks.svg")) == 0);
    CHECK(fs::file_size(at("tracks.csv")) > 0);
    const std::string report = slurp(at("report.csv"));
    CHECK(report.starts_with("MOTA,FP,FN,IDSW,FM,GT\n"));
    CHECK(slurp(at("tracks.svg")).find("<polyline") != std::string::npos);
    CHECK(slurp(at("out.txt")).find("MOTA") != std::string::npos);
}

TEST_CASE("eval of ground truth against itself") {
    simulate_once();
    REQUIRE(run("eval --gt " + at("gt.csv") + " --hyp " + at("gt.csv") + " --report " + at("self.csv")) == 0);
    CHECK(slurp(at("self.csv")) == "MOTA,FP,FN,IDSW,FM,GT\n1.000000,0,0,0,0,80\n");
}

TEST_CASE("reruns are byte identical") {
    simulate_once();
    const std::string args = "pipeline --frames " + at("scene.vsr") + " --gt " + at("gt.csv") + " --report ";
    REQUIRE(run(args + at("r1.csv") + " --tracks-out " + at("t1.csv")) == 0);
    REQUIRE(run(args + at("r2.csv") + " --tracks-out " + at("t2.csv")) == 0);
    CHECK(slurp(at("t1.csv")) == slurp(at("t2.csv")));
    CHECK(slurp(at("r1.csv")) == slurp(at("r2.csv")));

    REQUIRE(run(std::string("simulate ") + kScene + " --out " + at("scene2.vsr")) == 0);
    CHECK(slurp(at("scene.vsr")) == slurp(at("scene2.vsr")));
}

TEST_CASE("pipeline equals the stages run one by one") {
    simulate_once();
    REQUIRE(run("pipeline --frames " + at("scene.vsr") + " --dets-out " + at("p_dets.csv") + " --tracks-out " +
                at("p_tracks.csv")) == 0);
    REQUIRE(run("enhance --frames " + at("scene.vsr") + " --out " + at("enh.vsr")) == 0);
    REQUIRE(run("detect --frames " + at("enh.vsr") + " --out " + at("s_dets.csv")) == 0);
    REQUIRE(run("track --dets " + at("s_dets.csv") + " --out " + at("s_coarse.csv")) == 0);
    REQUIRE(run("interp --in " + at("s_coarse.csv") + " --out " + at("s_tracks.csv")) == 0);
    CHECK(slurp(at("p_dets.csv")) == slurp(at("s_dets.csv")));
    CHECK(slurp(at("p_tracks.csv")) == slurp(at("s_tracks.csv")));

    SUBCASE("with decomposition and interpolation off") {
        REQUIRE(run("pipeline --frames " + at("scene.vsr") + " --mtsd off --gsi off --tracks-out " + at("p_off.csv")) == 0);
        REQUIRE(run("detect --input raw --frames " + at("scene.vsr") + " --out " + at("raw_dets.csv")) == 0);
        REQUIRE(run("track --dets " + at("raw_dets.csv") + " --out " + at("s_off.csv")) == 0);
        CHECK(slurp(at("p_off.csv")) == slurp(at("s_off.csv")));
    }
}

TEST_CASE("recall off fragments a track with alternating confidence") {
    std::ostringstream gt, dets;
    for (int f = 1; f <= 40; ++f) {
        const double x = 5.0 + f;
        char line[128];
        std::snprintf(line, sizeof line, "%d,1,%.6f,20.000000,6.000000,6.000000,1.000000,-1,-1,-1\n", f, x);
        gt << line;
        const double conf = f <= 5 || f % 2 == 0 ? 0.9 : 0.3;
        std::snprintf(line, sizeof line, "%d,-1,%.6f,20.000000,6.000000,6.000000,%.6f,-1,-1,-1\n", f, x, conf);
        dets << line;
    }
    io::write_text(at("alt_gt.csv"), gt.str());
    io::write_text(at("alt_dets.csv"), dets.str());
    long fm[2] = {0, 0};
    for (int on = 0; on < 2; ++on) {
        const std::string tracks = at(on ? "alt_on.csv" : "alt_off.csv");
        REQUIRE(run("track --dets " + at("alt_dets.csv") + " --out " + tracks + " --recall " + (on ? "on" : "off")) == 0);
        fm[on] = metrics::evaluate(io::read_trajectories(at("alt_gt.csv")), io::read_trajectories(tracks)).fm;
    }
    CHECK(fm[0] > fm[1]);
}

TEST_CASE("exit codes") {
    simulate_once();
    CHECK(run("pipeline --frames " + at("missing.vsr") + " --tracks-out " + at("x.csv")) == 2);
    CHECK(slurp(at("err.txt")).starts_with("vsartrack: "));
    CHECK(run("track --bogus") == 1);
    CHECK(run("track --dets " + at("gt.csv") + " --out " + at("x.csv") + " --tau-high 2") == 1);

    io::write_text(at("bad_key.json"), R"({"assoc": {"tau_hgh": 0.5}})");
    CHECK(run("--config " + at("bad_key.json") + " track --dets " + at("gt.csv") + " --out " + at("x.csv")) == 1);
    CHECK(slurp(at("err.txt")).find("assoc.tau_hgh") != std::string::npos);

    io::write_text(at("bad.csv"), "1,-1,0,0,1,1,7,-1,-1,-1\n");
    CHECK(run("track --dets " + at("bad.csv") + " --out " + at("x.csv")) == 2);
    CHECK(slurp(at("err.txt")).find("line 1") != std::string::npos);

    // A huge length scale with no noise makes the kernel matrix singular.
    io::write_text(at("line.csv"),
                   "1,1,0,0,2,2,1,-1,-1,-1\n2,1,1,0,2,2,1,-1,-1,-1\n3,1,2,0,2,2,1,-1,-1,-1\n4,1,3,0,2,2,1,-1,-1,-1\n");
    CHECK(run("interp --in " + at("line.csv") + " --out " + at("x.csv") + " --noise-var 0 --length-scale 1e9") == 3);
}
