#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <unistd.h>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "ymh/cli.hpp"
#include "ymh/config.hpp"
#include "ymh/presets.hpp"
#include "ymh/render.hpp"
#include "ymh/snapshot.hpp"

using namespace ymh;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("ymh_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    static int& counter() {
        static int c = 0;
        return c;
    }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out << text;
}

std::string base_config(const fs::path& outdir) {
    std::ostringstream os;
    os << "grid.n = 16\n"
       << "grid.length = 1.0\n"
       << "fiber.kind = sphere\n"
       << "integrator.dt = 2e-4\n"
       << "integrator.max_time = 0.01\n"
       << "monitors.check_every = 5\n"
       << "initial.preset = ground\n"
       << "seed = 7\n"
       << "output_dir = " << outdir.string() << "\n";
    return os.str();
}

} // namespace

TEST_CASE("config parser: happy path and defaults") {
    TempDir tmp;
    std::istringstream in(base_config(tmp.path / "out"));
    RunConfig cfg = parse_config_stream(in);
    CHECK(cfg.grid.n == 16);
    CHECK(cfg.fiber.kind == FiberKind::Sphere);
    CHECK(cfg.fiber.central_element == 1.0);
    CHECK(cfg.integrator.scheme == Scheme::ExplicitEuler);
    CHECK(cfg.monitors.epsilon0 == 1.0);
    CHECK(cfg.monitors.ball_radii.size() == 3);
    CHECK(cfg.preset == "ground");
}

TEST_CASE("config parser: errors carry line numbers") {
    auto expect_error = [](const std::string& text, const std::string& needle) {
        std::istringstream in(text);
        try {
            parse_config_stream(in);
            FAIL("expected ConfigError");
        } catch (const ConfigError& e) {
            CHECK(std::string(e.what()).find(needle) != std::string::npos);
        }
    };
    expect_error("grid.n 16\n", "line 1");
    expect_error("grid.n = sixteen\n", "not an integer");
    expect_error(base_config("o") + "mystery.key = 1\n", "unknown key");
    expect_error(base_config("o") + "grid.n = 16\n", "duplicate");
    expect_error("grid.n = 16\ngrid.length = 1.0\n", "missing required");

    // fixed-step dt above the parabolic bound is rejected at parse time
    std::string bad = base_config("o");
    bad.replace(bad.find("2e-4"), 4, "1e-2");
    expect_error(bad, "cfl_safety");

    // a preset and a snapshot cannot both be given
    expect_error(base_config("o") + "initial.snapshot = nowhere.snap\n", "exactly one");
}

TEST_CASE("snapshot round trip is bitwise exact") {
    GridSpec g(16, 1.0);
    for (FiberModel m : {FiberModel::sphere(), FiberModel::plane()}) {
        TempDir tmp;
        FlowState s = make_random_smooth(g, m, 11, 0.5, 3);
        s.time = 0.625;
        const fs::path p = tmp.path / "a.snap";
        write_snapshot(p, s);
        FlowState r = read_snapshot(p);
        CHECK(r.time == s.time);
        CHECK(r.spec() == s.spec());
        CHECK(r.model().kind == m.kind);
        for (size_t i = 0; i < s.A.comp(1).size(); ++i) {
            CHECK(r.A.comp(1).data()[i] == s.A.comp(1).data()[i]);
            CHECK(r.A.comp(2).data()[i] == s.A.comp(2).data()[i]);
        }
        for (size_t i = 0; i < s.phi.points().size(); ++i) {
            CHECK(r.phi.points()[i].x == s.phi.points()[i].x);
            CHECK(r.phi.points()[i].y == s.phi.points()[i].y);
            CHECK(r.phi.points()[i].z == s.phi.points()[i].z);
        }
        // a second write of the reread state is byte-identical
        const fs::path q = tmp.path / "b.snap";
        write_snapshot(q, r);
        CHECK(slurp(p) == slurp(q));
    }
}

TEST_CASE("snapshot reader rejects malformed files") {
    TempDir tmp;
    GridSpec g(16, 1.0);
    FlowState s = make_ground(g, FiberModel::sphere());
    const fs::path p = tmp.path / "s.snap";
    write_snapshot(p, s);

    std::string bytes = slurp(p);
    spit(tmp.path / "trunc.snap", bytes.substr(0, bytes.size() / 2));
    CHECK_THROWS_AS(read_snapshot(tmp.path / "trunc.snap"), BadSnapshot);

    std::string padded = bytes + std::string(8, '\0');
    spit(tmp.path / "padded.snap", padded);
    CHECK_THROWS_AS(read_snapshot(tmp.path / "padded.snap"), BadSnapshot);

    std::string magic = bytes;
    magic[0] = 'X';
    spit(tmp.path / "magic.snap", magic);
    CHECK_THROWS_AS(read_snapshot(tmp.path / "magic.snap"), BadSnapshot);

    std::string version = bytes;
    version[4] = 9;
    spit(tmp.path / "version.snap", version);
    CHECK_THROWS_AS(read_snapshot(tmp.path / "version.snap"), BadSnapshot);
}

TEST_CASE("cmd_run: ground preset writes a flat series and empty event list") {
    TempDir tmp;
    const fs::path outdir = tmp.path / "out";
    const fs::path cfgpath = tmp.path / "run.cfg";
    spit(cfgpath, base_config(outdir));
    CHECK(cmd_run(cfgpath.string()) == 0);

    const std::string csv = slurp(outdir / "series.csv");
    std::istringstream lines(csv);
    std::string line;
    std::getline(lines, line);
    CHECK(line.rfind("time,", 0) == 0);
    int rows = 0;
    while (std::getline(lines, line)) {
        ++rows;
        // energy column stays exactly zero
        const size_t c1 = line.find(',');
        const size_t c2 = line.find(',', c1 + 1);
        CHECK(line.substr(c1 + 1, c2 - c1 - 1) == "0");
    }
    CHECK(rows >= 2);

    const std::string events = slurp(outdir / "events.txt");
    CHECK(events.find("event 1") == std::string::npos);
    CHECK(events.find("accounting") != std::string::npos);
    CHECK(fs::exists(outdir / "final.snap"));
}

TEST_CASE("cmd_run: malformed config exits 1 without output") {
    TempDir tmp;
    const fs::path outdir = tmp.path / "out";
    const fs::path cfgpath = tmp.path / "bad.cfg";
    spit(cfgpath, "grid.n == 16\n");
    CHECK(cmd_run(cfgpath.string()) == 1);
    CHECK_FALSE(fs::exists(outdir));
}

TEST_CASE("cmd_run is deterministic at fixed seed") {
    TempDir tmp;
    const fs::path out1 = tmp.path / "out1", out2 = tmp.path / "out2";
    std::string cfg = "grid.n = 16\ngrid.length = 1.0\nfiber.kind = sphere\n"
                      "integrator.dt = 2e-4\nintegrator.max_time = 0.01\n"
                      "monitors.check_every = 5\ninitial.preset = random-smooth\n"
                      "initial.amplitude = 0.4\ninitial.cutoff = 3\nseed = 99\n";
    spit(tmp.path / "a.cfg", cfg + "output_dir = " + out1.string() + "\n");
    spit(tmp.path / "b.cfg", cfg + "output_dir = " + out2.string() + "\n");
    REQUIRE(cmd_run((tmp.path / "a.cfg").string()) == 0);
    REQUIRE(cmd_run((tmp.path / "b.cfg").string()) == 0);
    CHECK(slurp(out1 / "series.csv") == slurp(out2 / "series.csv"));
    CHECK(slurp(out1 / "final.snap") == slurp(out2 / "final.snap"));
    CHECK(slurp(out1 / "events.txt") == slurp(out2 / "events.txt"));
}

TEST_CASE("cmd_run: non-finite initial data exits 2") {
    TempDir tmp;
    GridSpec g(16, 1.0);
    FlowState s = make_ground(g, FiberModel::sphere());
    s.A.comp(1)(3, 4) = std::numeric_limits<double>::infinity();
    const fs::path snap = tmp.path / "bad.snap";
    write_snapshot(snap, s);
    std::string cfg = "grid.n = 16\ngrid.length = 1.0\nfiber.kind = sphere\n"
                      "integrator.dt = 2e-4\nintegrator.max_time = 0.01\n"
                      "initial.snapshot = " + snap.string() + "\n"
                      "output_dir = " + (tmp.path / "out").string() + "\n";
    spit(tmp.path / "run.cfg", cfg);
    CHECK(cmd_run((tmp.path / "run.cfg").string()) == 2);
}

TEST_CASE("snapshot starts validate grid and fiber against the config") {
    TempDir tmp;
    GridSpec g(16, 1.0);
    FlowState s = make_ground(g, FiberModel::plane());
    const fs::path snap = tmp.path / "p.snap";
    write_snapshot(snap, s);

    auto cfg_with = [&](const std::string& kind) {
        std::istringstream in("grid.n = 16\ngrid.length = 1.0\nfiber.kind = " + kind +
                              "\nfiber.central_element = 0.75\nintegrator.dt = 2e-4\n"
                              "integrator.max_time = 0.01\ninitial.snapshot = " + snap.string() +
                              "\n");
        return parse_config_stream(in);
    };
    CHECK_THROWS_AS(cfg_with("sphere").make_initial(), ConfigError);
    FlowState loaded = cfg_with("plane").make_initial();
    CHECK(loaded.model().central_element == 0.75);
}

TEST_CASE("cmd_run: periodic snapshots appear when requested") {
    TempDir tmp;
    const fs::path outdir = tmp.path / "out";
    spit(tmp.path / "run.cfg", base_config(outdir) + "snapshot_every = 2\n");
    REQUIRE(cmd_run((tmp.path / "run.cfg").string()) == 0);
    CHECK(fs::exists(outdir / "state_2.snap"));
    CHECK(fs::exists(outdir / "state_4.snap"));
    FlowState mid = read_snapshot(outdir / "state_2.snap");
    CHECK(mid.time > 0.0);
}

TEST_CASE("cmd_run: bubble preset produces one quantized event in events.txt") {
    TempDir tmp;
    const fs::path outdir = tmp.path / "out";
    GridSpec g(128, 1.0);
    std::ostringstream cfg;
    cfg << "grid.n = 128\n"
        << "grid.length = 1.0\n"
        << "fiber.kind = sphere\n"
        << "integrator.dt = " << parabolic_dt_bound(g, 0.9) << "\n"
        << "integrator.adapt = true\n"
        << "integrator.max_time = 0.03\n"
        << "monitors.check_every = 10\n"
        << "monitors.ball_radii = " << 3.0 * g.spacing << ",0.0625,0.125,0.25\n"
        << "initial.preset = bubble\n"
        << "initial.lambda = 0.03125\n"
        << "output_dir = " << outdir.string() << "\n";
    spit(tmp.path / "bubble.cfg", cfg.str());
    REQUIRE(cmd_run((tmp.path / "bubble.cfg").string()) == 0);

    const std::string events = slurp(outdir / "events.txt");
    CHECK(events.find("event 1") != std::string::npos);
    CHECK(events.find("event 2") == std::string::npos);
    CHECK(events.find("quanta = 1") != std::string::npos);
    CHECK(events.find("total_quanta = 1") != std::string::npos);
}

TEST_CASE("cmd_gauge_fix reduces an exact form to nearly zero") {
    TempDir tmp;
    GridSpec g(32, 1.0);
    ScalarGrid psi(g);
    for (int iy = 0; iy < g.n; ++iy)
        for (int ix = 0; ix < g.n; ++ix)
            psi(ix, iy) = std::sin(2.0 * kPi * ix / g.n) + 0.5 * std::cos(2.0 * kPi * iy / g.n);
    FlowState s = make_ground(g, FiberModel::sphere());
    s.A.form = gradient(psi);

    const fs::path in = tmp.path / "in.snap", out = tmp.path / "out.snap";
    write_snapshot(in, s);
    CHECK(cmd_gauge_fix(in.string(), out.string()) == 0);
    FlowState fixed = read_snapshot(out);
    CHECK(norm_l2(fixed.A.form) <= 1e-9);

    spit(tmp.path / "garbage.snap", "not a snapshot");
    CHECK(cmd_gauge_fix((tmp.path / "garbage.snap").string(), out.string()) == 1);

    // a half-period harmonic part survives the fix: holonomy pi, no winding
    FlowState h = make_ground(g, FiberModel::sphere());
    for (size_t i = 0; i < h.A.comp(1).size(); ++i)
        h.A.comp(1).data()[i] = kPi / g.length;
    const fs::path hin = tmp.path / "half.snap", hout = tmp.path / "half_fixed.snap";
    write_snapshot(hin, h);
    REQUIRE(cmd_gauge_fix(hin.string(), hout.string()) == 0);
    auto [h1, h2] = holonomy(read_snapshot(hout).A);
    CHECK(std::abs(wrap_angle(h1 - kPi)) <= 1e-10);
    CHECK(std::abs(h2) <= 1e-10);
}

TEST_CASE("cmd_render: uniform field, bubble peak, and bad selector") {
    TempDir tmp;
    GridSpec g(128, 1.0);

    const fs::path gs = tmp.path / "ground.snap";
    write_snapshot(gs, make_ground(g, FiberModel::sphere()));
    const fs::path img = tmp.path / "ground.pgm";
    REQUIRE(cmd_render(gs.string(), img.string(), "density") == 0);
    std::string pgm = slurp(img);
    CHECK(pgm.rfind("P5\n128 128\n255\n", 0) == 0);
    const std::string pix = pgm.substr(pgm.find("255\n") + 4);
    REQUIRE(pix.size() == size_t(128) * 128);
    for (char c : pix) CHECK(c == pix[0]);

    const int cx = 40, cy = 80;
    const fs::path bs = tmp.path / "bubble.snap";
    write_snapshot(bs, make_bubble_fixture(g, g.length / 32.0, cx, cy));
    const fs::path bimg = tmp.path / "bubble.pgm";
    REQUIRE(cmd_render(bs.string(), bimg.string(), "density") == 0);
    std::string bpgm = slurp(bimg);
    const std::string bpix = bpgm.substr(bpgm.find("255\n") + 4);
    size_t best = 0;
    for (size_t i = 0; i < bpix.size(); ++i)
        if (static_cast<unsigned char>(bpix[i]) > static_cast<unsigned char>(bpix[best])) best = i;
    const int by = int(best) / g.n, bx = int(best) % g.n;
    CHECK(g.node_distance(bx, by, cx, cy) <= 2.0 * g.spacing + 1e-12);

    CHECK(cmd_render(bs.string(), (tmp.path / "x.pgm").string(), "vorticity") == 1);
}
