// SPDX-License-Identifier: Apache-2.0
// Drives the dmce executable end to end on a tiny system: gen-data, train, sweep, plot.

#include "dmce/bench/results.hpp"

#include <doctest.h>
#include <json.hpp>

#include <array>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

const char* const kTinyConfig = R"(# tiny system so the whole pipeline runs in seconds
system.n_tx = 4
system.n_rx = 2
data.n_train = 200
data.n_val = 10
data.n_test = 8
model.t_max = 20
model.s_max = 8
model.s_init = 8
train.epochs = 3
train.batch_size = 32
sweep.snr_db = 0, 10, 20, 30
sweep.methods = dm, ls, lmmse
sweep.threads = 2
)";

std::string slurp(const fs::path& p)
{
    std::ifstream is(p, std::ios::binary);
    REQUIRE_MESSAGE(is, "cannot open " << p);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name)
{
    const fs::path dir = fs::temp_directory_path() / ("dmce_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

struct Run {
    int status = 0;
    std::string err;
};

Run run_cli(const std::string& args, const fs::path& dir)
{
    const fs::path err = dir / "stderr.txt";
    const std::string cmd = std::string("\"") + DMCE_CLI_PATH + "\" " + args + " > \"" + (dir / "stdout.txt").string() +
                            "\" 2> \"" + err.string() + "\"";
    const int raw = std::system(cmd.c_str());
    Run r;
    r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    r.err = slurp(err);
    return r;
}

std::uint32_t u32_at(const std::string& bytes, std::size_t off)
{
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) {
        v = (v << 8) | static_cast<unsigned char>(bytes[off + i]);
    }
    return v;
}

void pipeline(const fs::path& dir, const std::string& seed)
{
    std::ofstream(dir / "tiny.cfg") << kTinyConfig;
    const std::string common = "--config \"" + (dir / "tiny.cfg").string() + "\" --out \"" + dir.string() +
                               "\" --seed " + seed;
    for (const char* cmd : {"gen-data", "train", "sweep", "plot"}) {
        const Run r = run_cli(std::string(cmd) + " " + common, dir);
        INFO(cmd << " stderr: " << r.err);
        REQUIRE(r.status == 0);
    }
}

} // namespace

TEST_CASE("full pipeline writes well-formed artifacts")
{
    const fs::path dir = scratch("pipeline");
    pipeline(dir, "7");

    const std::array<std::pair<const char*, std::uint32_t>, 3> sets{
        {{"train.bin", 200}, {"val.bin", 10}, {"test.bin", 8}}};
    for (const auto& [name, count] : sets) {
        const std::string bytes = slurp(dir / name);
        REQUIRE(bytes.size() >= 24);
        CHECK(bytes.substr(0, 8) == "DMCE0001");
        CHECK(u32_at(bytes, 8) == 2);
        CHECK(u32_at(bytes, 12) == 4);
        CHECK(u32_at(bytes, 16) == count);
        CHECK(u32_at(bytes, 20) == 0);
        CHECK(bytes.size() == 24 + std::size_t{count} * 2 * 2 * 4 * 4);
    }

    // train log: header plus one row per epoch, epochs counting from 1
    std::istringstream log(slurp(dir / "train_log.csv"));
    std::string line;
    std::getline(log, line);
    CHECK(line == "epoch,loss");
    int rows = 0;
    while (std::getline(log, line)) {
        ++rows;
        CHECK(line.rfind(std::to_string(rows) + ",", 0) == 0);
    }
    CHECK(rows == 3);

    const auto results = dmce::bench::read_csv(dir / "results.csv");
    REQUIRE(results.size() == 12);
    CHECK(slurp(dir / "results.csv").rfind(dmce::bench::kCsvHeader, 0) == 0);
    for (std::size_t i = 0; i < results.size(); ++i) {
        CHECK(results[i].n == 8);
        CHECK(results[i].method == (i < 4 ? "dm" : i < 8 ? "lmmse" : "ls"));
        CHECK(results[i].snr_db == static_cast<double>((i % 4) * 10));
    }

    const std::string svg = slurp(dir / "nmse_alpha1_bits0.svg");
    std::size_t polylines = 0;
    for (auto p = svg.find("<polyline"); p != std::string::npos; p = svg.find("<polyline", p + 1)) {
        ++polylines;
    }
    CHECK(polylines == 3);
}

TEST_CASE("same seed reproduces every artifact byte for byte")
{
    const fs::path a = scratch("repeat_a");
    const fs::path b = scratch("repeat_b");
    pipeline(a, "11");
    pipeline(b, "11");
    for (const char* f : {"train.bin", "val.bin", "test.bin", "dm.ckpt", "train_log.csv", "nmse_alpha1_bits0.svg"}) {
        INFO(f);
        CHECK(slurp(a / f) == slurp(b / f));
    }
    // latency varies run to run; everything else must match
    auto ra = dmce::bench::read_csv(a / "results.csv");
    auto rb = dmce::bench::read_csv(b / "results.csv");
    REQUIRE(ra.size() == rb.size());
    for (std::size_t i = 0; i < ra.size(); ++i) {
        ra[i].latency_ms = rb[i].latency_ms = 0.0;
        CHECK(ra[i] == rb[i]);
    }

    const fs::path c = scratch("repeat_c");
    std::ofstream(c / "tiny.cfg") << kTinyConfig;
    REQUIRE(run_cli("gen-data --config \"" + (c / "tiny.cfg").string() + "\" --out \"" + c.string() + "\" --seed 12", c)
                .status == 0);
    CHECK(slurp(a / "train.bin") != slurp(c / "train.bin"));
}

TEST_CASE("failures exit 1 with one JSON line on stderr")
{
    const fs::path dir = scratch("errors");
    const auto expect_error = [&](const std::string& args, const std::string& kind, const std::string& fragment) {
        const Run r = run_cli(args, dir);
        INFO(args << " -> " << r.err);
        CHECK(r.status == 1);
        REQUIRE(!r.err.empty());
        CHECK(r.err.find('\n') == r.err.size() - 1);
        const auto j = nlohmann::json::parse(r.err);
        CHECK(j.at("error") == kind);
        CHECK(j.at("message").get<std::string>().find(fragment) != std::string::npos);
    };

    // sweep without any data
    expect_error("sweep --out \"" + dir.string() + "\"", "io", "train.bin");

    std::ofstream(dir / "bad.cfg") << "system.n_tx = 4\nsystem.bogus = 1\n";
    expect_error("gen-data --config \"" + (dir / "bad.cfg").string() + "\" --out \"" + dir.string() + "\"", "format",
                 "bad.cfg:2");

    std::ofstream(dir / "bad.csv") << dmce::bench::kCsvHeader << "\ndm,0,1,0,-3,1.0,8\ndm,x,1,0,-3,1.0,8\n";
    expect_error("plot --csv \"" + (dir / "bad.csv").string() + "\" --out \"" + dir.string() + "\"", "format",
                 "line 3");

    expect_error("train --profile nope", "usage", "profile");
}
