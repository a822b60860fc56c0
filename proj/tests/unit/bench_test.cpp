#include "dmce/bench/commands.hpp"
#include "dmce/bench/config.hpp"
#include "dmce/bench/results.hpp"

#include <doctest.h>

#include <fstream>
#include <sstream>

using namespace dmce;
using namespace dmce::bench;

namespace {

std::size_t count(const std::string& text, const std::string& needle)
{
    std::size_t n = 0;
    for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) {
        ++n;
    }
    return n;
}

std::vector<ResultRow> grid_rows()
{
    std::vector<ResultRow> rows;
    for (const char* m : {"lmmse", "dm", "ls"}) {
        for (double snr : {30.0, 0.0, 20.0, 10.0}) {
            rows.push_back({m, snr, 1.0, 0, -snr / 2.0 - (m[0] == 'd' ? 3.0 : 0.0), 1.25, 100});
        }
    }
    return rows;
}

} // namespace

TEST_CASE("profiles")
{
    const auto desk = profile("desk");
    CHECK(desk.system.n_tx == 16);
    CHECK(desk.system.n_rx == 4);
    CHECK(desk.n_train == 10000);
    CHECK(desk.n_val == 100);
    CHECK(desk.n_test == 100);
    CHECK(desk.t_max == 100);
    CHECK(desk.sure.mc_epsilon == 1e-2);
    const auto paper = profile("paper");
    CHECK(paper.system.n_tx == 64);
    CHECK(paper.system.n_rx == 16);
    CHECK(paper.n_train == 100000);
    CHECK(paper.train.epochs == 500);
    CHECK(paper.sure.denoiser_epochs == 100);
    CHECK(paper.sure.dm_epochs == 500);
    CHECK(paper.sure.mc_epsilon == 1e-5);
    CHECK_NOTHROW(desk.validate());
    CHECK_NOTHROW(paper.validate());
    CHECK_THROWS_AS(profile("laptop"), InvalidArgument);
}

TEST_CASE("config text")
{
    auto cfg = profile("desk");
    apply_config_text(cfg, R"(# comment
system.n_tx = 8
system.n_rx=2   # trailing comment

sweep.snr_db = 0, 5,10
sweep.methods = dm, ls
sweep.bits = 1,3
estimator.grad_scale = 1.5
train.learning_rate = 2e-4
seed = 42
sweep.threads = 2
)");
    CHECK(cfg.system.n_tx == 8);
    CHECK(cfg.system.n_rx == 2);
    CHECK(cfg.snr_db == std::vector<double>{0, 5, 10});
    CHECK(cfg.methods == std::vector<std::string>{"dm", "ls"});
    CHECK(cfg.bits == std::vector<int>{1, 3});
    CHECK(cfg.estimator.grad_scale == 1.5);
    CHECK(cfg.train.learning_rate == 2e-4);
    CHECK(cfg.seed == 42);
    CHECK(cfg.threads == 2);

    const auto message = [&](const std::string& text) {
        try {
            apply_config_text(cfg, text, "exp.cfg");
        } catch (const FormatError& e) {
            return std::string(e.what());
        }
        return std::string();
    };
    CHECK(message("seed = 1\nbogus.key = 3\n").find("exp.cfg:2") != std::string::npos);
    CHECK(message("seed = 1\nbogus.key = 3\n").find("bogus.key") != std::string::npos);
    CHECK(message("system.n_tx = four\n").find("exp.cfg:1") != std::string::npos);
    CHECK(message("\n\nno equals sign\n").find("exp.cfg:3") != std::string::npos);
    CHECK(message("sweep.snr_db = ,\n").find("exp.cfg:1") != std::string::npos);

    auto bad = profile("desk");
    bad.methods = {"dm", "magic"};
    CHECK_THROWS_AS(bad.validate(), InvalidArgument);
    bad = profile("desk");
    bad.methods.clear();
    CHECK_THROWS_AS(bad.validate(), InvalidArgument);
    bad = profile("desk");
    bad.bits = {9};
    CHECK_THROWS_AS(bad.validate(), InvalidArgument);

    const auto path = std::filesystem::temp_directory_path() / "dmce_bench_cfg.txt";
    {
        std::ofstream os(path);
        os << "data.n_test = 7\n";
    }
    auto from_file = profile("desk");
    apply_config_file(from_file, path);
    CHECK(from_file.n_test == 7);
    CHECK_THROWS_AS(apply_config_file(from_file, path.string() + ".missing"), IoError);
}

TEST_CASE("csv round trip and ordering")
{
    auto rows = grid_rows();
    rows[0].nmse_db = -12.345678901234567;
    rows[1].latency_ms = 0.1 + 0.2;
    sort_rows(rows);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& a = rows[i - 1];
        const auto& b = rows[i];
        CHECK((a.method < b.method || (a.method == b.method && a.snr_db < b.snr_db)));
    }
    const std::string text = format_csv(rows);
    CHECK(text.substr(0, text.find('\n')) == "method,snr_db,alpha,bits,nmse_db,latency_ms,n");
    CHECK(count(text, "\n") == rows.size() + 1);
    CHECK(parse_csv(text) == rows);

    const auto error_line = [](const std::string& t) {
        try {
            parse_csv(t);
        } catch (const FormatError& e) {
            return std::string(e.what());
        }
        return std::string();
    };
    const std::string header = std::string(kCsvHeader) + "\n";
    CHECK(error_line(header + "dm,0,1,0,-3,1,100\ndm,10,1,0,abc,1,100\n").find("line 3") != std::string::npos);
    CHECK(error_line(header + "dm,0,1,0\n").find("line 2") != std::string::npos);
    CHECK(error_line("method,snr\n").find("line 1") != std::string::npos);
    CHECK(error_line(header + "dm,0,1,0,-3,1,0\n").find("line 2") != std::string::npos);
    CHECK(error_line(header + "dm,0,1,0,nan,1,5\n").find("line 2") != std::string::npos);
    CHECK(parse_csv(header).empty());

    const auto path = std::filesystem::temp_directory_path() / "dmce_bench_rows.csv";
    write_csv(path, rows);
    CHECK(read_csv(path) == rows);
}

TEST_CASE("median latency drops warm-up calls")
{
    CHECK(median_latency({100.0, 90.0, 80.0, 1.0, 3.0, 2.0}) == 2.0);
    CHECK(median_latency({100.0, 90.0, 80.0, 1.0, 2.0, 3.0, 4.0}) == 2.5);
    CHECK(median_latency({5.0, 1.0}) == 3.0);
    CHECK_THROWS_AS(median_latency({}), InvalidArgument);
    CHECK(median_latency({9.0, 9.0, 9.0, 4.0}, 0) == 9.0);
}

TEST_CASE("charts")
{
    const auto rows = grid_rows();
    const auto charts = render_charts(rows);
    REQUIRE(charts.size() == 1);
    CHECK(charts[0].file_name == "nmse_alpha1_bits0.svg");
    CHECK(count(charts[0].svg, "<polyline") == 3);
    CHECK(charts[0].svg.rfind("<svg", 0) == 0);
    CHECK(charts[0].svg.find(">lmmse</text>") != std::string::npos);
    CHECK(render_charts(rows)[0].svg == charts[0].svg);

    auto mixed = rows;
    mixed.push_back({"dm", 10.0, 0.5, 0, -4.0, 1.0, 10});
    mixed.push_back({"dm", 10.0, 1.0, 1, -2.0, 1.0, 10});
    mixed.push_back({"a<b&c", 0.0, 1.0, 1, -1.0, 1.0, 10});
    const auto several = render_charts(mixed);
    REQUIRE(several.size() == 3);
    std::vector<std::string> names;
    for (const auto& c : several) {
        names.push_back(c.file_name);
    }
    CHECK(std::find(names.begin(), names.end(), "nmse_alpha0.5_bits0.svg") != names.end());
    CHECK(std::find(names.begin(), names.end(), "nmse_alpha1_bits1.svg") != names.end());
    for (const auto& c : several) {
        CHECK(c.svg.find("a<b") == std::string::npos);
    }
    CHECK_THROWS_AS(render_charts({}), InvalidArgument);
}

TEST_CASE("seed derivation")
{
    CHECK(derive_seed(1, {2, 3}) == derive_seed(1, {2, 3}));
    CHECK(derive_seed(1, {2, 3}) != derive_seed(1, {3, 2}));
    CHECK(derive_seed(1, {2}) != derive_seed(2, {2}));
    CHECK(derive_seed(7, {}) == 7);
}

TEST_CASE("sweep grid on a tiny system")
{
    auto cfg = profile("desk");
    cfg.system.n_tx = 4;
    cfg.system.n_rx = 2;
    cfg.methods = {"ls", "lmmse", "lasso"};
    cfg.snr_db = {0, 10, 20, 30};
    cfg.alpha = {1.0, 0.5};
    cfg.lasso_grid = {1e-2, 1e-1};
    cfg.lasso_iters = 50;
    SweepInputs in;
    SystemConfig sys = cfg.system;
    in.train = generate_dataset(sys, cfg.cluster, 300, 1);
    in.val = generate_dataset(sys, cfg.cluster, 10, 2);
    in.test = generate_dataset(sys, cfg.cluster, 12, 3);
    const auto rows = run_sweep(cfg, in);
    CHECK(rows.size() == 3 * 4 * 2);
    for (const auto& r : rows) {
        CHECK(r.n == 12);
        CHECK(std::isfinite(r.nmse_db));
        CHECK(r.latency_ms >= 0.0);
    }
    auto sorted = rows;
    sort_rows(sorted);
    CHECK(sorted == rows);

    // Worker count changes nothing but timing.
    auto serial = cfg;
    serial.threads = 1;
    auto parallel = cfg;
    parallel.threads = 3;
    const auto a = run_sweep(serial, in);
    const auto b = run_sweep(parallel, in);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].method == b[i].method);
        CHECK(a[i].nmse_db == b[i].nmse_db);
    }

    // LMMSE beats LS at low SNR with full pilots.
    const auto find = [&](const std::string& m, double snr) {
        return std::find_if(rows.begin(), rows.end(), [&](const ResultRow& r) {
            return r.method == m && r.snr_db == snr && r.alpha == 1.0;
        })->nmse_db;
    };
    CHECK(find("lmmse", 0) < find("ls", 0));

    cfg.methods = {"dm"};
    CHECK_THROWS_AS(run_sweep(cfg, in), InvalidArgument);
}
