// SPDX-License-Identifier: Apache-2.0
#include "dmce/bench/commands.hpp"

#include "dmce/baselines.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <fstream>
#include <mutex>
#include <ostream>
#include <thread>

namespace dmce::bench {

namespace {

enum Stream : std::uint64_t {
    kTrainData = 1,
    kValData = 2,
    kTestData = 3,
    kSureNoise = 4,
    kInit = 5,
    kTrain = 6,
    kPilots = 7,
    kObserve = 8,
    kEstimate = 9,
};

std::uint64_t key(double v) { return std::bit_cast<std::uint64_t>(v); }

int pilot_count(const ExperimentConfig& cfg, double alpha)
{
    const int n = static_cast<int>(std::lround(alpha * cfg.system.n_tx));
    if (n < 1) {
        throw InvalidArgument("sweep: pilot density " + std::to_string(alpha) + " gives no pilots");
    }
    return n;
}

SystemConfig data_system(const ExperimentConfig& cfg)
{
    SystemConfig s = cfg.system;
    s.n_pilot = s.n_tx;
    return s;
}

ChannelDataset load_dataset(const ExperimentConfig& cfg, const char* name)
{
    const auto path = cfg.data_path() / name;
    if (!std::filesystem::exists(path)) {
        throw IoError(path.string() + ": dataset not found (run gen-data first)");
    }
    ChannelDataset ds = read_dataset(path);
    if (ds.n_rx != cfg.system.n_rx || ds.n_tx != cfg.system.n_tx) {
        throw InvalidArgument(path.string() + ": dataset is " + std::to_string(ds.n_rx) + "x" +
                              std::to_string(ds.n_tx) + " but the config expects " +
                              std::to_string(cfg.system.n_rx) + "x" + std::to_string(cfg.system.n_tx));
    }
    return ds;
}

Checkpoint load_model(const ExperimentConfig& cfg, const std::filesystem::path& path)
{
    if (!std::filesystem::exists(path)) {
        throw IoError(path.string() + ": model checkpoint not found");
    }
    Checkpoint ck = read_checkpoint(path);
    if (ck.net.arch().n_rx != cfg.system.n_rx || ck.net.arch().n_tx != cfg.system.n_tx) {
        throw InvalidArgument(path.string() + ": checkpoint dimensions do not match the config");
    }
    if (ck.t_max < 1) {
        throw FormatError(path.string() + ": checkpoint has no diffusion length");
    }
    return ck;
}

DenoiserArch arch_of(const ExperimentConfig& cfg)
{
    return DenoiserArch::ramp(cfg.system.n_rx, cfg.system.n_tx, cfg.s_max, cfg.s_init);
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct GridPoint {
    const MeasurementModel* model;
    double snr_db;
    int bits;
    double alpha;
};

// Observations of `set` at one grid point. Quantized grid points share one quantizer
// designed from the mean received power over the whole set.
std::vector<Observation> observe_set(const ExperimentConfig& cfg, const GridPoint& g, const ChannelDataset& set,
                                     std::uint64_t tag)
{
    const std::uint64_t base = derive_seed(cfg.seed, {kObserve, tag, key(g.alpha), key(g.snr_db)});
    std::vector<Observation> obs;
    obs.reserve(static_cast<std::size_t>(set.size()));
    for (Index i = 0; i < set.size(); ++i) {
        Rng rng = make_stream(base, static_cast<std::uint64_t>(i));
        obs.push_back(observe(*g.model, set.sample(i), rng));
    }
    if (g.bits > 0) {
        std::vector<Vec> ys;
        for (const auto& o : obs) {
            ys.push_back(o.y);
        }
        const Quantizer q = design_quantizer(g.bits, received_power(ys));
        for (auto& o : obs) {
            o = quantize_observation(o, q);
        }
    }
    return obs;
}

// Runs body(0..n-1) on up to `threads` workers (0 = one per hardware thread). Each
// index is handled exactly once; the first exception is rethrown after all workers stop.
void for_each_index(std::size_t n, int threads, const std::function<void(std::size_t)>& body)
{
    std::size_t workers = threads > 0 ? static_cast<std::size_t>(threads) : std::thread::hardware_concurrency();
    workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(n, 1));
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) {
            body(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    body(i);
                } catch (...) {
                    const std::lock_guard lock(error_mutex);
                    if (!error) {
                        error = std::current_exception();
                    }
                    next = n;
                }
            }
        });
    }
    pool.clear();
    if (error) {
        std::rethrow_exception(error);
    }
}

double lasso_lambda(const Vec& y, const LinearOperator& op, double factor)
{
    return factor * (op.a().transpose() * y).cwiseAbs().maxCoeff();
}

} // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> parts)
{
    for (std::uint64_t p : parts) {
        seed = make_stream(seed, p)();
    }
    return seed;
}

std::vector<ResultRow> run_sweep(const ExperimentConfig& cfg, const SweepInputs& in, std::ostream* log)
{
    cfg.validate();
    const auto uses = [&](const std::string& m) {
        return std::find(cfg.methods.begin(), cfg.methods.end(), m) != cfg.methods.end();
    };
    const bool need_dm = uses("dm") || uses("dm-enhanced") || uses("dm-linear");
    if (need_dm && !in.dm) {
        throw InvalidArgument("sweep: a DM method was requested but no DM model is loaded");
    }
    if (uses("sure-dm") && !in.sure_dm) {
        throw InvalidArgument("sweep: sure-dm requested but no SURE-DM model is loaded");
    }
    if (in.test.size() == 0) {
        throw InvalidArgument("sweep: empty test set");
    }
    std::optional<SampleCovariance> cov;
    if (uses("lmmse")) {
        cov = SampleCovariance::from_samples(in.train.samples);
    }
    std::optional<NetworkPredictor> dm, sure_dm;
    std::optional<NoiseSchedule> dm_sched, sure_sched;
    if (in.dm) {
        dm.emplace(in.dm);
        dm_sched.emplace(linear_schedule(in.dm_t_max));
    }
    if (in.sure_dm) {
        sure_dm.emplace(in.sure_dm);
        sure_sched.emplace(linear_schedule(in.sure_dm_t_max));
    }
    std::vector<Vec> truth;
    for (Index i = 0; i < in.test.size(); ++i) {
        truth.push_back(in.test.sample(i));
    }

    std::vector<ResultRow> rows;
    for (double alpha : cfg.alpha) {
        const int n_pilot = pilot_count(cfg, alpha);
        Rng prng = make_stream(derive_seed(cfg.seed, {kPilots}), static_cast<std::uint64_t>(n_pilot));
        const PilotMatrix pilots = make_pilots(cfg.pilot, cfg.system.n_tx, n_pilot, prng);
        const MeasurementModel base = build_measurement(pilots, cfg.system.n_rx);
        for (double snr : cfg.snr_db) {
            const MeasurementModel model = base.with_snr_db(snr);
            std::optional<LmmseFilter> lmmse;
            if (cov) {
                lmmse.emplace(model.a(), cov->c_h, model.noise_var());
            }
            for (int bits : cfg.bits) {
                const GridPoint g{&model, snr, bits, alpha};
                const auto test_obs = observe_set(cfg, g, in.test, kTestData);
                for (const auto& method : cfg.methods) {
                    std::function<Vec(const Observation&, Index)> run;
                    const std::uint64_t est_base = derive_seed(cfg.seed, {kEstimate, key(alpha), key(snr),
                                                                          static_cast<std::uint64_t>(bits)});
                    auto dm_runner = [&](const NetworkPredictor& p, const NoiseSchedule& s, EstimatorConfig ec) {
                        return [&p, &s, ec, &model, est_base](const Observation& o, Index i) {
                            Rng rng = make_stream(est_base, static_cast<std::uint64_t>(i));
                            return estimate(o, model, p, s, ec, rng);
                        };
                    };
                    if (method == "dm" || method == "dm-enhanced" || method == "dm-linear") {
                        EstimatorConfig ec = cfg.estimator;
                        ec.enhanced = method == "dm-enhanced";
                        ec.likelihood = method == "dm-linear" ? LikelihoodKind::Linear : LikelihoodKind::Auto;
                        run = dm_runner(*dm, *dm_sched, ec);
                    } else if (method == "sure-dm") {
                        run = dm_runner(*sure_dm, *sure_sched, cfg.estimator);
                    } else if (method == "ls") {
                        run = [&](const Observation& o, Index) { return ls_estimate(o.y, model.op()); };
                    } else if (method == "lmmse") {
                        run = [&](const Observation& o, Index) { return lmmse->apply(o.y); };
                    } else if (method == "lasso") {
                        // Pick the lambda factor on the validation set for this grid point.
                        const auto val_obs = observe_set(cfg, g, in.val, kValData);
                        double best = cfg.lasso_grid.front();
                        double best_err = std::numeric_limits<double>::infinity();
                        for (double f : cfg.lasso_grid) {
                            double err = 0.0;
                            for (Index i = 0; i < in.val.size(); ++i) {
                                const auto& y = val_obs[static_cast<std::size_t>(i)].y;
                                err += nmse(lasso_estimate(y, model.op(), lasso_lambda(y, model.op(), f),
                                                           cfg.lasso_iters),
                                            in.val.sample(i));
                            }
                            if (err < best_err) {
                                best_err = err;
                                best = f;
                            }
                        }
                        run = [&, best](const Observation& o, Index) {
                            return lasso_estimate(o.y, model.op(), lasso_lambda(o.y, model.op(), best),
                                                  cfg.lasso_iters);
                        };
                    }
                    const auto n_test = static_cast<std::size_t>(in.test.size());
                    std::vector<Vec> est(n_test);
                    std::vector<double> ms(n_test);
                    for_each_index(n_test, cfg.threads, [&](std::size_t i) {
                        const auto t0 = std::chrono::steady_clock::now();
                        est[i] = run(test_obs[i], static_cast<Index>(i));
                        ms[i] = 1e3 * seconds_since(t0);
                    });
                    ResultRow row{method, snr, alpha, bits, nmse_db(est, truth), median_latency(ms),
                                  static_cast<long>(in.test.size())};
                    if (log != nullptr) {
                        *log << "sweep " << method << " alpha=" << alpha << " snr=" << snr << " bits=" << bits
                             << " nmse_db=" << row.nmse_db << " latency_ms=" << row.latency_ms << "\n";
                    }
                    rows.push_back(std::move(row));
                }
            }
        }
    }
    sort_rows(rows);
    return rows;
}

void cmd_gen_data(const ExperimentConfig& cfg, std::ostream& log)
{
    cfg.validate();
    const auto dir = cfg.data_path();
    std::filesystem::create_directories(dir);
    const SystemConfig sys = data_system(cfg);
    const std::pair<const char*, std::pair<Index, Stream>> sets[] = {
        {"train.bin", {cfg.n_train, kTrainData}},
        {"val.bin", {cfg.n_val, kValData}},
        {"test.bin", {cfg.n_test, kTestData}},
    };
    for (const auto& [name, spec] : sets) {
        const auto t0 = std::chrono::steady_clock::now();
        const auto ds = generate_dataset(sys, cfg.cluster, spec.first, derive_seed(cfg.seed, {spec.second}));
        write_dataset(dir / name, ds);
        log << "wrote " << (dir / name).string() << " (" << ds.size() << " samples, mean power "
            << mean_entry_power(ds) << ", " << seconds_since(t0) << " s)\n";
    }
}

void cmd_train(const ExperimentConfig& cfg, std::ostream& log)
{
    cfg.validate();
    const ChannelDataset data = load_dataset(cfg, "train.bin");
    Rng init = make_stream(derive_seed(cfg.seed, {kInit}), 0);
    auto net = Denoiser<float>::initialized(arch_of(cfg), init);
    TrainConfig tc = cfg.train;
    tc.seed = derive_seed(cfg.seed, {kTrain});
    const NoiseSchedule schedule = linear_schedule(cfg.t_max);
    std::filesystem::create_directories(cfg.out);
    const auto log_path = cfg.out / "train_log.csv";
    std::ofstream csv(log_path, std::ios::trunc);
    if (!csv) {
        throw IoError(log_path.string() + ": cannot open for writing");
    }
    csv << "epoch,loss\n";
    const auto t0 = std::chrono::steady_clock::now();
    train(net, data.samples, schedule, tc, [&](const EpochReport& r) {
        csv << r.epoch << "," << r.loss << "\n" << std::flush;
        log << "epoch " << r.epoch << " loss " << r.loss << " (" << seconds_since(t0) << " s)\n" << std::flush;
    });
    write_checkpoint(cfg.dm_checkpoint(), Checkpoint{ModelRole::Dm, cfg.t_max, 0, std::move(net)});
    log << "wrote " << cfg.dm_checkpoint().string() << "\n";
}

void cmd_train_sure(const ExperimentConfig& cfg, std::ostream& log)
{
    cfg.validate();
    const ChannelDataset clean = load_dataset(cfg, "train.bin");
    // t_w is matched on the fine T = 1000 grid.
    const NoisyDataset noisy =
        make_noisy_dataset(clean, cfg.sigma_w_sq, linear_schedule(1000), derive_seed(cfg.seed, {kSureNoise}));
    TrainConfig tc = cfg.train;
    tc.seed = derive_seed(cfg.seed, {kTrain});
    const NoiseSchedule schedule = linear_schedule(cfg.t_max);
    std::filesystem::create_directories(cfg.out);
    const auto log_path = cfg.out / "sure_log.csv";
    std::ofstream csv(log_path, std::ios::trunc);
    if (!csv) {
        throw IoError(log_path.string() + ": cannot open for writing");
    }
    csv << "stage,epoch,loss\n";
    const auto t0 = std::chrono::steady_clock::now();
    auto result = train_sure_dm(noisy, arch_of(cfg), schedule, tc, cfg.sure, [&](int stage, const EpochReport& r) {
        csv << stage << "," << r.epoch << "," << r.loss << "\n" << std::flush;
        log << "stage " << stage << " epoch " << r.epoch << " loss " << r.loss << " (" << seconds_since(t0)
            << " s)\n"
            << std::flush;
    });
    write_checkpoint(cfg.out / "sure_denoiser.ckpt",
                     Checkpoint{ModelRole::SureDenoiser, 1000, noisy.t_w, std::move(result.denoiser)});
    write_checkpoint(cfg.out / "sure_dm.ckpt", Checkpoint{ModelRole::SureDm, cfg.t_max, 0, std::move(result.dm)});
    log << "wrote " << (cfg.out / "sure_denoiser.ckpt").string() << " and " << (cfg.out / "sure_dm.ckpt").string()
        << "\n";
}

void cmd_sweep(const ExperimentConfig& cfg, std::ostream& log)
{
    cfg.validate();
    SweepInputs in;
    in.train = load_dataset(cfg, "train.bin");
    in.val = load_dataset(cfg, "val.bin");
    in.test = load_dataset(cfg, "test.bin");
    const auto uses = [&](const char* m) {
        return std::find(cfg.methods.begin(), cfg.methods.end(), m) != cfg.methods.end();
    };
    if (uses("dm") || uses("dm-enhanced") || uses("dm-linear")) {
        Checkpoint ck = load_model(cfg, cfg.dm_checkpoint());
        in.dm_t_max = ck.t_max;
        in.dm = std::make_shared<const Denoiser<float>>(std::move(ck.net));
    }
    if (uses("sure-dm")) {
        Checkpoint ck = load_model(cfg, cfg.out / "sure_dm.ckpt");
        in.sure_dm_t_max = ck.t_max;
        in.sure_dm = std::make_shared<const Denoiser<float>>(std::move(ck.net));
    }
    const auto rows = run_sweep(cfg, in, &log);
    std::filesystem::create_directories(cfg.out);
    write_csv(cfg.out / "results.csv", rows);
    log << "wrote " << (cfg.out / "results.csv").string() << " (" << rows.size() << " rows)\n";
}

void cmd_plot(const ExperimentConfig& cfg, const std::optional<std::filesystem::path>& csv, std::ostream& log)
{
    const auto path = csv.value_or(cfg.out / "results.csv");
    const auto rows = read_csv(path);
    const auto charts = render_charts(rows);
    std::filesystem::create_directories(cfg.out);
    for (const auto& c : charts) {
        const auto target = cfg.out / c.file_name;
        std::ofstream os(target, std::ios::binary | std::ios::trunc);
        if (!os) {
            throw IoError(target.string() + ": cannot open for writing");
        }
        os << c.svg;
        if (!os) {
            throw IoError(target.string() + ": write failed");
        }
        log << "wrote " << target.string() << "\n";
    }
}

} // namespace dmce::bench
