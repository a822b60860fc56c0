// SPDX-License-Identifier: Apache-2.0
#include "dmce/bench/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace dmce::bench {

namespace {

std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T parse_number(const std::string& key, const std::string& text)
{
    T value{};
    const char* first = text.data();
    const char* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last) {
        throw FormatError("bad value for " + key + ": '" + text + "'");
    }
    return value;
}

std::vector<std::string> split_list(const std::string& text)
{
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) {
            out.push_back(item);
        }
    }
    return out;
}

template <typename T>
std::vector<T> parse_list(const std::string& key, const std::string& text)
{
    std::vector<T> out;
    for (const auto& item : split_list(text)) {
        out.push_back(parse_number<T>(key, item));
    }
    if (out.empty()) {
        throw FormatError("empty list for " + key);
    }
    return out;
}

using Setter = std::function<void(ExperimentConfig&, const std::string& key, const std::string& value)>;

template <typename T, typename Field>
Setter number(Field field)
{
    return [field](ExperimentConfig& c, const std::string& k, const std::string& v) {
        field(c) = parse_number<T>(k, v);
    };
}

const std::map<std::string, Setter>& setters()
{
    static const std::map<std::string, Setter> table = {
        {"system.n_tx", number<int>([](ExperimentConfig& c) -> int& { return c.system.n_tx; })},
        {"system.n_rx", number<int>([](ExperimentConfig& c) -> int& { return c.system.n_rx; })},
        {"system.pilots",
         [](ExperimentConfig& c, const std::string& k, const std::string& v) {
             if (v == "qpsk") {
                 c.pilot = PilotKind::Qpsk;
             } else if (v == "zc") {
                 c.pilot = PilotKind::ZadoffChu;
             } else {
                 throw FormatError("bad value for " + k + ": expected qpsk or zc");
             }
         }},
        {"channel.clusters", number<int>([](ExperimentConfig& c) -> int& { return c.cluster.n_clusters; })},
        {"channel.paths_per_cluster",
         number<int>([](ExperimentConfig& c) -> int& { return c.cluster.paths_per_cluster; })},
        {"channel.angle_spread_deg",
         number<double>([](ExperimentConfig& c) -> double& { return c.cluster.angle_spread_deg; })},
        {"data.n_train", number<Index>([](ExperimentConfig& c) -> Index& { return c.n_train; })},
        {"data.n_val", number<Index>([](ExperimentConfig& c) -> Index& { return c.n_val; })},
        {"data.n_test", number<Index>([](ExperimentConfig& c) -> Index& { return c.n_test; })},
        {"data.dir",
         [](ExperimentConfig& c, const std::string&, const std::string& v) { c.data_dir = v; }},
        {"model.t_max", number<int>([](ExperimentConfig& c) -> int& { return c.t_max; })},
        {"model.s_max", number<int>([](ExperimentConfig& c) -> int& { return c.s_max; })},
        {"model.s_init", number<int>([](ExperimentConfig& c) -> int& { return c.s_init; })},
        {"model.checkpoint",
         [](ExperimentConfig& c, const std::string&, const std::string& v) { c.checkpoint = v; }},
        {"train.epochs", number<int>([](ExperimentConfig& c) -> int& { return c.train.epochs; })},
        {"train.batch_size", number<int>([](ExperimentConfig& c) -> int& { return c.train.batch_size; })},
        {"train.learning_rate",
         number<double>([](ExperimentConfig& c) -> double& { return c.train.learning_rate; })},
        {"sure.sigma_w_sq", number<double>([](ExperimentConfig& c) -> double& { return c.sigma_w_sq; })},
        {"sure.mc_epsilon", number<double>([](ExperimentConfig& c) -> double& { return c.sure.mc_epsilon; })},
        {"sure.denoiser_epochs",
         number<int>([](ExperimentConfig& c) -> int& { return c.sure.denoiser_epochs; })},
        {"sure.dm_epochs", number<int>([](ExperimentConfig& c) -> int& { return c.sure.dm_epochs; })},
        {"estimator.grad_scale",
         number<double>([](ExperimentConfig& c) -> double& { return c.estimator.grad_scale; })},
        {"estimator.enhance_rounds",
         number<int>([](ExperimentConfig& c) -> int& { return c.estimator.enhance_rounds; })},
        {"estimator.enhance_window",
         number<double>([](ExperimentConfig& c) -> double& { return c.estimator.enhance_window; })},
        {"sweep.snr_db",
         [](ExperimentConfig& c, const std::string& k, const std::string& v) {
             c.snr_db = parse_list<double>(k, v);
         }},
        {"sweep.alpha",
         [](ExperimentConfig& c, const std::string& k, const std::string& v) {
             c.alpha = parse_list<double>(k, v);
         }},
        {"sweep.bits",
         [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.bits = parse_list<int>(k, v); }},
        {"sweep.methods",
         [](ExperimentConfig& c, const std::string&, const std::string& v) { c.methods = split_list(v); }},
        {"sweep.lasso_grid",
         [](ExperimentConfig& c, const std::string& k, const std::string& v) {
             c.lasso_grid = parse_list<double>(k, v);
         }},
        {"sweep.lasso_iters", number<int>([](ExperimentConfig& c) -> int& { return c.lasso_iters; })},
        {"sweep.threads", number<int>([](ExperimentConfig& c) -> int& { return c.threads; })},
        {"seed", number<std::uint64_t>([](ExperimentConfig& c) -> std::uint64_t& { return c.seed; })},
    };
    return table;
}

} // namespace

const std::vector<std::string>& known_methods()
{
    static const std::vector<std::string> methods = {"dm",    "dm-enhanced", "dm-linear", "sure-dm",
                                                     "ls",    "lmmse",       "lasso"};
    return methods;
}

void ExperimentConfig::validate() const
{
    system.validate();
    cluster.validate();
    if (n_train < 1 || n_val < 1 || n_test < 1) {
        throw InvalidArgument("config: dataset sizes must be >= 1");
    }
    if (t_max < 1) {
        throw InvalidArgument("config: model.t_max must be >= 1");
    }
    train.validate();
    sure.validate();
    estimator.validate();
    if (snr_db.empty() || alpha.empty() || bits.empty() || methods.empty()) {
        throw InvalidArgument("config: sweep axes and method list must be nonempty");
    }
    for (double a : alpha) {
        if (!(a > 0.0)) {
            throw InvalidArgument("config: pilot densities must be positive");
        }
    }
    for (int b : bits) {
        if (b < 0 || b > kMaxQuantizerBits) {
            throw InvalidArgument("config: bits must be 0 (full resolution) or 1.." +
                                  std::to_string(kMaxQuantizerBits));
        }
    }
    for (const auto& m : methods) {
        if (std::find(known_methods().begin(), known_methods().end(), m) == known_methods().end()) {
            throw InvalidArgument("config: unknown method '" + m + "'");
        }
    }
    if (threads < 0) {
        throw InvalidArgument("config: sweep.threads must be >= 0");
    }
    if (sigma_w_sq < 0.0) {
        throw InvalidArgument("config: sure.sigma_w_sq must be >= 0");
    }
}

ExperimentConfig profile(const std::string& name)
{
    ExperimentConfig c;
    if (name == "desk") {
        c.system.n_tx = 16;
        c.system.n_rx = 4;
        c.n_train = 10000;
        c.train.epochs = 100;
        c.train.learning_rate = 1e-3;
        c.sure.mc_epsilon = 1e-2;
        c.sure.denoiser_epochs = 100;
        c.sure.dm_epochs = 100;
    } else if (name == "paper") {
        c.system.n_tx = 64;
        c.system.n_rx = 16;
        c.n_train = 100000;
        c.train.epochs = 500;
        c.train.learning_rate = 1e-4;
        c.sure.denoiser_epochs = 100;
        c.sure.dm_epochs = 500;
    } else {
        throw InvalidArgument("unknown profile '" + name + "' (expected desk or paper)");
    }
    c.system.n_pilot = c.system.n_tx;
    return c;
}

void set_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value)
{
    const auto& table = setters();
    const auto it = table.find(key);
    if (it == table.end()) {
        throw FormatError("unknown key '" + key + "'");
    }
    it->second(cfg, key, value);
}

void apply_config_text(ExperimentConfig& cfg, const std::string& text, const std::string& origin)
{
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        const std::string body = trim(hash == std::string::npos ? line : line.substr(0, hash));
        if (body.empty()) {
            continue;
        }
        const auto eq = body.find('=');
        if (eq == std::string::npos) {
            throw FormatError(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
        }
        try {
            set_config_value(cfg, trim(body.substr(0, eq)), trim(body.substr(eq + 1)));
        } catch (const FormatError& e) {
            throw FormatError(origin + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
}

void apply_config_file(ExperimentConfig& cfg, const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw IoError(path.string() + ": cannot open config file");
    }
    std::stringstream ss;
    ss << in.rdbuf();
    apply_config_text(cfg, ss.str(), path.string());
}

} // namespace dmce::bench
