#include "rffp/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include "rffp/errors.hpp"

namespace rffp {

namespace {

void reject_unknown(const nlohmann::json& obj, const std::set<std::string>& allowed,
                    const std::string& section) {
    for (const auto& [key, value] : obj.items()) {
        (void)value;
        if (allowed.find(key) == allowed.end())
            throw ConfigError("unknown config key '" + key + "' in " + section);
    }
}

Range range_from(const nlohmann::json& j, const std::string& key, Range fallback) {
    if (!j.contains(key)) return fallback;
    const auto& v = j.at(key);
    if (!v.is_array() || v.size() != 2)
        throw ConfigError("config key '" + key + "' must be a [lo, hi] pair");
    return Range{v[0].get<double>(), v[1].get<double>()};
}

}  // namespace

CaptureWindow window_by_name(const std::string& name) {
    if (name.size() < 4 || name.compare(0, 3, "min") != 0)
        throw ConfigError("unknown capture window '" + name + "' (expected minN)");
    for (std::size_t i = 3; i < name.size(); ++i)
        if (!std::isdigit(static_cast<unsigned char>(name[i])))
            throw ConfigError("unknown capture window '" + name + "' (expected minN)");
    const int minute = std::stoi(name.substr(3));
    if (minute < 1 || minute > 1440)
        throw ConfigError("capture window minute " + std::to_string(minute) + " out of range");
    CaptureWindow w;
    w.name = name;
    w.start_s = minute == 1 ? 0.0 : 60.0 * minute;
    w.end_s = w.start_s + 120.0;
    return w;
}

RunConfig load_config(const std::string& json_path) {
    RunConfig cfg;
    cfg.channel = preset_channel(ChannelPreset::wireless, 11.25e6);
    cfg.population.num_devices = cfg.devices;

    if (json_path.empty()) return cfg;

    std::ifstream in(json_path);
    if (!in) throw IoError("cannot read config file: " + json_path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config file is not valid JSON: " + std::string(e.what()));
    }
    reject_unknown(j,
                   {"outdir", "seed", "devices", "days", "windows", "scenario", "check",
                    "threads", "channel", "frame", "population", "session", "experiment",
                    "analysis"},
                   "the top level");

    cfg.outdir = j.value("outdir", cfg.outdir);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.devices = j.value("devices", cfg.devices);
    cfg.days = j.value("days", cfg.days);
    if (j.contains("windows")) cfg.windows = j.at("windows").get<std::vector<std::string>>();
    cfg.scenario = j.value("scenario", cfg.scenario);
    cfg.check = j.value("check", cfg.check);
    cfg.threads = j.value("threads", cfg.threads);

    if (j.contains("channel")) {
        const auto& c = j.at("channel");
        reject_unknown(c,
                       {"preset", "snr_db", "rx_sample_rate_hz", "rx_cfo_hz", "gain_jitter",
                        "gain_jitter_db"},
                       "channel");
        cfg.channel_preset = c.value("preset", cfg.channel_preset);
        if (cfg.channel_preset == "wired")
            cfg.channel = preset_channel(ChannelPreset::wired, 11.25e6);
        else if (cfg.channel_preset == "wireless")
            cfg.channel = preset_channel(ChannelPreset::wireless, 11.25e6);
        else
            throw ConfigError("channel preset must be 'wired' or 'wireless', got '" +
                              cfg.channel_preset + "'");
        cfg.channel.snr_db = c.value("snr_db", cfg.channel.snr_db);
        cfg.channel.rx_sample_rate_hz = c.value("rx_sample_rate_hz", cfg.channel.rx_sample_rate_hz);
        cfg.channel.rx_cfo_hz = c.value("rx_cfo_hz", cfg.channel.rx_cfo_hz);
        cfg.channel.gain_jitter = c.value("gain_jitter", cfg.channel.gain_jitter);
        cfg.channel.gain_jitter_db = c.value("gain_jitter_db", cfg.channel.gain_jitter_db);
    }

    if (j.contains("frame")) {
        const auto& f = j.at("frame");
        reject_unknown(f, {"payload_bytes", "oversample"}, "frame");
        if (f.contains("payload_bytes")) {
            const auto count = f.at("payload_bytes").get<std::int64_t>();
            if (count < 0) throw ConfigError("frame.payload_bytes must be non-negative");
            cfg.frame.payload_bytes.assign(static_cast<std::size_t>(count), 0);
        }
        cfg.frame.oversample = f.value("oversample", cfg.frame.oversample);
    }

    if (j.contains("population")) {
        const auto& p = j.at("population");
        reject_unknown(p,
                       {"carrier_hz", "ppm", "stratum_guard", "random_sign", "delta_scale",
                        "delta_sign", "warmup_tau_s", "phase_noise_linewidth_hz",
                        "iq_gain_imbalance_db", "iq_phase_skew_deg", "dc_offset_mag",
                        "nominal_lo_hz", "ppm_accuracy"},
                       "population");
        cfg.population.carrier_hz = p.value("carrier_hz", cfg.population.carrier_hz);
        ParameterRanges& r = cfg.population.ranges;
        r.ppm = range_from(p, "ppm", r.ppm);
        r.stratum_guard = p.value("stratum_guard", r.stratum_guard);
        r.random_sign = p.value("random_sign", r.random_sign);
        r.delta_scale = range_from(p, "delta_scale", r.delta_scale);
        r.delta_sign = p.value("delta_sign", r.delta_sign);
        r.warmup_tau_s = range_from(p, "warmup_tau_s", r.warmup_tau_s);
        r.phase_noise_linewidth_hz =
            range_from(p, "phase_noise_linewidth_hz", r.phase_noise_linewidth_hz);
        r.iq_gain_imbalance_db = range_from(p, "iq_gain_imbalance_db", r.iq_gain_imbalance_db);
        r.iq_phase_skew_deg = range_from(p, "iq_phase_skew_deg", r.iq_phase_skew_deg);
        r.dc_offset_mag = range_from(p, "dc_offset_mag", r.dc_offset_mag);
        r.nominal_lo_hz = p.value("nominal_lo_hz", r.nominal_lo_hz);
        r.ppm_accuracy = p.value("ppm_accuracy", r.ppm_accuracy);
    }

    if (j.contains("session")) {
        const auto& s = j.at("session");
        reject_unknown(s, {"frames_per_window", "inter_frame_gap_s"}, "session");
        cfg.frames_per_window = s.value("frames_per_window", cfg.frames_per_window);
        cfg.inter_frame_gap_s = s.value("inter_frame_gap_s", cfg.inter_frame_gap_s);
    }

    if (j.contains("experiment")) {
        const auto& e = j.at("experiment");
        reject_unknown(e,
                       {"window_width", "all_windows", "kfold", "epochs", "batch",
                        "learning_rate", "momentum", "warmup_epochs", "clip_norm",
                        "stable_window", "warmup_window"},
                       "experiment");
        cfg.experiment.window_width = e.value("window_width", cfg.experiment.window_width);
        cfg.experiment.all_windows = e.value("all_windows", cfg.experiment.all_windows);
        cfg.experiment.kfold = e.value("kfold", cfg.experiment.kfold);
        cfg.experiment.hyper.epochs = e.value("epochs", cfg.experiment.hyper.epochs);
        cfg.experiment.hyper.batch = e.value("batch", cfg.experiment.hyper.batch);
        cfg.experiment.hyper.learning_rate =
            e.value("learning_rate", cfg.experiment.hyper.learning_rate);
        cfg.experiment.hyper.momentum = e.value("momentum", cfg.experiment.hyper.momentum);
        cfg.experiment.hyper.warmup_epochs =
            e.value("warmup_epochs", cfg.experiment.hyper.warmup_epochs);
        cfg.experiment.hyper.clip_norm = e.value("clip_norm", cfg.experiment.hyper.clip_norm);
        cfg.experiment.stable_window = e.value("stable_window", cfg.experiment.stable_window);
        cfg.experiment.warmup_window = e.value("warmup_window", cfg.experiment.warmup_window);
    }

    if (j.contains("analysis")) {
        const auto& a = j.at("analysis");
        reject_unknown(a, {"envelope_window_chips", "prominence_rel", "coarse_lag"}, "analysis");
        cfg.analysis.envelope_window_chips =
            a.value("envelope_window_chips", cfg.analysis.envelope_window_chips);
        cfg.analysis.prominence_rel = a.value("prominence_rel", cfg.analysis.prominence_rel);
        cfg.analysis.coarse_lag = a.value("coarse_lag", cfg.analysis.coarse_lag);
    }

    cfg.population.num_devices = cfg.devices;
    return cfg;
}

nlohmann::ordered_json config_to_json(const RunConfig& c) {
    nlohmann::ordered_json j;
    j["outdir"] = c.outdir;
    j["seed"] = c.seed;
    j["devices"] = c.devices;
    j["days"] = c.days;
    j["windows"] = c.windows;
    j["scenario"] = c.scenario;
    j["check"] = c.check;
    j["threads"] = c.threads;
    j["channel"] = {{"preset", c.channel_preset},
                    {"snr_db", std::isinf(c.channel.snr_db) ? 1e9 : c.channel.snr_db},
                    {"rx_sample_rate_hz", c.channel.rx_sample_rate_hz},
                    {"rx_cfo_hz", c.channel.rx_cfo_hz},
                    {"gain_jitter", c.channel.gain_jitter},
                    {"gain_jitter_db", c.channel.gain_jitter_db}};
    j["frame"] = {{"payload_bytes", c.frame.payload_bytes.size()},
                  {"oversample", c.frame.oversample}};
    const ParameterRanges& r = c.population.ranges;
    j["population"] = {{"carrier_hz", c.population.carrier_hz},
                       {"ppm", {r.ppm.lo, r.ppm.hi}},
                       {"stratum_guard", r.stratum_guard},
                       {"random_sign", r.random_sign},
                       {"delta_scale", {r.delta_scale.lo, r.delta_scale.hi}},
                       {"delta_sign", r.delta_sign},
                       {"warmup_tau_s", {r.warmup_tau_s.lo, r.warmup_tau_s.hi}},
                       {"phase_noise_linewidth_hz",
                        {r.phase_noise_linewidth_hz.lo, r.phase_noise_linewidth_hz.hi}},
                       {"iq_gain_imbalance_db",
                        {r.iq_gain_imbalance_db.lo, r.iq_gain_imbalance_db.hi}},
                       {"iq_phase_skew_deg", {r.iq_phase_skew_deg.lo, r.iq_phase_skew_deg.hi}},
                       {"dc_offset_mag", {r.dc_offset_mag.lo, r.dc_offset_mag.hi}},
                       {"nominal_lo_hz", r.nominal_lo_hz},
                       {"ppm_accuracy", r.ppm_accuracy}};
    j["session"] = {{"frames_per_window", c.frames_per_window},
                    {"inter_frame_gap_s", c.inter_frame_gap_s}};
    j["experiment"] = {{"window_width", c.experiment.window_width},
                       {"all_windows", c.experiment.all_windows},
                       {"kfold", c.experiment.kfold},
                       {"epochs", c.experiment.hyper.epochs},
                       {"batch", c.experiment.hyper.batch},
                       {"learning_rate", c.experiment.hyper.learning_rate},
                       {"momentum", c.experiment.hyper.momentum},
                       {"warmup_epochs", c.experiment.hyper.warmup_epochs},
                       {"clip_norm", c.experiment.hyper.clip_norm},
                       {"stable_window", c.experiment.stable_window},
                       {"warmup_window", c.experiment.warmup_window}};
    j["analysis"] = {{"envelope_window_chips", c.analysis.envelope_window_chips},
                     {"prominence_rel", c.analysis.prominence_rel},
                     {"coarse_lag", c.analysis.coarse_lag}};
    return j;
}

std::string config_hash(const RunConfig& config) {
    const std::string dump = config_to_json(config).dump();
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char ch : dump) {
        h ^= ch;
        h *= 0x100000001b3ull;
    }
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

SessionSpec make_session(const RunConfig& config, int day_label,
                         const std::vector<int>& device_ids) {
    SessionSpec s;
    s.device_ids = device_ids;
    s.day_label = day_label;
    for (const std::string& name : config.windows) s.windows.push_back(window_by_name(name));
    s.inter_frame_gap_s = config.inter_frame_gap_s;
    s.frames_per_window = config.frames_per_window;
    return s;
}

}
