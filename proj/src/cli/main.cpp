// rffp: simulate warm-up captures, analyze envelopes and CFO trajectories,
// run the fingerprinting experiments, and render reports.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rffp/analysis.hpp"
#include "rffp/capture.hpp"
#include "rffp/channel.hpp"
#include "rffp/config.hpp"
#include "rffp/devices.hpp"
#include "rffp/errors.hpp"
#include "rffp/fingerprint.hpp"
#include "rffp/phy80211b.hpp"
#include "rffp/rng.hpp"
#include "rffp/svg.hpp"
#include "rffp/version.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

struct CliArgs {
    std::string config_path;
    std::string outdir;
    std::uint64_t seed = 0;
    int devices = 0;
    int days = 0;
    std::string windows_csv;
    std::string scenario;
    bool check = false;

    CLI::Option* opt_outdir = nullptr;
    CLI::Option* opt_seed = nullptr;
    CLI::Option* opt_devices = nullptr;
    CLI::Option* opt_days = nullptr;
    CLI::Option* opt_windows = nullptr;
    CLI::Option* opt_scenario = nullptr;
};

void add_common(CLI::App* sub, CliArgs& a) {
    sub->add_option("--config", a.config_path, "JSON config file");
    a.opt_outdir = sub->add_option("--outdir", a.outdir, "output directory");
    a.opt_seed = sub->add_option("--seed", a.seed, "master seed");
    a.opt_devices = sub->add_option("--devices", a.devices, "number of devices");
    a.opt_days = sub->add_option("--days", a.days, "number of simulated days");
    a.opt_windows = sub->add_option("--windows", a.windows_csv,
                                    "comma-separated capture windows, e.g. min1,min12");
    a.opt_scenario = sub->add_option("--scenario", a.scenario, "e1, e2, e3, or all");
    sub->add_flag("--check", a.check, "assert desk-scale accuracy criteria");
}

std::vector<std::string> split_csv(const std::string& csv) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos <= csv.size()) {
        const std::size_t comma = csv.find(',', pos);
        const std::size_t end = comma == std::string::npos ? csv.size() : comma;
        if (end > pos) out.push_back(csv.substr(pos, end - pos));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return out;
}

rffp::RunConfig resolve(const CliArgs& a) {
    rffp::RunConfig cfg = rffp::load_config(a.config_path);
    if (a.opt_outdir->count()) cfg.outdir = a.outdir;
    if (a.opt_seed->count()) cfg.seed = a.seed;
    if (a.opt_devices->count()) cfg.devices = a.devices;
    if (a.opt_days->count()) cfg.days = a.days;
    if (a.opt_windows->count()) cfg.windows = split_csv(a.windows_csv);
    if (a.opt_scenario->count()) cfg.scenario = a.scenario;
    if (a.check) cfg.check = true;

    if (cfg.devices < 1) throw rffp::ConfigError("devices must be >= 1");
    if (cfg.days < 1) throw rffp::ConfigError("days must be >= 1");
    if (cfg.windows.empty()) throw rffp::ConfigError("windows must be nonempty");
    for (const std::string& w : cfg.windows) rffp::window_by_name(w);
    if (cfg.scenario != "e1" && cfg.scenario != "e2" && cfg.scenario != "e3" &&
        cfg.scenario != "all")
        throw rffp::ConfigError("scenario must be e1, e2, e3, or all");
    cfg.population.num_devices = cfg.devices;
    cfg.population.seed = cfg.seed;
    cfg.experiment.seed = cfg.seed;

    if (const char* env = std::getenv("WARMUP_RFFP_THREADS")) {
        char* endp = nullptr;
        const long cap = std::strtol(env, &endp, 10);
        if (endp == env || *endp != '\0' || cap < 1)
            throw rffp::ConfigError("WARMUP_RFFP_THREADS must be a positive integer");
        cfg.threads = static_cast<int>(std::min<long>(cfg.threads, cap));
    }
    return cfg;
}

void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw rffp::IoError("cannot write " + path);
    out << content;
    if (!out) throw rffp::IoError("short write to " + path);
}

// Every subcommand echoes the fully resolved configuration before any work.
void echo_config(const rffp::RunConfig& cfg) {
    fs::create_directories(cfg.outdir);
    ordered_json j;
    j["version"] = rffp::kVersion;
    j["config_hash"] = rffp::config_hash(cfg);
    const ordered_json body = rffp::config_to_json(cfg);
    for (const auto& [key, value] : body.items()) j[key] = value;
    write_text(cfg.outdir + "/config.resolved.json", j.dump(2) + "\n");
}

std::string container_path(const rffp::RunConfig& cfg, int day, const std::string& window) {
    return cfg.outdir + "/captures_day" + std::to_string(day) + "_" + window + ".iqc1";
}

std::vector<int> population_ids(const std::vector<rffp::DeviceProfile>& profiles) {
    std::vector<int> ids;
    for (const auto& p : profiles) ids.push_back(p.device_id);
    return ids;
}

void cmd_simulate(const rffp::RunConfig& cfg) {
    const std::vector<rffp::DeviceProfile> profiles = rffp::sample_population(cfg.population);
    ordered_json pj = ordered_json::array();
    for (const auto& p : profiles) pj.push_back(rffp::profile_to_json(p));
    write_text(cfg.outdir + "/profiles.json", pj.dump(2) + "\n");

    for (int day = 1; day <= cfg.days; ++day) {
        for (const std::string& wname : cfg.windows) {
            rffp::RunConfig one = cfg;
            one.windows = {wname};
            const rffp::SessionSpec session =
                rffp::make_session(one, day, population_ids(profiles));
            const rffp::DatasetContainer container =
                rffp::run_session(profiles, session, cfg.channel, cfg.frame, cfg.seed);
            rffp::write_container(container_path(cfg, day, wname), container);
        }
    }
    std::cout << "wrote " << cfg.days * cfg.windows.size() << " containers under "
              << cfg.outdir << "\n";
}

// Loads one day's per-window containers and merges them, remapping each
// frame's window_index onto the merged window list.
rffp::DatasetContainer load_day(const rffp::RunConfig& cfg, int day) {
    rffp::DatasetContainer merged;
    ordered_json windows = ordered_json::array();
    for (std::size_t w = 0; w < cfg.windows.size(); ++w) {
        const std::string path = container_path(cfg, day, cfg.windows[w]);
        if (!fs::exists(path))
            throw rffp::IoError("missing container " + path + " (run simulate first)");
        rffp::DatasetContainer part = rffp::read_container(path);
        if (merged.metadata.is_null()) {
            merged.metadata = part.metadata;
        }
        const auto& pw = part.metadata.at("windows");
        if (pw.size() != 1)
            throw rffp::DataError("container " + path + " should hold exactly one window");
        windows.push_back(pw[0]);
        for (auto& fr : part.frames) {
            fr.window_index = static_cast<int>(w);
            merged.frames.push_back(std::move(fr));
        }
    }
    merged.metadata["windows"] = windows;
    merged.metadata["day_label"] = day;
    return merged;
}

void render_report_figures(const rffp::RunConfig& cfg, const ordered_json& report) {
    const std::string scen = report.at("scenario").get<std::string>();
    const auto& grid = report.at("accuracy_grid");
    std::vector<std::string> row_labels, col_labels;
    const auto& days = report.at("days");
    for (const auto& d : days) {
        row_labels.push_back("train day " + std::to_string(d.get<int>()));
        col_labels.push_back("test day " + std::to_string(d.get<int>()));
    }
    std::vector<std::vector<double>> values;
    for (const auto& row : grid) values.push_back(row.get<std::vector<double>>());
    write_text(cfg.outdir + "/accuracy_" + scen + ".svg",
               rffp::svg_heatmap("Accuracy grid " + scen + " (train " +
                                     report.at("train_window").get<std::string>() + ", test " +
                                     report.at("test_window").get<std::string>() + ")",
                                 row_labels, col_labels, values));
    for (std::size_t i = 0; i < values.size(); ++i) {
        write_text(cfg.outdir + "/bars_" + scen + "_train" +
                       std::to_string(days[i].get<int>()) + ".svg",
                   rffp::svg_bar_chart("Scenario " + scen + ", train day " +
                                           std::to_string(days[i].get<int>()),
                                       col_labels, values[i], "accuracy"));
    }
}

void cmd_experiment(const rffp::RunConfig& cfg) {
    std::vector<rffp::DatasetContainer> days;
    for (int day = 1; day <= cfg.days; ++day) days.push_back(load_day(cfg, day));

    std::vector<std::string> scenarios;
    if (cfg.scenario == "all")
        scenarios = {"e1", "e2", "e3"};
    else
        scenarios = {cfg.scenario};

    const std::string hash = rffp::config_hash(cfg);
    double e2_diag_mean = -1.0;
    for (const std::string& name : scenarios) {
        const rffp::ExperimentReport report =
            rffp::run_experiment(rffp::scenario_from_name(name), days, cfg.experiment);
        const ordered_json j = rffp::report_to_json(report, rffp::kVersion, hash);
        write_text(cfg.outdir + "/report_" + name + ".json", j.dump(2) + "\n");
        for (const auto& cell : report.cells) {
            write_text(cfg.outdir + "/confusion_" + name + "_train" +
                           std::to_string(cell.train_day) + "_test" +
                           std::to_string(cell.test_day) + ".csv",
                       rffp::confusion_to_csv(cell.confusion, report.device_ids));
        }
        render_report_figures(cfg, j);
        if (name == "e2") {
            double acc = 0.0;
            const std::size_t d = report.days.size();
            for (std::size_t i = 0; i < d; ++i) acc += report.accuracy_grid[i][i];
            e2_diag_mean = acc / static_cast<double>(d);
        }
        std::cout << "scenario " << name << ": grid written to report_" << name << ".json\n";
    }

    if (cfg.check) {
        if (e2_diag_mean < 0.0)
            throw rffp::ConfigError("--check needs scenario e2 (or all)");
        if (e2_diag_mean < 0.95)
            throw rffp::DataError("check failed: E2 same-day mean accuracy " +
                                  std::to_string(e2_diag_mean) + " < 0.95");
        std::cout << "check passed: E2 same-day mean accuracy " << e2_diag_mean << "\n";
    }
}

void cmd_analyze(const rffp::RunConfig& cfg) {
    // Warm-up trajectories and envelope figures per day and device.
    for (int day = 1; day <= cfg.days; ++day) {
        const rffp::DatasetContainer container = load_day(cfg, day);
        std::vector<int> ids;
        for (const auto& p : container.metadata.at("devices"))
            ids.push_back(p.at("device_id").get<int>());
        for (int id : ids) {
            const std::vector<rffp::TrajectoryPoint> traj =
                rffp::warmup_trajectory(container, id, cfg.analysis);
            std::string csv = "device_id,t_s,cfo_hz,hump_count,hump_rate_hz\n";
            for (const auto& pt : traj) {
                char line[160];
                std::snprintf(line, sizeof line, "%d,%.9g,%.9g,%d,%.9g\n", id,
                              pt.t_since_poweron_s, pt.cfo_hz, pt.hump_count, pt.hump_rate_hz);
                csv += line;
            }
            write_text(cfg.outdir + "/trajectory_day" + std::to_string(day) + "_dev" +
                           std::to_string(id) + ".csv",
                       csv);
        }

        // First frame of each (device, window) as an envelope figure.
        const double window_s = cfg.analysis.envelope_window_chips / rffp::kChipRateHz;
        for (int id : ids) {
            for (std::size_t w = 0; w < cfg.windows.size(); ++w) {
                const rffp::IqFrame* first = nullptr;
                for (const auto& fr : container.frames) {
                    if (fr.device_id == id && fr.window_index == static_cast<int>(w) &&
                        fr.frame_index == 0) {
                        first = &fr;
                        break;
                    }
                }
                if (first == nullptr) continue;
                std::vector<double> re(first->samples.size());
                for (std::size_t i = 0; i < re.size(); ++i) re[i] = first->samples[i].real();
                const rffp::EnvelopeTrace env =
                    rffp::upper_envelope(re, first->sample_rate_hz, window_s, 'I');
                rffp::SvgSeries series;
                series.label = "I envelope";
                series.x.resize(env.values.size());
                series.y = env.values;
                for (std::size_t i = 0; i < series.x.size(); ++i)
                    series.x[i] = 1e6 * static_cast<double>(i) / env.sample_rate_hz;
                write_text(cfg.outdir + "/envelope_day" + std::to_string(day) + "_dev" +
                               std::to_string(id) + "_" + cfg.windows[w] + ".svg",
                           rffp::svg_line_plot("Device " + std::to_string(id) + ", day " +
                                                   std::to_string(day) + ", " + cfg.windows[w],
                                               "time (us)", "envelope", {series}));
            }
        }
    }

    // Constant-CFO sweep over a 10 ms frame, no channel impairments: the
    // envelope figures that tie hump count to CFO.
    rffp::FrameSpec sweep_frame;
    // 1198 payload bytes -> 1226-byte MPDU: exactly 10 ms on air.
    sweep_frame.payload_bytes.assign(1198, 0);
    const rffp::IqStream clean = rffp::synthesize_frame(sweep_frame);
    const double window_s = cfg.analysis.envelope_window_chips / rffp::kChipRateHz;
    std::string sweep_csv = "cfo_hz,hump_count,hump_rate_hz\n";
    for (double f : {0.0, 50.0, 100.0, 200.0}) {
        const rffp::IqStream shifted = rffp::apply_constant_cfo(clean, f);
        std::vector<double> re(shifted.samples.size());
        for (std::size_t i = 0; i < re.size(); ++i) re[i] = shifted.samples[i].real();
        const rffp::EnvelopeTrace env =
            rffp::upper_envelope(re, shifted.sample_rate_hz, window_s, 'I');

        rffp::IqFrame frame;
        frame.samples = shifted.samples;
        frame.sample_rate_hz = shifted.sample_rate_hz;
        const rffp::CfoEstimate est = rffp::estimate_cfo(frame, cfg.analysis);
        const rffp::HumpReport humps = rffp::count_humps(env, cfg.analysis.prominence_rel,
                                                         1.0 / (8.0 * est.valid_range_hz));
        char row[96];
        std::snprintf(row, sizeof row, "%.9g,%d,%.9g\n", f, humps.count, humps.hump_rate_hz);
        sweep_csv += row;

        rffp::SvgSeries series;
        series.label = "I envelope";
        // The full 10 ms trace at 11 MHz is 110k points; decimate for markup size.
        const std::size_t step = std::max<std::size_t>(1, env.values.size() / 4000);
        for (std::size_t i = 0; i < env.values.size(); i += step) {
            series.x.push_back(1e3 * static_cast<double>(i) / env.sample_rate_hz);
            series.y.push_back(env.values[i]);
        }
        char fname[64];
        std::snprintf(fname, sizeof fname, "/sweep_cfo_%dhz.svg", static_cast<int>(f));
        write_text(cfg.outdir + fname,
                   rffp::svg_line_plot("Constant CFO " + std::to_string(static_cast<int>(f)) +
                                           " Hz over 10 ms",
                                       "time (ms)", "envelope", {series}));
    }
    write_text(cfg.outdir + "/sweep_humps.csv", sweep_csv);
    std::cout << "analysis artifacts written under " << cfg.outdir << "\n";
}

void cmd_report(const rffp::RunConfig& cfg) {
    std::vector<std::string> scenarios;
    if (cfg.scenario == "all")
        scenarios = {"e1", "e2", "e3"};
    else
        scenarios = {cfg.scenario};
    for (const std::string& name : scenarios) {
        const std::string path = cfg.outdir + "/report_" + name + ".json";
        std::ifstream in(path);
        if (!in) throw rffp::IoError("missing report " + path + " (run experiment first)");
        ordered_json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw rffp::DataError("report " + path + " is not valid JSON: " +
                                  std::string(e.what()));
        }
        render_report_figures(cfg, j);
        std::cout << "re-rendered figures for " << name << "\n";
    }
}

int fail_json(const std::string& kind, const std::string& message, int code) {
    ordered_json j;
    j["error"] = kind;
    j["message"] = message;
    std::cerr << j.dump() << "\n";
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"warm-up RF fingerprinting workbench"};
    app.set_version_flag("--version", std::string(rffp::kVersion));
    app.require_subcommand(1);

    CliArgs args;
    CLI::App* sim = app.add_subcommand("simulate", "render capture sessions to IQC1 containers");
    CLI::App* ana = app.add_subcommand("analyze", "trajectories, envelopes, and CFO sweeps");
    CLI::App* exp = app.add_subcommand("experiment", "train/test accuracy grids (e1, e2, e3)");
    CLI::App* rep = app.add_subcommand("report", "re-render figures from existing reports");
    CliArgs sim_args, ana_args, exp_args, rep_args;
    add_common(sim, sim_args);
    add_common(ana, ana_args);
    add_common(exp, exp_args);
    add_common(rep, rep_args);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail_json("UsageError", e.what(), 2);
    }

    try {
        if (sim->parsed()) {
            const rffp::RunConfig cfg = resolve(sim_args);
            echo_config(cfg);
            cmd_simulate(cfg);
        } else if (ana->parsed()) {
            const rffp::RunConfig cfg = resolve(ana_args);
            echo_config(cfg);
            cmd_analyze(cfg);
        } else if (exp->parsed()) {
            const rffp::RunConfig cfg = resolve(exp_args);
            echo_config(cfg);
            cmd_experiment(cfg);
        } else if (rep->parsed()) {
            const rffp::RunConfig cfg = resolve(rep_args);
            echo_config(cfg);
            cmd_report(cfg);
        }
    } catch (const rffp::ConfigError& e) {
        return fail_json("ConfigError", e.what(), 2);
    } catch (const rffp::IoError& e) {
        return fail_json("IoError", e.what(), 3);
    } catch (const rffp::DataError& e) {
        return fail_json("DataError", e.what(), 4);
    } catch (const rffp::DomainError& e) {
        return fail_json("DomainError", e.what(), 5);
    } catch (const rffp::InsufficientDataError& e) {
        return fail_json("InsufficientDataError", e.what(), 6);
    } catch (const rffp::TrainingError& e) {
        return fail_json("TrainingError", e.what(), 7);
    } catch (const std::exception& e) {
        return fail_json("InternalError", e.what(), 1);
    }
    return 0;
}
