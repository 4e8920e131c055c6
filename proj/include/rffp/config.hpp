#pragma once
// Run configuration: desk-scale defaults, JSON config-file merging, window
// name resolution, and the resolved-config echo every subcommand writes
// before doing work.

#include <cstdint>
#include <string>
#include <vector>

#include "rffp/analysis.hpp"
#include "rffp/capture.hpp"
#include "rffp/channel.hpp"
#include "rffp/devices.hpp"
#include "rffp/fingerprint.hpp"
#include "rffp/phy80211b.hpp"

#include <json.hpp>

namespace rffp {

struct RunConfig {
    std::string outdir = "out";
    std::uint64_t seed = 42;
    int devices = 5;
    int days = 3;
    std::vector<std::string> windows = {"min1", "min12"};
    std::string scenario = "all";  // e1 | e2 | e3 | all
    bool check = false;
    int threads = 1;

    std::string channel_preset = "wireless";  // wireless | wired
    ChannelSpec channel;                      // desk scale: 11.25 MSps capture
    FrameSpec frame;
    PopulationSpec population;
    int frames_per_window = 200;
    double inter_frame_gap_s = 100e-6;
    ExperimentConfig experiment;
    AnalysisConfig analysis;
};

// Desk-scale defaults, overlaid with the JSON config file when path is
// nonempty. Unknown keys are rejected so typos fail loudly.
RunConfig load_config(const std::string& json_path);

// "min1" covers the first two minutes of power-on; "minN" (N >= 2) covers
// two minutes starting N minutes after power-on.
CaptureWindow window_by_name(const std::string& name);

// Fully resolved config as ordered JSON; written to
// <outdir>/config.resolved.json and hashed into reports.
nlohmann::ordered_json config_to_json(const RunConfig& config);

// FNV-1a over the serialized config, as a fixed-width hex string.
std::string config_hash(const RunConfig& config);

SessionSpec make_session(const RunConfig& config, int day_label,
                         const std::vector<int>& device_ids);

}
