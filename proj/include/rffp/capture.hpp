#pragma once
// Timed capture sessions over a power-on timeline, energy-gated packet
// extraction, and the IQC1 bit-exact dataset container.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "rffp/channel.hpp"
#include "rffp/devices.hpp"
#include "rffp/iq.hpp"
#include "rffp/phy80211b.hpp"

#include <json.hpp>

namespace rffp {

struct CaptureWindow {
    double start_s = 0.0;
    double end_s = 0.0;
    std::string name;  // e.g. "min1", "min12"
};

struct SessionSpec {
    std::vector<int> device_ids;
    int day_label = 1;
    std::vector<CaptureWindow> windows;
    double inter_frame_gap_s = 100e-6;
    int frames_per_window = 200;
};

struct IqFrame {
    std::vector<cplx> samples;
    double sample_rate_hz = 0.0;
    int device_id = 0;
    int day_label = 0;
    int window_index = 0;
    int frame_index = 0;
    double t_since_poweron_s = 0.0;
};

struct DatasetContainer {
    nlohmann::ordered_json metadata;
    std::vector<IqFrame> frames;
};

// One tensor example cut from a frame: row 0 = I, row 1 = Q.
struct LabeledExample {
    std::vector<float> tensor;  // 2 x width, row-major
    int width = 0;
    int label = 0;
    int day_label = 0;
    int window_index = 0;
    double t_since_poweron_s = 0.0;
};

// Emits frames_per_window frames per (device, window); frame k starts at
// window.start + k*(frame_duration + gap). Per-frame randomness is derived
// from (master_seed, day, device, window, frame), so rendering order never
// matters. Throws ConfigError when a window cannot hold its frames.
DatasetContainer run_session(const std::vector<DeviceProfile>& population,
                             const SessionSpec& session, const ChannelSpec& channel,
                             const FrameSpec& frame, std::uint64_t master_seed);

// IQC1 container: magic "IQC1", u32 version, u64 metadata_len, JSON metadata,
// then per-record u32 ids, f64 t, u32 n, n x (f32 I, f32 Q); little-endian.
void write_container(const std::string& path, const DatasetContainer& container);
DatasetContainer read_container(const std::string& path);

// Energy-gate detection on moving-average power. An interval opens where the
// average crosses threshold_rel x max(power) upward and closes on the
// downward crossing; gaps shorter than merge_gap_s are merged. Streams whose
// peak averaged power stays below min_peak_power hold no packets at all:
// chips are unit amplitude by convention, so even a heavily faded frame sits
// well above the floor while noise-only captures fall under it.
struct DetectConfig {
    int avg_window = 64;
    double merge_gap_s = 50e-6;      // half the default inter-frame gap
    double min_peak_power = 0.05;    // -13 dB relative to unit chips
};
std::vector<std::pair<std::size_t, std::size_t>> detect_packets(
    const IqStream& raw, double threshold_rel = 0.1, const DetectConfig& cfg = {});

// Non-overlapping consecutive width-sample windows from the frame start;
// remainder samples are dropped.
std::vector<LabeledExample> window_examples(const IqFrame& frame, int width_samples);

// Renders a (device, window) stretch as one contiguous stream with the
// inter-frame silence in place, for exercising detect_packets.
IqStream render_window_stream(const std::vector<IqFrame>& frames, double gap_s);

}
