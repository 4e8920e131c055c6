#pragma once
// Transmitter populations and the time-dependent oscillator model.
// Everything downstream (channel rotation, envelope humps, fingerprint
// features) is driven by cfo_at().

#include <cstdint>
#include <string>
#include <vector>

#include "rffp/rng.hpp"

#include <json.hpp>

namespace rffp {

struct DeviceProfile {
    int device_id = 0;
    double nominal_lo_hz = 40e6;
    double cfo_stable_hz = 0.0;
    double cfo_initial_delta_hz = 0.0;
    double warmup_tau_s = 240.0;
    double phase_noise_linewidth_hz = 0.0;
    double iq_gain_imbalance_db = 0.0;
    double iq_phase_skew_deg = 0.0;
    double dc_offset_re = 0.0;
    double dc_offset_im = 0.0;
    double ppm_accuracy = 0.0;  // sanity bound only, 0 disables the check
};

struct Range {
    double lo = 0.0;
    double hi = 0.0;
};

// Sampling ranges for DeviceProfile fields. |cfo_stable| is drawn in PPM of
// the carrier, one device per equal-width stratum of the PPM range with a
// guard margin, so a small population never contains two devices with
// near-coincident CFO (which no CFO-driven fingerprint separates).
struct ParameterRanges {
    Range ppm{2.0, 10.0};
    double stratum_guard = 0.2;  // fraction of stratum width kept clear at each edge
    bool random_sign = true;
    Range delta_scale{0.5, 2.0};   // |cfo_initial_delta| as a multiple of |cfo_stable|
    int delta_sign = +1;           // +1: same sign as cfo_stable, -1: opposite
    Range warmup_tau_s{240.0, 240.0};
    Range phase_noise_linewidth_hz{0.0, 0.0};
    Range iq_gain_imbalance_db{0.0, 0.0};
    Range iq_phase_skew_deg{0.0, 0.0};
    Range dc_offset_mag{0.0, 0.0};
    double nominal_lo_hz = 40e6;
    // Rated accuracy must cover the power-on transient: worst case
    // |stable + delta| = (1 + delta_scale.hi) x ppm.hi.
    double ppm_accuracy = 30.0;
};

struct PopulationSpec {
    int num_devices = 15;
    double carrier_hz = 2.412e9;
    std::uint64_t seed = 42;
    ParameterRanges ranges;
};

// cfo(t) = cfo_stable + delta * exp(-t/tau). Throws DomainError for t < 0.
double cfo_at(const DeviceProfile& profile, double t_since_poweron_s);

// Deterministic given spec.seed; validates all profile invariants.
std::vector<DeviceProfile> sample_population(const PopulationSpec& spec);

// Throws ConfigError when a profile violates its invariants.
void validate_profile(const DeviceProfile& profile, double carrier_hz);

nlohmann::ordered_json profile_to_json(const DeviceProfile& p);
DeviceProfile profile_from_json(const nlohmann::json& j);

}
