#pragma once
// Transmitter impairments (warm-up CFO, IQ imbalance, DC offset, phase
// noise), AWGN, per-frame link gain, and receiver resampling. Stage order:
// impairments at the synthesis rate, then noise, then resampling. Every
// stage is an exact identity when its parameters are zeroed, so the fully
// zeroed chain reduces to resample() alone.

#include <cstdint>
#include <limits>

#include "rffp/devices.hpp"
#include "rffp/iq.hpp"

namespace rffp {

inline constexpr double kNoNoise = std::numeric_limits<double>::infinity();

enum class ChannelPreset { wired, wireless };

struct ChannelSpec {
    double snr_db = 25.0;  // kNoNoise disables the AWGN stage
    double rx_sample_rate_hz = 45e6;
    double rx_cfo_hz = 0.0;
    std::uint64_t noise_seed = 0;
    // Per-frame complex gain (wireless setups): Rayleigh magnitude clamped
    // into +/- gain_jitter_db around unity, uniform phase.
    bool gain_jitter = true;
    double gain_jitter_db = 3.0;
};

// Presets match the two measurement setups: cabled (fixed gain, quiet) and
// over-the-air at short range (gain jitter, more noise).
ChannelSpec preset_channel(ChannelPreset preset, double rx_sample_rate_hz);

// Rotates samples through the time-varying CFO. Phase starts at zero on the
// first sample and accumulates midpoint-rule increments of cfo_at, so a
// constant CFO f gives exactly exp(j*2*pi*f*n/fs) and a drifting CFO matches
// the analytic phase integral to second order.
IqStream apply_cfo(const IqStream& stream, const DeviceProfile& profile,
                   double t0_since_poweron_s);

// Constant-frequency variant used for the receiver-side offset.
IqStream apply_constant_cfo(const IqStream& stream, double cfo_hz);

// I' = g*I; Q' = Q*cos(theta) + I*sin(theta).
IqStream apply_iq_imbalance(const IqStream& stream, double gain_db, double phase_deg);

// Adds the DC offset, then multiplies by a Wiener phase walk with per-sample
// variance 2*pi*linewidth/fs.
IqStream apply_dc_phase_noise(const IqStream& stream, const DeviceProfile& profile,
                              std::uint64_t seed);

// Circular complex Gaussian noise at the requested SNR relative to the
// stream's measured mean power.
IqStream awgn(const IqStream& stream, double snr_db, std::uint64_t seed);

// Linear-interpolation resampling; per-sample positions are computed
// directly (no accumulated increments) so long streams stay exact.
IqStream resample(const IqStream& stream, double target_hz);

// Full per-frame chain: CFO -> IQ imbalance -> DC/phase noise -> link gain
// -> AWGN -> resample -> rx CFO removal. frame_seed drives every stochastic
// stage, so frames can be rendered in any order.
IqStream apply_frame_channel(const IqStream& clean, const DeviceProfile& profile,
                             double t0_since_poweron_s, const ChannelSpec& spec,
                             std::uint64_t frame_seed);

}
