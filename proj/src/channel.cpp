// Impairment chain implementation.

#include "rffp/channel.hpp"

#include <cmath>

#include "rffp/errors.hpp"

namespace rffp {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

ChannelSpec preset_channel(ChannelPreset preset, double rx_sample_rate_hz) {
    ChannelSpec spec;
    spec.rx_sample_rate_hz = rx_sample_rate_hz;
    if (preset == ChannelPreset::wired) {
        spec.snr_db = 35.0;
        spec.gain_jitter = false;
    } else {
        spec.snr_db = 25.0;
        spec.gain_jitter = true;
    }
    return spec;
}

IqStream apply_cfo(const IqStream& stream, const DeviceProfile& profile,
                   double t0_since_poweron_s) {
    if (t0_since_poweron_s < 0.0) throw DomainError("apply_cfo: t0 must be >= 0");
    IqStream out = stream;
    out.t0_since_poweron_s = t0_since_poweron_s;
    if (profile.cfo_stable_hz == 0.0 && profile.cfo_initial_delta_hz == 0.0) return out;

    const double fs = stream.sample_rate_hz;
    double phase = 0.0;
    for (std::size_t n = 1; n < out.samples.size(); ++n) {
        const double t_mid = t0_since_poweron_s + (double(n) - 0.5) / fs;
        phase += kTwoPi * cfo_at(profile, t_mid) / fs;
        out.samples[n] *= cplx(std::cos(phase), std::sin(phase));
    }
    return out;
}

IqStream apply_constant_cfo(const IqStream& stream, double cfo_hz) {
    IqStream out = stream;
    if (cfo_hz == 0.0) return out;
    const double dphi = kTwoPi * cfo_hz / stream.sample_rate_hz;
    for (std::size_t n = 1; n < out.samples.size(); ++n) {
        const double phase = dphi * double(n);
        out.samples[n] *= cplx(std::cos(phase), std::sin(phase));
    }
    return out;
}

IqStream apply_iq_imbalance(const IqStream& stream, double gain_db, double phase_deg) {
    IqStream out = stream;
    if (gain_db == 0.0 && phase_deg == 0.0) return out;
    const double g = std::pow(10.0, gain_db / 20.0);
    const double theta = phase_deg * kTwoPi / 360.0;
    const double c = std::cos(theta), s = std::sin(theta);
    for (cplx& v : out.samples)
        v = cplx(g * v.real(), v.imag() * c + v.real() * s);
    return out;
}

IqStream apply_dc_phase_noise(const IqStream& stream, const DeviceProfile& profile,
                              std::uint64_t seed) {
    IqStream out = stream;
    const cplx dc(profile.dc_offset_re, profile.dc_offset_im);
    const bool have_dc = dc != cplx(0.0, 0.0);
    const bool have_pn = profile.phase_noise_linewidth_hz > 0.0;
    if (!have_dc && !have_pn) return out;

    Rng rng(seed);
    const double step_sigma =
        have_pn ? std::sqrt(kTwoPi * profile.phase_noise_linewidth_hz / stream.sample_rate_hz)
                : 0.0;
    double psi = 0.0;
    for (cplx& v : out.samples) {
        if (have_dc) v += dc;
        if (have_pn) {
            psi += step_sigma * rng.normal();
            v *= cplx(std::cos(psi), std::sin(psi));
        }
    }
    return out;
}

IqStream awgn(const IqStream& stream, double snr_db, std::uint64_t seed) {
    IqStream out = stream;
    if (std::isinf(snr_db)) return out;
    const double power = mean_power(stream);
    if (power <= 0.0) throw DomainError("awgn: zero-energy input, SNR undefined");
    const double noise_var = power / std::pow(10.0, snr_db / 10.0);
    const double comp_sigma = std::sqrt(noise_var / 2.0);
    Rng rng(seed);
    for (cplx& v : out.samples)
        v += cplx(comp_sigma * rng.normal(), comp_sigma * rng.normal());
    return out;
}

IqStream resample(const IqStream& stream, double target_hz) {
    if (target_hz <= 0.0) throw DomainError("resample: target rate must be > 0");
    if (target_hz == stream.sample_rate_hz) return stream;

    const double ratio = stream.sample_rate_hz / target_hz;
    const std::size_t n_in = stream.samples.size();
    IqStream out;
    out.sample_rate_hz = target_hz;
    out.t0_since_poweron_s = stream.t0_since_poweron_s;
    if (n_in == 0) return out;

    const std::size_t n_out = std::size_t(std::floor(double(n_in - 1) / ratio)) + 1;
    out.samples.resize(n_out);
    for (std::size_t k = 0; k < n_out; ++k) {
        const double pos = double(k) * ratio;
        std::size_t i = std::size_t(pos);
        if (i >= n_in - 1) {
            out.samples[k] = stream.samples[n_in - 1];
            continue;
        }
        const double frac = pos - double(i);
        out.samples[k] =
            stream.samples[i] + frac * (stream.samples[i + 1] - stream.samples[i]);
    }
    return out;
}

IqStream apply_frame_channel(const IqStream& clean, const DeviceProfile& profile,
                             double t0_since_poweron_s, const ChannelSpec& spec,
                             std::uint64_t frame_seed) {
    IqStream x = apply_cfo(clean, profile, t0_since_poweron_s);
    x = apply_iq_imbalance(x, profile.iq_gain_imbalance_db, profile.iq_phase_skew_deg);
    x = apply_dc_phase_noise(x, profile, mix_seed(frame_seed, 0x9A5Eu));

    if (spec.gain_jitter) {
        Rng rng(mix_seed(frame_seed, 0x6A17u));
        const double bound = std::pow(10.0, spec.gain_jitter_db / 20.0);
        double r = rng.rayleigh();
        r = std::min(std::max(r, 1.0 / bound), bound);
        const double theta = rng.uniform(0.0, kTwoPi);
        const cplx g(r * std::cos(theta), r * std::sin(theta));
        for (cplx& v : x.samples) v *= g;
    }

    x = awgn(x, spec.snr_db, mix_seed(frame_seed, 0xA36Eu));
    x = resample(x, spec.rx_sample_rate_hz);
    x = apply_constant_cfo(x, -spec.rx_cfo_hz);
    return x;
}

}
