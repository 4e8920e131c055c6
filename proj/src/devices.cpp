// Device population sampling and the warm-up CFO law.

#include "rffp/devices.hpp"

#include <cmath>

#include "rffp/errors.hpp"

namespace rffp {

double cfo_at(const DeviceProfile& profile, double t_since_poweron_s) {
    if (t_since_poweron_s < 0.0)
        throw DomainError("cfo_at: t_since_poweron_s must be >= 0");
    return profile.cfo_stable_hz +
           profile.cfo_initial_delta_hz * std::exp(-t_since_poweron_s / profile.warmup_tau_s);
}

void validate_profile(const DeviceProfile& p, double carrier_hz) {
    if (p.warmup_tau_s <= 0.0) throw ConfigError("profile: warmup_tau_s must be > 0");
    if (p.nominal_lo_hz <= 0.0) throw ConfigError("profile: nominal_lo_hz must be > 0");
    if (p.ppm_accuracy > 0.0) {
        const double bound = p.ppm_accuracy * carrier_hz / 1e6;
        if (std::abs(p.cfo_stable_hz) > bound ||
            std::abs(p.cfo_stable_hz + p.cfo_initial_delta_hz) > bound)
            throw ConfigError("profile: CFO exceeds ppm_accuracy bound");
    }
}

static double draw(Rng& rng, const Range& r) {
    if (r.hi < r.lo) throw ConfigError("parameter range: hi < lo");
    return r.lo == r.hi ? r.lo : rng.uniform(r.lo, r.hi);
}

std::vector<DeviceProfile> sample_population(const PopulationSpec& spec) {
    if (spec.num_devices < 1) throw ConfigError("population: num_devices must be >= 1");
    const ParameterRanges& pr = spec.ranges;
    if (pr.ppm.hi <= pr.ppm.lo) throw ConfigError("population: empty ppm range");
    if (pr.stratum_guard < 0.0 || pr.stratum_guard >= 0.5)
        throw ConfigError("population: stratum_guard must be in [0, 0.5)");

    const double width = (pr.ppm.hi - pr.ppm.lo) / double(spec.num_devices);
    std::vector<DeviceProfile> out;
    out.reserve(std::size_t(spec.num_devices));
    for (int i = 0; i < spec.num_devices; ++i) {
        // Per-device generator keeps profiles stable under reordering.
        Rng rng(mix_seed(spec.seed, 0xD1CEu, std::uint64_t(i)));
        DeviceProfile p;
        p.device_id = i;
        p.nominal_lo_hz = pr.nominal_lo_hz;
        p.ppm_accuracy = pr.ppm_accuracy;

        const double u = rng.uniform();
        const double ppm =
            pr.ppm.lo + (double(i) + pr.stratum_guard + (1.0 - 2.0 * pr.stratum_guard) * u) * width;
        const double sign = pr.random_sign ? double(rng.sign()) : 1.0;
        p.cfo_stable_hz = sign * ppm * spec.carrier_hz / 1e6;

        const double scale = draw(rng, pr.delta_scale);
        p.cfo_initial_delta_hz =
            double(pr.delta_sign) * sign * scale * std::abs(p.cfo_stable_hz);

        p.warmup_tau_s = draw(rng, pr.warmup_tau_s);
        p.phase_noise_linewidth_hz = draw(rng, pr.phase_noise_linewidth_hz);
        p.iq_gain_imbalance_db = draw(rng, pr.iq_gain_imbalance_db);
        p.iq_phase_skew_deg = draw(rng, pr.iq_phase_skew_deg);
        const double dc = draw(rng, pr.dc_offset_mag);
        if (dc != 0.0) {
            const double ang = rng.uniform(0.0, 6.283185307179586476925286766559);
            p.dc_offset_re = dc * std::cos(ang);
            p.dc_offset_im = dc * std::sin(ang);
        }
        validate_profile(p, spec.carrier_hz);
        out.push_back(p);
    }
    return out;
}

nlohmann::ordered_json profile_to_json(const DeviceProfile& p) {
    nlohmann::ordered_json j;
    j["device_id"] = p.device_id;
    j["nominal_lo_hz"] = p.nominal_lo_hz;
    j["cfo_stable_hz"] = p.cfo_stable_hz;
    j["cfo_initial_delta_hz"] = p.cfo_initial_delta_hz;
    j["warmup_tau_s"] = p.warmup_tau_s;
    j["phase_noise_linewidth_hz"] = p.phase_noise_linewidth_hz;
    j["iq_gain_imbalance_db"] = p.iq_gain_imbalance_db;
    j["iq_phase_skew_deg"] = p.iq_phase_skew_deg;
    j["dc_offset_re"] = p.dc_offset_re;
    j["dc_offset_im"] = p.dc_offset_im;
    j["ppm_accuracy"] = p.ppm_accuracy;
    return j;
}

DeviceProfile profile_from_json(const nlohmann::json& j) {
    DeviceProfile p;
    p.device_id = j.at("device_id").get<int>();
    p.nominal_lo_hz = j.at("nominal_lo_hz").get<double>();
    p.cfo_stable_hz = j.at("cfo_stable_hz").get<double>();
    p.cfo_initial_delta_hz = j.at("cfo_initial_delta_hz").get<double>();
    p.warmup_tau_s = j.at("warmup_tau_s").get<double>();
    p.phase_noise_linewidth_hz = j.value("phase_noise_linewidth_hz", 0.0);
    p.iq_gain_imbalance_db = j.value("iq_gain_imbalance_db", 0.0);
    p.iq_phase_skew_deg = j.value("iq_phase_skew_deg", 0.0);
    p.dc_offset_re = j.value("dc_offset_re", 0.0);
    p.dc_offset_im = j.value("dc_offset_im", 0.0);
    p.ppm_accuracy = j.value("ppm_accuracy", 0.0);
    return p;
}

}
