#include "rffp/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <deque>
#include <limits>
#include <numeric>

#include "rffp/errors.hpp"
#include "rffp/phy80211b.hpp"

namespace rffp {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

// Sliding-window maximum via a monotonic deque; out[i] = max(v[i .. i+w-1]).
std::vector<double> sliding_max(const std::vector<double>& v, std::size_t w) {
    std::vector<double> out(v.size() - w + 1);
    std::deque<std::size_t> q;
    for (std::size_t i = 0; i < v.size(); ++i) {
        while (!q.empty() && v[q.back()] <= v[i]) q.pop_back();
        q.push_back(i);
        if (q.front() + w <= i) q.pop_front();
        if (i + 1 >= w) out[i + 1 - w] = v[q.front()];
    }
    return out;
}

// Centered moving average over w samples, edges trimmed.
std::vector<double> moving_average(const std::vector<double>& v, std::size_t w) {
    std::vector<double> out(v.size() - w + 1);
    double acc = std::accumulate(v.begin(), v.begin() + static_cast<long>(w), 0.0);
    out[0] = acc / static_cast<double>(w);
    for (std::size_t i = w; i < v.size(); ++i) {
        acc += v[i] - v[i - w];
        out[i - w + 1] = acc / static_cast<double>(w);
    }
    return out;
}

// Classical prominence on the circular closure: descend from the peak on
// each side (wrapping) until a higher value appears; the reference saddle is
// the higher of the two valley floors.
double prominence_circular(const std::vector<double>& v, std::size_t p) {
    const std::size_t n = v.size();
    double left_min = v[p];
    for (std::size_t s = 1; s < n; ++s) {
        const double x = v[(p + n - s) % n];
        if (x > v[p]) break;
        left_min = std::min(left_min, x);
    }
    double right_min = v[p];
    for (std::size_t s = 1; s < n; ++s) {
        const double x = v[(p + s) % n];
        if (x > v[p]) break;
        right_min = std::min(right_min, x);
    }
    return v[p] - std::max(left_min, right_min);
}

}  // namespace

EnvelopeTrace upper_envelope(const std::vector<double>& component, double sample_rate_hz,
                             double window_s, char component_tag) {
    if (sample_rate_hz <= 0.0) throw DomainError("sample rate must be positive");
    if (window_s < 2.0 / kChipRateHz)
        throw DomainError("envelope window must span at least 2 chip periods");
    const std::size_t w = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(window_s * sample_rate_hz)));
    if (component.size() < 2 * w - 1)
        throw DomainError("envelope window longer than the analyzed segment");

    std::vector<double> mag(component.size());
    for (std::size_t i = 0; i < component.size(); ++i) mag[i] = std::abs(component[i]);

    EnvelopeTrace env;
    env.sample_rate_hz = sample_rate_hz;
    env.component_tag = component_tag;
    env.values = moving_average(sliding_max(mag, w), w);
    return env;
}

HumpReport count_humps(const EnvelopeTrace& env, double prominence_rel, double min_sep_s) {
    if (!(prominence_rel > 0.0 && prominence_rel < 1.0))
        throw DomainError("prominence_rel must lie in (0, 1)");
    HumpReport report;
    const std::vector<double>& orig = env.values;
    const std::size_t n = orig.size();
    if (n < 3) return report;

    const double gmax = *std::max_element(orig.begin(), orig.end());
    if (gmax <= 0.0) return report;
    const double need = prominence_rel * gmax;

    // Humps are counted on the circular closure of the trace so an apex cut
    // by a frame boundary is counted exactly once: a duration holding k whole
    // envelope periods reports exactly 2k humps regardless of phase. Rotating
    // a global minimum to the seam keeps every peak run interior.
    const std::size_t rot =
        static_cast<std::size_t>(std::min_element(orig.begin(), orig.end()) - orig.begin());
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = orig[(i + rot) % n];

    // Collapse plateaus to their center. The run ending at the last index
    // closes against the seam value v[0]; the run starting at index 0 holds
    // the global minimum and can never rise.
    std::vector<std::size_t> candidates;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && v[j + 1] == v[i]) ++j;
        const bool rises = i > 0 && v[i - 1] < v[i];
        const bool falls = (j + 1 < n ? v[j + 1] : v[0]) < v[i];
        if (rises && falls) {
            const std::size_t center = i + (j - i) / 2;
            if (prominence_circular(v, center) >= need) candidates.push_back(center);
        }
        i = j + 1;
    }
    for (std::size_t& c : candidates) c = (c + rot) % n;

    // Enforce separation greedily by height so the tallest peaks survive;
    // distance is measured in reported index space.
    const double min_sep_samples = min_sep_s * env.sample_rate_hz;
    std::vector<std::size_t> by_height = candidates;
    std::sort(by_height.begin(), by_height.end(), [&](std::size_t a, std::size_t b) {
        return orig[a] > orig[b] || (orig[a] == orig[b] && a < b);
    });
    std::vector<std::size_t> kept;
    for (std::size_t c : by_height) {
        bool ok = true;
        for (std::size_t k : kept) {
            const double d = c > k ? static_cast<double>(c - k) : static_cast<double>(k - c);
            if (d < min_sep_samples) {
                ok = false;
                break;
            }
        }
        if (ok) kept.push_back(c);
    }
    std::sort(kept.begin(), kept.end());

    report.peak_indices = std::move(kept);
    report.count = static_cast<int>(report.peak_indices.size());
    const double duration = static_cast<double>(n) / env.sample_rate_hz;
    report.hump_rate_hz = report.count / duration;
    return report;
}

CfoEstimate estimate_cfo_squaring(const IqFrame& frame, int lag) {
    if (lag < 1) throw DomainError("lag must be >= 1");
    const std::size_t n = frame.samples.size();
    if (n <= static_cast<std::size_t>(2 * lag))
        throw InsufficientDataError("frame too short for squaring lag " + std::to_string(lag));

    cplx acc(0.0, 0.0);
    const std::size_t l = static_cast<std::size_t>(lag);
    for (std::size_t k = l; k < n; ++k) {
        const cplx a = frame.samples[k] * frame.samples[k];
        const cplx b = frame.samples[k - l] * frame.samples[k - l];
        acc += a * std::conj(b);
    }
    CfoEstimate est;
    est.method = CfoMethod::squaring;
    est.valid_range_hz = frame.sample_rate_hz / (4.0 * lag);
    est.cfo_hz = std::arg(acc) * frame.sample_rate_hz / (4.0 * kPi * lag);
    return est;
}

CfoEstimate estimate_cfo(const IqFrame& frame, const AnalysisConfig& cfg) {
    const std::size_t n = frame.samples.size();
    const int max_lag = static_cast<int>(n / 4);
    const int coarse_lag = std::min(cfg.coarse_lag, std::max(1, max_lag));
    const CfoEstimate coarse = estimate_cfo_squaring(frame, coarse_lag);

    int fine_lag = max_lag;
    const double mag = std::abs(coarse.cfo_hz);
    if (mag > 0.0) {
        const double ideal = frame.sample_rate_hz / (8.0 * mag);
        fine_lag = static_cast<int>(std::min<double>(max_lag, ideal));
    }
    fine_lag = std::max(fine_lag, coarse_lag);
    return estimate_cfo_squaring(frame, fine_lag);
}

double envelope_cv(const EnvelopeTrace& env) {
    if (env.values.empty()) throw DomainError("empty envelope");
    const double n = static_cast<double>(env.values.size());
    const double mean = std::accumulate(env.values.begin(), env.values.end(), 0.0) / n;
    if (mean == 0.0) throw DomainError("zero-mean envelope has no defined CV");
    double var = 0.0;
    for (double v : env.values) var += (v - mean) * (v - mean);
    return std::sqrt(var / n) / mean;
}

double envelope_anti_phase(const IqFrame& frame, const AnalysisConfig& cfg) {
    const double window_s = cfg.envelope_window_chips / kChipRateHz;
    std::vector<double> re(frame.samples.size()), im(frame.samples.size());
    for (std::size_t i = 0; i < frame.samples.size(); ++i) {
        re[i] = frame.samples[i].real();
        im[i] = frame.samples[i].imag();
    }
    const EnvelopeTrace full_i = upper_envelope(re, frame.sample_rate_hz, window_s, 'I');
    const EnvelopeTrace full_q = upper_envelope(im, frame.sample_rate_hz, window_s, 'Q');

    // The envelope is smooth at the chip scale, so alignment only needs a few
    // thousand points; decimation keeps the autocorrelation cost bounded.
    const std::size_t stride = std::max<std::size_t>(1, full_i.values.size() / 4096);
    EnvelopeTrace ei, eq;
    for (std::size_t i = 0; i < full_i.values.size(); i += stride) {
        ei.values.push_back(full_i.values[i]);
        eq.values.push_back(full_q.values[i]);
    }
    const std::size_t len = ei.values.size();

    const double mi = std::accumulate(ei.values.begin(), ei.values.end(), 0.0) / double(len);
    double var = 0.0;
    for (double v : ei.values) var += (v - mi) * (v - mi);
    // A CFO-free frame has a flat envelope: nothing periodic to phase-align.
    if (len < 8 || mi <= 0.0 || var < 1e-4 * mi * mi * double(len))
        throw InsufficientDataError("envelope is flat; no CFO humps to align");

    // The envelope period comes from the I-envelope itself: the first local
    // maximum of the circular autocorrelation that recovers at least half
    // the zero-lag power. Shorter-than-a-period frames find none.
    std::vector<double> ac(len / 2 + 1, 0.0);
    for (std::size_t lag = 0; lag <= len / 2; ++lag) {
        double r = 0.0;
        for (std::size_t i = 0; i < len; ++i) {
            const std::size_t j = i + lag < len ? i + lag : i + lag - len;
            r += (ei.values[i] - mi) * (ei.values[j] - mi);
        }
        ac[lag] = r;
    }
    std::size_t period = 0;
    for (std::size_t lag = 2; lag + 1 < ac.size(); ++lag) {
        if (ac[lag] >= ac[lag - 1] && ac[lag] > ac[lag + 1] && ac[lag] >= 0.5 * ac[0]) {
            period = lag;
            break;
        }
    }
    if (period < 2)
        throw InsufficientDataError("frame spans less than one envelope period");

    const double mq = std::accumulate(eq.values.begin(), eq.values.end(), 0.0) / double(len);
    double best = -std::numeric_limits<double>::infinity();
    std::size_t best_lag = 0;
    for (std::size_t lag = 0; lag < period; ++lag) {
        double r = 0.0;
        for (std::size_t i = 0; i < len; ++i) {
            const std::size_t j = i + lag < len ? i + lag : i + lag - len;
            r += (ei.values[i] - mi) * (eq.values[j] - mq);
        }
        if (r > best) {
            best = r;
            best_lag = lag;
        }
    }
    double fraction = static_cast<double>(best_lag) / static_cast<double>(period);
    fraction -= std::floor(fraction);
    return fraction;
}

std::vector<TrajectoryPoint> warmup_trajectory(const DatasetContainer& dataset, int device_id,
                                               const AnalysisConfig& cfg) {
    std::vector<const IqFrame*> frames;
    for (const auto& fr : dataset.frames)
        if (fr.device_id == device_id) frames.push_back(&fr);
    if (frames.empty())
        throw DomainError("dataset has no frames for device " + std::to_string(device_id));
    std::sort(frames.begin(), frames.end(), [](const IqFrame* a, const IqFrame* b) {
        return a->t_since_poweron_s < b->t_since_poweron_s;
    });

    const double window_s = cfg.envelope_window_chips / kChipRateHz;
    std::vector<TrajectoryPoint> out;
    out.reserve(frames.size());
    for (const IqFrame* fr : frames) {
        const CfoEstimate est = estimate_cfo(*fr, cfg);
        std::vector<double> re(fr->samples.size());
        for (std::size_t i = 0; i < fr->samples.size(); ++i) re[i] = fr->samples[i].real();
        const EnvelopeTrace env = upper_envelope(re, fr->sample_rate_hz, window_s, 'I');
        const double min_sep_s = 1.0 / (8.0 * est.valid_range_hz);
        const HumpReport humps = count_humps(env, cfg.prominence_rel, min_sep_s);
        TrajectoryPoint pt;
        pt.t_since_poweron_s = fr->t_since_poweron_s;
        pt.cfo_hz = est.cfo_hz;
        pt.hump_count = humps.count;
        pt.hump_rate_hz = humps.hump_rate_hz;
        out.push_back(pt);
    }
    return out;
}

}
