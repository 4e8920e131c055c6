#pragma once
// Complex baseband sample stream, the currency between synthesis, channel,
// capture, and analysis.

#include <complex>
#include <cstddef>
#include <vector>

namespace rffp {

using cplx = std::complex<double>;

struct IqStream {
    double sample_rate_hz = 0.0;
    double t0_since_poweron_s = 0.0;
    std::vector<cplx> samples;

    std::size_t size() const { return samples.size(); }
    double duration_s() const {
        return sample_rate_hz > 0.0 ? double(samples.size()) / sample_rate_hz : 0.0;
    }
};

inline double mean_power(const IqStream& s) {
    if (s.samples.empty()) return 0.0;
    double acc = 0.0;
    for (const cplx& v : s.samples) acc += std::norm(v);
    return acc / double(s.samples.size());
}

}
