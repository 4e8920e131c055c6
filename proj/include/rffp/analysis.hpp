#pragma once
// Envelope extraction, hump counting, and CFO estimation: the quantitative
// bridge between envelope shape and oscillator offset.

#include <cstddef>
#include <vector>

#include "rffp/capture.hpp"
#include "rffp/iq.hpp"

namespace rffp {

struct EnvelopeTrace {
    double sample_rate_hz = 0.0;
    std::vector<double> values;  // non-negative upper envelope
    char component_tag = 'I';
};

struct HumpReport {
    int count = 0;
    std::vector<std::size_t> peak_indices;  // strictly increasing
    double hump_rate_hz = 0.0;              // count / analyzed duration
};

enum class CfoMethod { squaring, envelope };

struct CfoEstimate {
    double cfo_hz = 0.0;
    CfoMethod method = CfoMethod::squaring;
    double valid_range_hz = 0.0;  // ambiguity bound; |cfo_hz| <= valid_range_hz
};

struct AnalysisConfig {
    double envelope_window_chips = 3.0;  // sliding-max window, in chip periods
    double prominence_rel = 0.25;        // of the envelope's global maximum
    int coarse_lag = 32;                 // first squaring pass of the adaptive estimator
};

// Sliding-window maximum of |component| over window_s, then a centered
// moving average over the same window. Both passes trim edges, so the trace
// is 2*(w-1) samples shorter than the input (w = window in samples).
EnvelopeTrace upper_envelope(const std::vector<double>& component, double sample_rate_hz,
                             double window_s, char component_tag = 'I');

// Local maxima with prominence >= prominence_rel x global max and pairwise
// separation >= min_sep_s. Plateaus count once; a flat trace has no humps.
HumpReport count_humps(const EnvelopeTrace& env, double prominence_rel, double min_sep_s);

// Squaring estimator: x^2 strips DBPSK chips, leaving a tone at twice the
// CFO. cfo = angle(sum x^2[n] conj(x^2[n-lag])) * fs / (4*pi*lag). A true CFO
// beyond fs/(4*lag) aliases silently; the caller owns the lag choice.
CfoEstimate estimate_cfo_squaring(const IqFrame& frame, int lag);

// Two-stage wrapper: a short-lag pass brackets the CFO, then a lag matched to
// that bracket refines it. Handles the full warm-up range without aliasing.
CfoEstimate estimate_cfo(const IqFrame& frame, const AnalysisConfig& cfg = {});

// Circular cross-correlation lag between the I and Q envelopes as a fraction
// of the envelope period. Anti-phase envelopes sit at 0.5. Throws
// InsufficientDataError when the frame spans less than one envelope period.
double envelope_anti_phase(const IqFrame& frame, const AnalysisConfig& cfg = {});

// std/mean of the envelope values; a constant-envelope check for CFO = 0.
double envelope_cv(const EnvelopeTrace& env);

struct TrajectoryPoint {
    double t_since_poweron_s = 0.0;
    double cfo_hz = 0.0;
    int hump_count = 0;
    double hump_rate_hz = 0.0;
};

// Per-frame CFO estimate and hump rate for one device, sorted by capture
// time. Throws DomainError when the dataset has no frames for the device.
std::vector<TrajectoryPoint> warmup_trajectory(const DatasetContainer& dataset, int device_id,
                                               const AnalysisConfig& cfg = {});

}
