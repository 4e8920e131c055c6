// Acceptance gate: twelve end-to-end checks over the full pipeline, one
// PASS/FAIL line each, nonzero exit when any fail. Heavier experiment runs
// are shared between the checks that grade different aspects of them.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "rffp/analysis.hpp"
#include "rffp/capture.hpp"
#include "rffp/channel.hpp"
#include "rffp/config.hpp"
#include "rffp/devices.hpp"
#include "rffp/errors.hpp"
#include "rffp/fingerprint.hpp"
#include "rffp/nn.hpp"
#include "rffp/phy80211b.hpp"
#include "rffp/rng.hpp"

using namespace rffp;

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

IqFrame frame_with_cfo(double cfo_hz, std::size_t payload_len = 18) {
    FrameSpec spec;
    spec.payload_bytes.assign(payload_len, 0);
    IqStream s = synthesize_frame(spec);
    if (cfo_hz != 0.0) s = apply_constant_cfo(s, cfo_hz);
    IqFrame fr;
    fr.samples = std::move(s.samples);
    fr.sample_rate_hz = s.sample_rate_hz;
    return fr;
}

EnvelopeTrace i_envelope(const IqFrame& fr) {
    std::vector<double> re(fr.samples.size());
    for (std::size_t i = 0; i < re.size(); ++i) re[i] = fr.samples[i].real();
    return upper_envelope(re, fr.sample_rate_hz, 3.0 / kChipRateHz, 'I');
}

int humps_at(double cfo_hz) {
    const IqFrame fr = frame_with_cfo(cfo_hz, 1198);  // exactly 10 ms on air
    return count_humps(i_envelope(fr), 0.25, 60e-6).count;
}

// Desk-scale three-day dataset: 5 devices, min1 + min12, 200 frames/window.
std::vector<DatasetContainer> desk_days(ChannelPreset preset) {
    PopulationSpec pop;
    pop.num_devices = 5;
    const std::vector<DeviceProfile> profiles = sample_population(pop);

    const ChannelSpec channel = preset_channel(preset, 11.25e6);
    std::vector<DatasetContainer> days;
    for (int day = 1; day <= 3; ++day) {
        SessionSpec session;
        session.device_ids = {0, 1, 2, 3, 4};
        session.day_label = day;
        session.windows = {window_by_name("min1"), window_by_name("min12")};
        session.frames_per_window = 200;
        days.push_back(run_session(profiles, session, channel, FrameSpec{}, 42));
    }
    return days;
}

struct Grids {
    std::vector<std::vector<double>> e1, e2, e3;
};

// Shared by criteria 7 and 8; built on first use.
const Grids& wireless_grids() {
    static const Grids grids = [] {
        const std::vector<DatasetContainer> days = desk_days(ChannelPreset::wireless);
        ExperimentConfig config;
        Grids g;
        g.e1 = run_experiment(Scenario::e1_train12_test1, days, config).accuracy_grid;
        g.e2 = run_experiment(Scenario::e2_train12_test12, days, config).accuracy_grid;
        g.e3 = run_experiment(Scenario::e3_train1_test1, days, config).accuracy_grid;
        return g;
    }();
    return grids;
}

double grid_mean(const std::vector<std::vector<double>>& g, bool diagonal) {
    double acc = 0.0;
    int n = 0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        for (std::size_t j = 0; j < g[i].size(); ++j) {
            if ((i == j) != diagonal) continue;
            acc += g[i][j];
            ++n;
        }
    }
    return acc / n;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

bool criterion1(std::string& note) {
    std::ostringstream counts;
    bool ok = true;
    for (double f : {200.0, 500.0, 1000.0, 2000.0}) {
        const int count = humps_at(f);
        const long want = std::lround(2.0 * f * 0.01);
        ok = ok && std::labs(count - want) <= 1;
        counts << (f == 200.0 ? "" : "/") << count;
    }
    note = "hump counts " + counts.str() + " for 200/500/1000/2000 Hz over 10 ms";
    return ok;
}

bool criterion2(std::string& note) {
    const IqFrame fr = frame_with_cfo(0.0, 1198);
    const EnvelopeTrace env = i_envelope(fr);
    const double cv = envelope_cv(env);
    const int count = count_humps(env, 0.25, 60e-6).count;
    note = "CFO 0 gives envelope CV " + fmt(cv) + " and hump count " + std::to_string(count);
    return cv < 0.02 && count == 0;
}

bool criterion3(std::string& note) {
    std::vector<int> counts;
    for (double f : {0.0, 100.0, 500.0, 1000.0}) counts.push_back(humps_at(f));
    bool ok = true;
    std::ostringstream text;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        if (i > 0) ok = ok && counts[i] > counts[i - 1];
        text << (i == 0 ? "" : "/") << counts[i];
    }
    note = "counts " + text.str() + " strictly increase over 0/100/500/1000 Hz";
    return ok;
}

bool criterion4(std::string& note) {
    bool ok = true;
    double worst_rel = 0.0;
    for (double f : {100.0, -500.0, 2000.0, -10000.0, 20000.0}) {
        const FrameSpec spec;
        const IqStream clean = apply_constant_cfo(synthesize_frame(spec), f);
        double mean = 0.0;
        for (int k = 0; k < 50; ++k) {
            const IqStream rx =
                awgn(clean, 20.0, mix_seed(0xACC4ull, std::uint64_t(std::llround(f) + 30000),
                                           std::uint64_t(k)));
            IqFrame fr;
            fr.samples = rx.samples;
            fr.sample_rate_hz = rx.sample_rate_hz;
            mean += estimate_cfo(fr).cfo_hz / 50.0;
        }
        const double rel = std::abs(mean - f) / std::abs(f);
        worst_rel = std::max(worst_rel, rel);
        ok = ok && rel <= 0.01;
    }
    note = "50-frame mean estimates at 20 dB within 1% over [100 Hz, 20 kHz] (worst " +
           fmt(100.0 * worst_rel) + "%)";
    return ok;
}

bool criterion5(std::string& note) {
    bool ok = true;
    double lo = 1.0, hi = 0.0;
    for (double f : {2.0 / 560e-6, 5000.0, 8000.0}) {
        const IqFrame fr = frame_with_cfo(f);
        if (count_humps(i_envelope(fr), 0.25, 20e-6).count < 4) {
            ok = false;
            continue;
        }
        const double offset = envelope_anti_phase(fr);
        lo = std::min(lo, offset);
        hi = std::max(hi, offset);
        ok = ok && offset >= 0.45 && offset <= 0.55;
    }
    note = "I/Q envelope offsets in [" + fmt(lo) + ", " + fmt(hi) + "] on 4+ hump frames";
    return ok;
}

bool criterion6(std::string& note) {
    PopulationSpec pop;
    pop.num_devices = 5;
    const std::vector<DeviceProfile> profiles = sample_population(pop);

    SessionSpec session;
    session.device_ids = {0, 1, 2, 3, 4};
    session.day_label = 1;
    for (int minute = 1; minute <= 20; ++minute) {
        CaptureWindow w;
        w.start_s = 60.0 * minute;
        w.end_s = 60.0 * minute + 30.0;
        w.name = "t" + std::to_string(minute);
        session.windows.push_back(w);
    }
    session.frames_per_window = 1;

    const ChannelSpec channel = preset_channel(ChannelPreset::wireless, 11e6);
    const DatasetContainer ds = run_session(profiles, session, channel, FrameSpec{}, 42);

    bool ok = true;
    double worst_track = 0.0, worst_spread = 0.0;
    for (const DeviceProfile& p : profiles) {
        const std::vector<TrajectoryPoint> traj = warmup_trajectory(ds, p.device_id);
        ok = ok && traj.size() == 20;
        double settled_lo = 1e18, settled_hi = -1e18;
        for (const TrajectoryPoint& pt : traj) {
            const double want = cfo_at(p, pt.t_since_poweron_s);
            const double rel = std::abs(pt.cfo_hz - want) / std::abs(want);
            worst_track = std::max(worst_track, rel);
            ok = ok && rel <= 0.05;
            if (pt.t_since_poweron_s >= 3.0 * p.warmup_tau_s) {
                settled_lo = std::min(settled_lo, pt.cfo_hz);
                settled_hi = std::max(settled_hi, pt.cfo_hz);
            }
        }
        const double spread = (settled_hi - settled_lo) / std::abs(p.cfo_initial_delta_hz);
        worst_spread = std::max(worst_spread, spread);
        ok = ok && spread < 0.05;
    }
    note = "20-minute trajectories track cfo_at (worst " + fmt(100.0 * worst_track) +
           "%), settled spread " + fmt(100.0 * worst_spread) + "% of delta0";
    return ok;
}

bool criterion7(std::string& note) {
    const Grids& g = wireless_grids();
    const double e2_diag = grid_mean(g.e2, true);
    double e1_mean = 0.0, min_gap = 1.0;
    for (std::size_t i = 0; i < g.e1.size(); ++i) {
        for (std::size_t j = 0; j < g.e1[i].size(); ++j) {
            e1_mean += g.e1[i][j] / 9.0;
            min_gap = std::min(min_gap, g.e2[i][j] - g.e1[i][j]);
        }
    }
    note = "E2 same-day mean " + fmt(e2_diag) + ", E1 mean " + fmt(e1_mean) +
           ", min E2-E1 cell gap " + fmt(min_gap);
    return e2_diag >= 0.95 && e1_mean <= 0.5 && min_gap >= 0.30;
}

bool criterion8(std::string& note) {
    const Grids& g = wireless_grids();
    bool ok = true;
    double e2_worst = 1.0, e3_worst = 1.0;
    for (std::size_t i = 0; i < g.e1.size(); ++i) {
        for (std::size_t j = 0; j < g.e1[i].size(); ++j) {
            e2_worst = std::min(e2_worst, g.e2[i][j] - g.e1[i][j]);
            ok = ok && g.e2[i][j] > g.e1[i][j];
            if (i != j) {
                e3_worst = std::min(e3_worst, g.e3[i][j] - g.e1[i][j]);
                ok = ok && g.e3[i][j] > g.e1[i][j];
            }
        }
    }
    note = "E2 beats E1 on every cell (min margin " + fmt(e2_worst) +
           "), E3 beats E1 cross-day (min margin " + fmt(e3_worst) + ")";
    return ok;
}

bool criterion9(std::string& note) {
    const double wireless_cross = grid_mean(wireless_grids().e2, false);
    ExperimentConfig config;
    const std::vector<DatasetContainer> days = desk_days(ChannelPreset::wired);
    const std::vector<std::vector<double>> wired =
        run_experiment(Scenario::e2_train12_test12, days, config).accuracy_grid;
    const double wired_cross = grid_mean(wired, false);
    note = "E2 cross-day mean wired " + fmt(wired_cross) + " >= wireless " +
           fmt(wireless_cross);
    return wired_cross >= wireless_cross;
}

bool criterion10(std::string& note) {
    // Analytic gradient vs central differences on a 2-class, width-64 toy.
    const int width = 64;
    Rng data_rng(404);
    std::vector<std::vector<float>> tensors;
    std::vector<const float*> inputs;
    std::vector<int> labels;
    double scale = 1.0;
    for (int cls = 0; cls < 2; ++cls) {
        for (int k = 0; k < 2; ++k) {
            std::vector<float> t(2 * std::size_t(width));
            const double f = cls == 0 ? 3.0 : 9.0;
            const double phase = kTwoPi * data_rng.uniform();
            for (int i = 0; i < width; ++i) {
                const double ph = phase + kTwoPi * f * double(i) / double(width);
                t[std::size_t(i)] = float(std::cos(ph));
                t[std::size_t(width + i)] = float(std::sin(ph));
            }
            tensors.push_back(std::move(t));
            labels.push_back(cls);
        }
    }
    for (const auto& t : tensors) inputs.push_back(t.data());

    CnnModel model = make_cnn(2, width, 7);
    calibrate_cnn(model, inputs, scale);
    std::vector<double> grad;
    cnn_loss_grad(model, inputs, labels, scale, grad);
    const std::vector<double> params = cnn_get_params(model);

    Rng pick(3);
    double worst = 0.0;
    const double eps = 1e-5;
    std::vector<std::size_t> idx = {0, grad.size() - 1};
    for (int k = 0; k < 64; ++k) idx.push_back(pick.below(grad.size()));
    for (std::size_t i : idx) {
        std::vector<double> bumped = params;
        bumped[i] = params[i] + eps;
        cnn_set_params(model, bumped);
        std::vector<double> scratch;
        const double up = cnn_loss_grad(model, inputs, labels, scale, scratch);
        bumped[i] = params[i] - eps;
        cnn_set_params(model, bumped);
        const double dn = cnn_loss_grad(model, inputs, labels, scale, scratch);
        const double numeric = (up - dn) / (2.0 * eps);
        const double denom = std::max(1.0, std::abs(numeric) + std::abs(grad[i]));
        worst = std::max(worst, std::abs(numeric - grad[i]) / denom);
    }
    bool ok = worst < 1e-4;

    // 5-fold split bookkeeping at 4000 examples.
    std::vector<LabeledExample> examples(4000);
    for (std::size_t i = 0; i < examples.size(); ++i) examples[i].label = int(i % 5);
    const std::vector<FoldPair> folds = kfold_split(examples, 5, 11);
    std::vector<int> seen(examples.size(), 0);
    ok = ok && folds.size() == 5;
    for (const FoldPair& fold : folds) {
        ok = ok && fold.train.size() == 3200 && fold.test.size() == 800;
        for (std::size_t i : fold.test) ++seen[i];
        std::vector<char> in_train(examples.size(), 0);
        for (std::size_t i : fold.train) in_train[i] = 1;
        for (std::size_t i : fold.test) ok = ok && !in_train[i];
    }
    for (int s : seen) ok = ok && s == 1;

    note = "gradcheck worst rel err " + std::to_string(worst) +
           "; 5-fold splits 3200/800, disjoint and exhaustive";
    return ok;
}

bool criterion11(std::string& note) {
    PopulationSpec pop;
    pop.num_devices = 2;
    const std::vector<DeviceProfile> profiles = sample_population(pop);

    SessionSpec session;
    session.device_ids = {0, 1};
    session.day_label = 1;
    session.windows = {window_by_name("min1"), window_by_name("min12")};
    session.frames_per_window = 6;
    const ChannelSpec channel = preset_channel(ChannelPreset::wired, 11.25e6);

    const std::string path_a = "/tmp/rffp_accept_a.iqc1";
    const std::string path_b = "/tmp/rffp_accept_b.iqc1";
    DatasetContainer ds = run_session(profiles, session, channel, FrameSpec{}, 77);
    write_container(path_a, ds);
    const DatasetContainer back = read_container(path_a);
    write_container(path_b, back);

    auto slurp = [](const std::string& path) {
        std::string bytes;
        if (FILE* f = std::fopen(path.c_str(), "rb")) {
            char buf[65536];
            std::size_t n;
            while ((n = std::fread(buf, 1, sizeof buf, f)) > 0) bytes.append(buf, n);
            std::fclose(f);
        }
        return bytes;
    };
    bool ok = !slurp(path_a).empty() && slurp(path_a) == slurp(path_b);

    // Same seed, same bytes: the container write is a pure function of it.
    const DatasetContainer again = run_session(profiles, session, channel, FrameSpec{}, 77);
    write_container(path_b, again);
    ok = ok && slurp(path_a) == slurp(path_b);

    // Detection over a rendered stretch at 20 dB: every frame back, +/-64.
    ChannelSpec clean;
    clean.snr_db = kNoNoise;
    clean.rx_sample_rate_hz = 11e6;
    clean.gain_jitter = false;
    SessionSpec one;
    one.device_ids = {0};
    one.day_label = 1;
    one.windows = {window_by_name("min12")};
    one.frames_per_window = 8;
    const DatasetContainer stretch = run_session(profiles, one, clean, FrameSpec{}, 3);
    const double gap_s = 200e-6;
    IqStream rendered = render_window_stream(stretch.frames, gap_s);
    rendered = awgn(rendered, 20.0, 99);
    const auto hits = detect_packets(rendered, 0.1);
    ok = ok && hits.size() == 8;
    const std::size_t frame_len = stretch.frames[0].samples.size();
    const std::size_t hop = frame_len + std::size_t(std::llround(gap_s * 11e6));
    for (std::size_t k = 0; k < hits.size() && k < 8; ++k) {
        const long long want_start = static_cast<long long>(k * hop);
        const long long want_end = want_start + static_cast<long long>(frame_len);
        ok = ok && std::llabs(static_cast<long long>(hits[k].first) - want_start) <= 64;
        ok = ok && std::llabs(static_cast<long long>(hits[k].second) - want_end) <= 64;
    }

    // Identical seeds give byte-identical experiment reports.
    std::vector<DatasetContainer> days;
    days.push_back(std::move(ds));
    ExperimentConfig config;
    config.kfold = 3;
    config.hyper.epochs = 5;
    const std::string rep_a = report_to_json(
        run_experiment(Scenario::e3_train1_test1, days, config), "v", "h").dump();
    const std::string rep_b = report_to_json(
        run_experiment(Scenario::e3_train1_test1, days, config), "v", "h").dump();
    ok = ok && rep_a == rep_b;

    note = "IQC1 round-trip and reruns byte-identical; " + std::to_string(hits.size()) +
           "/8 frames detected within 64 samples; reports byte-identical";
    return ok;
}

bool criterion12(std::string& note) {
    bool ok = true;
    for (int lag = -10; lag <= 10; ++lag) {
        double acc = 0.0;
        for (int i = 0; i < 11; ++i) {
            const int j = i + lag;
            if (j >= 0 && j < 11) acc += kBarker[std::size_t(i)] * kBarker[std::size_t(j)];
        }
        if (lag == 0)
            ok = ok && acc == 11.0;
        else
            ok = ok && std::abs(acc) <= 1.0;
    }

    FrameSpec spec;
    Rng payload_rng(88);
    spec.payload_bytes.resize(37);
    for (auto& b : spec.payload_bytes)
        b = static_cast<std::uint8_t>(payload_rng.below(256));
    const IqStream tx = synthesize_frame(spec);
    const std::vector<std::uint8_t> mpdu = ideal_receive_mpdu(tx, spec.oversample);
    ok = ok && mpdu.size() == spec.mpdu_len();
    for (std::size_t i = 0; i < spec.payload_bytes.size() && ok; ++i)
        ok = mpdu[24 + i] == spec.payload_bytes[i];

    for (std::size_t len : {std::size_t(0), std::size_t(18), std::size_t(1198)}) {
        FrameSpec s;
        s.payload_bytes.assign(len, 0);
        const double want = (192.0 + 8.0 * double(s.mpdu_len())) * 1e-6;
        ok = ok && frame_duration_s(s) == want;
    }
    note = "Barker autocorrelation 11 with unit sidelobes; ideal receiver and "
           "duration formula exact";
    return ok;
}

}  // namespace

int main() {
    struct Entry {
        int number;
        double budget_s;
        std::function<bool(std::string&)> body;
    };
    const std::vector<Entry> entries = {
        {1, 10.0, criterion1},  {2, 5.0, criterion2},   {3, 10.0, criterion3},
        {4, 30.0, criterion4},  {5, 5.0, criterion5},   {6, 120.0, criterion6},
        {7, 600.0, criterion7}, {8, 600.0, criterion8}, {9, 600.0, criterion9},
        {10, 30.0, criterion10}, {11, 60.0, criterion11}, {12, 5.0, criterion12},
    };

    int failures = 0;
    for (const Entry& entry : entries) {
        std::string note;
        bool ok = false;
        const auto begin = std::chrono::steady_clock::now();
        try {
            ok = entry.body(note);
        } catch (const std::exception& e) {
            ok = false;
            note = std::string("exception: ") + e.what();
        }
        const double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - begin).count();
        if (elapsed > entry.budget_s) {
            ok = false;
            note += " [over " + std::to_string(entry.budget_s) + " s budget]";
        }
        std::printf("%s criterion %d: %s [%.1f s]\n", ok ? "PASS" : "FAIL", entry.number,
                    note.c_str(), elapsed);
        std::fflush(stdout);
        if (!ok) ++failures;
    }
    return failures == 0 ? 0 : 1;
}
