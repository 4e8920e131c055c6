#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "rffp/capture.hpp"
#include "rffp/errors.hpp"
#include "rffp/rng.hpp"

using namespace rffp;

namespace {

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

std::string file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

DatasetContainer tiny_container() {
    DatasetContainer c;
    c.metadata = {{"format", "IQC1"}, {"sample_rate_hz", 11.25e6}, {"day_label", 2}};
    for (int k = 0; k < 3; ++k) {
        IqFrame fr;
        fr.sample_rate_hz = 11.25e6;
        fr.device_id = k;
        fr.day_label = 2;
        fr.window_index = k % 2;
        fr.frame_index = 7 + k;
        fr.t_since_poweron_s = 60.0 + 0.25 * k;
        // Values exactly representable in f32 keep the round-trip lossless.
        for (int i = 0; i < 50 + k; ++i)
            fr.samples.emplace_back(double(i) / 256.0, double(-i) / 512.0);
        c.frames.push_back(std::move(fr));
    }
    return c;
}

SessionSpec tiny_session() {
    SessionSpec s;
    s.device_ids = {0, 1};
    s.day_label = 1;
    s.windows = {{0.0, 0.2, "min1"}, {1.0, 1.2, "w2"}};
    s.frames_per_window = 4;
    return s;
}

ChannelSpec native_channel() {
    ChannelSpec spec;
    spec.snr_db = kNoNoise;
    spec.rx_sample_rate_hz = kChipRateHz;
    spec.gain_jitter = false;
    return spec;
}

}  // namespace

TEST_SUITE("capture") {

TEST_CASE("IQC1 containers round-trip exactly and rewrite byte-identically") {
    const std::string path_a = temp_path("rffp_cap_a.iqc1");
    const std::string path_b = temp_path("rffp_cap_b.iqc1");
    const DatasetContainer c = tiny_container();

    write_container(path_a, c);
    const DatasetContainer r = read_container(path_a);
    CHECK(r.metadata == c.metadata);
    REQUIRE(r.frames.size() == c.frames.size());
    for (std::size_t i = 0; i < c.frames.size(); ++i) {
        const IqFrame& want = c.frames[i];
        const IqFrame& got = r.frames[i];
        CHECK(got.device_id == want.device_id);
        CHECK(got.day_label == want.day_label);
        CHECK(got.window_index == want.window_index);
        CHECK(got.frame_index == want.frame_index);
        CHECK(got.t_since_poweron_s == want.t_since_poweron_s);
        CHECK(got.sample_rate_hz == 11.25e6);
        CHECK(got.samples == want.samples);
    }

    write_container(path_b, r);
    CHECK(file_bytes(path_a) == file_bytes(path_b));
    std::remove(path_a.c_str());
    std::remove(path_b.c_str());
}

TEST_CASE("read_container rejects bad magic and truncated files") {
    const std::string path = temp_path("rffp_cap_bad.iqc1");
    {
        std::ofstream out(path, std::ios::binary);
        out << "JUNKJUNKJUNKJUNK";
    }
    CHECK_THROWS_AS(read_container(path), DataError);

    write_container(path, tiny_container());
    const std::string whole = file_bytes(path);
    {
        std::ofstream out(path, std::ios::binary);
        out << whole.substr(0, whole.size() - 7);
    }
    CHECK_THROWS_AS(read_container(path), DataError);
    std::remove(path.c_str());
    CHECK_THROWS_AS(read_container(path), IoError);
}

TEST_CASE("run_session renders the full frame grid deterministically") {
    PopulationSpec pop;
    pop.num_devices = 2;
    const auto profiles = sample_population(pop);
    const SessionSpec session = tiny_session();
    const FrameSpec frame;

    const DatasetContainer a = run_session(profiles, session, native_channel(), frame, 42);
    const DatasetContainer b = run_session(profiles, session, native_channel(), frame, 42);
    REQUIRE(a.frames.size() == 2 * 2 * 4);
    for (std::size_t i = 0; i < a.frames.size(); ++i)
        CHECK(a.frames[i].samples == b.frames[i].samples);

    const double slot = frame_duration_s(frame) + session.inter_frame_gap_s;
    for (const IqFrame& fr : a.frames) {
        const CaptureWindow& w = session.windows[std::size_t(fr.window_index)];
        CHECK(fr.t_since_poweron_s == w.start_s + fr.frame_index * slot);
        CHECK(fr.samples.size() == 6160);
    }
    CHECK(a.metadata.at("master_seed").get<std::uint64_t>() == 42);
    CHECK(a.metadata.at("windows").size() == 2);
}

TEST_CASE("frame content is keyed by window identity, not list position") {
    PopulationSpec pop;
    pop.num_devices = 2;
    const auto profiles = sample_population(pop);
    ChannelSpec chan = native_channel();
    chan.snr_db = 25.0;  // exercise the stochastic stages
    chan.gain_jitter = true;
    const FrameSpec frame;

    SessionSpec both = tiny_session();
    SessionSpec first_only = both, second_only = both;
    first_only.windows = {both.windows[0]};
    second_only.windows = {both.windows[1]};

    const DatasetContainer merged = run_session(profiles, both, chan, frame, 42);
    const DatasetContainer part1 = run_session(profiles, first_only, chan, frame, 42);
    const DatasetContainer part2 = run_session(profiles, second_only, chan, frame, 42);

    for (const IqFrame& fr : merged.frames) {
        const DatasetContainer& part = fr.window_index == 0 ? part1 : part2;
        bool found = false;
        for (const IqFrame& cand : part.frames) {
            if (cand.device_id != fr.device_id || cand.frame_index != fr.frame_index) continue;
            CHECK(cand.samples == fr.samples);
            CHECK(cand.t_since_poweron_s == fr.t_since_poweron_s);
            found = true;
        }
        CHECK(found);
    }
}

TEST_CASE("run_session rejects sessions that do not fit") {
    PopulationSpec pop;
    pop.num_devices = 2;
    const auto profiles = sample_population(pop);
    const FrameSpec frame;

    SessionSpec s = tiny_session();
    s.windows = {{0.0, 0.001, "tight"}};
    s.frames_per_window = 2;  // two 560 us frames cannot fit in 1 ms
    CHECK_THROWS_AS(run_session(profiles, s, native_channel(), frame, 1), ConfigError);

    s = tiny_session();
    s.device_ids = {5};
    CHECK_THROWS_AS(run_session(profiles, s, native_channel(), frame, 1), ConfigError);

    s = tiny_session();
    s.windows = {{2.0, 1.0, "backwards"}};
    CHECK_THROWS_AS(run_session(profiles, s, native_channel(), frame, 1), ConfigError);
}

TEST_CASE("window_examples cuts non-overlapping tensors and drops the tail") {
    IqFrame fr;
    fr.sample_rate_hz = 45e6;
    fr.device_id = 3;
    fr.day_label = 2;
    fr.window_index = 1;
    fr.t_since_poweron_s = 61.5;
    fr.samples.resize(25155);
    for (std::size_t i = 0; i < fr.samples.size(); ++i)
        fr.samples[i] = cplx(double(i), -double(i));

    const auto examples = window_examples(fr, 8192);
    REQUIRE(examples.size() == 3);  // 25155 = 3*8192 + 579 dropped
    for (std::size_t k = 0; k < examples.size(); ++k) {
        const LabeledExample& ex = examples[k];
        CHECK(ex.width == 8192);
        CHECK(ex.label == 3);
        CHECK(ex.day_label == 2);
        CHECK(ex.window_index == 1);
        CHECK(ex.t_since_poweron_s == 61.5);
        REQUIRE(ex.tensor.size() == 2 * 8192);
        // Row 0 holds I, row 1 holds Q, in frame order.
        CHECK(ex.tensor[0] == float(8192 * k));
        CHECK(ex.tensor[8191] == float(8192 * k + 8191));
        CHECK(ex.tensor[8192] == -float(8192 * k));
        CHECK(ex.tensor[2 * 8192 - 1] == -float(8192 * k + 8191));
    }

    CHECK_THROWS_AS(window_examples(fr, 0), ConfigError);
    CHECK_THROWS_AS(window_examples(fr, 25156), DomainError);
}

TEST_CASE("detect_packets recovers frame boundaries within 64 samples") {
    PopulationSpec pop;
    pop.num_devices = 1;
    const auto profiles = sample_population(pop);
    SessionSpec s = tiny_session();
    s.device_ids = {0};
    s.windows = {{0.0, 0.2, "min1"}};
    s.frames_per_window = 3;
    const DatasetContainer c = run_session(profiles, s, native_channel(), FrameSpec{}, 9);

    IqStream stream = render_window_stream(c.frames, s.inter_frame_gap_s);
    const std::size_t frame_n = 6160;
    const std::size_t gap_n = std::size_t(std::llround(100e-6 * kChipRateHz));
    REQUIRE(stream.samples.size() == 3 * frame_n + 2 * gap_n);

    SUBCASE("clean stream") {}
    SUBCASE("noisy stream at 20 dB") {
        stream = awgn(stream, 20.0, 1234);
    }

    const auto spans = detect_packets(stream, 0.1);
    REQUIRE(spans.size() == 3);
    for (std::size_t k = 0; k < 3; ++k) {
        const double start = double(k * (frame_n + gap_n));
        const double end = start + double(frame_n);
        CHECK(std::abs(double(spans[k].first) - start) <= 64.0);
        CHECK(std::abs(double(spans[k].second) - end) <= 64.0);
    }
}

TEST_CASE("detect_packets yields nothing without gate structure") {
    SUBCASE("pure noise") {
        IqStream noise;
        noise.sample_rate_hz = 11e6;
        Rng rng(7);
        for (int i = 0; i < 20000; ++i)
            noise.samples.emplace_back(0.1 * rng.normal(), 0.1 * rng.normal());
        CHECK(detect_packets(noise, 0.1).empty());
    }
    SUBCASE("empty stream") {
        IqStream empty;
        empty.sample_rate_hz = 11e6;
        CHECK(detect_packets(empty, 0.1).empty());
    }
    SUBCASE("bad threshold") {
        IqStream one;
        one.sample_rate_hz = 11e6;
        one.samples.assign(100, cplx(1.0, 0.0));
        CHECK_THROWS_AS(detect_packets(one, 0.0), ConfigError);
        CHECK_THROWS_AS(detect_packets(one, 1.0), ConfigError);
    }
}

TEST_CASE("a single gapless frame detects as one near-total interval") {
    const IqStream s = synthesize_frame(FrameSpec{});
    const auto spans = detect_packets(s, 0.1);
    REQUIRE(spans.size() == 1);
    const double covered = double(spans[0].second - spans[0].first) / double(s.samples.size());
    CHECK(covered >= 0.99);
}

TEST_CASE("render_window_stream inserts exact inter-frame silence") {
    IqFrame a, b;
    a.sample_rate_hz = b.sample_rate_hz = 11e6;
    a.samples.assign(100, cplx(1.0, 0.0));
    b.samples.assign(50, cplx(0.5, 0.0));
    a.t_since_poweron_s = 1.0;
    b.t_since_poweron_s = 2.0;

    const IqStream out = render_window_stream({a, b}, 10e-6);
    const std::size_t gap_n = 110;
    REQUIRE(out.samples.size() == 100 + gap_n + 50);
    CHECK(out.t0_since_poweron_s == 1.0);
    for (std::size_t i = 100; i < 100 + gap_n; ++i) CHECK(out.samples[i] == cplx(0.0, 0.0));
    CHECK(out.samples[100 + gap_n] == cplx(0.5, 0.0));
    CHECK_THROWS_AS(render_window_stream({}, 10e-6), ConfigError);
}

}
