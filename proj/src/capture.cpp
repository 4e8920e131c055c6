#include "rffp/capture.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>

#include "rffp/errors.hpp"
#include "rffp/rng.hpp"

namespace rffp {

namespace {

const DeviceProfile& find_profile(const std::vector<DeviceProfile>& population, int id) {
    for (const auto& p : population) {
        if (p.device_id == id) return p;
    }
    throw ConfigError("session references device_id " + std::to_string(id) +
                      " absent from the population");
}

void validate_session(const SessionSpec& s, const FrameSpec& f) {
    if (s.device_ids.empty()) throw ConfigError("session has no devices");
    if (s.windows.empty()) throw ConfigError("session has no capture windows");
    if (s.frames_per_window <= 0) throw ConfigError("frames_per_window must be positive");
    if (s.inter_frame_gap_s < 0.0) throw ConfigError("inter_frame_gap_s must be >= 0");
    const double slot = frame_duration_s(f) + s.inter_frame_gap_s;
    for (const auto& w : s.windows) {
        if (!(w.start_s >= 0.0) || !(w.end_s > w.start_s))
            throw ConfigError("capture window [" + std::to_string(w.start_s) + ", " +
                              std::to_string(w.end_s) + ") is malformed");
        if (s.frames_per_window * slot > w.end_s - w.start_s)
            throw ConfigError("window [" + std::to_string(w.start_s) + ", " +
                              std::to_string(w.end_s) + ") cannot hold " +
                              std::to_string(s.frames_per_window) + " frames");
    }
}

class BinWriter {
  public:
    explicit BinWriter(const std::string& path) : f_(std::fopen(path.c_str(), "wb")) {
        if (!f_) throw IoError("cannot open for writing: " + path);
    }
    ~BinWriter() {
        if (f_) std::fclose(f_);
    }
    BinWriter(const BinWriter&) = delete;
    BinWriter& operator=(const BinWriter&) = delete;

    void bytes(const void* p, std::size_t n) {
        if (std::fwrite(p, 1, n, f_) != n) throw IoError("short write");
    }
    void u32(std::uint32_t v) { bytes(&v, sizeof v); }
    void u64(std::uint64_t v) { bytes(&v, sizeof v); }
    void f32(float v) { bytes(&v, sizeof v); }
    void f64(double v) { bytes(&v, sizeof v); }

  private:
    std::FILE* f_;
};

class BinReader {
  public:
    explicit BinReader(const std::string& path) : f_(std::fopen(path.c_str(), "rb")) {
        if (!f_) throw IoError("cannot open for reading: " + path);
    }
    ~BinReader() {
        if (f_) std::fclose(f_);
    }
    BinReader(const BinReader&) = delete;
    BinReader& operator=(const BinReader&) = delete;

    bool at_eof() {
        int c = std::fgetc(f_);
        if (c == EOF) return true;
        std::ungetc(c, f_);
        return false;
    }
    void bytes(void* p, std::size_t n) {
        if (std::fread(p, 1, n, f_) != n) throw DataError("truncated container");
    }
    std::uint32_t u32() {
        std::uint32_t v;
        bytes(&v, sizeof v);
        return v;
    }
    std::uint64_t u64() {
        std::uint64_t v;
        bytes(&v, sizeof v);
        return v;
    }
    float f32() {
        float v;
        bytes(&v, sizeof v);
        return v;
    }
    double f64() {
        double v;
        bytes(&v, sizeof v);
        return v;
    }

  private:
    std::FILE* f_;
};

}  // namespace

DatasetContainer run_session(const std::vector<DeviceProfile>& population,
                             const SessionSpec& session, const ChannelSpec& channel,
                             const FrameSpec& frame, std::uint64_t master_seed) {
    validate_session(session, frame);
    const IqStream clean = synthesize_frame(frame);
    const double slot = frame_duration_s(frame) + session.inter_frame_gap_s;

    DatasetContainer out;
    for (int id : session.device_ids) {
        const DeviceProfile& prof = find_profile(population, id);
        for (std::size_t w = 0; w < session.windows.size(); ++w) {
            const CaptureWindow& win = session.windows[w];
            // The window participates in the seed by identity (its start
            // time), not by list position, so splitting a session into
            // per-window sessions reproduces the same frames.
            const std::uint64_t win_id =
                static_cast<std::uint64_t>(std::llround(win.start_s * 1e6));
            for (int k = 0; k < session.frames_per_window; ++k) {
                const double t = win.start_s + k * slot;
                const std::uint64_t fseed =
                    mix_seed(master_seed, static_cast<std::uint64_t>(session.day_label),
                             static_cast<std::uint64_t>(id),
                             mix_seed(win_id, static_cast<std::uint64_t>(k)));
                IqStream rx = apply_frame_channel(clean, prof, t, channel, fseed);
                IqFrame rec;
                rec.samples = std::move(rx.samples);
                rec.sample_rate_hz = rx.sample_rate_hz;
                rec.device_id = id;
                rec.day_label = session.day_label;
                rec.window_index = static_cast<int>(w);
                rec.frame_index = k;
                rec.t_since_poweron_s = t;
                out.frames.push_back(std::move(rec));
            }
        }
    }

    nlohmann::ordered_json meta;
    meta["format"] = "IQC1";
    meta["sample_rate_hz"] = channel.rx_sample_rate_hz;
    meta["day_label"] = session.day_label;
    meta["master_seed"] = master_seed;
    meta["inter_frame_gap_s"] = session.inter_frame_gap_s;
    meta["frames_per_window"] = session.frames_per_window;
    meta["payload_bytes"] = frame.payload_bytes.size();
    meta["snr_db"] = std::isinf(channel.snr_db) ? 1e9 : channel.snr_db;
    nlohmann::ordered_json wins = nlohmann::ordered_json::array();
    for (const auto& w : session.windows)
        wins.push_back({{"start_s", w.start_s}, {"end_s", w.end_s}, {"name", w.name}});
    meta["windows"] = wins;
    nlohmann::ordered_json devs = nlohmann::ordered_json::array();
    for (int id : session.device_ids) devs.push_back(profile_to_json(find_profile(population, id)));
    meta["devices"] = devs;
    out.metadata = std::move(meta);
    return out;
}

void write_container(const std::string& path, const DatasetContainer& container) {
    BinWriter w(path);
    w.bytes("IQC1", 4);
    w.u32(1);
    const std::string meta = container.metadata.dump();
    w.u64(meta.size());
    w.bytes(meta.data(), meta.size());
    for (const auto& fr : container.frames) {
        w.u32(static_cast<std::uint32_t>(fr.device_id));
        w.u32(static_cast<std::uint32_t>(fr.day_label));
        w.u32(static_cast<std::uint32_t>(fr.window_index));
        w.u32(static_cast<std::uint32_t>(fr.frame_index));
        w.f64(fr.t_since_poweron_s);
        w.u32(static_cast<std::uint32_t>(fr.samples.size()));
        for (const cplx& s : fr.samples) {
            w.f32(static_cast<float>(s.real()));
            w.f32(static_cast<float>(s.imag()));
        }
    }
}

DatasetContainer read_container(const std::string& path) {
    BinReader r(path);
    char magic[4];
    r.bytes(magic, 4);
    if (std::memcmp(magic, "IQC1", 4) != 0) throw DataError("bad container magic");
    const std::uint32_t version = r.u32();
    if (version != 1) throw DataError("unsupported container version " + std::to_string(version));
    const std::uint64_t mlen = r.u64();
    std::string meta(mlen, '\0');
    r.bytes(meta.data(), mlen);

    DatasetContainer out;
    try {
        out.metadata = nlohmann::ordered_json::parse(meta);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("container metadata is not valid JSON: ") + e.what());
    }
    const double fs = out.metadata.value("sample_rate_hz", 0.0);

    while (!r.at_eof()) {
        IqFrame fr;
        fr.device_id = static_cast<int>(r.u32());
        fr.day_label = static_cast<int>(r.u32());
        fr.window_index = static_cast<int>(r.u32());
        fr.frame_index = static_cast<int>(r.u32());
        fr.t_since_poweron_s = r.f64();
        const std::uint32_t n = r.u32();
        fr.samples.resize(n);
        for (std::uint32_t i = 0; i < n; ++i) {
            const float re = r.f32();
            const float im = r.f32();
            fr.samples[i] = cplx(re, im);
        }
        fr.sample_rate_hz = fs;
        out.frames.push_back(std::move(fr));
    }
    return out;
}

std::vector<std::pair<std::size_t, std::size_t>> detect_packets(const IqStream& raw,
                                                                double threshold_rel,
                                                                const DetectConfig& cfg) {
    if (threshold_rel <= 0.0 || threshold_rel >= 1.0)
        throw ConfigError("threshold_rel must lie in (0, 1)");
    if (cfg.avg_window < 1) throw ConfigError("avg_window must be >= 1");
    const std::size_t n = raw.samples.size();
    const std::size_t w = std::min<std::size_t>(static_cast<std::size_t>(cfg.avg_window), n);
    if (n == 0 || w == 0) return {};

    // Trailing moving-average power, aligned so p[i] covers samples ending at i.
    std::vector<double> p(n);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        acc += std::norm(raw.samples[i]);
        if (i >= w) acc -= std::norm(raw.samples[i - w]);
        p[i] = acc / static_cast<double>(std::min(i + 1, w));
    }
    double pmax = 0.0;
    for (double v : p) pmax = std::max(pmax, v);
    // Below the absolute floor the stream is noise or silence, and a gate
    // keyed to its own maximum would dutifully "detect" that noise.
    if (pmax < cfg.min_peak_power) return {};

    const double thr = threshold_rel * pmax;
    std::vector<std::pair<std::size_t, std::size_t>> spans;
    bool above = false;
    std::size_t start = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!above && p[i] >= thr) {
            above = true;
            start = i;
        } else if (above && p[i] < thr) {
            above = false;
            spans.emplace_back(start, i);
        }
    }
    if (above) spans.emplace_back(start, n);

    const std::size_t merge_gap =
        static_cast<std::size_t>(std::llround(cfg.merge_gap_s * raw.sample_rate_hz));
    std::vector<std::pair<std::size_t, std::size_t>> merged;
    for (const auto& s : spans) {
        if (!merged.empty() && s.first - merged.back().second < merge_gap)
            merged.back().second = s.second;
        else
            merged.push_back(s);
    }

    // The w-sample trailing average lags the true edges by up to w samples;
    // relocate each edge with a short average so the reported indices land
    // within a few samples of the actual burst.
    const std::size_t ws = std::min<std::size_t>(8, w);
    std::vector<double> s8(n);
    acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        acc += std::norm(raw.samples[i]);
        if (i >= ws) acc -= std::norm(raw.samples[i - ws]);
        s8[i] = acc / static_cast<double>(std::min(i + 1, ws));
    }
    for (auto& span : merged) {
        const std::size_t lo = span.first > w ? span.first - w : 0;
        std::size_t i = lo;
        while (i < span.second && s8[i] < thr) ++i;
        span.first = (i > ws) ? i - (ws - 1) : 0;
        const std::size_t hi = std::min(n, span.second + w);
        std::size_t j = hi;
        while (j > span.first && s8[j - 1] < thr) --j;
        span.second = j;
    }
    return merged;
}

std::vector<LabeledExample> window_examples(const IqFrame& frame, int width_samples) {
    if (width_samples <= 0) throw ConfigError("window width must be positive");
    const std::size_t width = static_cast<std::size_t>(width_samples);
    if (width > frame.samples.size())
        throw DomainError("window width " + std::to_string(width) + " exceeds frame length " +
                          std::to_string(frame.samples.size()));
    const std::size_t count = frame.samples.size() / width;
    std::vector<LabeledExample> out;
    out.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        LabeledExample ex;
        ex.width = width_samples;
        ex.label = frame.device_id;
        ex.day_label = frame.day_label;
        ex.window_index = frame.window_index;
        ex.t_since_poweron_s = frame.t_since_poweron_s;
        ex.tensor.resize(2 * width);
        for (std::size_t i = 0; i < width; ++i) {
            const cplx& s = frame.samples[k * width + i];
            ex.tensor[i] = static_cast<float>(s.real());
            ex.tensor[width + i] = static_cast<float>(s.imag());
        }
        out.push_back(std::move(ex));
    }
    return out;
}

IqStream render_window_stream(const std::vector<IqFrame>& frames, double gap_s) {
    if (frames.empty()) throw ConfigError("no frames to render");
    const double fs = frames.front().sample_rate_hz;
    const std::size_t gap_n = static_cast<std::size_t>(std::llround(gap_s * fs));
    IqStream out;
    out.sample_rate_hz = fs;
    out.t0_since_poweron_s = frames.front().t_since_poweron_s;
    for (std::size_t i = 0; i < frames.size(); ++i) {
        if (i > 0) out.samples.insert(out.samples.end(), gap_n, cplx(0.0, 0.0));
        out.samples.insert(out.samples.end(), frames[i].samples.begin(),
                           frames[i].samples.end());
    }
    return out;
}

}
