// 802.11b 1 Mbps DSSS frame synthesis and the matching ideal receiver.

#include "rffp/phy80211b.hpp"

#include <cmath>

#include "rffp/errors.hpp"

namespace rffp {

double frame_duration_s(const FrameSpec& spec) {
    return (double(kPreambleHeaderBits) + 8.0 * double(spec.mpdu_len())) / kBitRateBps;
}

std::vector<int> scramble(const std::vector<int>& bits, std::uint8_t seed) {
    if ((seed & 0x7F) == 0) throw DomainError("scramble: zero scrambler state");
    // hist[i] = y[n-(i+1)]; feedback taps at z^-4 and z^-7.
    std::array<int, 7> hist;
    for (int i = 0; i < 7; ++i) hist[std::size_t(i)] = (seed >> i) & 1;
    std::vector<int> out(bits.size());
    for (std::size_t n = 0; n < bits.size(); ++n) {
        const int y = bits[n] ^ hist[3] ^ hist[6];
        out[n] = y;
        for (int i = 6; i > 0; --i) hist[std::size_t(i)] = hist[std::size_t(i - 1)];
        hist[0] = y;
    }
    return out;
}

std::vector<int> descramble(const std::vector<int>& bits, std::uint8_t seed) {
    if ((seed & 0x7F) == 0) throw DomainError("descramble: zero scrambler state");
    // Self-synchronizing inverse: history is the received sequence itself.
    std::array<int, 7> hist;
    for (int i = 0; i < 7; ++i) hist[std::size_t(i)] = (seed >> i) & 1;
    std::vector<int> out(bits.size());
    for (std::size_t n = 0; n < bits.size(); ++n) {
        const int y = bits[n];
        out[n] = y ^ hist[3] ^ hist[6];
        for (int i = 6; i > 0; --i) hist[std::size_t(i)] = hist[std::size_t(i - 1)];
        hist[0] = y;
    }
    return out;
}

std::vector<double> barker_spread(const std::vector<double>& symbols) {
    std::vector<double> chips;
    chips.reserve(symbols.size() * kChipsPerSymbol);
    for (double s : symbols) {
        if (s != 1.0 && s != -1.0)
            throw DomainError("barker_spread: symbols must be +1 or -1");
        for (double c : kBarker) chips.push_back(s * c);
    }
    return chips;
}

std::vector<double> dbpsk_modulate(const std::vector<int>& bits) {
    std::vector<double> symbols;
    symbols.reserve(bits.size());
    double prev = 1.0;
    for (int b : bits) {
        prev = b ? -prev : prev;
        symbols.push_back(prev);
    }
    return symbols;
}

std::vector<int> dbpsk_demodulate(const std::vector<double>& symbols) {
    std::vector<int> bits;
    bits.reserve(symbols.size());
    double prev = 1.0;
    for (double s : symbols) {
        bits.push_back(s == prev ? 0 : 1);
        prev = s;
    }
    return bits;
}

std::uint16_t crc16_ccitt(const std::uint8_t* data, std::size_t len) {
    std::uint16_t crc = 0xFFFF;
    for (std::size_t i = 0; i < len; ++i) {
        crc ^= std::uint16_t(data[i]) << 8;
        for (int b = 0; b < 8; ++b)
            crc = (crc & 0x8000) ? std::uint16_t((crc << 1) ^ 0x1021) : std::uint16_t(crc << 1);
    }
    return std::uint16_t(~crc);
}

std::uint32_t crc32_ieee(const std::uint8_t* data, std::size_t len) {
    std::uint32_t crc = 0xFFFFFFFFu;
    for (std::size_t i = 0; i < len; ++i) {
        crc ^= data[i];
        for (int b = 0; b < 8; ++b)
            crc = (crc & 1u) ? (crc >> 1) ^ 0xEDB88320u : crc >> 1;
    }
    return ~crc;
}

std::vector<int> bytes_to_bits_lsb_first(const std::vector<std::uint8_t>& bytes) {
    std::vector<int> bits;
    bits.reserve(bytes.size() * 8);
    for (std::uint8_t v : bytes)
        for (int b = 0; b < 8; ++b) bits.push_back((v >> b) & 1);
    return bits;
}

std::vector<std::uint8_t> bits_to_bytes_lsb_first(const std::vector<int>& bits) {
    std::vector<std::uint8_t> bytes(bits.size() / 8, 0);
    for (std::size_t i = 0; i < bytes.size() * 8; ++i)
        bytes[i / 8] = std::uint8_t(bytes[i / 8] | (bits[i] & 1) << (i % 8));
    return bytes;
}

static std::vector<std::uint8_t> build_mpdu(const FrameSpec& spec) {
    std::vector<std::uint8_t> mpdu;
    mpdu.reserve(spec.mpdu_len());
    // Data-frame MAC header; every device sends the same spoofed address.
    mpdu.push_back(0x08);  // frame control: type data
    mpdu.push_back(0x00);
    mpdu.push_back(0x00);  // duration
    mpdu.push_back(0x00);
    for (int k = 0; k < 3; ++k)
        for (std::uint8_t b : spec.mac_address) mpdu.push_back(b);
    mpdu.push_back(0x00);  // sequence control
    mpdu.push_back(0x00);
    mpdu.insert(mpdu.end(), spec.payload_bytes.begin(), spec.payload_bytes.end());
    const std::uint32_t fcs = crc32_ieee(mpdu.data(), mpdu.size());
    for (int b = 0; b < 4; ++b) mpdu.push_back(std::uint8_t(fcs >> (8 * b)));
    return mpdu;
}

std::vector<int> frame_bits(const FrameSpec& spec) {
    const std::size_t mpdu_len = spec.mpdu_len();
    // PLCP LENGTH is microseconds of MPDU airtime in a u16.
    if (8 * mpdu_len > 0xFFFF)
        throw ConfigError("frame_bits: payload too large for the PLCP LENGTH field");

    std::vector<int> bits;
    bits.reserve(std::size_t(kPreambleHeaderBits) + 8 * mpdu_len);
    for (int i = 0; i < 128; ++i) bits.push_back(1);  // SYNC
    const std::uint16_t sfd = 0xF3A0;
    for (int b = 0; b < 16; ++b) bits.push_back((sfd >> b) & 1);

    const std::uint16_t length_us = std::uint16_t(8 * mpdu_len);
    const std::array<std::uint8_t, 4> hdr = {0x0A, 0x00, std::uint8_t(length_us & 0xFF),
                                             std::uint8_t(length_us >> 8)};
    for (std::uint8_t v : hdr)
        for (int b = 0; b < 8; ++b) bits.push_back((v >> b) & 1);
    const std::uint16_t crc = crc16_ccitt(hdr.data(), hdr.size());
    for (int b = 0; b < 16; ++b) bits.push_back((crc >> b) & 1);

    const std::vector<int> mpdu_bits = bytes_to_bits_lsb_first(build_mpdu(spec));
    bits.insert(bits.end(), mpdu_bits.begin(), mpdu_bits.end());
    return bits;
}

IqStream synthesize_frame(const FrameSpec& spec) {
    if (spec.oversample < 1) throw ConfigError("synthesize_frame: oversample must be >= 1");
    const std::vector<int> scrambled = scramble(frame_bits(spec), kScramblerSeed);
    const std::vector<double> chips = barker_spread(dbpsk_modulate(scrambled));

    IqStream out;
    out.sample_rate_hz = kChipRateHz * spec.oversample;
    out.t0_since_poweron_s = 0.0;
    out.samples.reserve(chips.size() * std::size_t(spec.oversample));
    for (double c : chips)
        for (int k = 0; k < spec.oversample; ++k) out.samples.emplace_back(c, 0.0);
    return out;
}

std::vector<std::uint8_t> ideal_receive_mpdu(const IqStream& stream, int oversample) {
    if (oversample < 1) throw DomainError("ideal_receive_mpdu: oversample must be >= 1");
    const std::size_t n_chips = stream.samples.size() / std::size_t(oversample);
    const std::size_t n_symbols = n_chips / kChipsPerSymbol;
    if (n_symbols <= kPreambleHeaderBits)
        throw DomainError("ideal_receive_mpdu: stream shorter than preamble");

    std::vector<double> symbols(n_symbols);
    for (std::size_t s = 0; s < n_symbols; ++s) {
        double corr = 0.0;
        for (int c = 0; c < kChipsPerSymbol; ++c) {
            double chip = 0.0;
            const std::size_t base = (s * kChipsPerSymbol + std::size_t(c)) * std::size_t(oversample);
            for (int k = 0; k < oversample; ++k) chip += stream.samples[base + std::size_t(k)].real();
            corr += chip * kBarker[std::size_t(c)];
        }
        symbols[s] = corr >= 0.0 ? 1.0 : -1.0;
    }
    const std::vector<int> bits = descramble(dbpsk_demodulate(symbols), kScramblerSeed);
    const std::vector<int> mpdu_bits(bits.begin() + kPreambleHeaderBits, bits.end());
    return bits_to_bytes_lsb_first(mpdu_bits);
}

}
