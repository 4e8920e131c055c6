#pragma once
// Ideal IEEE 802.11b 1 Mbps DSSS baseband synthesis: long preamble, PLCP
// header, DBPSK, Barker-11 spreading, rectangular chips. Output is real
// (Q = 0) until the channel rotates it.

#include <array>
#include <cstdint>
#include <vector>

#include "rffp/iq.hpp"

namespace rffp {

inline constexpr double kChipRateHz = 11e6;
inline constexpr double kBitRateBps = 1e6;
inline constexpr int kChipsPerSymbol = 11;
inline constexpr int kPreambleHeaderBits = 192;  // 128 SYNC + 16 SFD + 48 PLCP header
inline constexpr std::uint8_t kScramblerSeed = 0x6C;

inline constexpr std::array<double, 11> kBarker = {+1, -1, +1, +1, -1, +1,
                                                   +1, +1, -1, -1, -1};

struct FrameSpec {
    // MSDU payload carried between the 24-byte MAC header and the 4-byte FCS.
    // Default 18 zero bytes makes payload-plus-headers 46 bytes and the frame
    // exactly 560 us, the closest whole-byte duration to the 559 us target.
    std::vector<std::uint8_t> payload_bytes = std::vector<std::uint8_t>(18, 0);
    std::array<std::uint8_t, 6> mac_address = {0x02, 0x11, 0x22, 0x33, 0x44, 0x55};
    int oversample = 1;

    std::size_t mpdu_len() const { return 24 + payload_bytes.size() + 4; }
};

// On-air duration: (192 preamble/header bits + 8 per MPDU byte) at 1 Mbps.
double frame_duration_s(const FrameSpec& spec);

// Self-synchronizing scrambler z^-7 xor z^-4 xor 1. seed's low 7 bits preload
// the shift register (bit i = y[n-(i+1)]); seed with all-zero state is
// rejected. descramble() with the same seed inverts scramble() exactly.
std::vector<int> scramble(const std::vector<int>& bits, std::uint8_t seed);
std::vector<int> descramble(const std::vector<int>& bits, std::uint8_t seed);

// Each +/-1 symbol multiplied by the 11-chip Barker sequence.
std::vector<double> barker_spread(const std::vector<double>& symbols);

// symbol[k] = symbol[k-1] * (bit ? -1 : +1), symbol[-1] = +1.
std::vector<double> dbpsk_modulate(const std::vector<int>& bits);
std::vector<int> dbpsk_demodulate(const std::vector<double>& symbols);

// Full PPDU bit sequence before scrambling (SYNC ones, SFD, PLCP header,
// MPDU with MAC header and FCS), LSB-first per byte.
std::vector<int> frame_bits(const FrameSpec& spec);

// Scrambled, modulated, spread, rectangular-chip baseband at 11 MHz x oversample.
IqStream synthesize_frame(const FrameSpec& spec);

// Ideal receiver at the synthesis rate: despread, differential-decode,
// descramble; returns the recovered MPDU bytes (header + payload + FCS).
std::vector<std::uint8_t> ideal_receive_mpdu(const IqStream& stream, int oversample);

std::uint16_t crc16_ccitt(const std::uint8_t* data, std::size_t len);
std::uint32_t crc32_ieee(const std::uint8_t* data, std::size_t len);

std::vector<int> bytes_to_bits_lsb_first(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> bits_to_bytes_lsb_first(const std::vector<int>& bits);

}
