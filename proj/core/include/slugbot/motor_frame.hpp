#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>

#include "slugbot/neural.hpp"

namespace slugbot::wire {

// Five-byte frame: sync, sequence, bitfield lo, bitfield hi, XOR checksum.
//
// Bitfield (little-endian u16):
//   bit 0 RU1      bit 3 B10      bit 6 Opener
//   bit 1 RU2      bit 4 B38      bit 7 Closer
//   bit 2 RU3      bit 5 B43_B45  bit 8 I2_drive
// Bits 9..15 are reserved and must be zero.
inline constexpr std::uint8_t kSyncByte = 0xA5;
inline constexpr std::size_t kFrameSize = 5;
using FrameBytes = std::array<std::uint8_t, kFrameSize>;

class FrameError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::uint16_t pack_commands(const neural::MotorCommands& c);
neural::MotorCommands unpack_commands(std::uint16_t bits);

FrameBytes encode_motor_frame(const neural::MotorFrame& f);

/// The timestamp is not carried on the wire; the receiver stamps arrival time.
neural::MotorFrame decode_motor_frame(std::span<const std::uint8_t> bytes, double received_at_ms);

}  // namespace slugbot::wire
