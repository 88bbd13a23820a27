#include "slugbot/motor_frame.hpp"

#include <string>

namespace slugbot::wire {

namespace {
constexpr std::uint16_t kReservedMask = 0xFE00;
}

std::uint16_t pack_commands(const neural::MotorCommands& c) {
  std::uint16_t bits = 0;
  auto put = [&bits](bool on, int bit) {
    if (on) bits |= static_cast<std::uint16_t>(1u << bit);
  };
  put(c.ru1, 0);
  put(c.ru2, 1);
  put(c.ru3, 2);
  put(c.b10, 3);
  put(c.b38, 4);
  put(c.b43_b45, 5);
  put(c.opener, 6);
  put(c.closer, 7);
  put(c.i2_drive, 8);
  return bits;
}

neural::MotorCommands unpack_commands(std::uint16_t bits) {
  auto get = [bits](int bit) { return (bits >> bit & 1u) != 0; };
  neural::MotorCommands c;
  c.ru1 = get(0);
  c.ru2 = get(1);
  c.ru3 = get(2);
  c.b10 = get(3);
  c.b38 = get(4);
  c.b43_b45 = get(5);
  c.opener = get(6);
  c.closer = get(7);
  c.i2_drive = get(8);
  return c;
}

FrameBytes encode_motor_frame(const neural::MotorFrame& f) {
  const std::uint16_t bits = pack_commands(f.commands);
  FrameBytes out{kSyncByte, f.sequence, static_cast<std::uint8_t>(bits & 0xFF),
                 static_cast<std::uint8_t>(bits >> 8), 0};
  out[4] = out[0] ^ out[1] ^ out[2] ^ out[3];
  return out;
}

neural::MotorFrame decode_motor_frame(std::span<const std::uint8_t> bytes, double received_at_ms) {
  if (bytes.size() != kFrameSize) {
    throw FrameError("motor frame: expected 5 bytes, got " + std::to_string(bytes.size()));
  }
  if (bytes[0] != kSyncByte) throw FrameError("motor frame: bad sync byte");
  if ((bytes[0] ^ bytes[1] ^ bytes[2] ^ bytes[3]) != bytes[4]) {
    throw FrameError("motor frame: checksum mismatch");
  }
  const auto bits = static_cast<std::uint16_t>(bytes[2] | (bytes[3] << 8));
  if (bits & kReservedMask) throw FrameError("motor frame: reserved bits set");

  neural::MotorFrame f;
  f.commands = unpack_commands(bits);
  f.sequence = bytes[1];
  f.timestamp_ms = received_at_ms;
  return f;
}

}  // namespace slugbot::wire
