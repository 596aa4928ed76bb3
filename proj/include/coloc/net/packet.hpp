#pragma once

// Framed little-endian wire format shared by the mocap stream and the pose
// hub. Every frame starts with
//
//   u32 total_size   bytes in the frame, header included
//   u32 type
//
// Rigid-body frame (type 6):
//
//   u32 frame_number
//   u64 timestamp_us
//   u16 body_count   <= 64
//   body_count x { u16 body_id, f32 pos[3] (mm, RH Z-up), f32 quat[4] (w,x,y,z) }
//
// A body whose seven floats are all NaN is the "not tracked yet" placeholder.

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "coloc/geom.hpp"

namespace coloc::net {

inline constexpr std::uint32_t kTypeRigidBody = 6;
inline constexpr std::uint32_t kTypeSharedPose = 7;
inline constexpr std::uint32_t kTypeRegister = 8;

inline constexpr std::size_t kFrameHeaderSize = 8;
inline constexpr std::size_t kRigidBodyHeaderSize = 22;
inline constexpr std::size_t kBodySize = 30;
inline constexpr std::size_t kMaxBodies = 64;
inline constexpr std::size_t kMaxFrameSize = 16 * 1024;

struct RigidBody {
  std::uint16_t body_id = 0;
  std::array<float, 3> position_mm{};
  std::array<float, 4> rotation{1.0f, 0.0f, 0.0f, 0.0f};  // w, x, y, z

  // Bitwise comparison, so NaN payloads compare equal to themselves.
  friend bool operator==(const RigidBody& a, const RigidBody& b);
};

struct RigidBodyPacket {
  std::uint32_t frame_number = 0;
  std::uint64_t timestamp_us = 0;
  std::vector<RigidBody> bodies;

  friend bool operator==(const RigidBodyPacket& a, const RigidBodyPacket& b) = default;
};

enum class BodyStatus { kValid, kPlaceholder, kCorrupt };

RigidBody placeholder_body(std::uint16_t body_id);
bool is_placeholder(const RigidBody& body);
// kCorrupt covers partially-NaN or non-finite payloads and zero quaternions.
BodyStatus body_status(const RigidBody& body);

// Engine-frame pose (meters, LH Y-up) <-> wire body (mm, RH Z-up).
RigidBody make_body(std::uint16_t body_id, const Pose& engine_pose);
Pose body_pose(const RigidBody& body);

// Throws Error(kInvalidArgument) above kMaxBodies.
std::vector<std::uint8_t> encode_packet(const RigidBodyPacket& packet);
void append_packet(std::vector<std::uint8_t>& out, const RigidBodyPacket& packet);

// Little-endian primitives, exposed for the other frame types.
namespace wire {
void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v);
void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v);
void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v);
void put_f32(std::vector<std::uint8_t>& out, float v);
void put_f64(std::vector<std::uint8_t>& out, double v);
std::uint16_t get_u16(const std::uint8_t* p);
std::uint32_t get_u32(const std::uint8_t* p);
std::uint64_t get_u64(const std::uint8_t* p);
float get_f32(const std::uint8_t* p);
double get_f64(const std::uint8_t* p);
void patch_u32(std::vector<std::uint8_t>& out, std::size_t offset, std::uint32_t v);
}  // namespace wire

// One complete frame cut from a byte stream.
struct Frame {
  std::uint32_t type = 0;
  std::vector<std::uint8_t> bytes;  // whole frame, header included
};

enum class DecodeStatus { kFrame, kNeedMoreBytes };

// Reassembles frames from arbitrarily chunked reads. Not thread-safe; one
// decoder per connection.
class FrameDecoder {
 public:
  void feed(std::span<const std::uint8_t> bytes);
  // Cuts the next frame if one is complete. Throws Error(kMalformedFrame)
  // when the size field is outside [kFrameHeaderSize, kMaxFrameSize]; the
  // stream cannot be resynchronized after that.
  DecodeStatus next(Frame& out);
  std::size_t buffered() const { return buffer_.size() - read_; }

 private:
  std::vector<std::uint8_t> buffer_;
  std::size_t read_ = 0;
};

// Parses a single type-6 frame. Throws Error(kMalformedFrame) when the size
// field disagrees with the body count or the type is wrong.
RigidBodyPacket decode_packet(std::span<const std::uint8_t> frame);

// FrameDecoder + decode_packet. Frames of other types are skipped and
// counted.
class PacketDecoder {
 public:
  void feed(std::span<const std::uint8_t> bytes) { frames_.feed(bytes); }
  std::optional<RigidBodyPacket> next();
  std::size_t skipped_frames() const { return skipped_; }
  std::size_t buffered() const { return frames_.buffered(); }

 private:
  FrameDecoder frames_;
  std::size_t skipped_ = 0;
};

// Decodes a complete capture (concatenated frames). Trailing partial data is
// reported as kMalformedFrame.
std::vector<RigidBodyPacket> decode_capture(std::span<const std::uint8_t> bytes);

}  // namespace coloc::net
