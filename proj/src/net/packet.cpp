#include "coloc/net/packet.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <iostream>
#include <limits>
#include <string>

#include "coloc/error.hpp"

namespace coloc::net {

namespace wire {

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_f32(std::vector<std::uint8_t>& out, float v) { put_u32(out, std::bit_cast<std::uint32_t>(v)); }
void put_f64(std::vector<std::uint8_t>& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

std::uint16_t get_u16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

std::uint64_t get_u64(const std::uint8_t* p) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

float get_f32(const std::uint8_t* p) { return std::bit_cast<float>(get_u32(p)); }
double get_f64(const std::uint8_t* p) { return std::bit_cast<double>(get_u64(p)); }

void patch_u32(std::vector<std::uint8_t>& out, std::size_t offset, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out[offset + i] = static_cast<std::uint8_t>(v >> (8 * i));
}

}  // namespace wire

bool operator==(const RigidBody& a, const RigidBody& b) {
  if (a.body_id != b.body_id) return false;
  for (int i = 0; i < 3; ++i) {
    if (std::bit_cast<std::uint32_t>(a.position_mm[i]) != std::bit_cast<std::uint32_t>(b.position_mm[i])) {
      return false;
    }
  }
  for (int i = 0; i < 4; ++i) {
    if (std::bit_cast<std::uint32_t>(a.rotation[i]) != std::bit_cast<std::uint32_t>(b.rotation[i])) {
      return false;
    }
  }
  return true;
}

RigidBody placeholder_body(std::uint16_t body_id) {
  constexpr float kNaN = std::numeric_limits<float>::quiet_NaN();
  RigidBody b;
  b.body_id = body_id;
  b.position_mm = {kNaN, kNaN, kNaN};
  b.rotation = {kNaN, kNaN, kNaN, kNaN};
  return b;
}

bool is_placeholder(const RigidBody& body) {
  for (float v : body.position_mm) {
    if (!std::isnan(v)) return false;
  }
  for (float v : body.rotation) {
    if (!std::isnan(v)) return false;
  }
  return true;
}

BodyStatus body_status(const RigidBody& body) {
  if (is_placeholder(body)) return BodyStatus::kPlaceholder;
  double norm_sq = 0.0;
  for (float v : body.position_mm) {
    if (!std::isfinite(v)) return BodyStatus::kCorrupt;
  }
  for (float v : body.rotation) {
    if (!std::isfinite(v)) return BodyStatus::kCorrupt;
    norm_sq += static_cast<double>(v) * v;
  }
  if (norm_sq < 1e-6) return BodyStatus::kCorrupt;
  return BodyStatus::kValid;
}

RigidBody make_body(std::uint16_t body_id, const Pose& engine_pose) {
  const Pose rh = convert_handedness(engine_pose);
  RigidBody b;
  b.body_id = body_id;
  for (int i = 0; i < 3; ++i) b.position_mm[i] = static_cast<float>(rh.translation[i] * 1000.0);
  b.rotation = {static_cast<float>(rh.rotation.w()), static_cast<float>(rh.rotation.x()),
                static_cast<float>(rh.rotation.y()), static_cast<float>(rh.rotation.z())};
  return b;
}

Pose body_pose(const RigidBody& body) {
  Pose rh;
  rh.translation = Vec3(body.position_mm[0], body.position_mm[1], body.position_mm[2]) / 1000.0;
  rh.rotation = Quat(body.rotation[0], body.rotation[1], body.rotation[2], body.rotation[3]).normalized();
  return convert_handedness(rh);
}

void append_packet(std::vector<std::uint8_t>& out, const RigidBodyPacket& packet) {
  if (packet.bodies.size() > kMaxBodies) {
    throw Error(ErrorCode::kInvalidArgument,
                "encode_packet: " + std::to_string(packet.bodies.size()) + " bodies exceeds 64");
  }
  const std::size_t start = out.size();
  wire::put_u32(out, 0);
  wire::put_u32(out, kTypeRigidBody);
  wire::put_u32(out, packet.frame_number);
  wire::put_u64(out, packet.timestamp_us);
  wire::put_u16(out, static_cast<std::uint16_t>(packet.bodies.size()));
  for (const auto& b : packet.bodies) {
    wire::put_u16(out, b.body_id);
    for (float v : b.position_mm) wire::put_f32(out, v);
    for (float v : b.rotation) wire::put_f32(out, v);
  }
  wire::patch_u32(out, start, static_cast<std::uint32_t>(out.size() - start));
}

std::vector<std::uint8_t> encode_packet(const RigidBodyPacket& packet) {
  std::vector<std::uint8_t> out;
  out.reserve(kRigidBodyHeaderSize + packet.bodies.size() * kBodySize);
  append_packet(out, packet);
  return out;
}

void FrameDecoder::feed(std::span<const std::uint8_t> bytes) {
  if (read_ > 0 && read_ == buffer_.size()) {
    buffer_.clear();
    read_ = 0;
  } else if (read_ > 4096 && read_ * 2 > buffer_.size()) {
    buffer_.erase(buffer_.begin(), buffer_.begin() + static_cast<std::ptrdiff_t>(read_));
    read_ = 0;
  }
  buffer_.insert(buffer_.end(), bytes.begin(), bytes.end());
}

DecodeStatus FrameDecoder::next(Frame& out) {
  const std::size_t available = buffer_.size() - read_;
  if (available < kFrameHeaderSize) return DecodeStatus::kNeedMoreBytes;
  const std::uint8_t* p = buffer_.data() + read_;
  const std::uint32_t size = wire::get_u32(p);
  if (size < kFrameHeaderSize || size > kMaxFrameSize) {
    throw Error(ErrorCode::kMalformedFrame,
                "frame size field " + std::to_string(size) + " outside [8, 16384]");
  }
  if (available < size) return DecodeStatus::kNeedMoreBytes;
  out.type = wire::get_u32(p + 4);
  out.bytes.assign(p, p + size);
  read_ += size;
  return DecodeStatus::kFrame;
}

RigidBodyPacket decode_packet(std::span<const std::uint8_t> frame) {
  if (frame.size() < kRigidBodyHeaderSize) {
    throw Error(ErrorCode::kMalformedFrame, "rigid-body frame shorter than header");
  }
  const std::uint8_t* p = frame.data();
  const std::uint32_t size = wire::get_u32(p);
  const std::uint32_t type = wire::get_u32(p + 4);
  if (type != kTypeRigidBody) {
    throw Error(ErrorCode::kMalformedFrame, "not a rigid-body frame (type " + std::to_string(type) + ")");
  }
  RigidBodyPacket packet;
  packet.frame_number = wire::get_u32(p + 8);
  packet.timestamp_us = wire::get_u64(p + 12);
  const std::uint16_t count = wire::get_u16(p + 20);
  if (count > kMaxBodies || size != kRigidBodyHeaderSize + count * kBodySize || size != frame.size()) {
    throw Error(ErrorCode::kMalformedFrame,
                "size field " + std::to_string(size) + " inconsistent with " + std::to_string(count) +
                    " bodies");
  }
  packet.bodies.resize(count);
  const std::uint8_t* b = p + kRigidBodyHeaderSize;
  for (auto& body : packet.bodies) {
    body.body_id = wire::get_u16(b);
    for (int i = 0; i < 3; ++i) body.position_mm[i] = wire::get_f32(b + 2 + 4 * i);
    for (int i = 0; i < 4; ++i) body.rotation[i] = wire::get_f32(b + 14 + 4 * i);
    b += kBodySize;
  }
  return packet;
}

std::optional<RigidBodyPacket> PacketDecoder::next() {
  Frame frame;
  while (frames_.next(frame) == DecodeStatus::kFrame) {
    if (frame.type == kTypeRigidBody) return decode_packet(frame.bytes);
    ++skipped_;
    std::cerr << "warning: skipping frame of unknown type " << frame.type << " (" << frame.bytes.size()
              << " bytes)\n";
  }
  return std::nullopt;
}

std::vector<RigidBodyPacket> decode_capture(std::span<const std::uint8_t> bytes) {
  PacketDecoder decoder;
  decoder.feed(bytes);
  std::vector<RigidBodyPacket> out;
  while (auto packet = decoder.next()) out.push_back(std::move(*packet));
  if (decoder.buffered() != 0) {
    throw Error(ErrorCode::kMalformedFrame,
                "capture ends with " + std::to_string(decoder.buffered()) + " bytes of partial frame");
  }
  return out;
}

}  // namespace coloc::net
