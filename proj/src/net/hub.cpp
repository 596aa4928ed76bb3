#include "coloc/net/hub.hpp"

#include <mutex>
#include <string>

#include "coloc/error.hpp"
#include "coloc/net/packet.hpp"

namespace coloc::net {

namespace {

void put_pose(std::vector<std::uint8_t>& out, const Pose& p) {
  for (int i = 0; i < 3; ++i) wire::put_f64(out, p.translation[i]);
  wire::put_f64(out, p.rotation.w());
  wire::put_f64(out, p.rotation.x());
  wire::put_f64(out, p.rotation.y());
  wire::put_f64(out, p.rotation.z());
}

Pose get_pose(const std::uint8_t* p) {
  Pose out;
  for (int i = 0; i < 3; ++i) out.translation[i] = wire::get_f64(p + 8 * i);
  out.rotation = Quat(wire::get_f64(p + 24), wire::get_f64(p + 32), wire::get_f64(p + 40),
                      wire::get_f64(p + 48));
  return out;
}

void check_frame(std::span<const std::uint8_t> frame, std::uint32_t type, std::size_t size) {
  if (frame.size() != size || wire::get_u32(frame.data()) != size ||
      wire::get_u32(frame.data() + 4) != type) {
    throw Error(ErrorCode::kMalformedFrame,
                "expected a " + std::to_string(size) + "-byte frame of type " + std::to_string(type));
  }
}

}  // namespace

std::vector<std::uint8_t> encode_shared_pose(const SharedPoseMessage& msg) {
  std::vector<std::uint8_t> out;
  out.reserve(kSharedPoseSize);
  wire::put_u32(out, kSharedPoseSize);
  wire::put_u32(out, kTypeSharedPose);
  wire::put_u16(out, msg.user_id);
  wire::put_u32(out, msg.frame_number);
  put_pose(out, msg.head);
  put_pose(out, msg.left_hand);
  put_pose(out, msg.right_hand);
  return out;
}

SharedPoseMessage decode_shared_pose(std::span<const std::uint8_t> frame) {
  check_frame(frame, kTypeSharedPose, kSharedPoseSize);
  const std::uint8_t* p = frame.data() + 8;
  SharedPoseMessage msg;
  msg.user_id = wire::get_u16(p);
  msg.frame_number = wire::get_u32(p + 2);
  msg.head = get_pose(p + 6);
  msg.left_hand = get_pose(p + 62);
  msg.right_hand = get_pose(p + 118);
  return msg;
}

std::vector<std::uint8_t> encode_register(std::uint16_t user_id) {
  std::vector<std::uint8_t> out;
  wire::put_u32(out, kRegisterSize);
  wire::put_u32(out, kTypeRegister);
  wire::put_u16(out, user_id);
  return out;
}

std::uint16_t decode_register(std::span<const std::uint8_t> frame) {
  check_frame(frame, kTypeRegister, kRegisterSize);
  return wire::get_u16(frame.data() + 8);
}

void PoseHub::register_user(std::uint16_t user_id) {
  std::unique_lock lock(mutex_);
  users_.try_emplace(user_id);
}

bool PoseHub::is_registered(std::uint16_t user_id) const {
  std::shared_lock lock(mutex_);
  return users_.count(user_id) != 0;
}

bool PoseHub::publish(const SharedPoseMessage& msg) {
  std::unique_lock lock(mutex_);
  auto it = users_.find(msg.user_id);
  if (it == users_.end()) {
    throw Error(ErrorCode::kRegistration, "publish from unregistered user " + std::to_string(msg.user_id));
  }
  if (it->second && msg.frame_number <= it->second->frame_number) return false;
  it->second = msg;
  return true;
}

std::vector<SharedPoseMessage> PoseHub::poll(std::uint16_t user_id) const {
  std::shared_lock lock(mutex_);
  if (users_.count(user_id) == 0) {
    throw Error(ErrorCode::kRegistration, "poll from unregistered user " + std::to_string(user_id));
  }
  std::vector<SharedPoseMessage> out;
  for (const auto& [id, msg] : users_) {
    if (id != user_id && msg) out.push_back(*msg);
  }
  return out;
}

std::optional<SharedPoseMessage> PoseHub::latest(std::uint16_t user_id) const {
  std::shared_lock lock(mutex_);
  auto it = users_.find(user_id);
  if (it == users_.end()) return std::nullopt;
  return it->second;
}

}  // namespace coloc::net
