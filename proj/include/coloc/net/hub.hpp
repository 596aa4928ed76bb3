#pragma once

// Peer pose sharing. Each client publishes its user's head and hand poses;
// every other client receives the latest one. Shared-pose frame (type 7):
//
//   u32 total_size = 182, u32 type = 7
//   u16 user_id, u32 frame_number
//   3 x { f64 pos[3] (m, engine frame), f64 quat[4] (w,x,y,z) }  head, left, right
//
// Register frame (type 8): u32 total_size = 10, u32 type = 8, u16 user_id.

#include <cstdint>
#include <map>
#include <optional>
#include <shared_mutex>
#include <span>
#include <vector>

#include "coloc/geom.hpp"

namespace coloc::net {

inline constexpr std::size_t kSharedPoseSize = 182;
inline constexpr std::size_t kRegisterSize = 10;

struct SharedPoseMessage {
  std::uint16_t user_id = 0;
  Pose head;
  Pose left_hand;
  Pose right_hand;
  std::uint32_t frame_number = 0;
};

std::vector<std::uint8_t> encode_shared_pose(const SharedPoseMessage& msg);
SharedPoseMessage decode_shared_pose(std::span<const std::uint8_t> frame);
std::vector<std::uint8_t> encode_register(std::uint16_t user_id);
std::uint16_t decode_register(std::span<const std::uint8_t> frame);

// Latest-wins store, safe for concurrent publish/poll. Per user, publishes
// with a frame number not above the stored one are dropped.
class PoseHub {
 public:
  void register_user(std::uint16_t user_id);
  bool is_registered(std::uint16_t user_id) const;
  // Returns false for a stale (dropped) message. Throws Error(kRegistration)
  // for an unknown user.
  bool publish(const SharedPoseMessage& msg);
  // Latest message of every other registered user that has published,
  // ordered by user id. Never includes the caller's own message.
  std::vector<SharedPoseMessage> poll(std::uint16_t user_id) const;
  std::optional<SharedPoseMessage> latest(std::uint16_t user_id) const;

 private:
  mutable std::shared_mutex mutex_;
  std::map<std::uint16_t, std::optional<SharedPoseMessage>> users_;
};

}  // namespace coloc::net
