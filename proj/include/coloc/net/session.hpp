#pragma once

#include <cstdint>
#include <map>

#include "coloc/geom.hpp"
#include "coloc/net/packet.hpp"

namespace coloc::net {

enum class SessionPhase { kAwaitingData, kTracking };

struct BodyTrack {
  Pose pose;  // engine frame, meters
  bool has_pose = false;
  std::uint32_t frame_number = 0;
  std::uint64_t timestamp_us = 0;
  std::uint32_t stale_count = 0;    // placeholder or corrupt packets since last valid pose
  std::uint32_t corrupt_count = 0;  // total partially-NaN / non-finite bodies seen
  bool updated = false;             // set by the step that delivered `pose`
};

// Per-client view of the mocap stream. Starts awaiting data while the server
// sends placeholders; the first packet carrying a real pose for the tracked
// body switches to tracking. There is no way back.
struct SessionState {
  SessionPhase phase = SessionPhase::kAwaitingData;
  std::uint16_t tracked_body = 1;
  std::map<std::uint16_t, BodyTrack> bodies;
  std::uint64_t packets_seen = 0;
};

SessionState session_step(const SessionState& state, const RigidBodyPacket& packet);

}  // namespace coloc::net
