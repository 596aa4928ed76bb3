#include "coloc/net/session.hpp"

#include <algorithm>

namespace coloc::net {

SessionState session_step(const SessionState& state, const RigidBodyPacket& packet) {
  SessionState next = state;
  ++next.packets_seen;
  for (auto& [id, track] : next.bodies) track.updated = false;

  if (next.phase == SessionPhase::kAwaitingData) {
    const auto it = std::find_if(packet.bodies.begin(), packet.bodies.end(),
                                 [&](const RigidBody& b) { return b.body_id == state.tracked_body; });
    if (it == packet.bodies.end() || body_status(*it) != BodyStatus::kValid) return next;
    next.phase = SessionPhase::kTracking;
  }

  for (const auto& body : packet.bodies) {
    BodyTrack& track = next.bodies[body.body_id];
    switch (body_status(body)) {
      case BodyStatus::kValid:
        track.pose = body_pose(body);
        track.has_pose = true;
        track.frame_number = packet.frame_number;
        track.timestamp_us = packet.timestamp_us;
        track.stale_count = 0;
        track.updated = true;
        break;
      case BodyStatus::kPlaceholder:
        ++track.stale_count;
        break;
      case BodyStatus::kCorrupt:
        ++track.corrupt_count;
        ++track.stale_count;
        break;
    }
  }
  return next;
}

}  // namespace coloc::net
