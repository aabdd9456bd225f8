#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace vnoip {

/// One repost: `child` forwarded from `parent` at an absolute timestamp.
struct CascadeEvent {
  std::int64_t parent = 0;
  std::int64_t child = 0;
  double time = 0.0;
};

/// One diffusion record. Events are sorted by time and every event's parent
/// is already a participant when it fires; the root publishes at
/// `publish_time`, which is the minimum timestamp.
struct Cascade {
  std::int64_t id = 0;
  std::int64_t root = 0;
  double publish_time = 0.0;
  std::vector<CascadeEvent> events;

  /// Cumulative popularity: participants up to and including time t
  /// (the root counts, so popularity at the i-th event is i + 1).
  double popularity_at(double t) const;
  std::int64_t observed_participants(double t_obs) const;
};

/// Canonical retweet-path text format, one cascade per line:
///   id<TAB>root<TAB>t0<TAB>n<TAB>path_1 path_2 ...
/// where each path is `u0/u1/.../uk:t` (forwarding chain, colon, timestamp
/// relative to t0), n counts the paths, and the last two users of a multi-user
/// path define one repost edge. The first path is the root alone at time 0.
std::vector<Cascade> parse_dataset(const std::string& path);
Cascade parse_cascade_line(const std::string& line, long line_no);
std::string format_cascade(const Cascade& cascade);
void save_dataset(const std::vector<Cascade>& cascades, const std::string& path);

}  // namespace vnoip
