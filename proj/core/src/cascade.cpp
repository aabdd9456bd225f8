#include "vnoip/cascade.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "vnoip/errors.hpp"

namespace vnoip {

namespace {

/// Shortest representation that round-trips exactly.
std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = s.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

std::int64_t parse_int(const std::string& s, long line_no, const char* what) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ParseError(std::string("bad ") + what + " `" + s + "`", line_no);
  }
  return v;
}

double parse_double(const std::string& s, long line_no, const char* what) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ParseError(std::string("bad ") + what + " `" + s + "`", line_no);
  }
  return v;
}

}  // namespace

double Cascade::popularity_at(double t) const {
  const CascadeEvent probe{0, 0, t};
  auto it = std::upper_bound(events.begin(), events.end(), probe,
                             [](const CascadeEvent& a, const CascadeEvent& b) {
                               return a.time < b.time;
                             });
  return 1.0 + static_cast<double>(it - events.begin());
}

std::int64_t Cascade::observed_participants(double t_obs) const {
  return static_cast<std::int64_t>(popularity_at(t_obs));
}

Cascade parse_cascade_line(const std::string& line, long line_no) {
  const std::vector<std::string> fields = split(line, '\t');
  if (fields.size() != 5) {
    throw ParseError("expected 5 tab-separated fields, got " + std::to_string(fields.size()),
                     line_no);
  }
  Cascade c;
  c.id = parse_int(fields[0], line_no, "cascade id");
  c.root = parse_int(fields[1], line_no, "root user");
  c.publish_time = parse_double(fields[2], line_no, "publish time");
  const std::int64_t declared = parse_int(fields[3], line_no, "participant count");

  const std::vector<std::string> paths = split(fields[4], ' ');
  if (static_cast<std::int64_t>(paths.size()) != declared) {
    throw ParseError("declared " + std::to_string(declared) + " paths but found " +
                     std::to_string(paths.size()), line_no);
  }

  std::unordered_set<std::int64_t> seen{c.root};
  double prev_time = c.publish_time;
  for (std::size_t p = 0; p < paths.size(); ++p) {
    const std::string& path = paths[p];
    const std::size_t colon = path.rfind(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 >= path.size()) {
      throw ParseError("path `" + path + "` is missing `chain:time`", line_no);
    }
    const double rel = parse_double(path.substr(colon + 1), line_no, "timestamp");
    const std::vector<std::string> chain = split(path.substr(0, colon), '/');
    std::vector<std::int64_t> users;
    users.reserve(chain.size());
    for (const std::string& u : chain) users.push_back(parse_int(u, line_no, "user id"));

    if (p == 0) {
      if (users.size() != 1 || users[0] != c.root) {
        throw ParseError("first path must be the root user alone", line_no);
      }
      continue;
    }
    if (users.size() < 2) {
      throw ParseError("repost path `" + path + "` needs at least two users", line_no);
    }
    const std::int64_t parent = users[users.size() - 2];
    const std::int64_t child = users.back();
    if (!seen.count(parent)) {
      throw ParseError("parent " + std::to_string(parent) +
                       " reposted before appearing in the cascade", line_no);
    }
    const double t = c.publish_time + rel;
    if (t < prev_time) {
      throw ParseError("timestamps must be non-decreasing", line_no);
    }
    prev_time = t;
    c.events.push_back(CascadeEvent{parent, child, t});
    seen.insert(child);
  }
  return c;
}

std::vector<Cascade> parse_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open dataset " + path);
  std::vector<Cascade> cascades;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    cascades.push_back(parse_cascade_line(line, line_no));
  }
  return cascades;
}

std::string format_cascade(const Cascade& cascade) {
  // Chains are rebuilt from parent links; when a user participated more than
  // once the first introduction wins (only the last two users carry the edge).
  std::unordered_map<std::int64_t, std::string> chain_of;
  chain_of[cascade.root] = std::to_string(cascade.root);

  std::ostringstream os;
  os << cascade.id << '\t' << cascade.root << '\t' << format_double(cascade.publish_time)
     << '\t' << (cascade.events.size() + 1) << '\t' << cascade.root << ":0";
  for (const CascadeEvent& e : cascade.events) {
    auto it = chain_of.find(e.parent);
    if (it == chain_of.end()) {
      throw ConfigError("cascade " + std::to_string(cascade.id) + ": event parent " +
                        std::to_string(e.parent) + " never appeared");
    }
    const std::string chain = it->second + "/" + std::to_string(e.child);
    os << ' ' << chain << ':' << format_double(e.time - cascade.publish_time);
    chain_of.emplace(e.child, chain);
  }
  return os.str();
}

void save_dataset(const std::vector<Cascade>& cascades, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write dataset " + path);
  for (const Cascade& c : cascades) out << format_cascade(c) << '\n';
}

}  // namespace vnoip
