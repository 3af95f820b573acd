#include "lfqa/study.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <set>

#include "json.hpp"
#include "lfqa/error.hpp"
#include "lfqa/rng.hpp"
#include "lfqa/scaling.hpp"

namespace lfqa {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  const auto ms =
      std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[80];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900,
                tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec, static_cast<int>(ms));
  return buf;
}

json pair_json(const PairAssignment& p) {
  return {{"pair_id", p.pair_id}, {"scene", p.scene},           {"first", p.first},
          {"second", p.second},   {"side_swap", p.side_swap}};
}

PairAssignment pair_from_json(const json& j) {
  PairAssignment p;
  p.pair_id = j.at("pair_id").get<std::string>();
  p.scene = j.at("scene").get<std::string>();
  p.first = j.at("first").get<std::string>();
  p.second = j.at("second").get<std::string>();
  p.side_swap = j.at("side_swap").get<bool>();
  return p;
}

void append_line(const fs::path& path, const std::string& line) {
  std::ofstream out(path, std::ios::app | std::ios::binary);
  out << line << '\n';
  out.flush();
  if (!out) throw Error(ErrorCode::kIo, "cannot append to " + path.string());
}

}  // namespace

const char* side_name(Side side) { return side == Side::kLeft ? "left" : "right"; }

Side side_from_name(const std::string& name) {
  if (name == "left") return Side::kLeft;
  if (name == "right") return Side::kRight;
  throw Error(ErrorCode::kInvalidArgument, "side must be 'left' or 'right'");
}

std::vector<PairAssignment> build_queue(const DatasetIndex& index, const std::string& session_id,
                                        const std::string& observer_id,
                                        const std::vector<std::string>& scenes,
                                        std::uint64_t seed) {
  if (scenes.empty()) throw Error(ErrorCode::kInvalidArgument, "empty scene subset");
  std::uint64_t s = hash_combine(seed, hash_string(observer_id));
  for (const std::string& scene : scenes) s = hash_combine(s, hash_string(scene));
  Rng rng(s);

  std::vector<PairAssignment> queue;
  for (const std::string& scene : scenes) {
    std::vector<Condition> conditions;
    for (const IndexEntry& e : index.conditions) {
      if (e.scene == scene) conditions.push_back(e.level == 0 ? Condition{"", 0} : Condition{e.kind, e.level});
    }
    if (conditions.empty()) throw Error(ErrorCode::kNotFound, "unknown scene '" + scene + "'");
    SchedulePolicy policy;
    policy.seed = rng.next();
    policy.shuffle = false;
    for (const ScheduledPair& p : schedule_pairs(conditions, policy)) {
      queue.push_back({"", scene, p.first.id(), p.second.id(), p.side_swap});
    }
  }
  for (std::size_t i = queue.size(); i > 1; --i) std::swap(queue[i - 1], queue[rng.below(i)]);
  char suffix[16];
  for (std::size_t i = 0; i < queue.size(); ++i) {
    std::snprintf(suffix, sizeof suffix, "-%03zu", i);
    queue[i].pair_id = session_id + suffix;
  }
  return queue;
}

std::string session_header_line(const Session& session) {
  json queue = json::array();
  for (const PairAssignment& p : session.queue) queue.push_back(pair_json(p));
  return json{{"type", "session"},
              {"session_id", session.session_id},
              {"observer_id", session.observer_id},
              {"scenes", session.scenes},
              {"seed", session.seed},
              {"created_at", session.created_at},
              {"queue", queue},
              // The study is shown as a monocular view sweep, not on a
              // stereoscopic head-tracked display.
              {"display", "monocular-sweep"}}
      .dump();
}

std::string response_line(const ResponseRecord& r, const PairAssignment& pair,
                          const std::string& observer_id) {
  json j = pair_json(pair);
  j["type"] = "response";
  j["session_id"] = r.session_id;
  j["observer_id"] = observer_id;
  j["winner"] = side_name(r.winner);
  j["views_seen_left"] = r.views_seen_left;
  j["views_seen_right"] = r.views_seen_right;
  j["response_time_ms"] = r.response_time_ms;
  j["timestamp"] = r.timestamp;
  return j.dump();
}

ExportResult export_log_lines(const std::vector<std::string>& lines) {
  ExportResult out;
  for (const std::string& line : lines) {
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      const std::string type = j.at("type").get<std::string>();
      if (type == "session") continue;
      if (type != "response") throw std::runtime_error("unknown record type");
      const PairAssignment p = pair_from_json(j);
      const Side winner = side_from_name(j.at("winner").get<std::string>());
      ComparisonRow row;
      row.observer_id = j.at("observer_id").get<std::string>();
      row.scene = p.scene;
      row.cond_i = p.first;
      row.cond_j = p.second;
      row.winner = winner == Side::kLeft ? p.left() : p.right();
      out.rows.push_back(std::move(row));
    } catch (const std::exception&) {
      ++out.corrupt_lines;
    }
  }
  return out;
}

ExportResult export_logs(const fs::path& log_dir) {
  std::vector<fs::path> files;
  if (fs::is_directory(log_dir)) {
    for (const auto& e : fs::directory_iterator(log_dir)) {
      if (e.is_regular_file() && e.path().extension() == ".jsonl") files.push_back(e.path());
    }
  }
  std::sort(files.begin(), files.end());
  std::vector<std::string> lines;
  for (const fs::path& f : files) {
    std::ifstream in(f, std::ios::binary);
    for (std::string line; std::getline(in, line);) lines.push_back(line);
  }
  return export_log_lines(lines);
}

StudyServer::StudyServer(StudyConfig config) : config_(std::move(config)) {
  index_ = load_index(config_.dataset_root);
  for (const IndexEntry& e : index_.conditions) {
    const fs::path dir = config_.dataset_root / e.path;
    const Manifest m = manifest_from_json(read_text_file(dir / kManifestFile));
    view_counts_[e.path] = m.angular_count;
  }
  fs::create_directories(config_.log_dir);
  restore();
}

void StudyServer::restore() {
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(config_.log_dir)) {
    if (e.path().extension() == ".jsonl") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  for (const fs::path& f : files) {
    std::ifstream in(f, std::ios::binary);
    Session* current = nullptr;
    for (std::string line; std::getline(in, line);) {
      try {
        const json j = json::parse(line);
        if (j.at("type") == "session") {
          Session s;
          s.session_id = j.at("session_id").get<std::string>();
          s.observer_id = j.at("observer_id").get<std::string>();
          s.scenes = j.at("scenes").get<std::vector<std::string>>();
          s.seed = j.at("seed").get<std::uint64_t>();
          s.created_at = j.at("created_at").get<std::string>();
          for (const json& p : j.at("queue")) s.queue.push_back(pair_from_json(p));
          current = &(sessions_[s.session_id] = std::move(s));
          int number = 0;
          if (std::sscanf(current->session_id.c_str(), "S%d", &number) == 1) {
            next_session_ = std::max(next_session_, number + 1);
          }
        } else if (current != nullptr && !current->complete() &&
                   j.at("pair_id") == current->queue[current->cursor].pair_id) {
          ++current->cursor;
        }
      } catch (const std::exception&) {
        // Corrupt lines are counted at export time.
      }
    }
  }
}

fs::path StudyServer::log_path(const std::string& session_id) const {
  return config_.log_dir / ("session_" + session_id + ".jsonl");
}

Session StudyServer::create_session(const std::string& observer_id,
                                    const std::vector<std::string>& scenes) {
  if (observer_id.empty() || observer_id.find_first_of(",\"\r\n") != std::string::npos) {
    throw Error(ErrorCode::kInvalidArgument, "bad observer id");
  }
  std::lock_guard lock(mutex_);
  char id[16];
  std::snprintf(id, sizeof id, "S%04d", next_session_);
  Session s;
  s.session_id = id;
  s.observer_id = observer_id;
  s.scenes = scenes;
  s.seed = config_.seed;
  s.queue = build_queue(index_, s.session_id, observer_id, scenes, config_.seed);
  s.created_at = utc_now();
  append_line(log_path(s.session_id), session_header_line(s));
  ++next_session_;
  sessions_[s.session_id] = s;
  return s;
}

Session StudyServer::session(const std::string& session_id) const {
  std::lock_guard lock(mutex_);
  const auto it = sessions_.find(session_id);
  if (it == sessions_.end()) throw Error(ErrorCode::kNotFound, "unknown session '" + session_id + "'");
  return it->second;
}

StudyServer::Located StudyServer::locate(const std::string& pair_id) const {
  const auto dash = pair_id.rfind('-');
  const auto it = dash == std::string::npos ? sessions_.end() : sessions_.find(pair_id.substr(0, dash));
  if (it != sessions_.end()) {
    for (const PairAssignment& p : it->second.queue) {
      if (p.pair_id == pair_id) return {&it->second, &p};
    }
  }
  throw Error(ErrorCode::kNotFound, "unknown pair '" + pair_id + "'");
}

fs::path StudyServer::condition_dir(const std::string& scene, const std::string& id) const {
  const IndexEntry* e = index_.find(scene, id);
  if (e == nullptr) throw Error(ErrorCode::kNotFound, "condition " + scene + "/" + id + " missing");
  return e->path;
}

int StudyServer::view_count(const std::string& pair_id, Side side) const {
  std::lock_guard lock(mutex_);
  const Located at = locate(pair_id);
  const std::string& id = side == Side::kLeft ? at.pair->left() : at.pair->right();
  return view_counts_.at(condition_dir(at.pair->scene, id).string());
}

Bytes StudyServer::view(const std::string& pair_id, Side side, int view_index) const {
  fs::path rel;
  int count = 0;
  {
    std::lock_guard lock(mutex_);
    const Located at = locate(pair_id);
    const std::string& id = side == Side::kLeft ? at.pair->left() : at.pair->right();
    rel = condition_dir(at.pair->scene, id);
    count = view_counts_.at(rel.string());
  }
  if (view_index < 0 || view_index >= count) {
    throw Error(ErrorCode::kNotFound, "view index " + std::to_string(view_index) +
                                          " outside 0.." + std::to_string(count - 1));
  }
  // Assets are immutable, so reads need no lock.
  return read_file(config_.dataset_root / rel / view_file_name(view_index));
}

std::optional<PairAssignment> StudyServer::submit(ResponseRecord r) {
  for (double c : {r.views_seen_left, r.views_seen_right}) {
    if (!(c >= 0.0 && c <= 1.0)) {
      throw Error(ErrorCode::kInvalidArgument, "view coverage must lie in [0,1]");
    }
  }
  std::lock_guard lock(mutex_);
  const auto it = sessions_.find(r.session_id);
  if (it == sessions_.end()) {
    throw Error(ErrorCode::kNotFound, "unknown session '" + r.session_id + "'");
  }
  Session& s = it->second;
  if (s.complete() || s.queue[s.cursor].pair_id != r.pair_id) {
    throw Error(ErrorCode::kRejected, "stale or duplicate pair id '" + r.pair_id + "'");
  }
  if (r.views_seen_left < kMinViewCoverage || r.views_seen_right < kMinViewCoverage) {
    throw Error(ErrorCode::kRejected, "insufficient view coverage");
  }
  if (r.timestamp.empty()) r.timestamp = utc_now();
  append_line(log_path(s.session_id), response_line(r, s.queue[s.cursor], s.observer_id));
  ++s.cursor;
  if (s.complete()) return std::nullopt;
  return s.queue[s.cursor];
}

ExportResult StudyServer::export_all() const {
  std::lock_guard lock(mutex_);
  return export_logs(config_.log_dir);
}

}  // namespace lfqa
