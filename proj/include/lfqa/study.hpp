#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "lfqa/dataset.hpp"
#include "lfqa/io.hpp"
#include "lfqa/report.hpp"

namespace lfqa {

enum class Side { kLeft, kRight };
const char* side_name(Side side);
Side side_from_name(const std::string& name);

struct PairAssignment {
  std::string pair_id;  // <session_id>-NNN
  std::string scene;
  // Underlying scheduled order: `first` is the less distorted condition.
  std::string first;
  std::string second;
  // When set, `second` is shown on the left.
  bool side_swap = false;

  const std::string& left() const { return side_swap ? second : first; }
  const std::string& right() const { return side_swap ? first : second; }
  bool operator==(const PairAssignment&) const = default;
};

struct Session {
  std::string session_id;
  std::string observer_id;
  std::vector<std::string> scenes;
  std::uint64_t seed = 0;
  std::vector<PairAssignment> queue;
  std::size_t cursor = 0;
  std::string created_at;

  bool complete() const { return cursor >= queue.size(); }
};

struct ResponseRecord {
  std::string session_id;
  std::string pair_id;
  Side winner = Side::kLeft;
  double views_seen_left = 0.0;
  double views_seen_right = 0.0;
  double response_time_ms = 0.0;
  std::string timestamp;
};

// Fraction of the angular views that must have been displayed on each side.
inline constexpr double kMinViewCoverage = 0.8;

// Builds the pair queue for one observer: neighboring-level pairs per kind
// for every scene, shuffled with side swaps. Depends only on the arguments.
std::vector<PairAssignment> build_queue(const DatasetIndex& index, const std::string& session_id,
                                        const std::string& observer_id,
                                        const std::vector<std::string>& scenes,
                                        std::uint64_t seed);

// Session log lines: a "session" header followed by "response" lines that
// carry the pair metadata.
std::string session_header_line(const Session& session);
std::string response_line(const ResponseRecord& r, const PairAssignment& pair,
                          const std::string& observer_id);

struct ExportResult {
  std::vector<ComparisonRow> rows;
  int corrupt_lines = 0;
};
// Folds log lines into comparison rows, undoing side swaps. Lines that do
// not parse are skipped and counted.
ExportResult export_log_lines(const std::vector<std::string>& lines);
// Every *.jsonl file under `log_dir`, in file-name order.
ExportResult export_logs(const std::filesystem::path& log_dir);

struct StudyConfig {
  std::filesystem::path dataset_root;  // a distorted tree with index.json
  std::filesystem::path log_dir;
  std::uint64_t seed = 0;
};

// Protocol state shared by the HTTP layer and tests. Thread safe.
class StudyServer {
 public:
  explicit StudyServer(StudyConfig config);

  // Empty `scenes` is an error; unknown scenes are kNotFound.
  Session create_session(const std::string& observer_id, const std::vector<std::string>& scenes);
  Session session(const std::string& session_id) const;

  // PNG bytes of one view of the condition shown on `side`.
  Bytes view(const std::string& pair_id, Side side, int view_index) const;
  int view_count(const std::string& pair_id, Side side) const;

  // Validates and logs a response, returning the next pair (nullopt when the
  // session is complete). Throws kRejected on coverage or stale pair ids.
  std::optional<PairAssignment> submit(ResponseRecord r);

  ExportResult export_all() const;
  const DatasetIndex& index() const { return index_; }

 private:
  struct Located {
    const Session* session;
    const PairAssignment* pair;
  };
  Located locate(const std::string& pair_id) const;
  std::filesystem::path condition_dir(const std::string& scene, const std::string& id) const;
  std::filesystem::path log_path(const std::string& session_id) const;
  void restore();

  StudyConfig config_;
  DatasetIndex index_;
  std::map<std::string, int> view_counts_;  // by condition path
  mutable std::mutex mutex_;
  std::map<std::string, Session> sessions_;
  int next_session_ = 1;
};

struct HttpOptions {
  std::string host = "127.0.0.1";
  int port = 8080;
};
// GET /session, GET /session/{id}, GET /pair/{id}/{side}/{index},
// POST /response, GET /export.
class HttpStudyServer {
 public:
  HttpStudyServer(StudyServer& study, HttpOptions options);
  ~HttpStudyServer();
  // Binds and returns the port; throws kIo if the port is taken.
  int bind();
  // Serves until stop() is called.
  void listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace lfqa
