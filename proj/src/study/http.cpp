#include <sstream>

#include "httplib.h"
#include "json.hpp"
#include "lfqa/error.hpp"
#include "lfqa/study.hpp"

namespace lfqa {

using nlohmann::json;

namespace {

int status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNotFound: return 404;
    case ErrorCode::kRejected: return 409;
    case ErrorCode::kIo: return 500;
    default: return 400;
  }
}

void send_error(httplib::Response& res, int status, const std::string& code,
                const std::string& message) {
  res.status = status;
  res.set_content(json{{"error", code}, {"message", message}}.dump(), "application/json");
}

// Pair description for the client: no condition identities.
json client_pair(const StudyServer& study, const PairAssignment& p, std::size_t position,
                 std::size_t total) {
  return {{"pair_id", p.pair_id},
          {"position", position},
          {"total", total},
          {"views_left", study.view_count(p.pair_id, Side::kLeft)},
          {"views_right", study.view_count(p.pair_id, Side::kRight)}};
}

json session_state(const StudyServer& study, const Session& s) {
  json j = {{"session_id", s.session_id},
            {"total", s.queue.size()},
            {"answered", s.cursor},
            {"complete", s.complete()},
            {"min_coverage", kMinViewCoverage}};
  j["pair"] = s.complete() ? json(nullptr)
                           : client_pair(study, s.queue[s.cursor], s.cursor, s.queue.size());
  return j;
}

std::vector<std::string> split_commas(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream in(text);
  for (std::string item; std::getline(in, item, ',');) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// Runs `body`, mapping library errors to JSON error responses.
template <typename F>
void guarded(httplib::Response& res, F&& body) {
  try {
    body();
  } catch (const Error& e) {
    send_error(res, status_for(e.code()), error_code_name(e.code()), e.what());
  } catch (const json::exception& e) {
    send_error(res, 400, "format", e.what());
  } catch (const std::exception& e) {
    send_error(res, 500, "internal", e.what());
  }
}

}  // namespace

struct HttpStudyServer::Impl {
  StudyServer& study;
  HttpOptions options;
  httplib::Server server;
};

HttpStudyServer::HttpStudyServer(StudyServer& study, HttpOptions options)
    : impl_(new Impl{study, std::move(options), {}}) {
  StudyServer& s = impl_->study;
  httplib::Server& svr = impl_->server;
  // httplib's default adds SO_REUSEPORT, which would let a second server
  // share a busy port instead of failing.
  svr.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
  });

  svr.Get("/session", [&s](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const std::string observer = req.get_param_value("observer");
      std::vector<std::string> scenes = split_commas(req.get_param_value("scenes"));
      if (scenes.empty() && !req.has_param("scenes")) scenes = s.index().scenes();
      const Session session = s.create_session(observer, scenes);
      res.set_content(session_state(s, session).dump(), "application/json");
    });
  });

  svr.Get(R"(/session/([A-Za-z0-9_-]+))", [&s](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      res.set_content(session_state(s, s.session(req.matches[1])).dump(), "application/json");
    });
  });

  svr.Get(R"(/pair/([A-Za-z0-9_-]+)/(left|right)/(\d+))",
          [&s](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] {
              const std::string index = req.matches[3];
              if (index.size() > 9) throw Error(ErrorCode::kNotFound, "view index out of range");
              const Bytes png = s.view(req.matches[1], side_from_name(req.matches[2]),
                                       std::stoi(index));
              res.set_header("Cache-Control", "public, max-age=31536000, immutable");
              res.set_content(std::string(png.begin(), png.end()), "image/png");
            });
          });

  svr.Post("/response", [&s](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const json j = json::parse(req.body);
      ResponseRecord r;
      r.session_id = j.at("session_id").get<std::string>();
      r.pair_id = j.at("pair_id").get<std::string>();
      r.winner = side_from_name(j.at("winner").get<std::string>());
      r.views_seen_left = j.at("views_seen_left").get<double>();
      r.views_seen_right = j.at("views_seen_right").get<double>();
      r.response_time_ms = j.value("response_time_ms", 0.0);
      s.submit(r);
      res.set_content(session_state(s, s.session(r.session_id)).dump(), "application/json");
    });
  });

  svr.Get("/export", [&s](const httplib::Request&, httplib::Response& res) {
    guarded(res, [&] {
      const ExportResult exported = s.export_all();
      res.set_header("X-Corrupt-Lines", std::to_string(exported.corrupt_lines));
      res.set_content(comparison_rows_to_csv(exported.rows), "text/csv");
    });
  });
}

HttpStudyServer::~HttpStudyServer() = default;

int HttpStudyServer::bind() {
  const HttpOptions& o = impl_->options;
  if (o.port == 0) {
    const int port = impl_->server.bind_to_any_port(o.host);
    if (port < 0) throw Error(ErrorCode::kIo, "cannot bind " + o.host);
    return port;
  }
  if (!impl_->server.bind_to_port(o.host, o.port)) {
    throw Error(ErrorCode::kIo, "cannot bind " + o.host + ":" + std::to_string(o.port));
  }
  return o.port;
}

void HttpStudyServer::listen() { impl_->server.listen_after_bind(); }

void HttpStudyServer::stop() { impl_->server.stop(); }

}  // namespace lfqa
