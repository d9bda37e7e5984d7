// Copyright 2026 The ReviewRanker Authors
// SPDX-License-Identifier: Apache-2.0

#include <httplib.h>

#include "json_codec.hpp"
#include "reviewranker/labelserve_http.hpp"

namespace reviewranker::labelserve {

namespace {

using ojson = nlohmann::ordered_json;

constexpr const char* kFallbackPage = R"(<!doctype html>
<html lang="en">
<head><meta charset="utf-8"><title>ReviewRanker labeling</title></head>
<body>
<h1>ReviewRanker labeling service</h1>
<p>The labeling frontend is not installed. The JSON API is available under <code>/api/</code>.</p>
<ul>
<li><code>GET /api/session/{labeler}</code></li>
<li><code>GET /api/session/{labeler}/next</code></li>
<li><code>POST /api/reviews/{id}/label</code></li>
<li><code>GET /api/agreement</code></li>
<li><code>GET /api/export?format=csv|jsonl</code></li>
</ul>
</body>
</html>
)";

void send_json(httplib::Response& res, int status, const ojson& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message) {
  send_json(res, status, {{"error", message}});
}

ojson progress_json(const Progress& p) {
  return {{"completed", p.completed}, {"assigned", p.assigned}};
}

ojson field_errors_json(const std::vector<FieldError>& errors) {
  ojson out = ojson::array();
  for (const auto& e : errors) out.push_back({{"field", e.field}, {"message", e.message}});
  return out;
}

ojson rate_json(std::optional<double> rate) {
  if (!rate) return nullptr;
  return *rate;
}

// Parses the request body into a label, or answers 400 and returns nullopt.
std::optional<std::pair<nlohmann::json, corpus::ReviewLabel>> parse_label_body(
    const httplib::Request& req, httplib::Response& res) {
  auto body = nlohmann::json::parse(req.body, nullptr, false);
  if (body.is_discarded()) {
    send_error(res, 400, "request body is not valid JSON");
    return std::nullopt;
  }
  std::vector<FieldError> errors;
  auto label = detail::label_from_json(body, errors);
  if (!errors.empty()) {
    send_json(res, 400, {{"error", "invalid label"}, {"fields", field_errors_json(errors)}});
    return std::nullopt;
  }
  return std::make_pair(std::move(body), std::move(label));
}

template <typename Fn>
void guarded(httplib::Response& res, Fn&& fn) {
  try {
    fn();
  } catch (const UnknownLabeler& e) {
    send_error(res, 404, e.what());
  } catch (const NotAssigned& e) {
    send_error(res, 403, e.what());
  } catch (const InvalidLabel& e) {
    send_json(res, 400, {{"error", "invalid label"}, {"fields", field_errors_json(e.errors())}});
  } catch (const ExportBlocked& e) {
    send_json(res, 409, {{"error", e.what()}, {"blocked_review_ids", e.review_ids()}});
  } catch (const std::exception& e) {
    send_error(res, 500, e.what());
  }
}

}  // namespace

struct LabelServer::Impl {
  httplib::Server server;
};

LabelServer::LabelServer(LabelService& service, ServerOptions options)
    : impl_(std::make_unique<Impl>()), options_(std::move(options)) {
  auto& srv = impl_->server;
  // httplib's default also sets SO_REUSEPORT, which would let a second
  // instance share the port instead of failing.
  srv.set_socket_options([](socket_t sock) {
    int yes = 1;
    ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });

  srv.Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
    send_json(res, 200, {{"status", "ok"}});
  });

  srv.Get("/api/session/:labeler", [&service](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      auto s = service.session(req.path_params.at("labeler"));
      ojson completed = ojson::array();
      for (const auto& id : s.assigned_ids) {
        if (s.completed_ids.contains(id)) completed.push_back(id);
      }
      send_json(res, 200,
                {{"labeler_id", s.labeler_id},
                 {"assigned_ids", s.assigned_ids},
                 {"completed_ids", completed},
                 {"progress", progress_json({s.completed(), s.assigned()})}});
    });
  });

  srv.Get("/api/session/:labeler/next",
          [&service](const httplib::Request& req, httplib::Response& res) {
            guarded(res, [&] {
              auto next = service.next_unlabeled(req.path_params.at("labeler"));
              ojson body;
              body["done"] = !next.review.has_value();
              body["review"] = next.review ? ojson(detail::review_to_json(*next.review)) : ojson();
              body["progress"] = progress_json(next.progress);
              send_json(res, 200, body);
            });
          });

  srv.Post("/api/reviews/:id/label", [&service](const httplib::Request& req,
                                                httplib::Response& res) {
    guarded(res, [&] {
      auto parsed = parse_label_body(req, res);
      if (!parsed) return;
      auto& [body, label] = *parsed;
      auto labeler = body.find("labeler_id");
      if (labeler == body.end() || !labeler->is_string() || labeler->get<std::string>().empty()) {
        send_json(res, 400,
                  {{"error", "invalid label"},
                   {"fields", field_errors_json({{"labeler_id", "missing"}})}});
        return;
      }
      auto result = service.submit_label(req.path_params.at("id"), labeler->get<std::string>(),
                                         std::move(label));
      send_json(res, 200,
                {{"ok", true},
                 {"review_id", req.path_params.at("id")},
                 {"progress", progress_json(result.progress)},
                 {"warnings", result.warnings}});
    });
  });

  srv.Post("/api/reviews/:id/resolve", [&service](const httplib::Request& req,
                                                  httplib::Response& res) {
    guarded(res, [&] {
      auto parsed = parse_label_body(req, res);
      if (!parsed) return;
      service.resolve(req.path_params.at("id"), std::move(parsed->second));
      send_json(res, 200, {{"ok", true}, {"review_id", req.path_params.at("id")}});
    });
  });

  srv.Get("/api/agreement", [&service](const httplib::Request&, httplib::Response& res) {
    guarded(res, [&] {
      auto report = service.agreement();
      ojson disagreements = ojson::array();
      for (const auto& d : report.disagreements) {
        ojson answers = ojson::object();
        for (const auto& [labeler, label] : d.answers) answers[labeler] = detail::label_to_json(label);
        disagreements.push_back(
            {{"review_id", d.review_id}, {"questions", d.questions}, {"answers", answers}});
      }
      send_json(res, 200,
                {{"shared_pool", report.shared_pool},
                 {"reviews_compared", report.reviews_compared},
                 {"rates",
                  {{"operation", rate_json(report.operation_rate)},
                   {"add_understood", rate_json(report.add_rate)},
                   {"remove_understood", rate_json(report.remove_rate)}}},
                 {"disagreements", disagreements}});
    });
  });

  srv.Get("/api/export", [&service](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      std::string name = req.has_param("format") ? req.get_param_value("format") : "csv";
      auto format = corpus::parse_format(name);
      if (!format) {
        send_error(res, 400, "format must be csv or jsonl");
        return;
      }
      auto result = service.export_corpus();
      res.status = 200;
      const bool csv = *format == corpus::Format::Csv;
      res.set_header("Content-Disposition",
                     std::string("attachment; filename=\"labels.") + (csv ? "csv" : "jsonl") + "\"");
      if (!result.majority_resolved.empty()) {
        std::string ids;
        for (const auto& id : result.majority_resolved) ids += (ids.empty() ? "" : ",") + id;
        res.set_header("X-Majority-Resolved", ids);
      }
      res.set_content(corpus::serialize_corpus(result.corpus, *format),
                      csv ? "text/csv" : "application/x-ndjson");
    });
  });

  bool mounted = false;
  if (!options_.static_dir.empty()) {
    if (!std::filesystem::is_directory(options_.static_dir)) {
      throw std::runtime_error("static directory not found: " + options_.static_dir.string());
    }
    mounted = srv.set_mount_point("/", options_.static_dir.string());
  }
  if (!mounted) {
    srv.Get("/", [](const httplib::Request&, httplib::Response& res) {
      res.set_content(kFallbackPage, "text/html; charset=utf-8");
    });
  }
}

LabelServer::~LabelServer() { stop(); }

void LabelServer::bind() {
  auto& srv = impl_->server;
  if (options_.port == 0) {
    port_ = srv.bind_to_any_port(options_.host);
    if (port_ < 0) throw std::runtime_error("cannot bind to " + options_.host);
  } else {
    if (!srv.bind_to_port(options_.host, options_.port)) {
      throw std::runtime_error("cannot listen on " + options_.host + ":" +
                               std::to_string(options_.port) + " (port in use?)");
    }
    port_ = options_.port;
  }
}

void LabelServer::serve() { impl_->server.listen_after_bind(); }

void LabelServer::stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

}  // namespace reviewranker::labelserve
