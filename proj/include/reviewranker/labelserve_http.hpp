// Copyright 2026 The ReviewRanker Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "reviewranker/labelserve.hpp"

namespace reviewranker::labelserve {

struct ServerOptions {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  // Frontend assets served at "/". Empty uses the built-in page.
  std::filesystem::path static_dir;
};

/// JSON API over a LabelService:
///   GET  /healthz
///   GET  /api/session/{labeler}
///   GET  /api/session/{labeler}/next
///   POST /api/reviews/{id}/label     body: label fields + labeler_id
///   POST /api/reviews/{id}/resolve   body: label fields (admin decision)
///   GET  /api/agreement
///   GET  /api/export?format=csv|jsonl
class LabelServer {
 public:
  LabelServer(LabelService& service, ServerOptions options);
  ~LabelServer();
  LabelServer(const LabelServer&) = delete;
  LabelServer& operator=(const LabelServer&) = delete;

  /// Binds the socket. Throws std::runtime_error if the port is taken.
  void bind();
  int port() const noexcept { return port_; }
  /// Serves until stop(). bind() must have been called.
  void serve();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  ServerOptions options_;
  int port_ = 0;
};

}  // namespace reviewranker::labelserve
