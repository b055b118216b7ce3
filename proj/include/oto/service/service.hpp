#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "oto/classifier/model.hpp"
#include "oto/generator/model.hpp"

namespace oto::service {

inline constexpr std::size_t kDefaultMaxBodyBytes = 8u << 20;

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::filesystem::path classifier_checkpoint;
  std::filesystem::path generator_checkpoint;
  std::size_t max_body_bytes = kDefaultMaxBodyBytes;
  int timeout_seconds = 30;
  generator::DecodeConfig decode;
};

/// Status code and UTF-8 JSON body.
struct Response {
  int status = 200;
  std::string body;
};

/// Request handlers over two loaded checkpoints. Handlers never mutate the
/// models, so one instance may serve concurrent requests.
class InferenceService {
 public:
  /// Throws CheckpointError when either checkpoint fails to load.
  explicit InferenceService(ServiceConfig config);

  /// POST /classify. `content_type` selects the decoder (image/png, image/jpeg).
  Response classify(std::string_view body, std::string_view content_type) const;
  /// POST /summarize; `label_override` carries the X-Label-Override header.
  Response summarize(std::string_view body, std::string_view content_type,
                     const std::optional<std::string>& label_override = std::nullopt) const;
  /// GET /health.
  Response health() const;

  const ServiceConfig& config() const { return config_; }

 private:
  ServiceConfig config_;
  classifier::ClassifierModel classifier_;
  generator::GeneratorModel generator_;
  std::string health_body_;
};

/// HTTP front end. The payload limit is enforced before handlers run.
class HttpServer {
 public:
  explicit HttpServer(const InferenceService& service);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds host:port (port 0 picks a free one) and returns the bound port.
  /// Throws IoError when binding fails.
  int bind();
  /// Serves until stop(); call after bind().
  void listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace oto::service
